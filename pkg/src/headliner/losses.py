"""Binary cross-entropy with the probability clamp used everywhere."""

from __future__ import annotations

import math
from typing import Sequence

PROB_CLAMP = 1e-7


def clamp_probability(p: float) -> float:
    """Clamp into [1e-7, 1 - 1e-7] so the log never sees 0 or 1."""
    return min(max(p, PROB_CLAMP), 1.0 - PROB_CLAMP)


def bce_loss(p: float, y: int) -> float:
    """-[y ln p + (1-y) ln(1-p)] on the clamped probability."""
    if y not in (0, 1):
        raise ValueError(f"label must be 0 or 1, got {y}")
    pc = clamp_probability(p)
    return -(y * math.log(pc) + (1 - y) * math.log(1.0 - pc))


def bce_sigmoid_grad(p: float, y: int) -> float:
    """d loss / d logit for loss = bce(sigmoid(logit), y).

    The log derivative is evaluated at the clamped probability (no division
    by zero); the sigmoid derivative uses the true p, so the gradient is
    exactly zero when the prediction saturates at the label. Away from
    saturation this reduces algebraically to p - y.
    """
    pc = clamp_probability(p)
    dp = -y / pc + (1 - y) / (1.0 - pc)
    return dp * p * (1.0 - p)


def bce_batch(ps: Sequence[float], ys: Sequence[int]) -> float:
    """Mean binary cross-entropy over a batch."""
    if len(ps) != len(ys) or not ps:
        raise ValueError("batch probabilities and labels must be non-empty and equal length")
    return sum(bce_loss(p, y) for p, y in zip(ps, ys)) / len(ps)
