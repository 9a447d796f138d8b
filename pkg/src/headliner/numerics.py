"""Float64 array substrate shared by every model.

Activations, named parameter sets, the Adam optimizer, global-norm
gradient clipping, and a central-difference gradient checker. All
arrays are row-major float64 numpy arrays; speed is a non-goal,
determinism and checkability are.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator, Mapping

import numpy as np

Array = np.ndarray


class ShapeError(ValueError):
    """Operand shapes are incompatible."""


class NonFiniteError(FloatingPointError):
    """A value that must be finite is NaN or infinite."""


def check_finite(name: str, arr: Array) -> None:
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"{name} contains NaN or Inf")


def as_array(values, shape: tuple[int, ...] | None = None, name: str = "array") -> Array:
    """Coerce to a finite float64 array, optionally enforcing a shape."""
    arr = np.asarray(values, dtype=np.float64)
    if shape is not None and arr.shape != shape:
        raise ShapeError(f"{name}: expected shape {shape}, got {arr.shape}")
    check_finite(name, arr)
    return arr


def matmul(a: Array, b: Array) -> Array:
    """Matrix product with explicit shape checking (64-bit accumulation)."""
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError(f"matmul needs 2-D operands, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def sigmoid(x: Array | float) -> Array:
    """Elementwise 1 / (1 + exp(-x)), stable for large |x|."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def tanh(x: Array | float) -> Array:
    return np.tanh(np.asarray(x, dtype=np.float64))


def hadamard(a: Array, b: Array) -> Array:
    """Componentwise product; shapes must match exactly."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"hadamard shapes differ: {a.shape} vs {b.shape}")
    return a * b


class ParamSet:
    """Named set of float64 arrays with frozen shapes.

    Iteration order is always name-sorted, so any loop over a ParamSet is
    deterministic regardless of insertion order. Assigning to an existing
    name copies values into the stored array (identity is preserved, which
    keeps optimizer state and model views in sync).
    """

    def __init__(self, arrays: Mapping[str, Array] | None = None):
        self._arrays: dict[str, Array] = {}
        if arrays:
            for name in sorted(arrays):
                self.add(name, arrays[name])

    def add(self, name: str, array) -> None:
        if name in self._arrays:
            raise ValueError(f"duplicate parameter name: {name!r}")
        arr = np.asarray(array, dtype=np.float64)
        check_finite(name, arr)
        self._arrays[name] = arr

    def names(self) -> list[str]:
        return sorted(self._arrays)

    def __getitem__(self, name: str) -> Array:
        return self._arrays[name]

    def __setitem__(self, name: str, values) -> None:
        if name not in self._arrays:
            raise KeyError(name)
        arr = np.asarray(values, dtype=np.float64)
        target = self._arrays[name]
        if arr.shape != target.shape:
            raise ShapeError(f"{name}: cannot assign shape {arr.shape} to {target.shape}")
        np.copyto(target, arr)

    def __contains__(self, name: str) -> bool:
        return name in self._arrays

    def __iter__(self) -> Iterator[str]:
        return iter(self.names())

    def __len__(self) -> int:
        return len(self._arrays)

    def items(self) -> Iterator[tuple[str, Array]]:
        for name in self.names():
            yield name, self._arrays[name]

    def copy(self) -> "ParamSet":
        return ParamSet({name: arr.copy() for name, arr in self.items()})

    def zeros_like(self) -> "ParamSet":
        return ParamSet({name: np.zeros_like(arr) for name, arr in self.items()})

    def num_values(self) -> int:
        return sum(arr.size for arr in self._arrays.values())


@dataclass
class AdamState:
    """First/second moment accumulators plus hyperparameters.

    alpha may be mutated between steps (plateau schedule); moments are
    keyed by parameter name and zero-initialized.
    """

    alpha: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: dict[str, Array] = field(default_factory=dict)
    v: dict[str, Array] = field(default_factory=dict)


def adam_init(params: ParamSet, alpha: float = 1e-3, beta1: float = 0.9,
              beta2: float = 0.999, eps: float = 1e-8) -> AdamState:
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    state = AdamState(alpha=alpha, beta1=beta1, beta2=beta2, eps=eps)
    for name, arr in params.items():
        state.m[name] = np.zeros_like(arr)
        state.v[name] = np.zeros_like(arr)
    return state


def adam_step(params: ParamSet, grads: ParamSet, state: AdamState) -> None:
    """One in-place Adam update with bias correction.

    m <- b1*m + (1-b1)*g, v <- b2*v + (1-b2)*g^2,
    theta <- theta - alpha * mhat / (sqrt(vhat) + eps).
    """
    if params.names() != grads.names():
        raise ShapeError(f"gradient names {grads.names()} do not match parameters {params.names()}")
    for name, g in grads.items():
        if g.shape != params[name].shape:
            raise ShapeError(f"{name}: gradient shape {g.shape} vs parameter {params[name].shape}")
        check_finite(f"gradient {name}", g)
    state.t += 1
    bc1 = 1.0 - state.beta1 ** state.t
    bc2 = 1.0 - state.beta2 ** state.t
    for name, g in grads.items():
        m = state.m[name]
        v = state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        mhat = m / bc1
        vhat = v / bc2
        params[name] = params[name] - state.alpha * mhat / (np.sqrt(vhat) + state.eps)
        check_finite(f"parameter {name} after adam step", params[name])


def global_norm(grads: ParamSet) -> float:
    total = 0.0
    for _, g in grads.items():
        total += float(np.sum(g * g))
    return float(np.sqrt(total))


def clip_global_norm(grads: ParamSet, max_norm: float = 5.0) -> float:
    """Scale all gradients so their joint L2 norm is at most max_norm.

    Returns the pre-clip norm.
    """
    norm = global_norm(grads)
    if norm > max_norm and norm > 0.0:
        scale = max_norm / norm
        for name in grads.names():
            grads[name] = grads[name] * scale
    return norm


def grad_check(f: Callable[[ParamSet], float], params: ParamSet, analytic: ParamSet,
               h: float = 1e-5, max_coords_per_param: int | None = None,
               seed: int = 0) -> float:
    """Max relative error between analytic gradients and central differences.

    Perturbs each checked coordinate by +-h, restoring it afterwards.
    relative error = |num - ana| / max(|num|, |ana|, 1e-8). Coordinates may
    be subsampled (seeded) for large parameters.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    rng = np.random.default_rng(seed)
    worst = 0.0
    for name, arr in params.items():
        ana = analytic[name]
        n = arr.size
        if max_coords_per_param is not None and n > max_coords_per_param:
            coords = rng.choice(n, size=max_coords_per_param, replace=False)
        else:
            coords = range(n)
        flat = arr.reshape(-1)
        ana_flat = ana.reshape(-1)
        for idx in coords:
            orig = flat[idx]
            flat[idx] = orig + h
            f_plus = f(params)
            flat[idx] = orig - h
            f_minus = f(params)
            flat[idx] = orig
            num = (f_plus - f_minus) / (2.0 * h)
            rel = abs(num - ana_flat[idx]) / max(abs(num), abs(ana_flat[idx]), 1e-8)
            worst = max(worst, rel)
    return worst
