"""Synthetic corpus generators.

The original production datasets are not distributable, so the test and
acceptance suites run on generated corpora with known structure: a
marker-token corpus (label = token presence), an order-sensitive corpus
(label = relative order of two markers, invisible to bag-of-words), and
a synthetic pretrained embedding that encodes the marker signal.
"""

from __future__ import annotations

import random

import numpy as np

from .corpus import Headline, LabeledExample

_FILLER_PREFIX = "word"


def _fillers(n_fillers: int) -> list[str]:
    return [f"{_FILLER_PREFIX}{i:02d}" for i in range(n_fillers)]


def marker_corpus(n: int, seed: int, marker: str = "viral", n_fillers: int = 20,
                  min_len: int = 6, max_len: int = 12) -> list[LabeledExample]:
    """Titles of random filler tokens; exactly half contain the marker token.

    label = 1 iff the marker is present, so the task is learnable by any
    model that can detect one token anywhere in the sequence.
    """
    if n < 2:
        raise ValueError("need at least 2 examples")
    rng = random.Random(seed)
    fillers = _fillers(n_fillers)
    labels = [1] * (n // 2) + [0] * (n - n // 2)
    rng.shuffle(labels)
    out = []
    for i, label in enumerate(labels):
        length = rng.randint(min_len, max_len)
        tokens = [rng.choice(fillers) for _ in range(length)]
        if label:
            tokens[rng.randrange(length)] = marker
        out.append(LabeledExample(
            headline=Headline(id=f"m{i:06d}", title=" ".join(tokens),
                              metric=float(label), group="synthetic"),
            label=label))
    return out


def order_corpus(n: int, seed: int, first: str = "alpha", second: str = "beta",
                 n_fillers: int = 20, min_len: int = 8, max_len: int = 12) -> list[LabeledExample]:
    """Titles containing both marker tokens; label = 1 iff `first` precedes `second`.

    Both classes have identical token multisets in distribution, so any
    order-blind representation (bag-of-words) is at chance by construction.
    """
    if n < 2:
        raise ValueError("need at least 2 examples")
    rng = random.Random(seed)
    fillers = _fillers(n_fillers)
    labels = [1] * (n // 2) + [0] * (n - n // 2)
    rng.shuffle(labels)
    out = []
    for i, label in enumerate(labels):
        length = rng.randint(min_len, max_len)
        tokens = [rng.choice(fillers) for _ in range(length)]
        p1, p2 = sorted(rng.sample(range(length), 2))
        if label:
            tokens[p1], tokens[p2] = first, second
        else:
            tokens[p1], tokens[p2] = second, first
        out.append(LabeledExample(
            headline=Headline(id=f"o{i:06d}", title=" ".join(tokens),
                              metric=float(label), group="synthetic"),
            label=label))
    return out


def signal_pretrained(d: int, seed: int, marker: str = "viral", n_fillers: int = 20,
                      signal_scale: float = 2.0) -> dict[str, np.ndarray]:
    """Synthetic stand-in for a pretrained vector file.

    The marker token gets a large vector along a fixed axis; fillers get
    small random vectors. Initializing an embedding from this map makes
    the marker linearly separable from the start, mimicking the head
    start a real pretrained embedding gives.
    """
    if d < 1:
        raise ValueError("d must be at least 1")
    rng = np.random.default_rng(seed)
    vectors: dict[str, np.ndarray] = {}
    for tok in _fillers(n_fillers):
        vectors[tok] = rng.normal(0.0, 0.1, size=d)
    marker_vec = rng.normal(0.0, 0.1, size=d)
    marker_vec[0] = signal_scale
    vectors[marker] = marker_vec
    return vectors


def write_vectors(vectors: dict[str, np.ndarray], path: str) -> None:
    """Write token vectors in the plain text format the vector parser reads."""
    with open(path, "w", encoding="utf-8") as fh:
        for tok in sorted(vectors):
            comps = " ".join(repr(float(x)) for x in vectors[tok])
            fh.write(f"{tok} {comps}\n")


def random_metric_headlines(n: int, n_groups: int, seed: int,
                            metric_max: int = 40) -> list[Headline]:
    """Headlines with integer metrics over month-like groups.

    The small metric range makes ties at the group median common, which
    is what the labeling code must handle.
    """
    rng = random.Random(seed)
    return [Headline(id=f"h{i:06d}",
                     title=f"story number {i}",
                     metric=float(rng.randrange(0, metric_max + 1)),
                     group=f"2016-{(i % n_groups) + 1:02d}")
            for i in range(n)]
