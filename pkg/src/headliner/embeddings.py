"""GloVe-format vector parsing and embedding-matrix assembly."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .numerics import Array
from .text import PAD_INDEX, TokenSequence, Vocabulary

log = logging.getLogger(__name__)


class EmbeddingError(ValueError):
    """Malformed vector file or inconsistent dimensions."""


@dataclass
class EmbeddingMatrix:
    """Vocabulary-indexed dense word vectors.

    Row v is the vector for vocabulary index v. The PAD row is all-zero
    and is never touched by training. coverage is the fraction of non-PAD
    vocabulary entries found in the pretrained file.
    """

    matrix: Array
    trainable: bool = False
    coverage: float = 0.0

    @property
    def d(self) -> int:
        return self.matrix.shape[1]

    @property
    def vocab_size(self) -> int:
        return self.matrix.shape[0]


def parse_glove(path: str) -> dict[str, np.ndarray]:
    """Parse a text-format vector file: token followed by d reals per line.

    All lines must share one dimension. Duplicate tokens keep the last
    occurrence; the number of duplicates is logged as a warning.
    """
    vectors: dict[str, np.ndarray] = {}
    d: int | None = None
    duplicates = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            parts = raw.rstrip("\n").split()
            if not parts:
                continue
            token, comps = parts[0], parts[1:]
            if not comps:
                raise EmbeddingError(f"line {lineno}: no vector components after token {token!r}")
            try:
                vec = np.array([float(c) for c in comps], dtype=np.float64)
            except ValueError:
                raise EmbeddingError(f"line {lineno}: non-numeric vector component") from None
            if d is None:
                d = vec.shape[0]
            elif vec.shape[0] != d:
                raise EmbeddingError(f"dim mismatch at line {lineno}: expected {d}, got {vec.shape[0]}")
            if token in vectors:
                duplicates += 1
            vectors[token] = vec
    if duplicates:
        log.warning("vector file %s: %d duplicate tokens, last occurrence kept", path, duplicates)
    return vectors


def build_matrix(vocab: Vocabulary, pretrained: dict[str, np.ndarray], d: int,
                 seed: int, trainable: bool = False) -> EmbeddingMatrix:
    """Assemble the V x d matrix for a vocabulary.

    In-vocabulary tokens found in `pretrained` copy those vectors; every
    other non-PAD row (UNK included) is initialized uniform(-0.05, 0.05)
    from the seed, drawn in index order so the result is reproducible.
    """
    if d <= 0:
        raise EmbeddingError(f"embedding dimension must be positive, got {d}")
    rng = np.random.default_rng(seed)
    v = len(vocab)
    matrix = np.zeros((v, d), dtype=np.float64)
    found = 0
    for idx in range(1, v):
        token = vocab.tokens[idx]
        vec = pretrained.get(token)
        if vec is not None:
            if vec.shape != (d,):
                raise EmbeddingError(
                    f"pretrained vector for {token!r} has dimension {vec.shape[0]}, expected {d}")
            matrix[idx] = vec
            found += 1
        else:
            matrix[idx] = rng.uniform(-0.05, 0.05, size=d)
    coverage = found / (v - 1)
    return EmbeddingMatrix(matrix=matrix, trainable=trainable, coverage=coverage)


def lookup(emb: EmbeddingMatrix, seq: TokenSequence) -> Array:
    """Rows for the first `length` indices of the sequence (no PAD rows)."""
    indices = seq.indices[:seq.length]
    for i in indices:
        if not (0 <= i < emb.vocab_size):
            raise IndexError(f"token index {i} outside vocabulary of size {emb.vocab_size}")
    return emb.matrix[list(indices)]
