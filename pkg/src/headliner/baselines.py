"""Comparison systems: Bag-of-Words + linear SVM, and a word-level CNN.

The SVM is a primal stochastic subgradient solver (Pegasos-style) on the
hinge loss with an L2 penalty; the CNN stacks three conv/ReLU/max-pool
blocks over the embedded title, then a dense sigmoid head with dropout
and L2 on the dense weights.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from .embeddings import EmbeddingMatrix, lookup
from .numerics import (Array, NonFiniteError, ParamSet, ShapeError, check_finite,
                       sigmoid)
from .losses import bce_loss, bce_sigmoid_grad
from .text import PAD_INDEX, TokenSequence, Vocabulary


class ConfigError(ValueError):
    """Structurally impossible model configuration."""


# ---------------------------------------------------------------------------
# Bag-of-Words + SVM
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BowVector:
    """Sparse token-count vector over the vocabulary."""

    counts: dict[int, int]
    dim: int

    def total(self) -> int:
        return sum(self.counts.values())


@dataclass
class SvmParams:
    w: Array            # (V,)
    b: float
    lam: float

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("regularization lambda must be positive")


def bow_featurize(seq: TokenSequence, vocab: Vocabulary, binary: bool = False) -> BowVector:
    """Counts of each vocabulary index in the sequence; UNK counts, PAD never appears."""
    counts: dict[int, int] = {}
    for idx in seq.indices[:seq.length]:
        if idx == PAD_INDEX:
            continue
        counts[idx] = counts.get(idx, 0) + 1
    if binary:
        counts = {k: 1 for k in counts}
    return BowVector(counts=counts, dim=len(vocab))


def _margin(params: SvmParams, x: BowVector) -> float:
    if x.dim != params.w.shape[0]:
        raise ShapeError(f"feature dimension {x.dim} does not match weights {params.w.shape[0]}")
    return float(sum(params.w[i] * c for i, c in x.counts.items()) + params.b)


def hinge_objective(params: SvmParams, data: list[tuple[BowVector, int]],
                    include_reg: bool = True) -> float:
    """Mean hinge loss, optionally plus the lambda/2 ||w||^2 penalty."""
    total = 0.0
    for x, label in data:
        y = 1.0 if label == 1 else -1.0
        total += max(0.0, 1.0 - y * _margin(params, x))
    loss = total / len(data)
    if include_reg:
        loss += 0.5 * params.lam * float(params.w @ params.w)
    return loss


def svm_train(data: list[tuple[BowVector, int]], lam: float = 1e-4, epochs: int = 50,
              seed: int = 0,
              on_epoch=None) -> tuple[SvmParams, list[float]]:
    """Primal stochastic subgradient descent on the regularized hinge loss.

    Labels {0,1} map to {-1,+1}; the step size is the classic 1/(lambda*t)
    schedule with t counting individual updates. The bias is updated by
    the subgradient but not regularized. Returns the parameters and the
    per-epoch objective values; on_epoch(epoch, params_snapshot, objective, eta)
    is called after every epoch when given.
    """
    if not data:
        raise ValueError("training data is empty")
    labels = {label for _, label in data}
    if labels != {0, 1}:
        raise ValueError(f"need both classes present, got labels {sorted(labels)}")
    dim = data[0][0].dim
    w = np.zeros(dim)
    b = 0.0
    rng = random.Random(seed)
    order = list(range(len(data)))
    t = 0
    epoch_losses: list[float] = []
    for epoch in range(1, epochs + 1):
        rng.shuffle(order)
        for i in order:
            x, label = data[i]
            y = 1.0 if label == 1 else -1.0
            t += 1
            eta = 1.0 / (lam * t)
            margin = y * (sum(w[j] * c for j, c in x.counts.items()) + b)
            w *= (1.0 - eta * lam)
            if margin < 1.0:
                for j, c in x.counts.items():
                    w[j] += eta * y * c
                b += eta * y
        snapshot = SvmParams(w=w.copy(), b=b, lam=lam)
        objective = hinge_objective(snapshot, data)
        epoch_losses.append(objective)
        if on_epoch is not None:
            on_epoch(epoch, snapshot, objective, 1.0 / (lam * t))
    return SvmParams(w=w.copy(), b=b, lam=lam), epoch_losses


def svm_predict(params: SvmParams, x: BowVector) -> float:
    """Sigmoid-squashed margin, a probability-like score in [0, 1].

    The class decision is 1 iff the raw margin is strictly positive, which
    coincides with score > 0.5 (a margin of exactly zero is class 0).
    """
    return float(sigmoid(np.array([_margin(params, x)]))[0])


@dataclass
class BowSvmModel:
    """Trained BoW + SVM classifier behind the shared scoring interface."""

    svm: SvmParams
    vocab: Vocabulary
    max_seq_len: int
    binary: bool = False

    kind = "bow_svm"
    hidden_size = 0

    @property
    def embed_dim(self) -> int:
        return 0

    def score_seq(self, seq: TokenSequence) -> float:
        return svm_predict(self.svm, bow_featurize(seq, self.vocab, binary=self.binary))


# ---------------------------------------------------------------------------
# Word-level CNN
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CnnConfig:
    filters: int = 256
    width: int = 5
    pool: int = 2
    dropout: float = 0.5
    l2: float = 1e-4
    blocks: int = 3


def cnn_stage_lengths(max_seq_len: int, cfg: CnnConfig) -> list[tuple[int, int]]:
    """(conv output, pool output) lengths per block; raises if a stage collapses."""
    lengths = []
    n = max_seq_len
    for block in range(cfg.blocks):
        conv = n - cfg.width + 1
        if conv < 1:
            raise ConfigError(
                f"max_seq_len {max_seq_len} leaves no conv output at block {block + 1} "
                f"(length {n} < filter width {cfg.width})")
        pooled = conv // cfg.pool
        if pooled < 1:
            raise ConfigError(
                f"max_seq_len {max_seq_len} collapses to zero after pooling at block {block + 1}")
        lengths.append((conv, pooled))
        n = pooled
    return lengths


@dataclass
class CnnModel:
    """Three conv/ReLU/max-pool blocks, flatten, dropout, dense sigmoid head."""

    kernels: list[Array]       # block k: (filters, width, channels_in)
    biases: list[Array]        # block k: (filters,)
    dense_w: Array             # (flat,)
    dense_b: Array             # (1,)
    embedding: EmbeddingMatrix
    vocab: Vocabulary
    max_seq_len: int
    cfg: CnnConfig

    kind = "cnn"

    @property
    def hidden_size(self) -> int:
        return self.cfg.filters

    @property
    def embed_dim(self) -> int:
        return self.embedding.d

    def params(self) -> ParamSet:
        arrays = {}
        for k, (kernel, bias) in enumerate(zip(self.kernels, self.biases), start=1):
            arrays[f"conv{k}.k"] = kernel
            arrays[f"conv{k}.b"] = bias
        arrays["dense.w"] = self.dense_w
        arrays["dense.b"] = self.dense_b
        if self.embedding.trainable:
            arrays["embedding"] = self.embedding.matrix
        return ParamSet(arrays)

    def score_seq(self, seq: TokenSequence) -> float:
        return cnn_forward(self, seq)

    def example_grads(self, seq: TokenSequence, label: int,
                      dropout_rng: np.random.Generator | None = None):
        return cnn_backward(self, seq, label, dropout_rng=dropout_rng)


def new_cnn(vocab: Vocabulary, embedding: EmbeddingMatrix, max_seq_len: int,
            rng: np.random.Generator, cfg: CnnConfig = CnnConfig()) -> CnnModel:
    lengths = cnn_stage_lengths(max_seq_len, cfg)
    kernels: list[Array] = []
    biases: list[Array] = []
    channels = embedding.d
    for _ in range(cfg.blocks):
        fan_in = cfg.width * channels
        fan_out = cfg.filters
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        kernels.append(rng.uniform(-limit, limit, size=(cfg.filters, cfg.width, channels)))
        biases.append(np.zeros(cfg.filters))
        channels = cfg.filters
    flat = lengths[-1][1] * cfg.filters
    limit = np.sqrt(6.0 / (flat + 1))
    return CnnModel(kernels=kernels, biases=biases,
                    dense_w=rng.uniform(-limit, limit, size=flat),
                    dense_b=np.zeros(1),
                    embedding=embedding, vocab=vocab, max_seq_len=max_seq_len, cfg=cfg)


def _conv_valid(x: Array, kernel: Array, bias: Array) -> Array:
    """Valid-mode 1-D convolution: (L, C) x (F, w, C) -> (L - w + 1, F)."""
    length, channels = x.shape
    filters, width, c_in = kernel.shape
    if c_in != channels:
        raise ShapeError(f"kernel channels {c_in} do not match input channels {channels}")
    out_len = length - width + 1
    out = np.tile(bias, (out_len, 1))
    for j in range(width):
        out += x[j:j + out_len] @ kernel[:, j, :].T
    return out


def _max_pool(x: Array, size: int) -> tuple[Array, Array]:
    """Non-overlapping max pool along axis 0; tail shorter than size is dropped.

    Also returns the argmax (first maximal element wins) for the backward pass.
    """
    out_len = x.shape[0] // size
    trimmed = x[:out_len * size].reshape(out_len, size, x.shape[1])
    arg = trimmed.argmax(axis=1)
    out = np.take_along_axis(trimmed, arg[:, None, :], axis=1)[:, 0, :]
    return out, arg


def _cnn_forward_pass(model: CnnModel, seq: TokenSequence, train: bool,
                      dropout_rng: np.random.Generator | None):
    xs = lookup(model.embedding, seq)
    x0 = np.zeros((model.max_seq_len, model.embedding.d))
    x0[:seq.length] = xs
    caches = []
    x = x0
    for kernel, bias in zip(model.kernels, model.biases):
        conv = _conv_valid(x, kernel, bias)
        relu = np.maximum(conv, 0.0)
        pooled, arg = _max_pool(relu, model.cfg.pool)
        caches.append((x, conv, relu, arg))
        x = pooled
    flat = x.reshape(-1)
    if train and model.cfg.dropout > 0.0:
        if dropout_rng is None:
            raise ValueError("training-mode dropout needs a random generator")
        keep = 1.0 - model.cfg.dropout
        mask = (dropout_rng.random(flat.shape) < keep) / keep
    else:
        mask = np.ones_like(flat)
    dropped = flat * mask
    s = float(model.dense_w @ dropped + model.dense_b[0])
    p = float(sigmoid(np.array([s]))[0])
    return p, (x0, caches, x.shape, flat, mask, dropped)


def cnn_forward(model: CnnModel, seq: TokenSequence) -> float:
    """Inference-mode probability (dropout transparent)."""
    p, _ = _cnn_forward_pass(model, seq, train=False, dropout_rng=None)
    return p


def cnn_backward(model: CnnModel, seq: TokenSequence, label: int,
                 dropout_rng: np.random.Generator | None = None):
    """Loss and gradients for one example.

    loss = BCE + l2 * ||dense weights||^2. Max-pool routes the gradient to
    the first maximal element; ReLU uses the x > 0 subgradient. When a
    generator is supplied, dropout is applied in training mode.
    """
    if label not in (0, 1):
        raise ValueError(f"label must be 0 or 1, got {label}")
    train = dropout_rng is not None and model.cfg.dropout > 0.0
    p, cache = _cnn_forward_pass(model, seq, train=train, dropout_rng=dropout_rng)
    x0, caches, last_shape, flat, mask, dropped = cache
    loss = bce_loss(p, label) + model.cfg.l2 * float(model.dense_w @ model.dense_w)
    if not np.isfinite(loss):
        raise NonFiniteError("loss is not finite")
    ds = bce_sigmoid_grad(p, label)
    arrays: dict[str, Array] = {
        "dense.w": ds * dropped + 2.0 * model.cfg.l2 * model.dense_w,
        "dense.b": np.array([ds]),
    }
    d_flat = (ds * model.dense_w) * mask
    dx = d_flat.reshape(last_shape)
    for k in range(model.cfg.blocks - 1, -1, -1):
        x_in, conv, relu, arg = caches[k]
        kernel = model.kernels[k]
        d_relu = np.zeros_like(relu)
        out_len = dx.shape[0]
        rows = (np.arange(out_len)[:, None] * model.cfg.pool) + arg
        cols = np.tile(np.arange(relu.shape[1]), (out_len, 1))
        np.add.at(d_relu, (rows, cols), dx)
        d_conv = d_relu * (conv > 0.0)
        filters, width, channels = kernel.shape
        dk = np.zeros_like(kernel)
        dx_in = np.zeros_like(x_in)
        conv_len = conv.shape[0]
        for j in range(width):
            dk[:, j, :] = d_conv.T @ x_in[j:j + conv_len]
            dx_in[j:j + conv_len] += d_conv @ kernel[:, j, :]
        arrays[f"conv{k + 1}.k"] = dk
        arrays[f"conv{k + 1}.b"] = d_conv.sum(axis=0)
        dx = dx_in
    if model.embedding.trainable:
        d_emb = np.zeros_like(model.embedding.matrix)
        # dx covers the padded canvas; only true-length rows feed real tokens
        # and the PAD row is excluded from updates by design.
        for t, idx in enumerate(seq.indices[:seq.length]):
            if idx != PAD_INDEX:
                d_emb[idx] += dx[t]
        arrays["embedding"] = d_emb
    grads = ParamSet(arrays)
    for name, g in grads.items():
        check_finite(f"gradient {name}", g)
    return loss, grads
