"""LSTM cell, unidirectional and bidirectional encoders, the sigmoid
classification head with late fusion, per-word introspection, and the
hand-derived backward pass through time.

Gate layout per step t, with z = [h_{t-1}, x_t]:

    i = sig(W_i z + b_i)        input gate
    f = sig(W_f z + b_f)        forget gate
    o = sig(W_o z + b_o)        output gate
    g = tanh(W_c z + b_c)       candidate memory
    c_t = f * c_{t-1} + i * g
    h_t = o * tanh(c_t)

The bidirectional classifier concatenates the final state of the forward
chain with the final state of the backward chain (which carries the
information of the opening words) and applies a scalar sigmoid head.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embeddings import EmbeddingMatrix, lookup
from .numerics import (Array, NonFiniteError, ParamSet, ShapeError, check_finite,
                       sigmoid, tanh)
from .losses import bce_loss, bce_sigmoid_grad
from .text import TokenSequence, Vocabulary, decode


@dataclass
class LstmParams:
    """Gate weights for one direction; each W is H x (H + d)."""

    w_i: Array
    w_f: Array
    w_o: Array
    w_c: Array
    b_i: Array
    b_f: Array
    b_o: Array
    b_c: Array

    @property
    def hidden_size(self) -> int:
        return self.b_i.shape[0]

    @property
    def input_size(self) -> int:
        return self.w_i.shape[1] - self.hidden_size

    def validate(self) -> None:
        h = self.hidden_size
        hd = self.w_i.shape[1]
        for name in ("w_i", "w_f", "w_o", "w_c"):
            w = getattr(self, name)
            if w.shape != (h, hd):
                raise ShapeError(f"{name} has shape {w.shape}, expected {(h, hd)}")
        for name in ("b_i", "b_f", "b_o", "b_c"):
            b = getattr(self, name)
            if b.shape != (h,):
                raise ShapeError(f"{name} has shape {b.shape}, expected {(h,)}")


@dataclass
class LstmState:
    """Hidden state and memory cell after one step. Components of h lie in (-1, 1)."""

    h: Array
    c: Array


@dataclass(frozen=True)
class WordContribution:
    token: str
    score: float


@dataclass(frozen=True)
class IntrospectionResult:
    """Per-word scores plus the whole-title probability (the fused pair)."""

    words: tuple[WordContribution, ...]
    fused_score: float


def init_lstm_params(hidden_size: int, input_size: int, rng: np.random.Generator) -> LstmParams:
    """Glorot-uniform gate weights, zero biases except forget bias = 1."""
    h, d = hidden_size, input_size
    limit = np.sqrt(6.0 / ((h + d) + h))
    def w():
        return rng.uniform(-limit, limit, size=(h, h + d))
    params = LstmParams(w_i=w(), w_f=w(), w_o=w(), w_c=w(),
                        b_i=np.zeros(h), b_f=np.ones(h), b_o=np.zeros(h), b_c=np.zeros(h))
    params.validate()
    return params


def lstm_cell(params: LstmParams, x: Array, prev: LstmState) -> LstmState:
    """One LSTM step on input vector x from state prev."""
    state, _ = _cell_forward(params, np.asarray(x, dtype=np.float64), prev.h, prev.c)
    return state


def _cell_forward(params: LstmParams, x: Array, h_prev: Array, c_prev: Array):
    h = params.hidden_size
    if x.shape != (params.input_size,):
        raise ShapeError(f"input has shape {x.shape}, expected {(params.input_size,)}")
    if h_prev.shape != (h,) or c_prev.shape != (h,):
        raise ShapeError("previous state does not match hidden size")
    z = np.concatenate([h_prev, x])
    i = sigmoid(params.w_i @ z + params.b_i)
    f = sigmoid(params.w_f @ z + params.b_f)
    o = sigmoid(params.w_o @ z + params.b_o)
    g = tanh(params.w_c @ z + params.b_c)
    c = f * c_prev + i * g
    tc = np.tanh(c)
    state = LstmState(h=o * tc, c=c)
    cache = (z, i, f, o, g, c_prev, tc)
    return state, cache


def _chain_forward(params: LstmParams, xs: Array):
    n = xs.shape[0]
    if n < 1:
        raise ValueError("cannot encode an empty sequence")
    h = np.zeros(params.hidden_size)
    c = np.zeros(params.hidden_size)
    states: list[LstmState] = []
    caches = []
    for t in range(n):
        state, cache = _cell_forward(params, xs[t], h, c)
        states.append(state)
        caches.append(cache)
        h, c = state.h, state.c
    return states, caches


def encode_forward(params: LstmParams, xs: Array) -> list[LstmState]:
    """Run the chain left to right from the zero state; one state per row of xs."""
    states, _ = _chain_forward(params, np.asarray(xs, dtype=np.float64))
    return states


def _chain_backward(params: LstmParams, caches, d_h_last: Array):
    """Backpropagation through time for one chain.

    The loss gradient enters only at the final hidden state (the head
    reads nothing else). Returns gate-parameter gradients and the
    gradient with respect to every input row.
    """
    h = params.hidden_size
    n = len(caches)
    d = params.input_size
    grads = {name: np.zeros_like(getattr(params, name))
             for name in ("w_i", "w_f", "w_o", "w_c", "b_i", "b_f", "b_o", "b_c")}
    dxs = np.zeros((n, d))
    dh = d_h_last.copy()
    dc = np.zeros(h)
    for t in range(n - 1, -1, -1):
        z, i, f, o, g, c_prev, tc = caches[t]
        d_o = dh * tc
        da_o = d_o * o * (1.0 - o)
        dc = dc + dh * o * (1.0 - tc * tc)
        d_i = dc * g
        da_i = d_i * i * (1.0 - i)
        d_f = dc * c_prev
        da_f = d_f * f * (1.0 - f)
        d_g = dc * i
        da_g = d_g * (1.0 - g * g)
        grads["w_i"] += np.outer(da_i, z)
        grads["w_f"] += np.outer(da_f, z)
        grads["w_o"] += np.outer(da_o, z)
        grads["w_c"] += np.outer(da_g, z)
        grads["b_i"] += da_i
        grads["b_f"] += da_f
        grads["b_o"] += da_o
        grads["b_c"] += da_g
        dz = (params.w_i.T @ da_i + params.w_f.T @ da_f
              + params.w_o.T @ da_o + params.w_c.T @ da_g)
        dh = dz[:h]
        dxs[t] = dz[h:]
        dc = dc * f
    return grads, dxs


@dataclass
class BiLstmModel:
    """Bidirectional LSTM classifier with a late-fusion sigmoid head."""

    fwd: LstmParams
    bwd: LstmParams
    head_w: Array          # (2H,)
    head_b: Array          # (1,)
    embedding: EmbeddingMatrix
    vocab: Vocabulary
    max_seq_len: int

    kind = "bilstm"

    @property
    def hidden_size(self) -> int:
        return self.fwd.hidden_size

    @property
    def embed_dim(self) -> int:
        return self.embedding.d

    def params(self) -> ParamSet:
        arrays = {}
        for direction, p in (("fwd", self.fwd), ("bwd", self.bwd)):
            for name in ("w_i", "w_f", "w_o", "w_c", "b_i", "b_f", "b_o", "b_c"):
                arrays[f"{direction}.{name}"] = getattr(p, name)
        arrays["head.w"] = self.head_w
        arrays["head.b"] = self.head_b
        if self.embedding.trainable:
            arrays["embedding"] = self.embedding.matrix
        return ParamSet(arrays)

    def score_seq(self, seq: TokenSequence) -> float:
        return score(self, seq)

    def example_grads(self, seq: TokenSequence, label: int):
        return backward(self, seq, label)


@dataclass
class LstmModel:
    """Unidirectional LSTM classifier: sigmoid head on the final hidden state."""

    fwd: LstmParams
    head_w: Array          # (H,)
    head_b: Array          # (1,)
    embedding: EmbeddingMatrix
    vocab: Vocabulary
    max_seq_len: int

    kind = "lstm"

    @property
    def hidden_size(self) -> int:
        return self.fwd.hidden_size

    @property
    def embed_dim(self) -> int:
        return self.embedding.d

    def params(self) -> ParamSet:
        arrays = {}
        for name in ("w_i", "w_f", "w_o", "w_c", "b_i", "b_f", "b_o", "b_c"):
            arrays[f"fwd.{name}"] = getattr(self.fwd, name)
        arrays["head.w"] = self.head_w
        arrays["head.b"] = self.head_b
        if self.embedding.trainable:
            arrays["embedding"] = self.embedding.matrix
        return ParamSet(arrays)

    def score_seq(self, seq: TokenSequence) -> float:
        return score(self, seq)

    def example_grads(self, seq: TokenSequence, label: int):
        return backward(self, seq, label)


def new_bilstm(vocab: Vocabulary, embedding: EmbeddingMatrix, hidden_size: int,
               max_seq_len: int, rng: np.random.Generator) -> BiLstmModel:
    h, d = hidden_size, embedding.d
    limit = np.sqrt(6.0 / (2 * h + 1))
    return BiLstmModel(fwd=init_lstm_params(h, d, rng),
                       bwd=init_lstm_params(h, d, rng),
                       head_w=rng.uniform(-limit, limit, size=2 * h),
                       head_b=np.zeros(1),
                       embedding=embedding, vocab=vocab, max_seq_len=max_seq_len)


def new_lstm(vocab: Vocabulary, embedding: EmbeddingMatrix, hidden_size: int,
             max_seq_len: int, rng: np.random.Generator) -> LstmModel:
    h, d = hidden_size, embedding.d
    limit = np.sqrt(6.0 / (h + 1))
    return LstmModel(fwd=init_lstm_params(h, d, rng),
                     head_w=rng.uniform(-limit, limit, size=h),
                     head_b=np.zeros(1),
                     embedding=embedding, vocab=vocab, max_seq_len=max_seq_len)


def encode_bidirectional(model: BiLstmModel, xs: Array) -> list[tuple[Array, Array]]:
    """Per-word pairs (forward state, backward state).

    The backward list is the forward chain (with the backward parameters)
    over the reversed inputs, re-reversed, so pair t aligns both states of
    the same word.
    """
    xs = np.asarray(xs, dtype=np.float64)
    f_states = encode_forward(model.fwd, xs)
    b_states = encode_forward(model.bwd, xs[::-1])
    n = xs.shape[0]
    return [(f_states[t].h, b_states[n - 1 - t].h) for t in range(n)]


def _fused_input(model, seq: TokenSequence) -> tuple[Array, list, list, Array]:
    xs = lookup(model.embedding, seq)
    if isinstance(model, BiLstmModel):
        f_states, f_caches = _chain_forward(model.fwd, xs)
        b_states, b_caches = _chain_forward(model.bwd, xs[::-1])
        u = np.concatenate([f_states[-1].h, b_states[-1].h])
        return xs, (f_states, f_caches), (b_states, b_caches), u
    f_states, f_caches = _chain_forward(model.fwd, xs)
    return xs, (f_states, f_caches), None, f_states[-1].h


def score(model: BiLstmModel | LstmModel, seq: TokenSequence) -> float:
    """Probability of the popular class for one encoded title."""
    _, _, _, u = _fused_input(model, seq)
    s = float(model.head_w @ u + model.head_b[0])
    return float(sigmoid(np.array([s]))[0])


def introspect(model: BiLstmModel | LstmModel, seq: TokenSequence) -> IntrospectionResult:
    """Head output at every word position, read as per-word popularity.

    For the bidirectional model the head is applied to the (forward,
    backward) state pair of each word; fused_score is the whole-title
    probability, which fuses the final forward state with the backward
    state of the first word.
    """
    xs = lookup(model.embedding, seq)
    tokens = decode(seq, model.vocab)
    if isinstance(model, BiLstmModel):
        pairs = encode_bidirectional(model, xs)
        scores = [float(sigmoid(np.array([model.head_w @ np.concatenate([hf, hb])
                                          + model.head_b[0]]))[0])
                  for hf, hb in pairs]
    else:
        states = encode_forward(model.fwd, xs)
        scores = [float(sigmoid(np.array([model.head_w @ st.h + model.head_b[0]]))[0])
                  for st in states]
    words = tuple(WordContribution(token=tok, score=sc) for tok, sc in zip(tokens, scores))
    return IntrospectionResult(words=words, fused_score=score(model, seq))


def backward(model: BiLstmModel | LstmModel, seq: TokenSequence, label: int):
    """Loss and gradients for one example.

    loss = binary cross-entropy of the title probability against the
    label; gradients cover the head, every gate parameter of each
    direction, and, when the embedding is trainable, the embedding rows
    that the sequence touched (as one dense V x d gradient).
    """
    if label not in (0, 1):
        raise ValueError(f"label must be 0 or 1, got {label}")
    xs, f_pack, b_pack, u = _fused_input(model, seq)
    s = float(model.head_w @ u + model.head_b[0])
    p = float(sigmoid(np.array([s]))[0])
    loss = bce_loss(p, label)
    if not np.isfinite(loss):
        raise NonFiniteError("loss is not finite")
    ds = bce_sigmoid_grad(p, label)
    arrays: dict[str, Array] = {
        "head.w": ds * u,
        "head.b": np.array([ds]),
    }
    du = ds * model.head_w
    h = model.hidden_size
    n = seq.length
    f_states, f_caches = f_pack
    if isinstance(model, BiLstmModel):
        f_grads, dxs_f = _chain_backward(model.fwd, f_caches, du[:h])
        b_states, b_caches = b_pack
        b_grads, dxs_b = _chain_backward(model.bwd, b_caches, du[h:])
        dxs = dxs_f + dxs_b[::-1]
        for name, g in f_grads.items():
            arrays[f"fwd.{name}"] = g
        for name, g in b_grads.items():
            arrays[f"bwd.{name}"] = g
    else:
        f_grads, dxs = _chain_backward(model.fwd, f_caches, du)
        for name, g in f_grads.items():
            arrays[f"fwd.{name}"] = g
    if model.embedding.trainable:
        d_emb = np.zeros_like(model.embedding.matrix)
        for t, idx in enumerate(seq.indices[:n]):
            d_emb[idx] += dxs[t]
        arrays["embedding"] = d_emb
    grads = ParamSet(arrays)
    for name, g in grads.items():
        check_finite(f"gradient {name}", g)
    return loss, grads
