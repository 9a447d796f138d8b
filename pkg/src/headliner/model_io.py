"""Versioned JSON model files for every classifier kind.

The envelope holds the kind tag, a config echo, the vocabulary, and every
parameter as a named row-major array. Floats are serialized with their
shortest round-trip representation, so save followed by load is bit-exact.
"""

from __future__ import annotations

import json
import os
from typing import Any

import numpy as np

from .baselines import BowSvmModel, CnnConfig, CnnModel, SvmParams
from .embeddings import EmbeddingMatrix
from .recurrent import BiLstmModel, LstmModel, LstmParams
from .text import Vocabulary

FORMAT_VERSION = 1
MODEL_KINDS = ("bilstm", "lstm", "cnn", "bow_svm")

_GATE_NAMES = ("w_i", "w_f", "w_o", "w_c", "b_i", "b_f", "b_o", "b_c")


class ModelIOError(ValueError):
    """Base class for model-file problems."""


class ModelVersionError(ModelIOError):
    """The file declares an unsupported format version."""


class ModelTruncatedError(ModelIOError):
    """The file is not a complete model envelope."""


class ModelShapeError(ModelIOError):
    """A stored array does not match its declared or expected shape."""


def _pack(arr: np.ndarray) -> dict[str, Any]:
    return {"shape": list(arr.shape), "data": np.asarray(arr, dtype=np.float64).reshape(-1).tolist()}


def _unpack(name: str, packed: Any, expected_shape: tuple[int, ...] | None = None) -> np.ndarray:
    if not isinstance(packed, dict) or "shape" not in packed or "data" not in packed:
        raise ModelTruncatedError(f"parameter {name!r} is not a packed array")
    shape = tuple(int(s) for s in packed["shape"])
    data = packed["data"]
    size = 1
    for s in shape:
        size *= s
    if len(data) != size:
        raise ModelShapeError(f"parameter {name!r}: {len(data)} values for shape {shape}")
    if expected_shape is not None and shape != expected_shape:
        raise ModelShapeError(f"parameter {name!r}: stored shape {shape}, expected {expected_shape}")
    return np.array(data, dtype=np.float64).reshape(shape)


def _embedding_config(emb: EmbeddingMatrix) -> dict[str, Any]:
    return {"embedding_trainable": emb.trainable, "embedding_coverage": emb.coverage}


def save_model(model, path: str) -> None:
    """Write any supported model to a versioned JSON file (atomically)."""
    envelope: dict[str, Any] = {
        "format_version": FORMAT_VERSION,
        "model_kind": model.kind,
        "vocab": {"tokens": list(model.vocab.tokens), "min_count": model.vocab.min_count},
    }
    params: dict[str, Any] = {}
    if isinstance(model, BiLstmModel):
        envelope["config"] = {"hidden_size": model.hidden_size, "embed_dim": model.embed_dim,
                              "max_seq_len": model.max_seq_len, **_embedding_config(model.embedding)}
        for direction, p in (("fwd", model.fwd), ("bwd", model.bwd)):
            for name in _GATE_NAMES:
                params[f"{direction}.{name}"] = _pack(getattr(p, name))
        params["head.w"] = _pack(model.head_w)
        params["head.b"] = _pack(model.head_b)
        params["embedding"] = _pack(model.embedding.matrix)
    elif isinstance(model, LstmModel):
        envelope["config"] = {"hidden_size": model.hidden_size, "embed_dim": model.embed_dim,
                              "max_seq_len": model.max_seq_len, **_embedding_config(model.embedding)}
        for name in _GATE_NAMES:
            params[f"fwd.{name}"] = _pack(getattr(model.fwd, name))
        params["head.w"] = _pack(model.head_w)
        params["head.b"] = _pack(model.head_b)
        params["embedding"] = _pack(model.embedding.matrix)
    elif isinstance(model, CnnModel):
        cfg = model.cfg
        envelope["config"] = {"embed_dim": model.embed_dim, "max_seq_len": model.max_seq_len,
                              "filters": cfg.filters, "width": cfg.width, "pool": cfg.pool,
                              "dropout": cfg.dropout, "l2": cfg.l2, "blocks": cfg.blocks,
                              **_embedding_config(model.embedding)}
        for k, (kernel, bias) in enumerate(zip(model.kernels, model.biases), start=1):
            params[f"conv{k}.k"] = _pack(kernel)
            params[f"conv{k}.b"] = _pack(bias)
        params["dense.w"] = _pack(model.dense_w)
        params["dense.b"] = _pack(model.dense_b)
        params["embedding"] = _pack(model.embedding.matrix)
    elif isinstance(model, BowSvmModel):
        envelope["config"] = {"max_seq_len": model.max_seq_len, "lambda": model.svm.lam,
                              "binary": model.binary}
        params["w"] = _pack(model.svm.w)
        params["b"] = _pack(np.array([model.svm.b]))
    else:
        raise ModelIOError(f"cannot serialize model of type {type(model).__name__}")
    envelope["params"] = params
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(envelope, fh, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def _lstm_params_from(params: dict[str, Any], prefix: str, h: int, d: int) -> LstmParams:
    kwargs = {}
    for name in _GATE_NAMES:
        expected = (h, h + d) if name.startswith("w") else (h,)
        kwargs[name] = _unpack(f"{prefix}.{name}", params.get(f"{prefix}.{name}"), expected)
    return LstmParams(**kwargs)


def load_model(path: str):
    """Load a model envelope written by save_model; round-trip is bit-exact."""
    try:
        with open(path, encoding="utf-8") as fh:
            envelope = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ModelTruncatedError(f"model file is truncated or corrupt: {exc.msg}") from None
    if not isinstance(envelope, dict):
        raise ModelTruncatedError("model file is not a JSON object")
    version = envelope.get("format_version")
    if version != FORMAT_VERSION:
        raise ModelVersionError(f"unsupported model file version {version!r}, expected {FORMAT_VERSION}")
    for key in ("model_kind", "config", "vocab", "params"):
        if key not in envelope:
            raise ModelTruncatedError(f"model file missing {key!r}")
    kind = envelope["model_kind"]
    if kind not in MODEL_KINDS:
        raise ModelIOError(f"unknown model kind {kind!r}")
    config = envelope["config"]
    params = envelope["params"]
    vocab = Vocabulary(tokens=tuple(envelope["vocab"]["tokens"]),
                       min_count=int(envelope["vocab"].get("min_count", 1)))
    if kind in ("bilstm", "lstm"):
        h = int(config["hidden_size"])
        d = int(config["embed_dim"])
        emb_matrix = _unpack("embedding", params.get("embedding"), (len(vocab), d))
        embedding = EmbeddingMatrix(matrix=emb_matrix,
                                    trainable=bool(config.get("embedding_trainable", False)),
                                    coverage=float(config.get("embedding_coverage", 0.0)))
        if kind == "bilstm":
            return BiLstmModel(fwd=_lstm_params_from(params, "fwd", h, d),
                               bwd=_lstm_params_from(params, "bwd", h, d),
                               head_w=_unpack("head.w", params.get("head.w"), (2 * h,)),
                               head_b=_unpack("head.b", params.get("head.b"), (1,)),
                               embedding=embedding, vocab=vocab,
                               max_seq_len=int(config["max_seq_len"]))
        return LstmModel(fwd=_lstm_params_from(params, "fwd", h, d),
                         head_w=_unpack("head.w", params.get("head.w"), (h,)),
                         head_b=_unpack("head.b", params.get("head.b"), (1,)),
                         embedding=embedding, vocab=vocab,
                         max_seq_len=int(config["max_seq_len"]))
    if kind == "cnn":
        cfg = CnnConfig(filters=int(config["filters"]), width=int(config["width"]),
                        pool=int(config["pool"]), dropout=float(config["dropout"]),
                        l2=float(config["l2"]), blocks=int(config["blocks"]))
        d = int(config["embed_dim"])
        emb_matrix = _unpack("embedding", params.get("embedding"), (len(vocab), d))
        embedding = EmbeddingMatrix(matrix=emb_matrix,
                                    trainable=bool(config.get("embedding_trainable", False)),
                                    coverage=float(config.get("embedding_coverage", 0.0)))
        kernels = []
        biases = []
        channels = d
        for k in range(1, cfg.blocks + 1):
            kernels.append(_unpack(f"conv{k}.k", params.get(f"conv{k}.k"),
                                   (cfg.filters, cfg.width, channels)))
            biases.append(_unpack(f"conv{k}.b", params.get(f"conv{k}.b"), (cfg.filters,)))
            channels = cfg.filters
        dense_w = _unpack("dense.w", params.get("dense.w"))
        dense_b = _unpack("dense.b", params.get("dense.b"), (1,))
        return CnnModel(kernels=kernels, biases=biases, dense_w=dense_w, dense_b=dense_b,
                        embedding=embedding, vocab=vocab,
                        max_seq_len=int(config["max_seq_len"]), cfg=cfg)
    # bow_svm
    w = _unpack("w", params.get("w"), (len(vocab),))
    b = _unpack("b", params.get("b"), (1,))
    svm = SvmParams(w=w, b=float(b[0]), lam=float(config["lambda"]))
    return BowSvmModel(svm=svm, vocab=vocab, max_seq_len=int(config["max_seq_len"]),
                       binary=bool(config.get("binary", False)))
