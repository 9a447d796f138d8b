"""Training loop, learning-rate schedule, early stopping, evaluation, and
the k-fold experiment runner with results-table emission."""

from __future__ import annotations

import json
import random
import re
import time
from dataclasses import dataclass, field, asdict, replace
from typing import Callable, Sequence

import numpy as np

from . import baselines, recurrent
from .baselines import BowSvmModel, CnnConfig, bow_featurize, svm_train
from .corpus import LabeledExample, make_folds
from .embeddings import build_matrix, parse_glove
from .losses import bce_batch, bce_loss, clamp_probability
from .numerics import NonFiniteError, adam_init, adam_step, clip_global_norm
from .text import TokenSequence, build_vocab, encode, tokenize

MODEL_KINDS = ("bilstm", "lstm", "cnn", "bow_svm")
EMBEDDING_MODES = ("static", "fine_tune")
GRAD_CLIP_NORM = 5.0


class ConfigError(ValueError):
    pass


class TrainingDivergedError(RuntimeError):
    """Training produced a non-finite value; carries the last-good checkpoint path."""

    def __init__(self, message: str, checkpoint_path: str | None = None):
        if checkpoint_path:
            message = f"{message} (last good checkpoint: {checkpoint_path})"
        super().__init__(message)
        self.checkpoint_path = checkpoint_path


@dataclass
class TrainConfig:
    model_kind: str = "bilstm"
    hidden_size: int = 128
    embed_dim: int = 300
    embedding_mode: str = "static"
    glove_path: str | None = None
    max_seq_len: int | None = None      # resolved: 40 for cnn, 30 otherwise
    min_count: int = 1
    max_vocab: int | None = None
    batch_size: int = 32
    max_epochs: int = 100
    learning_rate: float = 1e-3
    plateau_patience: int = 3
    plateau_factor: float = 0.2
    early_stop_patience: int = 10
    min_delta: float = 1e-4
    seed: int = 0
    validation_fraction: float = 0.1
    cnn_filters: int = 256
    cnn_width: int = 5
    cnn_pool: int = 2
    cnn_dropout: float = 0.5
    cnn_l2: float = 1e-4
    svm_lambda: float = 1e-4
    svm_epochs: int = 50
    bow_binary: bool = False
    checkpoint_path: str | None = None
    embeddings_label: str | None = None  # results-table cell, derived when unset

    def validate(self) -> None:
        if self.model_kind not in MODEL_KINDS:
            raise ConfigError(f"unknown model kind {self.model_kind!r}")
        if self.embedding_mode not in EMBEDDING_MODES:
            raise ConfigError(f"unknown embedding mode {self.embedding_mode!r}")
        if not (0.0 < self.plateau_factor < 1.0):
            raise ConfigError("plateau_factor must lie in (0, 1)")
        if self.plateau_patience < 1 or self.early_stop_patience < 1:
            raise ConfigError("patience values must be at least 1")
        if not (0.0 < self.validation_fraction <= 0.5):
            raise ConfigError("validation_fraction must lie in (0, 0.5]")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if self.batch_size < 1 or self.max_epochs < 1:
            raise ConfigError("batch_size and max_epochs must be at least 1")
        if self.hidden_size < 1 or self.embed_dim < 1:
            raise ConfigError("hidden_size and embed_dim must be at least 1")
        if self.max_seq_len is not None and self.max_seq_len < 1:
            raise ConfigError("max_seq_len must be at least 1")
        if self.min_delta < 0:
            raise ConfigError("min_delta must be non-negative")

    def resolved_max_seq_len(self) -> int:
        if self.max_seq_len is not None:
            return self.max_seq_len
        return 40 if self.model_kind == "cnn" else 30

    def resolved_embeddings_label(self) -> str:
        if self.embeddings_label:
            return self.embeddings_label
        if self.model_kind == "bow_svm":
            return "-"
        return "glove" if self.glove_path else "random"

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, values: dict) -> "TrainConfig":
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(values) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**values)


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    val_loss: float
    val_accuracy: float
    learning_rate: float


@dataclass
class FitReport:
    epochs: list[EpochStats]
    stop_reason: str            # "early_stop" or "max_epochs"
    best_epoch: int
    wall_time_s: float

    def to_dict(self) -> dict:
        return {"epochs": [asdict(e) for e in self.epochs],
                "stop_reason": self.stop_reason,
                "best_epoch": self.best_epoch,
                "wall_time_s": self.wall_time_s}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


@dataclass
class EvalReport:
    accuracy: float
    tp: int
    fp: int
    tn: int
    fn: int
    n: int

    def to_dict(self) -> dict:
        return asdict(self)


class TrainSchedule:
    """Plateau learning-rate decay and early stopping over validation loss.

    An epoch improves when it beats the best seen loss by more than
    min_delta. plateau_patience non-improving epochs in a row cut the
    learning rate by plateau_factor (and restart the plateau count);
    early_stop_patience of them stop training.
    """

    def __init__(self, plateau_patience: int, early_stop_patience: int,
                 min_delta: float, plateau_factor: float = 0.2):
        self.plateau_patience = plateau_patience
        self.early_stop_patience = early_stop_patience
        self.min_delta = min_delta
        self.plateau_factor = plateau_factor
        self.best_loss = float("inf")
        self._plateau = 0
        self._stall = 0

    def observe(self, val_loss: float) -> tuple[bool, bool, bool]:
        """Returns (improved, reduce_lr_now, stop_now)."""
        improved = val_loss < self.best_loss - self.min_delta
        if improved:
            self.best_loss = val_loss
            self._plateau = 0
            self._stall = 0
            return True, False, False
        self._plateau += 1
        self._stall += 1
        reduce_lr = self._plateau >= self.plateau_patience
        if reduce_lr:
            self._plateau = 0
        return False, reduce_lr, self._stall >= self.early_stop_patience


def stratified_split(examples: Sequence[LabeledExample], fraction: float,
                     seed: int) -> tuple[list[LabeledExample], list[LabeledExample]]:
    """Carve a label-stratified validation slice (both classes appear)."""
    by_label: dict[int, list[LabeledExample]] = {0: [], 1: []}
    for ex in examples:
        by_label[ex.label].append(ex)
    rng = random.Random(seed)
    train: list[LabeledExample] = []
    val: list[LabeledExample] = []
    for label in (0, 1):
        group = list(by_label[label])
        rng.shuffle(group)
        n_val = max(1, round(fraction * len(group))) if group else 0
        val.extend(group[:n_val])
        train.extend(group[n_val:])
    train.sort(key=lambda ex: ex.headline.id)
    val.sort(key=lambda ex: ex.headline.id)
    return train, val


def _require_both_classes(examples: Sequence[LabeledExample], where: str) -> None:
    labels = {ex.label for ex in examples}
    if labels != {0, 1}:
        raise ConfigError(f"{where} must contain both classes, got labels {sorted(labels)}")


def _encode_examples(examples: Sequence[LabeledExample], vocab, max_seq_len: int
                     ) -> list[tuple[TokenSequence, int]]:
    return [(encode(ex.headline.title, vocab, max_seq_len), ex.label) for ex in examples]


def _build_model(config: TrainConfig, vocab, embedding, rng: np.random.Generator):
    max_len = config.resolved_max_seq_len()
    if config.model_kind == "bilstm":
        return recurrent.new_bilstm(vocab, embedding, config.hidden_size, max_len, rng)
    if config.model_kind == "lstm":
        return recurrent.new_lstm(vocab, embedding, config.hidden_size, max_len, rng)
    if config.model_kind == "cnn":
        cfg = CnnConfig(filters=config.cnn_filters, width=config.cnn_width,
                        pool=config.cnn_pool, dropout=config.cnn_dropout,
                        l2=config.cnn_l2)
        return baselines.new_cnn(vocab, embedding, max_len, rng, cfg)
    raise ConfigError(f"no neural model for kind {config.model_kind!r}")


def _val_metrics(model, val: list[tuple[TokenSequence, int]]) -> tuple[float, float]:
    probs = [model.score_seq(seq) for seq, _ in val]
    labels = [y for _, y in val]
    loss = bce_batch(probs, labels)
    correct = sum(1 for p, y in zip(probs, labels) if (1 if p > 0.5 else 0) == y)
    return loss, correct / len(val)


def fit(train: Sequence[LabeledExample], config: TrainConfig,
        on_epoch: Callable[[EpochStats], None] | None = None):
    """Train a model of config.model_kind; returns (model, FitReport).

    The vocabulary and embedding are built from the full training input
    before the validation slice is carved out of it. Fully deterministic
    for a fixed (data, config) pair.
    """
    config.validate()
    if not train:
        raise ConfigError("training data is empty")
    _require_both_classes(train, "training data")
    started = time.perf_counter()
    vocab = build_vocab((tokenize(ex.headline.title) for ex in train),
                        max_size=config.max_vocab, min_count=config.min_count)
    if config.model_kind == "bow_svm":
        model, report = _fit_svm(train, config, vocab)
    else:
        pretrained = parse_glove(config.glove_path) if config.glove_path else {}
        embedding = build_matrix(vocab, pretrained, config.embed_dim, seed=config.seed,
                                 trainable=(config.embedding_mode == "fine_tune"))
        rng = np.random.default_rng(config.seed)
        model = _build_model(config, vocab, embedding, rng)
        report = _fit_neural(model, train, config, on_epoch)
    report.wall_time_s = time.perf_counter() - started
    return model, report


def _fit_neural(model, train: Sequence[LabeledExample], config: TrainConfig,
                on_epoch: Callable[[EpochStats], None] | None) -> FitReport:
    train_part, val_part = stratified_split(train, config.validation_fraction,
                                            config.seed)
    max_len = config.resolved_max_seq_len()
    train_enc = _encode_examples(train_part, model.vocab, max_len)
    val_enc = _encode_examples(val_part, model.vocab, max_len)
    params = model.params()
    state = adam_init(params, alpha=config.learning_rate)
    schedule = TrainSchedule(config.plateau_patience, config.early_stop_patience,
                             config.min_delta, config.plateau_factor)
    shuffle_rng = random.Random(config.seed)
    dropout_rng = np.random.default_rng(config.seed + 1) if model.kind == "cnn" else None
    best = params.copy()
    best_loss = float("inf")
    best_epoch = 0
    stats: list[EpochStats] = []
    stop_reason = "max_epochs"

    def checkpoint_restore():
        for name in params.names():
            params[name] = best[name]

    try:
        # overflow during divergence surfaces as non-finite checks, not warnings
        with np.errstate(over="ignore", invalid="ignore", under="ignore"):
            for epoch in range(1, config.max_epochs + 1):
                lr_this_epoch = state.alpha
                order = list(range(len(train_enc)))
                shuffle_rng.shuffle(order)
                loss_sum = 0.0
                for start in range(0, len(order), config.batch_size):
                    batch = order[start:start + config.batch_size]
                    grads = params.zeros_like()
                    for i in batch:
                        seq, label = train_enc[i]
                        if model.kind == "cnn":
                            loss, g = model.example_grads(seq, label, dropout_rng=dropout_rng)
                        else:
                            loss, g = model.example_grads(seq, label)
                        loss_sum += loss
                        for name in g.names():
                            grads[name] = grads[name] + g[name]
                    scale = 1.0 / len(batch)
                    for name in grads.names():
                        grads[name] = grads[name] * scale
                    clip_global_norm(grads, GRAD_CLIP_NORM)
                    adam_step(params, grads, state)
                train_loss = loss_sum / len(train_enc)
                val_loss, val_acc = _val_metrics(model, val_enc)
                if not np.isfinite(val_loss):
                    raise NonFiniteError("validation loss is not finite")
                entry = EpochStats(epoch=epoch, train_loss=train_loss, val_loss=val_loss,
                                   val_accuracy=val_acc, learning_rate=lr_this_epoch)
                stats.append(entry)
                if on_epoch:
                    on_epoch(entry)
                if val_loss < best_loss:       # strict argmin, first epoch wins ties
                    best_loss = val_loss
                    best_epoch = epoch
                    best = params.copy()
                improved, reduce_lr, stop = schedule.observe(val_loss)
                if reduce_lr:
                    state.alpha *= config.plateau_factor
                if stop:
                    stop_reason = "early_stop"
                    break
    except NonFiniteError as exc:
        checkpoint_path = None
        if config.checkpoint_path:
            from .model_io import save_model
            checkpoint_restore()
            save_model(model, config.checkpoint_path)
            checkpoint_path = config.checkpoint_path
        raise TrainingDivergedError(f"training diverged: {exc}", checkpoint_path) from exc
    checkpoint_restore()
    return FitReport(epochs=stats, stop_reason=stop_reason, best_epoch=best_epoch,
                     wall_time_s=0.0)


def _fit_svm(train: Sequence[LabeledExample], config: TrainConfig, vocab) -> tuple:
    # Pegasos runs its own 1/(lambda t) schedule; plateau decay and early
    # stopping do not apply, but the best-epoch snapshot contract holds.
    max_len = config.resolved_max_seq_len()
    train_part, val_part = stratified_split(train, config.validation_fraction, config.seed)
    feats = [(bow_featurize(seq, vocab, binary=config.bow_binary), y)
             for seq, y in _encode_examples(train_part, vocab, max_len)]
    val_feats = [(bow_featurize(seq, vocab, binary=config.bow_binary), y)
                 for seq, y in _encode_examples(val_part, vocab, max_len)]
    stats: list[EpochStats] = []
    best = {"epoch": 0, "loss": float("inf"), "params": None}

    def observe(epoch, snapshot, objective, eta):
        val_loss = baselines.hinge_objective(snapshot, val_feats, include_reg=False)
        correct = sum(1 for x, y in val_feats
                      if (1 if baselines.svm_predict(snapshot, x) > 0.5 else 0) == y)
        stats.append(EpochStats(epoch=epoch, train_loss=objective, val_loss=val_loss,
                                val_accuracy=correct / len(val_feats), learning_rate=eta))
        if val_loss < best["loss"]:
            best.update(epoch=epoch, loss=val_loss, params=snapshot)

    svm_train(feats, lam=config.svm_lambda, epochs=config.svm_epochs,
              seed=config.seed, on_epoch=observe)
    model = BowSvmModel(svm=best["params"], vocab=vocab, max_seq_len=max_len,
                        binary=config.bow_binary)
    report = FitReport(epochs=stats, stop_reason="max_epochs", best_epoch=best["epoch"],
                       wall_time_s=0.0)
    return model, report


def evaluate(model, test: Sequence[LabeledExample], threshold: float = 0.5) -> EvalReport:
    """Accuracy and confusion counts; predicts 1 iff score strictly exceeds threshold."""
    if not test:
        raise ValueError("test set is empty")
    tp = fp = tn = fn = 0
    for ex in test:
        seq = encode(ex.headline.title, model.vocab, model.max_seq_len)
        pred = 1 if model.score_seq(seq) > threshold else 0
        if pred == 1 and ex.label == 1:
            tp += 1
        elif pred == 1 and ex.label == 0:
            fp += 1
        elif pred == 0 and ex.label == 0:
            tn += 1
        else:
            fn += 1
    n = len(test)
    return EvalReport(accuracy=(tp + tn) / n, tp=tp, fp=fp, tn=tn, fn=fn, n=n)


@dataclass
class TableRow:
    model: str
    embeddings: str
    fine_tuned: str
    dim: str
    accuracy: float


@dataclass
class KFoldResult:
    fold_reports: list[EvalReport]
    mean_accuracy: float
    std_accuracy: float
    table_row: TableRow

    def to_dict(self) -> dict:
        return {"folds": [r.to_dict() for r in self.fold_reports],
                "mean_accuracy": self.mean_accuracy,
                "std_accuracy": self.std_accuracy,
                "row": asdict(self.table_row)}


def _model_label(config: TrainConfig) -> str:
    if config.model_kind == "bilstm":
        return f"BiLSTM {config.hidden_size}"
    if config.model_kind == "lstm":
        return f"LSTM {config.hidden_size}"
    if config.model_kind == "cnn":
        return "CNN"
    return "BoW + SVM"


def run_kfold(data: Sequence[LabeledExample], config: TrainConfig, k: int = 5) -> KFoldResult:
    """Train on all-but-fold-i and test on fold i, for every fold.

    Each fold's training portion carves its own validation slice for the
    stopping schedule. Folds run sequentially; the report is fold-indexed.
    """
    config.validate()
    plan = make_folds(data, k, config.seed)
    by_id = {ex.headline.id: ex for ex in data}
    reports: list[EvalReport] = []
    for fold in range(k):
        test_ids = set(plan.ids_in_fold(fold))
        train_part = [ex for ex in data if ex.headline.id not in test_ids]
        test_part = [by_id[i] for i in sorted(test_ids)]
        model, _ = fit(train_part, config)
        reports.append(evaluate(model, test_part))
    accs = np.array([r.accuracy for r in reports])
    is_nn = config.model_kind != "bow_svm"
    row = TableRow(model=_model_label(config),
                   embeddings=config.resolved_embeddings_label(),
                   fine_tuned=("yes" if config.embedding_mode == "fine_tune" else "no") if is_nn else "-",
                   dim=str(config.embed_dim) if is_nn else "-",
                   accuracy=float(accs.mean()))
    return KFoldResult(fold_reports=reports, mean_accuracy=float(accs.mean()),
                       std_accuracy=float(accs.std()), table_row=row)


_TABLE_HEADER = ("Model", "Word Embeddings", "fine-tuned", "Dim", "Accuracy")


def format_results_table(rows: Sequence[TableRow]) -> str:
    """Aligned plain-text results table (accuracy to 4 decimals)."""
    cells = [list(_TABLE_HEADER)]
    for row in rows:
        cells.append([row.model, row.embeddings, row.fine_tuned, row.dim,
                      f"{row.accuracy:.4f}"])
    widths = [max(len(r[c]) for r in cells) for c in range(5)]
    lines = []
    for r in cells:
        lines.append("  ".join(cell.ljust(width) for cell, width in zip(r, widths)).rstrip())
    return "\n".join(lines) + "\n"


def parse_results_table(text: str) -> list[TableRow]:
    """Inverse of format_results_table (modulo the 4-decimal rounding)."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty table")
    header = tuple(re.split(r"\s{2,}", lines[0].strip()))
    if header != _TABLE_HEADER:
        raise ValueError(f"unexpected table header: {header}")
    rows = []
    for ln in lines[1:]:
        fields = re.split(r"\s{2,}", ln.strip())
        if len(fields) != 5:
            raise ValueError(f"cannot parse table row: {ln!r}")
        rows.append(TableRow(model=fields[0], embeddings=fields[1], fine_tuned=fields[2],
                             dim=fields[3], accuracy=float(fields[4])))
    return rows
