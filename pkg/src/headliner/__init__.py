"""Headline popularity prediction: a from-scratch bidirectional LSTM with
per-word introspection, BoW+SVM and CNN baselines, and the training,
evaluation, and serving tools around them."""

__version__ = "0.1.0"

from .corpus import FoldPlan, Headline, LabeledExample, label_by_group_median, load_dataset, make_folds
from .text import TokenSequence, Vocabulary, build_vocab, encode, tokenize
from .embeddings import EmbeddingMatrix, build_matrix, lookup, parse_glove
from .recurrent import BiLstmModel, LstmModel, introspect, score
from .training import EvalReport, FitReport, TrainConfig, evaluate, fit, run_kfold
from .model_io import load_model, save_model

__all__ = [
    "__version__",
    "Headline", "LabeledExample", "FoldPlan", "load_dataset", "label_by_group_median", "make_folds",
    "Vocabulary", "TokenSequence", "tokenize", "build_vocab", "encode",
    "EmbeddingMatrix", "parse_glove", "build_matrix", "lookup",
    "BiLstmModel", "LstmModel", "score", "introspect",
    "TrainConfig", "FitReport", "EvalReport", "fit", "evaluate", "run_kfold",
    "save_model", "load_model",
]
