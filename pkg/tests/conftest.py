from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from headliner.embeddings import EmbeddingMatrix
from headliner.recurrent import BiLstmModel, LstmParams, new_bilstm
from headliner.text import Vocabulary


TINY_TOKENS = ("<pad>", "<unk>", "alpha", "beta", "word00", "word01", "word02", "word03")


@pytest.fixture
def tiny_vocab() -> Vocabulary:
    return Vocabulary(tokens=TINY_TOKENS)


def random_lstm_params(hidden: int, inputs: int, seed: int) -> LstmParams:
    rng = np.random.default_rng(seed)
    def w():
        return rng.normal(0.0, 0.4, size=(hidden, hidden + inputs))
    def b():
        return rng.normal(0.0, 0.2, size=hidden)
    return LstmParams(w_i=w(), w_f=w(), w_o=w(), w_c=w(),
                      b_i=b(), b_f=b(), b_o=b(), b_c=b())


def seeded_bilstm(vocab: Vocabulary, hidden: int = 4, d: int = 3, seed: int = 7,
                  trainable: bool = False, max_seq_len: int = 30) -> BiLstmModel:
    rng = np.random.default_rng(seed)
    matrix = rng.normal(0.0, 0.5, size=(len(vocab), d))
    matrix[0] = 0.0
    emb = EmbeddingMatrix(matrix=matrix, trainable=trainable, coverage=0.0)
    return new_bilstm(vocab, emb, hidden, max_seq_len, rng)


@pytest.fixture
def tiny_bilstm(tiny_vocab) -> BiLstmModel:
    return seeded_bilstm(tiny_vocab)
