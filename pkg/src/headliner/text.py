"""Tokenization, vocabulary construction, and index encoding of titles."""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

PAD_INDEX = 0
UNK_INDEX = 1
PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"

# Unicode-aware word characters; punctuation runs act as separators and
# are dropped. The angle brackets in the special tokens can never be
# produced by this pattern, so collisions are impossible.
_TOKEN_RE = re.compile(r"\w+")


class EmptyTitleError(ValueError):
    """The title contains no tokens after normalization."""


def tokenize(title: str) -> list[str]:
    """Lowercase and split on whitespace/punctuation boundaries."""
    return _TOKEN_RE.findall(title.lower())


@dataclass(frozen=True)
class Vocabulary:
    """Immutable token <-> index map with PAD=0 and UNK=1 always present."""

    tokens: tuple[str, ...]
    min_count: int = 1
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.tokens) < 2 or self.tokens[0] != PAD_TOKEN or self.tokens[1] != UNK_TOKEN:
            raise ValueError("vocabulary must start with the PAD and UNK tokens")
        index = {tok: i for i, tok in enumerate(self.tokens)}
        if len(index) != len(self.tokens):
            raise ValueError("vocabulary tokens must be unique")
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def index_of(self, token: str) -> int:
        """Index of token, UNK for out-of-vocabulary tokens."""
        return self._index.get(token, UNK_INDEX)

    def to_json(self) -> str:
        return json.dumps({"tokens": list(self.tokens), "min_count": self.min_count})

    @classmethod
    def from_json(cls, text: str) -> "Vocabulary":
        obj = json.loads(text)
        return cls(tokens=tuple(obj["tokens"]), min_count=int(obj.get("min_count", 1)))


@dataclass(frozen=True)
class TokenSequence:
    """Vocabulary indices of one title; length is the pre-padding token count."""

    indices: tuple[int, ...]
    length: int

    def __post_init__(self):
        if self.length < 1 or self.length > len(self.indices):
            raise ValueError(f"invalid sequence length {self.length} for {len(self.indices)} indices")


def build_vocab(corpus: Iterable[Sequence[str]], max_size: int | None = None,
                min_count: int = 1) -> Vocabulary:
    """Rank tokens by (count desc, token asc) and keep the top max_size.

    Tokens seen fewer than min_count times are excluded. PAD and UNK are
    prepended and do not count against max_size.
    """
    counts: Counter[str] = Counter()
    for tokens in corpus:
        counts.update(tokens)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    kept = [tok for tok, c in ranked if c >= min_count]
    if max_size is not None:
        kept = kept[:max_size]
    return Vocabulary(tokens=(PAD_TOKEN, UNK_TOKEN, *kept), min_count=min_count)


def encode(title: str, vocab: Vocabulary, max_seq_len: int = 30) -> TokenSequence:
    """Map a title to vocabulary indices, truncating the tail beyond max_seq_len.

    Unknown tokens map to UNK. Raises EmptyTitleError when nothing remains
    after tokenization (such a title cannot be scored).
    """
    if max_seq_len < 1:
        raise ValueError("max_seq_len must be at least 1")
    tokens = tokenize(title)
    if not tokens:
        raise EmptyTitleError("empty title")
    tokens = tokens[:max_seq_len]
    indices = tuple(vocab.index_of(tok) for tok in tokens)
    return TokenSequence(indices=indices, length=len(indices))


def decode(seq: TokenSequence, vocab: Vocabulary) -> list[str]:
    """Tokens for the first `length` indices of the sequence."""
    return [vocab.tokens[i] for i in seq.indices[:seq.length]]
