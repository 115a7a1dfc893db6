"""Tokenization, vocabulary construction, and inverse-document-frequency
statistics over the training corpus.

The tokenizer is deliberately simple and reversible: case-folded runs of
Unicode letters and digits, no stemming, no subword units. ``tokenize`` is
pure and reentrant; vocabularies and IDF tables are immutable after build.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from typing import TYPE_CHECKING, Mapping

from .errors import EmptyCorpusError

if TYPE_CHECKING:
    from .corpus import CaseCollection

# Runs of word characters minus underscore: splits on whitespace and
# punctuation while keeping alphanumeric compounds ("10bar") whole.
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

Token = str


def tokenize(text: str) -> list[Token]:
    """Case-folded alphanumeric runs of ``text``, in order; deterministic."""
    return _TOKEN_RE.findall(text.casefold())


@dataclass(frozen=True)
class Vocabulary:
    """Dense token -> id map over tokens seen at least ``min_count`` times.

    Ids are assigned in descending corpus frequency, ties broken
    lexicographically, so a rebuild over the same corpus is identical.
    """

    index: Mapping[Token, int]
    min_count: int = 1

    def __contains__(self, token: Token) -> bool:
        return token in self.index

    def __len__(self) -> int:
        return len(self.index)

    def id_of(self, token: Token) -> int | None:
        return self.index.get(token)

    @property
    def tokens(self) -> list[Token]:
        """Tokens in id order."""
        ordered = [""] * len(self.index)
        for token, i in self.index.items():
            ordered[i] = token
        return ordered


def build_vocabulary(corpus: "CaseCollection", min_count: int = 1) -> Vocabulary:
    """Count tokens over all case descriptions and keep the frequent ones."""
    if len(corpus) == 0:
        raise EmptyCorpusError("cannot build a vocabulary from an empty corpus")
    counts: Counter[str] = Counter()
    for case in corpus:
        counts.update(tokenize(case.description))
    kept = sorted(
        (t for t, n in counts.items() if n >= min_count),
        key=lambda t: (-counts[t], t),
    )
    return Vocabulary(index={t: i for i, t in enumerate(kept)}, min_count=min_count)


@dataclass(frozen=True)
class IdfTable:
    """Smoothed inverse document frequency per vocabulary token.

    ``weights[t] = ln((1 + n_docs) / (1 + df(t))) + 1``; unseen tokens fall
    back to ``oov_weight``, the maximum stored weight (rarest-token weight).
    """

    weights: Mapping[Token, float]
    n_docs: int
    oov_weight: float

    def weight_of(self, token: Token) -> float:
        return self.weights.get(token, self.oov_weight)


def compute_idf(corpus: "CaseCollection", vocab: Vocabulary) -> IdfTable:
    """Document frequencies over case descriptions; one document per case."""
    if len(corpus) == 0:
        raise EmptyCorpusError("cannot compute IDF over an empty corpus")
    df: Counter[str] = Counter()
    for case in corpus:
        present = {t for t in tokenize(case.description) if t in vocab}
        df.update(present)
    n = len(corpus)
    weights = {t: math.log((1 + n) / (1 + df[t])) + 1.0 for t in vocab.index}
    oov = max(weights.values(), default=1.0)
    return IdfTable(weights=weights, n_docs=n, oov_weight=oov)
