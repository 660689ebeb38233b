"""Tokenizer, vocabulary, and TF-IDF embedding with no external ML dependency."""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

# Lowercased letter/digit runs; everything else is a separator.
_TOKEN_RE = re.compile(r"[a-z0-9]+")


class EmptyCorpus(ValueError):
    """Raised when fitting is attempted on an empty corpus."""


def tokenize(text: str) -> list[str]:
    """Split ``text`` into lowercase alphanumeric runs. Deterministic."""
    return _TOKEN_RE.findall(text.lower())


class Vocabulary:
    """Dense, ordered token -> index mapping built from a training corpus."""

    def __init__(self, tokens: Sequence[str]):
        self.tokens: list[str] = list(tokens)
        self.index: dict[str, int] = {t: i for i, t in enumerate(self.tokens)}
        if len(self.index) != len(self.tokens):
            raise ValueError("vocabulary tokens must be unique")

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self.index

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Vocabulary) and self.tokens == other.tokens


@dataclass(frozen=True)
class TfidfModel:
    """Fitted vectorizer: vocabulary plus smoothed inverse document frequencies."""

    vocabulary: Vocabulary
    idf: np.ndarray  # shape (V,), non-negative

    @property
    def size(self) -> int:
        return len(self.vocabulary)


def fit_tfidf(corpus: Sequence[str]) -> TfidfModel:
    """Fit a TF-IDF model on raw prompt texts.

    idf[j] = ln((1 + N) / (1 + df_j)) + 1, the smoothed variant, so tokens
    absent from future documents never divide by zero.
    """
    if len(corpus) == 0:
        raise EmptyCorpus("cannot fit TF-IDF on an empty corpus")
    doc_tokens = [set(tokenize(doc)) for doc in corpus]
    df: Counter[str] = Counter()
    for tokens in doc_tokens:
        df.update(tokens)
    vocab = Vocabulary(sorted(df))
    n_docs = len(corpus)
    idf = np.array(
        [math.log((1 + n_docs) / (1 + df[t])) + 1.0 for t in vocab.tokens],
        dtype=np.float64,
    )
    return TfidfModel(vocabulary=vocab, idf=idf)


def embed(m: TfidfModel, prompt: str) -> np.ndarray:
    """Embed ``prompt`` as an L2-normalized tf-idf vector of size V.

    Raw term counts are weighted by idf and normalized; out-of-vocabulary
    tokens are ignored. A prompt with no known tokens embeds to the zero
    vector (the one case the unit-norm rule does not apply to).
    """
    vec = np.zeros(m.size, dtype=np.float64)
    counts = Counter(tokenize(prompt))
    for token, count in counts.items():
        j = m.vocabulary.index.get(token)
        if j is not None:
            vec[j] = count * m.idf[j]
    norm = np.linalg.norm(vec)
    if norm > 0.0:
        vec /= norm
    return vec
