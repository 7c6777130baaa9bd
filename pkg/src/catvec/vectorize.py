"""Sparse tf-idf vectors over a fitted vocabulary.

Weights are nonnegative by construction; downstream similarity bounds
rely on that, so negative weights are rejected at the type boundary.
The smoothed idf ``ln((1 + N) / (1 + df)) + 1`` keeps every in-vocabulary
weight strictly positive.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import Document
from .errors import EmptyCorpus

TF_SCHEMES = ("raw", "log")


@dataclass(frozen=True)
class SparseVector:
    """Term-id -> weight map stored as parallel sorted arrays."""

    indices: np.ndarray  # int64, strictly increasing
    values: np.ndarray  # float64, strictly positive

    @classmethod
    def empty(cls) -> "SparseVector":
        return cls(np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64))

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, float]]) -> "SparseVector":
        items = sorted(pairs)
        indices = np.array([i for i, _ in items], dtype=np.int64)
        values = np.array([v for _, v in items], dtype=np.float64)
        if np.any(values < 0):
            raise ValueError("sparse weights must be nonnegative")
        keep = values > 0
        vec = cls(indices[keep], values[keep])
        if len(vec.indices) > 1 and not np.all(np.diff(vec.indices) > 0):
            raise ValueError("duplicate term ids")
        return vec

    @classmethod
    def from_dict(cls, mapping: Mapping[int, float]) -> "SparseVector":
        return cls.from_pairs(mapping.items())

    def __len__(self) -> int:
        return len(self.indices)

    def __bool__(self) -> bool:
        return len(self.indices) > 0

    def items(self) -> list[tuple[int, float]]:
        return [(int(i), float(v)) for i, v in zip(self.indices, self.values)]

    def to_dict(self) -> dict[int, float]:
        return dict(self.items())

    def get(self, term_id: int) -> float:
        pos = np.searchsorted(self.indices, term_id)
        if pos < len(self.indices) and self.indices[pos] == term_id:
            return float(self.values[pos])
        return 0.0

    def dot(self, other: "SparseVector") -> float:
        common, ia, ib = np.intersect1d(
            self.indices, other.indices, assume_unique=True, return_indices=True
        )
        if len(common) == 0:
            return 0.0
        return float(np.dot(self.values[ia], other.values[ib]))

    def norm(self) -> float:
        return math.sqrt(float(np.dot(self.values, self.values)))

    def scale(self, factor: float) -> "SparseVector":
        if factor < 0:
            raise ValueError("scale factor must be nonnegative")
        if factor == 0:
            return SparseVector.empty()
        return SparseVector(self.indices, self.values * factor)

    def add(self, other: "SparseVector") -> "SparseVector":
        if not self:
            return other
        if not other:
            return self
        idx = np.concatenate([self.indices, other.indices])
        val = np.concatenate([self.values, other.values])
        uniq, inverse = np.unique(idx, return_inverse=True)
        summed = np.zeros(len(uniq), dtype=np.float64)
        np.add.at(summed, inverse, val)
        keep = summed > 0
        return SparseVector(uniq[keep], summed[keep])

    def normalized(self) -> "SparseVector":
        n = self.norm()
        return self if n == 0 else SparseVector(self.indices, self.values / n)


def cosine(u: SparseVector, v: SparseVector) -> float:
    """Standard cosine; 0 when either vector has zero norm."""
    nu, nv = u.norm(), v.norm()
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return u.dot(v) / (nu * nv)


@dataclass(frozen=True)
class CorpusStats:
    n_docs: int
    df: dict[str, int]
    vocab: dict[str, int]

    @property
    def terms(self) -> list[str]:
        """Term strings ordered by id."""
        out = [""] * len(self.vocab)
        for term, tid in self.vocab.items():
            out[tid] = term
        return out


class TfIdfModel:
    """Fitted vocabulary with tf-idf weighting."""

    def __init__(
        self,
        stats: CorpusStats,
        tf_scheme: str = "raw",
        normalize: bool = False,
    ):
        if tf_scheme not in TF_SCHEMES:
            raise ValueError(f"tf_scheme must be one of {TF_SCHEMES}")
        self.stats = stats
        self.tf_scheme = tf_scheme
        self.normalize = normalize
        self._idf = np.zeros(len(stats.vocab), dtype=np.float64)
        for term, tid in stats.vocab.items():
            self._idf[tid] = math.log((1 + stats.n_docs) / (1 + stats.df[term])) + 1.0

    @property
    def vocab(self) -> dict[str, int]:
        return self.stats.vocab

    def idf(self, term: str) -> float:
        tid = self.stats.vocab.get(term)
        if tid is None:
            return 0.0
        return float(self._idf[tid])

    def term(self, term_id: int) -> str:
        return self.stats.terms[term_id]

    def transform(self, doc: Document | Sequence[str]) -> SparseVector:
        """tf-idf vector of a document; out-of-vocabulary tokens are dropped."""
        tokens = doc.tokens if isinstance(doc, Document) else doc
        counts = Counter(t for t in tokens if t in self.stats.vocab)
        if not counts:
            return SparseVector.empty()
        pairs = []
        for term, count in counts.items():
            tf = float(count) if self.tf_scheme == "raw" else 1.0 + math.log(count)
            pairs.append((self.stats.vocab[term], tf * self.idf(term)))
        vec = SparseVector.from_pairs(pairs)
        return vec.normalized() if self.normalize else vec

    def to_term_pairs(self, vec: SparseVector) -> list[tuple[str, float]]:
        terms = self.stats.terms
        return [(terms[i], v) for i, v in vec.items()]

    def from_term_pairs(self, pairs: Iterable[tuple[str, float]]) -> SparseVector:
        vocab = self.stats.vocab
        return SparseVector.from_pairs(
            (vocab[t], w) for t, w in pairs if t in vocab
        )

    def save(self, path: str | Path) -> None:
        data = {
            "n_docs": self.stats.n_docs,
            "df": self.stats.df,
            "tf_scheme": self.tf_scheme,
            "normalize": self.normalize,
        }
        Path(path).write_text(
            json.dumps(data, sort_keys=True, ensure_ascii=False), encoding="utf-8"
        )

    @classmethod
    def load(cls, path: str | Path) -> "TfIdfModel":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        df = {str(t): int(c) for t, c in data["df"].items()}
        vocab = {term: tid for tid, term in enumerate(sorted(df))}
        stats = CorpusStats(n_docs=int(data["n_docs"]), df=df, vocab=vocab)
        return cls(stats, tf_scheme=data["tf_scheme"], normalize=data["normalize"])


def fit(
    documents: Sequence[Document],
    min_count: int = 1,
    tf_scheme: str = "raw",
    normalize: bool = False,
) -> TfIdfModel:
    """Count the corpus and build a :class:`TfIdfModel`.

    The vocabulary keeps every token occurring at least ``min_count``
    times in total; term ids are assigned in lexicographic order.
    """
    totals: Counter[str] = Counter()
    df: Counter[str] = Counter()
    n_docs = 0
    for doc in documents:
        n_docs += 1
        totals.update(doc.tokens)
        df.update(set(doc.tokens))
    kept = {t for t, c in totals.items() if c >= min_count}
    if not kept:
        raise EmptyCorpus("no tokens survived min_count filtering")
    vocab = {term: tid for tid, term in enumerate(sorted(kept))}
    stats = CorpusStats(
        n_docs=n_docs, df={t: df[t] for t in kept}, vocab=vocab
    )
    return TfIdfModel(stats, tf_scheme=tf_scheme, normalize=normalize)
