"""Semantic similarity between a category centroid and a document.

Three measures over term-weighted entries:

* ``dirac``   - the cosine written as a double sum where only identical
  terms match.
* ``word``    - the same double sum with the identity test relaxed to
  an embedding-cosine gate: distinct terms contribute their cosine
  when it strictly exceeds ``theta``.
* ``catword`` - the word measure with each side augmented by one
  pseudo term carrying that side's composed dense vector at weight
  ``alpha``.

A fourth variant, ``densecos``, ranks by plain cosine of the composed
dense vectors and ignores the term entries entirely.

All double sums iterate left entries outer, right entries inner, in
the order given, so the documented reductions (alpha=0, theta=1,
orthogonal stores) hold bit-exactly, not just within tolerance.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .centroids import CentroidModel
from .corpus import Document
from .category_vectors import document_vector_algebraic
from .embeddings import EmbeddingStore, dense_cosine, is_category_key
from .errors import ConfigError
from .vectorize import TfIdfModel

Entries = Sequence[tuple[str, float]]

# Sentinel keys for the pseudo terms; NUL cannot occur in real tokens.
CAT_PSEUDO_KEY = "\x00pseudo:category"
DOC_PSEUDO_KEY = "\x00pseudo:document"


class Measure(str, enum.Enum):
    DIRAC = "dirac"
    WORD = "word"
    CATEGORY_WORD = "catword"
    DENSE = "densecos"


@dataclass(frozen=True)
class SimilarityConfig:
    measure: Measure = Measure.WORD
    theta: float = 0.6
    alpha: float = 0.9
    include_pseudo_in_norm: bool = True

    def __post_init__(self):
        if not 0.0 <= self.theta <= 1.0:
            raise ValueError("theta must lie in [0, 1]")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")

    def label(self) -> str:
        if self.measure is Measure.DIRAC:
            return "dirac"
        if self.measure is Measure.DENSE:
            return "densecos"
        if self.measure is Measure.WORD:
            return f"word(theta={self.theta:g})"
        return f"catword(theta={self.theta:g},alpha={self.alpha:g})"

    def to_dict(self) -> dict:
        return {
            "measure": self.measure.value,
            "theta": self.theta,
            "alpha": self.alpha,
            "include_pseudo_in_norm": self.include_pseudo_in_norm,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SimilarityConfig":
        return cls(
            measure=Measure(data.get("measure", "word")),
            theta=float(data.get("theta", 0.6)),
            alpha=float(data.get("alpha", 0.9)),
            include_pseudo_in_norm=bool(data.get("include_pseudo_in_norm", True)),
        )


def as_entries(weights: Mapping[str, float] | Entries) -> list[tuple[str, float]]:
    if isinstance(weights, Mapping):
        return list(weights.items())
    return list(weights)


def _sq_norm(entries: Entries) -> float:
    total = 0.0
    for _, w in entries:
        total += w * w
    return total


def phi(store: EmbeddingStore | None, wj: str, wk: str, theta: float) -> float:
    """Gated word similarity: 1 on identical keys, cosine above theta, else 0.

    Pairs where either vector is missing fall back to the identity-only
    rule, so an absent store degrades to the dirac measure.
    """
    if wj == wk:
        return 1.0
    if store is None:
        return 0.0
    vj = store.vector(wj)
    vk = store.vector(wk)
    if vj is None or vk is None:
        return 0.0
    c = dense_cosine(vj, vk)
    return c if c > theta else 0.0


def sim_dirac(cat_entries, doc_entries) -> float:
    """Cosine via the explicit double sum over all entry pairs."""
    cat_entries = as_entries(cat_entries)
    doc_entries = as_entries(doc_entries)
    nc = math.sqrt(_sq_norm(cat_entries))
    nd = math.sqrt(_sq_norm(doc_entries))
    if nc == 0.0 or nd == 0.0:
        return 0.0
    total = 0.0
    for wj, mu in cat_entries:
        for wk, dw in doc_entries:
            if wj == wk:
                total += mu * dw
    return total / (nc * nd)


class NeighborIndex:
    """Per-word sets of store words whose cosine can clear the gate.

    Built with a small slack below theta so that no pair the exact
    per-pair check would accept is ever filtered out; scores therefore
    match the unindexed double sum bit for bit.
    """

    def __init__(self, theta: float, neighbors: dict[str, frozenset[str]]):
        self.theta = theta
        self.neighbors = neighbors

    @classmethod
    def build(
        cls,
        store: EmbeddingStore,
        theta: float,
        words: Sequence[str] | None = None,
        slack: float = 1e-9,
    ) -> "NeighborIndex":
        if words is None:
            words = [w for w in store.keys if not is_category_key(w)]
        words = [w for w in words if w in store]
        if not words:
            return cls(theta, {})
        matrix = np.stack([store.vector(w) for w in words])
        norms = np.linalg.norm(matrix, axis=1)
        safe = np.where(norms > 0, norms, 1.0)
        unit = matrix / safe[:, None]
        unit[norms == 0] = 0.0
        cos = unit @ unit.T
        neighbors: dict[str, frozenset[str]] = {}
        cutoff = theta - slack
        for i, w in enumerate(words):
            close = {words[j] for j in np.nonzero(cos[i] > cutoff)[0] if j != i}
            if close:
                neighbors[w] = frozenset(close)
        return cls(theta, neighbors)

    def allowed(self, word: str) -> frozenset[str]:
        return self.neighbors.get(word, frozenset())


def sim_word(
    cat_entries,
    doc_entries,
    store: EmbeddingStore | None,
    theta: float,
    neighbor_index: NeighborIndex | None = None,
) -> float:
    """Relaxed-match similarity; norms are those of the original vectors."""
    cat_entries = as_entries(cat_entries)
    doc_entries = as_entries(doc_entries)
    nc = math.sqrt(_sq_norm(cat_entries))
    nd = math.sqrt(_sq_norm(doc_entries))
    if nc == 0.0 or nd == 0.0:
        return 0.0
    total = 0.0
    if neighbor_index is None:
        for wj, mu in cat_entries:
            for wk, dw in doc_entries:
                p = phi(store, wj, wk, theta)
                if p != 0.0:
                    total += p * mu * dw
    else:
        for wj, mu in cat_entries:
            close = neighbor_index.allowed(wj)
            for wk, dw in doc_entries:
                if wk == wj:
                    total += mu * dw
                elif wk in close:
                    p = phi(store, wj, wk, theta)
                    if p != 0.0:
                        total += p * mu * dw
    return total / (nc * nd)


def _unit(vec: np.ndarray) -> np.ndarray:
    norm = math.sqrt(float(vec @ vec))
    return vec if norm == 0.0 else vec / norm


def sim_category_word(
    cat_entries,
    doc_entries,
    store: EmbeddingStore | None,
    catvec: np.ndarray,
    docvec: np.ndarray,
    config: SimilarityConfig,
) -> float:
    """Word-level similarity over entries augmented with pseudo terms.

    Each side gains one extra entry at weight ``alpha`` whose "vector"
    is that side's unit-normalized composed dense vector; the gate
    between pseudo and real terms runs on those vectors.  Zero composed
    vectors stay zero and simply never clear the gate.
    """
    cat_entries = as_entries(cat_entries)
    doc_entries = as_entries(doc_entries)
    alpha = config.alpha
    overlay = {
        CAT_PSEUDO_KEY: _unit(np.asarray(catvec, dtype=np.float64)),
        DOC_PSEUDO_KEY: _unit(np.asarray(docvec, dtype=np.float64)),
    }

    def resolve(key: str) -> np.ndarray | None:
        if key in overlay:
            return overlay[key]
        return store.vector(key) if store is not None else None

    def gated(wj: str, wk: str) -> float:
        if wj == wk:
            return 1.0
        vj, vk = resolve(wj), resolve(wk)
        if vj is None or vk is None:
            return 0.0
        c = dense_cosine(vj, vk)
        return c if c > config.theta else 0.0

    aug_cat = cat_entries + [(CAT_PSEUDO_KEY, alpha)]
    aug_doc = doc_entries + [(DOC_PSEUDO_KEY, alpha)]
    if config.include_pseudo_in_norm:
        nc = math.sqrt(_sq_norm(cat_entries) + alpha * alpha)
        nd = math.sqrt(_sq_norm(doc_entries) + alpha * alpha)
    else:
        nc = math.sqrt(_sq_norm(cat_entries))
        nd = math.sqrt(_sq_norm(doc_entries))
    if nc == 0.0 or nd == 0.0:
        return 0.0
    total = 0.0
    for wj, mu in aug_cat:
        for wk, dw in aug_doc:
            p = gated(wj, wk)
            if p != 0.0:
                term = p * mu * dw
                if term != 0.0:
                    total += term
    return total / (nc * nd)


class SimilarityClassifier:
    """Ranks categories for documents under one configured measure."""

    def __init__(
        self,
        centroids: CentroidModel,
        tfidf: TfIdfModel,
        store: EmbeddingStore | None = None,
        catvecs: Mapping[int, np.ndarray] | None = None,
        config: SimilarityConfig = SimilarityConfig(),
        use_neighbor_index: bool = True,
    ):
        self.centroids = centroids
        self.tfidf = tfidf
        self.store = store
        self.config = config
        measure = config.measure
        if measure in (Measure.WORD, Measure.CATEGORY_WORD, Measure.DENSE):
            if store is None:
                raise ConfigError(f"measure {measure.value} requires an embedding store")
        if measure in (Measure.CATEGORY_WORD, Measure.DENSE):
            if catvecs is None:
                raise ConfigError(f"measure {measure.value} requires category vectors")
        self.catvecs: dict[int, np.ndarray] = {}
        if catvecs is not None:
            for cid, vec in catvecs.items():
                arr = np.asarray(vec, dtype=np.float64)
                if store is not None and arr.shape != (store.dim,):
                    raise ConfigError(
                        f"category vector for id {cid} has dimension {arr.shape},"
                        f" store expects ({store.dim},)"
                    )
                self.catvecs[cid] = arr
        self._universe = sorted(
            self.centroids.nonzero_ids(), key=lambda cid: centroids.paths[cid]
        )
        self._entries = {
            cid: tfidf.to_term_pairs(self.centroids.centroid(cid))
            for cid in self._universe
        }
        self.neighbor_index = None
        if use_neighbor_index and store is not None and measure is Measure.WORD:
            vocab_words = [w for w in sorted(tfidf.vocab) if w in store]
            self.neighbor_index = NeighborIndex.build(store, config.theta, vocab_words)

    def _doc_dense(self, doc_vec) -> np.ndarray:
        composed = document_vector_algebraic(doc_vec, self.store, self.tfidf)
        return composed.vector

    def score(self, cat_id: int, doc_entries: Entries, docvec: np.ndarray | None) -> float:
        cfg = self.config
        entries = self._entries[cat_id]
        if cfg.measure is Measure.DIRAC:
            return sim_dirac(entries, doc_entries)
        if cfg.measure is Measure.WORD:
            return sim_word(entries, doc_entries, self.store, cfg.theta, self.neighbor_index)
        if cfg.measure is Measure.DENSE:
            return dense_cosine(self.catvecs.get(cat_id, np.zeros(self.store.dim)), docvec)
        return sim_category_word(
            entries,
            doc_entries,
            self.store,
            self.catvecs.get(cat_id, np.zeros(self.store.dim)),
            docvec,
            cfg,
        )

    def classify(self, doc: Document | Sequence[str], k: int) -> list[tuple[int, float]]:
        """Top-k (category id, score), ties broken by category path."""
        doc_vec = self.tfidf.transform(doc)
        if not doc_vec:
            return []
        doc_entries = self.tfidf.to_term_pairs(doc_vec)
        docvec = None
        if self.config.measure in (Measure.CATEGORY_WORD, Measure.DENSE):
            docvec = self._doc_dense(doc_vec)
        scored = [
            (cid, self.score(cid, doc_entries, docvec)) for cid in self._universe
        ]
        scored.sort(key=lambda item: (-item[1], self.centroids.paths[item[0]]))
        return scored[:k]
