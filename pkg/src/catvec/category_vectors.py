"""Dense category and document vectors composed from word vectors.

A category's vector is the term-weight-weighted sum of its centroid
words' vectors; document vectors are built the same way from tf-idf
weights.  Words missing from the store are skipped and their weight
mass reported, with no renormalization of the rest.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .centroids import CentroidModel
from .embeddings import EmbeddingStore, dense_cosine, is_category_key
from .vectorize import SparseVector, TfIdfModel


@dataclass(frozen=True)
class ComposedVector:
    """Weighted word-vector sum plus bookkeeping about skipped terms."""

    vector: np.ndarray
    skipped_mass: float
    skipped_terms: tuple[str, ...]

    @property
    def is_zero(self) -> bool:
        return not np.any(self.vector)


def weighted_word_sum(
    entries: list[tuple[str, float]], store: EmbeddingStore
) -> ComposedVector:
    vec = np.zeros(store.dim, dtype=np.float64)
    skipped_mass = 0.0
    skipped: list[str] = []
    for word, weight in entries:
        wv = store.vector(word)
        if wv is None:
            skipped_mass += weight
            skipped.append(word)
        else:
            vec += weight * wv
    return ComposedVector(vec, skipped_mass, tuple(skipped))


def category_vector_algebraic(
    centroid: SparseVector, store: EmbeddingStore, tfidf: TfIdfModel
) -> ComposedVector:
    """Compose a category vector from its centroid's term weights."""
    return weighted_word_sum(tfidf.to_term_pairs(centroid), store)


def document_vector_algebraic(
    doc_vec: SparseVector, store: EmbeddingStore, tfidf: TfIdfModel
) -> ComposedVector:
    """Compose a document vector from its tf-idf weights."""
    return weighted_word_sum(tfidf.to_term_pairs(doc_vec), store)


def all_category_vectors(
    model: CentroidModel, store: EmbeddingStore, tfidf: TfIdfModel
) -> dict[int, ComposedVector]:
    return {
        cid: category_vector_algebraic(vec, store, tfidf)
        for cid, vec in model.centroids.items()
    }


def nearest_words(
    store: EmbeddingStore, vec: np.ndarray, n: int
) -> list[tuple[str, float]]:
    """Top-n store words by cosine to ``vec``; category keys are excluded."""
    if not np.any(vec):
        return []
    scored = [
        (word, dense_cosine(store.vector(word), vec))
        for word in store.keys
        if not is_category_key(word)
    ]
    scored.sort(key=lambda item: (-item[1], item[0]))
    return scored[:n]
