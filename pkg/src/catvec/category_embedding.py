"""Joint training of category and word vectors in one space.

Each word maps to a short list of candidate categories ranked by its
centroid weight.  During training, the target word's category is
resolved against the current context window, and the resolved
category's vector predicts the same context words the target does,
through the shared output matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .centroids import CentroidModel
from .category_vectors import category_vector_algebraic
from .embeddings import (
    EmbeddingStore,
    SgnsEngine,
    TrainConfig,
    TrainResult,
    category_key,
)
from .vectorize import TfIdfModel, cosine

DEFAULT_CANDIDATES = 3


@dataclass
class CandidateIndex:
    """word -> candidate categories, ordered by centroid weight."""

    candidates: dict[str, list[tuple[int, float]]]
    m: int

    def get(self, word: str) -> list[tuple[int, float]]:
        return self.candidates.get(word, [])

    def __len__(self) -> int:
        return len(self.candidates)


def build_candidate_index(
    model: CentroidModel, tfidf: TfIdfModel, m: int = DEFAULT_CANDIDATES
) -> CandidateIndex:
    """Invert the centroid model: top-m categories per vocabulary word."""
    by_word: dict[str, list[tuple[int, float]]] = {}
    terms = tfidf.stats.terms
    for cid, centroid in model.centroids.items():
        for term_id, weight in centroid.items():
            by_word.setdefault(terms[term_id], []).append((cid, weight))
    for word, cands in by_word.items():
        cands.sort(key=lambda cw: (-cw[1], model.paths[cw[0]]))
        del cands[m:]
    return CandidateIndex(candidates=by_word, m=m)


def disambiguate(
    index: CandidateIndex,
    model: CentroidModel,
    tfidf: TfIdfModel,
    target: str,
    context: Sequence[str],
) -> int | None:
    """Pick the candidate category whose centroid best matches the context.

    Returns None when the word has no candidates or no candidate scores
    above zero against the context window.
    """
    cands = index.get(target)
    if not cands:
        return None
    ctx_vec = tfidf.transform(list(context))
    if not ctx_vec:
        return None
    scored = [(cid, cosine(model.centroids[cid], ctx_vec)) for cid, _ in cands]
    scored.sort(key=lambda cs: (-cs[1], model.paths[cs[0]]))
    best_id, best_score = scored[0]
    return best_id if best_score > 0.0 else None


def train_category_embedding(
    corpus: Iterable[Sequence[str]],
    index: CandidateIndex,
    model: CentroidModel,
    tfidf: TfIdfModel,
    store: EmbeddingStore | None,
    config: TrainConfig,
) -> TrainResult:
    """Train words and categories jointly over the shared output matrix.

    Category rows warm-start from their algebraic vectors whenever a
    pre-trained ``store`` provides the word vectors to compose them;
    otherwise they start from small random values.  Targets that fail
    disambiguation update only the word side, so an index with no
    candidates reproduces plain skip-gram exactly.
    """
    cat_keys = [category_key(model.paths[cid]) for cid in sorted(model.paths)]
    key_to_cid = {category_key(model.paths[cid]): cid for cid in model.paths}
    extra_init: dict[str, np.ndarray] = {}
    if store is not None:
        for key, cid in key_to_cid.items():
            composed = category_vector_algebraic(model.centroids[cid], store, tfidf)
            if not composed.is_zero:
                extra_init[key] = composed.vector
    engine = SgnsEngine(
        corpus,
        config,
        extra_keys=cat_keys,
        extra_init=extra_init,
        warm_start=store,
    )
    row_of = {key_to_cid[key]: engine.extra_row[key] for key in cat_keys}
    window = config.window
    cache: dict[tuple, int | None] = {}

    def resolver(tokens: list[str], i: int) -> int | None:
        lo = max(0, i - window)
        context = tuple(tokens[lo : i + window + 1])
        key = (tokens[i], context)
        if key not in cache:
            cid = disambiguate(index, model, tfidf, tokens[i], context)
            cache[key] = None if cid is None else row_of[cid]
        return cache[key]

    return engine.run(resolver)
