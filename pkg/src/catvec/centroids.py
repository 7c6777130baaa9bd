"""Per-category centroids with bottom-up descendant merging.

A category's own centroid is the plain average of its documents'
tf-idf vectors.  Merging then enriches each category with its
descendants, decayed by ``merge_lambda`` per level, and l2-normalizes
the result so sibling scores stay comparable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .corpus import Document, Taxonomy
from .errors import ParseError
from .vectorize import SparseVector, TfIdfModel, cosine

DEFAULT_MERGE_LAMBDA = 0.5


@dataclass
class CentroidModel:
    """Centroid per category id, plus the paths needed for persistence."""

    paths: dict[int, str]
    centroids: dict[int, SparseVector]
    merge_lambda: float = DEFAULT_MERGE_LAMBDA
    merged: bool = False

    def centroid(self, cat_id: int) -> SparseVector:
        return self.centroids[cat_id]

    def nonzero_ids(self) -> list[int]:
        return [cid for cid, vec in self.centroids.items() if vec]

    def save(self, path: str | Path, tfidf: TfIdfModel) -> None:
        """One JSON record per category: ``{path, entries: [[term, w], ...]}``."""
        with Path(path).open("w", encoding="utf-8") as fh:
            fh.write(
                json.dumps(
                    {"merge_lambda": self.merge_lambda, "merged": self.merged},
                    sort_keys=True,
                )
                + "\n"
            )
            for cid in sorted(self.centroids, key=lambda c: self.paths[c]):
                record = {
                    "path": self.paths[cid],
                    "entries": tfidf.to_term_pairs(self.centroids[cid]),
                }
                fh.write(json.dumps(record, ensure_ascii=False) + "\n")

    @classmethod
    def load(
        cls, path: str | Path, taxonomy: Taxonomy, tfidf: TfIdfModel
    ) -> "CentroidModel":
        paths: dict[int, str] = {}
        centroids: dict[int, SparseVector] = {}
        with Path(path).open(encoding="utf-8") as fh:
            header = json.loads(fh.readline())
            for lineno, line in enumerate(fh, 2):
                if not line.strip():
                    continue
                record = json.loads(line)
                cid = taxonomy.id_of(record["path"])
                if cid is None:
                    raise ParseError(f"unknown category {record['path']!r}", lineno)
                paths[cid] = record["path"]
                centroids[cid] = tfidf.from_term_pairs(
                    (t, float(w)) for t, w in record["entries"]
                )
        return cls(
            paths=paths,
            centroids=centroids,
            merge_lambda=float(header["merge_lambda"]),
            merged=bool(header["merged"]),
        )


def build_centroids(
    taxonomy: Taxonomy,
    docs: Sequence[Document],
    tfidf: TfIdfModel,
    merge_lambda: float = DEFAULT_MERGE_LAMBDA,
) -> CentroidModel:
    """Average each category's own documents; empty categories get zero vectors."""
    sums: dict[int, SparseVector] = {c.id: SparseVector.empty() for c in taxonomy}
    counts: dict[int, int] = {c.id: 0 for c in taxonomy}
    for doc in docs:
        if doc.label is None:
            continue
        sums[doc.label] = sums[doc.label].add(tfidf.transform(doc))
        counts[doc.label] += 1
    centroids = {
        cid: (vec.scale(1.0 / counts[cid]) if counts[cid] else vec)
        for cid, vec in sums.items()
    }
    return CentroidModel(
        paths={c.id: c.path for c in taxonomy},
        centroids=centroids,
        merge_lambda=merge_lambda,
    )


def merge_descendants(model: CentroidModel, taxonomy: Taxonomy) -> CentroidModel:
    """Fold children into parents bottom-up and normalize each result.

    merged(c) = normalize(own(c) + merge_lambda * sum(merged(child))).
    Categories with no documents anywhere in their subtree stay zero.
    """
    lam = model.merge_lambda
    merged: dict[int, SparseVector] = {}
    for cid in taxonomy.postorder():
        acc = model.centroids[cid]
        for child in taxonomy.category(cid).children:
            acc = acc.add(merged[child].scale(lam))
        merged[cid] = acc.normalized()
    return CentroidModel(
        paths=dict(model.paths),
        centroids=merged,
        merge_lambda=lam,
        merged=True,
    )


def classify_cosine(
    model: CentroidModel, doc_vec: SparseVector, k: int
) -> list[tuple[int, float]]:
    """Top-k categories by centroid cosine, ties broken by path."""
    if not doc_vec:
        return []
    scored = [
        (cid, cosine(model.centroids[cid], doc_vec)) for cid in model.nonzero_ids()
    ]
    scored.sort(key=lambda item: (-item[1], model.paths[item[0]]))
    return scored[:k]
