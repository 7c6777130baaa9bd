"""Macro-averaged classification metrics and graded precision@k.

Macro metrics give every category equal weight; the mean runs over
categories that appear in the gold labels or the predictions, so
categories never touched by a run do not dilute the scores.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Hashable, Mapping, Sequence

import numpy as np

from .centroids import CentroidModel
from .corpus import Document
from .embeddings import EmbeddingStore
from .errors import EmptyEval, IdMismatch
from .similarity import SimilarityClassifier, SimilarityConfig
from .vectorize import TfIdfModel

GRADES = ("relevant", "somewhat", "not")
GRADED_GAINS = {"relevant": 1.0, "somewhat": 0.5, "not": 0.0}
BINARY_GAINS = {"relevant": 1.0, "somewhat": 0.0, "not": 0.0}


@dataclass
class EvalReport:
    per_category: dict[Hashable, tuple[int, int, int]]  # label -> (tp, fp, fn)
    macro_precision: float
    macro_recall: float
    macro_f1: float
    p_at_k: dict[int, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "per_category": {
                str(label): {"tp": tp, "fp": fp, "fn": fn}
                for label, (tp, fp, fn) in sorted(
                    self.per_category.items(), key=lambda kv: str(kv[0])
                )
            },
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "p_at_k": {str(k): v for k, v in sorted(self.p_at_k.items())},
        }


def _safe_div(num: float, den: float) -> float:
    return num / den if den else 0.0


def evaluate_macro(
    predictions: Mapping[str, Hashable], gold: Mapping[str, Hashable]
) -> EvalReport:
    """Macro precision/recall/F1 over top-1 predictions.

    Every predicted document must carry a gold label; per-category F1
    is the harmonic mean of that category's precision and recall.
    """
    if not predictions:
        raise EmptyEval("no predictions to evaluate")
    missing = set(predictions) - set(gold)
    if missing:
        raise IdMismatch(missing)
    labels = set(gold[d] for d in predictions) | set(predictions.values())
    tp: dict[Hashable, int] = {c: 0 for c in labels}
    fp: dict[Hashable, int] = {c: 0 for c in labels}
    fn: dict[Hashable, int] = {c: 0 for c in labels}
    for doc_id, pred in predictions.items():
        truth = gold[doc_id]
        if pred == truth:
            tp[pred] += 1
        else:
            fp[pred] += 1
            fn[truth] += 1
    per_category = {c: (tp[c], fp[c], fn[c]) for c in labels}
    precisions, recalls, f1s = [], [], []
    for c in labels:
        p = _safe_div(tp[c], tp[c] + fp[c])
        r = _safe_div(tp[c], tp[c] + fn[c])
        precisions.append(p)
        recalls.append(r)
        f1s.append(_safe_div(2 * p * r, p + r))
    n = len(labels)
    return EvalReport(
        per_category=per_category,
        macro_precision=sum(precisions) / n,
        macro_recall=sum(recalls) / n,
        macro_f1=sum(f1s) / n,
    )


@dataclass
class RelevanceJudgments:
    """Three-level judgments per (document, category path) pair."""

    grades: dict[tuple[str, str], str]
    gains: dict[str, float] = field(default_factory=lambda: dict(GRADED_GAINS))

    def __post_init__(self):
        for (doc_id, path), grade in self.grades.items():
            if grade not in GRADES:
                raise ValueError(f"unknown grade {grade!r} for ({doc_id}, {path})")

    @classmethod
    def load(cls, path: str | Path, binary: bool = False) -> "RelevanceJudgments":
        grades = {}
        with Path(path).open(encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                record = json.loads(line)
                grades[(str(record["doc_id"]), str(record["path"]))] = record["grade"]
        gains = dict(BINARY_GAINS if binary else GRADED_GAINS)
        return cls(grades=grades, gains=gains)


def precision_at_k(
    rankings: Mapping[str, Sequence[str]],
    judgments: RelevanceJudgments,
    ks: Sequence[int],
) -> tuple[dict[int, float], list[tuple[str, str]]]:
    """Mean graded gain in the top k, per k.

    Rankings shorter than k pad with zero gain; pairs without a
    judgment also score 0 and are returned in the audit list.
    """
    if not rankings:
        raise EmptyEval("no rankings to evaluate")
    unjudged: list[tuple[str, str]] = []
    seen_unjudged = set()
    out: dict[int, float] = {}
    max_k = max(ks)
    gains_per_doc: dict[str, list[float]] = {}
    for doc_id, ranked in rankings.items():
        gains = []
        for path in ranked[:max_k]:
            grade = judgments.grades.get((doc_id, path))
            if grade is None:
                if (doc_id, path) not in seen_unjudged:
                    seen_unjudged.add((doc_id, path))
                    unjudged.append((doc_id, path))
                gains.append(0.0)
            else:
                gains.append(judgments.gains[grade])
        gains_per_doc[doc_id] = gains
    for k in ks:
        total = 0.0
        for gains in gains_per_doc.values():
            total += sum(gains[:k]) / k
        out[k] = total / len(gains_per_doc)
    return out, unjudged


@dataclass
class AblationBundle:
    """Everything a measure comparison needs, built once."""

    centroids: CentroidModel
    tfidf: TfIdfModel
    store: EmbeddingStore | None
    catvecs: dict[int, np.ndarray] | None
    docs: list[Document]


@dataclass
class AblationRow:
    label: str
    report: EvalReport


def ablation_run(
    bundle: AblationBundle, measures: Sequence[SimilarityConfig]
) -> list[AblationRow]:
    """One macro evaluation per measure over the bundle's labeled docs."""
    if not measures:
        raise EmptyEval("no measures requested")
    gold = {doc.id: doc.label for doc in bundle.docs if doc.label is not None}
    rows = []
    for cfg in measures:
        classifier = SimilarityClassifier(
            bundle.centroids,
            bundle.tfidf,
            store=bundle.store,
            catvecs=bundle.catvecs,
            config=cfg,
        )
        predictions = {}
        for doc in bundle.docs:
            if doc.label is None:
                continue
            ranking = classifier.classify(doc, k=1)
            if ranking:
                predictions[doc.id] = ranking[0][0]
        report = evaluate_macro(predictions, gold)
        rows.append(AblationRow(label=cfg.label(), report=report))
    return rows


def format_table(rows: Sequence[AblationRow]) -> str:
    """Aligned plain-text table of macro metrics per measure."""
    header = ("measure", "precision", "recall", "f1")
    body = [
        (
            row.label,
            f"{row.report.macro_precision:.4f}",
            f"{row.report.macro_recall:.4f}",
            f"{row.report.macro_f1:.4f}",
        )
        for row in rows
    ]
    widths = [
        max(len(header[i]), *(len(b[i]) for b in body)) if body else len(header[i])
        for i in range(4)
    ]
    lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(header)),
        "  ".join("-" * widths[i] for i in range(4)),
    ]
    for b in body:
        lines.append("  ".join(b[i].ljust(widths[i]) for i in range(4)))
    return "\n".join(lines)
