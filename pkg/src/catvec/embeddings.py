"""Dense vector store and a skip-gram trainer with negative sampling.

Per (target, context) pair, the training loss is

    -log sigmoid(u_ctx . v_tgt) - sum_j log sigmoid(-u_neg_j . v_tgt)

with negatives drawn from the unigram^0.75 distribution.  The engine
also supports an extra set of rows (category keys) trained against the
same context/output matrix; a resolver callback decides, per target
position, which extra row participates.  Word keys and category keys
share one namespace, categories carrying the ``cat:`` prefix.
"""

from __future__ import annotations

import math
import threading
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import EmptyCorpus, FormatError, MissingKey, NotFound

CATEGORY_PREFIX = "cat:"


def category_key(path: str) -> str:
    return CATEGORY_PREFIX + path


def is_category_key(key: str) -> bool:
    return key.startswith(CATEGORY_PREFIX)


def sigmoid(x):
    """Numerically stable logistic function for scalars and arrays."""
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out if out.ndim else float(out)


def ns_pair_loss_and_grads(
    target_vec: np.ndarray, context_vec: np.ndarray, negative_vecs: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray, np.ndarray]:
    """Loss and gradients for one positive pair plus its negatives.

    Returns ``(loss, d/d target, d/d context, d/d negatives)`` with all
    gradients taken at the current parameter values (batch semantics).
    """
    pos_score = float(target_vec @ context_vec)
    neg_scores = negative_vecs @ target_vec if len(negative_vecs) else np.zeros(0)
    loss = float(np.logaddexp(0.0, -pos_score) + np.logaddexp(0.0, neg_scores).sum())
    s_pos = sigmoid(pos_score)
    s_neg = sigmoid(neg_scores)
    g_target = (s_pos - 1.0) * context_vec
    if len(negative_vecs):
        g_target = g_target + s_neg @ negative_vecs
    g_context = (s_pos - 1.0) * target_vec
    g_negs = np.outer(s_neg, target_vec) if len(negative_vecs) else np.zeros((0, len(target_vec)))
    return loss, g_target, g_context, g_negs


def ns_pair_loss(
    target_vec: np.ndarray, context_vec: np.ndarray, negative_vecs: np.ndarray
) -> float:
    return ns_pair_loss_and_grads(target_vec, context_vec, negative_vecs)[0]


@dataclass(frozen=True)
class TrainConfig:
    dim: int = 300
    window: int = 5
    negatives: int = 15
    epochs: int = 5
    learning_rate: float = 0.025
    min_lr_fraction: float = 1e-4
    min_count: int = 1
    subsample: float = 0.0
    seed: int = 1
    workers: int = 1

    def __post_init__(self):
        if self.dim < 1 or self.window < 1 or self.negatives < 1:
            raise ValueError("dim, window, and negatives must all be >= 1")

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "window": self.window,
            "negatives": self.negatives,
            "epochs": self.epochs,
            "learning_rate": self.learning_rate,
            "min_lr_fraction": self.min_lr_fraction,
            "min_count": self.min_count,
            "subsample": self.subsample,
            "seed": self.seed,
            "workers": self.workers,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TrainConfig":
        return cls(**{k: data[k] for k in cls().to_dict() if k in data})


class EmbeddingStore:
    """Dense vectors keyed by word or category; missing keys read as None."""

    def __init__(
        self,
        dim: int,
        keys: Sequence[str],
        input_vectors: np.ndarray,
        output_vectors: np.ndarray | None = None,
    ):
        if input_vectors.shape != (len(keys), dim):
            raise ValueError("input matrix shape does not match keys/dim")
        if not np.all(np.isfinite(input_vectors)):
            raise ValueError("non-finite embedding values")
        self.dim = dim
        self.keys = list(keys)
        self._row = {k: i for i, k in enumerate(self.keys)}
        if len(self._row) != len(self.keys):
            raise ValueError("duplicate keys")
        self.input_vectors = input_vectors
        self.output_vectors = output_vectors

    @classmethod
    def from_vectors(cls, vectors: dict[str, Sequence[float]]) -> "EmbeddingStore":
        keys = list(vectors)
        matrix = np.array([vectors[k] for k in keys], dtype=np.float64)
        if matrix.ndim != 2:
            raise ValueError("all vectors must share one dimension")
        return cls(matrix.shape[1], keys, matrix)

    def __len__(self) -> int:
        return len(self.keys)

    def __contains__(self, key: str) -> bool:
        return key in self._row

    def vector(self, key: str) -> np.ndarray | None:
        row = self._row.get(key)
        return None if row is None else self.input_vectors[row]

    def output_vector(self, key: str) -> np.ndarray | None:
        if self.output_vectors is None:
            return None
        row = self._row.get(key)
        return None if row is None else self.output_vectors[row]

    def word_keys(self) -> list[str]:
        return [k for k in self.keys if not is_category_key(k)]

    def category_keys(self) -> list[str]:
        return [k for k in self.keys if is_category_key(k)]

    def cosine(self, key1: str, key2: str) -> float:
        v1, v2 = self.vector(key1), self.vector(key2)
        if v1 is None or v2 is None:
            missing = key1 if v1 is None else key2
            raise MissingKey(f"no vector for {missing!r}")
        return dense_cosine(v1, v2)

    def with_vectors(self, extra: dict[str, np.ndarray]) -> "EmbeddingStore":
        """New store with ``extra`` rows appended (existing keys replaced)."""
        vectors = {k: self.input_vectors[i] for k, i in self._row.items()}
        vectors.update(extra)
        keys = list(vectors)
        matrix = np.array([np.asarray(vectors[k], dtype=np.float64) for k in keys])
        return EmbeddingStore(self.dim, keys, matrix)


def dense_cosine(u: np.ndarray, v: np.ndarray) -> float:
    nu = math.sqrt(float(u @ u))
    nv = math.sqrt(float(v @ v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    # clamp rounding overshoot so a strict > 1.0 gate can never fire
    return min(1.0, max(-1.0, float(u @ v) / (nu * nv)))


def word_cosine(store: EmbeddingStore, w1: str, w2: str) -> float:
    """Cosine of two stored vectors; raises MissingKey for absent words."""
    return store.cosine(w1, w2)


@dataclass
class PairEvent:
    """Snapshot handed to the test hook before a pair update is applied."""

    target_vec: np.ndarray
    context_vec: np.ndarray
    negative_vecs: np.ndarray
    loss_word: float
    category_vec: np.ndarray | None = None
    category_negative_vecs: np.ndarray | None = None
    loss_category: float = 0.0


@dataclass
class TrainResult:
    store: EmbeddingStore
    losses: list[float] = field(default_factory=list)
    word_losses: list[float] = field(default_factory=list)
    category_losses: list[float] = field(default_factory=list)


# Resolver: (sentence tokens, target position) -> extra row id or None.
Resolver = Callable[[list[str], int], int | None]


class SgnsEngine:
    """Shared trainer for the plain and the category-augmented objective.

    The main RNG stream covers word-matrix init, subsampling, and
    negative draws; extra (category) rows initialize from a separate
    stream so adding them never perturbs the word-side trajectory.
    """

    def __init__(
        self,
        sentences: Iterable[Sequence[str]],
        config: TrainConfig,
        extra_keys: Sequence[str] = (),
        extra_init: dict[str, np.ndarray] | None = None,
        warm_start: EmbeddingStore | None = None,
    ):
        self.config = config
        corpus = [list(s) for s in sentences]
        counts: Counter[str] = Counter()
        for sent in corpus:
            counts.update(sent)
        kept = [(w, c) for w, c in counts.items() if c >= config.min_count]
        kept.sort(key=lambda wc: (-wc[1], wc[0]))
        if not kept:
            raise EmptyCorpus("no words survived min_count filtering")
        self.words = [w for w, _ in kept]
        self.word_row = {w: i for i, w in enumerate(self.words)}
        self.counts = np.array([c for _, c in kept], dtype=np.float64)
        self.total_tokens = int(self.counts.sum())

        self.sentences = [
            np.array([self.word_row[w] for w in sent if w in self.word_row], dtype=np.int64)
            for sent in corpus
        ]
        self.sentences = [s for s in self.sentences if len(s)]

        probs = self.counts**0.75
        cdf = np.cumsum(probs / probs.sum())
        cdf[-1] = 1.0
        self.neg_cdf = cdf

        seeds = np.random.SeedSequence(config.seed).spawn(3)
        self.rng = np.random.default_rng(seeds[0])
        extra_rng = np.random.default_rng(seeds[1])
        self._worker_seed = seeds[2]

        n_words = len(self.words)
        self.extra_keys = list(extra_keys)
        n_rows = n_words + len(self.extra_keys)
        bound = 0.5 / config.dim
        self.in_vecs = np.zeros((n_rows, config.dim), dtype=np.float64)
        self.in_vecs[:n_words] = self.rng.uniform(-bound, bound, size=(n_words, config.dim))
        self.out_vecs = np.zeros((n_rows, config.dim), dtype=np.float64)
        if warm_start is not None:
            if warm_start.dim != config.dim:
                raise ValueError("warm-start store dimension differs from config.dim")
            for word, row in self.word_row.items():
                vec = warm_start.vector(word)
                if vec is not None:
                    self.in_vecs[row] = vec
                out = warm_start.output_vector(word)
                if out is not None:
                    self.out_vecs[row] = out
        self.extra_row = {}
        for offset, key in enumerate(self.extra_keys):
            row = n_words + offset
            self.extra_row[key] = row
            init = (extra_init or {}).get(key)
            if init is not None:
                self.in_vecs[row] = np.asarray(init, dtype=np.float64)
            else:
                self.in_vecs[row] = extra_rng.uniform(-bound, bound, size=config.dim)

        self.on_pair: Callable[[PairEvent], None] | None = None

    def _draw_negatives(self, rng: np.random.Generator, exclude_row: int) -> np.ndarray:
        u = rng.random(self.config.negatives)
        rows = np.searchsorted(self.neg_cdf, u, side="right")
        return rows[rows != exclude_row]

    def _subsample(self, rng: np.random.Generator, rows: np.ndarray) -> np.ndarray:
        t = self.config.subsample
        if t <= 0:
            return rows
        freqs = self.counts[rows] / self.total_tokens
        keep = np.ones(len(rows), dtype=bool)
        for i, f in enumerate(freqs):
            if f > t:
                keep[i] = rng.random() < math.sqrt(t / f)
        return rows[keep]

    def _pair_step(
        self,
        rng: np.random.Generator,
        target_row: int,
        ctx_row: int,
        cat_row: int | None,
        alpha: float,
    ) -> tuple[float, float]:
        negs = self._draw_negatives(rng, ctx_row)
        loss_w, g_t, g_c, g_n = ns_pair_loss_and_grads(
            self.in_vecs[target_row], self.out_vecs[ctx_row], self.out_vecs[negs]
        )
        loss_c = 0.0
        if cat_row is not None:
            cat_negs = self._draw_negatives(rng, ctx_row)
            loss_c, cg_t, cg_c, cg_n = ns_pair_loss_and_grads(
                self.in_vecs[cat_row], self.out_vecs[ctx_row], self.out_vecs[cat_negs]
            )
        if self.on_pair is not None:
            self.on_pair(
                PairEvent(
                    target_vec=self.in_vecs[target_row].copy(),
                    context_vec=self.out_vecs[ctx_row].copy(),
                    negative_vecs=self.out_vecs[negs].copy(),
                    loss_word=loss_w,
                    category_vec=None if cat_row is None else self.in_vecs[cat_row].copy(),
                    category_negative_vecs=None
                    if cat_row is None
                    else self.out_vecs[cat_negs].copy(),
                    loss_category=loss_c,
                )
            )
        self.in_vecs[target_row] -= alpha * g_t
        self.out_vecs[ctx_row] -= alpha * g_c
        np.subtract.at(self.out_vecs, negs, alpha * g_n)
        if cat_row is not None:
            self.in_vecs[cat_row] -= alpha * cg_t
            self.out_vecs[ctx_row] -= alpha * cg_c
            np.subtract.at(self.out_vecs, cat_negs, alpha * cg_n)
        return loss_w, loss_c

    def _run_sentences(
        self,
        rng: np.random.Generator,
        sentence_ids: Sequence[int],
        resolver: Resolver | None,
        progress: list[int],
        total_positions: int,
    ) -> tuple[float, float, int]:
        cfg = self.config
        min_alpha = cfg.learning_rate * cfg.min_lr_fraction
        loss_w_sum = 0.0
        loss_c_sum = 0.0
        n_pairs = 0
        for sid in sentence_ids:
            rows = self.sentences[sid]
            alpha = max(
                min_alpha,
                cfg.learning_rate * (1.0 - progress[0] / max(1, total_positions)),
            )
            progress[0] += len(rows)
            kept = self._subsample(rng, rows)
            tokens = [self.words[r] for r in kept] if resolver is not None else None
            for i, target_row in enumerate(kept):
                cat_row = resolver(tokens, i) if resolver is not None else None
                lo = max(0, i - cfg.window)
                hi = min(len(kept), i + cfg.window + 1)
                for j in range(lo, hi):
                    if j == i:
                        continue
                    lw, lc = self._pair_step(rng, int(target_row), int(kept[j]), cat_row, alpha)
                    loss_w_sum += lw
                    loss_c_sum += lc
                    n_pairs += 1
        return loss_w_sum, loss_c_sum, n_pairs

    def run(self, resolver: Resolver | None = None) -> TrainResult:
        cfg = self.config
        total_positions = cfg.epochs * sum(len(s) for s in self.sentences)
        progress = [0]
        word_losses: list[float] = []
        cat_losses: list[float] = []
        sentence_ids = list(range(len(self.sentences)))
        for _ in range(cfg.epochs):
            if cfg.workers <= 1:
                w_sum, c_sum, n_pairs = self._run_sentences(
                    self.rng, sentence_ids, resolver, progress, total_positions
                )
            else:
                w_sum, c_sum, n_pairs = self._run_epoch_threaded(
                    sentence_ids, resolver, progress, total_positions
                )
            denom = max(1, n_pairs)
            word_losses.append(w_sum / denom)
            cat_losses.append(c_sum / denom)
        store = EmbeddingStore(
            cfg.dim,
            self.words + self.extra_keys,
            self.in_vecs,
            self.out_vecs,
        )
        return TrainResult(
            store=store,
            losses=[w + c for w, c in zip(word_losses, cat_losses)],
            word_losses=word_losses,
            category_losses=cat_losses,
        )

    def _run_epoch_threaded(self, sentence_ids, resolver, progress, total_positions):
        cfg = self.config
        shards = [sentence_ids[w :: cfg.workers] for w in range(cfg.workers)]
        rngs = [np.random.default_rng(s) for s in self._worker_seed.spawn(cfg.workers)]
        results: list[tuple[float, float, int]] = [(0.0, 0.0, 0)] * cfg.workers
        # Lock-free by design: workers update the shared matrices directly
        # and may interleave; only single-worker runs are deterministic.
        def work(w: int) -> None:
            results[w] = self._run_sentences(
                rngs[w], shards[w], resolver, progress, total_positions
            )

        threads = [threading.Thread(target=work, args=(w,)) for w in range(cfg.workers)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        return (
            sum(r[0] for r in results),
            sum(r[1] for r in results),
            sum(r[2] for r in results),
        )


def train_skipgram(
    corpus: Iterable[Sequence[str]], config: TrainConfig
) -> TrainResult:
    """Train word vectors on a corpus of token sequences."""
    engine = SgnsEngine(corpus, config)
    return engine.run()


def save_word2vec_text(store: EmbeddingStore, path: str | Path) -> None:
    """Header line ``count dim`` then one ``key v1 .. vD`` row per key.

    Only input vectors are written; the output matrix is a training
    artifact and does not survive export.
    """
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(f"{len(store)} {store.dim}\n")
        for key in store.keys:
            row = store.vector(key)
            fh.write(key + " " + " ".join(f"{x:.6f}" for x in row) + "\n")


def load_word2vec_text(path: str | Path) -> EmbeddingStore:
    p = Path(path)
    if not p.exists():
        raise NotFound(f"embeddings file not found: {p}")
    with p.open(encoding="utf-8") as fh:
        header = fh.readline()
        parts = header.split()
        if len(parts) != 2:
            raise FormatError("header must be 'count dim'", 1)
        try:
            count, dim = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise FormatError("header must hold two integers", 1) from exc
        keys: list[str] = []
        rows: list[np.ndarray] = []
        for lineno, line in enumerate(fh, 2):
            fields = line.rstrip("\n").split(" ")
            if len(fields) == 1 and fields[0] == "":
                continue
            if len(fields) != dim + 1:
                raise FormatError(
                    f"expected {dim} components, found {len(fields) - 1}", lineno
                )
            try:
                vec = np.array([float(x) for x in fields[1:]], dtype=np.float64)
            except ValueError as exc:
                raise FormatError("non-numeric component", lineno) from exc
            if not np.all(np.isfinite(vec)):
                raise FormatError("non-finite component", lineno)
            keys.append(fields[0])
            rows.append(vec)
    if len(keys) != count:
        raise FormatError(f"header declared {count} rows, found {len(keys)}", 1)
    matrix = np.vstack(rows) if rows else np.zeros((0, dim))
    return EmbeddingStore(dim, keys, matrix)
