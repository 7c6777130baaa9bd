"""Command-line pipeline: build, train, gen-catvecs, classify, evaluate.

Every command resolves its parameters from defaults, then an optional
``--config`` JSON file, then explicit flags, and writes the resolved
values next to its outputs so any run can be reproduced byte for byte.

Exit codes: 0 ok, 2 input loading, 3 empty corpus, 4 inconsistent
artifacts or parameters, 5 unmatched document ids.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import centroids as centroids_mod
from . import evaluation
from .category_embedding import build_candidate_index, train_category_embedding
from .category_vectors import all_category_vectors
from .corpus import (
    TokenizerConfig,
    load_documents,
    load_taxonomy,
    prune_taxonomy,
)
from .embeddings import (
    EmbeddingStore,
    TrainConfig,
    category_key,
    load_word2vec_text,
    save_word2vec_text,
    train_skipgram,
)
from .errors import (
    CatvecError,
    ConfigError,
    EmptyCorpus,
    EmptyEval,
    FormatError,
    IdMismatch,
    NotFound,
    ParseError,
    TaxonomyError,
)
from .similarity import Measure, SimilarityClassifier, SimilarityConfig
from .vectorize import TfIdfModel, fit

EXIT_LOAD = 2
EXIT_EMPTY = 3
EXIT_CONFIG = 4
EXIT_IDS = 5


def _resolved(args: argparse.Namespace, keys: list[str]) -> dict:
    """Merge config-file values under explicit flags; None means unset."""
    file_values = {}
    if getattr(args, "config", None):
        file_values = json.loads(Path(args.config).read_text(encoding="utf-8"))
    out = {}
    for key in keys:
        flag = getattr(args, key, None)
        if flag is not None:
            out[key] = flag
        elif key in file_values:
            out[key] = file_values[key]
        else:
            out[key] = None
    return out


def _fill_defaults(values: dict, defaults: dict) -> dict:
    return {k: (defaults[k] if v is None and k in defaults else v) for k, v in values.items()}


def _write_config(out_dir: Path, values: dict) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config.json").write_text(
        json.dumps(values, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def _tokenizer(values: dict) -> TokenizerConfig:
    stopwords: frozenset[str] = frozenset()
    if values.get("stopwords"):
        lines = Path(values["stopwords"]).read_text(encoding="utf-8").splitlines()
        stopwords = frozenset(w.strip().lower() for w in lines if w.strip())
    return TokenizerConfig(min_length=int(values["min_token_length"]), stopwords=stopwords)


def _load_corpus(values: dict):
    taxonomy = load_taxonomy(values["taxonomy"])
    docs, report = load_documents(values["docs"], taxonomy, _tokenizer(values))
    print(report.summary(), file=sys.stderr)
    min_docs = int(values.get("min_docs") or 0)
    if min_docs > 0:
        taxonomy, docs = prune_taxonomy(taxonomy, docs, min_docs)
    return taxonomy, docs


BUILD_KEYS = [
    "taxonomy", "docs", "out", "min_docs", "merge_lambda", "min_count",
    "tf_scheme", "stopwords", "min_token_length",
]
BUILD_DEFAULTS = {
    "min_docs": 0, "merge_lambda": centroids_mod.DEFAULT_MERGE_LAMBDA,
    "min_count": 1, "tf_scheme": "raw", "min_token_length": 2,
}


def cmd_build(args: argparse.Namespace) -> int:
    values = _fill_defaults(_resolved(args, BUILD_KEYS), BUILD_DEFAULTS)
    if not values["taxonomy"] or not values["docs"] or not values["out"]:
        raise ConfigError("build requires --taxonomy, --docs, and --out")
    taxonomy, docs = _load_corpus(values)
    tfidf = fit(docs, min_count=int(values["min_count"]), tf_scheme=values["tf_scheme"])
    model = centroids_mod.build_centroids(
        taxonomy, docs, tfidf, merge_lambda=float(values["merge_lambda"])
    )
    merged = centroids_mod.merge_descendants(model, taxonomy)
    out_dir = Path(values["out"])
    _write_config(out_dir, values)
    tfidf.save(out_dir / "tfidf.json")
    merged.save(out_dir / "centroids.jsonl", tfidf)
    (out_dir / "taxonomy.txt").write_text(
        "".join(c.path + "\n" for c in taxonomy), encoding="utf-8"
    )
    labeled = sum(1 for d in docs if d.label is not None)
    with_docs = len({d.label for d in docs if d.label is not None})
    print(json.dumps({
        "categories": len(taxonomy),
        "categories_with_documents": with_docs,
        "documents": labeled,
        "vocabulary": len(tfidf.vocab),
        "nonzero_centroids": len(merged.nonzero_ids()),
    }, sort_keys=True))
    return 0


TRAIN_KEYS = [
    "docs", "out", "mode", "model_dir", "init_embeddings", "candidates",
    "dim", "window", "negatives", "epochs", "learning_rate", "min_count",
    "subsample", "seed", "workers", "stopwords", "min_token_length",
]
TRAIN_DEFAULTS = {
    "mode": "plain", "candidates": 3, "dim": 300, "window": 5, "negatives": 15,
    "epochs": 5, "learning_rate": 0.025, "min_count": 1, "subsample": 0.0,
    "seed": 1, "workers": 1, "min_token_length": 2,
}


def cmd_train(args: argparse.Namespace) -> int:
    values = _fill_defaults(_resolved(args, TRAIN_KEYS), TRAIN_DEFAULTS)
    if not values["docs"] or not values["out"]:
        raise ConfigError("train requires --docs and --out")
    docs, report = load_documents(values["docs"], None, _tokenizer(values))
    print(report.summary(), file=sys.stderr)
    corpus = [list(d.tokens) for d in docs]
    config = TrainConfig(
        dim=int(values["dim"]), window=int(values["window"]),
        negatives=int(values["negatives"]), epochs=int(values["epochs"]),
        learning_rate=float(values["learning_rate"]),
        min_count=int(values["min_count"]), subsample=float(values["subsample"]),
        seed=int(values["seed"]), workers=int(values["workers"]),
    )
    if values["mode"] == "category":
        if not values["model_dir"]:
            raise ConfigError("train --mode category requires --model-dir")
        model_dir = Path(values["model_dir"])
        tfidf = TfIdfModel.load(model_dir / "tfidf.json")
        taxonomy = load_taxonomy(model_dir / "taxonomy.txt")
        model = centroids_mod.CentroidModel.load(
            model_dir / "centroids.jsonl", taxonomy, tfidf
        )
        index = build_candidate_index(model, tfidf, m=int(values["candidates"]))
        store = (
            load_word2vec_text(values["init_embeddings"])
            if values["init_embeddings"]
            else None
        )
        result = train_category_embedding(corpus, index, model, tfidf, store, config)
    elif values["mode"] == "plain":
        result = train_skipgram(corpus, config)
    else:
        raise ConfigError(f"unknown training mode {values['mode']!r}")
    out_dir = Path(values["out"])
    _write_config(out_dir, values)
    save_word2vec_text(result.store, out_dir / "embeddings.txt")
    log = [
        {
            "epoch": i + 1,
            "loss": result.losses[i],
            "word_loss": result.word_losses[i],
            "category_loss": result.category_losses[i],
        }
        for i in range(len(result.losses))
    ]
    (out_dir / "train_log.json").write_text(
        json.dumps(log, indent=2) + "\n", encoding="utf-8"
    )
    print(json.dumps({"vectors": len(result.store), "epochs": len(log)}, sort_keys=True))
    return 0


GEN_KEYS = ["model_dir", "embeddings", "out"]


def cmd_gen_catvecs(args: argparse.Namespace) -> int:
    values = _resolved(args, GEN_KEYS)
    if not values["model_dir"] or not values["embeddings"] or not values["out"]:
        raise ConfigError("gen-catvecs requires --model-dir, --embeddings, and --out")
    model_dir = Path(values["model_dir"])
    tfidf = TfIdfModel.load(model_dir / "tfidf.json")
    taxonomy = load_taxonomy(model_dir / "taxonomy.txt")
    model = centroids_mod.CentroidModel.load(model_dir / "centroids.jsonl", taxonomy, tfidf)
    store = load_word2vec_text(values["embeddings"])
    composed = all_category_vectors(model, store, tfidf)
    extra = {category_key(model.paths[cid]): cv.vector for cid, cv in composed.items()}
    out_dir = Path(values["out"])
    _write_config(out_dir, values)
    save_word2vec_text(store.with_vectors(extra), out_dir / "catvecs.txt")
    oov = {
        model.paths[cid]: {
            "skipped_mass": cv.skipped_mass,
            "skipped_terms": len(cv.skipped_terms),
            "zero": cv.is_zero,
        }
        for cid, cv in sorted(composed.items(), key=lambda kv: model.paths[kv[0]])
    }
    (out_dir / "oov_report.json").write_text(
        json.dumps(oov, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    print(json.dumps({"categories": len(extra)}, sort_keys=True))
    return 0


CLASSIFY_KEYS = [
    "model_dir", "docs", "embeddings", "measure", "theta", "alpha", "k",
    "out", "stopwords", "min_token_length",
]
CLASSIFY_DEFAULTS = {
    "measure": "word", "theta": 0.6, "alpha": 0.9, "k": 5, "min_token_length": 2,
}


def cmd_classify(args: argparse.Namespace) -> int:
    values = _fill_defaults(_resolved(args, CLASSIFY_KEYS), CLASSIFY_DEFAULTS)
    if not values["model_dir"] or not values["docs"]:
        raise ConfigError("classify requires --model-dir and --docs")
    model_dir = Path(values["model_dir"])
    tfidf = TfIdfModel.load(model_dir / "tfidf.json")
    taxonomy = load_taxonomy(model_dir / "taxonomy.txt")
    model = centroids_mod.CentroidModel.load(model_dir / "centroids.jsonl", taxonomy, tfidf)
    config = SimilarityConfig(
        measure=Measure(values["measure"]),
        theta=float(values["theta"]),
        alpha=float(values["alpha"]),
    )
    store = None
    catvecs = None
    if config.measure is not Measure.DIRAC:
        if not values["embeddings"]:
            raise ConfigError(f"measure {config.measure.value} requires --embeddings")
        store = load_word2vec_text(values["embeddings"])
    if config.measure in (Measure.CATEGORY_WORD, Measure.DENSE):
        catvecs = {}
        for cid, path in model.paths.items():
            vec = store.vector(category_key(path))
            catvecs[cid] = vec if vec is not None else np.zeros(store.dim)
    classifier = SimilarityClassifier(
        model, tfidf, store=store, catvecs=catvecs, config=config
    )
    docs, report = load_documents(values["docs"], taxonomy, _tokenizer(values))
    print(report.summary(), file=sys.stderr)
    k = int(values["k"])
    lines = [json.dumps({
        "measure": config.measure.value,
        "theta": config.theta,
        "alpha": config.alpha,
        "k": k,
    }, sort_keys=True)]
    for doc in docs:
        ranking = classifier.classify(doc, k)
        lines.append(json.dumps({
            "doc_id": doc.id,
            "ranking": [
                {"path": model.paths[cid], "score": round(score, 6)}
                for cid, score in ranking
            ],
        }, ensure_ascii=False))
    text = "\n".join(lines) + "\n"
    if values["out"]:
        out_path = Path(values["out"])
        out_path.parent.mkdir(parents=True, exist_ok=True)
        out_path.write_text(text, encoding="utf-8")
        _write_config(out_path.parent, values)
    else:
        sys.stdout.write(text)
    return 0


EVAL_KEYS = ["rankings", "gold", "judgments", "ks", "binary_gains", "out"]
EVAL_DEFAULTS = {"ks": "1,3,5", "binary_gains": False}


def _read_rankings(path: str) -> dict[str, list[str]]:
    rankings: dict[str, list[str]] = {}
    with Path(path).open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            record = json.loads(line)
            if "doc_id" not in record:
                continue  # header line
            rankings[str(record["doc_id"])] = [r["path"] for r in record["ranking"]]
    return rankings


def cmd_evaluate(args: argparse.Namespace) -> int:
    values = _fill_defaults(_resolved(args, EVAL_KEYS), EVAL_DEFAULTS)
    if not values["rankings"] or not values["out"]:
        raise ConfigError("evaluate requires --rankings and --out")
    if not values["gold"] and not values["judgments"]:
        raise ConfigError("evaluate requires --gold or --judgments")
    rankings = _read_rankings(values["rankings"])
    if not rankings:
        raise EmptyEval("rankings file holds no documents")
    out_dir = Path(values["out"])
    report: evaluation.EvalReport
    if values["gold"]:
        gold = {}
        with Path(values["gold"]).open(encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                record = json.loads(line)
                if record.get("label"):
                    gold[str(record["id"])] = record["label"]
        predictions = {
            doc_id: ranked[0] for doc_id, ranked in rankings.items() if ranked
        }
        report = evaluation.evaluate_macro(predictions, gold)
    else:
        judgments = evaluation.RelevanceJudgments.load(
            values["judgments"], binary=bool(values["binary_gains"])
        )
        ks = [int(x) for x in str(values["ks"]).split(",") if x]
        p_at_k, unjudged = evaluation.precision_at_k(rankings, judgments, ks)
        report = evaluation.EvalReport(
            per_category={}, macro_precision=0.0, macro_recall=0.0,
            macro_f1=0.0, p_at_k=p_at_k,
        )
        if unjudged:
            print(f"{len(unjudged)} unjudged (doc, category) pairs", file=sys.stderr)
    _write_config(out_dir, values)
    (out_dir / "report.json").write_text(
        json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    if values["gold"]:
        table = (
            f"macro_precision  {report.macro_precision:.4f}\n"
            f"macro_recall     {report.macro_recall:.4f}\n"
            f"macro_f1         {report.macro_f1:.4f}\n"
        )
    else:
        table = "".join(f"P@{k}  {v:.4f}\n" for k, v in sorted(report.p_at_k.items()))
    (out_dir / "report.txt").write_text(table, encoding="utf-8")
    sys.stdout.write(table)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="catvec",
        description="Taxonomy text classification with centroid and embedding models",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON file with defaults for any flag")
        p.add_argument("--stopwords", help="optional stopword list, one per line")
        p.add_argument("--min-token-length", type=int, dest="min_token_length")

    p = sub.add_parser("build", help="fit tf-idf and merged centroids")
    add_common(p)
    p.add_argument("--taxonomy")
    p.add_argument("--docs")
    p.add_argument("--out")
    p.add_argument("--min-docs", type=int, dest="min_docs")
    p.add_argument("--merge-lambda", type=float, dest="merge_lambda")
    p.add_argument("--min-count", type=int, dest="min_count")
    p.add_argument("--tf-scheme", choices=["raw", "log"], dest="tf_scheme")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("train", help="train word (and category) embeddings")
    add_common(p)
    p.add_argument("--docs")
    p.add_argument("--out")
    p.add_argument("--mode", choices=["plain", "category"])
    p.add_argument("--model-dir", dest="model_dir")
    p.add_argument("--init-embeddings", dest="init_embeddings")
    p.add_argument("--candidates", type=int)
    p.add_argument("--dim", type=int)
    p.add_argument("--window", type=int)
    p.add_argument("--negatives", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float, dest="learning_rate")
    p.add_argument("--min-count", type=int, dest="min_count")
    p.add_argument("--subsample", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("gen-catvecs", help="compose category vectors into a store")
    add_common(p)
    p.add_argument("--model-dir", dest="model_dir")
    p.add_argument("--embeddings")
    p.add_argument("--out")
    p.set_defaults(func=cmd_gen_catvecs)

    p = sub.add_parser("classify", help="rank categories for documents")
    add_common(p)
    p.add_argument("--model-dir", dest="model_dir")
    p.add_argument("--docs")
    p.add_argument("--embeddings")
    p.add_argument("--measure", choices=[m.value for m in Measure])
    p.add_argument("--theta", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("evaluate", help="score rankings against gold or judgments")
    add_common(p)
    p.add_argument("--rankings")
    p.add_argument("--gold")
    p.add_argument("--judgments")
    p.add_argument("--ks")
    p.add_argument("--binary-gains", action="store_const", const=True, dest="binary_gains")
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (NotFound, ParseError, TaxonomyError, FormatError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LOAD
    except (EmptyCorpus, EmptyEval) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IdMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IDS
    except CatvecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
