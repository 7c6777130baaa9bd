import numpy as np
import pytest

from catvec import (
    AblationBundle,
    CentroidModel,
    Document,
    EmbeddingStore,
    Measure,
    RelevanceJudgments,
    SimilarityConfig,
    ablation_run,
    evaluate_macro,
    fit,
    format_table,
    precision_at_k,
)
from catvec.errors import EmptyEval, IdMismatch

import oracles


class TestEvaluateMacro:
    def test_perfect_predictions(self):
        gold = {"d1": "A", "d2": "B", "d3": "C"}
        report = evaluate_macro(dict(gold), gold)
        assert report.macro_precision == 1.0
        assert report.macro_recall == 1.0
        assert report.macro_f1 == 1.0

    def test_hand_confusion_fixture(self):
        # A: P=1.0 R=0.5; B: P=0.5 R=1.0  ->  macro P = R = 0.75, F1 = 2/3
        gold = {"d1": "A", "d2": "A", "d3": "B"}
        preds = {"d1": "A", "d2": "B", "d3": "B"}
        report = evaluate_macro(preds, gold)
        assert report.per_category["A"] == (1, 0, 1)
        assert report.per_category["B"] == (1, 1, 0)
        assert report.macro_precision == pytest.approx(0.75)
        assert report.macro_recall == pytest.approx(0.75)
        assert report.macro_f1 == pytest.approx(2 / 3)
        assert (report.macro_precision, report.macro_recall, report.macro_f1) == (
            pytest.approx(oracles.macro_scores(preds, gold))
        )

    def test_all_wrong(self):
        gold = {"d1": "A", "d2": "B"}
        preds = {"d1": "B", "d2": "A"}
        assert evaluate_macro(preds, gold).macro_f1 == 0.0

    def test_empty_predictions_raise(self):
        with pytest.raises(EmptyEval):
            evaluate_macro({}, {"d1": "A"})

    def test_missing_gold_raises_with_ids(self):
        with pytest.raises(IdMismatch) as err:
            evaluate_macro({"d1": "A", "dx": "A"}, {"d1": "A"})
        assert err.value.missing_ids == ["dx"]

    def test_permutation_invariance(self):
        rng = np.random.default_rng(41)
        docs = [f"d{i}" for i in range(60)]
        gold = {d: f"C{rng.integers(4)}" for d in docs}
        preds = {d: f"C{rng.integers(4)}" for d in docs}
        base = evaluate_macro(preds, gold)
        shuffled = dict(reversed(list(preds.items())))
        again = evaluate_macro(shuffled, gold)
        assert again.macro_f1 == base.macro_f1
        assert again.per_category == base.per_category

    def test_metrics_lie_in_unit_interval(self):
        rng = np.random.default_rng(42)
        for _ in range(50):
            docs = [f"d{i}" for i in range(rng.integers(1, 30))]
            gold = {d: f"C{rng.integers(5)}" for d in docs}
            preds = {d: f"C{rng.integers(5)}" for d in docs}
            report = evaluate_macro(preds, gold)
            for value in (report.macro_precision, report.macro_recall, report.macro_f1):
                assert 0.0 <= value <= 1.0

    def test_uniform_random_predictor_approaches_one_over_c(self):
        # statistical smoke: mean macro F1 over replicates near 1/C
        C, per_cat, reps = 4, 250, 30
        rng = np.random.default_rng(43)
        cats = [f"C{i}" for i in range(C)]
        gold = {f"d{i}": cats[i % C] for i in range(C * per_cat)}
        scores = []
        for _ in range(reps):
            preds = {d: cats[rng.integers(C)] for d in gold}
            scores.append(evaluate_macro(preds, gold).macro_f1)
        mean = float(np.mean(scores))
        sem = float(np.std(scores, ddof=1)) / np.sqrt(reps)
        assert abs(mean - 1 / C) <= 3 * sem


class TestPrecisionAtK:
    def judgments(self, mapping, binary=False):
        gains = dict({"relevant": 1.0, "somewhat": 0.0 if binary else 0.5, "not": 0.0})
        return RelevanceJudgments(grades=mapping, gains=gains)

    def test_binary_direct_count(self):
        j = self.judgments({("d1", "A"): "relevant", ("d1", "B"): "not",
                            ("d1", "C"): "relevant"}, binary=True)
        p, unjudged = precision_at_k({"d1": ["A", "B", "C"]}, j, [3])
        assert p[3] == pytest.approx(2 / 3)
        assert unjudged == []

    def test_all_relevant_is_one(self):
        grades = {(f"d{i}", c): "relevant" for i in range(3) for c in "ABC"}
        j = self.judgments(grades)
        rankings = {f"d{i}": ["A", "B", "C"] for i in range(3)}
        p, _ = precision_at_k(rankings, j, [1, 2, 3])
        assert all(v == pytest.approx(1.0) for v in p.values())

    def test_graded_gains(self):
        j = self.judgments({("d1", "A"): "relevant", ("d1", "B"): "somewhat",
                            ("d1", "C"): "not"})
        p, _ = precision_at_k({"d1": ["A", "B", "C"]}, j, [3])
        assert p[3] == pytest.approx(0.5)  # (1 + 0.5 + 0) / 3

    def test_unjudged_pairs_audited_and_scored_zero(self):
        j = self.judgments({("d1", "A"): "relevant"})
        p, unjudged = precision_at_k({"d1": ["A", "X"]}, j, [2])
        assert p[2] == pytest.approx(0.5)
        assert unjudged == [("d1", "X")]

    def test_short_rankings_pad_as_not_relevant(self):
        j = self.judgments({("d1", "A"): "relevant"})
        p, _ = precision_at_k({"d1": ["A"]}, j, [3])
        assert p[3] == pytest.approx(1 / 3)

    def test_binary_cumulative_gain_nondecreasing(self):
        rng = np.random.default_rng(44)
        grades = {}
        rankings = {}
        for i in range(20):
            paths = [f"C{j}" for j in range(6)]
            rankings[f"d{i}"] = paths
            for path in paths:
                grades[(f"d{i}", path)] = "relevant" if rng.random() < 0.4 else "not"
        j = self.judgments(grades, binary=True)
        ks = [1, 2, 3, 4, 5, 6]
        p, _ = precision_at_k(rankings, j, ks)
        cumulative = [p[k] * k for k in ks]
        assert all(b >= a - 1e-12 for a, b in zip(cumulative, cumulative[1:]))

    def test_empty_rankings_raise(self):
        with pytest.raises(EmptyEval):
            precision_at_k({}, self.judgments({}), [1])

    def test_grade_validation(self):
        with pytest.raises(ValueError):
            RelevanceJudgments(grades={("d", "A"): "maybe"})

    def test_load_jsonl(self, tmp_path):
        f = tmp_path / "judg.jsonl"
        f.write_text(
            '{"doc_id": "d1", "path": "A", "grade": "relevant"}\n'
            '{"doc_id": "d1", "path": "B", "grade": "somewhat"}\n'
        )
        j = RelevanceJudgments.load(f)
        assert j.grades[("d1", "A")] == "relevant"
        assert j.gains["somewhat"] == 0.5
        assert RelevanceJudgments.load(f, binary=True).gains["somewhat"] == 0.0


def synonym_bundle():
    """Training words literal, test docs synonym-swapped.

    Two categories with disjoint vocabularies; each test document uses
    the synonym of its category's word plus one literal word from the
    other category, so the identity-only measure picks the wrong one.
    """
    tfidf = fit([Document("f", "", ("alpha", "alphaish", "beta", "betaish"))])
    model = CentroidModel(
        paths={0: "Top/A", 1: "Top/B"},
        centroids={
            0: tfidf.from_term_pairs([("alpha", 1.0)]),
            1: tfidf.from_term_pairs([("beta", 1.0)]),
        },
        merged=True,
    )
    store = EmbeddingStore.from_vectors({
        "alpha": [1.0, 0.0, 0.0],
        "alphaish": [0.8, 0.6, 0.0],
        "beta": [0.0, 0.0, 1.0],
        "betaish": [0.0, 0.6, 0.8],
    })
    catvecs = {0: np.array([1.0, 0.0, 0.0]), 1: np.array([0.0, 0.0, 1.0])}
    docs = []
    for i in range(5):
        docs.append(Document(
            id=f"a{i}", text="", tokens=("alphaish", "alphaish", "beta"), label=0
        ))
        docs.append(Document(
            id=f"b{i}", text="", tokens=("betaish", "betaish", "alpha"), label=1
        ))
    return AblationBundle(
        centroids=model, tfidf=tfidf, store=store, catvecs=catvecs, docs=docs
    )


class TestAblationRun:
    def test_rows_match_standalone_runs(self):
        bundle = synonym_bundle()
        measures = [
            SimilarityConfig(measure=Measure.DIRAC),
            SimilarityConfig(measure=Measure.WORD),
        ]
        rows = ablation_run(bundle, measures)
        assert len(rows) == 2
        assert rows[0].label == "dirac"
        # identity-only matching follows the planted literal word: all wrong
        assert rows[0].report.macro_f1 == 0.0
        # synonym matching recovers every label
        assert rows[1].report.macro_f1 == 1.0

    def test_word_level_strictly_improves_on_fixture(self):
        bundle = synonym_bundle()
        rows = ablation_run(bundle, [
            SimilarityConfig(measure=Measure.DIRAC),
            SimilarityConfig(measure=Measure.WORD),
            SimilarityConfig(measure=Measure.CATEGORY_WORD),
        ])
        f1 = {row.label: row.report.macro_f1 for row in rows}
        assert f1["dirac"] < f1["word(theta=0.6)"]
        assert f1["word(theta=0.6)"] <= f1["catword(theta=0.6,alpha=0.9)"]

    def test_empty_measures_raise(self):
        with pytest.raises(EmptyEval):
            ablation_run(synonym_bundle(), [])

    def test_table_formatting(self):
        bundle = synonym_bundle()
        rows = ablation_run(bundle, [SimilarityConfig(measure=Measure.DIRAC)])
        table = format_table(rows)
        assert "measure" in table and "dirac" in table
        assert "0.0000" in table
