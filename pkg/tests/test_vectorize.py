import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from catvec import Document, SparseVector, cosine, fit
from catvec.errors import EmptyCorpus

import oracles
from conftest import CENTROID_WEIGHTS, DOC_WEIGHTS


def doc(doc_id, text):
    return Document(id=doc_id, text=text, tokens=tuple(text.split()))


class TestFit:
    def test_exhaustive_counts(self):
        model = fit([doc("1", "aa bb"), doc("2", "aa")])
        assert model.stats.n_docs == 2
        assert model.stats.df == {"aa": 2, "bb": 1}

    def test_min_count(self):
        model = fit([doc("1", "aa bb"), doc("2", "aa")], min_count=2)
        assert set(model.vocab) == {"aa"}

    def test_table_pattern_vocab(self):
        docs = [
            doc("1", "trump president government"),
            doc("2", "trump prez president government"),
        ]
        model = fit(docs)
        assert set(model.vocab) >= {"trump", "prez", "president", "government"}

    def test_empty_corpus(self):
        with pytest.raises(EmptyCorpus):
            fit([doc("1", "")])

    def test_idf_strictly_positive(self):
        model = fit([doc("1", "aa bb"), doc("2", "aa")])
        # term in every document still gets idf ln(3/3) + 1 = 1
        assert model.idf("aa") == pytest.approx(1.0)
        assert model.idf("bb") > model.idf("aa")

    def test_term_ids_dense_and_sorted(self):
        model = fit([doc("1", "zz aa mm")])
        assert sorted(model.vocab.values()) == list(range(len(model.vocab)))
        assert model.vocab["aa"] < model.vocab["mm"] < model.vocab["zz"]


class TestTransform:
    def unit_idf_model(self):
        # one document: idf(t) = ln(2/2) + 1 = 1 for every term
        return fit([doc("1", "aa bb")])

    def test_raw_tf_definition(self):
        model = self.unit_idf_model()
        vec = model.transform(["aa", "aa", "bb"])
        assert model.to_term_pairs(vec) == [("aa", 2.0), ("bb", 1.0)]

    def test_normalized(self):
        model = fit([doc("1", "aa bb")], normalize=True)
        vec = model.transform(["aa", "aa", "bb"])
        pairs = dict(model.to_term_pairs(vec))
        assert pairs["aa"] == pytest.approx(2 / math.sqrt(5), abs=1e-12)
        assert pairs["bb"] == pytest.approx(1 / math.sqrt(5), abs=1e-12)
        assert vec.norm() == pytest.approx(1.0, abs=1e-9)

    def test_oov_dropped(self):
        model = self.unit_idf_model()
        assert len(model.transform(["zz", "qq"])) == 0

    def test_log_tf(self):
        model = fit([doc("1", "aa bb")], tf_scheme="log")
        vec = model.transform(["aa", "aa", "bb"])
        pairs = dict(model.to_term_pairs(vec))
        assert pairs["aa"] == pytest.approx(1 + math.log(2))
        assert pairs["bb"] == pytest.approx(1.0)

    def test_negative_weight_rejected(self):
        with pytest.raises(ValueError):
            SparseVector.from_pairs([(0, -1.0)])


class TestCosine:
    def test_identity(self):
        v = SparseVector.from_pairs([(0, 1.0), (3, 2.0)])
        assert cosine(v, v) == pytest.approx(1.0, abs=1e-9)

    def test_disjoint(self):
        u = SparseVector.from_pairs([(0, 1.0)])
        v = SparseVector.from_pairs([(1, 1.0)])
        assert cosine(u, v) == 0.0

    def test_zero_norm(self):
        assert cosine(SparseVector.empty(), SparseVector.empty()) == 0.0

    def test_running_example_value(self):
        vocab = {t: i for i, t in enumerate(sorted(set(DOC_WEIGHTS) | set(CENTROID_WEIGHTS)))}
        u = SparseVector.from_pairs([(vocab[t], w) for t, w in DOC_WEIGHTS.items()])
        v = SparseVector.from_pairs([(vocab[t], w) for t, w in CENTROID_WEIGHTS.items()])
        expected = oracles.sparse_cosine(DOC_WEIGHTS, CENTROID_WEIGHTS)
        assert cosine(u, v) == pytest.approx(expected, abs=1e-12)
        assert cosine(u, v) == pytest.approx(0.1998, abs=1e-3)


def random_sparse(rng, dim=50, density=0.3):
    mask = rng.random(dim) < density
    values = rng.random(dim) * mask
    return SparseVector.from_pairs(
        [(i, float(v)) for i, v in enumerate(values) if v > 0]
    )


def to_dense(vec, dim=50):
    out = np.zeros(dim)
    for i, v in vec.items():
        out[i] = v
    return out


class TestSparseMatchesDense:
    def test_random_pairs_match_brute_force(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            u, v = random_sparse(rng), random_sparse(rng)
            du, dv = to_dense(u), to_dense(v)
            assert u.dot(v) == pytest.approx(float(du @ dv), abs=1e-12)
            assert u.norm() == pytest.approx(float(np.linalg.norm(du)), abs=1e-12)
            s = u.add(v)
            np.testing.assert_allclose(to_dense(s), du + dv, atol=1e-12)

    def test_scale_and_normalize(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            u = random_sparse(rng)
            if not u:
                continue
            np.testing.assert_allclose(to_dense(u.scale(2.5)), 2.5 * to_dense(u), atol=1e-12)
            assert u.normalized().norm() == pytest.approx(1.0, abs=1e-9)


@given(st.data())
def test_cosine_scale_invariance(data):
    entries = data.draw(
        st.dictionaries(st.integers(0, 30), st.floats(0.01, 10), min_size=1, max_size=8)
    )
    other = data.draw(
        st.dictionaries(st.integers(0, 30), st.floats(0.01, 10), min_size=1, max_size=8)
    )
    scale = data.draw(st.floats(0.001, 1000))
    u = SparseVector.from_dict(entries)
    v = SparseVector.from_dict(other)
    base = cosine(u, v)
    assert cosine(u.scale(scale), v) == pytest.approx(base, abs=1e-9)
    assert cosine(u, v.scale(scale)) == pytest.approx(base, abs=1e-9)


@given(
    st.dictionaries(st.integers(0, 40), st.floats(0.01, 5), min_size=1, max_size=10)
)
def test_transform_like_vectors_have_positive_entries(entries):
    vec = SparseVector.from_dict(entries)
    assert np.all(vec.values > 0)
    assert list(vec.indices) == sorted(vec.indices)
