import json

import pytest
from hypothesis import given, strategies as st

from catvec import (
    Document,
    TokenizerConfig,
    build_taxonomy,
    load_documents,
    load_taxonomy,
    prune_taxonomy,
    save_documents,
    tokenize,
)
from catvec.errors import (
    DuplicateCategory,
    InvalidTaxonomy,
    MissingParent,
    NotFound,
    ParseError,
)

import oracles


class TestTokenize:
    def test_basic_sentence(self):
        assert tokenize("Trump became prez") == ["trump", "became", "prez"]

    def test_empty(self):
        assert tokenize("") == []

    def test_punctuation_and_digits(self):
        # rule by rule: lowercase, split on non-alphanumeric, drop len < 2
        assert tokenize("US-President, 2017!") == ["us", "president", "2017"]

    def test_min_length_drops_short_tokens(self):
        assert tokenize("a I ox") == ["ox"]

    def test_stopwords(self):
        cfg = TokenizerConfig(stopwords=frozenset({"the"}))
        assert tokenize("the cat", cfg) == ["cat"]

    @given(st.text(max_size=200))
    def test_idempotent_on_own_output(self, text):
        once = tokenize(text)
        assert tokenize(" ".join(once)) == once


class TestLoadTaxonomy:
    def test_minimal_chain(self, tmp_path):
        f = tmp_path / "tax.txt"
        f.write_text("Top\nTop/A\nTop/A/B\n")
        tax = load_taxonomy(f)
        assert len(tax) == 3
        assert tax.root.path == "Top"
        assert tax.category(tax.id_of("Top/A/B")).parent == tax.id_of("Top/A")

    def test_orphan_raises(self, tmp_path):
        f = tmp_path / "tax.txt"
        f.write_text("Top/A\n")
        with pytest.raises(MissingParent):
            load_taxonomy(f)

    def test_thirteen_top_level(self, tmp_path):
        f = tmp_path / "tax.txt"
        lines = ["Top"] + [f"Top/C{i:02d}" for i in range(13)]
        f.write_text("\n".join(lines) + "\n")
        tax = load_taxonomy(f)
        assert len(tax) == 14
        assert len(tax.root.children) == 13

    def test_duplicate_raises(self, tmp_path):
        f = tmp_path / "tax.txt"
        f.write_text("Top\nTop/A\nTop/A\n")
        with pytest.raises(DuplicateCategory):
            load_taxonomy(f)

    def test_comments_and_blanks_skipped(self, tmp_path):
        f = tmp_path / "tax.txt"
        f.write_text("# heading\nTop\n\nTop/A  # trailing\n")
        assert len(load_taxonomy(f)) == 2

    def test_missing_file(self, tmp_path):
        with pytest.raises(NotFound):
            load_taxonomy(tmp_path / "nope.txt")

    def test_two_roots_rejected(self):
        with pytest.raises(InvalidTaxonomy):
            build_taxonomy(["Top", "Other"])

    def test_gap_in_levels_uses_longest_prefix(self):
        tax = build_taxonomy(["Top", "Top/A/B"])
        assert tax.category(tax.id_of("Top/A/B")).parent == tax.id_of("Top")


class TestSubtree:
    def test_chain(self):
        tax = build_taxonomy(["Top", "Top/A", "Top/A/B"])
        ids = tax.subtree(tax.id_of("Top/A"))
        assert [tax.path(i) for i in ids] == ["Top/A", "Top/A/B"]

    def test_leaf_identity(self):
        tax = build_taxonomy(["Top", "Top/A"])
        assert tax.subtree(tax.id_of("Top/A")) == [tax.id_of("Top/A")]

    def test_fourteen_node_tree_matches_prefix_oracle(self):
        paths = ["Top"] + [f"Top/C{i:02d}" for i in range(13)]
        tax = build_taxonomy(paths)
        got = sorted(tax.path(i) for i in tax.subtree(tax.root.id))
        assert got == oracles.subtree_by_prefix(paths, "Top")
        assert len(got) == 14

    def test_unknown_id(self):
        tax = build_taxonomy(["Top"])
        with pytest.raises(NotFound):
            tax.subtree(99)

    def test_children_partition_subtree(self):
        paths = ["Top", "Top/A", "Top/A/X", "Top/B", "Top/B/Y", "Top/B/Y/Z"]
        tax = build_taxonomy(paths)
        root = tax.root
        union = {root.id}
        for child in root.children:
            part = tax.subtree(child)
            assert not (union & set(part))
            union |= set(part)
        assert union == set(tax.subtree(root.id))


class TestLoadDocuments:
    def _tax(self):
        return build_taxonomy(
            ["Top", "Top/Society", "Top/Society/Government",
             "Top/Society/Government/President"]
        )

    def test_label_resolution_and_tokens(self, tmp_path):
        f = tmp_path / "docs.jsonl"
        f.write_text(json.dumps({
            "id": "d1", "text": "Trump became prez",
            "label": "Top/Society/Government/President",
        }) + "\n")
        docs, report = load_documents(f, self._tax())
        assert report.accepted == 1
        assert docs[0].tokens == ("trump", "became", "prez")
        assert docs[0].label == self._tax().id_of("Top/Society/Government/President")

    def test_bad_label_rejected_and_reported(self, tmp_path):
        f = tmp_path / "docs.jsonl"
        f.write_text(json.dumps({"id": "d1", "text": "x", "label": "Top/Nonexistent"}) + "\n")
        docs, report = load_documents(f, self._tax())
        assert docs == []
        assert report.rejected == 1
        assert report.rejected_labels == ["Top/Nonexistent"]

    def test_empty_text_flagged(self, tmp_path):
        f = tmp_path / "docs.jsonl"
        f.write_text(json.dumps({"id": "d1", "text": ""}) + "\n")
        docs, report = load_documents(f, self._tax())
        assert docs[0].tokens == ()
        assert report.empty_text_ids == ["d1"]

    def test_malformed_record_has_line_number(self, tmp_path):
        f = tmp_path / "docs.jsonl"
        f.write_text('{"id": "d1", "text": "ok"}\nnot json\n')
        with pytest.raises(ParseError) as err:
            load_documents(f, self._tax())
        assert err.value.line == 2

    def test_round_trip_preserves_tokens(self, tmp_path):
        tax = self._tax()
        f = tmp_path / "docs.jsonl"
        f.write_text(
            json.dumps({"id": "d1", "text": "Trump became PREZ!",
                        "label": "Top/Society"}) + "\n"
            + json.dumps({"id": "d2", "text": "hello world"}) + "\n"
        )
        docs, _ = load_documents(f, tax)
        out = tmp_path / "again.jsonl"
        save_documents(docs, out, tax)
        docs2, _ = load_documents(out, tax)
        assert [d.tokens for d in docs2] == [d.tokens for d in docs]
        assert [d.label for d in docs2] == [d.label for d in docs]


class TestPrune:
    def test_min_docs_filter(self):
        tax = build_taxonomy(["Top", "Top/A", "Top/B"])
        docs = [
            Document(id="1", text="x", tokens=("x",), label=tax.id_of("Top/A")),
            Document(id="2", text="y", tokens=("y",), label=tax.id_of("Top/A")),
            Document(id="3", text="z", tokens=("z",), label=tax.id_of("Top/B")),
        ]
        pruned, kept = prune_taxonomy(tax, docs, min_docs=2)
        assert pruned.id_of("Top/B") is None
        assert pruned.id_of("Top/A") is not None
        assert {d.id for d in kept} == {"1", "2"}

    def test_ancestors_survive_via_subtree_counts(self):
        tax = build_taxonomy(["Top", "Top/A", "Top/A/B"])
        docs = [
            Document(id=str(i), text="x", tokens=("x",), label=tax.id_of("Top/A/B"))
            for i in range(3)
        ]
        pruned, kept = prune_taxonomy(tax, docs, min_docs=3)
        assert len(pruned) == 3
        assert len(kept) == 3

    def test_zero_keeps_everything(self):
        tax = build_taxonomy(["Top", "Top/A"])
        pruned, kept = prune_taxonomy(tax, [], min_docs=0)
        assert len(pruned) == 2
