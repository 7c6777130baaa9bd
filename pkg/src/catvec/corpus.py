"""Taxonomy and document ingestion.

The taxonomy file lists one slash-delimited category path per line
(``#`` starts a comment).  A category's parent is the longest declared
proper prefix of its path, so intermediate levels may be skipped.
Documents arrive as JSON-lines records ``{id, text, label?}``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

from .errors import (
    DuplicateCategory,
    InvalidTaxonomy,
    MissingParent,
    NotFound,
    ParseError,
)

_TOKEN_RE = re.compile(r"[a-z0-9]+")


@dataclass(frozen=True)
class TokenizerConfig:
    """Rules for turning raw text into tokens.

    Lowercase, split on non-alphanumeric runs, drop tokens shorter than
    ``min_length``, then drop stopwords.
    """

    min_length: int = 2
    stopwords: frozenset[str] = frozenset()

    def to_dict(self) -> dict:
        return {"min_length": self.min_length, "stopwords": sorted(self.stopwords)}

    @classmethod
    def from_dict(cls, data: dict) -> "TokenizerConfig":
        return cls(
            min_length=int(data.get("min_length", 2)),
            stopwords=frozenset(data.get("stopwords", ())),
        )


def tokenize(text: str, config: TokenizerConfig = TokenizerConfig()) -> list[str]:
    """Tokenize ``text``; empty output is allowed."""
    tokens = _TOKEN_RE.findall(text.lower())
    return [
        t for t in tokens if len(t) >= config.min_length and t not in config.stopwords
    ]


@dataclass(frozen=True)
class Category:
    id: int
    path: str
    parent: int | None
    children: tuple[int, ...]

    @property
    def name(self) -> str:
        return self.path.rsplit("/", 1)[-1]


@dataclass(frozen=True)
class Document:
    id: str
    text: str
    tokens: tuple[str, ...]
    label: int | None = None


class Taxonomy:
    """A rooted category tree with id and path lookups."""

    def __init__(self, categories: Sequence[Category]):
        self._categories = list(categories)
        self._by_path = {c.path: c.id for c in self._categories}
        if len(self._by_path) != len(self._categories):
            raise DuplicateCategory("duplicate category path")
        self._validate()

    def _validate(self) -> None:
        for pos, cat in enumerate(self._categories):
            if cat.id != pos:
                raise InvalidTaxonomy("category ids must be dense and positional")
        roots = [c for c in self._categories if c.parent is None]
        if len(self._categories) and len(roots) != 1:
            raise InvalidTaxonomy(f"expected exactly one root, found {len(roots)}")
        # Parent paths must be strict prefixes, which also rules out cycles:
        # any parent chain strictly shortens the path.
        for cat in self._categories:
            if cat.parent is None:
                continue
            parent = self._categories[cat.parent]
            if not cat.path.startswith(parent.path + "/"):
                raise InvalidTaxonomy(
                    f"parent path {parent.path!r} is not a prefix of {cat.path!r}"
                )

    def __len__(self) -> int:
        return len(self._categories)

    def __iter__(self):
        return iter(self._categories)

    @property
    def root(self) -> Category:
        return next(c for c in self._categories if c.parent is None)

    def category(self, cat_id: int) -> Category:
        if not 0 <= cat_id < len(self._categories):
            raise NotFound(f"no category with id {cat_id}")
        return self._categories[cat_id]

    def path(self, cat_id: int) -> str:
        return self.category(cat_id).path

    def id_of(self, path: str) -> int | None:
        return self._by_path.get(path)

    def subtree(self, root_id: int) -> list[int]:
        """Root plus all descendants, depth-first, children in path order."""
        root = self.category(root_id)
        out: list[int] = []
        stack = [root.id]
        while stack:
            cid = stack.pop()
            out.append(cid)
            kids = sorted(self._categories[cid].children, key=self.path)
            stack.extend(reversed(kids))
        return out

    def postorder(self) -> list[int]:
        """Every category id, children before parents."""
        order = self.subtree(self.root.id)
        return list(reversed(order))


def _strip_comments(line: str) -> str:
    pos = line.find("#")
    return line if pos < 0 else line[:pos]


def load_taxonomy(path: str | Path) -> Taxonomy:
    """Read a taxonomy file, inferring each parent by longest declared prefix."""
    p = Path(path)
    if not p.exists():
        raise NotFound(f"taxonomy file not found: {p}")
    paths: list[str] = []
    declared: set[str] = set()
    for lineno, raw in enumerate(p.read_text(encoding="utf-8").splitlines(), 1):
        line = _strip_comments(raw).strip()
        if not line:
            continue
        if line in declared:
            raise DuplicateCategory(f"line {lineno}: duplicate category {line!r}")
        declared.add(line)
        paths.append(line)
    return build_taxonomy(paths)


def build_taxonomy(paths: Sequence[str]) -> Taxonomy:
    """Assemble a taxonomy from category paths, in declaration order."""
    declared = set(paths)
    if len(declared) != len(paths):
        raise DuplicateCategory("duplicate category path")
    ids = {path: i for i, path in enumerate(paths)}
    parents: list[int | None] = []
    children: dict[int, list[int]] = {i: [] for i in range(len(paths))}
    for path in paths:
        segments = path.split("/")
        parent = None
        for cut in range(len(segments) - 1, 0, -1):
            prefix = "/".join(segments[:cut])
            if prefix in declared:
                parent = ids[prefix]
                break
        if parent is None and len(segments) > 1:
            raise MissingParent(f"no ancestor declared for {path!r}")
        parents.append(parent)
        if parent is not None:
            children[parent].append(ids[path])
    cats = [
        Category(id=i, path=path, parent=parents[i], children=tuple(children[i]))
        for i, path in enumerate(paths)
    ]
    return Taxonomy(cats)


@dataclass
class LoadReport:
    """Outcome counters for a document load."""

    accepted: int = 0
    rejected: int = 0
    rejected_labels: list[str] = field(default_factory=list)
    empty_text_ids: list[str] = field(default_factory=list)

    def summary(self) -> str:
        return (
            f"accepted {self.accepted} documents, rejected {self.rejected}"
            f" ({len(self.empty_text_ids)} with empty text)"
        )


def load_documents(
    path: str | Path,
    taxonomy: Taxonomy | None = None,
    tokenizer: TokenizerConfig = TokenizerConfig(),
) -> tuple[list[Document], LoadReport]:
    """Read JSON-lines documents, resolving label paths against ``taxonomy``.

    Records whose label path is not in the taxonomy are rejected and
    counted in the report.  Empty-text documents are accepted but flagged.
    """
    p = Path(path)
    if not p.exists():
        raise NotFound(f"documents file not found: {p}")
    docs: list[Document] = []
    report = LoadReport()
    with p.open(encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON ({exc.msg})", lineno) from exc
            if not isinstance(record, dict) or "id" not in record or "text" not in record:
                raise ParseError("record must carry 'id' and 'text'", lineno)
            doc_id = str(record["id"])
            text = str(record["text"])
            label = None
            if record.get("label") is not None:
                label_path = str(record["label"])
                label = taxonomy.id_of(label_path) if taxonomy else None
                if label is None:
                    report.rejected += 1
                    report.rejected_labels.append(label_path)
                    continue
            tokens = tuple(tokenize(text, tokenizer))
            if not tokens:
                report.empty_text_ids.append(doc_id)
            docs.append(Document(id=doc_id, text=text, tokens=tokens, label=label))
            report.accepted += 1
    return docs, report


def save_documents(
    docs: Iterable[Document], path: str | Path, taxonomy: Taxonomy | None = None
) -> None:
    """Write documents back out as JSON-lines, labels as paths."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for doc in docs:
            record: dict = {"id": doc.id, "text": doc.text}
            if doc.label is not None and taxonomy is not None:
                record["label"] = taxonomy.path(doc.label)
            fh.write(json.dumps(record, ensure_ascii=False) + "\n")


def prune_taxonomy(
    taxonomy: Taxonomy, docs: Sequence[Document], min_docs: int
) -> tuple[Taxonomy, list[Document]]:
    """Drop categories whose subtree holds fewer than ``min_docs`` documents.

    Keeping a category whenever its subtree clears the bar preserves the
    tree shape (an ancestor's subtree count dominates its children's).
    Documents labeled with a pruned category are dropped alongside it.
    """
    if min_docs <= 0:
        return taxonomy, list(docs)
    own = {c.id: 0 for c in taxonomy}
    for doc in docs:
        if doc.label is not None:
            own[doc.label] += 1
    subtree_count = dict(own)
    for cid in taxonomy.postorder():
        parent = taxonomy.category(cid).parent
        if parent is not None:
            subtree_count[parent] += subtree_count[cid]
    kept_paths = [
        taxonomy.path(c.id)
        for c in taxonomy
        if subtree_count[c.id] >= min_docs or c.parent is None
    ]
    pruned = build_taxonomy(kept_paths)
    kept_ids = {taxonomy.id_of(path) for path in kept_paths}
    out_docs = []
    for doc in docs:
        if doc.label is None:
            out_docs.append(doc)
        elif doc.label in kept_ids:
            out_docs.append(replace(doc, label=pruned.id_of(taxonomy.path(doc.label))))
    return pruned, out_docs
