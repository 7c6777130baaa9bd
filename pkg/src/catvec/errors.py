"""Exception hierarchy shared across the package."""


class CatvecError(Exception):
    """Base class for all package errors."""


class TaxonomyError(CatvecError):
    """Base class for taxonomy construction errors."""


class DuplicateCategory(TaxonomyError):
    """The same category path was declared twice."""


class MissingParent(TaxonomyError):
    """A non-root path has no ancestor anywhere in the file."""


class InvalidTaxonomy(TaxonomyError):
    """Structural violation: multiple roots or a parent/child cycle."""


class NotFound(CatvecError):
    """An id, path, or file that should exist does not."""


class ParseError(CatvecError):
    """Malformed record in a line-oriented input file."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class FormatError(CatvecError):
    """Embedding text file violates the declared header or row width."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class EmptyCorpus(CatvecError):
    """No usable tokens survived filtering."""


class MissingKey(CatvecError):
    """Embedding lookup for a key that is not in the store."""


class ConfigError(CatvecError):
    """Inconsistent artifacts or invalid parameter combination."""


class EmptyEval(CatvecError):
    """Evaluation invoked with nothing to score."""


class IdMismatch(CatvecError):
    """Prediction and gold inputs do not cover the same document ids."""

    def __init__(self, missing_ids):
        self.missing_ids = sorted(missing_ids)
        shown = ", ".join(self.missing_ids[:10])
        more = "" if len(self.missing_ids) <= 10 else f" (+{len(self.missing_ids) - 10} more)"
        super().__init__(f"unmatched document ids: {shown}{more}")
