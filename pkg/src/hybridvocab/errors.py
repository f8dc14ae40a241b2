"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class HybridVocabError(Exception):
    exit_code = 1


class ConfigError(HybridVocabError, ValueError):
    """Bad user configuration (tau out of range, unknown block, bad hardware)."""

    exit_code = 2


class ParseError(HybridVocabError, ValueError):
    """A file could not be parsed; ``location`` points at the offending spot."""

    exit_code = 3

    def __init__(self, message, location=None):
        if location is not None:
            message = f"{location}: {message}"
        super().__init__(message)
        self.location = location


class IntegrityError(HybridVocabError, ValueError):
    """A file parsed but violates a structural invariant."""

    exit_code = 4


class DataError(HybridVocabError, ValueError):
    """Input data is outside the domain of an operation."""

    exit_code = 5


class EncodingError(DataError):
    def __init__(self, chars, doc_index=None):
        self.chars = list(chars)
        self.doc_index = doc_index
        shown = ", ".join(f"{c!r} (U+{ord(c):04X})" for c in self.chars)
        where = f"document {doc_index}: " if doc_index is not None else ""
        super().__init__(f"{where}unrepresentable characters: {shown}")
