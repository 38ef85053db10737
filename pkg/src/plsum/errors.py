"""Exception types shared across the toolkit."""


class PlsumError(Exception):
    """Base class for all toolkit errors."""


class NoSectionsFound(PlsumError):
    """No section header matched and the note could not be classified."""

    def __init__(self, note_id: str = ""):
        self.note_id = note_id
        super().__init__(f"no sections found in note {note_id!r}")


class MissingAssessment(PlsumError):
    """The note has no Assessment section."""

    def __init__(self, note_id: str = ""):
        self.note_id = note_id
        super().__init__(f"note {note_id!r} has no assessment section")


class SchemaViolation(PlsumError):
    """A JSONL record does not conform to its schema."""

    def __init__(self, message: str, line_no: int | None = None, field: str = ""):
        self.line_no = line_no
        self.field = field
        where = f" (line {line_no}, field {field!r})" if line_no is not None else ""
        super().__init__(message + where)


class MalformedLine(PlsumError):
    """A lexicon TSV line could not be parsed."""

    def __init__(self, line_no: int, reason: str = ""):
        self.line_no = line_no
        super().__init__(f"malformed lexicon line {line_no}: {reason}")


class InvalidCui(PlsumError):
    """A concept id does not match the C+7-digits convention."""

    def __init__(self, line_no: int, cui: str):
        self.line_no = line_no
        self.cui = cui
        super().__init__(f"invalid cui {cui!r} at line {line_no}")


class ConflictingPreferred(PlsumError):
    """Two different terms claim the preferred flag for one concept."""

    def __init__(self, cui: str):
        self.cui = cui
        super().__init__(f"conflicting preferred terms for {cui}")


class EmptyAfterNormalization(PlsumError):
    """A term normalizes to the empty string."""


class EmptyLexicon(PlsumError):
    """An index cannot be built from an empty lexicon."""


class EmptyFeatureSet(PlsumError):
    """Similarity is undefined over an empty feature set."""


class ConfigMismatch(PlsumError):
    """Query feature configuration differs from the index configuration."""


class NoVariantsPossible(PlsumError):
    """Every replacement slot has a single choice; no variant can differ."""


class MissingVector(PlsumError):
    """An embedding lookup failed for a required id."""

    def __init__(self, vector_id: str):
        self.vector_id = vector_id
        super().__init__(f"no vector supplied for id {vector_id!r}")


class OverlappingSpans(PlsumError):
    """Concept spans handed to the masker overlap."""


class SentinelMismatch(PlsumError):
    """Sentinel sequences in a masked example's input and target disagree."""


class DimensionMismatch(PlsumError):
    """Vectors of different dimension cannot be compared."""


class ZeroVector(PlsumError):
    """Cosine similarity is undefined for a zero vector."""
