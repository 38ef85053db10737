"""Progress-note domain model: SOAP sections, plan annotations, task examples.

A progress note is segmented into sections by configurable literal headers
matched case-insensitively at line start. Section ranges index the original
text exactly, so segmentation is lossless: everything between two sections is
the consumed header plus surrounding whitespace.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .errors import MissingAssessment, NoSectionsFound


class SectionKind(enum.Enum):
    ASSESSMENT = "assessment"
    CHIEF_COMPLAINT = "chief_complaint"
    ALLERGIES = "allergies"
    REVIEW_OF_SYSTEMS = "review_of_systems"
    OTHER_SUBJECTIVE = "other_subjective"
    OBJECTIVE = "objective"
    PLAN_SUBSECTION = "plan_subsection"


class ProblemLabel(enum.Enum):
    DIRECT = "direct"
    INDIRECT = "indirect"
    NEITHER = "neither"
    NOT_RELEVANT = "not_relevant"


class InputMode(enum.Enum):
    ASSESSMENT_ONLY = "assessment_only"
    ASSESSMENT_PLUS_SUBJECTIVE = "assessment_plus_subjective"


# Subjective-side kinds appended in AssessmentPlusSubjective mode. Objective
# content is never part of a task example.
SUBJECTIVE_KINDS = frozenset(
    {
        SectionKind.CHIEF_COMPLAINT,
        SectionKind.ALLERGIES,
        SectionKind.REVIEW_OF_SYSTEMS,
        SectionKind.OTHER_SUBJECTIVE,
    }
)

DEFAULT_HEADERS: dict[SectionKind, tuple[str, ...]] = {
    SectionKind.ASSESSMENT: ("Assessment and Plan:", "Assessment:"),
    SectionKind.CHIEF_COMPLAINT: ("Chief Complaint:", "CC:"),
    SectionKind.ALLERGIES: ("Allergies:",),
    SectionKind.REVIEW_OF_SYSTEMS: ("Review of systems:", "ROS:"),
    SectionKind.OTHER_SUBJECTIVE: ("Subjective:", "History of Present Illness:", "HPI:"),
    SectionKind.OBJECTIVE: ("Objective:", "Physical Exam:", "Vitals:", "Labs:"),
    SectionKind.PLAN_SUBSECTION: ("Plan:", "#"),
}


@dataclass(frozen=True)
class Section:
    kind: SectionKind
    start: int
    end: int
    text: str

    def __post_init__(self):
        if self.start >= self.end:
            raise ValueError(f"empty section range [{self.start}, {self.end})")


@dataclass(frozen=True)
class ProgressNote:
    note_id: str
    raw_text: str
    sections: tuple[Section, ...]

    def __post_init__(self):
        prev_end = 0
        for sec in self.sections:
            if sec.start < prev_end or sec.end > len(self.raw_text):
                raise ValueError(f"section range [{sec.start}, {sec.end}) out of order or bounds")
            if self.raw_text[sec.start : sec.end] != sec.text:
                raise ValueError(f"section text does not equal raw_text[{sec.start}:{sec.end}]")
            prev_end = sec.end

    def sections_of(self, kind: SectionKind) -> list[Section]:
        return [s for s in self.sections if s.kind is kind]


@dataclass(frozen=True)
class PlanAnnotation:
    plan_index: int
    problem_text: str
    label: ProblemLabel

    def __post_init__(self):
        if self.label in (ProblemLabel.DIRECT, ProblemLabel.INDIRECT) and not self.problem_text:
            raise ValueError(f"{self.label.value} annotation requires non-empty problem_text")


@dataclass(frozen=True)
class ReferenceSummary:
    """Direct problems followed by indirect ones, rendered with "; "."""

    direct: tuple[str, ...]
    indirect: tuple[str, ...]
    text: str = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "text", "; ".join(self.direct + self.indirect))

    @property
    def is_empty(self) -> bool:
        return not self.direct and not self.indirect


@dataclass(frozen=True)
class TaskExample:
    note_id: str
    input_text: str
    input_mode: InputMode
    reference: ReferenceSummary
    truncated: bool = False


def _header_table(header_patterns: dict[SectionKind, tuple[str, ...]]) -> list[tuple[str, SectionKind]]:
    table = []
    for kind, literals in header_patterns.items():
        for lit in literals:
            if not lit:
                raise ValueError(f"empty header literal for {kind}")
            table.append((lit.lower(), kind))
    # longest literal first so "Assessment and Plan:" beats "Assessment:"
    table.sort(key=lambda item: (-len(item[0]), item[0]))
    return table


def _trimmed_section(kind: SectionKind, raw: str, start: int, end: int) -> Section | None:
    """Section over raw[start:end] with both ends shrunk to content; None if blank."""
    chunk = raw[start:end]
    lead = len(chunk) - len(chunk.lstrip())
    trail = len(chunk) - len(chunk.rstrip())
    if lead + trail >= len(chunk):
        return None
    s, e = start + lead, end - trail
    return Section(kind=kind, start=s, end=e, text=raw[s:e])


def parse_progress_note(
    raw_text: str,
    header_patterns: dict[SectionKind, tuple[str, ...]] | None = None,
    *,
    note_id: str = "",
    assume_leading_assessment: bool = True,
) -> ProgressNote:
    """Split a note into sections at literal header occurrences.

    Headers match case-insensitively at line start; the longest configured
    literal wins. Header text is consumed (not part of any section) and
    section content is trimmed of surrounding whitespace, so ranges always
    satisfy start < end; blank sections are dropped.

    Text before the first header is the assessment when
    ``assume_leading_assessment`` is true (the common layout puts the
    assessment narrative first, unheaded), otherwise it is OtherSubjective.
    Raises :class:`NoSectionsFound` when nothing survives: no header matched
    and the note cannot be read as a pure assessment.
    """
    if not raw_text:
        raise ValueError("raw_text must be non-empty")
    table = _header_table(header_patterns or DEFAULT_HEADERS)
    lower = raw_text.lower()

    # (header_start, content_start, kind) per matched header, document order
    hits: list[tuple[int, int, SectionKind]] = []
    pos = 0
    while pos <= len(raw_text):
        for lit, kind in table:
            if lower.startswith(lit, pos):
                hits.append((pos, pos + len(lit), kind))
                break
        nl = raw_text.find("\n", pos)
        if nl == -1:
            break
        pos = nl + 1

    sections: list[Section] = []
    first_header = hits[0][0] if hits else len(raw_text)
    if first_header > 0:
        kind = (
            SectionKind.ASSESSMENT
            if assume_leading_assessment
            else SectionKind.OTHER_SUBJECTIVE
        )
        lead = _trimmed_section(kind, raw_text, 0, first_header)
        if lead is not None:
            sections.append(lead)

    for i, (h_start, c_start, kind) in enumerate(hits):
        c_end = hits[i + 1][0] if i + 1 < len(hits) else len(raw_text)
        sec = _trimmed_section(kind, raw_text, c_start, c_end)
        if sec is not None:
            sections.append(sec)

    if not sections:
        raise NoSectionsFound(note_id)
    return ProgressNote(note_id=note_id, raw_text=raw_text, sections=tuple(sections))


def build_reference_summary(annotations: list[PlanAnnotation]) -> ReferenceSummary:
    """Direct then indirect problem texts in plan order; other labels dropped.

    An empty result is legal; callers check :attr:`ReferenceSummary.is_empty`.
    """
    ordered = sorted(annotations, key=lambda a: a.plan_index)
    direct = tuple(a.problem_text for a in ordered if a.label is ProblemLabel.DIRECT)
    indirect = tuple(a.problem_text for a in ordered if a.label is ProblemLabel.INDIRECT)
    return ReferenceSummary(direct=direct, indirect=indirect)


def truncate_words(text: str, max_words: int) -> tuple[str, bool]:
    """Cap text at max_words whitespace-delimited words. Idempotent."""
    if max_words < 1:
        raise ValueError(f"max_words must be positive, got {max_words}")
    words = text.split()
    if len(words) <= max_words:
        return text, False
    return " ".join(words[:max_words]), True


def build_task_example(
    note: ProgressNote,
    reference: ReferenceSummary,
    mode: InputMode = InputMode.ASSESSMENT_ONLY,
    max_words: int = 512,
) -> TaskExample:
    """Assemble the model input from the note's sections and cap its length.

    AssessmentOnly concatenates the assessment sections; the larger mode
    appends the subjective-side sections in document order. Objective
    sections are never included.
    """
    assessments = note.sections_of(SectionKind.ASSESSMENT)
    if not assessments:
        raise MissingAssessment(note.note_id)
    parts = [s.text for s in assessments]
    if mode is InputMode.ASSESSMENT_PLUS_SUBJECTIVE:
        parts.extend(s.text for s in note.sections if s.kind in SUBJECTIVE_KINDS)
    input_text, truncated = truncate_words("\n".join(parts), max_words)
    return TaskExample(
        note_id=note.note_id,
        input_text=input_text,
        input_mode=mode,
        reference=reference,
        truncated=truncated,
    )
