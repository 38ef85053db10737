"""Line-delimited corpus formats: notes, task examples, spans, pairs, masks.

All JSONL writers emit UTF-8 with sorted keys and compact separators so that
identical collections serialize to identical bytes. Readers validate field
types and report failures as :class:`SchemaViolation` with the line number
and field path. Unknown fields on notes and annotations survive a round trip
untouched.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Any, Iterable, Iterator

from .errors import SchemaViolation
from .notes import (
    InputMode,
    PlanAnnotation,
    ProblemLabel,
    ReferenceSummary,
    TaskExample,
)

_LABELS = {label.value for label in ProblemLabel}
_MODES = {mode.value for mode in InputMode}


@dataclass(frozen=True)
class AnnotationRecord:
    plan_index: int
    problem: str
    label: ProblemLabel
    extra: dict = field(default_factory=dict)

    def to_annotation(self) -> PlanAnnotation:
        return PlanAnnotation(
            plan_index=self.plan_index, problem_text=self.problem, label=self.label
        )


@dataclass(frozen=True)
class NoteRecord:
    """Wire form of a note: raw text plus plan annotations."""

    note_id: str
    text: str
    annotations: tuple[AnnotationRecord, ...] = ()
    extra: dict = field(default_factory=dict)

    def to_annotations(self) -> list[PlanAnnotation]:
        return [a.to_annotation() for a in self.annotations]


def _dump(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def _open_for_read(source) -> tuple[IO[str], bool]:
    if isinstance(source, (str, Path)):
        return open(source, "r", encoding="utf-8"), True
    return source, False


def _open_for_write(dest) -> tuple[IO[str], bool]:
    if isinstance(dest, (str, Path)):
        return open(dest, "w", encoding="utf-8", newline="\n"), True
    return dest, False


def _iter_objects(source) -> Iterator[tuple[int, dict]]:
    stream, owned = _open_for_read(source)
    try:
        for line_no, line in enumerate(stream, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaViolation(f"invalid JSON: {exc.msg}", line_no=line_no) from None
            if not isinstance(obj, dict):
                raise SchemaViolation("line is not a JSON object", line_no=line_no)
            yield line_no, obj
    finally:
        if owned:
            stream.close()


def _require(obj: dict, name: str, kind: type, line_no: int, path: str = "") -> Any:
    where = f"{path}.{name}" if path else name
    if name not in obj:
        raise SchemaViolation("missing required field", line_no=line_no, field=where)
    value = obj[name]
    if kind is int and isinstance(value, bool):
        raise SchemaViolation("expected an integer", line_no=line_no, field=where)
    if not isinstance(value, kind):
        raise SchemaViolation(
            f"expected {kind.__name__}, got {type(value).__name__}", line_no=line_no, field=where
        )
    return value


# ---------------------------------------------------------------------------
# notes


def read_notes(source) -> list[NoteRecord]:
    records = []
    for line_no, obj in _iter_objects(source):
        note_id = _require(obj, "note_id", str, line_no)
        text = _require(obj, "text", str, line_no)
        raw_anns = obj.get("annotations", [])
        if not isinstance(raw_anns, list):
            raise SchemaViolation("expected an array", line_no=line_no, field="annotations")
        anns = []
        for i, raw in enumerate(raw_anns):
            path = f"annotations[{i}]"
            if not isinstance(raw, dict):
                raise SchemaViolation("expected an object", line_no=line_no, field=path)
            plan_index = _require(raw, "plan_index", int, line_no, path)
            problem = _require(raw, "problem", str, line_no, path)
            label = _require(raw, "label", str, line_no, path)
            if label not in _LABELS:
                raise SchemaViolation(
                    f"unknown label {label!r}", line_no=line_no, field=f"{path}.label"
                )
            extra = {
                k: v for k, v in raw.items() if k not in ("plan_index", "problem", "label")
            }
            anns.append(
                AnnotationRecord(
                    plan_index=plan_index,
                    problem=problem,
                    label=ProblemLabel(label),
                    extra=extra,
                )
            )
        extra = {k: v for k, v in obj.items() if k not in ("note_id", "text", "annotations")}
        records.append(
            NoteRecord(note_id=note_id, text=text, annotations=tuple(anns), extra=extra)
        )
    return records


def write_notes(records: Iterable[NoteRecord], dest) -> int:
    stream, owned = _open_for_write(dest)
    n = 0
    try:
        for rec in records:
            obj = dict(rec.extra)
            obj["note_id"] = rec.note_id
            obj["text"] = rec.text
            obj["annotations"] = [
                {
                    **a.extra,
                    "plan_index": a.plan_index,
                    "problem": a.problem,
                    "label": a.label.value,
                }
                for a in rec.annotations
            ]
            stream.write(_dump(obj) + "\n")
            n += 1
    finally:
        if owned:
            stream.close()
    return n


# ---------------------------------------------------------------------------
# task examples


def read_examples(source) -> list[TaskExample]:
    examples = []
    for line_no, obj in _iter_objects(source):
        note_id = _require(obj, "note_id", str, line_no)
        input_text = _require(obj, "input", str, line_no)
        mode = _require(obj, "mode", str, line_no)
        if mode not in _MODES:
            raise SchemaViolation(f"unknown mode {mode!r}", line_no=line_no, field="mode")
        truncated = _require(obj, "truncated", bool, line_no)
        ref = _require(obj, "reference", dict, line_no)
        direct = _require(ref, "direct", list, line_no, "reference")
        indirect = _require(ref, "indirect", list, line_no, "reference")
        for side, values in (("direct", direct), ("indirect", indirect)):
            for i, v in enumerate(values):
                if not isinstance(v, str):
                    raise SchemaViolation(
                        "expected string", line_no=line_no, field=f"reference.{side}[{i}]"
                    )
        examples.append(
            TaskExample(
                note_id=note_id,
                input_text=input_text,
                input_mode=InputMode(mode),
                reference=ReferenceSummary(direct=tuple(direct), indirect=tuple(indirect)),
                truncated=truncated,
            )
        )
    return examples


def write_examples(examples: Iterable[TaskExample], dest) -> int:
    stream, owned = _open_for_write(dest)
    n = 0
    try:
        for ex in examples:
            obj = {
                "note_id": ex.note_id,
                "input": ex.input_text,
                "mode": ex.input_mode.value,
                "truncated": ex.truncated,
                "reference": {
                    "direct": list(ex.reference.direct),
                    "indirect": list(ex.reference.indirect),
                    "text": ex.reference.text,
                },
            }
            stream.write(_dump(obj) + "\n")
            n += 1
    finally:
        if owned:
            stream.close()
    return n


# ---------------------------------------------------------------------------
# extraction spans


def write_spans(rows: Iterable[tuple[str, list]], dest) -> int:
    """rows: (note_id, spans) where spans are MatchSpan-shaped objects."""
    stream, owned = _open_for_write(dest)
    n = 0
    try:
        for note_id, spans in rows:
            obj = {
                "note_id": note_id,
                "spans": [
                    {
                        "start": s.start,
                        "end": s.end,
                        "surface": s.surface,
                        "cuis": sorted(s.cuis),
                        "term": s.matched_term,
                        "score": s.score,
                    }
                    for s in spans
                ],
            }
            stream.write(_dump(obj) + "\n")
            n += 1
    finally:
        if owned:
            stream.close()
    return n


# ---------------------------------------------------------------------------
# augmented pairs


def write_pairs(pairs: Iterable, dest) -> int:
    stream, owned = _open_for_write(dest)
    n = 0
    try:
        for pair in pairs:
            obj = {
                "origin_id": pair.origin_id,
                "variant": pair.variant_index,
                "input": pair.input_text,
                "summary": pair.summary_text,
                "replacements": [
                    {
                        "start": r.start,
                        "end": r.end,
                        "from": r.original,
                        "to": r.replacement,
                        "cui": r.cui,
                        "field": r.field,
                    }
                    for r in pair.replacements
                ],
            }
            stream.write(_dump(obj) + "\n")
            n += 1
    finally:
        if owned:
            stream.close()
    return n


def read_pairs(source) -> list[dict]:
    """Augmented pairs as plain dicts (replacements under their wire names)."""
    rows = []
    for line_no, obj in _iter_objects(source):
        _require(obj, "origin_id", str, line_no)
        _require(obj, "variant", int, line_no)
        _require(obj, "input", str, line_no)
        _require(obj, "summary", str, line_no)
        reps = obj.get("replacements", [])
        if not isinstance(reps, list):
            raise SchemaViolation("expected an array", line_no=line_no, field="replacements")
        rows.append(obj)
    return rows


# ---------------------------------------------------------------------------
# masked corpus


def write_masked(examples: Iterable, dest) -> int:
    stream, owned = _open_for_write(dest)
    n = 0
    try:
        for ex in examples:
            obj = {
                "id": ex.source_id,
                "input": ex.input_text,
                "target": ex.target_text,
                "policy": ex.policy,
                "masked_tokens": ex.masked_token_count,
                "total_tokens": ex.total_token_count,
            }
            stream.write(_dump(obj) + "\n")
            n += 1
    finally:
        if owned:
            stream.close()
    return n


def read_masked(source) -> list[dict]:
    rows = []
    for line_no, obj in _iter_objects(source):
        _require(obj, "id", str, line_no)
        _require(obj, "input", str, line_no)
        _require(obj, "target", str, line_no)
        _require(obj, "policy", str, line_no)
        _require(obj, "masked_tokens", int, line_no)
        _require(obj, "total_tokens", int, line_no)
        rows.append(obj)
    return rows


# ---------------------------------------------------------------------------
# predictions and vectors


def read_predictions(source) -> dict[str, str]:
    preds: dict[str, str] = {}
    for line_no, obj in _iter_objects(source):
        note_id = _require(obj, "note_id", str, line_no)
        summary = _require(obj, "summary", str, line_no)
        preds[note_id] = summary
    return preds


def write_predictions(rows: Iterable[tuple[str, str]], dest) -> int:
    stream, owned = _open_for_write(dest)
    n = 0
    try:
        for note_id, summary in rows:
            stream.write(_dump({"note_id": note_id, "summary": summary}) + "\n")
            n += 1
    finally:
        if owned:
            stream.close()
    return n


def read_vectors(source) -> dict[str, tuple[float, ...]]:
    """id<TAB>floats (whitespace-separated) per line; blank and # lines skipped."""
    stream, owned = _open_for_read(source)
    vectors: dict[str, tuple[float, ...]] = {}
    try:
        for line_no, line in enumerate(stream, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            vec_id, sep, rest = line.partition("\t")
            if not sep or not vec_id:
                raise SchemaViolation("expected id<TAB>floats", line_no=line_no)
            try:
                values = tuple(float(x) for x in rest.split())
            except ValueError:
                raise SchemaViolation("non-numeric vector value", line_no=line_no) from None
            if not values:
                raise SchemaViolation("empty vector", line_no=line_no)
            vectors[vec_id] = values
    finally:
        if owned:
            stream.close()
    return vectors


# ---------------------------------------------------------------------------
# digests


def file_digest(path) -> str:
    """Hex SHA-256 of a file's bytes."""
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def text_digest(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()
