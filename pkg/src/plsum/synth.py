"""Synthetic progress-note corpus generator.

Real progress-note corpora are access-restricted, so tests and demos run on
generated notes. Each note embeds a handful of lexicon terms into templated
assessment text and numbered plan blocks, with matching Direct/Indirect
annotations. The filler vocabulary shares no token with the bundled lexicon,
which keeps concept extraction on generated notes exact: every match is an
embedded term and every embedded term matches.
"""

from __future__ import annotations

import random

from .corpus_io import AnnotationRecord, NoteRecord
from .lexicon import ConceptLexicon
from .notes import ProblemLabel
from .seeding import derive_seed

# Sentence templates for terms present in the assessment.
_FIRST_SENTENCES = (
    "pt is a {age} yo {sex} admitted with {term}.",
    "{age} yo {sex} presenting with {term}.",
)
_MORE_SENTENCES = (
    "also noted {term}.",
    "now with {term}.",
    "ongoing {term} today.",
    "developed {term} overnight.",
    "treated for {term}.",
)
_FOLLOWUP_SENTENCES = ("still monitoring {term} closely.",)

_PLAN_ACTIONS = (
    "- continue current care",
    "- monitor closely overnight",
    "- repeat am labs",
    "- adjust meds as needed",
    "- supportive care today",
)

_CHIEF_COMPLAINTS = ("not feeling well", "worsening symptoms", "routine daily review")

# Plan blocks that carry no problem: their annotations are Neither/NotRelevant.
_NON_PROBLEM_BLOCKS = (
    ("dispo planning", ProblemLabel.NOT_RELEVANT),
    ("awaiting pending results", ProblemLabel.NEITHER),
    ("family meeting today", ProblemLabel.NOT_RELEVANT),
)

_SEXES = ("male", "female")

# Every word the templates can emit, for the lexicon-disjointness check.
FILLER_VOCABULARY = frozenset(
    "pt is a yo admitted with presenting also noted now ongoing today developed "
    "overnight treated for still monitoring closely continue current care monitor "
    "repeat am labs adjust meds as needed supportive not feeling well worsening "
    "symptoms routine daily review dispo planning awaiting pending results family "
    "meeting afebrile exam unchanged male female".split()
)


def generate_synthetic_corpus(
    seed: int,
    n_notes: int,
    lexicon: ConceptLexicon,
    *,
    absent_indirect_fraction: float = 0.3,
    max_terms: int = 8,
) -> list[NoteRecord]:
    """Deterministic synthetic notes with plan annotations.

    Each note samples 1..max_terms distinct concepts; at least one is Direct
    and the rest Indirect. Every problem gets a numbered plan block. An
    Indirect problem's term is left out of the assessment text with
    probability ``absent_indirect_fraction`` (it still appears in its plan
    block), mirroring how indirect problems are often not spelled out in the
    assessment narrative.
    """
    if n_notes <= 0:
        raise ValueError(f"n_notes must be positive, got {n_notes}")
    if not lexicon.concepts:
        raise ValueError("lexicon must be non-empty")
    if not (0.0 <= absent_indirect_fraction <= 1.0):
        raise ValueError(f"fraction must be in [0, 1], got {absent_indirect_fraction}")

    cuis = sorted(lexicon.concepts)
    records = []
    for i in range(n_notes):
        note_id = f"note{i:05d}"
        rng = random.Random(derive_seed(seed, note_id))
        records.append(
            _generate_note(rng, note_id, lexicon, cuis, absent_indirect_fraction, max_terms)
        )
    return records


def _generate_note(
    rng: random.Random,
    note_id: str,
    lexicon: ConceptLexicon,
    cuis: list[str],
    absent_indirect_fraction: float,
    max_terms: int,
) -> NoteRecord:
    n_terms = rng.randint(1, min(max_terms, len(cuis)))
    chosen = rng.sample(cuis, n_terms)
    surfaces = [rng.choice(lexicon.synonyms_of(cui)) for cui in chosen]
    n_direct = rng.randint(1, n_terms)

    problems: list[tuple[str, ProblemLabel, bool]] = []  # (surface, label, in_assessment)
    for j, surface in enumerate(surfaces):
        label = ProblemLabel.DIRECT if j < n_direct else ProblemLabel.INDIRECT
        absent = label is ProblemLabel.INDIRECT and rng.random() < absent_indirect_fraction
        problems.append((surface, label, not absent))

    sentences = []
    for surface, _, present in problems:
        if not present:
            continue
        template = rng.choice(_FIRST_SENTENCES if not sentences else _MORE_SENTENCES)
        sentences.append(
            template.format(term=surface, age=rng.randint(21, 99), sex=rng.choice(_SEXES))
        )
        if rng.random() < 0.3:
            sentences.append(rng.choice(_FOLLOWUP_SENTENCES).format(term=surface))
    if not sentences:
        # every term rolled absent: keep the assessment non-empty
        sentences.append(
            _FIRST_SENTENCES[0].format(
                term="worsening symptoms", age=rng.randint(21, 99), sex=rng.choice(_SEXES)
            )
        )
    assessment = " ".join(sentences)

    lines = []
    if rng.random() < 0.5:
        lines.append("Assessment:")
    lines.append(assessment)
    if rng.random() < 0.3:
        lines.append(f"Chief Complaint: {rng.choice(_CHIEF_COMPLAINTS)}")
    if rng.random() < 0.3:
        lines.append("Objective:")
        lines.append("afebrile overnight. exam unchanged.")

    annotations = []
    plan_index = 0
    for surface, label, _ in problems:
        plan_index += 1
        lines.append(f"#{plan_index} {surface}")
        lines.append(rng.choice(_PLAN_ACTIONS))
        annotations.append(
            AnnotationRecord(plan_index=plan_index, problem=surface, label=label)
        )
    if rng.random() < 0.25:
        text, label = rng.choice(_NON_PROBLEM_BLOCKS)
        plan_index += 1
        lines.append(f"#{plan_index} {text}")
        annotations.append(AnnotationRecord(plan_index=plan_index, problem=text, label=label))

    return NoteRecord(
        note_id=note_id, text="\n".join(lines), annotations=tuple(annotations)
    )
