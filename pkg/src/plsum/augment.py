"""Synonym-replacement augmentation of (input, summary) training pairs.

Concepts are located with an exact-threshold matcher, each hit becomes a
replacement slot whose choices are the original surface plus the concept's
synonyms, and variants are emitted for every choice combination up to a cap.
Replacing a surface with a synonym of the same concept leaves the example's
concept ids unchanged, which is the property that makes the augmented pairs
safe to train on.
"""

from __future__ import annotations

import itertools
import logging
import math
import random
import statistics
from dataclasses import dataclass

from .errors import MissingVector, NoVariantsPossible
from .lexicon import ConceptLexicon
from .matcher import ConceptMatcher, MatchSpan
from .metrics import eval_tokenize, sent_cosine
from .notes import TaskExample
from .seeding import derive_seed

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ReplacementSlot:
    """One replaceable concept mention and its surface alternatives."""

    span: MatchSpan
    cui: str
    choices: tuple[str, ...]

    def __post_init__(self):
        if not self.choices:
            raise ValueError("a slot needs at least the original surface")
        if self.choices[0] != self.span.surface:
            raise ValueError("choices[0] must be the original surface")


@dataclass(frozen=True)
class Replacement:
    """Provenance of one slot decision inside a variant (kept slots included)."""

    start: int
    end: int
    original: str
    replacement: str
    cui: str
    field: str  # "input" or "summary"


@dataclass(frozen=True)
class AugmentedPair:
    origin_id: str
    variant_index: int
    input_text: str
    summary_text: str
    replacements: tuple[Replacement, ...]


@dataclass(frozen=True)
class AugConfig:
    cap: int = 1000
    seed: int = 0
    threshold: float = 1.0

    def __post_init__(self):
        if self.cap < 1:
            raise ValueError(f"cap must be >= 1, got {self.cap}")
        if not (0.0 < self.threshold <= 1.0):
            raise ValueError(f"threshold must be in (0, 1], got {self.threshold}")


@dataclass(frozen=True)
class QualityReport:
    """Original-vs-variant surface statistics over a batch of pairs."""

    mean_jaccard_overlap: float
    length_diff_mean: float
    length_diff_std: float
    mean_embedding_cosine: float | None = None


def plan_slots(
    text: str, matcher: ConceptMatcher, lexicon: ConceptLexicon | None = None
) -> list[ReplacementSlot]:
    """One slot per non-overlapping concept mention, in offset order.

    A slot's choices are its original surface followed by the sorted synonyms
    of its concept (exact duplicates removed). Surfaces mapping to several
    concepts use the lexicographically smallest cui.
    """
    lexicon = lexicon if lexicon is not None else matcher.lexicon
    slots = []
    for span in matcher.extract(text):
        cui = min(span.cuis)
        choices: list[str] = [span.surface]
        for synonym in lexicon.synonyms_of(cui):
            if synonym not in choices:
                choices.append(synonym)
        slots.append(ReplacementSlot(span=span, cui=cui, choices=tuple(choices)))
    return slots


def enumerate_variants(
    slots: list[ReplacementSlot], cap: int = 1000, seed: int = 0
) -> list[tuple[int, ...]]:
    """Per-slot choice-index tuples; the all-original tuple never appears.

    When the combination space (minus the identity) fits under the cap, all
    tuples are returned in lexicographic order. Otherwise exactly ``cap``
    distinct tuples are drawn uniformly without replacement, deterministic
    under ``seed``.
    """
    sizes = [len(slot.choices) for slot in slots]
    space = math.prod(sizes)
    if space <= 1:
        raise NoVariantsPossible(
            f"{len(slots)} slot(s) admit no alternative to the original"
        )
    if space - 1 <= cap:
        return [t for t in itertools.product(*(range(s) for s in sizes)) if any(t)]
    rng = random.Random(seed)
    seen: set[tuple[int, ...]] = set()
    out: list[tuple[int, ...]] = []
    while len(out) < cap:
        t = tuple(rng.randrange(s) for s in sizes)
        if any(t) and t not in seen:
            seen.add(t)
            out.append(t)
    return out


def _rewrite(text: str, slots: list[ReplacementSlot], picks: list[int], field: str
             ) -> tuple[str, list[Replacement]]:
    replacements = [
        Replacement(
            start=slot.span.start,
            end=slot.span.end,
            original=slot.span.surface,
            replacement=slot.choices[pick],
            cui=slot.cui,
            field=field,
        )
        for slot, pick in zip(slots, picks)
    ]
    # right-to-left so earlier offsets stay valid while lengths change
    for rep in reversed(replacements):
        text = text[: rep.start] + rep.replacement + text[rep.end :]
    return text, replacements


def _concept_profile(text: str, matcher: ConceptMatcher) -> list[tuple[str, ...]]:
    """Sorted multiset of extracted concept identities, span positions ignored."""
    return sorted(tuple(sorted(span.cuis)) for span in matcher.extract(text))


def augment_example(
    example: TaskExample,
    matcher: ConceptMatcher,
    config: AugConfig = AugConfig(),
    *,
    lexicon: ConceptLexicon | None = None,
) -> list[AugmentedPair]:
    """All augmented variants of one example, capped and seeded.

    Slots are planned independently on the input and the reference summary
    and combined into one choice vector (input slots first). The per-example
    seed derives from (config.seed, note_id), so examples can be processed
    in any order or in parallel without changing their output.

    Every candidate is re-extracted before it is emitted: a replacement can
    change which concepts the matcher finds (a long synonym next to a term
    that shares a token can merge into one window), and such a variant would
    silently corrupt the pair's supervision. Candidates whose concept
    multiset differs from the original's, on either field, are dropped and
    counted in the log; their variant indices are left as gaps.
    """
    input_slots = plan_slots(example.input_text, matcher, lexicon)
    summary_slots = plan_slots(example.reference.text, matcher, lexicon)
    slots = input_slots + summary_slots
    if not slots:
        logger.info("example %s: no replacement slots, skipped", example.note_id)
        return []
    try:
        tuples = enumerate_variants(
            slots, cap=config.cap, seed=derive_seed(config.seed, example.note_id)
        )
    except NoVariantsPossible:
        logger.info("example %s: no variants possible, skipped", example.note_id)
        return []

    n_input = len(input_slots)
    want = (
        _concept_profile(example.input_text, matcher),
        _concept_profile(example.reference.text, matcher),
    )
    pairs = []
    dropped = 0
    for index, picks in enumerate(tuples):
        new_input, input_reps = _rewrite(
            example.input_text, input_slots, list(picks[:n_input]), "input"
        )
        new_summary, summary_reps = _rewrite(
            example.reference.text, summary_slots, list(picks[n_input:]), "summary"
        )
        got = (
            _concept_profile(new_input, matcher),
            _concept_profile(new_summary, matcher),
        )
        if got != want:
            dropped += 1
            continue
        pairs.append(
            AugmentedPair(
                origin_id=example.note_id,
                variant_index=index,
                input_text=new_input,
                summary_text=new_summary,
                replacements=tuple(input_reps + summary_reps),
            )
        )
    if dropped:
        logger.info(
            "example %s: dropped %d variants that altered extracted concepts",
            example.note_id, dropped,
        )
    return pairs


def apply_replacements(text: str, replacements: tuple[Replacement, ...], field: str) -> str:
    """Replay recorded replacements against an original text."""
    reps = sorted((r for r in replacements if r.field == field), key=lambda r: r.start)
    for rep in reversed(reps):
        if text[rep.start : rep.end] != rep.original:
            raise ValueError(
                f"text at [{rep.start}, {rep.end}) is not {rep.original!r}"
            )
        text = text[: rep.start] + rep.replacement + text[rep.end :]
    return text


def invert_replacements(variant_text: str, replacements: tuple[Replacement, ...],
                        field: str) -> str:
    """Recover the original text from a variant and its replacement records."""
    reps = sorted((r for r in replacements if r.field == field), key=lambda r: r.start)
    # restore left-to-right: once a slot is restored, every later slot's
    # recorded offset is valid again in the partially rebuilt text
    for rep in reps:
        start = rep.start
        end = start + len(rep.replacement)
        if variant_text[start:end] != rep.replacement:
            raise ValueError(
                f"variant text at [{start}, {end}) is not {rep.replacement!r}"
            )
        variant_text = variant_text[:start] + rep.original + variant_text[end:]
    return variant_text


def _token_jaccard(a: list[str], b: list[str]) -> float:
    sa, sb = set(a), set(b)
    if not sa and not sb:
        return 1.0
    return len(sa & sb) / len(sa | sb)


def quality_report(
    pairs: list[AugmentedPair],
    vectors: dict[str, tuple[float, ...]] | None = None,
    field: str = "input",
) -> QualityReport:
    """Token-overlap and length statistics between originals and variants.

    Originals are recovered from each pair's replacement records. When
    ``vectors`` is given it must hold an embedding for every origin id and
    every variant id "{origin_id}#{variant_index}"; their mean pairwise
    cosine is then included.
    """
    if not pairs:
        raise ValueError("quality_report needs at least one pair")
    if field not in ("input", "summary"):
        raise ValueError(f"field must be 'input' or 'summary', got {field!r}")

    jaccards = []
    length_diffs = []
    cosines = []
    for pair in pairs:
        variant = pair.input_text if field == "input" else pair.summary_text
        original = invert_replacements(variant, pair.replacements, field)
        orig_tokens = eval_tokenize(original)
        var_tokens = eval_tokenize(variant)
        jaccards.append(_token_jaccard(orig_tokens, var_tokens))
        length_diffs.append(abs(len(orig_tokens) - len(var_tokens)))
        if vectors is not None:
            variant_id = f"{pair.origin_id}#{pair.variant_index}"
            for needed in (pair.origin_id, variant_id):
                if needed not in vectors:
                    raise MissingVector(needed)
            cosines.append(sent_cosine(vectors[pair.origin_id], vectors[variant_id]))

    return QualityReport(
        mean_jaccard_overlap=statistics.fmean(jaccards),
        length_diff_mean=statistics.fmean(length_diffs),
        length_diff_std=statistics.pstdev(length_diffs),
        mean_embedding_cosine=statistics.fmean(cosines) if cosines else None,
    )
