"""Rule-based summarizer: list the concept mentions found in the assessment.

A pure extractor, never abstractive: the summary is the matched surfaces in
note order, one per distinct concept, joined with "; ". It sets the floor
that learned summarizers are compared against.
"""

from __future__ import annotations

from .matcher import ConceptMatcher
from .notes import ProgressNote, SectionKind


def rule_based_summarize(
    assessment_text: str,
    matcher: ConceptMatcher,
    *,
    use_preferred_terms: bool = False,
    semantic_types: frozenset[str] | None = None,
) -> str:
    """Concept surfaces extracted from the assessment, deduplicated by concept.

    Two mentions are the same concept when their cui sets are equal; the
    first mention wins. ``use_preferred_terms`` emits each concept's
    preferred term instead of the matched surface. ``semantic_types`` keeps
    only concepts having at least one of the given type codes.
    """
    lexicon = matcher.lexicon
    seen: set[frozenset[str]] = set()
    parts = []
    for span in matcher.extract(assessment_text):
        if semantic_types is not None:
            types: set[str] = set()
            for cui in span.cuis:
                concept = lexicon.concepts.get(cui)
                if concept is not None:
                    types |= concept.semantic_types
            if not (types & semantic_types):
                continue
        key = span.cuis
        if key in seen:
            continue
        seen.add(key)
        if use_preferred_terms:
            concept = lexicon.concepts.get(min(span.cuis))
            parts.append(concept.preferred_term if concept else span.surface)
        else:
            parts.append(span.surface)
    return "; ".join(parts)


def summarize_note(
    note: ProgressNote,
    matcher: ConceptMatcher,
    *,
    use_preferred_terms: bool = False,
    semantic_types: frozenset[str] | None = None,
) -> str:
    """Run the baseline over a parsed note's assessment sections."""
    assessment = "\n".join(s.text for s in note.sections_of(SectionKind.ASSESSMENT))
    return rule_based_summarize(
        assessment,
        matcher,
        use_preferred_terms=use_preferred_terms,
        semantic_types=semantic_types,
    )
