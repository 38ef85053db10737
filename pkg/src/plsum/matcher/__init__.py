"""Approximate dictionary matching of lexicon terms in free text."""

from ._select import available_backends, get_kernel, kernel_backend
from .core import (
    ConceptMatcher,
    IndexedTerm,
    MatcherConfig,
    MatchIndex,
    MatchSpan,
    Metric,
    OverlapPolicy,
    Window,
    build_index,
    candidate_windows,
    extract_concepts,
    match_candidates,
    min_overlap,
    resolve_overlaps,
    score_from_counts,
    similarity,
    size_bounds,
)

__all__ = [
    "ConceptMatcher",
    "IndexedTerm",
    "MatcherConfig",
    "MatchIndex",
    "MatchSpan",
    "Metric",
    "OverlapPolicy",
    "Window",
    "available_backends",
    "build_index",
    "candidate_windows",
    "extract_concepts",
    "get_kernel",
    "kernel_backend",
    "match_candidates",
    "min_overlap",
    "resolve_overlaps",
    "score_from_counts",
    "similarity",
    "size_bounds",
]
