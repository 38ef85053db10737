"""Approximate dictionary matcher: inverted feature index plus candidate pruning.

Matching follows the classic set-similarity search scheme: every lexicon term
is reduced to a feature set; candidate text windows retrieve terms through a
feature -> term-id inverted index, pruned by the metric's feasible size range
and minimum shared-feature bound, and survivors are scored exactly.

The per-window counting loop is the hot path. It is implemented twice with
identical semantics: a compiled Cython kernel and a pure-Python fallback,
selected at import (see :mod:`plsum.matcher._select`). Both produce
bit-identical scores because they evaluate the same integer-ratio formulas.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

from ..errors import ConfigMismatch, EmptyFeatureSet, EmptyLexicon
from ..lexicon import (
    ConceptLexicon,
    FeatureConfig,
    FeatureKind,
    FeatureSet,
    feature_set,
    normalize,
)
from ..textnorm import tokenize_with_offsets
from ._select import get_kernel

# slack applied to pruning bounds so float rounding can only loosen them
_BOUND_EPS = 1e-9


class Metric(enum.Enum):
    JACCARD = "jaccard"
    COSINE = "cosine"
    OVERLAP = "overlap"


# codes shared with the kernels
METRIC_CODES = {Metric.JACCARD: 0, Metric.COSINE: 1, Metric.OVERLAP: 2}


class OverlapPolicy(enum.Enum):
    BEST_SCORE = "best_score"
    LONGEST_SPAN = "longest_span"


@dataclass(frozen=True)
class MatcherConfig:
    """Knobs for extraction: metric, threshold, window width, features."""

    metric: Metric = Metric.JACCARD
    threshold: float = 0.7
    max_window: int = 7
    feature_config: FeatureConfig = FeatureConfig()
    overlap_policy: OverlapPolicy = OverlapPolicy.BEST_SCORE

    def __post_init__(self):
        if not (0.0 < self.threshold <= 1.0):
            raise ValueError(f"threshold must be in (0, 1], got {self.threshold}")
        if self.max_window < 1:
            raise ValueError(f"max_window must be >= 1, got {self.max_window}")


@dataclass(frozen=True)
class MatchSpan:
    """One concept hit: character span, matched term, CUIs, similarity score."""

    start: int
    end: int
    surface: str
    cuis: frozenset[str]
    matched_term: str
    score: float

    def __post_init__(self):
        if self.start >= self.end:
            raise ValueError(f"empty span [{self.start}, {self.end})")

    @property
    def length(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class IndexedTerm:
    term: str
    cuis: frozenset[str]
    n_features: int


@dataclass(frozen=True)
class MatchIndex:
    """Immutable inverted index over the normalized synonym surfaces."""

    terms: tuple[IndexedTerm, ...]
    feature_ids: dict[str, int] = field(repr=False)
    size_buckets: dict[int, tuple[int, ...]] = field(repr=False)
    feature_config: FeatureConfig = FeatureConfig()
    backend: str = "python"
    _handle: object = field(repr=False, default=None)
    _kernel: object = field(repr=False, default=None)

    def __len__(self) -> int:
        return len(self.terms)


def similarity(q: FeatureSet | frozenset | set, y: FeatureSet | frozenset | set,
               metric: Metric = Metric.JACCARD) -> float:
    """Set similarity between two feature sets.

    Jaccard = |q&y|/|q|y|, Cosine = |q&y|/sqrt(|q||y|), Overlap = |q&y|/min.
    Symmetric; raises :class:`EmptyFeatureSet` when either side is empty.
    """
    qs = q.features if isinstance(q, FeatureSet) else frozenset(q)
    ys = y.features if isinstance(y, FeatureSet) else frozenset(y)
    if not qs or not ys:
        raise EmptyFeatureSet("similarity is undefined for empty feature sets")
    return score_from_counts(len(qs & ys), len(qs), len(ys), metric)


def score_from_counts(shared: int, n_q: int, n_y: int, metric: Metric) -> float:
    """Similarity from |q&y|, |q|, |y|. The kernels evaluate the same formulas."""
    if metric is Metric.JACCARD:
        return shared / (n_q + n_y - shared)
    if metric is Metric.COSINE:
        return shared / math.sqrt(n_q * n_y)
    return shared / min(n_q, n_y)


def size_bounds(n_q: int, tau: float, metric: Metric, max_size: int) -> tuple[int, int]:
    """Feasible |y| range: any term outside it cannot reach similarity tau."""
    if metric is Metric.JACCARD:
        lo = math.ceil(tau * n_q - _BOUND_EPS)
        hi = math.floor(n_q / tau + _BOUND_EPS)
    elif metric is Metric.COSINE:
        lo = math.ceil(tau * tau * n_q - _BOUND_EPS)
        hi = math.floor(n_q / (tau * tau) + _BOUND_EPS)
    else:
        lo, hi = 1, max_size
    return max(lo, 1), min(hi, max_size)


def min_overlap(n_q: int, n_y: int, tau: float, metric: Metric) -> int:
    """Smallest shared-feature count that can still reach similarity tau."""
    if metric is Metric.JACCARD:
        bound = math.ceil(tau * (n_q + n_y) / (1.0 + tau) - _BOUND_EPS)
    elif metric is Metric.COSINE:
        bound = math.ceil(tau * math.sqrt(n_q * n_y) - _BOUND_EPS)
    else:
        bound = math.ceil(tau * min(n_q, n_y) - _BOUND_EPS)
    return max(bound, 1)


def build_index(lexicon: ConceptLexicon, config: MatcherConfig | None = None,
                backend: str | None = None) -> MatchIndex:
    """Index every distinct normalized synonym surface of ``lexicon``.

    Term ids are assigned in sorted surface order so rebuilding the same
    lexicon yields an identical index. ``backend`` pins the counting kernel
    ("python" or "cython"); by default the best available one is used.
    """
    if not lexicon.concepts:
        raise EmptyLexicon("cannot build an index from an empty lexicon")
    fcfg = config.feature_config if config else FeatureConfig()

    # Group by normalized surface so casing variants collapse to one entry.
    norm_cuis: dict[str, set[str]] = {}
    for surface, cui in lexicon.iter_surfaces():
        norm = normalize(surface, fcfg)
        if norm:
            norm_cuis.setdefault(norm, set()).add(cui)

    terms = []
    feature_ids: dict[str, int] = {}
    postings: dict[int, list[int]] = {}
    size_buckets: dict[int, list[int]] = {}
    for tid, norm in enumerate(sorted(norm_cuis)):
        feats = feature_set(norm, fcfg).features
        terms.append(IndexedTerm(term=norm, cuis=frozenset(norm_cuis[norm]), n_features=len(feats)))
        size_buckets.setdefault(len(feats), []).append(tid)
        for f in sorted(feats):
            fid = feature_ids.setdefault(f, len(feature_ids))
            postings.setdefault(fid, []).append(tid)

    kernel = get_kernel(backend)
    handle = kernel.prepare(
        postings, [t.n_features for t in terms], len(feature_ids)
    )
    return MatchIndex(
        terms=tuple(terms),
        feature_ids=feature_ids,
        size_buckets={k: tuple(v) for k, v in sorted(size_buckets.items())},
        feature_config=fcfg,
        backend=kernel.BACKEND,
        _handle=handle,
        _kernel=kernel,
    )


@dataclass(frozen=True)
class Window:
    """A candidate token window with exact source offsets."""

    start: int
    end: int
    tokens: tuple[str, ...]


def candidate_windows(text: str, max_window: int = 7,
                      feature_config: FeatureConfig = FeatureConfig()) -> list[Window]:
    """All contiguous token windows of length 1..max_window.

    Offsets index the original text; tokens carry the shared normalization.
    """
    lower = feature_config.lowercase
    toks = tokenize_with_offsets(text, strip_punct=feature_config.strip_punct)
    if lower:
        toks = [(t.lower(), s, e) for t, s, e in toks]
    windows = []
    n = len(toks)
    for width in range(1, max_window + 1):
        for i in range(n - width + 1):
            windows.append(
                Window(
                    start=toks[i][1],
                    end=toks[i + width - 1][2],
                    tokens=tuple(t for t, _, _ in toks[i : i + width]),
                )
            )
    return windows


def _window_features(window: Window, fcfg: FeatureConfig) -> frozenset[str]:
    if fcfg.kind is FeatureKind.TOKEN:
        return frozenset(window.tokens)
    return feature_set(" ".join(window.tokens), fcfg).features


def match_candidates(text: str, index: MatchIndex, config: MatcherConfig) -> list[MatchSpan]:
    """Score every candidate window against the index; no overlap resolution.

    Returns all spans with similarity >= threshold, sorted by
    (start, end, matched_term). This is the surface the brute-force oracle is
    compared against.
    """
    if config.feature_config != index.feature_config:
        raise ConfigMismatch(
            f"index built with {index.feature_config}, query uses {config.feature_config}"
        )
    if not text:
        return []
    kernel = index._kernel
    scratch = kernel.make_scratch(index._handle)
    metric_code = METRIC_CODES[config.metric]
    max_size = max(index.size_buckets) if index.size_buckets else 0
    tau = config.threshold

    spans: list[MatchSpan] = []
    fids = index.feature_ids
    for window in candidate_windows(text, config.max_window, config.feature_config):
        feats = _window_features(window, config.feature_config)
        n_q = len(feats)
        if n_q == 0:
            continue
        qfids = sorted(fids[f] for f in feats if f in fids)
        if not qfids:
            continue
        lo, hi = size_bounds(n_q, tau, config.metric, max_size)
        if lo > hi:
            continue
        hits = kernel.match(index._handle, scratch, qfids, n_q, lo, hi, metric_code, tau)
        for tid, score in hits:
            term = index.terms[tid]
            spans.append(
                MatchSpan(
                    start=window.start,
                    end=window.end,
                    surface=text[window.start : window.end],
                    cuis=term.cuis,
                    matched_term=term.term,
                    score=score,
                )
            )
    spans.sort(key=lambda s: (s.start, s.end, s.matched_term))
    return spans


def resolve_overlaps(spans: Sequence[MatchSpan],
                     policy: OverlapPolicy = OverlapPolicy.BEST_SCORE) -> list[MatchSpan]:
    """Reduce spans to a pairwise non-overlapping subset.

    BEST_SCORE prefers higher score, then longer span, then earlier start;
    LONGEST_SPAN prefers longer span, then higher score, then earlier start.
    Input must be sorted by start; output is too.
    """
    if policy is OverlapPolicy.BEST_SCORE:
        def priority(s: MatchSpan):
            return (-s.score, -s.length, s.start, s.end, s.matched_term)
    else:
        def priority(s: MatchSpan):
            return (-s.length, -s.score, s.start, s.end, s.matched_term)

    kept: list[MatchSpan] = []
    for span in sorted(spans, key=priority):
        if all(span.end <= k.start or span.start >= k.end for k in kept):
            kept.append(span)
    kept.sort(key=lambda s: s.start)
    return kept


def extract_concepts(text: str, index: MatchIndex, config: MatcherConfig) -> list[MatchSpan]:
    """Matched concept spans in ``text``: scored, thresholded, overlap-resolved."""
    spans = match_candidates(text, index, config)
    return resolve_overlaps(spans, config.overlap_policy)


class ConceptMatcher:
    """A lexicon bound to a configuration and its prebuilt index.

    Immutable after construction; safe to share across threads.
    """

    def __init__(self, lexicon: ConceptLexicon, config: MatcherConfig | None = None,
                 backend: str | None = None):
        self.lexicon = lexicon
        self.config = config or MatcherConfig()
        self.index = build_index(lexicon, self.config, backend=backend)

    @classmethod
    def for_extraction(cls, lexicon: ConceptLexicon, **overrides) -> "ConceptMatcher":
        """Default extraction setup: token Jaccard at threshold 0.7."""
        return cls(lexicon, MatcherConfig(**overrides) if overrides else MatcherConfig())

    @classmethod
    def for_augmentation(cls, lexicon: ConceptLexicon, threshold: float = 1.0) -> "ConceptMatcher":
        """Exact-match setup used for replacement-slot discovery."""
        return cls(lexicon, MatcherConfig(threshold=threshold))

    def extract(self, text: str) -> list[MatchSpan]:
        return extract_concepts(text, self.index, self.config)

    def candidates(self, text: str) -> list[MatchSpan]:
        return match_candidates(text, self.index, self.config)

    @property
    def backend(self) -> str:
        return self.index.backend
