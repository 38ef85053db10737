"""Span-corruption corpus generation for continued pretraining.

Masked spans are replaced in the input by numbered sentinel tags and emitted
in the target as "sentinel_0 span_0 sentinel_1 span_1 ... sentinel_m", the
standard span-corruption layout, so substituting the target spans back into
the input reproduces the source text exactly. Two policies pick the spans:
random token runs, or concept mentions found by the matcher.

Tokens here are alphanumeric runs, the same unit the matcher indexes, so
concept spans always sit on token boundaries.
"""

from __future__ import annotations

import bisect
import enum
import logging
import math
import random
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .errors import OverlappingSpans, SentinelMismatch
from .notes import ProgressNote, SectionKind
from .seeding import derive_seed
from .textnorm import tokenize_with_offsets

logger = logging.getLogger(__name__)


class MaskPolicy(enum.Enum):
    TOKEN = "token"
    CONCEPT = "concept"


@dataclass(frozen=True)
class MaskConfig:
    policy: MaskPolicy = MaskPolicy.TOKEN
    ratio: float = 0.15
    mean_span_len: int = 3
    sentinel_prefix: str = "<extra_id_"
    seed: int = 0

    def __post_init__(self):
        if not (0.0 <= self.ratio < 1.0):
            raise ValueError(f"ratio must be in [0, 1), got {self.ratio}")
        if self.mean_span_len < 1:
            raise ValueError(f"mean_span_len must be >= 1, got {self.mean_span_len}")
        if not self.sentinel_prefix:
            raise ValueError("sentinel_prefix must be non-empty")


@dataclass(frozen=True)
class MaskedExample:
    source_id: str
    input_text: str
    target_text: str
    mask_count: int
    masked_token_count: int
    total_token_count: int
    policy: str = MaskPolicy.TOKEN.value


def sentinel(prefix: str, k: int) -> str:
    return f"{prefix}{k}>"


def _unmasked(source_id: str, text: str, total: int, policy: MaskPolicy) -> MaskedExample:
    return MaskedExample(
        source_id=source_id,
        input_text=text,
        target_text="",
        mask_count=0,
        masked_token_count=0,
        total_token_count=total,
        policy=policy.value,
    )


def _render(
    source_id: str,
    text: str,
    char_spans: list[tuple[int, int]],
    masked_tokens: int,
    total_tokens: int,
    config: MaskConfig,
) -> MaskedExample:
    """Replace char_spans (sorted, disjoint) with sentinels; build the target."""
    # merge spans that touch so each sentinel hides one contiguous stretch
    merged: list[list[int]] = []
    for s, e in char_spans:
        if merged and s <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], e)
        else:
            merged.append([s, e])

    input_parts = []
    target_parts = []
    prev = 0
    for k, (s, e) in enumerate(merged):
        tag = sentinel(config.sentinel_prefix, k)
        input_parts.append(text[prev:s])
        input_parts.append(tag)
        target_parts.append(tag)
        target_parts.append(text[s:e])
        prev = e
    input_parts.append(text[prev:])
    target_parts.append(sentinel(config.sentinel_prefix, len(merged)))
    return MaskedExample(
        source_id=source_id,
        input_text="".join(input_parts),
        target_text=" ".join(target_parts),
        mask_count=len(merged),
        masked_token_count=masked_tokens,
        total_token_count=total_tokens,
        policy=config.policy.value,
    )


def mask_tokens(
    text: str, config: MaskConfig, seed: int | None = None, *, source_id: str = ""
) -> MaskedExample:
    """Mask random non-adjacent token runs totalling ~ratio of the tokens.

    The masked-token budget is floor(ratio * total); span lengths are a
    random composition of the budget into runs near mean_span_len, separated
    by at least one kept token. Deterministic under the seed.
    """
    if config.policy is not MaskPolicy.TOKEN:
        raise ValueError(f"mask_tokens called with policy {config.policy.value!r}")
    rng = random.Random(config.seed if seed is None else seed)
    tokens = tokenize_with_offsets(text)
    n = len(tokens)
    m = math.floor(config.ratio * n)
    if m == 0:
        return _unmasked(source_id, text, n, config.policy)

    k = min(max(1, round(m / config.mean_span_len)), m)
    while k > 1 and n - m < k - 1:
        k -= 1  # not enough kept tokens to separate k spans

    if k == 1:
        lens = [m]
    else:
        cuts = sorted(rng.sample(range(1, m), k - 1))
        lens = [b - a for a, b in zip([0] + cuts, cuts + [m])]

    spare = n - m - (k - 1)  # kept tokens beyond the mandatory separators
    draws = sorted(rng.randint(0, spare) for _ in range(k))
    gap_parts = (
        [draws[0]]
        + [b - a for a, b in zip(draws, draws[1:])]
        + [spare - draws[-1]]
    )
    gaps = [gap_parts[0]] + [g + 1 for g in gap_parts[1:-1]] + [gap_parts[-1]]

    char_spans = []
    pos = 0
    for gap, length in zip(gaps, lens):
        pos += gap
        char_spans.append((tokens[pos][1], tokens[pos + length - 1][2]))
        pos += length
    return _render(source_id, text, char_spans, m, n, config)


def mask_concepts(
    text: str,
    spans: Sequence,
    config: MaskConfig,
    seed: int | None = None,
    *,
    source_id: str = "",
) -> MaskedExample:
    """Mask concept mentions until ~ratio of the tokens is covered.

    Spans are shuffled deterministically under the seed and taken greedily
    until the covered token count reaches floor(ratio * total) or spans run
    out (a shortfall, which the corpus builder counts). Only characters
    inside the provided spans are ever masked.
    """
    if config.policy is not MaskPolicy.CONCEPT:
        raise ValueError(f"mask_concepts called with policy {config.policy.value!r}")
    ordered = sorted(spans, key=lambda s: s.start)
    for a, b in zip(ordered, ordered[1:]):
        if b.start < a.end:
            raise OverlappingSpans(f"spans [{a.start},{a.end}) and [{b.start},{b.end}) overlap")

    rng = random.Random(config.seed if seed is None else seed)
    tokens = tokenize_with_offsets(text)
    n = len(tokens)
    m = math.floor(config.ratio * n)
    if m == 0 or not ordered:
        return _unmasked(source_id, text, n, config.policy)

    starts = [t[1] for t in tokens]
    ends = [t[2] for t in tokens]

    def token_count(span) -> int:
        lo = bisect.bisect_left(starts, span.start)
        hi = bisect.bisect_right(ends, span.end)
        return max(0, hi - lo)

    shuffled = list(ordered)
    rng.shuffle(shuffled)
    covered = 0
    chosen = []
    for span in shuffled:
        if covered >= m:
            break
        chosen.append(span)
        covered += token_count(span)
    if covered < m:
        logger.debug(
            "%s: concept spans cover %d of %d target tokens", source_id, covered, m
        )
    chosen.sort(key=lambda s: s.start)
    char_spans = [(s.start, s.end) for s in chosen]
    return _render(source_id, text, char_spans, covered, n, config)


def reconstruct(masked: MaskedExample, sentinel_prefix: str = "<extra_id_") -> str:
    """Substitute the target spans back into the input; the exact inverse.

    Raises :class:`SentinelMismatch` when the sentinel sequences of input and
    target disagree with each other or with mask_count.
    """
    if masked.mask_count == 0:
        return masked.input_text
    pattern = re.compile(re.escape(sentinel_prefix) + r"(\d+)>")

    input_hits = list(pattern.finditer(masked.input_text))
    if [int(h.group(1)) for h in input_hits] != list(range(masked.mask_count)):
        raise SentinelMismatch(
            f"input sentinels are not 0..{masked.mask_count - 1} in order"
        )
    target_hits = list(pattern.finditer(masked.target_text))
    if [int(h.group(1)) for h in target_hits] != list(range(masked.mask_count + 1)):
        raise SentinelMismatch(
            f"target sentinels are not 0..{masked.mask_count} in order"
        )
    if target_hits[0].start() != 0 or target_hits[-1].end() != len(masked.target_text):
        raise SentinelMismatch("target does not start and end with a sentinel")

    spans = []
    for cur, nxt in zip(target_hits, target_hits[1:]):
        chunk = masked.target_text[cur.end() : nxt.start()]
        # the render step wraps each span in single joining spaces
        if not (chunk.startswith(" ") and chunk.endswith(" ") and len(chunk) >= 2):
            raise SentinelMismatch("target span is not space-delimited")
        spans.append(chunk[1:-1])

    parts = []
    prev = 0
    for hit, span in zip(input_hits, spans):
        parts.append(masked.input_text[prev : hit.start()])
        parts.append(span)
        prev = hit.end()
    parts.append(masked.input_text[prev:])
    return "".join(parts)


@dataclass
class MaskStats:
    """Mutable counters the corpus builder fills while streaming."""

    emitted: int = 0
    skipped: int = 0
    shortfall: int = 0
    masked_tokens: int = 0
    total_tokens: int = 0


_DAPT_KINDS = (SectionKind.ASSESSMENT, SectionKind.PLAN_SUBSECTION)


def dapt_text(note: ProgressNote) -> str:
    """The assessment and plan content of a note, newline-joined."""
    return "\n".join(s.text for s in note.sections if s.kind in _DAPT_KINDS)


def build_dapt_corpus(
    notes: Iterable[ProgressNote],
    matcher,
    config: MaskConfig,
    stats: MaskStats | None = None,
) -> Iterator[MaskedExample]:
    """One masked example per note over its assessment-and-plan text.

    Per-note seeds derive from (config.seed, note_id), so outputs do not
    depend on processing order. Notes with nothing to mask are skipped and
    counted; per-note failures are logged and never abort the stream.
    """
    if config.policy is MaskPolicy.CONCEPT and matcher is None:
        raise ValueError("the concept policy requires a matcher")
    stats = stats if stats is not None else MaskStats()
    for note in notes:
        text = dapt_text(note)
        if not text.strip():
            stats.skipped += 1
            continue
        seed = derive_seed(config.seed, note.note_id)
        try:
            if config.policy is MaskPolicy.CONCEPT:
                spans = matcher.extract(text)
                example = mask_concepts(text, spans, config, seed, source_id=note.note_id)
            else:
                example = mask_tokens(text, config, seed, source_id=note.note_id)
        except Exception:
            logger.exception("masking failed for note %s; skipped", note.note_id)
            stats.skipped += 1
            continue
        stats.emitted += 1
        stats.masked_tokens += example.masked_token_count
        stats.total_tokens += example.total_token_count
        if example.masked_token_count < math.floor(config.ratio * example.total_token_count):
            stats.shortfall += 1
        yield example
