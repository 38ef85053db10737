"""Concept lexicon: CUI-keyed terms with synonyms, plus match-feature generation.

The lexicon is the synonym-lookup surrogate the rest of the pipeline runs on.
It is loaded once from a TSV stream and is immutable afterwards, so any number
of threads may read it concurrently.

TSV format, one term per line::

    cui<TAB>term<TAB>semantic_type<TAB>is_preferred(0|1)

A small bundled lexicon (:func:`load_toy_lexicon`) ships for demos and tests.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import IO, Iterable, Iterator

from .errors import (
    ConflictingPreferred,
    EmptyAfterNormalization,
    InvalidCui,
    MalformedLine,
)
from .textnorm import tokenize_with_offsets

CUI_PATTERN = re.compile(r"^C\d{7}$")


class FeatureKind(enum.Enum):
    CHARACTER_NGRAM = "char_ngram"
    TOKEN = "token"


@dataclass(frozen=True)
class FeatureConfig:
    """How a term is turned into a feature set for similarity matching."""

    kind: FeatureKind = FeatureKind.TOKEN
    n: int = 3
    lowercase: bool = True
    strip_punct: bool = True
    pad_boundaries: bool = True
    pad_char: str = "#"

    def __post_init__(self):
        if self.kind is FeatureKind.CHARACTER_NGRAM and self.n < 1:
            raise ValueError(f"n-gram width must be >= 1, got {self.n}")


def normalize(text: str, config: FeatureConfig = FeatureConfig()) -> str:
    """Canonical surface form: casefold, strip punctuation, collapse whitespace."""
    s = text.lower() if config.lowercase else text
    if config.strip_punct:
        return " ".join(tok for tok, _, _ in tokenize_with_offsets(s))
    return " ".join(s.split())


@dataclass(frozen=True)
class FeatureSet:
    """The similarity features of one term under one configuration."""

    features: frozenset[str]
    source_term: str
    config: FeatureConfig


def feature_set(term: str, config: FeatureConfig = FeatureConfig()) -> FeatureSet:
    """Build the feature set of ``term``.

    Token mode yields the set of normalized word tokens; character mode yields
    padded character n-grams over the normalized string. Raises
    :class:`EmptyAfterNormalization` when nothing survives normalization.
    """
    norm = normalize(term, config)
    if not norm:
        raise EmptyAfterNormalization(f"term {term!r} is empty after normalization")
    if config.kind is FeatureKind.TOKEN:
        feats = frozenset(norm.split())
    else:
        pad = config.pad_char * (config.n - 1) if config.pad_boundaries else ""
        s = pad + norm + pad
        if len(s) < config.n:
            # short unpadded term: fall back to the whole string as one feature
            feats = frozenset((s,))
        else:
            feats = frozenset(s[i : i + config.n] for i in range(len(s) - config.n + 1))
    return FeatureSet(features=feats, source_term=term, config=config)


@dataclass(frozen=True)
class Concept:
    """One concept: a CUI with its synonym surfaces and semantic types."""

    cui: str
    preferred_term: str
    synonyms: frozenset[str]
    semantic_types: frozenset[str]

    def __post_init__(self):
        if not CUI_PATTERN.match(self.cui):
            raise ValueError(f"cui {self.cui!r} does not match C+7 digits")
        if self.preferred_term not in self.synonyms:
            raise ValueError(f"preferred term of {self.cui} missing from synonyms")


@dataclass(frozen=True)
class ConceptLexicon:
    """Immutable CUI -> Concept map with a normalized-term lookup index."""

    concepts: dict[str, Concept]
    term_index: dict[str, frozenset[str]] = field(repr=False)

    def __len__(self) -> int:
        return len(self.concepts)

    def synonyms_of(self, cui: str) -> list[str]:
        """All synonym surfaces for ``cui``, lexicographically sorted.

        Unknown CUIs return an empty list; lookup never raises.
        """
        concept = self.concepts.get(cui)
        if concept is None:
            return []
        return sorted(concept.synonyms)

    def cuis_for_term(self, term: str) -> frozenset[str]:
        """CUIs whose synonym set contains ``term`` (after normalization)."""
        return self.term_index.get(normalize(term), frozenset())

    def iter_surfaces(self) -> Iterator[tuple[str, str]]:
        """Yield (surface, cui) for every synonym of every concept."""
        for cui in sorted(self.concepts):
            for surface in sorted(self.concepts[cui].synonyms):
                yield surface, cui


def synonyms_of(lexicon: ConceptLexicon, cui: str) -> list[str]:
    return lexicon.synonyms_of(cui)


def _iter_lines(source: str | Path | IO[str] | Iterable[str]) -> Iterator[str]:
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            yield from fh
    else:
        yield from source


def load_lexicon(source: str | Path | IO[str] | Iterable[str]) -> ConceptLexicon:
    """Load a :class:`ConceptLexicon` from TSV lines.

    Lines are grouped by CUI; exact duplicate (cui, term) lines are
    deduplicated. Blank lines and ``#`` comments are skipped. The result is
    independent of line order.
    """
    terms: dict[str, set[str]] = {}
    types: dict[str, set[str]] = {}
    preferred: dict[str, str] = {}

    for line_no, raw in enumerate(_iter_lines(source), start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise MalformedLine(line_no, f"expected 4 tab-separated fields, got {len(parts)}")
        cui, term, sem_type, pref = (p.strip() for p in parts)
        if not CUI_PATTERN.match(cui):
            raise InvalidCui(line_no, cui)
        if not term:
            raise MalformedLine(line_no, "empty term")
        if pref not in ("0", "1"):
            raise MalformedLine(line_no, f"is_preferred must be 0 or 1, got {pref!r}")
        terms.setdefault(cui, set()).add(term)
        if sem_type:
            types.setdefault(cui, set()).add(sem_type)
        if pref == "1":
            if cui in preferred and preferred[cui] != term:
                raise ConflictingPreferred(cui)
            preferred[cui] = term

    concepts: dict[str, Concept] = {}
    term_index: dict[str, set[str]] = {}
    for cui in sorted(terms):
        synonyms = frozenset(terms[cui])
        concepts[cui] = Concept(
            cui=cui,
            preferred_term=preferred.get(cui, min(synonyms)),
            synonyms=synonyms,
            semantic_types=frozenset(types.get(cui, ())),
        )
        for surface in synonyms:
            norm = normalize(surface)
            if norm:
                term_index.setdefault(norm, set()).add(cui)

    return ConceptLexicon(
        concepts=concepts,
        term_index={t: frozenset(cs) for t, cs in term_index.items()},
    )


def load_toy_lexicon() -> ConceptLexicon:
    """The bundled ~50-concept demo lexicon."""
    ref = resources.files("plsum").joinpath("data/toy_lexicon.tsv")
    with ref.open("r", encoding="utf-8") as fh:
        return load_lexicon(fh)
