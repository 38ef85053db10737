"""Data engineering and evaluation toolkit for clinical problem-list summarization.

Builds task examples from SOAP-style progress notes, finds concept mentions
by approximate lexicon matching, generates synonym-replacement training pairs
and span-corruption pretraining corpora, runs a rule-based baseline, and
scores summaries with ROUGE-L, concept-id F, and cosine metrics across the
Explicit/Direct/Indirect/All subgroups.
"""

from .augment import (
    AugConfig,
    AugmentedPair,
    QualityReport,
    ReplacementSlot,
    augment_example,
    enumerate_variants,
    plan_slots,
    quality_report,
)
from .baseline import rule_based_summarize, summarize_note
from .errors import PlsumError
from .lexicon import (
    Concept,
    ConceptLexicon,
    FeatureConfig,
    FeatureKind,
    FeatureSet,
    feature_set,
    load_lexicon,
    load_toy_lexicon,
    normalize,
    synonyms_of,
)
from .masking import (
    MaskConfig,
    MaskedExample,
    MaskPolicy,
    build_dapt_corpus,
    mask_concepts,
    mask_tokens,
    reconstruct,
)
from .matcher import (
    ConceptMatcher,
    MatcherConfig,
    MatchIndex,
    MatchSpan,
    Metric,
    OverlapPolicy,
    build_index,
    candidate_windows,
    extract_concepts,
    kernel_backend,
    match_candidates,
    resolve_overlaps,
    similarity,
)
from .metrics import (
    EvalReport,
    PrfScore,
    cui_f,
    eval_tokenize,
    evaluate_corpus,
    partition_subgroups,
    rouge_l,
    sent_cosine,
)
from .notes import (
    InputMode,
    PlanAnnotation,
    ProblemLabel,
    ProgressNote,
    ReferenceSummary,
    Section,
    SectionKind,
    TaskExample,
    build_reference_summary,
    build_task_example,
    parse_progress_note,
)
from .synth import generate_synthetic_corpus

__version__ = "0.1.0"

__all__ = [
    "AugConfig",
    "AugmentedPair",
    "Concept",
    "ConceptLexicon",
    "ConceptMatcher",
    "EvalReport",
    "FeatureConfig",
    "FeatureKind",
    "FeatureSet",
    "InputMode",
    "MaskConfig",
    "MaskedExample",
    "MaskPolicy",
    "MatcherConfig",
    "MatchIndex",
    "MatchSpan",
    "Metric",
    "OverlapPolicy",
    "PlanAnnotation",
    "PlsumError",
    "PrfScore",
    "ProblemLabel",
    "ProgressNote",
    "QualityReport",
    "ReferenceSummary",
    "ReplacementSlot",
    "Section",
    "SectionKind",
    "TaskExample",
    "augment_example",
    "build_dapt_corpus",
    "build_index",
    "build_reference_summary",
    "build_task_example",
    "candidate_windows",
    "cui_f",
    "enumerate_variants",
    "eval_tokenize",
    "evaluate_corpus",
    "extract_concepts",
    "feature_set",
    "generate_synthetic_corpus",
    "kernel_backend",
    "load_lexicon",
    "load_toy_lexicon",
    "mask_concepts",
    "mask_tokens",
    "match_candidates",
    "normalize",
    "parse_progress_note",
    "partition_subgroups",
    "plan_slots",
    "quality_report",
    "reconstruct",
    "resolve_overlaps",
    "rouge_l",
    "rule_based_summarize",
    "sent_cosine",
    "similarity",
    "summarize_note",
    "synonyms_of",
    "__version__",
]
