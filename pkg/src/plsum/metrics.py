"""Summary scoring: ROUGE-L, CUI F-score, cosine similarity, subgroups.

Predictions are scored against four views of each reference: the Direct
problems, the Indirect problems, the full problem list (All), and the
Explicit subset, i.e. the problems whose concepts also occur in the input
text. Embedding cosine is computed only from externally supplied vectors;
the toolkit never embeds text itself.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass

from .errors import DimensionMismatch, ZeroVector
from .notes import TaskExample

logger = logging.getLogger(__name__)

_EVAL_TOKEN = re.compile(r"[a-z0-9]+")

SUBGROUPS = ("explicit", "direct", "indirect", "all")


@dataclass(frozen=True)
class PrfScore:
    precision: float
    recall: float
    f1: float

    def __post_init__(self):
        for name in ("precision", "recall", "f1"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValueError(f"{name} out of [0, 1]: {v}")

    @classmethod
    def from_pr(cls, precision: float, recall: float) -> "PrfScore":
        denom = precision + recall
        f1 = 2.0 * precision * recall / denom if denom > 0 else 0.0
        return cls(precision=precision, recall=recall, f1=f1)


ZERO_SCORE = PrfScore(0.0, 0.0, 0.0)


def eval_tokenize(text: str) -> list[str]:
    """Lowercase and split on non-alphanumeric runs; drops all punctuation."""
    return _EVAL_TOKEN.findall(text.lower())


def rouge_l(ref_tokens: list[str], pred_tokens: list[str]) -> PrfScore:
    """LCS-based precision/recall/F1. Empty reference or prediction scores 0."""
    if not ref_tokens or not pred_tokens:
        return ZERO_SCORE
    # two-row LCS table over (ref x pred)
    prev = [0] * (len(pred_tokens) + 1)
    for r_tok in ref_tokens:
        cur = [0]
        for j, p_tok in enumerate(pred_tokens, start=1):
            if r_tok == p_tok:
                cur.append(prev[j - 1] + 1)
            else:
                cur.append(max(prev[j], cur[j - 1]))
        prev = cur
    lcs = prev[-1]
    return PrfScore.from_pr(lcs / len(pred_tokens), lcs / len(ref_tokens))


def cui_f(ref_cuis: set[str], pred_cuis: set[str]) -> PrfScore:
    """Set-overlap F over concept ids. Both sides empty scores a perfect 1."""
    if not ref_cuis and not pred_cuis:
        return PrfScore(1.0, 1.0, 1.0)
    inter = len(ref_cuis & pred_cuis)
    precision = inter / len(pred_cuis) if pred_cuis else 0.0
    recall = inter / len(ref_cuis) if ref_cuis else 0.0
    return PrfScore.from_pr(precision, recall)


def sent_cosine(u, v) -> float:
    """Cosine similarity of two equal-dimension nonzero vectors."""
    if len(u) != len(v):
        raise DimensionMismatch(f"dimensions {len(u)} and {len(v)} differ")
    dot = sum(a * b for a, b in zip(u, v))
    nu = math.sqrt(sum(a * a for a in u))
    nv = math.sqrt(sum(b * b for b in v))
    if nu == 0.0 or nv == 0.0:
        raise ZeroVector("cosine similarity is undefined for a zero vector")
    return dot / (nu * nv)


def _text_cuis(text: str, matcher) -> set[str]:
    cuis: set[str] = set()
    for span in matcher.extract(text):
        cuis |= span.cuis
    return cuis


def partition_subgroups(example: TaskExample, matcher) -> dict[str, str]:
    """The four reference views of one example, each rendered with "; ".

    Explicit keeps the problems (in reference order) whose extracted concept
    ids intersect the ids extracted from the input text; it is always a
    subsequence of All. Views may be empty.
    """
    reference = example.reference
    problems = list(reference.direct) + list(reference.indirect)
    input_cuis = _text_cuis(example.input_text, matcher)
    explicit = [p for p in problems if _text_cuis(p, matcher) & input_cuis]
    return {
        "explicit": "; ".join(explicit),
        "direct": "; ".join(reference.direct),
        "indirect": "; ".join(reference.indirect),
        "all": reference.text,
    }


@dataclass(frozen=True)
class SubgroupScores:
    rouge_l: PrfScore
    cui: PrfScore
    sent_cosine: float | None
    n_examples: int


@dataclass(frozen=True)
class EvalReport:
    """Per-subgroup macro-averaged scores plus the matcher settings used."""

    subgroups: dict[str, SubgroupScores]
    matcher_metric: str
    matcher_threshold: float
    n_missing_predictions: int = 0

    def to_json_dict(self) -> dict:
        return {
            "matcher": {
                "metric": self.matcher_metric,
                "threshold": self.matcher_threshold,
            },
            "missing_predictions": self.n_missing_predictions,
            "subgroups": {
                name: {
                    "rouge_l": {
                        "precision": s.rouge_l.precision,
                        "recall": s.rouge_l.recall,
                        "f1": s.rouge_l.f1,
                    },
                    "cui": {
                        "precision": s.cui.precision,
                        "recall": s.cui.recall,
                        "f1": s.cui.f1,
                    },
                    "sent_cosine": s.sent_cosine,
                    "n_examples": s.n_examples,
                }
                for name, s in self.subgroups.items()
            },
        }


def _mean_prf(scores: list[PrfScore]) -> PrfScore:
    n = len(scores)
    if n == 0:
        return ZERO_SCORE
    return PrfScore(
        precision=sum(s.precision for s in scores) / n,
        recall=sum(s.recall for s in scores) / n,
        f1=sum(s.f1 for s in scores) / n,
    )


def evaluate_corpus(
    references: list[TaskExample],
    predictions: dict[str, str],
    matcher,
    vectors: dict[str, tuple[float, ...]] | None = None,
) -> EvalReport:
    """Score predictions against every subgroup view, macro-averaged.

    An example contributes to a subgroup when its view is non-empty; a
    missing prediction is scored as the empty string and counted. Cosine for
    subgroup S averages over examples where vectors hold both
    "pred:{note_id}" and "ref:{S}:{note_id}" (for All, "ref:{note_id}" also
    works); the field is None when no example had both.
    """
    per_group: dict[str, dict[str, list]] = {
        name: {"rouge": [], "cui": [], "cos": []} for name in SUBGROUPS
    }
    missing = 0
    for example in references:
        if example.note_id not in predictions:
            missing += 1
            logger.warning("no prediction for %s; scoring empty", example.note_id)
        pred_text = predictions.get(example.note_id, "")
        pred_tokens = eval_tokenize(pred_text)
        pred_cuis = _text_cuis(pred_text, matcher)
        views = partition_subgroups(example, matcher)
        for name in SUBGROUPS:
            view = views[name]
            if not view:
                continue
            bucket = per_group[name]
            bucket["rouge"].append(rouge_l(eval_tokenize(view), pred_tokens))
            bucket["cui"].append(cui_f(_text_cuis(view, matcher), pred_cuis))
            if vectors is not None:
                ref_key = f"ref:{name}:{example.note_id}"
                if name == "all" and ref_key not in vectors:
                    ref_key = f"ref:{example.note_id}"
                pred_key = f"pred:{example.note_id}"
                if ref_key in vectors and pred_key in vectors:
                    bucket["cos"].append(sent_cosine(vectors[ref_key], vectors[pred_key]))

    subgroups = {}
    for name in SUBGROUPS:
        bucket = per_group[name]
        cosines = bucket["cos"]
        subgroups[name] = SubgroupScores(
            rouge_l=_mean_prf(bucket["rouge"]),
            cui=_mean_prf(bucket["cui"]),
            sent_cosine=(sum(cosines) / len(cosines)) if cosines else None,
            n_examples=len(bucket["rouge"]),
        )
    config = matcher.config
    return EvalReport(
        subgroups=subgroups,
        matcher_metric=config.metric.value,
        matcher_threshold=config.threshold,
        n_missing_predictions=missing,
    )
