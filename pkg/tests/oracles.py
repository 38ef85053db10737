"""Independent reference implementations used to cross-check the package.

Everything here is deliberately naive: no pruning, no indexing, no DP row
reuse.  Slow but obviously correct, which is the point.
"""

from collections import defaultdict
from functools import lru_cache
from random import Random

from plsum import candidate_windows, feature_set, load_lexicon, normalize, similarity


def brute_force_matches(text, lexicon, config):
    """All (start, end, matched_term, score) at or above the threshold.

    Scores every candidate window against every distinct normalized surface
    in the lexicon using the public similarity() function only.
    """
    by_norm = defaultdict(set)
    for surface, cui in lexicon.iter_surfaces():
        norm = normalize(surface, config.feature_config)
        if norm:
            by_norm[norm].add(cui)
    term_feats = {
        norm: feature_set(norm, config.feature_config).features for norm in by_norm
    }
    out = set()
    for window in candidate_windows(text, config.max_window, config.feature_config):
        q = feature_set(" ".join(window.tokens), config.feature_config).features
        for norm, y in term_feats.items():
            score = similarity(q, y, config.metric)
            if score >= config.threshold:
                out.add((window.start, window.end, norm, score))
    return out


def lcs_recursive(a, b):
    """Longest common subsequence length via memoized recursion."""

    @lru_cache(maxsize=None)
    def go(i, j):
        if i == len(a) or j == len(b):
            return 0
        if a[i] == b[j]:
            return 1 + go(i + 1, j + 1)
        return max(go(i + 1, j), go(i, j + 1))

    result = go(0, 0)
    go.cache_clear()
    return result


# Small vocabulary so random terms and texts collide often enough to
# exercise near-miss scoring, not just exact hits and clean misses.
MATCH_VOCAB = (
    "acute", "chronic", "severe", "mild", "left", "right", "upper", "lower",
    "renal", "hepatic", "cardiac", "pulmonary", "bowel", "brain", "skin",
    "failure", "injury", "disease", "infection", "pain", "mass", "lesion",
    "edema", "bleed", "rash", "fever", "cough", "nausea", "weakness", "loss",
)


def random_lexicon(rng: Random, max_terms: int):
    """Build a throwaway lexicon of up to max_terms synonym lines."""
    n_terms = rng.randint(1, max_terms)
    lines = []
    seen = set()
    for _ in range(n_terms):
        cui = f"C{rng.randint(0, 39):07d}"
        term = " ".join(
            rng.choice(MATCH_VOCAB) for _ in range(rng.randint(1, 4))
        )
        if (cui, term) in seen:
            continue
        seen.add((cui, term))
        lines.append(f"{cui}\t{term}\tT047\t0")
    if not lines:
        lines.append("C0000001\tpain\tT047\t0")
    return load_lexicon(lines)


def random_text(rng: Random, max_tokens: int):
    """Random token sequence with casing and punctuation noise."""
    n = rng.randint(1, max_tokens)
    parts = []
    for _ in range(n):
        tok = rng.choice(MATCH_VOCAB)
        roll = rng.random()
        if roll < 0.15:
            tok = tok.upper()
        elif roll < 0.3:
            tok = tok.capitalize()
        parts.append(tok + (rng.choice([",", ".", ";"]) if rng.random() < 0.2 else ""))
    return " ".join(parts)
