"""Pure-Python feature-counting kernel.

Fallback for environments without the compiled extension. The compiled twin
is ``plsum.matcher._ckernel``; both must produce bit-identical
(term_id, score) lists for the same inputs, so keep the arithmetic in the
same order when editing either one.
"""

from __future__ import annotations

import math

BACKEND = "python"

# keep in sync with _ckernel.pyx
_EPS = 1e-9


class _Handle:
    __slots__ = ("postings", "sizes", "n_terms")

    def __init__(self, postings, sizes):
        self.postings = postings
        self.sizes = sizes
        self.n_terms = len(sizes)


def prepare(postings: dict[int, list[int]], sizes: list[int], n_features: int) -> _Handle:
    """Freeze posting lists into a handle usable by :func:`match`."""
    table = [tuple(postings.get(fid, ())) for fid in range(n_features)]
    return _Handle(table, tuple(sizes))


def make_scratch(handle: _Handle):
    """Per-caller workspace; reuse across queries, never across threads."""
    return ([0] * handle.n_terms, [])


def match(handle, scratch, qfids, n_q, lo, hi, metric_code, tau):
    """Count shared features and exact-score candidate terms sized in [lo, hi].

    metric_code: 0 Jaccard, 1 cosine, 2 overlap. Returns (term_id, score)
    pairs with score >= tau, ordered by term id.
    """
    postings = handle.postings
    sizes = handle.sizes
    counts, touched = scratch
    for fid in qfids:
        for tid in postings[fid]:
            ny = sizes[tid]
            if ny < lo or ny > hi:
                continue
            if counts[tid] == 0:
                touched.append(tid)
            counts[tid] += 1
    out = []
    for tid in touched:
        c = counts[tid]
        counts[tid] = 0
        ny = sizes[tid]
        m = n_q if n_q < ny else ny
        # smallest shared count that could still reach tau; EPS only loosens
        if metric_code == 0:
            need = math.ceil(tau * (n_q + ny) / (1.0 + tau) - _EPS)
        elif metric_code == 1:
            need = math.ceil(tau * math.sqrt(n_q * ny) - _EPS)
        else:
            need = math.ceil(tau * m - _EPS)
        if need < 1:
            need = 1
        if c < need:
            continue
        if metric_code == 0:
            score = c / (n_q + ny - c)
        elif metric_code == 1:
            score = c / math.sqrt(n_q * ny)
        else:
            score = c / m
        if score >= tau:
            out.append((tid, score))
    touched.clear()
    out.sort()
    return out
