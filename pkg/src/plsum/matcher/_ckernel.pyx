# cython: language_level=3
# cython: boundscheck=False
# cython: wraparound=False
"""Compiled feature-counting kernel.

Semantics mirror ``plsum.matcher._pykernel`` line for line; both must produce
bit-identical (term_id, score) lists. Keep the arithmetic in the same order
when editing either one.
"""

from libc.math cimport ceil as c_ceil, sqrt as c_sqrt

import numpy as np

BACKEND = "cython"

# keep in sync with _pykernel
cdef double _EPS = 1e-9


class _Handle:
    __slots__ = ("indptr", "indices", "sizes", "n_terms")

    def __init__(self, indptr, indices, sizes):
        self.indptr = indptr
        self.indices = indices
        self.sizes = sizes
        self.n_terms = len(sizes)


def prepare(postings, sizes, n_features):
    """Freeze posting lists into CSR arrays usable by :func:`match`."""
    indptr = np.zeros(n_features + 1, dtype=np.intc)
    flat = []
    total = 0
    for fid in range(n_features):
        tids = postings.get(fid, ())
        total += len(tids)
        indptr[fid + 1] = total
        flat.extend(tids)
    indices = np.asarray(flat, dtype=np.intc) if flat else np.zeros(0, dtype=np.intc)
    return _Handle(indptr, indices, np.asarray(sizes, dtype=np.intc))


def make_scratch(handle):
    """Per-caller workspace; reuse across queries, never across threads."""
    n = handle.n_terms
    return (np.zeros(n, dtype=np.intc), np.zeros(n, dtype=np.intc))


def match(handle, scratch, qfids, int n_q, int lo, int hi, int metric_code, double tau):
    """Count shared features and exact-score candidate terms sized in [lo, hi].

    metric_code: 0 Jaccard, 1 cosine, 2 overlap. Returns (term_id, score)
    pairs with score >= tau, ordered by term id.
    """
    cdef int[::1] indptr = handle.indptr
    cdef int[::1] indices = handle.indices
    cdef int[::1] sizes = handle.sizes
    cdef int[::1] counts = scratch[0]
    cdef int[::1] touched = scratch[1]
    cdef Py_ssize_t n_touched = 0, i
    cdef int fid, tid, ny, c, need, m
    cdef double score
    for fid_obj in qfids:
        fid = fid_obj
        for i in range(indptr[fid], indptr[fid + 1]):
            tid = indices[i]
            ny = sizes[tid]
            if ny < lo or ny > hi:
                continue
            if counts[tid] == 0:
                touched[n_touched] = tid
                n_touched += 1
            counts[tid] += 1
    out = []
    for i in range(n_touched):
        tid = touched[i]
        c = counts[tid]
        counts[tid] = 0
        ny = sizes[tid]
        m = n_q if n_q < ny else ny
        # smallest shared count that could still reach tau; EPS only loosens
        if metric_code == 0:
            need = <int>c_ceil(tau * (n_q + ny) / (1.0 + tau) - _EPS)
        elif metric_code == 1:
            need = <int>c_ceil(tau * c_sqrt(<double>(n_q * ny)) - _EPS)
        else:
            need = <int>c_ceil(tau * m - _EPS)
        if need < 1:
            need = 1
        if c < need:
            continue
        if metric_code == 0:
            score = (<double>c) / (<double>(n_q + ny - c))
        elif metric_code == 1:
            score = (<double>c) / c_sqrt(<double>(n_q * ny))
        else:
            score = (<double>c) / (<double>m)
        if score >= tau:
            out.append((tid, score))
    out.sort()
    return out
