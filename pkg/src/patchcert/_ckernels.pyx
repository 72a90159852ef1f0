# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-region min-k kernels.

Clean votes are bucketed by value (``hist[v]`` = number of labels holding
exactly ``v`` clean votes), so both analyses reduce to walks over at most
``num_mutants + 1`` buckets per region. Regions are visited by applying and
then undoing each overlap window, which keeps the state O(num_mutants).
"""
import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free

cnp.import_array()


cdef int _sample_regions(const int* labels, Py_ssize_t n, int true_label, long L,
                         const long long* starts, const long long* lengths,
                         const long long* budget, Py_ssize_t R,
                         int* comp, int* ids, long long* alpha, long long* hist,
                         long long* cc_out, long long* s2_out) noexcept nogil:
    cdef Py_ssize_t i, j, r
    cdef int c, d = 0, y0
    cdef long long a0, q, B, cnt, g, h, cum, sel, res, need, thr, unvoted, v, t

    for i in range(n):
        c = comp[labels[i]]
        if c < 0:
            c = d
            comp[labels[i]] = c
            alpha[c] = 0
            d += 1
        ids[i] = c
        alpha[c] += 1
    if comp[true_label] < 0:
        comp[true_label] = d
        alpha[d] = 0
        d += 1
    y0 = comp[true_label]
    unvoted = L - d

    for i in range(n + 1):
        hist[i] = 0
    for c in range(d):
        hist[alpha[c]] += 1

    for r in range(R):
        q = lengths[r]
        for j in range(q):
            c = ids[(starts[r] + j) % n]
            hist[alpha[c]] -= 1
            alpha[c] -= 1
            hist[alpha[c]] += 1

        a0 = alpha[y0]
        B = budget[r]

        if a0 == 0:
            res = L
        else:
            cnt = 0
            v = a0
            while v <= n:
                cnt += hist[v]
                v += 1
            # cnt is the conservative rank of the true label
            res = -1
            cum = 0
            sel = 0
            v = a0 - 1
            while v >= 0 and res < 0:
                h = hist[v]
                if v == 0:
                    h += unvoted
                if h > 0:
                    g = a0 - v
                    if cum + h * g > B:
                        t = (B - cum) // g + 1
                        res = cnt - 1 + sel + t
                    else:
                        cum += h * g
                        sel += h
                v -= 1
            if res < 0 or res > L:
                res = L
        cc_out[r] = res

        thr = a0 - q
        if thr <= 0:
            res = L
        else:
            cnt = 0
            v = thr
            while v <= n:
                cnt += hist[v]
                v += 1
            res = cnt  # (cnt - 1) other labels, plus one
            if res > L:
                res = L
        s2_out[r] = res

        for j in range(q):
            c = ids[(starts[r] + j) % n]
            hist[alpha[c]] -= 1
            alpha[c] += 1
            hist[alpha[c]] += 1

    for i in range(n):
        comp[labels[i]] = -1
    comp[true_label] = -1
    return 0


def region_minks(labels, int true_label, long num_labels, starts, lengths, budget):
    """Per-region min-k for the cost analysis and the bound analysis."""
    cdef cnp.ndarray[int, ndim=1, mode="c"] lab = np.ascontiguousarray(labels, dtype=np.intc)
    cdef cnp.ndarray[long long, ndim=1, mode="c"] st = np.ascontiguousarray(starts, dtype=np.longlong)
    cdef cnp.ndarray[long long, ndim=1, mode="c"] ln = np.ascontiguousarray(lengths, dtype=np.longlong)
    cdef cnp.ndarray[long long, ndim=1, mode="c"] bu = np.ascontiguousarray(budget, dtype=np.longlong)
    cdef Py_ssize_t n = lab.shape[0], R = st.shape[0]
    cdef cnp.ndarray[long long, ndim=1, mode="c"] cc = np.empty(R, dtype=np.longlong)
    cdef cnp.ndarray[long long, ndim=1, mode="c"] s2 = np.empty(R, dtype=np.longlong)
    cdef cnp.ndarray[int, ndim=1, mode="c"] comp = np.full(num_labels, -1, dtype=np.intc)
    cdef cnp.ndarray[int, ndim=1, mode="c"] ids = np.empty(max(n, 1), dtype=np.intc)
    cdef cnp.ndarray[long long, ndim=1, mode="c"] alpha = np.empty(n + 1, dtype=np.longlong)
    cdef cnp.ndarray[long long, ndim=1, mode="c"] hist = np.empty(n + 1, dtype=np.longlong)
    if n == 0:
        raise ValueError("sample has no mutants")
    with nogil:
        _sample_regions(&lab[0], n, true_label, num_labels, &st[0], &ln[0], &bu[0], R,
                        &comp[0], &ids[0], &alpha[0], &hist[0], &cc[0], &s2[0])
    return cc.astype(np.int64), s2.astype(np.int64)


def sample_minks(label_matrix, true_labels, long num_labels, starts, lengths, budget):
    """Max over regions of ``region_minks`` for every row of ``label_matrix``."""
    cdef cnp.ndarray[int, ndim=2, mode="c"] lab = np.ascontiguousarray(label_matrix, dtype=np.intc)
    cdef cnp.ndarray[int, ndim=1, mode="c"] y = np.ascontiguousarray(true_labels, dtype=np.intc)
    cdef cnp.ndarray[long long, ndim=1, mode="c"] st = np.ascontiguousarray(starts, dtype=np.longlong)
    cdef cnp.ndarray[long long, ndim=1, mode="c"] ln = np.ascontiguousarray(lengths, dtype=np.longlong)
    cdef cnp.ndarray[long long, ndim=1, mode="c"] bu = np.ascontiguousarray(budget, dtype=np.longlong)
    cdef Py_ssize_t S = lab.shape[0], n = lab.shape[1], R = st.shape[0], s, r
    cdef cnp.ndarray[long long, ndim=1, mode="c"] cc = np.empty(S, dtype=np.longlong)
    cdef cnp.ndarray[long long, ndim=1, mode="c"] s2 = np.empty(S, dtype=np.longlong)
    cdef cnp.ndarray[int, ndim=1, mode="c"] comp = np.full(num_labels, -1, dtype=np.intc)
    cdef cnp.ndarray[int, ndim=1, mode="c"] ids = np.empty(max(n, 1), dtype=np.intc)
    cdef cnp.ndarray[long long, ndim=1, mode="c"] alpha = np.empty(n + 1, dtype=np.longlong)
    cdef cnp.ndarray[long long, ndim=1, mode="c"] hist = np.empty(n + 1, dtype=np.longlong)
    cdef long long* rcc = <long long*> malloc(max(R, 1) * sizeof(long long))
    cdef long long* rs2 = <long long*> malloc(max(R, 1) * sizeof(long long))
    cdef long long mc, ms
    if rcc == NULL or rs2 == NULL:
        free(rcc)
        free(rs2)
        raise MemoryError()
    if S and n == 0:
        raise ValueError("samples have no mutants")
    try:
        with nogil:
            for s in range(S):
                _sample_regions(&lab[s, 0], n, y[s], num_labels, &st[0], &ln[0], &bu[0], R,
                                &comp[0], &ids[0], &alpha[0], &hist[0], rcc, rs2)
                mc = 1
                ms = 1
                for r in range(R):
                    if rcc[r] > mc:
                        mc = rcc[r]
                    if rs2[r] > ms:
                        ms = rs2[r]
                cc[s] = mc
                s2[s] = ms
    finally:
        free(rcc)
        free(rs2)
    return cc.astype(np.int64), s2.astype(np.int64)
