"""Pure numpy implementation of the per-region min-k kernels.

Selected automatically when the compiled ``_ckernels`` extension is missing.
It works per sample, vectorised across patch regions, and sorts clean votes
instead of bucketing them, so it also serves as an independent cross-check of
the compiled path.
"""
from __future__ import annotations

import numpy as np


def _window_counts(codes: np.ndarray, num_codes: int, starts: np.ndarray,
                   lengths: np.ndarray) -> np.ndarray:
    """Per-region vote counts of the overlapped mutants, shape (R, D)."""
    n = codes.shape[0]
    onehot = np.zeros((2 * n + 1, num_codes), dtype=np.int64)
    doubled = np.concatenate([codes, codes])
    onehot[np.arange(1, 2 * n + 1), doubled] = 1
    prefix = np.cumsum(onehot, axis=0)
    return prefix[starts + lengths] - prefix[starts]


def region_minks(labels, true_label: int, num_labels: int, starts, lengths, budget):
    """Per-region min-k for the cost analysis and the bound analysis.

    Returns two int64 arrays of length R. Neither includes the requirement that
    the unattacked prediction already ranks the true label in the top k.
    """
    labels = np.asarray(labels, dtype=np.int64)
    starts = np.asarray(starts, dtype=np.int64)
    lengths = np.asarray(lengths, dtype=np.int64)
    budget = np.asarray(budget, dtype=np.int64)
    L = int(num_labels)

    uniq, codes = np.unique(labels, return_inverse=True)
    pos = np.searchsorted(uniq, true_label)
    if pos < uniq.shape[0] and uniq[pos] == true_label:
        y0 = int(pos)
    else:
        uniq = np.append(uniq, true_label)
        y0 = uniq.shape[0] - 1
    d = uniq.shape[0]
    unvoted = L - d

    total = np.bincount(codes, minlength=d).astype(np.int64)
    alpha = total[None, :] - _window_counts(codes, d, starts, lengths)
    a0 = alpha[:, y0]

    # cost analysis: sorted gaps of labels strictly below the true label
    n = (alpha >= a0[:, None]).sum(axis=1)
    gaps = np.where(alpha < a0[:, None], a0[:, None] - alpha, np.iinfo(np.int64).max)
    gaps.sort(axis=1)
    ncand = d - n
    col = np.arange(d)[None, :]
    cum = np.cumsum(np.where(col < ncand[:, None], gaps, 0), axis=1)
    over = (cum > budget[:, None]) & (col < ncand[:, None])
    hit = over.any(axis=1)
    first = np.argmax(over, axis=1)
    cc = np.where(hit, n + first, L)  # n - 1 + (first + 1) selected labels

    # voted candidates exhausted: fill with never-voted labels at gap a0
    spent = np.where(ncand > 0, cum[np.arange(cum.shape[0]), np.maximum(ncand - 1, 0)], 0)
    safe_a0 = np.maximum(a0, 1)
    extra = (budget - spent) // safe_a0 + 1
    tail_ok = (~hit) & (a0 > 0) & (extra <= unvoted)
    cc = np.where(tail_ok, n - 1 + ncand + extra, cc)
    cc = np.where(a0 == 0, L, cc)
    cc = np.minimum(cc, L)

    # bound analysis: other labels whose upper bound reaches the lower bound
    thresh = a0 - lengths
    kp = (alpha >= thresh[:, None]).sum(axis=1) - 1
    kp = np.where(thresh <= 0, L - 1, kp)
    s2 = np.minimum(kp + 1, L)
    return cc.astype(np.int64), s2.astype(np.int64)


def sample_minks(label_matrix, true_labels, num_labels: int, starts, lengths, budget):
    """Max over regions of ``region_minks`` for every row of ``label_matrix``."""
    label_matrix = np.asarray(label_matrix)
    s = label_matrix.shape[0]
    cc = np.empty(s, dtype=np.int64)
    s2 = np.empty(s, dtype=np.int64)
    for i in range(s):
        a, b = region_minks(label_matrix[i], int(true_labels[i]), num_labels,
                            starts, lengths, budget)
        cc[i] = a.max() if a.size else 1
        s2[i] = b.max() if b.size else 1
    return cc, s2
