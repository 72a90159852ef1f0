"""Backend selection for the hot per-region kernels.

The compiled extension is used when importable; ``PATCHCERT_BACKEND=python``
forces the numpy fallback. ``PATCHCERT_THREADS`` sets the worker count for
dataset-level calls (0 or unset means one per CPU).
"""
from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _kernels_py

log = logging.getLogger(__name__)

try:
    from . import _ckernels
except ImportError:  # pragma: no cover - depends on the build
    _ckernels = None

BACKENDS = {"python": _kernels_py}
if _ckernels is not None:
    BACKENDS["compiled"] = _ckernels

_requested = os.environ.get("PATCHCERT_BACKEND", "").strip().lower()
if _requested and _requested not in BACKENDS:
    log.warning("backend %r unavailable, using default", _requested)
    _requested = ""
BACKEND = _requested or ("compiled" if _ckernels is not None else "python")
_impl = BACKENDS[BACKEND]


def num_threads() -> int:
    raw = os.environ.get("PATCHCERT_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


def region_minks(labels, true_label, num_labels, starts, lengths, budget, backend=None):
    impl = BACKENDS[backend] if backend else _impl
    return impl.region_minks(labels, int(true_label), int(num_labels), starts, lengths, budget)


def sample_minks(label_matrix, true_labels, num_labels, starts, lengths, budget,
                 backend=None, threads=None):
    """Per-sample maximum region min-k for both analyses, as two int64 arrays."""
    impl = BACKENDS[backend] if backend else _impl
    label_matrix = np.asarray(label_matrix)
    true_labels = np.asarray(true_labels)
    threads = threads or num_threads()
    s = label_matrix.shape[0]
    # only the compiled path releases the GIL
    if threads <= 1 or s < 2 * threads or impl is _kernels_py:
        return impl.sample_minks(label_matrix, true_labels, int(num_labels),
                                 starts, lengths, budget)
    bounds = np.linspace(0, s, threads + 1, dtype=int)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(
            lambda ab: impl.sample_minks(label_matrix[ab[0]:ab[1]], true_labels[ab[0]:ab[1]],
                                         int(num_labels), starts, lengths, budget),
            zip(bounds[:-1], bounds[1:]),
        ))
    return (np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts]))
