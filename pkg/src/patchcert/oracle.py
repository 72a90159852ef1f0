"""Brute-force ground truth over attacker vote allocations.

Votes are indistinguishable, so allocations are multisets: compositions of a
total into ``num_labels`` non-negative parts, generated by stars and bars.
Nothing here assumes the attacker behaves rationally; allocations may add
votes to the true label too. Only small instances are accepted.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np

from .certifiers import INFEASIBLE
from .errors import OracleTooLargeError
from .geometry import AblationScheme, PatchRegion
from .votes import CleanLevel, SampleVotes, clean_level


@dataclass(frozen=True)
class OracleCaps:
    max_labels: int = 6
    max_q: int = 8
    max_alpha: int = 16
    max_states: int = 2_000_000


DEFAULT_CAPS = OracleCaps()


def allocation_count(q: int, num_labels: int) -> int:
    if q < 0:
        raise ValueError("q must be non-negative")
    return comb(q + num_labels - 1, num_labels - 1)


@lru_cache(maxsize=512)
def compositions(total: int, parts: int) -> np.ndarray:
    """All ways to split ``total`` indistinguishable votes over ``parts`` labels."""
    if parts == 1:
        out = np.array([[total]], dtype=np.int64)
    else:
        rows = []
        slots = total + parts - 1
        for bars in combinations(range(slots), parts - 1):
            prev = -1
            row = []
            for b in bars:
                row.append(b - prev - 1)
                prev = b
            row.append(slots - prev - 1)
            rows.append(row)
        out = np.array(rows, dtype=np.int64).reshape(-1, parts)
    out.flags.writeable = False
    return out


def _alpha_vector(clean: CleanLevel, num_labels: int) -> np.ndarray:
    return np.array([clean.alpha[y] for y in range(num_labels)], dtype=np.int64)


def _check_caps(num_labels: int, alpha_total: int, q: int | None, caps: OracleCaps) -> None:
    if num_labels > caps.max_labels:
        raise OracleTooLargeError(f"{num_labels} labels exceeds cap {caps.max_labels}")
    if alpha_total > caps.max_alpha:
        raise OracleTooLargeError(f"{alpha_total} clean votes exceeds cap {caps.max_alpha}")
    if q is not None and q > caps.max_q:
        raise OracleTooLargeError(f"{q} attacker votes exceeds cap {caps.max_q}")


def _displaced(alpha: np.ndarray, allocs: np.ndarray, y0: int, k: int) -> np.ndarray:
    """Rows where more than k labels (y0 included) reach y0's adjusted votes."""
    gamma = alpha[None, :] + allocs
    return (gamma >= gamma[:, y0:y0 + 1]).sum(axis=1) > k


def oracle_min_push_cost(clean: CleanLevel, y0: int, k: int, num_labels: int | None = None,
                         caps: OracleCaps = DEFAULT_CAPS):
    """Smallest total extra votes that push y0 out of the conservative top-k."""
    L = num_labels or clean.num_labels
    alpha = _alpha_vector(clean, L)
    _check_caps(L, int(alpha.sum()), None, caps)
    if k + 1 > L:
        return INFEASIBLE
    # raising any k labels to y0's clean vote always works, so this bound is safe
    bound = k * int(alpha[y0])
    states = comb(bound + L, L)  # compositions of every total <= bound
    if states > caps.max_states:
        raise OracleTooLargeError(f"cost search needs {states} allocations, cap {caps.max_states}")
    for total in range(bound + 1):
        if _displaced(alpha, compositions(total, L), y0, k).any():
            return total
    raise AssertionError("search bound exhausted")  # unreachable for k < num_labels


def oracle_attack_feasible(sample: SampleVotes, region: PatchRegion, scheme: AblationScheme,
                           k: int, num_labels: int, caps: OracleCaps = DEFAULT_CAPS) -> bool:
    """Can reassigning every overlapped mutant's vote push y0 out of the top-k?"""
    clean = clean_level(sample, region, scheme, num_labels)
    return attack_feasible_at(clean, sample.true_label, k, clean.overlap_count, num_labels, caps)


def attack_feasible_at(clean: CleanLevel, y0: int, k: int, q: int, num_labels: int,
                       caps: OracleCaps = DEFAULT_CAPS) -> bool:
    """Feasibility when exactly ``q`` votes are assigned on top of ``clean``."""
    alpha = _alpha_vector(clean, num_labels)
    _check_caps(num_labels, int(alpha.sum()), q, caps)
    allocs = compositions(q, num_labels)
    gamma = alpha[None, :] + allocs
    others = np.delete(gamma, y0, axis=1)
    return bool(((others >= gamma[:, y0:y0 + 1]).sum(axis=1) >= k).any())
