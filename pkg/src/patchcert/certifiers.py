"""Certification analyzers: CostCert and the two bound-comparison baselines.

All arithmetic is on exact integers. Certification always assumes the true
label loses every tie; the operational tie-break in ``ranked_prediction`` is
only consulted for the "already top-k correct" conjunct.
"""
from __future__ import annotations

import enum
import functools
from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import InvalidKError
from .geometry import (
    AblationScheme,
    PatchRegion,
    PatchSpec,
    build_patch_regions,
    compute_delta,
    region_windows,
)
from .votes import CleanLevel, SampleVotes, clean_level, prediction_rank, vote_confidence


@functools.total_ordering
class _Infeasible:
    """Tie cost when no allocation can displace the true label; beats any budget."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __eq__(self, other):
        return other is self

    def __lt__(self, other):
        return False

    def __hash__(self):
        return hash("INFEASIBLE")

    def __repr__(self):
        return "INFEASIBLE"

    def __reduce__(self):
        return (_Infeasible, ())


INFEASIBLE = _Infeasible()
TieCost = "int | _Infeasible"


class Analyzer(str, enum.Enum):
    COSTCERT = "costcert"
    STRATEGY1 = "strategy1"
    STRATEGY2 = "strategy2"


class BudgetMode(str, enum.Enum):
    GLOBAL = "global"
    PER_PATCH = "per-patch"


@dataclass(frozen=True)
class CertOutcome:
    analyzer: Analyzer
    k: int
    certified: bool
    mink: int
    per_patch_costs: dict | None = field(default=None, compare=False)
    binding_region: PatchRegion | None = None


def _num_labels(clean: CleanLevel, num_labels: int | None) -> int:
    n = num_labels or clean.num_labels
    if not n:
        raise ValueError("num_labels is required")
    return n


def conservative_rank_n(clean: CleanLevel, y0: int, num_labels: int | None = None) -> int:
    """Labels (y0 included) whose clean vote is at least the true label's."""
    L = _num_labels(clean, num_labels)
    a0 = clean.alpha[y0]
    if a0 == 0:
        return L
    return sum(1 for y in clean.alpha if clean.alpha[y] >= a0)


def _candidates(clean: CleanLevel, y0: int, L: int) -> tuple[list[int], int]:
    """Clean votes strictly below y0's, largest first, and the count of zeros among them."""
    a0 = clean.alpha[y0]
    voted = sorted((v for y, v in clean.alpha.items() if 0 < v < a0), reverse=True)
    zeros = L - len(clean.alpha) if a0 > 0 else 0
    return voted, zeros


def smallest_tie_cost(clean: CleanLevel, y0: int, k: int, num_labels: int | None = None):
    """Fewest extra votes that give k+1 labels (y0 included) at least y0's clean vote."""
    L = _num_labels(clean, num_labels)
    if not 1 <= k < L:
        raise InvalidKError(f"k must be in [1, {L - 1}], got {k}")
    n = conservative_rank_n(clean, y0, L)
    if n - 1 >= k:
        return 0
    need = k - n + 1
    voted, zeros = _candidates(clean, y0, L)
    if need > len(voted) + zeros:
        return INFEASIBLE
    chosen = voted[:need]
    chosen_sum = sum(chosen)  # the remaining need - len(chosen) picks are zeros
    return need * clean.alpha[y0] - chosen_sum


def _budgets(scheme: AblationScheme, patch: PatchSpec, budget: BudgetMode) -> np.ndarray:
    _, lengths = region_windows(scheme, patch)
    if BudgetMode(budget) is BudgetMode.PER_PATCH:
        return np.array(lengths, dtype=np.int64)
    return np.full(lengths.shape, compute_delta(scheme, patch), dtype=np.int64)


def _check_k(k: int, L: int, *, allow_full: bool) -> None:
    hi = L if allow_full else L - 1
    if not 1 <= k <= hi:
        raise InvalidKError(f"k must be in [1, {hi}], got {k}")


def _region_minks(sample, scheme, patch, num_labels, budget, backend=None):
    starts, lengths = region_windows(scheme, patch)
    return kernels.region_minks(sample.mutant_labels, sample.true_label, num_labels,
                                starts, lengths, _budgets(scheme, patch, budget),
                                backend=backend)


def true_label_rank(sample: SampleVotes) -> int:
    return prediction_rank(vote_confidence(sample), sample.true_label)


def costcert_mink(sample: SampleVotes, scheme: AblationScheme, patch: PatchSpec,
                  num_labels: int, budget: BudgetMode = BudgetMode.GLOBAL,
                  backend: str | None = None) -> int:
    """Smallest k at which CostCert certifies; ``num_labels`` means trivial."""
    cc, _ = _region_minks(sample, scheme, patch, num_labels, budget, backend)
    return min(max(int(cc.max()), true_label_rank(sample)), num_labels)


def costcert_certify(sample: SampleVotes, scheme: AblationScheme, patch: PatchSpec,
                     k: int, num_labels: int,
                     budget: BudgetMode = BudgetMode.GLOBAL) -> CertOutcome:
    _check_k(k, num_labels, allow_full=False)
    budget = BudgetMode(budget)
    delta = compute_delta(scheme, patch)
    y0 = sample.true_label
    costs = {}
    certified = True
    binding, best_margin = None, None
    for region in build_patch_regions(scheme, patch):
        clean = clean_level(sample, region, scheme, num_labels)
        cost = smallest_tie_cost(clean, y0, k, num_labels)
        costs[region] = cost
        b = clean.overlap_count if budget is BudgetMode.PER_PATCH else delta
        if cost is INFEASIBLE:
            continue
        margin = cost - b
        if best_margin is None or margin < best_margin:
            binding, best_margin = region, margin
        if cost <= b:
            certified = False
    topk = true_label_rank(sample) <= k
    return CertOutcome(
        Analyzer.COSTCERT, k, certified and topk,
        costcert_mink(sample, scheme, patch, num_labels, budget),
        costs, binding,
    )


class _UpperBound(Mapping):
    """alpha + q for every label in the label space."""

    def __init__(self, alpha: Mapping[int, int], q: int, num_labels: int):
        self._alpha, self._q, self._L = alpha, q, num_labels

    def __getitem__(self, y):
        if not 0 <= y < self._L:
            raise KeyError(y)
        return self._alpha[y] + self._q

    def __iter__(self):
        return iter(range(self._L))

    def __len__(self):
        return self._L


def strategy2_bounds(sample: SampleVotes, region: PatchRegion, scheme: AblationScheme,
                     num_labels: int):
    """Per-label (lower, upper) vote bounds for one patch region."""
    clean = clean_level(sample, region, scheme, num_labels)
    return clean.alpha, _UpperBound(clean.alpha, clean.overlap_count, num_labels)


def strategy2_exceeders(sample, region, scheme, num_labels) -> int:
    lower, upper = strategy2_bounds(sample, region, scheme, num_labels)
    y0 = sample.true_label
    return sum(1 for y in range(num_labels) if y != y0 and upper[y] >= lower[y0])


def strategy2_mink(sample: SampleVotes, scheme: AblationScheme, patch: PatchSpec,
                   num_labels: int, backend: str | None = None) -> int:
    _, s2 = _region_minks(sample, scheme, patch, num_labels, BudgetMode.PER_PATCH, backend)
    return min(max(int(s2.max()), true_label_rank(sample)), num_labels)


def strategy2_certify(sample: SampleVotes, scheme: AblationScheme, patch: PatchSpec,
                      k: int, num_labels: int) -> CertOutcome:
    _check_k(k, num_labels, allow_full=True)
    worst, binding = -1, None
    for region in build_patch_regions(scheme, patch):
        kp = strategy2_exceeders(sample, region, scheme, num_labels)
        if kp > worst:
            worst, binding = kp, region
    certified = worst < k and true_label_rank(sample) <= k
    return CertOutcome(Analyzer.STRATEGY2, k, certified,
                       strategy2_mink(sample, scheme, patch, num_labels),
                       None, binding)


def strategy1_certify(sample_or_conf, delta: int) -> bool:
    """Top-1 margin test: v(y0) > max other v + 2*delta."""
    if isinstance(sample_or_conf, SampleVotes):
        conf, y0 = vote_confidence(sample_or_conf), sample_or_conf.true_label
    else:
        conf, y0 = sample_or_conf
    runner_up = max((conf[y] for y in conf if y != y0), default=0)
    return conf[y0] > runner_up + 2 * delta


def strategy1_mink(sample: SampleVotes, scheme: AblationScheme, patch: PatchSpec,
                   num_labels: int) -> int:
    """1 when the top-1 margin test passes, else the trivial ``num_labels``."""
    return 1 if strategy1_certify(sample, compute_delta(scheme, patch)) else num_labels


def strategy1_outcome(sample, scheme, patch, k, num_labels) -> CertOutcome:
    _check_k(k, num_labels, allow_full=True)
    mink = strategy1_mink(sample, scheme, patch, num_labels)
    return CertOutcome(Analyzer.STRATEGY1, k, k >= mink, mink)


def certify(analyzer, sample, scheme, patch, k, num_labels,
            budget: BudgetMode = BudgetMode.GLOBAL) -> CertOutcome:
    analyzer = Analyzer(analyzer)
    if analyzer is Analyzer.COSTCERT:
        return costcert_certify(sample, scheme, patch, k, num_labels, budget)
    if analyzer is Analyzer.STRATEGY2:
        return strategy2_certify(sample, scheme, patch, k, num_labels)
    return strategy1_outcome(sample, scheme, patch, k, num_labels)


def mink(analyzer, sample, scheme, patch, num_labels,
         budget: BudgetMode = BudgetMode.GLOBAL) -> int:
    analyzer = Analyzer(analyzer)
    if analyzer is Analyzer.COSTCERT:
        return costcert_mink(sample, scheme, patch, num_labels, budget)
    if analyzer is Analyzer.STRATEGY2:
        return strategy2_mink(sample, scheme, patch, num_labels)
    return strategy1_mink(sample, scheme, patch, num_labels)
