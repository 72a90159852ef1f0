"""Dataset-level accuracies, min-k summaries and patch-size sweeps.

Accuracies and min-k summaries are exact ``Fraction`` values; rounding only
happens when a report is rendered.
"""
from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import kernels
from .certifiers import Analyzer, BudgetMode, strategy1_certify
from .errors import EmptyDatasetError, InvalidKError
from .geometry import PatchSpec, compute_delta, region_windows
from .votes import VoteTable

log = logging.getLogger(__name__)


def _require_nonempty(dataset: VoteTable) -> None:
    if len(dataset) == 0:
        raise EmptyDatasetError("dataset has no samples")


def clean_accuracy(dataset: VoteTable, k: int) -> Fraction:
    _require_nonempty(dataset)
    ranks = dataset.true_label_ranks()
    return Fraction(int((ranks <= k).sum()), len(dataset))


def dataset_minks(dataset: VoteTable, analyzer, patch: PatchSpec,
                  budget: BudgetMode = BudgetMode.GLOBAL, ranks=None,
                  backend: str | None = None) -> np.ndarray:
    """Per-sample min-k, already raised to the true label's unattacked rank."""
    analyzer = Analyzer(analyzer)
    L = dataset.num_labels
    scheme = dataset.scheme
    if ranks is None:
        ranks = dataset.true_label_ranks()
    if analyzer is Analyzer.STRATEGY1:
        delta = compute_delta(scheme, patch)
        ok = np.array([strategy1_certify(s, delta) for s in dataset], dtype=bool)
        return np.where(ok, 1, L).astype(np.int64)
    starts, lengths = region_windows(scheme, patch)
    if analyzer is Analyzer.STRATEGY2 or BudgetMode(budget) is BudgetMode.PER_PATCH:
        budgets = np.array(lengths, dtype=np.int64)
    else:
        budgets = np.full(lengths.shape, compute_delta(scheme, patch), dtype=np.int64)
    cc, s2 = kernels.sample_minks(dataset.label_matrix, dataset.true_labels, L,
                                  starts, lengths, budgets, backend=backend)
    raw = cc if analyzer is Analyzer.COSTCERT else s2
    return np.minimum(np.maximum(raw, ranks), L)


def certified_accuracy(dataset: VoteTable, analyzer, patch: PatchSpec, k: int,
                       budget: BudgetMode = BudgetMode.GLOBAL) -> Fraction:
    _require_nonempty(dataset)
    _check_k(k, dataset.num_labels)
    minks = dataset_minks(dataset, analyzer, patch, budget)
    return Fraction(int((minks <= k).sum()), len(dataset))


def _check_k(k: int, num_labels: int) -> None:
    if not 1 <= k < num_labels:
        raise InvalidKError(f"k must be in [1, {num_labels - 1}], got {k}")


@dataclass(frozen=True)
class MinkSummary:
    mean: Fraction
    median: Fraction
    q1: Fraction
    q3: Fraction
    max: int
    count: int
    total: int  # sum of min-k values, kept so the mean can be re-derived exactly


def _quantile(sorted_vals: Sequence[int], p: Fraction) -> Fraction:
    pos = (len(sorted_vals) - 1) * p
    lo = int(pos)
    hi = min(lo + 1, len(sorted_vals) - 1)
    frac = pos - lo
    return sorted_vals[lo] + (sorted_vals[hi] - sorted_vals[lo]) * frac


def summarize_minks(values: Iterable[int]) -> MinkSummary:
    vals = sorted(int(v) for v in values)
    if not vals:
        raise EmptyDatasetError("no min-k values to summarize")
    total = sum(vals)
    return MinkSummary(
        mean=Fraction(total, len(vals)),
        median=Fraction(_quantile(vals, Fraction(1, 2))),
        q1=Fraction(_quantile(vals, Fraction(1, 4))),
        q3=Fraction(_quantile(vals, Fraction(3, 4))),
        max=vals[-1],
        count=len(vals),
        total=total,
    )


def mink_statistics(dataset: VoteTable, analyzer, patch: PatchSpec,
                    budget: BudgetMode = BudgetMode.GLOBAL) -> MinkSummary:
    _require_nonempty(dataset)
    return summarize_minks(dataset_minks(dataset, analyzer, patch, budget))


def sensitivity_ratios(means: Sequence) -> list[Fraction]:
    """Ratio of each mean min-k to the previous patch size's mean."""
    means = [Fraction(m) for m in means]
    return [b / a for a, b in zip(means, means[1:])]


@dataclass(frozen=True)
class ReportRow:
    analyzer: str
    patch_side: int
    k: int
    num_samples: int
    clean_count: int
    cert_count: int
    mink_total: int
    median_mink: Fraction

    @property
    def clean_acc(self) -> Fraction:
        return Fraction(self.clean_count, self.num_samples)

    @property
    def cert_acc(self) -> Fraction:
        return Fraction(self.cert_count, self.num_samples)

    @property
    def mean_mink(self) -> Fraction:
        return Fraction(self.mink_total, self.num_samples)


@dataclass
class DatasetReport:
    rows: list[ReportRow] = field(default_factory=list)
    minks: dict[tuple[str, int], np.ndarray] = field(default_factory=dict, compare=False)

    def row(self, analyzer, patch_side: int, k: int) -> ReportRow:
        name = Analyzer(analyzer).value
        for r in self.rows:
            if (r.analyzer, r.patch_side, r.k) == (name, patch_side, k):
                return r
        raise KeyError((name, patch_side, k))

    def mean_minks(self, analyzer) -> list[Fraction]:
        name = Analyzer(analyzer).value
        sides = sorted({r.patch_side for r in self.rows if r.analyzer == name})
        return [self.row(name, s, self._first_k(name, s)).mean_mink for s in sides]

    def _first_k(self, name, side):
        return min(r.k for r in self.rows if r.analyzer == name and r.patch_side == side)


def sweep(dataset: VoteTable, analyzers: Iterable, patch_sides: Iterable[int],
          k_values: Iterable[int], budget: BudgetMode = BudgetMode.GLOBAL,
          backend: str | None = None) -> DatasetReport:
    """Evaluate every (analyzer, patch side, k) combination.

    One kernel pass per (analyzer, patch side) yields each sample's min-k, and
    every k threshold is read off that.
    """
    _require_nonempty(dataset)
    analyzers = [Analyzer(a) for a in analyzers]
    sides = sorted(set(int(s) for s in patch_sides))
    ks = sorted(set(int(k) for k in k_values))
    for k in ks:
        _check_k(k, dataset.num_labels)
    ranks = dataset.true_label_ranks()
    n = len(dataset)
    clean_counts = {k: int((ranks <= k).sum()) for k in ks}
    report = DatasetReport()
    for analyzer in analyzers:
        for side in sides:
            patch = PatchSpec(side)
            log.info("sweep %s side=%d", analyzer.value, side)
            minks = dataset_minks(dataset, analyzer, patch, budget, ranks=ranks, backend=backend)
            report.minks[(analyzer.value, side)] = minks
            summary = summarize_minks(minks)
            for k in ks:
                report.rows.append(ReportRow(
                    analyzer=analyzer.value, patch_side=side, k=k, num_samples=n,
                    clean_count=clean_counts[k], cert_count=int((minks <= k).sum()),
                    mink_total=summary.total, median_mink=summary.median,
                ))
    return report
