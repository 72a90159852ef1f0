"""Mutant votes, vote confidence, ranked prediction and clean levels."""
from __future__ import annotations

from collections import Counter
from collections.abc import Iterator, Mapping
from dataclasses import dataclass, field

import numpy as np

from .errors import LabelRangeError, LengthMismatchError, VoteDataError
from .geometry import AblationScheme, PatchRegion, overlapping_ablations


@dataclass(frozen=True)
class LabelSpace:
    num_labels: int

    def __post_init__(self):
        if self.num_labels < 2:
            raise VoteDataError(f"num_labels must be >= 2, got {self.num_labels}")

    def __contains__(self, label: object) -> bool:
        return isinstance(label, (int, np.integer)) and 0 <= label < self.num_labels


class SampleVotes:
    """True label plus one top-1 label per ablation band (immutable)."""

    __slots__ = ("sample_id", "true_label", "_labels")

    def __init__(self, sample_id: str, true_label: int, mutant_labels):
        arr = np.array(mutant_labels, dtype=np.int32).reshape(-1)
        arr.flags.writeable = False
        object.__setattr__(self, "sample_id", str(sample_id))
        object.__setattr__(self, "true_label", int(true_label))
        object.__setattr__(self, "_labels", arr)

    def __setattr__(self, name, value):
        raise AttributeError("SampleVotes is immutable")

    @property
    def mutant_labels(self) -> np.ndarray:
        return self._labels

    @property
    def num_mutants(self) -> int:
        return int(self._labels.shape[0])

    def validate(self, scheme: AblationScheme, num_labels: int) -> None:
        if self.num_mutants != scheme.num_ablations:
            raise LengthMismatchError(
                f"sample {self.sample_id!r}: {self.num_mutants} mutant labels, "
                f"scheme has {scheme.num_ablations} ablation regions"
            )
        if not 0 <= self.true_label < num_labels:
            raise LabelRangeError(
                f"sample {self.sample_id!r}: true label {self.true_label} outside [0, {num_labels})"
            )
        if self.num_mutants and (self._labels.min() < 0 or self._labels.max() >= num_labels):
            raise LabelRangeError(
                f"sample {self.sample_id!r}: mutant label outside [0, {num_labels})"
            )

    def __eq__(self, other):
        if not isinstance(other, SampleVotes):
            return NotImplemented
        return (
            self.sample_id == other.sample_id
            and self.true_label == other.true_label
            and np.array_equal(self._labels, other._labels)
        )

    def __hash__(self):
        return hash((self.sample_id, self.true_label, self._labels.tobytes()))

    def __repr__(self):
        return (
            f"SampleVotes(sample_id={self.sample_id!r}, true_label={self.true_label}, "
            f"mutant_labels=<{self.num_mutants} labels>)"
        )


class _Tally(Mapping):
    """Read-only label -> count map where absent labels read as 0."""

    def __init__(self, counts: Mapping[int, int]):
        self._counts = {int(k): int(v) for k, v in counts.items() if v}

    def __getitem__(self, label: int) -> int:
        return self._counts.get(int(label), 0)

    def __iter__(self) -> Iterator[int]:
        return iter(self._counts)

    def __len__(self) -> int:
        return len(self._counts)

    def __eq__(self, other):
        if isinstance(other, _Tally):
            return self._counts == other._counts
        if isinstance(other, Mapping):
            return self._counts == {k: v for k, v in other.items() if v}
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._counts.items()))

    def __repr__(self):
        return f"{type(self).__name__}({self._counts!r})"

    def total(self) -> int:
        return sum(self._counts.values())


class VoteConfidence(_Tally):
    pass


@dataclass(frozen=True)
class CleanLevel:
    patch_region: PatchRegion
    alpha: _Tally
    overlap_count: int
    num_labels: int = field(default=0)

    def __getitem__(self, label: int) -> int:
        return self.alpha[label]


def vote_confidence(sample: SampleVotes) -> VoteConfidence:
    return VoteConfidence(Counter(sample.mutant_labels.tolist()))


def ranked_prediction(conf: Mapping[int, int], k: int, num_labels: int) -> list[int]:
    """Top-k labels by count; equal counts go to the smaller label id."""
    if not 1 <= k <= num_labels:
        raise ValueError(f"k must be in [1, {num_labels}], got {k}")
    voted = sorted(conf, key=lambda y: (-conf[y], y))
    voted = [y for y in voted if conf[y] > 0]
    if len(voted) >= k:
        return voted[:k]
    seen = set(voted)
    rest = (y for y in range(num_labels) if y not in seen)
    out = list(voted)
    for y in rest:
        out.append(y)
        if len(out) == k:
            break
    return out


def prediction_rank(conf: Mapping[int, int], label: int) -> int:
    """1-based position of ``label`` in the full ranked prediction."""
    v = conf[label]
    higher = sum(1 for y in conf if conf[y] > v)
    if v > 0:
        tied_ahead = sum(1 for y in conf if conf[y] == v and y < label)
    else:
        # every smaller id without votes ties at zero and ranks ahead
        tied_ahead = label - sum(1 for y in conf if y < label and conf[y] > 0)
    return 1 + higher + tied_ahead


def clean_level(sample: SampleVotes, region: PatchRegion, scheme: AblationScheme,
                num_labels: int = 0) -> CleanLevel:
    dirty = overlapping_ablations(scheme, region)
    labels = sample.mutant_labels
    mask = np.ones(labels.shape[0], dtype=bool)
    if dirty:
        mask[list(dirty)] = False
    alpha = Counter(labels[mask].tolist())
    return CleanLevel(region, _Tally(alpha), len(dirty), num_labels)


class VoteTable:
    """Validated samples sharing one ablation scheme and label space."""

    def __init__(self, scheme: AblationScheme, num_labels: int, samples):
        LabelSpace(num_labels)
        self.scheme = scheme
        self.num_labels = int(num_labels)
        self.samples: list[SampleVotes] = list(samples)
        for s in self.samples:
            s.validate(scheme, self.num_labels)
        self._matrix = None

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def __getitem__(self, i):
        return self.samples[i]

    def __eq__(self, other):
        if not isinstance(other, VoteTable):
            return NotImplemented
        return (self.scheme == other.scheme and self.num_labels == other.num_labels
                and self.samples == other.samples)

    @property
    def label_matrix(self) -> np.ndarray:
        if self._matrix is None:
            n = self.scheme.num_ablations
            m = np.empty((len(self.samples), n), dtype=np.int32)
            for i, s in enumerate(self.samples):
                m[i] = s.mutant_labels
            m.flags.writeable = False
            self._matrix = m
        return self._matrix

    @property
    def true_labels(self) -> np.ndarray:
        return np.fromiter((s.true_label for s in self.samples), dtype=np.int32,
                           count=len(self.samples))

    def true_label_ranks(self) -> np.ndarray:
        """1-based rank of each sample's true label in its unattacked prediction."""
        m = self.label_matrix
        ranks = np.empty(len(self.samples), dtype=np.int64)
        for i, y0 in enumerate(self.true_labels):
            counts = np.bincount(m[i], minlength=self.num_labels)
            v = counts[y0]
            ranks[i] = 1 + int((counts > v).sum()) + int((counts[:y0] == v).sum())
        return ranks
