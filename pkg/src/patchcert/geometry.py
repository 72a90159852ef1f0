"""Column-ablation geometry.

Ablation bands and square patches are reduced to 1-D column intervals: for
column ablation the row position of a patch never changes which bands it
touches, so every patch is identified by its column extent.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidPatchError, InvalidSchemeError


@dataclass(frozen=True)
class AblationScheme:
    image_width: int = 224
    image_height: int = 224
    band_width: int = 19
    wrap: bool = True

    def __post_init__(self):
        if self.image_width < 1 or self.image_height < 1:
            raise InvalidSchemeError(
                f"image dimensions must be positive, got {self.image_width}x{self.image_height}"
            )
        if not 1 <= self.band_width <= self.image_width:
            raise InvalidSchemeError(
                f"band_width must be in [1, {self.image_width}], got {self.band_width}"
            )

    @property
    def num_ablations(self) -> int:
        if self.wrap:
            return self.image_width
        return self.image_width - self.band_width + 1


@dataclass(frozen=True)
class PatchSpec:
    side: int

    def __post_init__(self):
        if self.side < 1:
            raise InvalidPatchError(f"patch side must be >= 1, got {self.side}")


@dataclass(frozen=True, order=True)
class PatchRegion:
    col_start: int
    col_end: int  # inclusive
    canonical: bool = True

    @property
    def width(self) -> int:
        return self.col_end - self.col_start + 1


@dataclass(frozen=True)
class AblationBand:
    index: int
    columns: tuple[int, ...]

    @property
    def col_start(self) -> int:
        return self.columns[0]


def build_ablation_regions(scheme: AblationScheme) -> list[AblationBand]:
    """One band per ablation index, ordered by start column."""
    w, b = scheme.image_width, scheme.band_width
    if b > w:
        raise InvalidSchemeError(f"band_width {b} exceeds image_width {w}")
    bands = []
    for i in range(scheme.num_ablations):
        if scheme.wrap:
            cols = tuple((i + j) % w for j in range(b))
        else:
            cols = tuple(range(i, i + b))
        bands.append(AblationBand(i, cols))
    return bands


def _check_patch(scheme: AblationScheme, patch: PatchSpec) -> None:
    if patch.side > scheme.image_width:
        raise InvalidPatchError(
            f"patch side {patch.side} exceeds image_width {scheme.image_width}"
        )


def build_patch_regions(scheme: AblationScheme, patch: PatchSpec) -> list[PatchRegion]:
    _check_patch(scheme, patch)
    m = patch.side
    return [PatchRegion(s, s + m - 1) for s in range(scheme.image_width - m + 1)]


def overlap_window(scheme: AblationScheme, region: PatchRegion) -> tuple[int, int]:
    """Overlapping ablation indices as a cyclic run ``(start, length)``.

    The run is taken modulo ``scheme.num_ablations``. This is the compact form
    consumed by the kernels.
    """
    b = scheme.band_width
    n = scheme.num_ablations
    if scheme.wrap:
        length = min(region.width + b - 1, n)
        start = (region.col_start - b + 1) % n
        return (start if length < n else 0), length
    lo = max(0, region.col_start - b + 1)
    hi = min(region.col_end, n - 1)
    return lo, max(0, hi - lo + 1)


def overlapping_ablations(scheme: AblationScheme, region: PatchRegion) -> frozenset[int]:
    start, length = overlap_window(scheme, region)
    n = scheme.num_ablations
    return frozenset((start + j) % n for j in range(length))


def compute_delta(scheme: AblationScheme, patch: PatchSpec) -> int:
    """Attack budget: the most ablation bands any single patch region touches."""
    return max(overlap_window(scheme, r)[1] for r in build_patch_regions(scheme, patch))


@lru_cache(maxsize=256)
def region_windows(scheme: AblationScheme, patch: PatchSpec) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised ``overlap_window`` over the canonical region set."""
    wins = [overlap_window(scheme, r) for r in build_patch_regions(scheme, patch)]
    starts = np.array([s for s, _ in wins], dtype=np.int64)
    lengths = np.array([q for _, q in wins], dtype=np.int64)
    starts.flags.writeable = False
    lengths.flags.writeable = False
    return starts, lengths
