import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from patchcert.errors import InvalidPatchError, InvalidSchemeError
from patchcert.geometry import (
    AblationScheme,
    PatchRegion,
    PatchSpec,
    build_ablation_regions,
    build_patch_regions,
    compute_delta,
    overlapping_ablations,
)


def brute_overlaps(scheme, col_start, side, row_start=0):
    """Ablation indices whose pixel set meets a square patch, from explicit pixel sets."""
    w, h = scheme.image_width, scheme.image_height
    patch = {(r, c) for r in range(row_start, min(row_start + side, h))
             for c in range(col_start, col_start + side)}
    hits = set()
    for i in range(scheme.num_ablations):
        if scheme.wrap:
            cols = {(i + j) % w for j in range(scheme.band_width)}
        else:
            cols = set(range(i, i + scheme.band_width))
        band = {(r, c) for r in range(h) for c in cols}
        if band & patch:
            hits.add(i)
    return hits


def brute_delta(scheme, side):
    return max(len(brute_overlaps(scheme, c, side)) for c in range(scheme.image_width - side + 1))


def test_ablation_region_counts():
    assert len(build_ablation_regions(AblationScheme(224, 224, 19, True))) == 224
    bands = build_ablation_regions(AblationScheme(5, 5, 1, False))
    assert [b.columns for b in bands] == [(0,), (1,), (2,), (3,), (4,)]
    bands = build_ablation_regions(AblationScheme(4, 4, 2, True))
    assert len(bands) == 4
    assert set(bands[3].columns) == {3, 0}


def test_invalid_scheme():
    with pytest.raises(InvalidSchemeError):
        AblationScheme(10, 10, 11, True)
    with pytest.raises(InvalidSchemeError):
        AblationScheme(10, 10, 0, True)


def test_patch_region_counts():
    s = AblationScheme(224, 224, 19, True)
    assert len(build_patch_regions(s, PatchSpec(96))) == 129
    assert build_patch_regions(s, PatchSpec(224)) == [PatchRegion(0, 223)]
    assert len(build_patch_regions(AblationScheme(5, 5, 1, False), PatchSpec(2))) == 4
    with pytest.raises(InvalidPatchError):
        build_patch_regions(AblationScheme(5, 5, 1, False), PatchSpec(6))
    with pytest.raises(InvalidPatchError):
        PatchSpec(0)


def test_overlap_examples():
    s = AblationScheme(224, 224, 19, True)
    assert len(overlapping_ablations(s, PatchRegion(0, 95))) == 114
    assert overlapping_ablations(AblationScheme(5, 5, 1, False), PatchRegion(3, 3)) == {3}
    assert overlapping_ablations(AblationScheme(6, 6, 2, True), PatchRegion(0, 0)) == {0, 5}


def test_delta_examples():
    s = AblationScheme(224, 224, 19, True)
    assert compute_delta(s, PatchSpec(96)) == 114
    assert compute_delta(s, PatchSpec(32)) == 50
    assert compute_delta(AblationScheme(5, 5, 1, False), PatchSpec(1)) == 1


schemes = st.builds(
    lambda w, b, wrap: AblationScheme(w, 3, min(b, w), wrap),
    st.integers(1, 14), st.integers(1, 6), st.booleans(),
)


@settings(max_examples=150, deadline=None)
@given(schemes, st.integers(1, 14), st.integers(0, 2))
def test_overlap_matches_pixel_brute_force(scheme, side, row):
    side = min(side, scheme.image_width)
    for region in build_patch_regions(scheme, PatchSpec(side)):
        expected = brute_overlaps(scheme, region.col_start, side, row_start=row)
        assert overlapping_ablations(scheme, region) == expected


@settings(max_examples=150, deadline=None)
@given(schemes, st.integers(1, 14))
def test_delta_bounds_every_region(scheme, side):
    side = min(side, scheme.image_width)
    delta = compute_delta(scheme, PatchSpec(side))
    assert delta == brute_delta(scheme, side)
    for region in build_patch_regions(scheme, PatchSpec(side)):
        assert len(overlapping_ablations(scheme, region)) <= delta
    if scheme.wrap:
        assert delta == min(side + scheme.band_width - 1, scheme.image_width)


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 30), st.integers(1, 30), st.integers(1, 30), st.booleans())
def test_delta_monotone(width, band, side, wrap):
    band, side = min(band, width), min(side, width)
    d = compute_delta(AblationScheme(width, 1, band, wrap), PatchSpec(side))
    if side < width:
        assert compute_delta(AblationScheme(width, 1, band, wrap), PatchSpec(side + 1)) >= d
    # without wrap a wider band also means fewer bands, so only wrapped schemes are monotone
    if band < width and wrap:
        assert compute_delta(AblationScheme(width, 1, band + 1, wrap), PatchSpec(side)) >= d


def test_unwrapped_band_growth_can_shrink_delta():
    assert compute_delta(AblationScheme(4, 4, 1, False), PatchSpec(4)) == 4
    assert compute_delta(AblationScheme(4, 4, 2, False), PatchSpec(4)) == 3
