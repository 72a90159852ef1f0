import numpy as np
import pytest

from patchcert import kernels
from patchcert.geometry import AblationScheme
from patchcert.io import gen_synthetic, native_config
from patchcert.votes import SampleVotes, VoteTable

# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE_RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[num]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {num:>2}: {detail}")


@pytest.fixture(params=sorted(kernels.BACKENDS))
def backend(request):
    return request.param


@pytest.fixture
def fig45():
    cfg = native_config("figure45")
    return gen_synthetic("figure45", cfg), cfg


@pytest.fixture
def fig2():
    cfg = native_config("figure2")
    return gen_synthetic("figure2", cfg), cfg


def random_small_sample(rng, *, max_labels=5, max_mutants=12, max_band=2, max_side=3):
    """A random small instance: (sample, scheme, num_labels, side)."""
    L = int(rng.integers(2, max_labels + 1))
    wrap = bool(rng.integers(0, 2))
    band = int(rng.integers(1, max_band + 1))
    if wrap:
        width = int(rng.integers(max(band, 2), max_mutants + 1))
    else:
        width = int(rng.integers(band + 1, max_mutants + band))
    scheme = AblationScheme(width, width, band, wrap)
    side = int(rng.integers(1, min(max_side, width) + 1))
    y0 = int(rng.integers(0, L))
    peak = rng.uniform(0, 1)
    n = scheme.num_ablations
    labels = np.where(rng.random(n) < peak, y0, rng.integers(0, L, size=n))
    return SampleVotes("r", y0, labels), scheme, L, side


def small_table(rng, count, L=6, width=40, band=3, wrap=True, peak=(0.2, 0.9)):
    scheme = AblationScheme(width, width, band, wrap)
    n = scheme.num_ablations
    samples = []
    for i in range(count):
        y0 = int(rng.integers(0, L))
        p = rng.uniform(*peak)
        labels = np.where(rng.random(n) < p, y0, rng.integers(0, L, size=n))
        samples.append(SampleVotes(f"s{i}", y0, labels))
    return VoteTable(scheme, L, samples)
