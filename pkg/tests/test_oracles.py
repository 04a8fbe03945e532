"""The frozen golden values must be what the grid oracle actually produces."""
import pytest

import golden
import oracles


def test_half_flux_splitting_golden():
    assert oracles.splitting(0.5) == pytest.approx(golden.HALF_FLUX_SPLITTING_GHZ, rel=1e-12)


def test_f01_golden():
    assert oracles.splitting(0.812) == pytest.approx(golden.F01_AT_0812_GHZ, rel=1e-12)


@pytest.mark.parametrize(
    "flux_a, initial, expected",
    [
        (0.498, 0, golden.SUDDEN_FROM_0498),
        (0.5, 0, golden.SUDDEN_FROM_0500),
        (0.503, 0, golden.SUDDEN_FROM_0503),
        (0.5, 1, golden.SUDDEN_FROM_0500_EXCITED),
    ],
)
def test_sudden_overlap_golden(flux_a, initial, expected):
    got = oracles.sudden_overlaps(flux_a, 0.812, initial=initial)
    assert got == pytest.approx(expected, abs=1e-12)


def test_grid_resolution_is_converged():
    # coarse and fine Richardson pairs agree well inside the tolerance used downstream
    coarse = oracles.splitting(0.5, n_points=2049)
    assert coarse == pytest.approx(golden.HALF_FLUX_SPLITTING_GHZ, rel=1e-7)
