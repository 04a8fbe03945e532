import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import golden
from fluxquant import CircuitParams, InvalidArgumentError, ParseError
from fluxquant.fit import SpectroscopyPoint, fit_params, model_frequency, read_observations

FLUXES = np.linspace(0.0, 0.5, 6)


def synthesize(params, fluxes=FLUXES, pairs=((0, 1), (0, 2)), dim=120):
    return [SpectroscopyPoint(float(f), p, model_frequency(params, SpectroscopyPoint(float(f), p, 1.0), dim)) for f in fluxes for p in pairs]


def test_model_frequency_readout_point(params):
    f = model_frequency(params, SpectroscopyPoint(0.812, (0, 1), 5.0))
    assert f == pytest.approx(5.018, rel=0.02)


def test_model_frequency_half_flux(params):
    f = model_frequency(params, SpectroscopyPoint(0.5, (0, 1), 0.02))
    assert f == pytest.approx(golden.HALF_FLUX_SPLITTING_GHZ, rel=1e-6)


def test_model_frequency_allocation_irrelevant(params):
    pt = SpectroscopyPoint(0.33, (1, 3), 1.0)
    assert model_frequency(params, pt, 120, "junction-incomplete") == pytest.approx(model_frequency(params, pt), abs=1e-8)


def test_round_trip_from_perturbed_guess(params):
    obs = synthesize(params)
    assert len(obs) == 12
    guess = CircuitParams(E_C=params.E_C * 1.2, E_J=params.E_J * 0.8, E_L=params.E_L * 1.2)
    res = fit_params(obs, guess)
    assert res.converged
    for name in ("E_C", "E_J", "E_L"):
        assert getattr(res.params, name) == pytest.approx(getattr(params, name), rel=1e-3)
    assert res.residual_rms < 1e-4


def test_exact_guess_short_circuits(params):
    res = fit_params(synthesize(params), params)
    assert res.residual_rms < 1e-9
    assert res.iterations == 0 and res.converged


def test_best_vertex_monotone(params):
    guess = CircuitParams(E_C=0.7, E_J=7.0, E_L=0.5)
    res = fit_params(synthesize(params), guess, verify_dim=None, max_iter=120)
    h = np.array(res.history)
    assert len(h) > 10
    assert np.all(np.diff(h) <= 1e-15 * h[:-1])


def test_weight_scale_invariance(params):
    obs = synthesize(params, pairs=((0, 1),))
    guess = CircuitParams(E_C=0.8, E_J=6.2, E_L=0.47)
    scaled = [SpectroscopyPoint(p.flux, p.level_pair, p.frequency, 7.5) for p in obs]
    a = fit_params(obs, guess, verify_dim=None, max_iter=60)
    b = fit_params(scaled, guess, verify_dim=None, max_iter=60)
    assert a.params == b.params
    assert a.history == pytest.approx(np.array(b.history) / 7.5, rel=1e-12)


def test_single_flux_rejected(params):
    obs = [SpectroscopyPoint(0.3, (0, j), 1.0 + j) for j in (1, 2, 3)]
    with pytest.raises(InvalidArgumentError):
        fit_params(obs, params)


def test_too_few_points_rejected(params):
    with pytest.raises(InvalidArgumentError):
        fit_params(synthesize(params)[:2], params)


@pytest.mark.parametrize("kwargs", [dict(level_pair=(2, 1)), dict(level_pair=(0, 7)), dict(frequency=-1.0), dict(weight=0.0)])
def test_point_validation(kwargs):
    base = dict(flux=0.1, level_pair=(0, 1), frequency=1.0, weight=1.0)
    base.update(kwargs)
    with pytest.raises(InvalidArgumentError):
        SpectroscopyPoint(**base)


@pytest.mark.slow
@settings(max_examples=4, deadline=None)
@given(
    E_L=st.floats(0.1, 1.0),
    E_C=st.floats(0.5, 1.5),
    E_J=st.floats(4.0, 10.0),
    seed=st.integers(0, 1000),
)
def test_round_trip_property(E_L, E_C, E_J, seed):
    truth = CircuitParams(E_C=E_C, E_J=E_J, E_L=E_L)
    rng = np.random.default_rng(seed)
    factors = 1 + rng.uniform(-0.2, 0.2, size=3)
    guess = CircuitParams(E_C=E_C * factors[0], E_J=E_J * factors[1], E_L=E_L * factors[2])
    res = fit_params(synthesize(truth), guess)
    for name in ("E_C", "E_J", "E_L"):
        assert getattr(res.params, name) == pytest.approx(getattr(truth, name), rel=1e-3)


def test_read_observations(tmp_path):
    f = tmp_path / "obs.csv"
    f.write_text("flux,level_i,level_j,freq_ghz,weight\n0.1,0,1,1.5,2\n0.2,0,2,3.0,\n")
    pts = read_observations(f)
    assert pts[0] == SpectroscopyPoint(0.1, (0, 1), 1.5, 2.0)
    assert pts[1].weight == 1.0


def test_read_observations_without_weight_column(tmp_path):
    f = tmp_path / "obs.csv"
    f.write_text("flux,level_i,level_j,freq_ghz\n0.1,0,1,1.5\n")
    assert read_observations(f)[0].weight == 1.0


def test_read_observations_missing_header(tmp_path):
    f = tmp_path / "obs.csv"
    f.write_text("0.1,0,1,1.5\n")
    with pytest.raises(ParseError, match="flux,level_i,level_j,freq_ghz,weight"):
        read_observations(f)


def test_read_observations_bad_line(tmp_path):
    f = tmp_path / "obs.csv"
    f.write_text("flux,level_i,level_j,freq_ghz\n0.1,0,1,1.5\n0.2,zero,1,1.5\n")
    with pytest.raises(ParseError, match=":3:"):
        read_observations(f)
