import csv
import json
import math

import numpy as np
import pytest

from fluxquant import PAPER_PARAMS
from fluxquant.cli import main
from fluxquant.fit import SpectroscopyPoint, model_frequency


def read(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def numeric(rows):
    return np.array([[float(v) for v in r] for r in rows])


def test_spectrum_default(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["spectrum", "--out", str(out)]) == 0
    header, rows = read(out)
    assert header == ["flux", "e0_ghz", "e1_ghz", "e2_ghz"]
    data = numeric(rows)
    assert len(data) == 201
    gap = data[:, 3] - data[:, 2]
    window = (data[:, 0] >= 0.8) & (data[:, 0] <= 0.9)
    i = np.argmin(np.where(window, gap, np.inf))
    assert gap[i] < gap[i - 1] and gap[i] < gap[i + 1]


def test_spectrum_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert main(["spectrum", "--out", str(p), "--set", "spectrum.points=21"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_spectrum_empty_range(tmp_path, capsys):
    assert main(["spectrum", "--out", str(tmp_path / "s.csv"), "--set", "spectrum.points=0"]) == 2
    assert "spectrum.points" in capsys.readouterr().err


def test_unknown_key_rejected(tmp_path, capsys):
    assert main(["spectrum", "--set", "spectrum.pionts=3"]) == 2
    assert "spectrum.pionts" in capsys.readouterr().err
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"params": {"E_C": 1.0, "E_X": 2.0}}))
    assert main(["spectrum", "--config", str(cfg)]) == 2
    assert "params.E_X" in capsys.readouterr().err


def test_out_of_range_value(capsys):
    assert main(["sudden", "--alpha", "1.5"]) == 2
    assert "sudden.alpha" in capsys.readouterr().err


def test_config_file_and_env_dir(tmp_path, monkeypatch):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"spectrum": {"points": 3, "levels": 2}, "out": "spec.csv"}))
    monkeypatch.setenv("FLUXQUANT_OUT", str(tmp_path))
    assert main(["spectrum", "--config", str(cfg)]) == 0
    header, rows = read(tmp_path / "spec.csv")
    assert header == ["flux", "e0_ghz", "e1_ghz"] and len(rows) == 3


def test_unwritable_output(tmp_path, capsys):
    assert main(["spectrum", "--out", str(tmp_path / "missing" / "s.csv"), "--set", "spectrum.points=2"]) == 3
    assert str(tmp_path / "missing") in capsys.readouterr().err


def test_wavefunction_half_flux_symmetry(tmp_path):
    out = tmp_path / "w.csv"
    assert main(["wavefunction", "--out", str(out)]) == 0
    header, rows = read(out)
    assert header == ["phi", "potential_ghz", "re_psi0", "im_psi0", "re_psi1", "im_psi1"]
    d = numeric(rows)
    # default grid is centered on phi = pi at half flux
    np.testing.assert_allclose(d[:, 0] + d[::-1, 0], 2 * math.pi, atol=1e-12)
    np.testing.assert_allclose(d[:, 1], d[::-1, 1], atol=1e-9)
    np.testing.assert_allclose(d[:, 2], d[::-1, 2], atol=1e-7)
    np.testing.assert_allclose(d[:, 4], -d[::-1, 4], atol=1e-7)
    # delocalized: weight on both sides of the barrier
    mid = len(d) // 2
    left = np.sum(d[:mid, 2] ** 2)
    assert left == pytest.approx(np.sum(d[mid + 1 :, 2] ** 2), rel=1e-6)


def test_wavefunction_allocations_related_by_shift(tmp_path):
    ind, jun = tmp_path / "i.csv", tmp_path / "j.csv"
    common = ["--set", "wavefunction.flux=0.812", "--set", "wavefunction.half_width=8", "--set", "wavefunction.points=161"]
    assert main(["wavefunction", "--out", str(ind), *common]) == 0
    assert main(["wavefunction", "--out", str(jun), "--allocation", "junction-incomplete", *common]) == 0
    di, dj = numeric(read(ind)[1]), numeric(read(jun)[1])
    np.testing.assert_allclose(di[:, 0] - dj[:, 0], 2 * math.pi * 0.812, atol=1e-12)
    np.testing.assert_allclose(di[:, 1], dj[:, 1], atol=1e-10)
    for col in (2, 4):
        sign = np.sign(np.dot(di[:, col], dj[:, col]))
        np.testing.assert_allclose(di[:, col], sign * dj[:, col], atol=1e-6)


def test_wavefunction_level_out_of_range(tmp_path):
    assert main(["wavefunction", "--out", str(tmp_path / "w.csv"), "--dim", "20", "--set", "wavefunction.levels=[0,20]"]) == 2


def test_sudden_default(tmp_path):
    out = tmp_path / "x.csv"
    assert main(["sudden", "--out", str(out)]) == 0
    header, rows = read(out)
    assert header == ["flux_a", "p0", "p1", "subspace", "p0_corr", "p1_corr"]
    d = numeric(rows)
    assert len(d) == 11
    assert np.all(d[:, 3] > 0.98)
    below, above = d[:, 0] < 0.5, d[:, 0] > 0.5
    assert np.all(d[below, 5] > d[below, 4]) and np.all(d[above, 4] > d[above, 5])
    meta = json.loads((tmp_path / "x.csv.meta.json").read_text())
    assert "leakage" in meta["notes"]["confusion"]


def test_sudden_incomplete(tmp_path):
    out = tmp_path / "x.csv"
    assert main(["sudden", "--out", str(out), "--allocation", "junction-incomplete"]) == 0
    assert np.all(numeric(read(out)[1])[:, 3] < 0.5)


def test_sudden_band_ordering(tmp_path):
    out = tmp_path / "x.csv"
    assert main(["sudden", "--out", str(out), "--set", "sudden.band=true"]) == 0
    header, rows = read(out)
    d = dict(zip(header, numeric(rows).T))
    for col in ("p0", "p1", "p0_corr", "p1_corr"):
        lo = np.minimum(d[f"{col}_alpha0"], d[f"{col}_alpha0.1"])
        hi = np.maximum(d[f"{col}_alpha0"], d[f"{col}_alpha0.1"])
        mid = d[f"{col}_alpha0.05"]
        assert np.all((mid >= lo - 1e-15) & (mid <= hi + 1e-15))
        np.testing.assert_array_equal(mid, d[col])


def test_sudden_same_flux(tmp_path):
    out = tmp_path / "x.csv"
    assert main(["sudden", "--out", str(out), "--alpha", "0", "--set", "sudden.flux_a=[0.812]"]) == 0
    d = numeric(read(out)[1])
    assert d[0, 4] == pytest.approx(0.95, abs=1e-12)


def _dynamics(tmp_path, name, *extra):
    out = tmp_path / name
    code = main(["dynamics", "--out", str(out), *extra])
    return code, out


def test_dynamics_inductor_matches_sudden(tmp_path):
    code, out = _dynamics(tmp_path, "d.csv")
    assert code == 0
    header, rows = read(out)
    assert header == ["t_ns", "flux", "p0", "p1", "subspace"]
    assert rows[-1][0] == "final"
    final = [float(v) for v in rows[-1][1:]]
    traj = numeric(rows[:-1])
    assert traj[0, 0] == 0.0 and traj[0, 2] == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.diff(traj[:, 0]) > 0)

    assert main(["sudden", "--out", str(tmp_path / "s.csv"), "--alpha", "0", "--set", "sudden.flux_a=[0.5]"]) == 0
    s = numeric(read(tmp_path / "s.csv")[1])[0]
    assert abs(final[1] - s[1]) < 0.02 and abs(final[2] - s[2]) < 0.02


@pytest.mark.slow
def test_dynamics_complete_matches_inductor(tmp_path):
    _, a = _dynamics(tmp_path, "a.csv", "--set", "dynamics.verify=false")
    _, b = _dynamics(tmp_path, "b.csv", "--set", "dynamics.verify=false", "--allocation", "junction-complete")
    fa, fb = read(a)[1][-1], read(b)[1][-1]
    np.testing.assert_allclose([float(v) for v in fa[1:]], [float(v) for v in fb[1:]], atol=1e-6)


def test_dynamics_short_ramp_incomplete_leaks(tmp_path):
    code, out = _dynamics(
        tmp_path, "d.csv", "--allocation", "junction-incomplete", "--rise-ns", "0.005", "--dt-ns", "2.5e-5",
        "--set", "dynamics.verify=false", "--set", "dynamics.stride=20",
    )
    assert code == 0
    assert float(read(out)[1][-1][4]) < 0.5


def test_dynamics_accuracy_exit_code(tmp_path, capsys):
    code, _ = _dynamics(tmp_path, "d.csv", "--dt-ns", "0.25")
    assert code == 4
    assert "diagnostics" in capsys.readouterr().err


def _write_obs(path, params):
    lines = ["flux,level_i,level_j,freq_ghz,weight"]
    for f in np.linspace(0, 0.5, 6):
        for pair in ((0, 1), (0, 2)):
            freq = model_frequency(params, SpectroscopyPoint(float(f), pair, 1.0))
            lines.append(f"{float(f)!r},{pair[0]},{pair[1]},{freq!r},1")
    path.write_text("\n".join(lines) + "\n")


def test_fit_round_trip(tmp_path, capsys):
    data = tmp_path / "obs.csv"
    _write_obs(data, PAPER_PARAMS)
    out = tmp_path / "fit.json"
    guess = json.dumps({"E_C": 0.9, "E_J": 5.5, "E_L": 0.5})
    assert main(["fit", str(data), "--out", str(out), "--set", f"fit.initial_guess={guess}"]) == 0
    res = json.loads(out.read_text())
    assert res["converged"] is True
    assert res["params"]["E_J"] == pytest.approx(6.49, rel=1e-3)
    assert "converged = True" in capsys.readouterr().out


def test_fit_missing_header(tmp_path, capsys):
    data = tmp_path / "obs.csv"
    data.write_text("0.1,0,1,1.5\n0.2,0,1,1.6\n")
    assert main(["fit", str(data), "--out", str(tmp_path / "f.json")]) == 2
    assert "flux,level_i,level_j,freq_ghz,weight" in capsys.readouterr().err


def test_fit_missing_file(tmp_path):
    assert main(["fit", str(tmp_path / "nope.csv")]) == 3
