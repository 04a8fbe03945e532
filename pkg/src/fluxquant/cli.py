"""Command-line front end.

    fluxquant spectrum     [options]   energies vs flux          -> CSV
    fluxquant wavefunction [options]   potential + eigenfunctions -> CSV
    fluxquant sudden       [options]   sudden-ramp populations    -> CSV
    fluxquant dynamics     [options]   time-domain ramp           -> CSV
    fluxquant fit DATA     [options]   parameter fit              -> JSON

Exit codes: 0 ok, 2 bad arguments/config/input, 3 I/O, 4 numerical accuracy.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import dynamics, fit, potential, sudden
from .config import RunConfig, load_document
from .errors import AccuracyError, ContractViolationError, InvalidArgumentError, ParseError
from .hamiltonian import FluxAllocation, reduced_flux, solve, spectrum_vs_flux
from .operators import eigenfunction_on_grid, make_basis

log = logging.getLogger("fluxquant")

EXIT_OK, EXIT_ARGS, EXIT_IO, EXIT_ACCURACY = 0, 2, 3, 4
ALPHA_BAND = (0.0, 0.05, 0.1)


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    return f"{float(x):.15g}"


def resolve_output(cfg: RunConfig, default_name: str) -> Path:
    out = cfg.doc.get("out") or default_name
    path = Path(out)
    env_dir = os.environ.get("FLUXQUANT_OUT")
    if env_dir and not path.is_absolute():
        path = Path(env_dir) / path
    return path


def write_csv(path: Path, header, rows) -> Path:
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def cmd_spectrum(cfg: RunConfig) -> Path:
    blk = cfg.block("spectrum")
    points = cfg.number("spectrum.points", integer=True)
    levels = cfg.number("spectrum.levels", integer=True, lo=1, hi=cfg.basis_dim)
    if points < 1:
        raise InvalidArgumentError(f"config key 'spectrum.points' must be >= 1 (empty flux range), got {points}")
    start, stop = cfg.number("spectrum.flux_start"), cfg.number("spectrum.flux_stop")
    fluxes = np.linspace(start, stop, points)
    table = spectrum_vs_flux(cfg.params, fluxes, levels, make_basis(cfg.params, cfg.basis_dim), bool(blk["relative"]))
    header = ["flux"] + [f"e{j}_ghz" for j in range(levels)]
    return write_csv(resolve_output(cfg, "spectrum.csv"), header, table.tolist())


def cmd_wavefunction(cfg: RunConfig) -> Path:
    blk = cfg.block("wavefunction")
    flux = cfg.number("wavefunction.flux")
    levels = blk["levels"]
    if isinstance(levels, int):
        levels = list(range(levels))
    if not levels or not all(isinstance(k, int) and not isinstance(k, bool) for k in levels):
        raise InvalidArgumentError(f"config key 'wavefunction.levels' must be a list of level indices, got {levels!r}")
    if min(levels) < 0 or max(levels) >= cfg.basis_dim:
        raise InvalidArgumentError(f"config key 'wavefunction.levels': indices must lie in [0, {cfg.basis_dim - 1}]")
    points = cfg.number("wavefunction.points", integer=True, lo=2)
    half = cfg.number("wavefunction.half_width", positive=True)
    center = cfg.number("wavefunction.center")
    if center is None:
        center = 0.0 if cfg.allocation.is_junction else reduced_flux(flux)
    grid = np.linspace(center - half, center + half, points)

    basis = make_basis(cfg.params, cfg.basis_dim)
    spec = solve(cfg.params, flux, cfg.allocation, basis, max(levels) + 1)
    columns = [grid, potential.potential_curve(cfg.params, flux, cfg.allocation, grid)]
    header = ["phi", "potential_ghz"]
    for k in levels:
        psi = eigenfunction_on_grid(basis, spec.states[:, k], grid)
        columns += [psi.real, psi.imag]
        header += [f"re_psi{k}", f"im_psi{k}"]
    return write_csv(resolve_output(cfg, "wavefunction.csv"), header, np.column_stack(columns).tolist())


def _flux_a_list(cfg: RunConfig):
    blk = cfg.block("sudden")
    if blk["flux_a"] is not None:
        values = blk["flux_a"] if isinstance(blk["flux_a"], list) else [blk["flux_a"]]
        if not values:
            raise InvalidArgumentError("config key 'sudden.flux_a' is empty")
        return [float(v) for v in values]
    step = cfg.number("sudden.flux_a_step", positive=True)
    start, stop = cfg.number("sudden.flux_a_start"), cfg.number("sudden.flux_a_stop")
    if stop < start:
        raise InvalidArgumentError("config key 'sudden.flux_a_stop' must be >= 'sudden.flux_a_start'")
    return sudden.default_flux_a_sweep(start, stop, step)


def cmd_sudden(cfg: RunConfig) -> Path:
    blk = cfg.block("sudden")
    try:
        confusion = sudden.ConfusionMatrix(blk["confusion"])
    except (InvalidArgumentError, TypeError, ValueError) as exc:
        raise InvalidArgumentError(f"config key 'sudden.confusion': {exc}") from None
    base = dict(
        flux_a_list=_flux_a_list(cfg),
        flux_b=cfg.number("sudden.flux_b"),
        levels_b=cfg.number("sudden.levels_b", integer=True, lo=2),
        allocation=cfg.allocation,
        confusion=confusion,
    )
    basis = make_basis(cfg.params, cfg.basis_dim)
    alpha = cfg.number("sudden.alpha", lo=0.0, hi=1.0)
    table = sudden.simulate_experiment(cfg.params, sudden.SuddenExperimentConfig(alpha=alpha, **base), basis)
    header = ["flux_a", "p0", "p1", "subspace", "p0_corr", "p1_corr"]
    rows = [list(r) for r in table.rows()]
    if blk["band"]:
        for a in ALPHA_BAND:
            band = sudden.simulate_experiment(cfg.params, sudden.SuddenExperimentConfig(alpha=a, **base), basis)
            header += [f"p0_alpha{a:g}", f"p1_alpha{a:g}", f"p0_corr_alpha{a:g}", f"p1_corr_alpha{a:g}"]
            for row, (_, p0, p1, _, c0, c1) in zip(rows, band.rows()):
                row += [p0, p1, c0, c1]
    out = write_csv(resolve_output(cfg, "sudden.csv"), header, rows)
    meta = {
        "allocation": cfg.allocation.value,
        "params": cfg.params.as_dict(),
        "flux_b": base["flux_b"],
        "alpha": alpha,
        "confusion": [list(r) for r in confusion.matrix],
        "notes": table.notes,
    }
    try:
        Path(str(out) + ".meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {out}.meta.json: {exc.strerror or exc}") from exc
    return out


def cmd_dynamics(cfg: RunConfig) -> Path:
    blk = cfg.block("dynamics")
    pulse = dynamics.FluxPulse(
        flux_start=cfg.number("dynamics.flux_start"),
        flux_end=cfg.number("dynamics.flux_end"),
        rise_ns=cfg.number("dynamics.rise_ns", positive=True),
        shape=blk["shape"],
        t0=cfg.number("dynamics.t0_ns", lo=0.0),
    )
    prop_cfg = dynamics.PropagatorConfig(
        dt=cfg.number("dynamics.dt_ns", positive=True),
        t_end=cfg.number("dynamics.t_end_ns"),
        verify=bool(blk["verify"]),
    )
    stride = cfg.number("dynamics.stride", integer=True, lo=1)
    levels = cfg.number("dynamics.levels", integer=True, lo=2, hi=cfg.basis_dim)
    basis = make_basis(cfg.params, cfg.basis_dim)
    alloc = cfg.allocation
    frame = FluxAllocation.INDUCTOR if not alloc.is_junction else alloc
    psi0 = dynamics.eigenstate(cfg.params, pulse.flux_start, frame, basis, 0)
    t_end = prop_cfg.end_time(pulse)

    def row(t, coeffs):
        flux, _ = dynamics.flux_profile(pulse, t)
        p = dynamics.final_populations(dynamics.StateVector(coeffs / np.linalg.norm(coeffs), frame), cfg.params, flux, basis, levels)
        return [t, flux, p[0], p[1], p[0] + p[1]]

    rows = [row(0.0, psi0.coeffs)]
    for i, (t, coeffs) in enumerate(dynamics.evolve(cfg.params, alloc, pulse, psi0, prop_cfg.dt, t_end, basis), start=1):
        if i % stride == 0 or t >= pulse.t_ramp_end - 1e-12:
            rows.append(row(t, coeffs))
    final = dynamics.propagate(cfg.params, alloc, pulse, psi0, prop_cfg, basis)
    p = dynamics.final_populations(final, cfg.params, pulse.flux_end, basis, levels)
    rows.append(["final", pulse.flux_end, p[0], p[1], p[0] + p[1]])
    return write_csv(resolve_output(cfg, "dynamics.csv"), ["t_ns", "flux", "p0", "p1", "subspace"], rows)


def cmd_fit(cfg: RunConfig, data_path) -> Path:
    path = Path(data_path)
    if not path.is_file():
        raise FileNotFoundError(f"observation file not found: {path}")
    observations = fit.read_observations(path)
    blk = cfg.block("fit")
    verify = blk["verify_dim"]
    result = fit.fit_params(
        observations,
        cfg.fit_guess(),
        basis=cfg.number("fit.basis_dim", integer=True, lo=2),
        verify_dim=int(verify) if verify else None,
        max_iter=cfg.number("fit.max_iter", integer=True, lo=1),
    )
    p = result.params
    print(f"E_C = {p.E_C:.6f} GHz  E_J = {p.E_J:.6f} GHz  E_L = {p.E_L:.6f} GHz")
    print(f"residual_rms = {result.residual_rms:.3e} GHz  iterations = {result.iterations}  converged = {result.converged}")
    out = resolve_output(cfg, "fit.json")
    try:
        out.write_text(json.dumps(result.as_dict(), indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {out}: {exc.strerror or exc}") from exc
    return out


COMMANDS = {
    "spectrum": cmd_spectrum,
    "wavefunction": cmd_wavefunction,
    "sudden": cmd_sudden,
    "dynamics": cmd_dynamics,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--out", help="output path (relative paths honour $FLUXQUANT_OUT)")
    common.add_argument("--allocation", choices=[a.value for a in FluxAllocation])
    common.add_argument("--dim", type=int, help="oscillator basis dimension")
    common.add_argument("--alpha", type=float, help="state-preparation error")
    common.add_argument("--rise-ns", type=float, help="ramp rise time")
    common.add_argument("--dt-ns", type=float, help="propagator step")
    common.add_argument("--levels", type=int, help="number of levels to report")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key, e.g. --set sudden.flux_b=0.8 (repeatable)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="fluxquant", description=__doc__.splitlines()[0] if __doc__ else None)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    fit_p = sub.add_parser("fit", parents=[common])
    fit_p.add_argument("data", help="CSV with header flux,level_i,level_j,freq_ghz[,weight]")
    return parser


_LEVEL_KEYS = {"spectrum": "spectrum.levels", "wavefunction": "wavefunction.levels", "sudden": "sudden.levels_b", "dynamics": "dynamics.levels"}


def _overrides(args) -> dict:
    ov = {}
    if args.out is not None:
        ov["out"] = args.out
    if args.allocation is not None:
        ov["allocation"] = args.allocation
    if args.dim is not None:
        ov["basis_dim"] = args.dim
    if args.alpha is not None:
        ov["sudden.alpha"] = args.alpha
    if args.rise_ns is not None:
        ov["dynamics.rise_ns"] = args.rise_ns
    if args.dt_ns is not None:
        ov["dynamics.dt_ns"] = args.dt_ns
    if args.levels is not None and args.command in _LEVEL_KEYS:
        key = _LEVEL_KEYS[args.command]
        ov[key] = list(range(args.levels)) if args.command == "wavefunction" else args.levels
    return ov


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        doc = load_document(args.config, args.set, _overrides(args))
        cfg = RunConfig.from_document(doc)
        if args.command == "fit":
            out = cmd_fit(cfg, args.data)
        else:
            out = COMMANDS[args.command](cfg)
    except (InvalidArgumentError, ParseError, ContractViolationError) as exc:
        print(f"fluxquant: error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except AccuracyError as exc:
        print(f"fluxquant: accuracy failure: {exc}", file=sys.stderr)
        if exc.diagnostics:
            print(f"fluxquant: diagnostics: {exc.diagnostics}", file=sys.stderr)
        return EXIT_ACCURACY
    except OSError as exc:
        print(f"fluxquant: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    log.info("wrote %s", out)
    print(out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
