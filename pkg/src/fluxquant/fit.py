"""Recover (E_C, E_J, E_L) from spectroscopy lines by derivative-free least squares.

The objective is sum_i w_i (model_i - observed_i)^2 over transition
frequencies; Nelder-Mead runs in log-parameter space so positivity holds
automatically. Fits run in a small basis and are then polished in the
full one.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

from .errors import InvalidArgumentError, ParseError
from .hamiltonian import CircuitParams, FluxAllocation, build_static
from .operators import make_basis

__all__ = ["SpectroscopyPoint", "FitResult", "model_frequency", "fit_params", "read_observations", "OBSERVATION_HEADER"]

OBSERVATION_HEADER = ("flux", "level_i", "level_j", "freq_ghz", "weight")


@dataclass(frozen=True)
class SpectroscopyPoint:
    flux: float
    level_pair: tuple
    frequency: float
    weight: float = 1.0

    def __post_init__(self):
        i, j = self.level_pair
        if not (0 <= i < j <= 6):
            raise InvalidArgumentError(f"level pair must satisfy 0 <= i < j <= 6, got {self.level_pair}")
        if not (math.isfinite(self.frequency) and self.frequency > 0):
            raise InvalidArgumentError(f"frequency must be positive, got {self.frequency!r}")
        if not (math.isfinite(self.weight) and self.weight > 0):
            raise InvalidArgumentError(f"weight must be positive, got {self.weight!r}")
        if not math.isfinite(self.flux):
            raise InvalidArgumentError("flux must be finite")


@dataclass
class FitResult:
    params: CircuitParams
    residual_rms: float
    iterations: int
    converged: bool
    history: list = field(default_factory=list, repr=False)  # best objective after each iteration

    def as_dict(self):
        return {
            "params": self.params.as_dict(),
            "residual_rms_ghz": self.residual_rms,
            "iterations": self.iterations,
            "converged": self.converged,
        }


def _levels_by_flux(params: CircuitParams, fluxes, top: int, dim: int) -> dict:
    basis = make_basis(params, dim)
    return {f: np.linalg.eigvalsh(build_static(params, f, FluxAllocation.INDUCTOR, basis))[: top + 1] for f in fluxes}


def model_frequency(params: CircuitParams, point: SpectroscopyPoint, basis=120, allocation=FluxAllocation.INDUCTOR) -> float:
    """E_j - E_i at the point's flux."""
    i, j = point.level_pair
    if not hasattr(basis, "dim"):
        basis = make_basis(params, basis)
    e = np.linalg.eigvalsh(build_static(params, point.flux, allocation, basis))
    return float(e[j] - e[i])


def _model_all(params, observations, dim):
    fluxes = sorted({p.flux for p in observations})
    top = max(p.level_pair[1] for p in observations)
    levels = _levels_by_flux(params, fluxes, top, dim)
    return np.array([levels[p.flux][p.level_pair[1]] - levels[p.flux][p.level_pair[0]] for p in observations])


def _nelder_mead(observations, x0, dim, max_iter, xatol):
    observed = np.array([p.frequency for p in observations])
    weights = np.array([p.weight for p in observations])

    def objective(x):
        try:
            params = CircuitParams(*map(float, np.exp(x)))
        except InvalidArgumentError:
            return math.inf
        r = _model_all(params, observations, dim) - observed
        return float(np.sum(weights * r * r))

    history = []
    simplex = np.vstack([x0, x0 + np.diag([0.1, 0.1, 0.1])])
    res = minimize(
        objective, x0, method="Nelder-Mead", callback=lambda xk: history.append(objective(xk)),
        options={"initial_simplex": simplex, "xatol": xatol, "fatol": math.inf, "maxiter": max_iter},
    )
    return res, history


def fit_params(observations, initial_guess: CircuitParams, basis: int = 80, verify_dim: int | None = 120,
               max_iter: int = 500, xatol: float = 1e-6) -> FitResult:
    """Least-squares circuit energies for ``observations``."""
    observations = list(observations)
    if len(observations) < 3:
        raise InvalidArgumentError(f"need at least 3 observations, got {len(observations)}")
    if len({p.flux for p in observations}) < 2:
        raise InvalidArgumentError("observations must span at least two distinct flux values")
    if not isinstance(initial_guess, CircuitParams):
        raise InvalidArgumentError("initial_guess must be a CircuitParams")
    dim = getattr(basis, "dim", basis)
    weights = np.array([p.weight for p in observations])
    observed = np.array([p.frequency for p in observations])

    def rms(params, d):
        r = _model_all(params, observations, d) - observed
        return math.sqrt(float(np.sum(weights * r * r) / np.sum(weights)))

    x = np.log([initial_guess.E_C, initial_guess.E_J, initial_guess.E_L])
    final_dim = verify_dim or dim
    if rms(initial_guess, final_dim) < 1e-10:
        # the objective is a sum of squares: zero residual is a global minimum
        return FitResult(initial_guess, rms(initial_guess, final_dim), 0, True)

    res, history = _nelder_mead(observations, x, dim, max_iter, xatol)
    iterations, converged = int(res.nit), res.status == 0
    if verify_dim and verify_dim != dim:
        res, more = _nelder_mead(observations, res.x, verify_dim, max_iter, xatol)
        history += more
        iterations += int(res.nit)
        converged = converged and res.status == 0
    params = CircuitParams(*map(float, np.exp(res.x)))
    return FitResult(params, rms(params, final_dim), iterations, converged, history)


def read_observations(path) -> list:
    """Parse ``flux,level_i,level_j,freq_ghz[,weight]`` CSV into SpectroscopyPoints."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError(f"{path}: empty file; expected header {','.join(OBSERVATION_HEADER)}") from None
        if tuple(header) not in (OBSERVATION_HEADER, OBSERVATION_HEADER[:4]):
            raise ParseError(f"{path}:1: expected header '{','.join(OBSERVATION_HEADER)}' (weight optional), got '{','.join(header)}'")
        points = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) not in (4, 5) or len(row) > len(header):
                raise ParseError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                flux, i, j, freq = float(row[0]), int(row[1]), int(row[2]), float(row[3])
                weight = float(row[4]) if len(row) == 5 and row[4].strip() else 1.0
                points.append(SpectroscopyPoint(flux, (i, j), freq, weight))
            except (ValueError, InvalidArgumentError) as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from None
    return points
