"""Classical potential of the fluxonium and the motion of its minima with flux.

For a small flux step ``delta`` the minimum at ``phi_bar`` moves by

    inductor:  E_L / (E_L + E_J cos(phi_bar)) * delta
    junction:  -E_J cos(phi_bar + phi_ext) / (E_L + E_J cos(phi_bar + phi_ext)) * delta

to first order. When E_J >> E_L these reduce to roughly ``E_L/E_J * delta``
and ``-delta``: the minimum barely moves when the flux sits on the inductor,
but follows the flux almost one-to-one when it sits on the junction. The
exact fractions are used here; the approximations are not.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, SingularConfigurationError
from .hamiltonian import CircuitParams, FluxAllocation, reduced_flux

__all__ = ["PotentialAnalysis", "potential_curve", "find_minima", "global_minimum", "perturbative_shift"]


@dataclass(frozen=True)
class PotentialAnalysis:
    minima: list  # [(location_rad, value_ghz), ...] sorted by value
    allocation: FluxAllocation
    flux: float


def _derivatives(params: CircuitParams, phi_ext: float, allocation: FluxAllocation):
    E_J, E_L = params.E_J, params.E_L
    if allocation is FluxAllocation.INDUCTOR:
        V = lambda p: -E_J * np.cos(p) + 0.5 * E_L * (p - phi_ext) ** 2
        dV = lambda p: E_J * np.sin(p) + E_L * (p - phi_ext)
        d2V = lambda p: E_J * np.cos(p) + E_L
    else:
        V = lambda p: -E_J * np.cos(p + phi_ext) + 0.5 * E_L * p**2
        dV = lambda p: E_J * np.sin(p + phi_ext) + E_L * p
        d2V = lambda p: E_J * np.cos(p + phi_ext) + E_L
    return V, dV, d2V


def potential_curve(params: CircuitParams, flux: float, allocation, grid) -> np.ndarray:
    """V(phi) in GHz on ``grid``."""
    V, _, _ = _derivatives(params, reduced_flux(flux), FluxAllocation.parse(allocation))
    return V(np.asarray(grid, dtype=float))


def default_window(params: CircuitParams, flux: float, allocation) -> tuple[float, float]:
    """Window certain to hold every local minimum.

    A minimum needs |E_L (phi - center)| = |E_J sin(.)| <= E_J.
    """
    allocation = FluxAllocation.parse(allocation)
    center = reduced_flux(flux) if allocation is FluxAllocation.INDUCTOR else 0.0
    half = max(math.pi, params.E_J / params.E_L + 0.1)
    return center - half, center + half


def find_minima(params: CircuitParams, flux: float, allocation, search_window=None, step: float = 0.01) -> PotentialAnalysis:
    """Locate every local minimum inside ``search_window`` (radians)."""
    allocation = FluxAllocation.parse(allocation)
    if search_window is None:
        search_window = default_window(params, flux, allocation)
    lo, hi = map(float, search_window)
    if not hi - lo >= 2 * math.pi - 1e-12:
        raise InvalidArgumentError(f"search window must be at least 2*pi wide, got [{lo}, {hi}]")
    V, dV, d2V = _derivatives(params, reduced_flux(flux), allocation)

    n = int(math.ceil((hi - lo) / min(step, 0.01))) + 1
    grid = np.linspace(lo, hi, n)
    slope = dV(grid)
    # bracket sign changes of V' from - to +
    brackets = np.nonzero((slope[:-1] < 0) & (slope[1:] >= 0))[0]
    minima = []
    for i in brackets:
        a, b = grid[i], grid[i + 1]
        x = _newton_bracketed(dV, d2V, a, b)
        if lo <= x <= hi and d2V(x) > 0 and abs(dV(x)) < 1e-9:
            if not any(abs(x - m) < 1e-8 for m, _ in minima):
                minima.append((float(x), float(V(x))))
    minima.sort(key=lambda mv: (mv[1], mv[0]))
    return PotentialAnalysis(minima=minima, allocation=allocation, flux=flux)


def _newton_bracketed(f, df, a, b, max_iter=100):
    # safeguarded Newton: fall back to bisection when a step leaves [a, b]
    fa = f(a)
    x = 0.5 * (a + b)
    for _ in range(max_iter):
        fx = f(x)
        if fx == 0.0:
            return x
        if (fx < 0) == (fa < 0):
            a, fa = x, fx
        else:
            b = x
        d = df(x)
        step = fx / d if d != 0 else math.inf
        x_new = x - step
        if not a < x_new < b:
            x_new = 0.5 * (a + b)
        if abs(x_new - x) < 1e-15 * max(1.0, abs(x)):
            return x_new
        x = x_new
    return x


def global_minimum(analysis: PotentialAnalysis, degeneracy_tol: float = 1e-9) -> tuple[float, float]:
    """Lowest minimum; among (near-)degenerate ones the one at smallest phi."""
    if not analysis.minima:
        raise SingularConfigurationError("potential has no minimum in the search window")
    lowest = analysis.minima[0][1]
    tied = [mv for mv in analysis.minima if mv[1] - lowest <= degeneracy_tol]
    return min(tied, key=lambda mv: mv[0])


def perturbative_shift(params: CircuitParams, flux: float, allocation, delta_phi: float) -> float:
    """First-order displacement of the global minimum when phi_ext grows by ``delta_phi``."""
    allocation = FluxAllocation.parse(allocation)
    phi_bar, _ = global_minimum(find_minima(params, flux, allocation))
    E_J, E_L = params.E_J, params.E_L
    if allocation is FluxAllocation.INDUCTOR:
        curvature_j = E_J * math.cos(phi_bar)
        numerator = E_L
    else:
        curvature_j = E_J * math.cos(phi_bar + reduced_flux(flux))
        numerator = -curvature_j
    denom = E_L + curvature_j
    if abs(denom) < 1e-9:
        raise SingularConfigurationError(f"vanishing curvature at phi_bar={phi_bar:.6g} (denominator {denom:.3g} GHz)")
    return numerator / denom * delta_phi
