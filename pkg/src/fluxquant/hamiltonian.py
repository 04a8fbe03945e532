"""Fluxonium Hamiltonians under the three flux allocations.

Units: h = 1, energies in GHz, time in ns, flux as Phi/Phi_0, phases in rad.

Inductor allocation::

    H = 4 E_C n^2 - E_J cos(phi) + E_L/2 (phi - phi_ext)^2

Junction allocation::

    H = 4 E_C n^2 - E_J cos(phi + phi_ext) + E_L/2 phi^2 [- n dphi_ext/dt / (2 pi)]

The bracketed term is the flux-rate term ``-2e n dPhi/dt`` written in these
units (``2e Phi_0 / 2 pi = hbar``, and dividing by h leaves a factor 1/2 pi
when the rate is in rad/ns). JUNCTION_COMPLETE keeps it, JUNCTION_INCOMPLETE
drops it. The two junction variants are identical at zero rate.

The inductor and junction frames are related by the translation
``psi_J(phi) = psi_L(phi + phi_ext)``, i.e. ``psi_J = exp(i phi_ext n) psi_L``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolationError, InvalidArgumentError
from .operators import (
    BasisSpec,
    charge_operator,
    charge_squared,
    cos_sin_phase,
    make_basis,
    phase_operator,
)

__all__ = [
    "CircuitParams",
    "PAPER_PARAMS",
    "FluxAllocation",
    "Spectrum",
    "reduced_flux",
    "build_static",
    "build_timedep",
    "diagonalize",
    "solve",
    "spectrum_vs_flux",
]


@dataclass(frozen=True)
class CircuitParams:
    """Charging, Josephson and inductive energies over h, in GHz."""

    E_C: float
    E_J: float
    E_L: float

    def __post_init__(self):
        for name in ("E_C", "E_J", "E_L"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float, np.floating)) and math.isfinite(v) and v > 0):
                raise InvalidArgumentError(f"{name} must be positive and finite, got {v!r}")

    def as_dict(self):
        return {"E_C": self.E_C, "E_J": self.E_J, "E_L": self.E_L}


PAPER_PARAMS = CircuitParams(E_C=0.755, E_J=6.49, E_L=0.445)


class FluxAllocation(enum.Enum):
    INDUCTOR = "inductor"
    JUNCTION_COMPLETE = "junction-complete"
    JUNCTION_INCOMPLETE = "junction-incomplete"

    @property
    def is_junction(self) -> bool:
        return self is not FluxAllocation.INDUCTOR

    @classmethod
    def parse(cls, value) -> "FluxAllocation":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        for member in cls:
            if member.value == key:
                return member
        raise InvalidArgumentError(
            f"unknown allocation {value!r}; expected one of {', '.join(m.value for m in cls)}"
        )


def reduced_flux(flux: float) -> float:
    """phi_ext = 2 pi Phi/Phi_0."""
    if not math.isfinite(flux):
        raise InvalidArgumentError(f"flux must be finite, got {flux!r}")
    return 2.0 * math.pi * flux


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Lowest eigenpairs of a Hamiltonian, ascending.

    ``states[:, j]`` is eigenvector j in the oscillator basis, with the phase
    chosen so that its largest-magnitude coefficient is real and positive.
    """

    energies: np.ndarray
    states: np.ndarray
    flux: float | None = None
    allocation: FluxAllocation | None = None
    params: CircuitParams | None = None
    basis: BasisSpec | None = field(default=None, repr=False)

    def __len__(self):
        return len(self.energies)

    def transition(self, i: int, j: int) -> float:
        return float(self.energies[j] - self.energies[i])


def _kinetic_and_inductive(params: CircuitParams, basis: BasisSpec, phi_shift: float) -> np.ndarray:
    phi = phase_operator(basis)
    shifted = phi - phi_shift * np.eye(basis.dim)
    return 4.0 * params.E_C * charge_squared(basis) + 0.5 * params.E_L * (shifted @ shifted)


def build_static(params: CircuitParams, flux: float, allocation, basis: BasisSpec) -> np.ndarray:
    """Static Hamiltonian matrix (GHz). Real symmetric for every allocation."""
    if not isinstance(params, CircuitParams):
        raise InvalidArgumentError("params must be a CircuitParams")
    allocation = FluxAllocation.parse(allocation)
    phi_ext = reduced_flux(flux)
    if allocation is FluxAllocation.INDUCTOR:
        cos_phi, _ = cos_sin_phase(basis, 0.0)
        return _kinetic_and_inductive(params, basis, phi_ext) - params.E_J * cos_phi
    cos_phi, _ = cos_sin_phase(basis, phi_ext)
    return _kinetic_and_inductive(params, basis, 0.0) - params.E_J * cos_phi


def build_timedep(params: CircuitParams, flux_value: float, flux_rate: float, allocation, basis: BasisSpec) -> np.ndarray:
    """Instantaneous Hamiltonian at flux ``flux_value`` changing at ``flux_rate`` (rad/ns)."""
    if flux_rate is None or math.isnan(flux_rate) or math.isinf(flux_rate):
        raise InvalidArgumentError(f"flux_rate must be finite, got {flux_rate!r}")
    allocation = FluxAllocation.parse(allocation)
    h = build_static(params, flux_value, allocation, basis)
    if allocation is FluxAllocation.JUNCTION_COMPLETE and flux_rate != 0.0:
        return h - (flux_rate / (2.0 * math.pi)) * charge_operator(basis)
    return h


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(vecs), axis=0)
    lead = vecs[idx, np.arange(vecs.shape[1])]
    return vecs * (np.abs(lead) / lead)


def diagonalize(H: np.ndarray, k: int | None = None, *, flux=None, allocation=None, params=None, basis=None) -> Spectrum:
    """Lowest ``k`` eigenpairs of Hermitian ``H`` (all of them if ``k`` is None)."""
    H = np.asarray(H)
    dim = H.shape[0]
    if H.ndim != 2 or H.shape != (dim, dim):
        raise ContractViolationError(f"Hamiltonian must be square, got shape {H.shape}")
    scale = max(1.0, float(np.max(np.abs(H))))
    if np.max(np.abs(H - H.conj().T)) > 1e-12 * scale:
        raise ContractViolationError("Hamiltonian is not Hermitian")
    k = dim if k is None else int(k)
    if not 1 <= k <= dim:
        raise InvalidArgumentError(f"k must lie in [1, {dim}], got {k}")
    energies, vecs = np.linalg.eigh(H)
    vecs = _fix_phases(vecs[:, :k])
    if allocation is not None:
        allocation = FluxAllocation.parse(allocation)
    return Spectrum(energies[:k].copy(), vecs, flux, allocation, params, basis)


def solve(params: CircuitParams, flux: float, allocation=FluxAllocation.INDUCTOR, basis: BasisSpec | int = 120, k: int | None = 6) -> Spectrum:
    """Build the static Hamiltonian and diagonalize it."""
    if not isinstance(basis, BasisSpec):
        basis = make_basis(params, basis)
    allocation = FluxAllocation.parse(allocation)
    H = build_static(params, flux, allocation, basis)
    return diagonalize(H, k, flux=flux, allocation=allocation, params=params, basis=basis)


def spectrum_vs_flux(params: CircuitParams, flux_list, levels: int = 3, basis: BasisSpec | int = 120, relative: bool = False) -> np.ndarray:
    """Table with one row ``(flux, E_0, ..., E_{levels-1})`` per flux value.

    With ``relative=True`` energies are measured from E_0 of the same row.
    """
    fluxes = [float(f) for f in flux_list]
    if not fluxes:
        raise InvalidArgumentError("flux_list is empty")
    if not isinstance(basis, BasisSpec):
        basis = make_basis(params, basis)
    table = np.empty((len(fluxes), levels + 1))
    for row, f in enumerate(fluxes):
        e = np.linalg.eigvalsh(build_static(params, f, FluxAllocation.INDUCTOR, basis))[:levels]
        table[row, 0] = f
        table[row, 1:] = e - e[0] if relative else e
    return table
