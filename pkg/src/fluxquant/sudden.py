"""Sudden flux-ramp predictions: eigenbasis overlaps, preparation error, readout confusion.

A ramp much faster than the relevant level spacings leaves the state unchanged,
so the post-ramp populations are squared overlaps between the initial state and
the eigenstates at the final flux. Which eigenstates those are depends on the
flux allocation:

* INDUCTOR: the physically correct frame, overlaps taken directly.
* JUNCTION_INCOMPLETE: overlaps of junction-allocated eigenstates, i.e. the
  state is held fixed in the junction variable while the flux jumps. This is
  what dropping the flux-rate term predicts.
* JUNCTION_COMPLETE: the flux-rate term integrates to the frame kick
  ``exp(i (phi_b - phi_a) n)`` across an instantaneous ramp, which restores
  the inductor result.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolationError, InvalidArgumentError
from .hamiltonian import CircuitParams, FluxAllocation, Spectrum, reduced_flux, solve
from .operators import BasisSpec, displacement, make_basis

__all__ = [
    "PAPER_CONFUSION",
    "ConfusionMatrix",
    "PreparationModel",
    "SuddenExperimentConfig",
    "OccupationTable",
    "overlap_probabilities",
    "mixed_probabilities",
    "apply_confusion",
    "simulate_experiment",
    "default_flux_a_sweep",
]

PAPER_CONFUSION = ((0.95, 0.04), (0.05, 0.96))


@dataclass(frozen=True)
class ConfusionMatrix:
    """Column-stochastic map from true (p0, p1) to reported (p0', p1')."""

    matrix: tuple = PAPER_CONFUSION

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.shape != (2, 2):
            raise InvalidArgumentError(f"confusion matrix must be 2x2, got shape {m.shape}")
        if np.any(m < 0) or np.any(m > 1) or not np.allclose(m.sum(axis=0), 1.0, atol=1e-12, rtol=0):
            raise InvalidArgumentError(f"confusion matrix must be column-stochastic, got {m.tolist()}")
        object.__setattr__(self, "matrix", tuple(map(tuple, m.tolist())))

    @classmethod
    def identity(cls):
        return cls(((1.0, 0.0), (0.0, 1.0)))

    def as_array(self):
        return np.array(self.matrix)


@dataclass(frozen=True)
class PreparationModel:
    alpha: float = 0.05

    def __post_init__(self):
        if not (isinstance(self.alpha, (int, float)) and 0.0 <= self.alpha <= 1.0):
            raise InvalidArgumentError(f"alpha must lie in [0, 1], got {self.alpha!r}")


def default_flux_a_sweep(start=0.498, stop=0.503, step=0.0005):
    n = int(round((stop - start) / step))
    return [round(start + i * step, 10) for i in range(n + 1)]


@dataclass(frozen=True)
class SuddenExperimentConfig:
    flux_a_list: tuple = field(default_factory=lambda: tuple(default_flux_a_sweep()))
    flux_b: float = 0.812
    levels_b: int = 12
    allocation: FluxAllocation = FluxAllocation.INDUCTOR
    alpha: float = 0.05
    confusion: ConfusionMatrix = field(default_factory=ConfusionMatrix)

    def __post_init__(self):
        object.__setattr__(self, "flux_a_list", tuple(float(f) for f in self.flux_a_list))
        object.__setattr__(self, "allocation", FluxAllocation.parse(self.allocation))
        if not self.flux_a_list:
            raise InvalidArgumentError("flux_a_list is empty")
        if int(self.levels_b) != self.levels_b or self.levels_b < 2:
            raise InvalidArgumentError(f"levels_b must be an integer >= 2, got {self.levels_b!r}")
        PreparationModel(self.alpha)
        if not isinstance(self.confusion, ConfusionMatrix):
            object.__setattr__(self, "confusion", ConfusionMatrix(self.confusion))


@dataclass
class OccupationTable:
    """Rows of sudden-ramp predictions, one per initial flux.

    ``raw[i, m]`` is p_m for flux_a[i]; ``corrected[i]`` is (p0', p1').
    Readout correction touches only the qubit pair; leaked population is
    treated as unreported, so corrected pairs may sum to less than one.
    """

    flux_a: np.ndarray
    raw: np.ndarray
    corrected: np.ndarray
    allocation: FluxAllocation
    alpha: float
    flux_b: float
    notes: dict = field(default_factory=lambda: {"confusion": "2x2 qubit subspace only; leakage unreported"})

    @property
    def subspace(self) -> np.ndarray:
        return self.raw[:, 0] + self.raw[:, 1]

    def rows(self):
        for i, fa in enumerate(self.flux_a):
            yield (float(fa), float(self.raw[i, 0]), float(self.raw[i, 1]), float(self.subspace[i]),
                   float(self.corrected[i, 0]), float(self.corrected[i, 1]))


def _check_pair(spec_a: Spectrum, spec_b: Spectrum):
    if spec_a.states.shape[0] != spec_b.states.shape[0]:
        raise ContractViolationError("spectra live in bases of different dimension")
    if spec_a.allocation is None or spec_b.allocation is None:
        raise ContractViolationError("spectra must be tagged with their allocation")
    if spec_a.allocation is not spec_b.allocation:
        raise ContractViolationError(
            f"allocation mismatch: {spec_a.allocation.value} vs {spec_b.allocation.value}"
        )
    if spec_a.basis is not None and spec_b.basis is not None and spec_a.basis != spec_b.basis:
        raise ContractViolationError("spectra were computed in different oscillator bases")


def _carried_state(spec_a: Spectrum, spec_b: Spectrum, index: int) -> np.ndarray:
    psi = spec_a.states[:, index]
    if spec_a.allocation is FluxAllocation.JUNCTION_COMPLETE:
        if spec_a.flux is None or spec_b.flux is None or spec_a.basis is None:
            raise ContractViolationError("junction-complete overlaps need flux and basis on both spectra")
        kick = reduced_flux(spec_b.flux) - reduced_flux(spec_a.flux)
        psi = displacement(spec_a.basis, kick) @ psi
    return psi


def overlap_probabilities(spec_a: Spectrum, spec_b: Spectrum, initial_index: int = 0) -> np.ndarray:
    """p_m = |<m_b|initial_a>|^2 for every state m held in ``spec_b``."""
    _check_pair(spec_a, spec_b)
    if not 0 <= initial_index < len(spec_a):
        raise InvalidArgumentError(f"initial_index {initial_index} outside spectrum of {len(spec_a)} states")
    psi = _carried_state(spec_a, spec_b, initial_index)
    return np.abs(spec_b.states.conj().T @ psi) ** 2


def mixed_probabilities(spec_a: Spectrum, spec_b: Spectrum, prep) -> np.ndarray:
    """Populations for the prepared mixture (1 - alpha)|0><0| + alpha |1><1|."""
    if not isinstance(prep, PreparationModel):
        prep = PreparationModel(prep)
    if len(spec_a) < 2:
        raise InvalidArgumentError("initial spectrum must hold at least two states")
    a = prep.alpha
    return (1.0 - a) * overlap_probabilities(spec_a, spec_b, 0) + a * overlap_probabilities(spec_a, spec_b, 1)


def apply_confusion(p0: float, p1: float, M=None) -> tuple[float, float]:
    if M is None:
        M = ConfusionMatrix()
    elif not isinstance(M, ConfusionMatrix):
        M = ConfusionMatrix(M)
    for name, p in (("p0", p0), ("p1", p1)):
        if not -1e-12 <= p <= 1 + 1e-12:
            raise InvalidArgumentError(f"{name} must lie in [0, 1], got {p!r}")
    (a, b), (c, d) = M.matrix
    return a * p0 + b * p1, c * p0 + d * p1


def simulate_experiment(params: CircuitParams, config: SuddenExperimentConfig, basis: BasisSpec | int = 120) -> OccupationTable:
    """Sweep the initial flux and predict raw and readout-corrected populations."""
    if not isinstance(basis, BasisSpec):
        basis = make_basis(params, basis)
    levels_b = min(int(config.levels_b), basis.dim)
    spec_b = solve(params, config.flux_b, config.allocation, basis, levels_b)
    prep = PreparationModel(config.alpha)
    raw = np.empty((len(config.flux_a_list), levels_b))
    corrected = np.empty((len(config.flux_a_list), 2))
    for i, fa in enumerate(config.flux_a_list):
        spec_a = solve(params, fa, config.allocation, basis, 2)
        raw[i] = mixed_probabilities(spec_a, spec_b, prep)
        corrected[i] = apply_confusion(min(raw[i, 0], 1.0), min(raw[i, 1], 1.0), config.confusion)
    return OccupationTable(
        flux_a=np.array(config.flux_a_list), raw=raw, corrected=corrected,
        allocation=config.allocation, alpha=config.alpha, flux_b=config.flux_b,
    )
