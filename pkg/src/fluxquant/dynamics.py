"""Time-dependent Schroedinger evolution through a flux ramp.

Each step applies the midpoint exponential ``exp(-2 pi i H(t + dt/2) dt)``
(H in GHz, dt in ns), computed from a dense eigendecomposition so the step is
exactly unitary. Steps are aligned with the ramp's start and end so a linear
ramp's rate discontinuities never fall inside a step. Stretches of constant
flux are exponentiated in one exact step.

States carry the frame they are expressed in: the inductor frame, or the
junction frame (tagged with the junction allocation that evolved them).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import AccuracyError, ContractViolationError, InvalidArgumentError
from .hamiltonian import CircuitParams, FluxAllocation, build_static, build_timedep, diagonalize, reduced_flux
from .operators import BasisSpec, displacement, make_basis

__all__ = [
    "FluxPulse",
    "StateVector",
    "PropagatorConfig",
    "flux_profile",
    "evolve",
    "propagate",
    "gauge_transform",
    "eigenstate",
    "final_populations",
]

SHAPES = ("linear", "smoothstep")


@dataclass(frozen=True)
class FluxPulse:
    flux_start: float
    flux_end: float
    rise_ns: float = 1.0
    shape: str = "linear"
    t0: float = 0.0

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise InvalidArgumentError(f"pulse shape must be one of {SHAPES}, got {self.shape!r}")
        if not (math.isfinite(self.rise_ns) and self.rise_ns > 0):
            raise InvalidArgumentError(f"rise_ns must be positive, got {self.rise_ns!r}")
        if not (math.isfinite(self.t0) and self.t0 >= 0):
            raise InvalidArgumentError(f"t0 must be >= 0, got {self.t0!r}")
        for name in ("flux_start", "flux_end"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidArgumentError(f"{name} must be finite")

    @property
    def t_ramp_end(self) -> float:
        return self.t0 + self.rise_ns

    def reversed(self, t_end: float) -> "FluxPulse":
        """The pulse played backwards over [0, t_end]."""
        return replace(self, flux_start=self.flux_end, flux_end=self.flux_start, t0=t_end - self.t_ramp_end)


def flux_profile(pulse: FluxPulse, t: float) -> tuple[float, float]:
    """Return ``(Phi(t)/Phi_0, dphi_ext/dt in rad/ns)``."""
    if t <= pulse.t0:
        return pulse.flux_start, 0.0
    if t >= pulse.t_ramp_end:
        return pulse.flux_end, 0.0
    u = (t - pulse.t0) / pulse.rise_ns
    span = pulse.flux_end - pulse.flux_start
    if pulse.shape == "linear":
        s, ds = u, 1.0
    else:
        s, ds = u * u * (3.0 - 2.0 * u), 6.0 * u * (1.0 - u)
    return pulse.flux_start + span * s, 2.0 * math.pi * span * ds / pulse.rise_ns


@dataclass(frozen=True, eq=False)
class StateVector:
    coeffs: np.ndarray
    frame: FluxAllocation

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "frame", FluxAllocation.parse(self.frame))
        if c.ndim != 1:
            raise InvalidArgumentError("state coefficients must be a vector")
        if abs(np.linalg.norm(c) - 1.0) > 1e-9:
            raise InvalidArgumentError(f"state is not normalized (norm {np.linalg.norm(c):.12g})")


@dataclass(frozen=True)
class PropagatorConfig:
    dt: float = 5e-4
    t_end: float | None = None  # default: 0.1 ns after the ramp ends
    verify: bool = True
    tol: float = 1e-6

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise InvalidArgumentError(f"dt must be positive, got {self.dt!r}")

    def end_time(self, pulse: FluxPulse) -> float:
        t_end = pulse.t_ramp_end + 0.1 if self.t_end is None else float(self.t_end)
        if not t_end > pulse.t_ramp_end:
            raise InvalidArgumentError(f"t_end={t_end} must exceed the ramp end {pulse.t_ramp_end}")
        return t_end


def _same_frame(a: FluxAllocation, b: FluxAllocation) -> bool:
    return a.is_junction == b.is_junction


def _steps(pulse: FluxPulse, dt: float, t_end: float):
    """(t_start, duration) of every step, constant stretches as single steps."""
    steps = []
    if pulse.t0 > 0:
        steps.append((0.0, pulse.t0))
    n = max(1, int(math.ceil(pulse.rise_ns / dt - 1e-9)))
    h = pulse.rise_ns / n
    steps.extend((pulse.t0 + k * h, h) for k in range(n))
    steps.append((pulse.t_ramp_end, t_end - pulse.t_ramp_end))
    return steps


def evolve(params: CircuitParams, allocation, pulse: FluxPulse, psi0: StateVector, dt: float, t_end: float,
           basis: BasisSpec, conjugate: bool = False):
    """Yield ``(t, coeffs)`` after every step. ``conjugate`` uses exp(+2 pi i H dt)."""
    allocation = FluxAllocation.parse(allocation)
    sign = 1.0 if conjugate else -1.0
    psi = psi0.coeffs.copy()
    for t_start, h in _steps(pulse, dt, t_end):
        flux, rate = flux_profile(pulse, t_start + 0.5 * h)
        H = build_timedep(params, flux, rate, allocation, basis)
        e, V = np.linalg.eigh(H)
        psi = V @ (np.exp(sign * 2j * math.pi * h * e) * (V.conj().T @ psi))
        yield t_start + h, psi


def _run(params, allocation, pulse, psi0, dt, t_end, basis, conjugate):
    psi = psi0.coeffs
    for _, psi in evolve(params, allocation, pulse, psi0, dt, t_end, basis, conjugate):
        pass
    return psi


def propagate(params: CircuitParams, allocation, pulse: FluxPulse, psi0: StateVector,
              cfg: PropagatorConfig | None = None, basis: BasisSpec | int = 120,
              conjugate: bool = False) -> StateVector:
    """Evolve ``psi0`` through ``pulse`` and return the state at ``cfg.t_end``.

    With ``cfg.verify`` the run is repeated at dt/2 (and dt/4 if needed); the
    finest result is returned once successive coefficient magnitudes agree to
    ``cfg.tol``, otherwise AccuracyError is raised.
    """
    cfg = cfg or PropagatorConfig()
    allocation = FluxAllocation.parse(allocation)
    if not isinstance(basis, BasisSpec):
        basis = make_basis(params, basis)
    if not isinstance(psi0, StateVector):
        raise InvalidArgumentError("psi0 must be a StateVector")
    if not _same_frame(psi0.frame, allocation):
        raise ContractViolationError(f"state in {psi0.frame.value} frame cannot evolve under {allocation.value}")
    if psi0.coeffs.shape != (basis.dim,):
        raise ContractViolationError(f"state has {psi0.coeffs.size} coefficients, basis has {basis.dim}")
    t_end = cfg.end_time(pulse)

    dt = cfg.dt
    psi = _run(params, allocation, pulse, psi0, dt, t_end, basis, conjugate)
    if cfg.verify:
        changes = []
        for _ in range(2):
            dt /= 2
            finer = _run(params, allocation, pulse, psi0, dt, t_end, basis, conjugate)
            change = float(np.max(np.abs(np.abs(finer) - np.abs(psi))))
            changes.append((dt * 2, change))
            psi = finer
            if change <= cfg.tol:
                break
        else:
            raise AccuracyError(
                f"time stepping not converged: |coefficient| changes {changes[-1][1]:.3g} > {cfg.tol:g} "
                f"after two halvings of dt={cfg.dt:g} ns",
                diagnostics={"changes": changes, "dt": cfg.dt, "tol": cfg.tol},
            )
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-9:
        raise AccuracyError(f"norm drifted to {norm:.15g}", diagnostics={"norm": norm})
    return StateVector(psi, allocation)


def gauge_transform(psi: StateVector, flux: float, direction: str, basis: BasisSpec) -> StateVector:
    """Map between inductor and junction frames at flux ``flux``.

    ``to_junction`` applies exp(+i phi_ext n), which shifts the wavefunction
    by phi_ext: psi_J(phi) = psi_L(phi + phi_ext).
    """
    if direction == "to_junction":
        if psi.frame.is_junction:
            raise ContractViolationError("state is already in the junction frame")
        sign, frame = 1.0, FluxAllocation.JUNCTION_COMPLETE
    elif direction == "to_inductor":
        if not psi.frame.is_junction:
            raise ContractViolationError("state is already in the inductor frame")
        sign, frame = -1.0, FluxAllocation.INDUCTOR
    else:
        raise InvalidArgumentError(f"direction must be 'to_junction' or 'to_inductor', got {direction!r}")
    phi_ext = reduced_flux(flux)
    if phi_ext == 0.0:
        return StateVector(psi.coeffs.copy(), frame)
    out = displacement(basis, sign * phi_ext) @ psi.coeffs
    return StateVector(out / np.linalg.norm(out), frame)


def _static_states(params, flux, frame: FluxAllocation, basis, levels):
    H = build_static(params, flux, frame, basis)
    return diagonalize(H, levels, flux=flux, allocation=frame, params=params, basis=basis)


def eigenstate(params: CircuitParams, flux: float, allocation, basis: BasisSpec, index: int = 0) -> StateVector:
    """Static eigenstate ``index`` at ``flux``, in the frame of ``allocation``."""
    allocation = FluxAllocation.parse(allocation)
    spec = _static_states(params, flux, allocation, basis, index + 1)
    return StateVector(spec.states[:, index], allocation)


def final_populations(psi_final: StateVector, params: CircuitParams, flux_b: float, basis: BasisSpec,
                      levels: int = 12, allocation=None) -> np.ndarray:
    """|<m|psi>|^2 against static eigenstates at ``flux_b`` in the state's own frame."""
    if allocation is not None and not _same_frame(FluxAllocation.parse(allocation), psi_final.frame):
        raise ContractViolationError(
            f"state is in the {psi_final.frame.value} frame, populations requested for {FluxAllocation.parse(allocation).value}"
        )
    if psi_final.coeffs.shape != (basis.dim,):
        raise ContractViolationError("state and basis dimensions differ")
    spec = _static_states(params, flux_b, psi_final.frame, basis, min(levels, basis.dim))
    return np.abs(spec.states.conj().T @ psi_final.coeffs) ** 2
