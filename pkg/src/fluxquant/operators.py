"""Truncated harmonic-oscillator basis and the operators built in it.

The basis is the number basis of the oscillator formed by the charging and
inductive terms alone, with length ``l = (8 E_C / E_L)**(1/4)``, so that

    phi = l / sqrt(2) * (a + a^dag)
    n   = i / (sqrt(2) l) * (a^dag - a)

Trigonometric functions of phi are spectral functions of the *truncated*
phi matrix. Matrices are returned as plain numpy arrays and are cached per
basis; treat them as read-only.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError

__all__ = [
    "BasisSpec",
    "make_basis",
    "phase_operator",
    "charge_operator",
    "charge_squared",
    "cos_sin_phase",
    "displacement",
    "eigenfunction_on_grid",
    "is_hermitian",
]


@dataclass(frozen=True)
class BasisSpec:
    dim: int
    osc_length: float

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 2:
            raise InvalidArgumentError(f"basis dim must be an integer >= 2, got {self.dim!r}")
        if not (math.isfinite(self.osc_length) and self.osc_length > 0):
            raise InvalidArgumentError(f"osc_length must be positive and finite, got {self.osc_length!r}")


def make_basis(params, dim: int = 120) -> BasisSpec:
    """Oscillator basis for ``params`` (anything with ``E_C`` and ``E_L``)."""
    E_C, E_L = params.E_C, params.E_L
    if not (E_C > 0 and E_L > 0 and math.isfinite(E_C) and math.isfinite(E_L)):
        raise InvalidArgumentError(f"E_C and E_L must be positive and finite, got E_C={E_C!r}, E_L={E_L!r}")
    return BasisSpec(dim=int(dim), osc_length=(8.0 * E_C / E_L) ** 0.25)


def is_hermitian(m: np.ndarray, atol: float = 1e-12) -> bool:
    return m.ndim == 2 and m.shape[0] == m.shape[1] and float(np.max(np.abs(m - m.conj().T), initial=0.0)) < atol


def _readonly(a):
    a.setflags(write=False)
    return a


@functools.lru_cache(maxsize=32)
def phase_operator(basis: BasisSpec) -> np.ndarray:
    off = basis.osc_length / math.sqrt(2) * np.sqrt(np.arange(1, basis.dim, dtype=float))
    return _readonly(np.diag(off, 1) + np.diag(off, -1))


@functools.lru_cache(maxsize=32)
def charge_operator(basis: BasisSpec) -> np.ndarray:
    off = np.sqrt(np.arange(1, basis.dim, dtype=float)) / (math.sqrt(2) * basis.osc_length)
    # <k|a^dag - a|k+1> = -sqrt(k+1), <k+1|a^dag - a|k> = +sqrt(k+1)
    return _readonly(1j * (np.diag(off, -1) - np.diag(off, 1)))


@functools.lru_cache(maxsize=32)
def charge_squared(basis: BasisSpec) -> np.ndarray:
    """n @ n of the truncated charge matrix; real symmetric."""
    n = charge_operator(basis)
    return _readonly(np.ascontiguousarray((n @ n).real))


@functools.lru_cache(maxsize=32)
def _phase_eigensystem(basis: BasisSpec):
    return np.linalg.eigh(phase_operator(basis))


@functools.lru_cache(maxsize=32)
def _charge_eigensystem(basis: BasisSpec):
    return np.linalg.eigh(charge_operator(basis))


@functools.lru_cache(maxsize=32)
def _cos_sin_zero(basis: BasisSpec):
    w, v = _phase_eigensystem(basis)
    return _readonly((v * np.cos(w)) @ v.T), _readonly((v * np.sin(w)) @ v.T)


def cos_sin_phase(basis: BasisSpec, offset: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(cos(phi + offset), sin(phi + offset))`` as real symmetric matrices."""
    if not math.isfinite(offset):
        raise InvalidArgumentError(f"offset must be finite, got {offset!r}")
    c, s = _cos_sin_zero(basis)
    if offset == 0.0:
        return c, s
    co, so = math.cos(offset), math.sin(offset)
    return co * c - so * s, so * c + co * s


def displacement(basis: BasisSpec, shift: float) -> np.ndarray:
    """Unitary ``exp(i * shift * n)``; maps psi(phi) to psi(phi + shift)."""
    w, v = _charge_eigensystem(basis)
    return (v * np.exp(1j * shift * w)) @ v.conj().T


def eigenfunction_on_grid(basis: BasisSpec, coeffs, grid) -> np.ndarray:
    """Evaluate ``sum_k coeffs[k] * chi_k(phi)`` at the points of ``grid``.

    chi_k are the normalized oscillator eigenfunctions of width ``osc_length``.
    The Hermite-function recurrence runs without the Gaussian factor and is
    rescaled whenever it grows large; the accumulated log-scale is folded back
    together with the Gaussian at the end, so neither overflow nor premature
    underflow occurs for large k or |phi|.
    """
    coeffs = np.asarray(coeffs)
    if coeffs.shape != (basis.dim,):
        raise InvalidArgumentError(f"expected {basis.dim} coefficients, got shape {coeffs.shape}")
    x = np.atleast_1d(np.asarray(grid, dtype=float)) / basis.osc_length
    log_scale = np.zeros_like(x)
    prev = np.zeros_like(x)
    cur = np.ones_like(x)  # chi_0 without its prefactor and Gaussian
    acc = coeffs[0] * cur
    for k in range(1, basis.dim):
        nxt = math.sqrt(2.0 / k) * x * cur - math.sqrt((k - 1) / k) * prev
        prev, cur = cur, nxt
        big = np.abs(cur) > 1e150
        if big.any():
            for arr in (prev, cur, acc):
                arr[big] *= 1e-150
            log_scale[big] += 150 * math.log(10)
        acc = acc + coeffs[k] * cur
    norm = (math.pi * basis.osc_length**2) ** -0.25
    return norm * acc * np.exp(log_scale - 0.5 * x**2)
