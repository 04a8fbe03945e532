"""Run configuration: JSON document plus command-line overrides.

Every key has a default below; unknown keys are rejected so typos fail loudly.
"""
from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import InvalidArgumentError
from .hamiltonian import CircuitParams, FluxAllocation

DEFAULTS = {
    "params": {"E_C": 0.755, "E_J": 6.49, "E_L": 0.445},
    "basis_dim": 120,
    "allocation": "inductor",
    "out": None,
    "spectrum": {"flux_start": 0.0, "flux_stop": 1.0, "points": 201, "levels": 3, "relative": False},
    "wavefunction": {"flux": 0.5, "levels": [0, 1], "center": None, "half_width": 3 * math.pi, "points": 601},
    "sudden": {
        "flux_a": None,
        "flux_a_start": 0.498,
        "flux_a_stop": 0.503,
        "flux_a_step": 0.0005,
        "flux_b": 0.812,
        "levels_b": 12,
        "alpha": 0.05,
        "confusion": [[0.95, 0.04], [0.05, 0.96]],
        "band": False,
    },
    "dynamics": {
        "flux_start": 0.5,
        "flux_end": 0.812,
        "rise_ns": 1.0,
        "shape": "linear",
        "t0_ns": 0.0,
        "t_end_ns": None,
        "dt_ns": 5e-4,
        "stride": 100,
        "levels": 12,
        "verify": True,
    },
    "fit": {"initial_guess": {"E_C": 0.755, "E_J": 6.49, "E_L": 0.445}, "basis_dim": 80, "verify_dim": 120, "max_iter": 500},
}

# keys whose default is None but which accept a value
_NULLABLE = {"out", "wavefunction.center", "sudden.flux_a", "dynamics.t_end_ns"}


def _merge(base: dict, override: dict, prefix: str = "") -> None:
    for key, value in override.items():
        path = f"{prefix}{key}"
        if key not in base:
            raise InvalidArgumentError(f"unknown config key '{path}'")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise InvalidArgumentError(f"config key '{path}' must be an object")
            _merge(base[key], value, path + ".")
        else:
            base[key] = value


def _set(doc: dict, dotted: str, value) -> None:
    parts = dotted.split(".")
    node = doc
    for i, part in enumerate(parts):
        if not isinstance(node, dict) or part not in node:
            raise InvalidArgumentError(f"unknown config key '{'.'.join(parts[: i + 1])}'")
        if i == len(parts) - 1:
            node[part] = value
        else:
            node = node[part]


def parse_assignment(text: str):
    if "=" not in text:
        raise InvalidArgumentError(f"--set expects key=value, got {text!r}")
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


def load_document(path=None, assignments=(), overrides=None) -> dict:
    doc = copy.deepcopy(DEFAULTS)
    if path is not None:
        text = Path(path).read_text()
        try:
            user = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidArgumentError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(user, dict):
            raise InvalidArgumentError(f"{path}: top level must be an object")
        _merge(doc, user)
    for key, value in (overrides or {}).items():
        _set(doc, key, value)
    for text in assignments:
        _set(doc, *parse_assignment(text))
    return doc


def _number(doc, dotted, *, positive=False, integer=False, lo=None, hi=None):
    node = doc
    for part in dotted.split("."):
        node = node[part]
    if node is None and dotted in _NULLABLE:
        return None
    if isinstance(node, bool) or not isinstance(node, (int, float)) or not math.isfinite(node):
        raise InvalidArgumentError(f"config key '{dotted}' must be a finite number, got {node!r}")
    if integer and int(node) != node:
        raise InvalidArgumentError(f"config key '{dotted}' must be an integer, got {node!r}")
    if positive and node <= 0:
        raise InvalidArgumentError(f"config key '{dotted}' must be positive, got {node!r}")
    if lo is not None and node < lo or hi is not None and node > hi:
        raise InvalidArgumentError(f"config key '{dotted}' must lie in [{lo}, {hi}], got {node!r}")
    return int(node) if integer else float(node)


def _params(block, key):
    try:
        return CircuitParams(**{k: float(block[k]) for k in ("E_C", "E_J", "E_L")})
    except (InvalidArgumentError, TypeError, ValueError) as exc:
        raise InvalidArgumentError(f"config key '{key}': {exc}") from None


@dataclass
class RunConfig:
    params: CircuitParams
    basis_dim: int
    allocation: FluxAllocation
    doc: dict

    @classmethod
    def from_document(cls, doc: dict) -> "RunConfig":
        params = _params(doc["params"], "params")
        basis_dim = _number(doc, "basis_dim", integer=True, lo=2)
        try:
            allocation = FluxAllocation.parse(doc["allocation"])
        except InvalidArgumentError as exc:
            raise InvalidArgumentError(f"config key 'allocation': {exc}") from None
        _number(doc, "sudden.alpha", lo=0.0, hi=1.0)
        _number(doc, "dynamics.dt_ns", positive=True)
        _number(doc, "dynamics.rise_ns", positive=True)
        return cls(params, basis_dim, allocation, doc)

    def block(self, name: str) -> dict:
        return self.doc[name]

    def number(self, dotted, **kw):
        return _number(self.doc, dotted, **kw)

    def fit_guess(self) -> CircuitParams:
        return _params(self.doc["fit"]["initial_guess"], "fit.initial_guess")
