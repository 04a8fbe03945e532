"""Fluxonium circuits under static and time-dependent external flux."""
from .errors import (
    AccuracyError,
    ContractViolationError,
    FluxquantError,
    InvalidArgumentError,
    ParseError,
    SingularConfigurationError,
)
from .hamiltonian import (
    PAPER_PARAMS,
    CircuitParams,
    FluxAllocation,
    Spectrum,
    build_static,
    build_timedep,
    diagonalize,
    solve,
    spectrum_vs_flux,
)
from .operators import BasisSpec, make_basis

__version__ = "0.1.0"
