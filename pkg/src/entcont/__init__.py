"""Entanglement measures, state distances and numerical checks of their continuity bounds."""

from .bounds import (
    BoundReport,
    check_eof_continuity,
    check_fannes,
    check_pure_continuity,
    eof_continuity_rhs,
    fannes_rhs,
    proportionality_demo,
    tightness_row,
    tightness_state,
)
from .entanglement import (
    OptimizerConfig,
    ensemble_from_measurement,
    eof_minimize,
    eof_two_qubit,
    monotone_tilde,
    pure_entanglement,
)
from .linalg import hermitian_eig, psd_sqrt, trace_norm
from .metrics import bures_distance, entropy, eta, fidelity, shannon, trace_distance, uhlmann_purifications
from .states import (
    BipartiteDims,
    BipartiteState,
    DensityMatrix,
    PureState,
    RngSeed,
    bell,
    partial_trace,
    perturb,
    purify,
    sample_density,
    sample_haar_pure,
    werner,
)

__version__ = "0.1.0"
