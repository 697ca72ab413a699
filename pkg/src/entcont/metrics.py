"""Entropies and state distances.

Logarithms are base 2 throughout.  The trace distance is the unhalved
``tr|rho - sigma|`` (range ``[0, 2]``); every bound coefficient elsewhere in
the package assumes this normalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidDistribution, InvalidState, OutOfDomain, RefTooSmall
from .linalg import TAU_PSD, clamp_spectrum, eigvalsh_desc, psd_sqrt, trace_norm
from .states import DensityMatrix, PureState, purification_matrix

LOG2_E_OVER_E = math.log2(math.e) / math.e
# noise floor for eigenvalues that are about to be square-rooted
SQRT_CUTOFF = 1e-14


def _mat(rho) -> np.ndarray:
    if isinstance(rho, (DensityMatrix,)):
        return rho.mat
    return np.asarray(rho, dtype=complex)


def _pair(rho, sigma) -> tuple[np.ndarray, np.ndarray]:
    a, b = _mat(rho), _mat(sigma)
    if a.shape != b.shape:
        raise DimensionMismatch(f"states of shape {a.shape} and {b.shape}")
    return a, b


def entropy_of_spectrum(w) -> float:
    w = np.asarray(w, dtype=float)
    w = w[w > 0]
    return max(float(-np.sum(w * np.log2(w))), 0.0)


def entropy(rho) -> float:
    """Von Neumann entropy in bits, with ``0 log 0 = 0``."""
    try:
        w = clamp_spectrum(eigvalsh_desc(_mat(rho)), TAU_PSD)
    except ValueError as exc:
        raise InvalidState(str(exc)) from exc
    return entropy_of_spectrum(w)


def shannon(p) -> float:
    """Shannon entropy in bits of a probability vector."""
    p = np.asarray(p, dtype=float).ravel()
    if p.size == 0 or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise InvalidDistribution(f"not a probability vector: {p}")
    return entropy_of_spectrum(p)


def eta(x: float) -> float:
    """``-x log2 x`` on ``[0, 1]``; increasing up to ``1/e``."""
    if not 0.0 <= x <= 1.0:
        raise OutOfDomain(f"eta is defined on [0, 1], got {x}")
    return 0.0 if x == 0.0 else -x * math.log2(x)


def trace_distance(rho, sigma) -> float:
    a, b = _pair(rho, sigma)
    return trace_norm(a - b)


def fidelity(rho, sigma) -> float:
    """``tr sqrt(rho^1/2 sigma rho^1/2)`` from the spectrum of the inner product."""
    a, b = _pair(rho, sigma)
    s = psd_sqrt(a, cutoff=SQRT_CUTOFF)
    inner = s @ b @ s
    mu = clamp_spectrum(eigvalsh_desc(0.5 * (inner + inner.conj().T)), TAU_PSD, cutoff=SQRT_CUTOFF)
    return float(min(np.sum(np.sqrt(mu)), 1.0))


def bures_distance(rho, sigma) -> float:
    """``2 sqrt(1 - F)``; scaled so pure orthogonal states sit at distance 2."""
    return bures_from_fidelity(fidelity(rho, sigma))


def bures_from_fidelity(f: float) -> float:
    return 2.0 * math.sqrt(max(1.0 - f, 0.0))


def pure_trace_distance(overlap: float) -> float:
    """Trace distance between two pure states with ``|<psi|phi>| = overlap``."""
    return 2.0 * math.sqrt(max(1.0 - overlap * overlap, 0.0))


@dataclass(frozen=True)
class UhlmannPair:
    pur_rho: PureState
    pur_sigma: PureState
    achieved_overlap: float
    # reference-side unitary applied to sigma's spectral purification
    rotation: np.ndarray
    ref_dim: int


def uhlmann_purifications(rho, sigma, ref_dim: int | None = None) -> UhlmannPair:
    """Purifications of ``rho`` and ``sigma`` whose overlap attains the fidelity.

    Both states are first purified spectrally.  The overlap after rotating the
    reference of sigma's purification by ``W`` is ``tr(M W^T)`` with
    ``M = P_rho^dagger P_sigma``; writing ``M = U S V^dagger`` the choice
    ``W = conj(U) V^T`` turns it into ``sum(S)``, its maximum.
    """
    a, b = _pair(rho, sigma)
    d = a.shape[0]
    ref_dim = d if ref_dim is None else ref_dim
    if ref_dim < d:
        raise RefTooSmall(f"reference dimension {ref_dim} smaller than system dimension {d}")
    pr = purification_matrix(a, ref_dim)
    ps = purification_matrix(b, ref_dim)
    u, s, vh = np.linalg.svd(pr.conj().T @ ps)
    w = u.conj() @ vh.conj()
    ps_rot = ps @ w.T
    vr, vs = pr.ravel(), ps_rot.ravel()
    overlap = abs(np.vdot(vr, vs))
    return UhlmannPair(PureState(vr), PureState(vs), float(overlap), w, ref_dim)


__all__ = [
    "entropy",
    "shannon",
    "eta",
    "trace_distance",
    "fidelity",
    "bures_distance",
    "uhlmann_purifications",
    "UhlmannPair",
]
