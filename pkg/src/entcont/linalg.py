"""Dense complex linear algebra kernel.

Hermitian eigendecomposition, the PSD square root and the trace norm.  All
other modules go through these so tolerance handling lives in one place.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import NegativeSpectrum, NotHermitian, NotSquare

TAU_HERM = 1e-9
TAU_PSD = 1e-9
TAU_RECON = 1e-8


class EigenSystem(NamedTuple):
    """Eigenvalues (descending) and the matching unitary eigenvector matrix."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise NotSquare(f"expected a non-empty 2-d matrix, got shape {a.shape}")
    return a


def hermiticity_error(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T)))


def check_hermitian(m, tol: float = TAU_HERM) -> np.ndarray:
    """Return ``m`` as a complex square array, raising if it is not Hermitian."""
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise NotSquare(f"matrix of shape {a.shape} is not square")
    err = hermiticity_error(a)
    if err > tol:
        raise NotHermitian(f"max |m - m^dagger| = {err:.3e} exceeds {tol:.1e}")
    return a


def hermitian_eig(m, tol: float = TAU_HERM) -> EigenSystem:
    """Eigendecomposition of a Hermitian matrix, eigenvalues sorted descending.

    Ties keep LAPACK's order (stable sort), so degenerate spectra give
    reproducible eigenvector orderings.
    """
    a = check_hermitian(m, tol)
    # symmetrize so that round-off in the input does not leak into eigh
    w, v = np.linalg.eigh(0.5 * (a + a.conj().T))
    order = np.argsort(-w, kind="stable")
    return EigenSystem(w[order], v[:, order])


def eigvalsh_desc(m, tol: float = TAU_HERM) -> np.ndarray:
    a = check_hermitian(m, tol)
    return np.linalg.eigvalsh(0.5 * (a + a.conj().T))[::-1]


def clamp_spectrum(w: np.ndarray, tol: float = TAU_PSD, cutoff: float = 0.0) -> np.ndarray:
    """Zero eigenvalues in ``[-tol, cutoff]``; raise on anything more negative."""
    w = np.asarray(w, dtype=float)
    if w.size and w.min() < -tol:
        raise NegativeSpectrum(f"eigenvalue {w.min():.3e} below -{tol:.1e}")
    return np.where(w <= cutoff, 0.0, w)


def psd_sqrt(m, tol: float = TAU_PSD, cutoff: float = 0.0) -> np.ndarray:
    """Square root of a Hermitian positive semidefinite matrix.

    Eigenvalues in ``[-tol, 0)`` are treated as round-off and clamped to zero.
    ``cutoff`` optionally widens the clamp to small positive eigenvalues; the
    fidelity uses this to keep noise-level eigenvalues from being square-rooted
    into ``1e-8``-sized errors.
    """
    eig = hermitian_eig(m)
    w = clamp_spectrum(eig.eigenvalues, tol, cutoff)
    v = eig.eigenvectors
    r = (v * np.sqrt(w)) @ v.conj().T
    return 0.5 * (r + r.conj().T)


def trace_norm(m, tol: float = TAU_HERM) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    return float(np.sum(np.abs(eigvalsh_desc(m, tol))))


def is_unitary(u: np.ndarray, tol: float = TAU_HERM) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))) <= tol


def polar_unitary(u: np.ndarray) -> np.ndarray:
    """Closest unitary to ``u`` in Frobenius norm; used to wipe out drift."""
    left, _, right = np.linalg.svd(u)
    return left @ right
