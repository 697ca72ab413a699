"""State containers, partial traces, purification and seeded sampling.

Composite systems are always ordered with the first factor as the slow index:
the basis vector ``|a>|b>`` of ``A (x) B`` sits at position ``a * dB + b``.  The
same rule applies to purifications, where the purified system comes first and
the reference system second.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import (
    AmplitudeOutOfRange,
    DimensionMismatch,
    InvalidState,
    ParseError,
    RefTooSmall,
)
from .linalg import TAU_PSD, check_hermitian, clamp_spectrum, hermitian_eig

TRACE_TOL = 1e-9
NORM_TOL = 1e-9
# eigenvalues at or below this are treated as exact zeros when counting rank
RANK_TOL = 1e-12


@dataclass(frozen=True)
class RngSeed:
    """A (seed, stream) pair; equal pairs always produce equal sample sequences."""

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=int(self.seed), spawn_key=(int(self.stream),))
        return np.random.default_rng(seq)

    def substream(self, index: int) -> "RngSeed":
        # streams are plain counters; campaigns hand out disjoint ranges
        return RngSeed(self.seed, self.stream + index)


RngLike = Union[RngSeed, np.random.Generator, int, None]


def make_rng(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngSeed):
        return rng.generator()
    return np.random.default_rng(rng)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace matrix."""

    mat: np.ndarray
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        m = np.array(self.mat, dtype=complex)
        if self.validate:
            try:
                m = check_hermitian(m)
                clamp_spectrum(np.linalg.eigvalsh(0.5 * (m + m.conj().T)), TAU_PSD)
            except ValueError as exc:
                raise InvalidState(str(exc)) from exc
            tr = np.trace(m)
            if abs(tr - 1.0) > TRACE_TOL:
                raise InvalidState(f"trace {tr.real:.12g} differs from 1")
        m.setflags(write=False)
        object.__setattr__(self, "mat", m)

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.mat if dtype is None else self.mat.astype(dtype)

    @classmethod
    def from_pure(cls, psi: "PureState | np.ndarray") -> "DensityMatrix":
        v = np.asarray(psi, dtype=complex).ravel()
        return cls(np.outer(v, v.conj()))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(np.eye(dim, dtype=complex) / dim)

    @classmethod
    def diagonal(cls, probs) -> "DensityMatrix":
        return cls(np.diag(np.asarray(probs, dtype=complex)))

    def purity(self) -> float:
        return float(np.real(np.trace(self.mat @ self.mat)))


@dataclass(frozen=True, eq=False)
class PureState:
    """Unit vector."""

    vec: np.ndarray

    def __post_init__(self):
        v = np.array(self.vec, dtype=complex).ravel()
        n = np.linalg.norm(v)
        if v.size < 1 or abs(n - 1.0) > NORM_TOL:
            raise InvalidState(f"state vector norm {n:.12g} differs from 1")
        v.setflags(write=False)
        object.__setattr__(self, "vec", v)

    @property
    def dim(self) -> int:
        return self.vec.size

    def __array__(self, dtype=None, copy=None):
        return self.vec if dtype is None else self.vec.astype(dtype)

    @classmethod
    def normalized(cls, v) -> "PureState":
        v = np.asarray(v, dtype=complex).ravel()
        return cls(v / np.linalg.norm(v))

    def density(self) -> DensityMatrix:
        return DensityMatrix.from_pure(self.vec)


@dataclass(frozen=True)
class BipartiteDims:
    dA: int
    dB: int

    def __post_init__(self):
        if int(self.dA) < 1 or int(self.dB) < 1:
            raise DimensionMismatch(f"subsystem dimensions must be positive, got {self.dA}x{self.dB}")

    @property
    def total(self) -> int:
        return self.dA * self.dB

    def swapped(self) -> "BipartiteDims":
        return BipartiteDims(self.dB, self.dA)


@dataclass(frozen=True, eq=False)
class BipartiteState:
    dims: BipartiteDims
    rho: DensityMatrix

    def __post_init__(self):
        if not isinstance(self.rho, DensityMatrix):
            object.__setattr__(self, "rho", DensityMatrix(self.rho))
        if self.rho.dim != self.dims.total:
            raise DimensionMismatch(
                f"state of dimension {self.rho.dim} cannot factor as {self.dims.dA}x{self.dims.dB}"
            )

    @classmethod
    def from_matrix(cls, mat, dA: int, dB: int) -> "BipartiteState":
        return cls(BipartiteDims(dA, dB), DensityMatrix(mat))

    @classmethod
    def from_pure(cls, psi, dA: int, dB: int) -> "BipartiteState":
        return cls(BipartiteDims(dA, dB), DensityMatrix.from_pure(psi))

    @property
    def mat(self) -> np.ndarray:
        return self.rho.mat

    def __array__(self, dtype=None, copy=None):
        return self.rho.__array__(dtype)


def reduce_matrix(mat: np.ndarray, dA: int, dB: int, keep: str = "A") -> np.ndarray:
    """Partial trace on a raw ``(dA*dB) x (dA*dB)`` array, no validation."""
    t = np.asarray(mat).reshape(dA, dB, dA, dB)
    if keep == "A":
        return np.einsum("ijkj->ik", t)
    if keep == "B":
        return np.einsum("ijil->jl", t)
    raise ValueError(f"keep must be 'A' or 'B', got {keep!r}")


def partial_trace(state: BipartiteState, keep: str = "A") -> DensityMatrix:
    """Reduced density matrix of subsystem ``keep`` (``"A"`` or ``"B"``)."""
    if not isinstance(state, BipartiteState):
        raise DimensionMismatch("partial_trace needs a BipartiteState carrying its factor dimensions")
    r = reduce_matrix(state.mat, state.dims.dA, state.dims.dB, keep)
    return DensityMatrix(0.5 * (r + r.conj().T))


def reduced_of_pure(psi, dA: int, dB: int, keep: str = "A") -> np.ndarray:
    """Reduced density matrix of a pure vector, computed as ``X X^dagger``."""
    x = np.asarray(psi, dtype=complex).reshape(dA, dB)
    if keep == "A":
        return x @ x.conj().T
    return x.T @ x.conj()


def _fix_phases(v: np.ndarray) -> np.ndarray:
    # make the largest-magnitude entry of every column real and positive
    idx = np.argmax(np.abs(v), axis=0)
    ph = v[idx, np.arange(v.shape[1])]
    ph = np.where(np.abs(ph) > 0, ph / np.abs(ph), 1.0)
    return v / ph


def spectral_factor(rho) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending, clamped) and phase-fixed eigenvectors of a state."""
    eig = hermitian_eig(np.asarray(rho))
    w = clamp_spectrum(eig.eigenvalues, TAU_PSD, cutoff=RANK_TOL)
    return w, _fix_phases(eig.eigenvectors)


def rank(rho) -> int:
    w, _ = spectral_factor(rho)
    return int(np.count_nonzero(w))


def purification_matrix(rho, ref_dim: int) -> np.ndarray:
    """The ``dim x ref_dim`` coefficient matrix of the spectral purification.

    Column ``i`` holds ``sqrt(lambda_i) e_i``; reshaping it row-major gives the
    vector ``sum_i sqrt(lambda_i) |e_i>|i>``.
    """
    w, v = spectral_factor(rho)
    r = int(np.count_nonzero(w))
    if ref_dim < r:
        raise RefTooSmall(f"reference dimension {ref_dim} is below the state rank {r}")
    d = w.size
    p = np.zeros((d, ref_dim), dtype=complex)
    k = min(d, ref_dim)
    p[:, :k] = v[:, :k] * np.sqrt(w[:k])
    return p


def purify(rho, ref_dim: int) -> PureState:
    """Spectral purification ``sum_i sqrt(lambda_i) |e_i> (x) |i>`` on ``dim * ref_dim``."""
    return PureState(purification_matrix(rho, ref_dim).ravel())


def trace_out_reference(purification, dim: int, ref_dim: int) -> np.ndarray:
    return reduced_of_pure(purification, dim, ref_dim, keep="A")


def sample_haar_pure(dim: int, rng: RngLike = None) -> PureState:
    """Haar-random unit vector from normalized complex Gaussian amplitudes."""
    if dim < 1:
        raise DimensionMismatch(f"dimension must be positive, got {dim}")
    g = make_rng(rng)
    z = g.standard_normal(dim) + 1j * g.standard_normal(dim)
    return PureState(z / np.linalg.norm(z))


def sample_density(dim: int, ancilla_dim: int, rng: RngLike = None) -> DensityMatrix:
    """Induced-measure random state: trace out a Haar ancilla of ``ancilla_dim``."""
    if ancilla_dim < 1:
        raise DimensionMismatch(f"ancilla dimension must be positive, got {ancilla_dim}")
    psi = sample_haar_pure(dim * ancilla_dim, rng).vec
    r = reduced_of_pure(psi, dim, ancilla_dim, keep="A")
    r = 0.5 * (r + r.conj().T)
    return DensityMatrix(r / np.trace(r).real)


def haar_unitary(dim: int, rng: RngLike = None) -> np.ndarray:
    """Haar-random unitary (QR of a Ginibre matrix with the phase correction)."""
    g = make_rng(rng)
    z = (g.standard_normal((dim, dim)) + 1j * g.standard_normal((dim, dim))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def perturb(state, amplitude: float, rng: RngLike = None, ancilla_dim: int | None = None) -> DensityMatrix:
    """Convex mix ``(1 - a) rho + a rho_random`` with ``rho_random`` from :func:`sample_density`."""
    if not 0.0 <= amplitude <= 1.0:
        raise AmplitudeOutOfRange(f"amplitude {amplitude} not in [0, 1]")
    rho = state.rho if isinstance(state, BipartiteState) else state
    if not isinstance(rho, DensityMatrix):
        rho = DensityMatrix(rho)
    if amplitude == 0.0:
        return rho
    fresh = sample_density(rho.dim, ancilla_dim or rho.dim, rng)
    if amplitude == 1.0:
        return fresh
    return DensityMatrix((1.0 - amplitude) * rho.mat + amplitude * fresh.mat)


def perturb_pure(psi, amplitude: float, rng: RngLike = None) -> PureState:
    """Pure-state analogue of :func:`perturb`: normalize ``(1 - a) psi + a chi``, chi Haar."""
    if not 0.0 <= amplitude <= 1.0:
        raise AmplitudeOutOfRange(f"amplitude {amplitude} not in [0, 1]")
    v = np.asarray(psi, dtype=complex).ravel()
    if amplitude == 0.0:
        return PureState(v)
    chi = sample_haar_pure(v.size, rng).vec
    return PureState.normalized((1.0 - amplitude) * v + amplitude * chi)


# -- named states --------------------------------------------------------------

def bell_vector() -> np.ndarray:
    return np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2)


def bell() -> BipartiteState:
    return BipartiteState.from_pure(bell_vector(), 2, 2)


def product() -> BipartiteState:
    return BipartiteState.from_pure(np.array([1, 0, 0, 0], dtype=complex), 2, 2)


def werner(p: float) -> BipartiteState:
    """``p |beta><beta| + (1 - p) I/4`` with ``beta`` the Bell vector."""
    if not 0.0 <= p <= 1.0:
        raise InvalidState(f"Werner weight {p} not in [0, 1]")
    b = bell_vector()
    return BipartiteState.from_matrix(p * np.outer(b, b.conj()) + (1 - p) * np.eye(4) / 4, 2, 2)


def schmidt_state(weights, dA: int | None = None, dB: int | None = None) -> tuple[PureState, BipartiteDims]:
    """``sum_i sqrt(w_i) |i>|i>`` for squared Schmidt coefficients ``w``."""
    w = np.asarray(weights, dtype=float)
    k = w.size
    dA = dA or k
    dB = dB or k
    if k > min(dA, dB):
        raise DimensionMismatch(f"{k} Schmidt weights do not fit in {dA}x{dB}")
    x = np.zeros((dA, dB), dtype=complex)
    x[np.arange(k), np.arange(k)] = np.sqrt(np.clip(w, 0.0, None))
    return PureState(x.ravel()), BipartiteDims(dA, dB)


# -- plain-text state files ----------------------------------------------------

def write_state(path: str | os.PathLike, state: BipartiteState) -> None:
    """Write ``dim dA dB`` then one ``re im`` line per entry, row-major."""
    m = state.mat
    lines = [f"{state.rho.dim} {state.dims.dA} {state.dims.dB}"]
    lines.extend(f"{float(z.real)!r} {float(z.imag)!r}" for z in m.ravel())
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_state(path: str | os.PathLike) -> BipartiteState:
    try:
        with open(path, "r", encoding="ascii") as fh:
            rows = [ln.split() for ln in fh if ln.strip()]
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not an ASCII state file") from exc
    if not rows or len(rows[0]) != 3:
        raise ParseError(f"{path}: header must read 'dim dA dB'")
    try:
        dim, dA, dB = (int(t) for t in rows[0])
        vals = [complex(float(re), float(im)) for re, im in rows[1:]]
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if dim != dA * dB:
        raise ParseError(f"{path}: dim {dim} != {dA}*{dB}")
    if len(vals) != dim * dim:
        raise ParseError(f"{path}: expected {dim * dim} entries, found {len(vals)}")
    mat = np.array(vals, dtype=complex).reshape(dim, dim)
    try:
        return BipartiteState.from_matrix(mat, dA, dB)
    except InvalidState as exc:
        raise ParseError(f"{path}: {exc}") from exc


__all__ = [
    "RngSeed",
    "DensityMatrix",
    "PureState",
    "BipartiteDims",
    "BipartiteState",
    "partial_trace",
    "purify",
    "sample_haar_pure",
    "sample_density",
    "perturb",
    "perturb_pure",
    "haar_unitary",
    "read_state",
    "write_state",
]
