"""Entanglement measures for bipartite states.

Pure-state entanglement, the two-qubit entanglement of formation in closed form
(concurrence of the spin-flipped state), a numerical upper bound on the
entanglement of formation of any small bipartite state, and the purity-based
monotone ``-log2 tr(rho_A^2)``.

The numerical bound follows the measurement picture of ensembles: every
ensemble realizing ``rho`` comes from measuring the reference system of a
purification in some orthonormal basis.  Minimizing the average reduced
entropy over such bases therefore searches over ensembles, and any basis
visited certifies an upper bound.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .errors import DimensionCap, DimensionMismatch, NotUnitary, WrongDimensions
from .linalg import TAU_HERM, clamp_spectrum, eigvalsh_desc, is_unitary, polar_unitary, psd_sqrt
from .metrics import SQRT_CUTOFF, entropy, entropy_of_spectrum, shannon
from .states import (
    BipartiteDims,
    BipartiteState,
    PureState,
    RngSeed,
    haar_unitary,
    reduced_of_pure,
    spectral_factor,
)

TAU_PRUNE = 1e-12

_SIGMA_Y = np.array([[0, -1j], [1j, 0]])
_YY = np.kron(_SIGMA_Y, _SIGMA_Y)


def _dims(dims) -> BipartiteDims:
    return dims if isinstance(dims, BipartiteDims) else BipartiteDims(*dims)


def _vector(psi, dims: BipartiteDims) -> np.ndarray:
    v = np.asarray(psi, dtype=complex).ravel()
    if v.size != dims.total:
        raise DimensionMismatch(f"vector of length {v.size} on a {dims.dA}x{dims.dB} system")
    return v


def pure_entanglement(psi, dims) -> float:
    """Entropy of entanglement ``S(tr_B |psi><psi|)`` in bits."""
    dims = _dims(dims)
    v = _vector(psi, dims)
    return entropy(reduced_of_pure(v, dims.dA, dims.dB, "A"))


def monotone_tilde(psi, dims) -> float:
    """``-log2 tr(rho_A^2)``: additive and LOCC-monotone, yet not a multiple of entropy."""
    dims = _dims(dims)
    v = _vector(psi, dims)
    r = reduced_of_pure(v, dims.dA, dims.dB, "A")
    purity = float(np.real(np.vdot(r, r)))
    return max(-math.log2(purity), 0.0)


def binary_entropy(x: float) -> float:
    return shannon([x, 1.0 - x]) if 0.0 < x < 1.0 else 0.0


def concurrence(state) -> float:
    """Two-qubit concurrence from the spectrum of ``sqrt(rho) rho~ sqrt(rho)``."""
    rho = _two_qubit_matrix(state)
    s = psd_sqrt(rho, cutoff=SQRT_CUTOFF)
    flipped = _YY @ rho.conj() @ _YY
    r = s @ flipped @ s
    mu = clamp_spectrum(eigvalsh_desc(0.5 * (r + r.conj().T)), cutoff=SQRT_CUTOFF)
    lam = np.sqrt(mu)
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def eof_two_qubit(state) -> float:
    """Closed-form entanglement of formation of a two-qubit state, in bits."""
    c = min(concurrence(state), 1.0)
    return binary_entropy(0.5 * (1.0 + math.sqrt(1.0 - c * c)))


def _two_qubit_matrix(state) -> np.ndarray:
    if isinstance(state, BipartiteState):
        if (state.dims.dA, state.dims.dB) != (2, 2):
            raise WrongDimensions(f"need a 2x2 system, got {state.dims.dA}x{state.dims.dB}")
        return state.mat
    m = np.asarray(state, dtype=complex)
    if m.shape != (4, 4):
        raise WrongDimensions(f"need a 4x4 two-qubit density matrix, got shape {m.shape}")
    return m


# -- ensembles and the measurement picture ------------------------------------

@dataclass(frozen=True, eq=False)
class Ensemble:
    """Weights ``p_m`` and unit vectors ``psi_m`` (rows of ``members``)."""

    weights: np.ndarray
    members: np.ndarray
    dims: BipartiteDims

    def __post_init__(self):
        if len(self.weights) != len(self.members):
            raise DimensionMismatch("weights and members differ in length")

    def __len__(self) -> int:
        return len(self.weights)

    def density(self) -> np.ndarray:
        m = self.members
        return (m.T * self.weights) @ m.conj()

    def member_entropies(self) -> np.ndarray:
        d = self.dims
        return np.array([entropy(reduced_of_pure(v, d.dA, d.dB, "A")) for v in self.members])

    def average_entropy(self) -> float:
        return float(np.dot(self.weights, self.member_entropies()))

    def states(self) -> list[PureState]:
        return [PureState(v) for v in self.members]


@dataclass(frozen=True, eq=False)
class MeasuredSplit:
    """Entropies after measuring the reference, and the ensemble the outcomes induce."""

    s_ar: float
    s_r: float
    ensemble: Ensemble
    # unnormalized conditional states and their A-marginals, one per outcome
    conditional: np.ndarray = field(repr=False)
    blocks_a: np.ndarray = field(repr=False)
    probabilities: np.ndarray = field(repr=False)

    @property
    def remote_value(self) -> float:
        return self.s_ar - self.s_r


def _conditional_states(purification, dims: BipartiteDims, ref_dim: int, basis) -> np.ndarray:
    n = dims.total
    v = np.asarray(purification, dtype=complex).ravel()
    if v.size != n * ref_dim:
        raise DimensionMismatch(
            f"purification of length {v.size} does not live on {dims.dA}x{dims.dB}x{ref_dim}"
        )
    b = np.asarray(basis, dtype=complex)
    if b.shape != (ref_dim, ref_dim):
        raise DimensionMismatch(f"basis of shape {b.shape} for reference of dimension {ref_dim}")
    if not is_unitary(b, TAU_HERM):
        raise NotUnitary("measurement basis is not unitary within tolerance")
    # column m is (I (x) <b_m|) |purification>, with b_m the m-th column of basis
    return v.reshape(n, ref_dim) @ b.conj()


def ensemble_from_measurement(purification, dims, ref_dim: int, basis) -> MeasuredSplit:
    """Measure the reference in the orthonormal basis given by the columns of ``basis``.

    Returns ``S(AR')`` and ``S(R')`` of the post-measurement state together with
    the induced ensemble on ``AB``.  Outcomes with probability below
    ``TAU_PRUNE`` are dropped from the ensemble (not from the entropies).
    """
    dims = _dims(dims)
    cond = _conditional_states(purification, dims, ref_dim, basis).T  # (K, n)
    x = cond.reshape(ref_dim, dims.dA, dims.dB)
    blocks = x @ np.conj(np.transpose(x, (0, 2, 1)))
    a = np.clip(np.linalg.eigvalsh(blocks), 0.0, None)
    p = np.real(np.einsum("kii->k", blocks))
    p = np.clip(p, 0.0, None)
    s_ar = entropy_of_spectrum(a.ravel())
    s_r = entropy_of_spectrum(p)
    keep = p >= TAU_PRUNE
    weights = p[keep] / p[keep].sum()
    members = cond[keep] / np.sqrt(p[keep])[:, None]
    ens = Ensemble(weights, members, dims)
    return MeasuredSplit(s_ar, s_r, ens, cond, blocks, p)


# -- numerical minimization ---------------------------------------------------

@dataclass(frozen=True)
class OptimizerConfig:
    """Knobs for :func:`eof_minimize`.

    ``max_sweeps`` caps descent iterations per restart; a restart stops early
    once ``patience`` successive iterations each improve the objective by less
    than ``tol_objective``, or when the line-search step falls below
    ``min_step``.
    """

    restarts: int = 32
    max_sweeps: int = 400
    tol_objective: float = 1e-7
    patience: int = 3
    initial_step: float = 0.3
    shrink: float = 0.5
    min_step: float = 1e-5
    agree_tol: float = 1e-4
    seed: int = 0
    dim_cap: int = 16
    workers: int = 1


@dataclass(frozen=True, eq=False)
class EofResult:
    """An upper bound on the entanglement of formation and the ensemble certifying it."""

    value: float
    ensemble: Ensemble
    converged: bool
    restarts_used: int
    objective_history: list
    basis: np.ndarray = field(repr=False)
    restart_values: list = field(default_factory=list)


class _Objective:
    """Average reduced entropy as a function of the first ``r`` basis rows.

    With the spectral purification ``sum_i sqrt(l_i) |e_i>|i>`` only rows
    ``i < r = rank`` of the basis matter.  ``coeffs`` is the conjugate of that
    ``r x K`` block, so the unnormalized conditional states are the columns of
    ``factor @ coeffs``.
    """

    def __init__(self, factor: np.ndarray, dims: BipartiteDims, ref_dim: int):
        self.factor = factor  # (n, r)
        self.dims = dims
        self.ref_dim = ref_dim
        self.evaluations = 0
        self.best = math.inf
        self.best_coeffs = None

    def _blocks(self, coeffs):
        psi = self.factor @ coeffs  # (n, K)
        x = psi.T.reshape(self.ref_dim, self.dims.dA, self.dims.dB)
        return x, x @ np.conj(np.transpose(x, (0, 2, 1)))

    def _record(self, f, coeffs):
        self.evaluations += 1
        if f < self.best:
            self.best = f
            self.best_coeffs = coeffs

    def value(self, coeffs) -> float:
        _, blocks = self._blocks(coeffs)
        a = np.clip(np.linalg.eigvalsh(blocks), 0.0, None)
        f = _average_entropy(a)
        self._record(f, coeffs)
        return f

    def value_and_gradient(self, coeffs):
        """Objective and its Riemannian gradient (anti-Hermitian, ``K x K``).

        For one outcome, ``g(X) = -tr(A log A) + p log p`` with ``A = X X^dagger``
        has ``dg = 2 Re tr(X^dagger Phi dX)`` where ``Phi = -log A + log(p) I``.
        """
        x, blocks = self._blocks(coeffs)
        a, u = np.linalg.eigh(blocks)
        a = np.clip(a, 0.0, None)
        f = _average_entropy(a)
        self._record(f, coeffs)
        p = a.sum(axis=1)
        safe_a = np.maximum(a, 1e-300)
        safe_p = np.maximum(p, 1e-300)
        phi_diag = -np.log2(safe_a) + np.log2(safe_p)[:, None]
        uh = np.conj(np.transpose(u, (0, 2, 1)))
        gx = u @ (phi_diag[:, :, None] * (uh @ x))  # (K, dA, dB)
        g_psi = gx.reshape(self.ref_dim, -1).T  # (n, K)
        g_coeffs = self.factor.conj().T @ g_psi  # (r, K)
        z = g_coeffs.conj().T @ coeffs  # (K, K)
        return f, z.conj().T - z


def _average_entropy(a: np.ndarray) -> float:
    p = a.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ta = np.where(a > 0, a * np.log2(np.where(a > 0, a, 1.0)), 0.0)
        tp = np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return float(-ta.sum() + tp.sum())


def _inner(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.real(np.vdot(x, y)))


def _descend(obj: _Objective, basis: np.ndarray, config: OptimizerConfig):
    """Conjugate-gradient descent on the unitary group from ``basis``.

    Steps are ``basis <- basis @ expm(conj(t * H))`` with ``H`` anti-Hermitian of
    unit norm and ``t`` chosen by backtracking (Armijo) from the last accepted
    step.  Returns the final basis, objective and per-iteration history.
    """
    r = obj.factor.shape[1]
    coeffs = basis[:r].conj()
    f, grad = obj.value_and_gradient(coeffs)
    history = [f]
    direction = -grad
    prev_grad = grad
    step = config.initial_step
    stalled = 0
    converged = False
    for it in range(config.max_sweeps):
        gnorm2 = _inner(grad, grad)
        if gnorm2 <= 1e-30:
            converged = True
            break
        if it > 0:
            beta = max(0.0, _inner(grad, grad - prev_grad) / max(_inner(prev_grad, prev_grad), 1e-300))
            direction = -grad + beta * direction
        slope = _inner(grad, direction)
        if slope >= 0.0:
            direction = -grad
            slope = -gnorm2
        dnorm = math.sqrt(_inner(direction, direction))
        unit = direction / dnorm
        slope /= dnorm

        t = min(2.0 * step, 4.0 * config.initial_step)
        accepted = False
        while t >= config.min_step:
            rot = expm(np.conj(t * unit))
            trial = basis @ rot
            f_new = obj.value(trial[:r].conj())
            if f_new <= f + 1e-4 * t * slope:
                accepted = True
                break
            t *= config.shrink
        if not accepted:
            converged = True
            break
        basis = trial
        step = t
        prev_grad = grad
        f_old = f
        f, grad = obj.value_and_gradient(basis[:r].conj())
        history.append(f)
        stalled = stalled + 1 if f_old - f < config.tol_objective else 0
        if stalled >= config.patience:
            converged = True
            break
    return polar_unitary(basis), f, history, converged


def _initial_basis(k: int, restart: int, seed: int) -> np.ndarray:
    # restart 0 starts from the eigen-ensemble so the result never exceeds it
    if restart == 0:
        return np.eye(k, dtype=complex)
    return haar_unitary(k, RngSeed(seed, restart))


def eof_minimize(state: BipartiteState, config: OptimizerConfig | None = None) -> EofResult:
    """Upper bound on the entanglement of formation by searching measurement bases.

    The reference has dimension ``K = (dA*dB)^2``, enough to realize an optimal
    ensemble.  Each restart runs :func:`_descend` from a Haar-random basis
    (restart 0 from the identity); the returned value is the smallest
    objective seen at any evaluated basis, and ``converged`` reports whether
    the two best restarts agree within ``agree_tol``.
    """
    config = config or OptimizerConfig()
    if not isinstance(state, BipartiteState):
        raise DimensionMismatch("eof_minimize needs a BipartiteState")
    dims = state.dims
    n = dims.total
    if n > config.dim_cap:
        raise DimensionCap(f"dA*dB = {n} exceeds the configured cap {config.dim_cap}")
    k = n * n
    w, v = spectral_factor(state.mat)
    r = int(np.count_nonzero(w))
    factor = v[:, :r] * np.sqrt(w[:r])

    if r == 1:
        members = v[:, :1].T.copy()
        ens = Ensemble(np.array([1.0]), members, dims)
        val = ens.average_entropy()
        return EofResult(val, ens, True, 0, [val], np.eye(k, dtype=complex), [val])

    restarts = max(1, int(config.restarts))

    def run(i):
        obj = _Objective(factor, dims, k)
        basis, f, hist, conv = _descend(obj, _initial_basis(k, i, config.seed), config)
        # the best point ever evaluated may come from a rejected line-search trial
        best_coeffs = obj.best_coeffs
        if obj.best < f - 1e-15:
            basis = _complete_basis(best_coeffs.conj())
        return obj.best, basis, hist, conv

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            outcomes = list(pool.map(run, range(restarts)))
    else:
        outcomes = [run(i) for i in range(restarts)]

    values = [o[0] for o in outcomes]
    order = sorted(range(restarts), key=lambda i: (values[i], i))
    best = order[0]
    _, basis, history, local_conv = outcomes[best]

    purification = np.zeros((n, k), dtype=complex)
    purification[:, :r] = factor
    split = ensemble_from_measurement(purification.ravel(), dims, k, basis)
    ens = split.ensemble
    assert len(ens) <= k
    value = ens.average_entropy()
    if restarts > 1:
        converged = values[order[1]] - values[best] <= config.agree_tol
    else:
        converged = local_conv
    return EofResult(value, ens, bool(converged), restarts, history, basis, values)


def _complete_basis(rows: np.ndarray) -> np.ndarray:
    """Extend ``r`` orthonormal rows to a ``K x K`` unitary."""
    from scipy.linalg import null_space

    rows = polar_unitary_rows(rows)
    rest = null_space(rows).conj().T
    return np.vstack([rows, rest])


def polar_unitary_rows(rows: np.ndarray) -> np.ndarray:
    u, _, vh = np.linalg.svd(rows, full_matrices=False)
    return u @ vh


def eof_value_for_basis(state: BipartiteState, basis) -> float:
    """Average reduced entropy of the ensemble induced by ``basis`` (any ``K``)."""
    dims = state.dims
    k = np.asarray(basis).shape[0]
    w, v = spectral_factor(state.mat)
    n = dims.total
    p = np.zeros((n, k), dtype=complex)
    m = min(n, k)
    p[:, :m] = v[:, :m] * np.sqrt(w[:m])
    return ensemble_from_measurement(p.ravel(), dims, k, basis).ensemble.average_entropy()


__all__ = [
    "pure_entanglement",
    "monotone_tilde",
    "concurrence",
    "eof_two_qubit",
    "Ensemble",
    "MeasuredSplit",
    "ensemble_from_measurement",
    "OptimizerConfig",
    "EofResult",
    "eof_minimize",
]
