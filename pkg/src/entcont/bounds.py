"""Continuity bounds as evaluable inequalities.

Each ``check_*`` function returns a :class:`BoundReport` holding both sides of
one inequality.  Reports flagged ``theorem=True`` are proven statements, so a
violation there means a numerical or implementation fault.  Reports flagged
``theorem=False`` are recorded for inspection only.  This covers the
entanglement-of-formation bound with an optimizer provider, and the links that
lean on equating pure-state trace and Bures distances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .entanglement import (
    OptimizerConfig,
    ensemble_from_measurement,
    eof_minimize,
    eof_two_qubit,
    monotone_tilde,
    pure_entanglement,
)
from .errors import DimensionMismatch, EpsilonOutOfRange, ProviderUnavailable, RegimeViolation
from .metrics import (
    LOG2_E_OVER_E,
    bures_from_fidelity,
    entropy,
    eta,
    fidelity,
    pure_trace_distance,
    shannon,
    trace_distance,
    uhlmann_purifications,
)
from .states import BipartiteDims, BipartiteState, DensityMatrix, PureState, schmidt_state

TAU_CHECK = 1e-9
INV_E = 1.0 / math.e
# distances this close to 1/e fall back to the unrestricted form
REGIME_MARGIN = 1e-12

CSV_FIELDS = (
    "name", "dA", "dB", "lhs", "rhs", "slack", "satisfied",
    "regime_ok", "distance", "provider", "seed", "stream",
)


@dataclass
class BoundReport:
    name: str
    lhs: float
    rhs: float
    regime_ok: bool
    theorem: bool = True
    metadata: dict = field(default_factory=dict)
    children: list = field(default_factory=list)

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def satisfied(self) -> bool:
        return self.slack >= -TAU_CHECK

    def as_row(self) -> dict:
        md = self.metadata
        return {
            "name": self.name,
            "dA": md.get("dA", ""),
            "dB": md.get("dB", ""),
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "satisfied": int(self.satisfied),
            "regime_ok": int(self.regime_ok),
            "distance": md.get("distance", ""),
            "provider": md.get("provider", ""),
            "seed": md.get("seed", ""),
            "stream": md.get("stream", ""),
        }

    def theorem_violations(self) -> list["BoundReport"]:
        """Theorem-class reports among this one and its children that fail."""
        out = [self] if self.theorem and not self.satisfied else []
        for c in self.children:
            out.extend(c.theorem_violations())
        return out


def restricted_regime(t: float) -> bool:
    return t < INV_E - REGIME_MARGIN


def fannes_rhs(t: float, d: int, restricted: bool) -> float:
    """Right side of Fannes' inequality for trace distance ``t`` in dimension ``d``.

    Restricted: ``t log2 d + eta(t)``, valid for ``t <= 1/e``.
    Unrestricted: ``t log2 d + log2(e)/e``.
    """
    if t < 0:
        raise RegimeViolation(f"distance must be non-negative, got {t}")
    if restricted:
        if t > INV_E:
            raise RegimeViolation(f"restricted form needs t <= 1/e, got {t}")
        return t * math.log2(d) + eta(t)
    return t * math.log2(d) + LOG2_E_OVER_E


def _fannes_auto(t: float, d: int) -> tuple[float, bool]:
    restricted = restricted_regime(t)
    return fannes_rhs(t, d, restricted), restricted


def check_fannes(rho, sigma, **metadata) -> BoundReport:
    """``|S(rho) - S(sigma)|`` against Fannes' bound, form chosen by the measured distance."""
    a = rho.mat if isinstance(rho, (DensityMatrix, BipartiteState)) else np.asarray(rho)
    b = sigma.mat if isinstance(sigma, (DensityMatrix, BipartiteState)) else np.asarray(sigma)
    if a.shape != b.shape:
        raise DimensionMismatch(f"states of shape {a.shape} and {b.shape}")
    d = a.shape[0]
    t = trace_distance(a, b)
    lhs = abs(entropy(a) - entropy(b))
    rhs, restricted = _fannes_auto(t, d)
    md = {"dA": d, "dB": 1, "distance": t}
    md.update(metadata)
    return BoundReport("fannes", lhs, rhs, restricted, True, md)


def check_pure_continuity(psi, phi, dims, **metadata) -> BoundReport:
    """``|E(psi) - E(phi)|`` against ``T log2 dA + eta(T)`` (or ``+ log2(e)/e`` past 1/e)."""
    dims = dims if isinstance(dims, BipartiteDims) else BipartiteDims(*dims)
    u = np.asarray(psi, dtype=complex).ravel()
    v = np.asarray(phi, dtype=complex).ravel()
    if u.size != dims.total or v.size != dims.total:
        raise DimensionMismatch(f"pure states must have length {dims.total}")
    t = trace_distance(np.outer(u, u.conj()), np.outer(v, v.conj()))
    lhs = abs(pure_entanglement(u, dims) - pure_entanglement(v, dims))
    rhs, restricted = _fannes_auto(t, dims.dA)
    md = {"dA": dims.dA, "dB": dims.dB, "distance": t}
    md.update(metadata)
    return BoundReport("pure_continuity", lhs, rhs, restricted, True, md)


def eof_continuity_rhs(dist: float, dA: int, dB: int, restricted: bool, simplified: bool = False) -> float:
    """Right side of the entanglement-of-formation continuity bound.

    ``(5 log2 d + 4 log2 d') D + 2 eta(D)`` with ``d <= d'`` (restricted, ``D <= 1/e``)
    or ``... + 2 log2(e)/e`` (unrestricted).  ``simplified`` swaps the dimension
    factor for the looser ``9 log2 max(d, d')``.
    """
    if dist < 0:
        raise RegimeViolation(f"distance must be non-negative, got {dist}")
    d, dp = sorted((dA, dB))
    coeff = 9 * math.log2(dp) if simplified else 5 * math.log2(d) + 4 * math.log2(dp)
    if restricted:
        if dist > INV_E:
            raise RegimeViolation(f"restricted form needs D <= 1/e, got {dist}")
        return coeff * dist + 2 * eta(dist)
    return coeff * dist + 2 * LOG2_E_OVER_E


def _eof(state: BipartiteState, provider: str, config: OptimizerConfig | None):
    if provider == "oracle":
        if (state.dims.dA, state.dims.dB) != (2, 2):
            raise ProviderUnavailable("the closed-form provider only handles 2x2 systems")
        return eof_two_qubit(state)
    if provider == "optimizer":
        return eof_minimize(state, config).value
    raise ProviderUnavailable(f"unknown provider {provider!r}")


def check_eof_continuity(
    rho: BipartiteState,
    sigma: BipartiteState,
    provider: str = "oracle",
    chain: bool = False,
    config: OptimizerConfig | None = None,
    **metadata,
) -> BoundReport:
    """``|E(rho) - E(sigma)|`` against the bound at the measured Bures distance.

    With ``chain=True`` the proof's intermediate quantities are built explicitly
    and attached as child reports; see :func:`proof_chain`.
    """
    if rho.dims != sigma.dims:
        raise DimensionMismatch(f"dims {rho.dims} and {sigma.dims} differ")
    dims = rho.dims
    e_rho = _eof(rho, provider, config)
    e_sigma = _eof(sigma, provider, config)
    f = fidelity(rho.mat, sigma.mat)
    dist = bures_from_fidelity(f)
    restricted = restricted_regime(dist)
    rhs = eof_continuity_rhs(dist, dims.dA, dims.dB, restricted)
    md = {"dA": dims.dA, "dB": dims.dB, "distance": dist, "provider": provider,
          "e_rho": e_rho, "e_sigma": e_sigma}
    md.update(metadata)
    # the optimizer only gives upper bounds, so its difference proves nothing
    report = BoundReport("eof_continuity", abs(e_rho - e_sigma), rhs, restricted,
                         theorem=False, metadata=md)
    if chain:
        report.children = proof_chain(rho, sigma, provider, config, e_rho, e_sigma, md)
    return report


def proof_chain(rho, sigma, provider="oracle", config=None, e_rho=None, e_sigma=None, metadata=None):
    """Intermediate inequalities of the entanglement-of-formation continuity proof.

    Uhlmann-optimal purifications of both states are built on a reference of
    dimension ``(dA*dB)^2``; the reference is measured in the basis that
    (numerically) realizes ``E(sigma)``, and every link is reported:

    * ``chain_r_le_ar``, ``chain_ar_le_abr``, ``chain_abr_le_pure``: partial
      trace contraction ``T(R') <= T(AR') <= T(ABR') <= T(|rho>,|sigma>)``.
    * ``chain_fannes_ar``, ``chain_fannes_r``: Fannes on ``AR'`` and ``R'``.
    * ``chain_remote_rho``, ``chain_remote_sigma``: ``E <= S(AR') - S(R')``.
    * ``chain_difference``: ``E(rho) - E(sigma)`` against the entropy differences.
    * ``chain_pure_le_bures``, ``chain_ar_le_bures``: the pure-state trace
      distance (and hence ``T(AR')``) against the Bures distance.  These rely
      on equating the two distances for pure states, which does not hold in
      general, so they are not theorem-class.
    """
    dims = rho.dims
    n = dims.total
    k = n * n
    config = config or OptimizerConfig()
    md = dict(metadata or {})
    remote_is_exact = provider == "oracle"
    if e_rho is None:
        e_rho = _eof(rho, provider, config)
    if e_sigma is None:
        e_sigma = _eof(sigma, provider, config)

    pair = uhlmann_purifications(rho.mat, sigma.mat, k)
    opt = eof_minimize(sigma, config)
    # the optimizer basis belongs to sigma's spectral purification; carry it
    # through the Uhlmann rotation of the reference
    basis = pair.rotation @ opt.basis
    split_r = ensemble_from_measurement(pair.pur_rho.vec, dims, k, basis)
    split_s = ensemble_from_measurement(pair.pur_sigma.vec, dims, k, basis)

    t_r = float(np.sum(np.abs(split_r.probabilities - split_s.probabilities)))
    t_ar = float(sum(trace_distance(a, b) for a, b in zip(split_r.blocks_a, split_s.blocks_a)))
    t_abr = float(sum(
        trace_distance(np.outer(x, x.conj()), np.outer(y, y.conj()))
        for x, y in zip(split_r.conditional, split_s.conditional)
    ))
    t_pure = pure_trace_distance(pair.achieved_overlap)
    d_bures = bures_from_fidelity(fidelity(rho.mat, sigma.mat))

    def sub(name, lhs, rhs, regime_ok=True, theorem=True, **extra):
        m = dict(md)
        m.update(extra)
        return BoundReport(name, lhs, rhs, regime_ok, theorem, m)

    d = min(dims.dA, dims.dB)
    dim_ar = dims.dA * k
    fa_rhs, fa_reg = _fannes_auto(t_ar, dim_ar)
    fr_rhs, fr_reg = _fannes_auto(t_r, k)
    entropy_gap = (split_r.s_ar - split_s.s_ar) + (split_s.s_r - split_r.s_r)
    return [
        sub("chain_r_le_ar", t_r, t_ar, distance=t_ar),
        sub("chain_ar_le_abr", t_ar, t_abr, distance=t_abr),
        sub("chain_abr_le_pure", t_abr, t_pure, distance=t_pure),
        sub("chain_fannes_ar", abs(split_r.s_ar - split_s.s_ar), fa_rhs, fa_reg, distance=t_ar),
        sub("chain_fannes_r", abs(split_r.s_r - split_s.s_r), fr_rhs, fr_reg, distance=t_r),
        sub("chain_remote_rho", e_rho, split_r.remote_value, theorem=remote_is_exact),
        sub("chain_remote_sigma", e_sigma, split_s.remote_value, theorem=remote_is_exact,
            basis_value=opt.value),
        sub("chain_difference", e_rho - e_sigma, entropy_gap, theorem=False),
        sub("chain_pure_le_bures", t_pure, d_bures, theorem=False, distance=d_bures),
        sub("chain_ar_le_bures", t_ar, d_bures, theorem=False, distance=d_bures, d_min=d),
    ]


# -- optimality of the dimension dependence -------------------------------------

def tightness_state(d: int, epsilon: float) -> DensityMatrix:
    """``epsilon d |1><1| + (1/d - epsilon) I``: a small push away from ``I/d``."""
    if d < 1 or not 0.0 < epsilon < 1.0 / d:
        raise EpsilonOutOfRange(f"need 0 < epsilon < 1/d, got d={d}, epsilon={epsilon}")
    diag = np.full(d, 1.0 / d - epsilon)
    diag[0] += epsilon * d
    return DensityMatrix(np.diag(diag).astype(complex))


@dataclass(frozen=True)
class TightnessRow:
    d: int
    epsilon: float
    gap: float
    t: float
    lower: float
    # mixing bound on S(rho): (1 - eps d) log2 d + H(eps d, 1 - eps d)
    entropy_upper: float


def tightness_row(d: int, epsilon: float) -> TightnessRow:
    """Entropy gap to ``I/d`` against ``t log2(d) / 2 - 1``."""
    rho = tightness_state(d, epsilon)
    mixed = DensityMatrix.maximally_mixed(d)
    s_rho = entropy(rho)
    gap = entropy(mixed) - s_rho
    t = trace_distance(mixed, rho)
    expected_t = 2 * (d - 1) * epsilon
    if abs(t - expected_t) > 1e-9:
        raise AssertionError(f"trace distance {t} differs from 2(d-1)eps = {expected_t}")
    lower = t * math.log2(d) / 2 - 1
    ed = epsilon * d
    upper = (1 - ed) * math.log2(d) + shannon([ed, 1 - ed])
    if gap < lower - 1e-9:
        raise AssertionError(f"entropy gap {gap} below lower bound {lower} (d={d}, eps={epsilon})")
    if s_rho > upper + 1e-9:
        raise AssertionError(f"entropy {s_rho} above mixing bound {upper}")
    return TightnessRow(d, epsilon, gap, t, lower, upper)


def epsilon_for_distance(d: int, t: float) -> float:
    """The epsilon at which the tightness state sits at trace distance ``t`` from ``I/d``."""
    if d < 2:
        raise EpsilonOutOfRange("need d >= 2 to move away from I/d")
    return t / (2 * (d - 1))


def tightness_table(d_list, epsilon: float | None = None, t: float | None = None):
    """Rows for each ``d`` at fixed ``epsilon`` or fixed trace distance ``t``.

    Returns ``(rows, slope)``; ``slope`` is the least-squares slope of the gap
    against ``log2 d`` (``nan`` with fewer than two rows).
    """
    d_list = list(d_list)
    if not d_list:
        raise EpsilonOutOfRange("empty list of dimensions")
    if (epsilon is None) == (t is None):
        raise EpsilonOutOfRange("give exactly one of epsilon or t")
    rows = [
        tightness_row(d, epsilon if t is None else epsilon_for_distance(d, t))
        for d in d_list
    ]
    slope = gap_slope(rows)
    return rows, slope


def gap_slope(rows) -> float:
    if len(rows) < 2:
        return math.nan
    x = np.log2([r.d for r in rows])
    y = np.array([r.gap for r in rows])
    return float(np.polyfit(x, y, 1)[0])


def check_mixing_bound(weights, states) -> BoundReport:
    """``S(sum p_i rho_i) <= H(p) + sum p_i S(rho_i)``."""
    p = np.asarray(weights, dtype=float)
    mats = [np.asarray(s.mat if hasattr(s, "mat") else s, dtype=complex) for s in states]
    mix = sum(pi * m for pi, m in zip(p, mats))
    lhs = entropy(mix)
    rhs = shannon(p) + float(sum(pi * entropy(m) for pi, m in zip(p, mats)))
    return BoundReport("mixing_entropy", lhs, rhs, True, True, {"dA": mats[0].shape[0], "dB": 1})


# -- the purity monotone --------------------------------------------------------

@dataclass(frozen=True)
class ProportionalityRecord:
    s: float
    tilde: float
    ratio: float  # nan when s == 0

    @property
    def ratio_defined(self) -> bool:
        return not math.isnan(self.ratio)


def proportionality_demo(schmidt) -> ProportionalityRecord:
    """Entropy, purity monotone and their ratio for given squared Schmidt coefficients."""
    shannon(schmidt)  # validates the distribution
    psi, dims = schmidt_state(schmidt)
    s = pure_entanglement(psi, dims)
    tilde = monotone_tilde(psi, dims)
    ratio = tilde / s if s > 1e-12 else math.nan
    return ProportionalityRecord(s, tilde, ratio)


__all__ = [
    "BoundReport",
    "TightnessRow",
    "ProportionalityRecord",
    "fannes_rhs",
    "check_fannes",
    "check_pure_continuity",
    "eof_continuity_rhs",
    "check_eof_continuity",
    "proof_chain",
    "tightness_state",
    "tightness_row",
    "tightness_table",
    "check_mixing_bound",
    "proportionality_demo",
]
