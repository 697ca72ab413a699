import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from entcont.bounds import (
    TAU_CHECK,
    BoundReport,
    check_eof_continuity,
    check_fannes,
    check_pure_continuity,
    eof_continuity_rhs,
    epsilon_for_distance,
    fannes_rhs,
    proportionality_demo,
    tightness_row,
    tightness_state,
    tightness_table,
)
from entcont.entanglement import OptimizerConfig
from entcont.errors import EpsilonOutOfRange, InvalidDistribution, ProviderUnavailable, RegimeViolation
from entcont.states import (
    BipartiteDims,
    BipartiteState,
    DensityMatrix,
    bell,
    perturb,
    perturb_pure,
    product,
    sample_density,
    sample_haar_pure,
    werner,
)

LOG2E_E = 0.530737845423043
H06 = 0.9709505944546686


def test_report_satisfied_threshold():
    assert BoundReport("x", 1.0, 1.0 - 0.5 * TAU_CHECK, True).satisfied
    assert not BoundReport("x", 1.0, 1.0 - 2 * TAU_CHECK, True).satisfied


def test_fannes_rhs_examples():
    assert fannes_rhs(0.0, 2, True) == 0
    assert abs(fannes_rhs(0.2, 2, True) - 0.6643856189774724) < 1e-12
    assert abs(fannes_rhs(1.5, 2, False) - (1.5 + LOG2E_E)) < 1e-12
    with pytest.raises(RegimeViolation):
        fannes_rhs(0.5, 2, True)


@pytest.mark.parametrize("d", [2, 3, 8, 64])
def test_restricted_form_is_tighter(d):
    for t in np.linspace(0, 1 / math.e, 200):
        r, u = fannes_rhs(t, d, True), fannes_rhs(t, d, False)
        assert 0 <= r <= u + 1e-15


def test_check_fannes_examples():
    rho = DensityMatrix.diagonal([0.6, 0.4])
    rep = check_fannes(rho, rho)
    assert rep.lhs == 0 and rep.satisfied
    rep = check_fannes(DensityMatrix.maximally_mixed(2), rho)
    assert abs(rep.lhs - (1 - H06)) < 1e-12
    assert abs(rep.rhs - 0.6643856189774724) < 1e-12
    assert rep.satisfied and rep.regime_ok


def test_regime_boundary_uses_unrestricted_form():
    # a distance a hair under 1/e still takes the unrestricted form
    d = 2
    t = 1 / math.e - 1e-13
    a = np.diag([1.0, 0.0])
    b = np.diag([1 - t / 2, t / 2])
    rep = check_fannes(a, b)
    assert not rep.regime_ok


@given(st.integers(0, 2**32 - 1), st.integers(2, 16), st.sampled_from([0.01, 0.05, 0.3, 1.0]))
def test_fannes_never_violated(seed, d, amp):
    g = np.random.default_rng(seed)
    rho = sample_density(d, int(g.integers(1, 2 * d + 1)), g)
    sigma = perturb(rho, amp, g, ancilla_dim=int(g.integers(1, 2 * d + 1)))
    rep = check_fannes(rho, sigma)
    assert rep.satisfied and rep.rhs >= 0


def test_pure_continuity_examples():
    psi = bell().rho
    rep = check_pure_continuity(np.array([1, 0, 0, 1]) / np.sqrt(2), np.array([1, 0, 0, 0]), (2, 2))
    assert abs(rep.metadata["distance"] - math.sqrt(2)) < 1e-12
    assert not rep.regime_ok
    assert abs(rep.lhs - 1) < 1e-12
    assert abs(rep.rhs - 1.9449514077961383) < 1e-12
    assert rep.satisfied
    v = sample_haar_pure(6, 1).vec
    assert check_pure_continuity(v, v, (2, 3)).lhs == 0


@given(st.integers(0, 2**32 - 1), st.integers(1, 8), st.integers(1, 8), st.sampled_from([0.01, 0.05, 1.0]))
def test_pure_continuity_never_violated(seed, dA, dB, amp):
    g = np.random.default_rng(seed)
    psi = sample_haar_pure(dA * dB, g)
    phi = perturb_pure(psi, amp, g)
    assert check_pure_continuity(psi, phi, (dA, dB)).satisfied


def test_eof_rhs_examples():
    assert eof_continuity_rhs(0.0, 2, 2, True) == 0
    assert abs(eof_continuity_rhs(0.1, 2, 2, True) - 1.5643856189774725) < 1e-12
    assert abs(eof_continuity_rhs(0.1, 2, 4, True) - 1.9643856189774724) < 1e-12
    # labeling picks d <= d'
    assert eof_continuity_rhs(0.1, 4, 2, True) == eof_continuity_rhs(0.1, 2, 4, True)
    assert abs(eof_continuity_rhs(1.0, 2, 2, False) - (9 + 2 * LOG2E_E)) < 1e-12
    assert abs(eof_continuity_rhs(0.1, 2, 4, True, simplified=True) - (1.8 + 2 * 0.33219280948873625)) < 1e-12
    with pytest.raises(RegimeViolation):
        eof_continuity_rhs(0.5, 2, 2, True)


def test_check_eof_identical():
    st_ = werner(0.7)
    rep = check_eof_continuity(st_, st_)
    assert rep.lhs == 0 and rep.satisfied


def test_check_eof_bell_vs_werner():
    rep = check_eof_continuity(bell(), werner(0.9))
    # E(Werner 0.9) from C = 0.85 by hand; F = sqrt(0.925)
    assert abs(rep.lhs - 0.21064503901121534) < 1e-8
    assert abs(rep.metadata["distance"] - 0.39105394470038385) < 1e-9
    assert not rep.regime_ok
    assert rep.satisfied


def test_check_eof_provider_errors():
    st_ = BipartiteState.from_matrix(np.eye(6) / 6, 2, 3)
    with pytest.raises(ProviderUnavailable):
        check_eof_continuity(st_, st_, "oracle")
    with pytest.raises(ProviderUnavailable):
        check_eof_continuity(werner(0.1), werner(0.2), "magic")


def test_check_eof_optimizer_provider():
    rep = check_eof_continuity(werner(0.8), werner(0.75), "optimizer", config=OptimizerConfig(restarts=4))
    assert rep.metadata["provider"] == "optimizer"
    assert not rep.theorem
    assert rep.satisfied


def test_proof_chain_links():
    g = np.random.default_rng(0)
    cfg = OptimizerConfig(restarts=2)
    for amp in (0.01, 0.05, 0.1):
        rho = BipartiteState(BipartiteDims(2, 2), sample_density(4, 4, g))
        sigma = BipartiteState(BipartiteDims(2, 2), perturb(rho.rho, amp, g))
        rep = check_eof_continuity(rho, sigma, chain=True, config=cfg)
        links = {c.name: c for c in rep.children}
        for name in ("chain_r_le_ar", "chain_ar_le_abr", "chain_abr_le_pure",
                     "chain_fannes_ar", "chain_fannes_r", "chain_remote_rho", "chain_remote_sigma"):
            assert links[name].theorem and links[name].satisfied, name
        assert not rep.theorem_violations()
        # pure-state trace distance is sqrt(1 + F) times the Bures distance
        f = 1 - (links["chain_pure_le_bures"].rhs / 2) ** 2
        assert abs(links["chain_pure_le_bures"].lhs - math.sqrt(1 + f) * links["chain_pure_le_bures"].rhs) < 1e-7


def test_tightness_state_examples():
    assert np.allclose(tightness_state(2, 0.1).mat, np.diag([0.6, 0.4]))
    assert np.allclose(tightness_state(5, 1e-12).mat, np.eye(5) / 5)
    for d, eps in [(3, 0.2), (7, 0.1), (100, 0.005)]:
        assert abs(np.trace(tightness_state(d, eps).mat) - 1) < 1e-12
    with pytest.raises(EpsilonOutOfRange):
        tightness_state(2, 0.5)
    with pytest.raises(EpsilonOutOfRange):
        tightness_state(2, 0.0)


def test_tightness_row_examples():
    row = tightness_row(2, 0.1)
    assert abs(row.gap - (1 - H06)) < 1e-12
    assert abs(row.t - 0.2) < 1e-12
    assert abs(row.lower + 0.9) < 1e-12
    row = tightness_row(256, epsilon_for_distance(256, 0.2))
    assert abs(row.lower + 0.2) < 1e-9
    assert row.gap >= row.lower


@given(st.integers(2, 300), st.floats(0.001, 0.999))
def test_tightness_row_identity(d, frac):
    eps = frac / d
    row = tightness_row(d, eps)
    assert abs(row.t - 2 * (d - 1) * eps) <= 1e-9
    assert row.gap >= row.lower - 1e-9


def test_tightness_fixed_t_gap_increasing():
    rows, slope = tightness_table([4, 16, 64, 256], t=1.0)
    gaps = [r.gap for r in rows]
    assert all(b > a for a, b in zip(gaps, gaps[1:]))
    assert slope > 0
    with pytest.raises(EpsilonOutOfRange):
        tightness_table([], t=1.0)


def test_proportionality_demo():
    rec = proportionality_demo([0.5, 0.5])
    assert abs(rec.s - 1) < 1e-12 and abs(rec.tilde - 1) < 1e-12 and abs(rec.ratio - 1) < 1e-12
    rec = proportionality_demo([1, 0])
    assert rec.s == 0 and rec.tilde == 0 and not rec.ratio_defined
    rec = proportionality_demo([0.9, 0.1])
    assert abs(rec.s - 0.4689955935892812) < 1e-12
    assert abs(rec.tilde - 0.2863041851566411) < 1e-12
    assert abs(rec.ratio - 0.6104624202660834) < 1e-12
    with pytest.raises(InvalidDistribution):
        proportionality_demo([0.7, 0.7])
