import numpy as np
import pytest
from hypothesis import given, strategies as st

from entcont.errors import AmplitudeOutOfRange, DimensionMismatch, InvalidState, ParseError, RefTooSmall
from entcont.metrics import trace_distance
from entcont.states import (
    BipartiteDims,
    BipartiteState,
    DensityMatrix,
    PureState,
    RngSeed,
    bell,
    partial_trace,
    perturb,
    purify,
    read_state,
    reduce_matrix,
    sample_density,
    sample_haar_pure,
    trace_out_reference,
    werner,
    write_state,
)


def loop_partial_trace(m, dA, dB, keep):
    """Index-by-index partial trace, kept deliberately naive."""
    if keep == "A":
        out = np.zeros((dA, dA), dtype=complex)
        for a in range(dA):
            for c in range(dA):
                for b in range(dB):
                    out[a, c] += m[a * dB + b, c * dB + b]
        return out
    out = np.zeros((dB, dB), dtype=complex)
    for b in range(dB):
        for e in range(dB):
            for a in range(dA):
                out[b, e] += m[a * dB + b, a * dB + e]
    return out


def test_density_validation():
    with pytest.raises(InvalidState):
        DensityMatrix(np.diag([0.5, 0.6]))
    with pytest.raises(InvalidState):
        DensityMatrix(np.diag([1.5, -0.5]))
    with pytest.raises(InvalidState):
        DensityMatrix([[0.5, 0.1], [0.0, 0.5]])
    with pytest.raises(InvalidState):
        PureState([1.0, 1.0])


def test_bipartite_dims_consistency():
    with pytest.raises(DimensionMismatch):
        BipartiteState.from_matrix(np.eye(4) / 4, 2, 3)
    with pytest.raises(DimensionMismatch):
        BipartiteDims(0, 2)


def test_partial_trace_bell():
    assert np.allclose(partial_trace(bell(), "A").mat, np.eye(2) / 2)
    assert np.allclose(partial_trace(bell(), "B").mat, np.eye(2) / 2)


def test_partial_trace_product():
    st_ = BipartiteState.from_pure(np.kron([1, 0], [0, 1]), 2, 2)
    assert np.allclose(partial_trace(st_, "A").mat, np.diag([1, 0]))
    assert np.allclose(partial_trace(st_, "B").mat, np.diag([0, 1]))


def test_partial_trace_schmidt():
    psi = np.zeros(4)
    psi[0], psi[3] = np.sqrt(0.9), np.sqrt(0.1)
    assert np.allclose(partial_trace(BipartiteState.from_pure(psi, 2, 2), "A").mat, np.diag([0.9, 0.1]))


def test_partial_trace_requires_dims():
    with pytest.raises(DimensionMismatch):
        partial_trace(DensityMatrix(np.eye(4) / 4))


@given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(1, 4), st.integers(1, 5))
def test_partial_trace_matches_loops_and_keeps_trace(seed, dA, dB, anc):
    rho = sample_density(dA * dB, anc, seed).mat
    for keep in "AB":
        r = reduce_matrix(rho, dA, dB, keep)
        assert np.allclose(r, loop_partial_trace(rho, dA, dB, keep), atol=1e-13)
        assert abs(np.trace(r) - 1) <= 1e-9


def test_purify_maximally_mixed():
    v = purify(DensityMatrix.maximally_mixed(2), 2).vec
    assert np.allclose(v, np.array([1, 0, 0, 1]) / np.sqrt(2))


def test_purify_pure():
    v = purify(DensityMatrix.diagonal([1, 0]), 2).vec
    assert np.allclose(v, [1, 0, 0, 0])


def test_purify_diagonal():
    v = purify(DensityMatrix.diagonal([0.9, 0.1]), 2).vec
    assert np.allclose(v, [np.sqrt(0.9), 0, 0, np.sqrt(0.1)])


def test_purify_rank_limit():
    rho = DensityMatrix.diagonal([0.5, 0.5, 0.0])
    assert purify(rho, 2).dim == 6
    with pytest.raises(RefTooSmall):
        purify(rho, 1)


@given(st.integers(0, 2**32 - 1), st.integers(1, 16), st.integers(1, 16))
def test_purify_round_trip(seed, d, anc):
    rho = sample_density(d, anc, seed)
    v = purify(rho, d).vec
    assert np.max(np.abs(trace_out_reference(v, d, d) - rho.mat)) <= 1e-8


def test_haar_dim_one():
    v = sample_haar_pure(1, 3).vec
    assert v.shape == (1,) and abs(abs(v[0]) - 1) < 1e-15


def test_haar_determinism():
    a = sample_haar_pure(4, RngSeed(42, 0)).vec
    b = sample_haar_pure(4, RngSeed(42, 0)).vec
    c = sample_haar_pure(4, RngSeed(42, 1)).vec
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_haar_marginal_mean():
    g = RngSeed(7).generator()
    vals = [abs(sample_haar_pure(2, g).vec[0]) ** 2 for _ in range(100_000)]
    assert abs(np.mean(vals) - 0.5) <= 0.005


def test_sample_density_rank_one_for_trivial_ancilla():
    rho = sample_density(5, 1, 1).mat
    assert np.linalg.matrix_rank(rho, tol=1e-10) == 1


def test_sample_density_full_rank():
    rho = sample_density(4, 4, 2).mat
    assert np.linalg.matrix_rank(rho, tol=1e-10) == 4


def test_sample_density_mean_purity():
    # induced measure: E tr(rho^2) = (dA + dB) / (dA dB + 1) = 4/5 for 2 and 2
    g = RngSeed(11).generator()
    vals = [sample_density(2, 2, g).purity() for _ in range(100_000)]
    assert abs(np.mean(vals) - 0.8) <= 0.005


def test_sample_density_repeatable():
    assert np.array_equal(sample_density(3, 2, RngSeed(5, 9)).mat, sample_density(3, 2, RngSeed(5, 9)).mat)


def test_perturb_extremes():
    rho = sample_density(3, 3, 0)
    assert perturb(rho, 0.0, 1) is rho
    fresh = perturb(rho, 1.0, RngSeed(1))
    assert np.allclose(fresh.mat, sample_density(3, 3, RngSeed(1)).mat)
    with pytest.raises(AmplitudeOutOfRange):
        perturb(rho, 1.5, 0)


def test_perturb_stays_close():
    g = np.random.default_rng(0)
    for _ in range(300):
        d = int(g.integers(2, 9))
        rho = sample_density(d, int(g.integers(1, d + 1)), g)
        assert trace_distance(rho, perturb(rho, 0.05, g)) <= 0.1 + 1e-12


def test_state_file_round_trip(tmp_path):
    st_ = werner(0.3)
    path = tmp_path / "w.txt"
    write_state(path, st_)
    text = path.read_text()
    assert text.splitlines()[0] == "4 2 2"
    assert len(text.splitlines()) == 17
    back = read_state(path)
    assert back.dims == st_.dims
    assert np.array_equal(back.mat, st_.mat)


@pytest.mark.parametrize(
    "content",
    ["", "4 2\n", "4 2 2\n1 0\n", "3 2 2\n" + "0 0\n" * 9, "1 1 1\nfoo bar\n", "1 1 1\n0.5 0\n"],
)
def test_state_file_errors(tmp_path, content):
    path = tmp_path / "bad.txt"
    path.write_text(content)
    with pytest.raises(ParseError):
        read_state(path)
