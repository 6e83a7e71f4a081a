import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from thetalab.errors import InvalidDimensionError, InvalidInputError, InvalidParameterError, NumericalFailureError
from thetalab.rmt_core import (
    default_cut,
    eigh,
    graph_from_adjacency,
    plant_clique,
    sample_gnp_half,
    sample_goe,
    spectral_split,
    stream,
)

seeds = st.integers(min_value=0, max_value=2**64 - 1)


def test_gnp_n1_is_zero():
    g = sample_gnp_half(1, 7)
    assert g.adjacency.shape == (1, 1)
    assert g.adjacency[0, 0] == 0.0


def test_gnp_n2_structure():
    for seed in range(10):
        a = sample_gnp_half(2, seed).adjacency
        assert a[0, 1] in (-1.0, 1.0)
        assert a[0, 1] == a[1, 0]
        assert a[0, 0] == a[1, 1] == 0.0


def test_gnp_golden_n5():
    # Bits drawn from Philox(SeedSequence(0, spawn_key=(0, 0))) mapped onto the upper triangle.
    expected = [
        [0, 1, -1, 1, -1],
        [1, 0, -1, -1, -1],
        [-1, -1, 0, 1, -1],
        [1, -1, 1, 0, -1],
        [-1, -1, -1, -1, 0],
    ]
    np.testing.assert_array_equal(sample_gnp_half(5, 0).adjacency, expected)


def test_gnp_edge_fraction():
    n = 2000
    iu = np.triu_indices(n, 1)
    fracs = [np.mean(sample_gnp_half(n, s).adjacency[iu] > 0) for s in range(50)]
    assert np.all(np.abs(np.array(fracs) - 0.5) <= 0.01)


def test_gnp_rejects_bad_input():
    with pytest.raises(InvalidDimensionError):
        sample_gnp_half(0, 1)
    with pytest.raises(InvalidParameterError):
        sample_gnp_half(3, -1)
    with pytest.raises(InvalidParameterError):
        sample_gnp_half(3, 2**64)


def test_graph_is_read_only():
    g = sample_gnp_half(4, 1)
    with pytest.raises(ValueError):
        g.adjacency[0, 1] = 5.0


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 40), seed=seeds)
def test_gnp_invariants(n, seed):
    g = sample_gnp_half(n, seed)
    a = g.adjacency
    assert np.array_equal(a, a.T)
    assert np.all(np.diag(a) == 0)
    off = ~np.eye(n, dtype=bool)
    assert np.all(np.abs(a[off]) == 1)
    assert np.array_equal(a, sample_gnp_half(n, seed).adjacency)


def test_streams_are_independent_by_purpose():
    a = stream(5, "graph").standard_normal(4)
    b = stream(5, "goe").standard_normal(4)
    c = stream(5, "graph", trial=1).standard_normal(4)
    assert not np.allclose(a, b)
    assert not np.allclose(a, c)
    np.testing.assert_array_equal(a, stream(5, "graph").standard_normal(4))
    with pytest.raises(InvalidParameterError):
        stream(5, "nope")


def test_plant_clique_full_and_singleton():
    g = sample_gnp_half(12, 3)
    full = plant_clique(g, 12, 1)
    off = ~np.eye(12, dtype=bool)
    assert np.all(full.adjacency[off] == 1)
    one = plant_clique(g, 1, 1)
    np.testing.assert_array_equal(one.adjacency, g.adjacency)
    with pytest.raises(InvalidParameterError):
        plant_clique(g, 13, 1)


@settings(max_examples=20, deadline=None)
@given(n=st.integers(2, 30), data=st.data())
def test_plant_clique_invariants(n, data):
    k = data.draw(st.integers(1, n))
    seed = data.draw(seeds)
    h = plant_clique(sample_gnp_half(n, seed), k, seed)
    members = list(h.planted_set)
    assert len(members) == k
    block = h.adjacency[np.ix_(members, members)]
    assert np.all(block[~np.eye(k, dtype=bool)] == 1)
    assert np.all(np.diag(h.adjacency) == 0)
    assert np.array_equal(h.adjacency, h.adjacency.T)


def test_planted_clique_raises_top_eigenvalue():
    h = plant_clique(sample_gnp_half(1000, 11), 60, 11)
    assert eigh(h.adjacency).eigenvalues[0] >= 59


def test_goe_n1_golden():
    # Philox(SeedSequence(7, spawn_key=(2, 0))) draw scaled by sqrt(2).
    assert sample_goe(1, 7)[0, 0] == pytest.approx(-0.8183306830173984, abs=0)


def test_goe_off_diagonal_variance():
    x = sample_goe(3000, 2)
    off = x[np.triu_indices(3000, 1)]
    assert abs(off.var() - 1.0) <= 0.05


def test_goe_top_eigenvalue():
    x = sample_goe(2000, 4)
    lam1 = np.linalg.eigvalsh(x / np.sqrt(2000))[-1]
    assert abs(lam1 - 2.0) <= 0.1


def test_eigh_examples():
    d = eigh(np.diag([1.0, 3.0]))
    np.testing.assert_allclose(d.eigenvalues, [3.0, 1.0])
    np.testing.assert_allclose(np.abs(d.eigenvectors), [[0, 1], [1, 0]], atol=1e-15)
    d = eigh([[0.0, 1.0], [1.0, 0.0]])
    np.testing.assert_allclose(d.eigenvalues, [1.0, -1.0], atol=1e-15)


def test_eigh_sign_convention():
    d = eigh(sample_gnp_half(30, 2).adjacency)
    for col in d.eigenvectors.T:
        first = col[np.nonzero(np.abs(col) > 1e-12)[0][0]]
        assert first > 0


def test_eigh_errors():
    with pytest.raises(InvalidInputError):
        eigh([[np.nan, 0.0], [0.0, 1.0]])
    with pytest.raises(InvalidInputError):
        eigh(np.zeros((2, 3)))
    err = NumericalFailureError("x", dimension=4, condition=1e3)
    assert err.dimension == 4 and err.condition == 1e3


def test_frobenius_of_adjacency():
    n = 2000
    d = eigh(sample_gnp_half(n, 0).adjacency)
    assert abs(np.sum(d.eigenvalues**2) - (n * n - n)) <= 1e-8 * (n * n - n)


@settings(max_examples=25, deadline=None)
@given(n=st.integers(1, 25), seed=seeds)
def test_decomposition_invariants(n, seed):
    a = sample_goe(n, seed)
    d = eigh(a)
    assert np.all(np.diff(d.eigenvalues) <= 0)
    v = d.eigenvectors
    assert np.max(np.abs(v.T @ v - np.eye(n))) <= 1e-10
    fro = np.linalg.norm(a)
    assert np.linalg.norm(d.reconstruct() - a) <= 1e-8 * fro
    assert abs(d.eigenvalues.sum() - np.trace(a)) <= 1e-10 * max(fro, 1.0) * np.sqrt(n)
    assert abs(np.sum(d.eigenvalues**2) - fro**2) <= 1e-10 * fro**2


def test_spectral_split_extremes():
    a = sample_gnp_half(9, 5).adjacency
    d = eigh(a)
    xp, xm = spectral_split(d, 0)
    assert np.all(xp == 0)
    np.testing.assert_allclose(xm, a, atol=1e-12)
    xp, xm = spectral_split(d, 9)
    assert np.all(xm == 0)
    with pytest.raises(InvalidParameterError):
        spectral_split(d, 10)
    assert default_cut(9) == 4


@settings(max_examples=25, deadline=None)
@given(n=st.integers(2, 20), seed=seeds)
def test_split_sums_to_matrix(n, seed):
    a = sample_gnp_half(n, seed).adjacency
    xp, xm = spectral_split(eigh(a))
    np.testing.assert_allclose(xp + xm, a, atol=1e-11)
    assert np.array_equal(xp, xp.T) and np.array_equal(xm, xm.T)


def test_graph_from_adjacency_validation():
    with pytest.raises(InvalidInputError):
        graph_from_adjacency([[0, 1], [-1, 0]])
    with pytest.raises(InvalidInputError):
        graph_from_adjacency([[1, 1], [1, 0]])
    with pytest.raises(InvalidInputError):
        graph_from_adjacency([[0, 0.5], [0.5, 0]])
    g = graph_from_adjacency([[0, 1], [1, 0]])
    assert g.num_edges == 1 and g.model == "given"
