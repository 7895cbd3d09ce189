import numpy as np
import pytest
from scipy.linalg import expm

from pharmonic.group import (
    GroupPoint,
    curve_jets,
    curve_point,
    gram_matrix,
    k_basis,
    m_basis,
    minkowski_form,
    sample_block_diagonal,
    sample_so,
    sample_so_mn,
    so_basis,
    validate_group_point,
)
from pharmonic.jets import JetScalar, lift, variable


# -- bases ---------------------------------------------------------------------


def test_so2_basis_single_vector():
    basis = so_basis(2)
    assert len(basis) == 1
    expected = np.array([[0, 1], [-1, 0]]) / np.sqrt(2)
    np.testing.assert_allclose(basis[0].matrix, expected)


def test_so_basis_counts_and_gram():
    for N in (3, 4, 6):
        basis = so_basis(N)
        assert len(basis) == N * (N - 1) // 2
        np.testing.assert_allclose(gram_matrix(basis), np.eye(len(basis)), atol=1e-12)


def test_unit_trace_normalization():
    for b in so_basis(4):
        assert abs(np.trace(b.matrix @ b.matrix) + 1.0) <= 1e-12


def test_skewness_and_symmetry():
    for b in so_basis(5):
        np.testing.assert_allclose(b.matrix, -b.matrix.T, atol=1e-14)
    for b in m_basis(2, 3, "indefinite"):
        np.testing.assert_allclose(b.matrix, b.matrix.T, atol=1e-14)
        assert b.form_sign == +1


def test_m_basis_counts():
    assert len(m_basis(1, 1)) == 1
    assert len(m_basis(2, 3)) == 6


def test_k_basis_counts():
    assert k_basis(1, 1) == []
    assert len(k_basis(2, 2)) == 2
    assert len(k_basis(2, 3)) == 1 + 3


def test_k_and_m_bases_are_orthogonal_and_span():
    m, n = 2, 3
    N = m + n
    kb = k_basis(m, n)
    mb = m_basis(m, n)
    for kv in kb:
        for mv in mb:
            assert abs(np.trace(kv.matrix @ mv.matrix)) <= 1e-12
    stack = np.array([b.matrix.ravel() for b in kb + mb])
    assert np.linalg.matrix_rank(stack) == N * (N - 1) // 2
    np.testing.assert_allclose(gram_matrix(kb + mb), np.eye(len(kb) + len(mb)), atol=1e-12)


def test_indefinite_m_basis_gram():
    basis = m_basis(2, 2, "indefinite")
    np.testing.assert_allclose(gram_matrix(basis), np.eye(4), atol=1e-12)


# -- sampling -------------------------------------------------------------------


def test_sample_so_invariants_and_determinism():
    x = sample_so(5, 42)
    validate_group_point(x)
    assert abs(np.linalg.det(x.entries) - 1) <= 1e-10
    y = sample_so(5, 42)
    np.testing.assert_array_equal(x.entries, y.entries)
    z = sample_so(5, 43)
    assert np.max(np.abs(x.entries - z.entries)) > 1e-3


def test_sample_so_first_entry_second_moment():
    # Haar second moment: E[x_11^2] = 1/N.
    N, count = 3, 10_000
    vals = np.array([sample_so(N, seed).entries[0, 0] ** 2 for seed in range(count)])
    se = vals.std() / np.sqrt(count)
    assert abs(vals.mean() - 1.0 / N) <= 5 * se


def test_sample_so_mn_invariants():
    for seed in range(5):
        x = sample_so_mn(2, 2, seed, radius=0.75)
        validate_group_point(x)
        eta = minkowski_form(2, 2)
        defect = np.max(np.abs(x.entries.T @ eta @ x.entries - eta))
        assert defect <= 1e-10


def test_sample_so_mn_radius_zero_is_block_diagonal():
    x = sample_so_mn(2, 3, 0, radius=0.0)
    np.testing.assert_allclose(x.entries[:2, 2:], 0, atol=1e-14)
    np.testing.assert_allclose(x.entries[2:, :2], 0, atol=1e-14)


def test_expm_matches_series_for_small_arguments():
    rng = np.random.default_rng(0)
    basis = m_basis(2, 2, "indefinite")
    a = sum(rng.uniform(-0.2, 0.2) * b.matrix for b in basis)
    series = np.zeros_like(a)
    term = np.eye(4)
    for i in range(1, 20):
        series += term
        term = term @ a / i
    assert np.max(np.abs(expm(a) - series)) <= 1e-12


def test_sample_block_diagonal():
    x = sample_block_diagonal((1, 1, 2), 9)
    validate_group_point(x)
    np.testing.assert_allclose(x.entries[0, 1:], 0, atol=1e-14)
    assert x.entries[0, 0] == 1.0


# -- curves --------------------------------------------------------------------


def test_curve_point_zero_parameter():
    x = sample_so(3, 1)
    Z = so_basis(3)[0]
    mat = curve_point(x, Z, lift(0, 2))
    for r in range(3):
        for c in range(3):
            assert mat[r][c].coefficient(0) == complex(x.entries[r, c])
            assert mat[r][c].coefficient(1) == 0j
            assert mat[r][c].coefficient(2) == 0j


def test_curve_point_jet_coefficients():
    x = sample_so(4, 2)
    Z = so_basis(4)[3]
    mat = curve_point(x, Z, variable(0, 2))
    first = np.array([[mat[r][c].coefficient(1) for c in range(4)] for r in range(4)])
    second = np.array([[mat[r][c].coefficient(2) for c in range(4)] for r in range(4)])
    np.testing.assert_allclose(first, x.entries @ Z.matrix, atol=1e-14)
    np.testing.assert_allclose(second, x.entries @ Z.matrix @ Z.matrix / 2, atol=1e-14)


def test_curve_point_real_parameter_stays_in_group():
    x = sample_so(4, 3)
    Z = so_basis(4)[1]
    for h in (-1.0, -0.25, 0.5, 1.0):
        y = curve_point(x, Z, h)
        validate_group_point(GroupPoint(np.real(y), ("compact", 4)))


def test_curve_point_with_constant_offset():
    x = sample_so(3, 4)
    Z = so_basis(3)[2]
    mat = curve_point(x, Z, variable(0.1, 2))
    base = x.entries @ expm(0.1 * Z.matrix)
    val = np.array([[mat[r][c].coefficient(0) for c in range(3)] for r in range(3)])
    first = np.array([[mat[r][c].coefficient(1) for c in range(3)] for r in range(3)])
    np.testing.assert_allclose(val, base, atol=1e-12)
    np.testing.assert_allclose(first, base @ Z.matrix, atol=1e-12)


def test_curve_jets_matches_curve_point():
    x = sample_so(3, 5)
    Z = so_basis(3)[0]
    fast = curve_jets(x.entries, Z.matrix, order=2)
    via_series = curve_point(x, Z, variable(0, 2))
    for r in range(3):
        for c in range(3):
            for i in range(3):
                assert abs(fast[r][c].coefficient(i) - via_series[r][c].coefficient(i)) <= 1e-14


def test_curve_jets_nested_path():
    x = sample_so(3, 6)
    Z1, Z2 = so_basis(3)[0], so_basis(3)[2]
    level1 = curve_jets(x.entries, Z1.matrix, order=2)
    level2 = curve_jets(level1, Z2.matrix, order=2)
    entry = level2[0][1]
    assert isinstance(entry, JetScalar)
    assert entry.shape == (2, 2)
    # the (eps2 = 0) slice reproduces level 1
    assert entry.coefficient(0) == level1[0][1]
    # the eps2-linear coefficient at eps1 = 0 is (x Z2)[0, 1]
    assert abs(entry.coefficient(1).coefficient(0) - (x.entries @ Z2.matrix)[0, 1]) <= 1e-14


def test_validate_group_point_rejects_garbage():
    with pytest.raises(ValueError):
        validate_group_point(GroupPoint(np.eye(3) * 2, ("compact", 3)))
    with pytest.raises(ValueError):
        validate_group_point(GroupPoint(np.eye(4), ("weird", 4)))
