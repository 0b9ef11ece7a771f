import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.polynomial import legendre

from arterial_uq.uq import (
    PCESurrogate,
    ZeroVarianceError,
    build_grid,
    conditional_mean,
    correlations,
    gram_matrix,
    grid_size,
    n_terms,
    patterson_rule,
    project,
    sobol_indices,
    statistics,
    total_degree_indices,
    total_indices,
)
from arterial_uq.uq.pce import basis_matrix, from_unit, to_unit
from arterial_uq.uq.sensitivity import conditional_mean_quadrature


# --- 1D rules --------------------------------------------------------------


@pytest.mark.parametrize("level", range(1, 8))
def test_patterson_sizes_and_weights(level):
    x, w = patterson_rule(level)
    assert len(x) == 2**level - 1
    assert np.all(np.diff(x) > 0)
    assert w.sum() == pytest.approx(1.0, abs=1e-14)
    assert np.all(w > 0)


@pytest.mark.parametrize("level", range(1, 8))
def test_patterson_degree_of_exactness(level):
    # rule with 2^l - 1 points integrates degree 3 * 2^(l-1) - 1 (level 1: degree 1)
    x, w = patterson_rule(level)
    deg = 1 if level == 1 else 3 * 2 ** (level - 1) - 1
    for k in range(0, min(deg, 60) + 1):
        exact = 0.0 if k % 2 else 1.0 / (k + 1)
        assert w @ x**k == pytest.approx(exact, abs=1e-13)


def test_patterson_nested():
    for level in range(2, 8):
        coarse, _ = patterson_rule(level - 1)
        fine, _ = patterson_rule(level)
        assert np.min(np.abs(coarse[:, None] - fine[None, :]), axis=1).max() < 1e-14


def test_patterson_table_regenerates():
    pytest.importorskip("mpmath")
    from arterial_uq.uq.patterson import compute_patterson_rules

    rules = compute_patterson_rules(max_level=4, dps=40)
    for level, (xn, wn) in enumerate(rules, start=1):
        xn, wn = np.array([float(v) for v in xn]), np.array([float(v) for v in wn])
        order = np.argsort(xn)
        x, w = patterson_rule(level)
        np.testing.assert_allclose(xn[order], x, atol=1e-15)
        np.testing.assert_allclose(0.5 * wn[order], w, atol=1e-15)


# --- sparse grids ----------------------------------------------------------


@pytest.mark.parametrize("dim,level,count", [(3, 5, 351), (4, 5, 769), (6, 4, 545), (6, 5, 2561)])
def test_grid_cardinality(dim, level, count):
    assert grid_size(dim, level) == count


@pytest.mark.parametrize("dim,level", [(1, 1), (2, 3), (3, 2), (3, 5), (4, 3)])
def test_built_grid_matches_count(dim, level):
    g = build_grid(dim, level)
    assert len(g) == grid_size(dim, level)
    assert len({tuple(r) for r in g.nodes}) == len(g)
    assert g.weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(np.abs(g.nodes) <= 1.0)


def test_level_one_is_centre_point():
    g = build_grid(4, 1)
    assert len(g) == 1
    np.testing.assert_array_equal(g.nodes, np.zeros((1, 4)))


def test_invalid_grid_arguments():
    with pytest.raises(ValueError):
        build_grid(0, 3)
    with pytest.raises(ValueError):
        build_grid(3, 0)


@pytest.mark.parametrize("dim,level", [(3, 5), (4, 5), (6, 4)])
def test_gram_matrix_identity_on_campaign_grids(dim, level):
    g = build_grid(dim, level)
    G = gram_matrix(g, 3)
    # products of degree <= 6 are integrated exactly
    assert np.max(np.abs(G - np.eye(len(G)))) < 1e-12


# --- PCE ---------------------------------------------------------------------


@pytest.mark.parametrize("dim,order,count", [(3, 3, 20), (4, 3, 35), (6, 3, 84), (1, 0, 1), (2, 2, 6)])
def test_term_counts(dim, order, count):
    assert n_terms(dim, order) == count
    assert len(total_degree_indices(dim, order)) == count


def test_index_ordering():
    idx = total_degree_indices(3, 2)
    np.testing.assert_array_equal(idx[0], [0, 0, 0])
    np.testing.assert_array_equal(idx[1:4], np.eye(3, dtype=int))
    assert np.all(np.diff(idx.sum(axis=1)) >= 0)


def test_basis_orthonormal_by_gauss_quadrature():
    # independent check: tensor Gauss-Legendre, not the sparse grid
    g, w = legendre.leggauss(6)
    w = w / 2
    X, Y = np.meshgrid(g, g, indexing="ij")
    W = np.outer(w, w).ravel()
    pts = np.stack([X.ravel(), Y.ravel()], axis=1)
    Phi = basis_matrix(pts, total_degree_indices(2, 3))
    np.testing.assert_allclose((Phi * W[:, None]).T @ Phi, np.eye(10), atol=1e-13)


_grids = {}


def _grid(dim, level):
    if (dim, level) not in _grids:
        _grids[(dim, level)] = build_grid(dim, level)
    return _grids[(dim, level)]


@given(data=st.data(), case=st.sampled_from([(3, 5), (4, 5), (6, 4)]))
def test_pce_reproduces_cubic_polynomials(data, case):
    dim, level = case
    g = _grid(dim, level)
    idx = total_degree_indices(dim, 3)
    coeffs = np.array(data.draw(st.lists(st.floats(-5, 5), min_size=len(idx), max_size=len(idx))))
    f = basis_matrix(g.nodes, idx) @ coeffs
    s = project(f, g, 3)
    assert np.max(np.abs(s.coefficients - coeffs)) < 1e-10


def test_projection_of_monomials():
    # x^3 = (3/5) x + (2/5) P3-part; check via surrogate evaluation
    g = _grid(3, 5)
    f = g.nodes[:, 0] ** 3 + g.nodes[:, 1] * g.nodes[:, 2] ** 2
    s = project(f, g, 3)
    xi = np.random.default_rng(1).uniform(-1, 1, size=(50, 3))
    np.testing.assert_allclose(s(xi), xi[:, 0] ** 3 + xi[:, 1] * xi[:, 2] ** 2, atol=1e-12)
    assert s.mean == pytest.approx(0.0, abs=1e-14)


def test_projection_shape_and_errors():
    g = _grid(3, 2)
    vals = np.ones((len(g), 4, 2))
    s = project(vals, g, 1)
    assert s.coefficients.shape == (4, 4, 2)
    np.testing.assert_allclose(s.mean, 1.0)
    with pytest.raises(ValueError, match="mismatch"):
        project(np.ones(len(g) - 1), g, 1)
    bad = np.ones(len(g))
    bad[0] = np.nan
    with pytest.raises(ValueError, match="non-finite"):
        project(bad, g, 1)


def test_unit_maps_roundtrip():
    lo, hi = np.array([0.7, 1.0]), np.array([1.0, 5.0])
    x = np.array([[0.85, 3.0], [0.7, 5.0]])
    np.testing.assert_allclose(from_unit(to_unit(x, lo, hi), lo, hi), x)
    np.testing.assert_allclose(to_unit(lo, lo, hi), -1.0)


# --- sensitivity -------------------------------------------------------------


def _sobol_example():
    # f = x1 + 2 x2 + 3 x1 x3 with unit-variance inputs x = sqrt(3) xi
    g = _grid(3, 5)
    x = math.sqrt(3.0) * g.nodes
    f = x[:, 0] + 2 * x[:, 1] + 3 * x[:, 0] * x[:, 2]
    return project(f, g, 3)


def test_sobol_analytic_oracle():
    s = _sobol_example()
    S = sobol_indices(s)
    assert S[(0,)] == pytest.approx(1 / 14, abs=1e-8)
    assert S[(1,)] == pytest.approx(4 / 14, abs=1e-8)
    assert S[(2,)] == pytest.approx(0.0, abs=1e-8)
    assert S[(0, 2)] == pytest.approx(9 / 14, abs=1e-8)
    assert S[(0, 1)] == pytest.approx(0.0, abs=1e-8)
    assert S["remainder"] == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(total_indices(s), [10 / 14, 4 / 14, 9 / 14], atol=1e-8)


def test_sobol_monte_carlo_crosscheck():
    # first-order index of x1 by pick-freeze sampling of the surrogate
    s = _sobol_example()
    rng = np.random.default_rng(0)
    n = 200_000
    A = rng.uniform(-1, 1, (n, 3))
    B = rng.uniform(-1, 1, (n, 3))
    fA, fB = s(A), s(B)
    ABi = B.copy()
    ABi[:, 1] = A[:, 1]
    S2 = np.mean(fA * (s(ABi) - fB)) / np.var(np.concatenate([fA, fB]))
    assert S2 == pytest.approx(4 / 14, abs=0.01)


@given(st.lists(st.floats(-3, 3), min_size=35, max_size=35))
def test_sobol_indices_sum_to_one(coeffs):
    c = np.array(coeffs)
    c[0] = 1.0
    if np.sum(c[1:] ** 2) < 1e-6:
        c[1] = 1.0
    s = PCESurrogate(4, 3, total_degree_indices(4, 3), c)
    S = sobol_indices(s)
    total = sum(v for k, v in S.items())
    assert total == pytest.approx(1.0, abs=1e-12)
    assert all(v >= 0 for v in S.values())
    T = total_indices(s)
    first = np.array([S[(d,)] for d in range(4)])
    assert np.all(T >= first - 1e-15)


def test_zero_variance_raises():
    s = PCESurrogate(2, 1, total_degree_indices(2, 1), np.array([3.0, 0.0, 0.0]))
    with pytest.raises(ZeroVarianceError):
        sobol_indices(s)
    with pytest.raises(ZeroVarianceError):
        correlations(s)


def test_correlations_against_sampling():
    s = _sobol_example()
    rng = np.random.default_rng(3)
    xi = rng.uniform(-1, 1, (100_000, 3))
    f = s(xi)
    mc = [np.corrcoef(xi[:, d], f)[0, 1] for d in range(3)]
    np.testing.assert_allclose(correlations(s), mc, atol=0.01)


def test_statistics_deterministic_for_seed():
    s = _sobol_example()
    a = statistics(s, seed=7, n_samples=5000)
    b = statistics(s, seed=7, n_samples=5000)
    assert a.quantiles == b.quantiles
    assert a.mean == pytest.approx(0.0, abs=1e-12)
    assert a.std == pytest.approx(math.sqrt(14.0), rel=1e-10)


def test_conditional_mean_closed_form_vs_quadrature():
    g = _grid(3, 5)
    f = np.exp(0.3 * g.nodes[:, 0]) * (1 + g.nodes[:, 1] ** 2) + g.nodes[:, 2]
    s = project(f, g, 3)
    x = np.linspace(-1, 1, 7)
    np.testing.assert_allclose(conditional_mean(s, 0, x), conditional_mean_quadrature(s, 0, x), atol=1e-12)
    # averaging the conditional mean over x recovers the mean
    gq, wq = legendre.leggauss(8)
    assert wq @ conditional_mean(s, 0, gq) / 2 == pytest.approx(float(s.mean), abs=1e-12)
