import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from arterial_uq.random_field import (
    SQRT3,
    RandomFieldError,
    field_from_network,
    gaussian_kernel,
    mean_network,
    proximal_statistics,
    realize_network,
    realize_proximal,
    sample_xi,
    solve_kl,
)

L = 0.6


def _field(Cl=L / 3, n=3, M=64, sigma=0.5, mu=6.0):
    return solve_kl(mu, sigma, L, Cl, n, M)


@given(st.floats(0.05, 2.0), st.integers(1, 6))
def test_eigenvalues_ordered_and_modes_orthonormal(cl_frac, n):
    f = _field(Cl=cl_frac * L, n=n)
    lam = f.eigenvalues
    assert np.all(np.diff(lam) <= 0) and lam[-1] > 0
    G = (f.modes * f.weights) @ f.modes.T
    assert np.max(np.abs(G - np.eye(n))) < 1e-8


def test_fully_correlated_limit():
    sigma = 0.7
    # numerically resolvable: only one mode survives for huge Cl
    f = solve_kl(6.0, sigma, L, 1e3 * L, 1, 32)
    # covariance-operator eigenvalue is sigma^2 times the correlation eigenvalue
    assert sigma**2 * f.eigenvalues[0] == pytest.approx(sigma**2 * L, rel=1e-6)
    x = np.linspace(0, L, 11)
    np.testing.assert_allclose(np.abs(f.eigenfunctions(x)[:, 0]), 1 / np.sqrt(L), rtol=1e-6)
    assert f.all_eigenvalues[1] / f.all_eigenvalues[0] < 1e-6


def test_too_many_modes_for_huge_length():
    with pytest.raises(RandomFieldError, match="resolvable"):
        solve_kl(6.0, 0.5, L, 1e3 * L, 4, 32)


def test_three_modes_capture_95_percent():
    f = _field()
    assert f.captured_fraction() >= 0.95


def test_nystrom_convergence():
    a, b = _field(M=64), _field(M=128)
    np.testing.assert_allclose(a.eigenvalues, b.eigenvalues, rtol=1e-8)


def test_kernel_approximation_improves_with_n():
    x = np.linspace(0, L, 60)
    errs = []
    for n in range(1, 7):
        f = solve_kl([[0, 6.0], [L, 8.0]], [[0, 0.8], [L, 0.4]], L, L / 3, n, 64)
        target = f.target_covariance(x, x)
        errs.append(np.linalg.norm(f.truncated_covariance(x, x) - target) / np.linalg.norm(target))
    assert np.all(np.diff(errs) < 0)


def test_mean_recovery_and_realization_formula():
    f = solve_kl([[0, 6.0], [L, 8.0]], [[0, 0.8], [L, 0.4]], L, L / 3, 3, 64)
    x = np.linspace(0, L, 25)
    np.testing.assert_array_equal(f.realize(np.zeros(3), x), f.mean(x))
    xi = np.array([0.3, -1.0, 1.2])
    r = f.eigenfunctions(x)
    expected = f.mean(x) + f.std(x) * (r @ (np.sqrt(f.eigenvalues) * xi))
    np.testing.assert_allclose(f.realize(xi, x), expected, rtol=1e-14)
    with pytest.raises(ValueError):
        f.realize(np.zeros(2), x)


def test_eigenfunction_interpolation_matches_nodes():
    f = _field()
    np.testing.assert_allclose(f.eigenfunctions(f.nodes).T, f.modes, atol=1e-10)


def test_monte_carlo_variance():
    f = solve_kl([[0, 6.0], [L, 8.0]], [[0, 0.8], [L, 0.4]], L, L / 3, 3, 64)
    x = np.linspace(0, L, 13)
    rng = np.random.default_rng(0)
    xi = sample_xi(rng, (100_000, 3))
    r = f.eigenfunctions(x)
    samples = f.mean(x) + f.std(x) * ((xi * np.sqrt(f.eigenvalues)) @ r.T)
    np.testing.assert_allclose(samples.var(axis=0), f.pointwise_variance(x), rtol=0.02)


def test_truncation_error_matches_trace_deficit():
    sigma = 0.5
    f3 = _field(n=3, sigma=sigma)
    f_full = _field(n=10, sigma=sigma)
    g, w = f3.nodes, f3.weights
    rng = np.random.default_rng(1)
    xi = sample_xi(rng, (40_000, 10))
    full = (xi * np.sqrt(f_full.eigenvalues)) @ f_full.modes
    trunc = (xi[:, :3] * np.sqrt(f_full.eigenvalues[:3])) @ f_full.modes[:3]
    mse = np.mean(((full - trunc) ** 2) @ w) * sigma**2
    expected = sigma**2 * (f_full.all_eigenvalues.sum() - f3.eigenvalues.sum())
    assert mse == pytest.approx(expected, rel=0.03)


def test_uniform_coordinates():
    xi = sample_xi(np.random.default_rng(2), 1_000_000)
    assert abs(xi.mean()) < 1e-3 * 3
    assert xi.var() == pytest.approx(1.0, abs=3e-3)
    assert np.all(np.abs(xi) <= SQRT3)


def test_invalid_construction():
    with pytest.raises(RandomFieldError):
        solve_kl(6.0, 0.5, L, 0.0, 3, 64)
    with pytest.raises(RandomFieldError):
        solve_kl(6.0, 0.5, L, L / 3, 3, 8)
    with pytest.raises(RandomFieldError, match="non-positive"):
        solve_kl(1.0, 2.0, L, L / 3, 3, 64)


def test_gaussian_kernel():
    K = gaussian_kernel([0.0, 1.0], [0.0, 1.0], 0.5)
    assert K[0, 0] == 1.0
    assert K[0, 1] == pytest.approx(np.exp(-2.0))


# --- mapping onto the network ---------------------------------------------------


def _junction_values(net, field_net):
    rho = net.fluid.rho
    out = []
    for a, b in zip(net.aorta_path[:-1], net.aorta_path[1:]):
        sa, sb = field_net.segments[a], field_net.segments[b]
        out.append((float(sa.c0(sa.length, rho)), float(sb.c0(0.0, rho))))
    return out


def test_network_realization_continuity(sample_net):
    f = field_from_network(sample_net)
    assert f.length == pytest.approx(sample_net.aorta_length)
    for xi in ([0, 0, 0], [1.7, -1.7, 1.0], [-1.7, 1.7, -1.7]):
        rnet = realize_network(sample_net, f, np.array(xi, dtype=float))
        for ca, cb in _junction_values(sample_net, rnet):
            assert ca == pytest.approx(cb, rel=1e-14)
        # non-aortic segments untouched
        assert rnet.segments[5] is sample_net.segments[5]


def test_network_realization_values(sample_net):
    f = field_from_network(sample_net)
    xi = np.array([1.0, -0.5, 0.25])
    rnet = realize_network(sample_net, f, xi)
    off = sample_net.aorta_offsets()
    rho = sample_net.fluid.rho
    for sid in sample_net.aorta_path:
        seg = rnet.segments[sid]
        x = np.linspace(0, seg.length, 5)
        np.testing.assert_allclose(seg.c0(x, rho), f.realize(xi, off[sid] + x), rtol=1e-3)


def test_proximal_model(sample_net):
    f = field_from_network(sample_net)
    m, s = proximal_statistics(sample_net, f)
    base = mean_network(sample_net, f)
    rho = sample_net.fluid.rho
    net1 = realize_proximal(sample_net, f, SQRT3)
    sid = sample_net.aorta_path[0]
    seg = net1.segments[sid]
    np.testing.assert_allclose(seg.c0(np.linspace(0, seg.length, 4), rho), m + s * SQRT3, rtol=1e-12)
    other = sample_net.aorta_path[3]
    np.testing.assert_array_equal(net1.segments[other].beta_values, base.segments[other].beta_values)
    with pytest.raises(RandomFieldError):
        realize_proximal(sample_net, f, -1e3)
