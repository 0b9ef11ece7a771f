"""Sobol indices, moments and correlations read off a PCE surrogate."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .pce import PCESurrogate, legendre_1d


class ZeroVarianceError(ValueError):
    """Raised when a surrogate has no variance, so normalized indices are undefined."""


def _check_variance(s: PCESurrogate, var: np.ndarray) -> None:
    scale = np.abs(s.mean) + np.sqrt(var) + 1e-300
    if np.any(var <= (1e-14 * scale) ** 2):
        raise ZeroVarianceError("surrogate variance is zero; Sobol indices are undefined")


def sobol_indices(s: PCESurrogate, max_order: int = 2) -> dict:
    """First- and second-order Sobol indices from the expansion coefficients.

    Returns a dict mapping variable subsets (tuples of 0-based indices) to
    index values, plus the key ``"remainder"`` with the variance share of all
    interactions of order > ``max_order``.  Values have the trailing shape of
    ``s.coefficients``.
    """
    coeffs = s.coefficients
    var = np.sum(coeffs[1:] ** 2, axis=0)
    _check_variance(s, var)
    support = s.indices > 0
    sizes = support.sum(axis=1)
    out = {}
    for k in range(1, max_order + 1):
        for subset in combinations(range(s.dim), k):
            mask = sizes == k
            for d in range(s.dim):
                mask &= support[:, d] == (d in subset)
            out[subset] = np.sum(coeffs[mask] ** 2, axis=0) / var
    out["remainder"] = np.sum(coeffs[sizes > max_order] ** 2, axis=0) / var
    return out


def total_indices(s: PCESurrogate) -> np.ndarray:
    """Total-effect indices, shape ``(dim,) + output_shape``."""
    coeffs = s.coefficients
    var = np.sum(coeffs[1:] ** 2, axis=0)
    _check_variance(s, var)
    return np.stack(
        [np.sum(coeffs[s.indices[:, d] > 0] ** 2, axis=0) / var for d in range(s.dim)]
    )


@dataclass
class Statistics:
    mean: np.ndarray
    std: np.ndarray
    correlation: np.ndarray  # (dim,) + output shape
    quantiles: dict


def correlations(s: PCESurrogate) -> np.ndarray:
    """Pearson correlation between the output and each standardized input.

    For independent uniform inputs and an orthonormal basis only the linear
    term of a variable carries covariance with it, hence
    ``rho_i = u_{e_i} / sigma``.
    """
    var = s.variance
    _check_variance(s, var)
    sigma = np.sqrt(var)
    rows = []
    for d in range(s.dim):
        unit = np.zeros(s.dim, dtype=int)
        unit[d] = 1
        j = int(np.flatnonzero((s.indices == unit).all(axis=1))[0])
        rows.append(s.coefficients[j] / sigma)
    return np.stack(rows)


def statistics(
    s: PCESurrogate,
    quantile_levels=(0.025, 0.5, 0.975),
    n_samples: int = 100_000,
    seed: int = 0,
) -> Statistics:
    """Mean, std, input correlations and Monte-Carlo quantiles of a surrogate."""
    rng = np.random.default_rng(seed)
    xi = rng.uniform(-1.0, 1.0, size=(n_samples, s.dim))
    vals = s(xi)
    q = {float(lv): np.quantile(vals, lv, axis=0) for lv in quantile_levels}
    return Statistics(s.mean, s.std, correlations(s), q)


def conditional_mean(s: PCESurrogate, dim: int, x: np.ndarray) -> np.ndarray:
    """E[f | xi_dim = x], marginalizing the other inputs analytically."""
    keep = np.all(s.indices[:, [d for d in range(s.dim) if d != dim]] == 0, axis=1)
    orders = s.indices[keep, dim]
    P = legendre_1d(np.asarray(x, dtype=float), int(orders.max()))[..., orders]
    return np.tensordot(P, s.coefficients[keep], axes=(-1, 0))


def conditional_mean_quadrature(
    s: PCESurrogate, dim: int, x: np.ndarray, n_points: int = 8
) -> np.ndarray:
    """Same as :func:`conditional_mean` but by tensor Gauss-Legendre quadrature.

    Independent route used to cross-check the closed form.
    """
    others = [d for d in range(s.dim) if d != dim]
    g, w = np.polynomial.legendre.leggauss(n_points)
    w = w / 2.0
    mesh = np.meshgrid(*([g] * len(others)), indexing="ij")
    wmesh = np.meshgrid(*([w] * len(others)), indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1) if others else np.zeros((1, 0))
    wts = np.prod(np.stack([m.ravel() for m in wmesh], axis=1), axis=1) if others else np.ones(1)
    out = []
    for xv in np.atleast_1d(x):
        xi = np.empty((pts.shape[0], s.dim))
        xi[:, others] = pts
        xi[:, dim] = xv
        out.append(np.tensordot(wts, s(xi), axes=(0, 0)))
    return np.array(out)
