"""Pseudospectral Legendre polynomial chaos on sparse cubatures."""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np
from numpy.polynomial import legendre

from .sparse_grid import SparseGrid


def total_degree_indices(dim: int, order: int) -> np.ndarray:
    """Multi-indices with total degree <= ``order``, graded then lexicographic.

    The first row is the zero index, rows 1..dim are the unit indices e_1..e_N.
    """
    out = []
    for deg in range(order + 1):
        block = []
        _fill(dim, deg, [], block)
        out.extend(block)
    return np.array(out, dtype=int).reshape(-1, dim)


def _fill(dim, remaining, prefix, out):
    if dim == 1:
        out.append(prefix + [remaining])
        return
    for k in range(remaining, -1, -1):
        _fill(dim - 1, remaining - k, prefix + [k], out)


def n_terms(dim: int, order: int) -> int:
    return comb(dim + order, order)


def legendre_1d(x: np.ndarray, order: int) -> np.ndarray:
    """Orthonormal Legendre values, shape ``x.shape + (order + 1,)``.

    Orthonormal under the uniform probability measure on [-1, 1].
    """
    x = np.asarray(x, dtype=float)
    V = legendre.legvander(x, order)
    return V * np.sqrt(2 * np.arange(order + 1) + 1)


def basis_matrix(xi: np.ndarray, indices: np.ndarray) -> np.ndarray:
    """Evaluate every multivariate basis function at the points ``xi``.

    Parameters
    ----------
    xi : (n_points, dim) array in [-1, 1]^dim
    indices : (n_terms, dim) multi-index array

    Returns
    -------
    (n_points, n_terms) array
    """
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    order = int(indices.max()) if indices.size else 0
    uni = legendre_1d(xi, order)  # (n_points, dim, order+1)
    out = np.ones((xi.shape[0], indices.shape[0]))
    for d in range(indices.shape[1]):
        out *= uni[:, d, indices[:, d]]
    return out


@dataclass
class PCESurrogate:
    """Total-degree Legendre expansion of one or several scalar outputs.

    ``coefficients`` has shape ``(n_terms,) + output_shape``; the first
    coefficient is the mean and the sum of squares of the others is the
    variance.
    """

    dim: int
    order: int
    indices: np.ndarray
    coefficients: np.ndarray
    names: list[str] = field(default_factory=list)

    @property
    def mean(self) -> np.ndarray:
        return self.coefficients[0]

    @property
    def variance(self) -> np.ndarray:
        return np.sum(self.coefficients[1:] ** 2, axis=0)

    @property
    def std(self) -> np.ndarray:
        return np.sqrt(self.variance)

    def __call__(self, xi: np.ndarray) -> np.ndarray:
        """Evaluate at standardized inputs ``xi`` in [-1, 1]^N."""
        Phi = basis_matrix(xi, self.indices)
        return np.tensordot(Phi, self.coefficients, axes=(1, 0))


def project(samples, grid: SparseGrid, order: int, names=None) -> PCESurrogate:
    """Pseudospectral projection ``u_j = sum_k w_k f(xi_k) phi_j(xi_k)``.

    ``samples`` has the grid nodes along its first axis; trailing axes are
    carried through (e.g. stations x QoIs).
    """
    samples = np.asarray(samples, dtype=float)
    if samples.shape[0] != len(grid):
        raise ValueError(
            f"sample/node mismatch: {samples.shape[0]} samples for {len(grid)} grid nodes"
        )
    if not np.all(np.isfinite(samples)):
        raise ValueError("samples contain non-finite values")
    idx = total_degree_indices(grid.dim, order)
    Phi = basis_matrix(grid.nodes, idx)
    coeffs = np.tensordot(Phi * grid.weights[:, None], samples, axes=(0, 0))
    return PCESurrogate(grid.dim, order, idx, coeffs, list(names or []))


def gram_matrix(grid: SparseGrid, order: int) -> np.ndarray:
    """Discrete Gram matrix of the order-``order`` basis under the cubature."""
    idx = total_degree_indices(grid.dim, order)
    Phi = basis_matrix(grid.nodes, idx)
    return Phi.T @ (grid.weights[:, None] * Phi)


def to_unit(x, lower, upper):
    """Affine map from [lower, upper] to [-1, 1]."""
    return 2.0 * (np.asarray(x, dtype=float) - lower) / (upper - lower) - 1.0


def from_unit(xi, lower, upper):
    return lower + 0.5 * (np.asarray(xi, dtype=float) + 1.0) * (upper - lower)
