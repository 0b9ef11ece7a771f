"""Karhunen-Loeve representation of the aortic wave-speed field c0(x, xi).

The field is ``c0(x, xi) = mu(x) + sigma(x) sum_i sqrt(lam_i) r_i(x) xi_i`` with
``(lam_i, r_i)`` the eigenpairs of the Gaussian correlation kernel
``exp(-(x1 - x2)^2 / (2 Cl^2))`` on the aortic span, computed by a Nystrom
discretization on Gauss-Legendre points.  Multiplying by sigma(x) outside the
eigenproblem gives the covariance ``sigma(x1) sigma(x2) rho(x1, x2)``.

The xi_i are independent U[-sqrt(3), sqrt(3)] (zero mean, unit variance).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh

from .network import NetworkTopology

SQRT3 = math.sqrt(3.0)


class RandomFieldError(ValueError):
    pass


def gaussian_kernel(x1, x2, Cl):
    d = np.subtract.outer(np.asarray(x1, float), np.asarray(x2, float))
    return np.exp(-(d * d) / (2.0 * Cl * Cl))


def _as_profile(p):
    """Piecewise-linear profile from a scalar or ``[(x, v), ...]``."""
    if np.isscalar(p):
        return np.array([0.0]), np.array([float(p)])
    arr = np.asarray(p, dtype=float)
    return arr[:, 0], arr[:, 1]


@dataclass(frozen=True)
class StiffnessField:
    """Truncated KL model of c0 along ``[0, length]``.

    Attributes
    ----------
    length : float
        Aortic span l_aorta (m).
    Cl : float
        Correlation length (m).
    mu_x, mu_v, sigma_x, sigma_v : ndarray
        Piecewise-linear mean and std profiles (m/s).
    eigenvalues : ndarray, shape (n,)
        Nonincreasing eigenvalues of the correlation operator (units of m).
    nodes, weights : ndarray, shape (M,)
        Gauss-Legendre quadrature on the span.
    modes : ndarray, shape (n, M)
        Eigenfunctions at the nodes, orthonormal in L2(0, length).
    """

    length: float
    Cl: float
    mu_x: np.ndarray
    mu_v: np.ndarray
    sigma_x: np.ndarray
    sigma_v: np.ndarray
    eigenvalues: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray
    modes: np.ndarray
    all_eigenvalues: np.ndarray

    @property
    def n_modes(self) -> int:
        return len(self.eigenvalues)

    def mean(self, x) -> np.ndarray:
        return np.interp(x, self.mu_x, self.mu_v)

    def std(self, x) -> np.ndarray:
        return np.interp(x, self.sigma_x, self.sigma_v)

    def eigenfunctions(self, x) -> np.ndarray:
        """Nystrom interpolation r_i(x) = (1/lam_i) sum_k w_k rho(x, x_k) r_i(x_k)."""
        K = gaussian_kernel(x, self.nodes, self.Cl)
        return (K * self.weights) @ self.modes.T / self.eigenvalues

    def captured_fraction(self) -> float:
        """Share of the integrated correlation-operator trace held by the kept modes."""
        return float(self.eigenvalues.sum() / self.length)

    def realize(self, xi, x) -> np.ndarray:
        """c0 at abscissae ``x`` for KL coordinates ``xi`` (length ``n_modes``)."""
        xi = np.asarray(xi, dtype=float)
        if xi.shape != (self.n_modes,):
            raise ValueError(f"expected {self.n_modes} KL coordinates, got shape {xi.shape}")
        r = self.eigenfunctions(x)
        return self.mean(x) + self.std(x) * (r @ (np.sqrt(self.eigenvalues) * xi))

    def pointwise_variance(self, x) -> np.ndarray:
        """sigma^2(x) sum_i lam_i r_i(x)^2, variance of the truncated field."""
        r = self.eigenfunctions(x)
        return self.std(x) ** 2 * (r**2 @ self.eigenvalues)

    def truncated_covariance(self, x1, x2) -> np.ndarray:
        r1, r2 = self.eigenfunctions(x1), self.eigenfunctions(x2)
        return np.outer(self.std(x1), self.std(x2)) * ((r1 * self.eigenvalues) @ r2.T)

    def target_covariance(self, x1, x2) -> np.ndarray:
        return np.outer(self.std(x1), self.std(x2)) * gaussian_kernel(x1, x2, self.Cl)

    def min_over_support(self, n_check: int = 2001) -> float:
        """Smallest c0 reachable for any xi in the hypercube [-sqrt3, sqrt3]^n."""
        x = np.linspace(0.0, self.length, n_check)
        r = self.eigenfunctions(x)
        spread = self.std(x) * (np.abs(r) @ np.sqrt(self.eigenvalues)) * SQRT3
        return float(np.min(self.mean(x) - spread))


def solve_kl(mu_profile, sigma_profile, length: float, Cl: float, n: int, M: int = 64) -> StiffnessField:
    """Nystrom solve of the Fredholm eigenproblem for the Gaussian correlation kernel.

    Parameters
    ----------
    mu_profile, sigma_profile : float or sequence of (x, value)
        Mean and std of c0 along the span.
    length : float
        Span of the domain.
    Cl : float
        Correlation length, > 0.
    n : int
        Number of modes kept.
    M : int
        Quadrature size, at least 4 n.
    """
    if not Cl > 0:
        raise RandomFieldError("correlation length must be positive")
    if n < 1 or M < 4 * n:
        raise RandomFieldError(f"need n >= 1 and M >= 4 n (n = {n}, M = {M})")
    g, w = np.polynomial.legendre.leggauss(M)
    x = 0.5 * length * (g + 1.0)
    w = 0.5 * length * w
    sw = np.sqrt(w)
    K = gaussian_kernel(x, x, Cl)
    # symmetric form W^1/2 K W^1/2
    vals, vecs = eigh(sw[:, None] * K * sw[None, :])
    order = np.argsort(vals)[::-1]
    vals, vecs = vals[order], vecs[:, order]
    tol = 1e3 * np.finfo(float).eps * vals[0]
    if vals[n - 1] <= tol:
        raise RandomFieldError(
            f"only {int(np.sum(vals > tol))} modes are numerically resolvable, {n} requested"
        )
    modes = (vecs[:, :n] / sw[:, None]).T
    # sign convention: positive mean
    signs = np.sign(modes @ w)
    signs[signs == 0] = 1.0
    modes = modes * signs[:, None]
    mu_x, mu_v = _as_profile(mu_profile)
    sg_x, sg_v = _as_profile(sigma_profile)
    if np.any(sg_v < 0):
        raise RandomFieldError("std profile must be nonnegative")
    field = StiffnessField(
        length=float(length),
        Cl=float(Cl),
        mu_x=mu_x,
        mu_v=mu_v,
        sigma_x=sg_x,
        sigma_v=sg_v,
        eigenvalues=vals[:n].copy(),
        nodes=x,
        weights=w,
        modes=modes,
        all_eigenvalues=np.clip(vals, 0.0, None),
    )
    lo = field.min_over_support()
    if lo <= 0:
        raise RandomFieldError(f"configured profiles allow non-positive c0 (min {lo:.4g} m/s)")
    return field


def sample_xi(rng: np.random.Generator, size) -> np.ndarray:
    """Independent U[-sqrt3, sqrt3] coordinates."""
    return rng.uniform(-SQRT3, SQRT3, size=size)


# --- mapping onto the network -----------------------------------------------


def _segment_points(net: NetworkTopology, sid: int, per_cell: int = 4) -> tuple[np.ndarray, np.ndarray]:
    """Local and global abscissae used to sample c0 on an aortic segment."""
    seg = net.segments[sid]
    offset = net.aorta_offsets()[sid]
    m = max(9, per_cell * seg.cells + 1)
    local = np.linspace(0.0, seg.length, m)
    glob = offset + local
    glob[-1] = offset + seg.length
    return local, glob


def apply_c0(net: NetworkTopology, c0_of_x) -> NetworkTopology:
    """Replace the stiffness of every aortic segment by ``c0_of_x(global_x)``.

    Junction values are shared exactly: adjacent segments evaluate the same
    global abscissa.
    """
    rho = net.fluid.rho
    updated = {}
    for sid in net.aorta_path:
        local, glob = _segment_points(net, sid)
        c0 = np.asarray(c0_of_x(glob), dtype=float)
        if np.any(c0 <= 0) or not np.all(np.isfinite(c0)):
            raise RandomFieldError(f"segment {sid}: realization has non-positive c0 (min {c0.min():.4g})")
        updated[sid] = net.segments[sid].with_c0_profile(local, c0, rho)
    return net.with_segments(updated)


def realize_network(net: NetworkTopology, field: StiffnessField, xi) -> NetworkTopology:
    """Network with the aortic stiffness of KL realization ``xi``."""
    return apply_c0(net, lambda x: field.realize(xi, x))


def mean_network(net: NetworkTopology, field: StiffnessField) -> NetworkTopology:
    return apply_c0(net, field.mean)


def proximal_statistics(net: NetworkTopology, field: StiffnessField, sid: int | None = None):
    """Mean and std of c0 averaged over the span of the first aortic segment.

    The std is the span average of the pointwise std of the full field
    (untruncated), i.e. of sigma(x).
    """
    sid = net.aorta_path[0] if sid is None else sid
    off = net.aorta_offsets()[sid]
    L = net.segments[sid].length
    g, w = np.polynomial.legendre.leggauss(32)
    x = off + 0.5 * L * (g + 1.0)
    w = 0.5 * w
    return float(w @ field.mean(x)), float(w @ field.std(x))


def realize_proximal(net: NetworkTopology, field: StiffnessField, xi1: float, sid: int | None = None):
    """Single-variable model: c0 on the first aortic segment is uniform and random.

    c0 = m + s * xi1 on that segment (xi1 in [-sqrt3, sqrt3]); the rest of the
    aorta keeps the mean profile.
    """
    sid = net.aorta_path[0] if sid is None else sid
    m, s = proximal_statistics(net, field, sid)
    base = mean_network(net, field)
    seg = base.segments[sid]
    c0 = m + s * float(xi1)
    if c0 <= 0:
        raise RandomFieldError(f"segment {sid}: non-positive c0 {c0:.4g}")
    return base.with_segments({sid: seg.with_c0_profile([0.0, seg.length], [c0, c0], net.fluid.rho)})


def field_from_network(net: NetworkTopology, Cl_over_L: float = 1.0 / 3.0, n_modes: int = 3,
                       M: int = 64, mu_profile=None, sigma_profile=None) -> StiffnessField:
    """Build the field on the network's aortic span using its shipped profiles."""
    meta = net.metadata.get("aorta_c0", {})
    mu = mu_profile if mu_profile is not None else meta.get("mean_profile")
    sg = sigma_profile if sigma_profile is not None else meta.get("std_profile")
    if mu is None or sg is None:
        raise RandomFieldError("network has no aortic c0 profiles; pass mu_profile and sigma_profile")
    L = net.aorta_length
    return solve_kl(mu, sg, L, Cl_over_L * L, n_modes, M)
