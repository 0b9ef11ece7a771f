"""Reference-element operators for the nodal DG discretization.

Elements use a Lagrange basis on the p+1 Legendre-Gauss-Lobatto nodes of
[-1, 1]; volume and source integrals use ceil(3(p+1)/2) Gauss-Legendre
points.  With nodal endpoints the interface traces are simply the first and
last nodal values.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import legendre


def lgl_nodes(p: int) -> np.ndarray:
    """Legendre-Gauss-Lobatto nodes of order p (p + 1 points)."""
    if p < 1:
        raise ValueError("polynomial order must be >= 1")
    inner = legendre.Legendre.basis(p).deriv().roots()
    return np.concatenate(([-1.0], np.sort(np.real(inner)), [1.0]))


def n_quadrature(p: int) -> int:
    """Over-integration rule: ceil(3 (p + 1) / 2) points."""
    return math.ceil(3 * (p + 1) / 2)


def lagrange_matrices(nodes: np.ndarray, x: np.ndarray):
    """Values and derivatives of the nodal Lagrange basis at points ``x``.

    Returns ``(B, D)`` with ``B[k, i] = l_i(x_k)`` and ``D[k, i] = l_i'(x_k)``.
    """
    p = len(nodes) - 1
    Vinv = np.linalg.inv(legendre.legvander(nodes, p))
    B = legendre.legvander(x, p) @ Vinv
    dV = np.stack([legendre.legval(x, legendre.legder(np.eye(p + 1)[j])) for j in range(p + 1)], axis=1)
    D = dV @ Vinv
    return B, D


@dataclass(frozen=True)
class ReferenceElement:
    """Precomputed operators so that, on an element of length h,

    dU/dt = (2/h) [Kvol @ F_q - lift_R * F_R + lift_L * F_L] + Ksrc @ S_q

    with F_q, S_q the flux and source at the quadrature points and F_L, F_R
    the numerical fluxes at the element ends.
    """

    p: int
    nodes: np.ndarray
    xq: np.ndarray
    wq: np.ndarray
    Bq: np.ndarray
    mass: np.ndarray
    Kvol: np.ndarray
    Ksrc: np.ndarray
    lift_L: np.ndarray
    lift_R: np.ndarray
    node_weights: np.ndarray  # integral of each basis function over [-1, 1]

    def interpolation_row(self, xi: float) -> np.ndarray:
        B, _ = lagrange_matrices(self.nodes, np.array([xi]))
        return B[0]


@lru_cache(maxsize=None)
def reference_element(p: int) -> ReferenceElement:
    nodes = lgl_nodes(p)
    xq, wq = legendre.leggauss(n_quadrature(p))
    Bq, Dq = lagrange_matrices(nodes, xq)
    mass = Bq.T @ (wq[:, None] * Bq)
    Minv = np.linalg.inv(mass)
    Kvol = Minv @ (Dq.T * wq)
    Ksrc = Minv @ (Bq.T * wq)
    return ReferenceElement(
        p=p,
        nodes=nodes,
        xq=xq,
        wq=wq,
        Bq=Bq,
        mass=mass,
        Kvol=Kvol,
        Ksrc=Ksrc,
        lift_L=Minv[:, 0].copy(),
        lift_R=Minv[:, -1].copy(),
        node_weights=Bq.T @ wq,
    )


def advection_operator(p: int, n_el: int = 16) -> np.ndarray:
    """Semi-discrete upwind DG operator for u_t + u_x = 0 on a periodic unit mesh (h = 1)."""
    ref = reference_element(p)
    m = p + 1
    L = np.zeros((n_el * m, n_el * m))
    for e in range(n_el):
        rows = slice(e * m, (e + 1) * m)
        L[rows, rows] += 2.0 * ref.Kvol @ ref.Bq
        # right flux: upwind from this element's last node
        L[rows, e * m + m - 1] -= 2.0 * ref.lift_R
        # left flux: upwind from the previous element's last node
        prev = ((e - 1) % n_el) * m + m - 1
        L[rows, prev] += 2.0 * ref.lift_L
    return L


def ab2_stability_limit(p: int, growth_tol: float = 1e-9, n_el: int = 16) -> float:
    """Largest dt * a / h for which AB2 + upwind DG has no amplification above 1 + tol.

    AB2 amplification roots z solve z^2 - (1 + 1.5 k) z + 0.5 k = 0 with
    k = dt * lambda for every eigenvalue lambda of the semi-discrete operator.
    """
    lam = np.linalg.eigvals(advection_operator(p, n_el))

    def max_growth(nu):
        k = nu * lam
        b = 1.0 + 1.5 * k
        disc = np.sqrt(b * b - 2.0 * k + 0j)
        return np.max(np.maximum(np.abs((b + disc) / 2), np.abs((b - disc) / 2)))

    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if max_growth(mid) <= 1.0 + growth_tol:
            lo = mid
        else:
            hi = mid
    return lo
