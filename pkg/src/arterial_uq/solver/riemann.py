"""Scalar interface problems: Roe flux and the boundary/junction couplings.

These wrap the compiled kernels used inside the time loop so that each
coupling can be called and checked in isolation.  States are ``(A, u)``
pairs; wall data is given by ``beta`` (Pa/m), ``A0`` (m^2) and ``p0`` (Pa).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels as K


class CouplingError(RuntimeError):
    """A Riemann or coupling problem has no admissible solution."""


def invariants(A, u, beta, A0, rho):
    """Characteristic variables W+ and W- = u +/- 4 (c - c0)."""
    c = np.sqrt(beta * np.sqrt(A) / (2.0 * rho))
    c0 = np.sqrt(beta * np.sqrt(A0) / (2.0 * rho))
    return u + 4.0 * (c - c0), u - 4.0 * (c - c0)


def state_from_invariants(Wp, Wm, beta, A0, rho):
    A, u, st = K.characteristic_state(float(Wp), float(Wm), float(beta), math.sqrt(A0), float(rho))
    if st != K.OK:
        raise CouplingError("invariants give a non-positive wave speed")
    return A, u


def physical_flux(A, u, beta, A0, rho, p0=0.0):
    """F = (A u, u^2/2 + p/rho)."""
    return K.flux(float(A), float(u), float(beta), math.sqrt(A0), float(p0), float(rho))


@dataclass(frozen=True)
class InterfaceSolution:
    flux: tuple  # (F_A, F_u)
    star: tuple  # (A*, u*) of the linearized problem


def roe_interface(left, right, beta, A0, rho, p0=0.0) -> InterfaceSolution:
    """Roe flux between two states of the same wall.

    Raises
    ------
    CouplingError
        Non-positive area or |u| >= c at the averaged state.
    """
    (AL, uL), (AR, uR) = left, right
    if not (AL > 0 and AR > 0):
        raise CouplingError("Riemann problem with non-positive area")
    F1, F2, st = K.roe_flux(float(AL), float(uL), float(AR), float(uR), float(beta),
                            math.sqrt(A0), float(p0), float(rho))
    if st != K.OK:
        raise CouplingError(K.STATUS_TEXT[st])
    star = K.roe_star(float(AL), float(uL), float(AR), float(uR), float(beta), float(rho))
    return InterfaceSolution((F1, F2), star)


@dataclass(frozen=True)
class BoundarySolution:
    upwind: tuple  # (A, u) at the boundary interface
    ghost: tuple  # exterior state fed to the Riemann solver
    pC: float | None = None  # updated capacitor pressure (outlets)
    residual: float = 0.0


def inlet_bc(interior, Q, beta, A0, rho, tol=1e-10, maxit=50) -> BoundarySolution:
    """Upwinded inlet state carrying flow ``Q`` with W- taken from the interior.

    The ghost state equals the upwinded state, so that the Riemann problem
    between interior and ghost reproduces it.
    """
    Ai, ui = interior
    if not math.isfinite(Q):
        raise CouplingError("inlet flow rate is not finite")
    A, u, st = K.inlet_state(float(Ai), float(ui), float(Q), float(beta), math.sqrt(A0), float(rho),
                             tol, maxit)
    if st != K.OK:
        raise CouplingError(K.STATUS_TEXT[st])
    c0 = math.sqrt(beta * math.sqrt(A0) / (2.0 * rho))
    return BoundarySolution((A, u), (A, u), None, abs(A * u - Q) / (A0 * c0))


def windkessel_residual(A, Wp, pC, R1, beta, A0, rho, p0=0.0):
    """Nondimensional outlet residual [R1 A u - (p(A) - pC)] / (beta sqrt(A0))."""
    c0 = math.sqrt(beta * math.sqrt(A0) / (2.0 * rho))
    c = math.sqrt(beta * math.sqrt(A) / (2.0 * rho))
    u = Wp - 4.0 * (c - c0)
    p = p0 + beta * (math.sqrt(A) - math.sqrt(A0))
    return (R1 * A * u - (p - pC)) / (beta * math.sqrt(A0))


def outlet_bc(interior, outlet, pC, dt, beta, A0, rho, p0=0.0, tol=1e-10, maxit=50) -> BoundarySolution:
    """Three-element Windkessel coupling at a terminal.

    Solves for the upwinded area A^u (Newton from the interior area), sets
    u^u from the interior W+, builds the ghost ``(A_l, 2 u^u - u_l)`` and
    advances the capacitor pressure by one explicit Euler step of
    ``C dpC/dt = A^u u^u - (pC - pv) / R2``.
    """
    Al, ul = interior
    if not Al > 0:
        raise CouplingError("outlet interior area is non-positive")
    A, u, st = K.windkessel_state(float(Al), float(ul), float(pC), float(outlet.R1), float(beta),
                                  math.sqrt(A0), float(p0), float(rho), tol, maxit)
    if st != K.OK:
        raise CouplingError(K.STATUS_TEXT[st])
    Wp, _ = invariants(Al, ul, beta, A0, rho)
    res = windkessel_residual(A, float(Wp), pC, outlet.R1, beta, A0, rho, p0)
    pC_new = pC + dt * (A * u - (pC - outlet.pv) / outlet.R2) / outlet.C
    return BoundarySolution((A, u), (Al, 2.0 * u - ul), pC_new, abs(res))


@dataclass(frozen=True)
class JunctionSolution:
    states: tuple  # ((A_p, u_p), (A_1, u_1), (A_2, u_2))
    flow_defect: float  # Q_p - Q_1 - Q_2
    pressure_residuals: tuple  # total-pressure mismatches (Pa), parent vs each daughter
    newton_residual: float


def bifurcation_coupling(parent, daughter1, daughter2, beta, A0, rho, p0=(0.0, 0.0, 0.0),
                         tol=1e-10, maxit=50, guess=None) -> JunctionSolution:
    """Junction states from the outgoing invariants of the three vessels.

    ``beta``, ``A0`` and ``p0`` are triples (parent end, daughter starts).
    """
    beta = np.asarray(beta, dtype=float)
    sA0 = np.sqrt(np.asarray(A0, dtype=float))
    p0 = np.asarray(p0, dtype=float)
    states = (parent, daughter1, daughter2)
    if any(s[0] <= 0 for s in states):
        raise CouplingError("bifurcation state with non-positive area")
    W = np.array([
        invariants(parent[0], parent[1], beta[0], sA0[0] ** 2, rho)[0],
        invariants(daughter1[0], daughter1[1], beta[1], sA0[1] ** 2, rho)[1],
        invariants(daughter2[0], daughter2[1], beta[2], sA0[2] ** 2, rho)[1],
    ])
    x = np.array([s[1] for s in states] + [s[0] for s in states], dtype=float)
    if guess is not None:
        x[:] = guess
    st, res = K.bifurcation_solve(W, beta, sA0, p0, float(rho), x, tol, maxit)
    if st != K.OK:
        raise CouplingError(f"{K.STATUS_TEXT[st]} (residual {res:.3e})")
    up, u1, u2, Ap, A1, A2 = (float(v) for v in x)
    P = [p0[k] + beta[k] * (math.sqrt(a) - sA0[k]) + 0.5 * rho * v * v
         for k, (a, v) in enumerate(((Ap, up), (A1, u1), (A2, u2)))]
    return JunctionSolution(
        ((Ap, up), (A1, u1), (A2, u2)),
        Ap * up - A1 * u1 - A2 * u2,
        (float(P[0] - P[1]), float(P[0] - P[2])),
        float(res),
    )
