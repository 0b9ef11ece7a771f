"""Compiled kernels: pressure law, Roe flux, boundary couplings, RHS and AB2 loop.

State layout: ``A`` and ``u`` have shape (n_elements, p + 1) holding nodal
values on LGL nodes; elements of all segments are stored contiguously.

Boundary codes
--------------
left end of a segment:  0 prescribed flow, 1 exterior state, 2 bifurcation daughter
right end of a segment: 0 Windkessel, 1 absorbing, 2 closed, 3 exterior state,
                        4 bifurcation parent
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

OK = 0
ERR_AREA = 1
ERR_INLET = 2
ERR_OUTLET = 3
ERR_BIFURCATION = 4
ERR_SUPERCRITICAL = 5

STATUS_TEXT = {
    OK: "ok",
    ERR_AREA: "non-positive or non-finite area (blow-up)",
    ERR_INLET: "inlet Newton iteration did not converge",
    ERR_OUTLET: "outlet Newton iteration did not converge",
    ERR_BIFURCATION: "bifurcation Newton iteration did not converge",
    ERR_SUPERCRITICAL: "loss of subcritical flow at an interface (|u| >= c)",
}

LEFT_FLOW, LEFT_EXTERIOR, LEFT_DAUGHTER = 0, 1, 2
RIGHT_WINDKESSEL, RIGHT_ABSORBING, RIGHT_CLOSED, RIGHT_EXTERIOR, RIGHT_PARENT = 0, 1, 2, 3, 4


# --- pointwise relations ------------------------------------------------------


@njit(cache=True)
def wave_speed(A, beta, rho):
    """c = sqrt(beta sqrt(A) / (2 rho))."""
    return math.sqrt(beta * math.sqrt(A) / (2.0 * rho))


@njit(cache=True)
def pressure(A, beta, sqrtA0, p0):
    return p0 + beta * (math.sqrt(A) - sqrtA0)


@njit(cache=True)
def area_from_speed(c, beta, rho):
    s = 2.0 * rho * c * c / beta  # sqrt(A)
    return s * s


@njit(cache=True)
def flux(A, u, beta, sqrtA0, p0, rho):
    return A * u, 0.5 * u * u + pressure(A, beta, sqrtA0, p0) / rho


@njit(cache=True)
def roe_flux(AL, uL, AR, uR, beta, sqrtA0, p0, rho):
    """Roe flux with arithmetic averages; returns (F1, F2, status)."""
    FL1, FL2 = flux(AL, uL, beta, sqrtA0, p0, rho)
    FR1, FR2 = flux(AR, uR, beta, sqrtA0, p0, rho)
    Ah = 0.5 * (AL + AR)
    uh = 0.5 * (uL + uR)
    ch = wave_speed(Ah, beta, rho)
    status = OK
    if not (abs(uh) < ch):
        status = ERR_SUPERCRITICAL
    dA = AR - AL
    du = uR - uL
    F1 = 0.5 * (FL1 + FR1) - 0.5 * (ch * dA + Ah * uh / ch * du)
    F2 = 0.5 * (FL2 + FR2) - 0.5 * (ch * uh / Ah * dA + ch * du)
    return F1, F2, status


@njit(cache=True)
def roe_star(AL, uL, AR, uR, beta, rho):
    """Intermediate state of the linearized Riemann problem."""
    Ah = 0.5 * (AL + AR)
    ch = wave_speed(Ah, beta, rho)
    am = 0.5 * ((AR - AL) / Ah - (uR - uL) / ch)
    return AL + am * Ah, uL - am * ch


# --- boundary couplings -------------------------------------------------------


@njit(cache=True)
def inlet_state(Ai, ui, Q, beta, sqrtA0, rho, tol, maxit):
    """Upwinded state carrying flow Q with the outgoing invariant from the interior.

    Solves A (W- + 4 (c(A) - c0)) = Q by Newton from the interior area.
    Returns (A, u, status).
    """
    A0 = sqrtA0 * sqrtA0
    c0 = wave_speed(A0, beta, rho)
    Wm = ui - 4.0 * (wave_speed(Ai, beta, rho) - c0)
    scale = A0 * c0
    A = Ai
    for _ in range(maxit):
        c = wave_speed(A, beta, rho)
        u = Wm + 4.0 * (c - c0)
        r = A * u - Q
        if abs(r) <= 1e-15 * scale:
            return A, u, OK
        dA = -r / (u + c)
        Anew = A + dA
        if Anew <= 0.0:
            Anew = 0.5 * A
        A = Anew
        if abs(dA) <= 1e-15 * A0:
            c = wave_speed(A, beta, rho)
            u = Wm + 4.0 * (c - c0)
            break
    c = wave_speed(A, beta, rho)
    u = Wm + 4.0 * (c - c0)
    if abs(A * u - Q) > tol * scale or not A > 0.0:
        return A, u, ERR_INLET
    return A, u, OK


@njit(cache=True)
def windkessel_state(Al, ul, pC, R1, beta, sqrtA0, p0, rho, tol, maxit):
    """Upwinded outlet state of a three-element Windkessel.

    Newton on R1 A (W+ - 4 c(A) + 4 c0) - (p(A) - pC) = 0, scaled by
    beta sqrt(A0), starting from the interior area.  Returns (A, u, status).
    """
    A0 = sqrtA0 * sqrtA0
    c0 = wave_speed(A0, beta, rho)
    Wp = ul + 4.0 * (wave_speed(Al, beta, rho) - c0)
    pscale = beta * sqrtA0
    A = Al
    for _ in range(maxit):
        c = wave_speed(A, beta, rho)
        u = Wp - 4.0 * (c - c0)
        r = (R1 * A * u - (pressure(A, beta, sqrtA0, p0) - pC)) / pscale
        if abs(r) <= 1e-15:
            break
        d = (R1 * (u - c) - 0.5 * beta / math.sqrt(A)) / pscale
        dA = -r / d
        Anew = A + dA
        if Anew <= 0.0:
            Anew = 0.5 * A
        A = Anew
        if abs(dA) <= 1e-15 * A0:
            break
    c = wave_speed(A, beta, rho)
    u = Wp - 4.0 * (c - c0)
    r = (R1 * A * u - (pressure(A, beta, sqrtA0, p0) - pC)) / pscale
    if abs(r) > tol or not A > 0.0:
        return A, u, ERR_OUTLET
    return A, u, OK


@njit(cache=True)
def characteristic_state(Wp, Wm, beta, sqrtA0, rho):
    """State from the two invariants W+ and W-."""
    c0 = wave_speed(sqrtA0 * sqrtA0, beta, rho)
    c = c0 + (Wp - Wm) / 8.0
    u = 0.5 * (Wp + Wm)
    if c <= 0.0:
        return 0.0, u, ERR_AREA
    return area_from_speed(c, beta, rho), u, OK


@njit(cache=True)
def _solve6(M, b, x):
    """Gaussian elimination with partial pivoting for a 6 x 6 system (in place)."""
    n = 6
    for k in range(n):
        piv = k
        best = abs(M[k, k])
        for i in range(k + 1, n):
            if abs(M[i, k]) > best:
                best = abs(M[i, k])
                piv = i
        if best == 0.0:
            return False
        if piv != k:
            for j in range(n):
                tmp = M[k, j]
                M[k, j] = M[piv, j]
                M[piv, j] = tmp
            tmp = b[k]
            b[k] = b[piv]
            b[piv] = tmp
        for i in range(k + 1, n):
            f = M[i, k] / M[k, k]
            for j in range(k, n):
                M[i, j] -= f * M[k, j]
            b[i] -= f * b[k]
    for i in range(n - 1, -1, -1):
        s = b[i]
        for j in range(i + 1, n):
            s -= M[i, j] * x[j]
        x[i] = s / M[i, i]
    return True


@njit(cache=True)
def bifurcation_solve(W, beta, sqrtA0, p0, rho, x, tol, maxit):
    """Newton solve of the bifurcation coupling.

    Parameters
    ----------
    W : (3,) outgoing invariants: W+ of the parent, W- of each daughter
    beta, sqrtA0, p0 : (3,) wall data at the junction (parent end, daughter starts)
    x : (6,) [u_p, u_1, u_2, A_p, A_1, A_2]; initial guess on entry, solution on exit

    Returns (status, final scaled residual).  After convergence the parent
    velocity is reset so that A_p u_p = A_1 u_1 + A_2 u_2 holds to round-off.
    """
    c0 = np.empty(3)
    for k in range(3):
        c0[k] = wave_speed(sqrtA0[k] * sqrtA0[k], beta[k], rho)
    vs = c0[0]
    qs = sqrtA0[0] * sqrtA0[0] * vs
    ps = rho * vs * vs
    M = np.empty((6, 6))
    r = np.empty(6)
    dx = np.empty(6)
    res = 1.0
    for it in range(maxit + 1):
        up, u1, u2 = x[0], x[1], x[2]
        Ap, A1, A2 = x[3], x[4], x[5]
        if not (Ap > 0.0 and A1 > 0.0 and A2 > 0.0):
            return ERR_BIFURCATION, res
        cp = wave_speed(Ap, beta[0], rho)
        c1 = wave_speed(A1, beta[1], rho)
        c2 = wave_speed(A2, beta[2], rho)
        r[0] = (up + 4.0 * (cp - c0[0]) - W[0]) / vs
        r[1] = (u1 - 4.0 * (c1 - c0[1]) - W[1]) / vs
        r[2] = (u2 - 4.0 * (c2 - c0[2]) - W[2]) / vs
        r[3] = (Ap * up - A1 * u1 - A2 * u2) / qs
        Pp = pressure(Ap, beta[0], sqrtA0[0], p0[0]) + 0.5 * rho * up * up
        r[4] = (Pp - pressure(A1, beta[1], sqrtA0[1], p0[1]) - 0.5 * rho * u1 * u1) / ps
        r[5] = (Pp - pressure(A2, beta[2], sqrtA0[2], p0[2]) - 0.5 * rho * u2 * u2) / ps
        res = 0.0
        for k in range(6):
            res = max(res, abs(r[k]))
        # at least one Newton update so a warm start is always refreshed
        if res <= tol and (it > 0 or res == 0.0):
            x[0] = (A1 * u1 + A2 * u2) / Ap
            return OK, res
        if it == maxit:
            break
        for i in range(6):
            for j in range(6):
                M[i, j] = 0.0
        M[0, 0] = 1.0 / vs
        M[0, 3] = cp / Ap / vs
        M[1, 1] = 1.0 / vs
        M[1, 4] = -c1 / A1 / vs
        M[2, 2] = 1.0 / vs
        M[2, 5] = -c2 / A2 / vs
        M[3, 0] = Ap / qs
        M[3, 1] = -A1 / qs
        M[3, 2] = -A2 / qs
        M[3, 3] = up / qs
        M[3, 4] = -u1 / qs
        M[3, 5] = -u2 / qs
        M[4, 0] = rho * up / ps
        M[4, 1] = -rho * u1 / ps
        M[4, 3] = 0.5 * beta[0] / math.sqrt(Ap) / ps
        M[4, 4] = -0.5 * beta[1] / math.sqrt(A1) / ps
        M[5, 0] = rho * up / ps
        M[5, 2] = -rho * u2 / ps
        M[5, 3] = 0.5 * beta[0] / math.sqrt(Ap) / ps
        M[5, 5] = -0.5 * beta[2] / math.sqrt(A2) / ps
        for k in range(6):
            r[k] = -r[k]
        if not _solve6(M, r, dx):
            return ERR_BIFURCATION, res
        # damp steps that would make an area non-positive
        lam = 1.0
        for k in range(3, 6):
            if x[k] + lam * dx[k] <= 0.0:
                lam = min(lam, 0.5 * x[k] / abs(dx[k]))
        for k in range(6):
            x[k] += lam * dx[k]
    return ERR_BIFURCATION, res


# --- right-hand side --------------------------------------------------------


@njit(cache=True)
def rhs(
    A, u, pC, Qin,
    el_h, el_beta_q, el_beta_R, seg_e0, seg_ne, seg_sqrtA0, seg_p0,
    seg_left, seg_left_idx, seg_right, seg_right_idx, seg_beta_L, seg_beta_R,
    bif_seg, bif_x, term_par, ext_state,
    Bq, Kvol, Ksrc, liftL, liftR, rho, Kfric, forcing, use_forcing, tol, maxit,
    dA, du, dpC, elFR, segF, term_q, diag,
):
    """Evaluate dA/dt, du/dt and dpC/dt.  Returns a status code.

    ``segF[s, side, comp]`` receives the boundary fluxes of every segment,
    ``term_q`` the outflow of each terminal, ``diag[0]`` the inlet flow and
    ``diag[1]`` the largest relative bifurcation mass defect seen.
    """
    n_el, m = A.shape
    nq = Bq.shape[0]
    n_seg = seg_e0.shape[0]
    for e in range(n_el):
        for i in range(m):
            if not (A[e, i] > 0.0) or not np.isfinite(u[e, i]):
                return ERR_AREA
    # boundary fluxes at segment ends (inlet, outlets, exterior states)
    for s in range(n_seg):
        e0 = seg_e0[s]
        e1 = e0 + seg_ne[s] - 1
        sA0 = seg_sqrtA0[s]
        p0 = seg_p0[s]
        bl = seg_beta_L[s]
        br = seg_beta_R[s]
        code = seg_left[s]
        if code == LEFT_FLOW:
            Au, uu, st = inlet_state(A[e0, 0], u[e0, 0], Qin, bl, sA0, rho, tol, maxit)
            if st != OK:
                return st
            f1, f2 = flux(Au, uu, bl, sA0, p0, rho)
            segF[s, 0, 0] = f1
            segF[s, 0, 1] = f2
            diag[0] = f1
        elif code == LEFT_EXTERIOR:
            c0 = wave_speed(sA0 * sA0, bl, rho)
            Wm = u[e0, 0] - 4.0 * (wave_speed(A[e0, 0], bl, rho) - c0)
            Wp = ext_state[s, 0, 1] + 4.0 * (wave_speed(ext_state[s, 0, 0], bl, rho) - c0)
            Au, uu, st = characteristic_state(Wp, Wm, bl, sA0, rho)
            if st != OK:
                return st
            f1, f2 = flux(Au, uu, bl, sA0, p0, rho)
            segF[s, 0, 0] = f1
            segF[s, 0, 1] = f2
            diag[0] = f1
        code = seg_right[s]
        Al = A[e1, m - 1]
        ul = u[e1, m - 1]
        if code == RIGHT_WINDKESSEL:
            k = seg_right_idx[s]
            Au, uu, st = windkessel_state(Al, ul, pC[k], term_par[k, 0], br, sA0, p0, rho, tol, maxit)
            if st != OK:
                return st
        elif code == RIGHT_ABSORBING or code == RIGHT_CLOSED or code == RIGHT_EXTERIOR:
            c0 = wave_speed(sA0 * sA0, br, rho)
            Wp = ul + 4.0 * (wave_speed(Al, br, rho) - c0)
            if code == RIGHT_ABSORBING:
                Wm = 0.0
            elif code == RIGHT_CLOSED:
                Wm = -Wp
            else:
                Wm = ext_state[s, 1, 1] - 4.0 * (wave_speed(ext_state[s, 1, 0], br, rho) - c0)
            Au, uu, st = characteristic_state(Wp, Wm, br, sA0, rho)
            if st != OK:
                return st
        else:
            continue
        f1, f2 = flux(Au, uu, br, sA0, p0, rho)
        segF[s, 1, 0] = f1
        segF[s, 1, 1] = f2
        if code == RIGHT_WINDKESSEL or code == RIGHT_ABSORBING or code == RIGHT_CLOSED or code == RIGHT_EXTERIOR:
            if seg_right_idx[s] >= 0:
                term_q[seg_right_idx[s]] = f1
    # bifurcations
    W = np.empty(3)
    bb = np.empty(3)
    bs = np.empty(3)
    bp = np.empty(3)
    for b in range(bif_seg.shape[0]):
        sp = bif_seg[b, 0]
        for k in range(3):
            s = bif_seg[b, k]
            bs[k] = seg_sqrtA0[s]
            bp[k] = seg_p0[s]
            if k == 0:
                e = seg_e0[s] + seg_ne[s] - 1
                bb[k] = seg_beta_R[s]
                c0 = wave_speed(bs[k] * bs[k], bb[k], rho)
                W[k] = u[e, m - 1] + 4.0 * (wave_speed(A[e, m - 1], bb[k], rho) - c0)
            else:
                e = seg_e0[s]
                bb[k] = seg_beta_L[s]
                c0 = wave_speed(bs[k] * bs[k], bb[k], rho)
                W[k] = u[e, 0] - 4.0 * (wave_speed(A[e, 0], bb[k], rho) - c0)
        x = bif_x[b]
        st, res = bifurcation_solve(W, bb, bs, bp, rho, x, tol, maxit)
        if st != OK:
            return st
        for k in range(3):
            s = bif_seg[b, k]
            f1, f2 = flux(x[3 + k], x[k], bb[k], bs[k], bp[k], rho)
            side = 1 if k == 0 else 0
            segF[s, side, 0] = f1
            segF[s, side, 1] = f2
        q1 = segF[bif_seg[b, 1], 0, 0]
        q2 = segF[bif_seg[b, 2], 0, 0]
        qp = segF[sp, 1, 0]
        defect = abs(qp - q1 - q2) / (abs(qp) + abs(q1) + abs(q2) + 1e-300)
        if defect > diag[1]:
            diag[1] = defect
    # interior faces: right flux of each element except the last of a segment
    for s in range(n_seg):
        e0 = seg_e0[s]
        ne = seg_ne[s]
        sA0 = seg_sqrtA0[s]
        p0 = seg_p0[s]
        for j in range(ne - 1):
            e = e0 + j
            f1, f2, st = roe_flux(A[e, m - 1], u[e, m - 1], A[e + 1, 0], u[e + 1, 0], el_beta_R[e], sA0, p0, rho)
            if st != OK:
                return st
            elFR[e, 0] = f1
            elFR[e, 1] = f2
    # element contributions
    Fq1 = np.empty(nq)
    Fq2 = np.empty(nq)
    Sq1 = np.empty(nq)
    Sq2 = np.empty(nq)
    for s in range(n_seg):
        e0 = seg_e0[s]
        ne = seg_ne[s]
        sA0 = seg_sqrtA0[s]
        p0 = seg_p0[s]
        for j in range(ne):
            e = e0 + j
            for q in range(nq):
                aq = 0.0
                vq = 0.0
                for i in range(m):
                    aq += Bq[q, i] * A[e, i]
                    vq += Bq[q, i] * u[e, i]
                if not (aq > 0.0):
                    return ERR_AREA
                Fq1[q] = aq * vq
                Fq2[q] = 0.5 * vq * vq + (p0 + el_beta_q[e, q] * (math.sqrt(aq) - sA0)) / rho
                Sq1[q] = 0.0
                Sq2[q] = -Kfric * vq / (rho * aq)
                if use_forcing:
                    Sq1[q] += forcing[e, q, 0]
                    Sq2[q] += forcing[e, q, 1]
            if j == 0:
                FL1 = segF[s, 0, 0]
                FL2 = segF[s, 0, 1]
            else:
                FL1 = elFR[e - 1, 0]
                FL2 = elFR[e - 1, 1]
            if j == ne - 1:
                FR1 = segF[s, 1, 0]
                FR2 = segF[s, 1, 1]
            else:
                FR1 = elFR[e, 0]
                FR2 = elFR[e, 1]
            jac = 2.0 / el_h[e]
            for i in range(m):
                v1 = 0.0
                v2 = 0.0
                s1 = 0.0
                s2 = 0.0
                for q in range(nq):
                    v1 += Kvol[i, q] * Fq1[q]
                    v2 += Kvol[i, q] * Fq2[q]
                    s1 += Ksrc[i, q] * Sq1[q]
                    s2 += Ksrc[i, q] * Sq2[q]
                dA[e, i] = jac * (v1 - liftR[i] * FR1 + liftL[i] * FL1) + s1
                du[e, i] = jac * (v2 - liftR[i] * FR2 + liftL[i] * FL2) + s2
    # Windkessel capacitor pressures
    for k in range(pC.shape[0]):
        C = term_par[k, 2]
        if C > 0.0:
            dpC[k] = (term_q[k] - (pC[k] - term_par[k, 3]) / term_par[k, 1]) / C
        else:
            dpC[k] = 0.0
    return OK


@njit(cache=True)
def advance(
    A, u, pC, n_steps, dt, Qin_steps, ab2,
    rA, ru, rpC, rq,
    el_h, el_beta_q, el_beta_R, seg_e0, seg_ne, seg_sqrtA0, seg_p0,
    seg_left, seg_left_idx, seg_right, seg_right_idx, seg_beta_L, seg_beta_R,
    bif_seg, bif_x, term_par, ext_state,
    Bq, Kvol, Ksrc, liftL, liftR, rho, Kfric, forcing, use_forcing, tol, maxit,
    rec_every, st_el, st_phi, rec_A, rec_u, rec_pC, acc,
):
    """Advance ``n_steps`` AB2 steps, recording stations every ``rec_every`` steps.

    ``ab2[0]`` is 0 before the very first step (Euler start) and 1 after.
    ``rA, ru, rpC, rq`` hold the previous right-hand side (and boundary flows
    ``rq = [inlet, outlets...]``) between calls.  ``acc`` accumulates
    [inlet volume, outlet volume, max bifurcation defect, max CFL-like
    speed ratio max((|u| + c) / h)].  Returns (status, steps taken).
    """
    n_el, m = A.shape
    nt = pC.shape[0]
    dA = np.empty_like(A)
    du = np.empty_like(u)
    dpC = np.empty(nt)
    elFR = np.zeros((n_el, 2))
    segF = np.zeros((seg_e0.shape[0], 2, 2))
    term_q = np.zeros(nt)
    diag = np.zeros(2)
    n_st = st_el.shape[0]
    r = 0
    for k in range(n_steps + 1):
        if k % rec_every == 0:
            for j in range(n_st):
                e = st_el[j]
                a = 0.0
                v = 0.0
                for i in range(m):
                    a += st_phi[j, i] * A[e, i]
                    v += st_phi[j, i] * u[e, i]
                rec_A[r, j] = a
                rec_u[r, j] = v
            for j in range(nt):
                rec_pC[r, j] = pC[j]
            r += 1
            # wave-speed ratio for the CFL report
            for e in range(n_el):
                s_max = 0.0
                for i in range(m):
                    if A[e, i] > 0.0:
                        bet = el_beta_q[e, 0]
                        sp = abs(u[e, i]) + math.sqrt(bet * math.sqrt(A[e, i]) / (2.0 * rho))
                        if sp > s_max:
                            s_max = sp
                ratio = s_max / el_h[e]
                if ratio > acc[3]:
                    acc[3] = ratio
        if k == n_steps:
            break
        diag[1] = 0.0
        st = rhs(
            A, u, pC, Qin_steps[k],
            el_h, el_beta_q, el_beta_R, seg_e0, seg_ne, seg_sqrtA0, seg_p0,
            seg_left, seg_left_idx, seg_right, seg_right_idx, seg_beta_L, seg_beta_R,
            bif_seg, bif_x, term_par, ext_state,
            Bq, Kvol, Ksrc, liftL, liftR, rho, Kfric, forcing, use_forcing, tol, maxit,
            dA, du, dpC, elFR, segF, term_q, diag,
        )
        if st != OK:
            return st, k
        if diag[1] > acc[2]:
            acc[2] = diag[1]
        qout = 0.0
        for j in range(nt):
            qout += term_q[j]
        if ab2[0] == 0:
            rA[:, :] = dA
            ru[:, :] = du
            rpC[:] = dpC
            rq[0] = diag[0]
            rq[1] = qout
            ab2[0] = 1
        a1 = 1.5 * dt
        a0 = -0.5 * dt
        for e in range(n_el):
            for i in range(m):
                A[e, i] += a1 * dA[e, i] + a0 * rA[e, i]
                u[e, i] += a1 * du[e, i] + a0 * ru[e, i]
                rA[e, i] = dA[e, i]
                ru[e, i] = du[e, i]
        for j in range(nt):
            pC[j] += a1 * dpC[j] + a0 * rpC[j]
            rpC[j] = dpC[j]
        acc[0] += a1 * diag[0] + a0 * rq[0]
        acc[1] += a1 * qout + a0 * rq[1]
        rq[0] = diag[0]
        rq[1] = qout
    for e in range(n_el):
        for i in range(m):
            if not (A[e, i] > 0.0) or not np.isfinite(A[e, i]) or not np.isfinite(u[e, i]):
                return ERR_AREA, n_steps
    return OK, n_steps
