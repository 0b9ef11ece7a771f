"""Network assembly, initialization and cycle-by-cycle time integration."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from ..network import NetworkTopology
from . import kernels as K
from .dg import reference_element
from .record import Station, WaveformRecord


class SimulationError(RuntimeError):
    """Raised when a run aborts (blow-up, Newton failure, CFL violation)."""

    def __init__(self, message, status=None, time=None):
        super().__init__(message)
        self.status = status
        self.time = time


@dataclass(frozen=True)
class SolverConfig:
    """Time-integration settings.

    ``cfl`` bounds ``dt (p+1)^2 (|u|+c) / h`` over all elements on the
    initial state; ``dt`` overrides it when given (it must then satisfy the
    same bound).  The step is shrunk so that an integer number of steps fits
    each output sample and an integer number of samples fits one cycle.
    """

    cfl: float = 0.2
    dt: float | None = None
    n_cycles: int = 10
    sample_rate: float = 1000.0
    newton_tol: float = 1e-10
    newton_maxit: int = 50
    init: str = "windkessel"  # "windkessel" or "rest"
    stop_when_periodic: bool = False
    periodicity_tol: float = 1e-3
    record_ends: bool = False
    keep_cycles: bool = False
    cfl_limit: float | None = None  # abort if the realized CFL exceeds this

    def __post_init__(self):
        if self.init not in ("windkessel", "rest"):
            raise ValueError(f"unknown initialization {self.init!r}")
        if not self.cfl > 0 or self.n_cycles < 1 or not self.sample_rate > 0:
            raise ValueError("cfl, n_cycles and sample_rate must be positive")


@dataclass
class FieldState:
    """Nodal (A, u) on every element, Windkessel pressures and AB2 history."""

    A: np.ndarray
    u: np.ndarray
    pC: np.ndarray
    t: float = 0.0
    dt: float = 0.0
    ab2: np.ndarray = field(default_factory=lambda: np.zeros(1, dtype=np.int64))
    rA: np.ndarray | None = None
    ru: np.ndarray | None = None
    rpC: np.ndarray | None = None
    rq: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def copy(self) -> "FieldState":
        return FieldState(
            self.A.copy(), self.u.copy(), self.pC.copy(), self.t, self.dt, self.ab2.copy(),
            None if self.rA is None else self.rA.copy(),
            None if self.ru is None else self.ru.copy(),
            None if self.rpC is None else self.rpC.copy(),
            self.rq.copy(),
        )


class Mesh:
    """Flattened element arrays for the compiled kernels."""

    def __init__(self, net: NetworkTopology, outlet_override: dict | None = None,
                 exterior: dict | None = None):
        orders = {s.poly_order for s in net.segments.values()}
        if len(orders) != 1:
            raise ValueError(f"all segments must share one polynomial order, got {sorted(orders)}")
        self.net = net
        self.p = orders.pop()
        self.ref = ref = reference_element(self.p)
        self.seg_ids = list(net.segments)
        self.seg_index = {sid: k for k, sid in enumerate(self.seg_ids)}
        self.term_ids = list(net.terminals)
        self.term_index = {sid: k for k, sid in enumerate(self.term_ids)}
        rho = net.fluid.rho
        n_seg = len(self.seg_ids)
        m = self.p + 1
        nq = len(ref.xq)
        e_total = sum(net.segments[s].cells for s in self.seg_ids)
        self.n_el, self.m = e_total, m
        self.el_h = np.empty(e_total)
        self.el_beta_q = np.empty((e_total, nq))
        self.el_beta_R = np.empty(e_total)
        self.el_beta_nodes = np.empty((e_total, m))
        self.el_x_nodes = np.empty((e_total, m))
        self.el_x_q = np.empty((e_total, nq))
        self.el_seg = np.empty(e_total, dtype=np.int64)
        self.seg_e0 = np.empty(n_seg, dtype=np.int64)
        self.seg_ne = np.empty(n_seg, dtype=np.int64)
        self.seg_sqrtA0 = np.empty(n_seg)
        self.seg_p0 = np.empty(n_seg)
        self.seg_beta_L = np.empty(n_seg)
        self.seg_beta_R = np.empty(n_seg)
        self.seg_left = np.full(n_seg, -1, dtype=np.int64)
        self.seg_left_idx = np.full(n_seg, -1, dtype=np.int64)
        self.seg_right = np.full(n_seg, -1, dtype=np.int64)
        self.seg_right_idx = np.full(n_seg, -1, dtype=np.int64)
        self.ext_state = np.ones((n_seg, 2, 2))
        e = 0
        for k, sid in enumerate(self.seg_ids):
            seg = net.segments[sid]
            ne = seg.cells
            h = seg.length / ne
            self.seg_e0[k], self.seg_ne[k] = e, ne
            self.seg_sqrtA0[k] = math.sqrt(seg.A0)
            self.seg_p0[k] = seg.p0
            self.seg_beta_L[k] = seg.beta(0.0)
            self.seg_beta_R[k] = seg.beta(seg.length)
            for j in range(ne):
                xl = j * h
                self.el_h[e] = h
                self.el_seg[e] = k
                self.el_x_nodes[e] = xl + 0.5 * (ref.nodes + 1.0) * h
                self.el_x_q[e] = xl + 0.5 * (ref.xq + 1.0) * h
                self.el_beta_q[e] = seg.beta(self.el_x_q[e])
                self.el_beta_nodes[e] = seg.beta(self.el_x_nodes[e])
                self.el_beta_R[e] = seg.beta((j + 1) * h) if j < ne - 1 else self.seg_beta_R[k]
                e += 1
        # connectivity
        self.seg_left[self.seg_index[net.inlet]] = K.LEFT_FLOW
        bif = []
        for b, (p, d1, d2) in enumerate(net.bifurcations):
            ip, i1, i2 = self.seg_index[p], self.seg_index[d1], self.seg_index[d2]
            bif.append((ip, i1, i2))
            self.seg_right[ip] = K.RIGHT_PARENT
            self.seg_right_idx[ip] = b
            self.seg_left[i1] = K.LEFT_DAUGHTER
            self.seg_left[i2] = K.LEFT_DAUGHTER
        self.bif_seg = np.array(bif, dtype=np.int64).reshape(-1, 3)
        outlet_override = outlet_override or {}
        self.term_par = np.zeros((len(self.term_ids), 4))
        kinds = {"windkessel": K.RIGHT_WINDKESSEL, "absorbing": K.RIGHT_ABSORBING,
                 "closed": K.RIGHT_CLOSED, "exterior": K.RIGHT_EXTERIOR}
        for t, sid in enumerate(self.term_ids):
            out = net.terminals[sid]
            kind = outlet_override.get(sid, out.kind)
            k = self.seg_index[sid]
            self.seg_right[k] = kinds[kind]
            self.seg_right_idx[k] = t
            if kind == "windkessel":
                self.term_par[t] = (out.R1, out.R2, out.C, out.pv)
            else:
                self.term_par[t] = (0.0, 1.0, 0.0, out.pv)
        for (sid, side), (Aext, uext) in (exterior or {}).items():
            k = self.seg_index[sid]
            if side == 0:
                self.seg_left[k] = K.LEFT_EXTERIOR
            else:
                self.seg_right[k] = K.RIGHT_EXTERIOR
            self.ext_state[k, side] = (Aext, uext)
        self.rho = rho
        self.Kfric = net.fluid.friction_coefficient
        self.sqrtA0_nodes = self.seg_sqrtA0[self.el_seg][:, None] * np.ones(m)

    # -- helpers -------------------------------------------------------------
    def segment_slice(self, sid: int) -> slice:
        k = self.seg_index[sid]
        return slice(self.seg_e0[k], self.seg_e0[k] + self.seg_ne[k])

    def c0_nodes(self) -> np.ndarray:
        return np.sqrt(self.el_beta_nodes * self.sqrtA0_nodes / (2.0 * self.rho))

    def pressure(self, A) -> np.ndarray:
        p0 = self.seg_p0[self.el_seg][:, None]
        return p0 + self.el_beta_nodes * (np.sqrt(A) - self.sqrtA0_nodes)

    def volume(self, A) -> float:
        """Exact integral of the nodal area polynomial over the network."""
        return float(np.sum(0.5 * self.el_h[:, None] * self.ref.node_weights[None, :] * A))

    def locate(self, sid: int, x: float):
        """Element index and interpolation row for local abscissa x."""
        k = self.seg_index[sid]
        seg = self.net.segments[sid]
        ne = int(self.seg_ne[k])
        h = seg.length / ne
        j = min(int(x / h), ne - 1)
        xi = 2.0 * (x - j * h) / h - 1.0
        return int(self.seg_e0[k] + j), self.ref.interpolation_row(xi)

    def stations(self, record_ends: bool = False, extra=()) -> list[Station]:
        out = []
        for sid in self.seg_ids:
            seg = self.net.segments[sid]
            pts = [("mid", 0.5 * seg.length)]
            if record_ends:
                pts = [("start", 0.0)] + pts + [("end", seg.length)]
            for label, x in pts:
                out.append(Station(sid, x, label, float(seg.beta(x)), math.sqrt(seg.A0), seg.p0))
        for sid, x, label in extra:
            seg = self.net.segments[sid]
            out.append(Station(sid, x, label, float(seg.beta(x)), math.sqrt(seg.A0), seg.p0))
        return out


def initialize(mesh: Mesh, Qbar: float, mode: str = "windkessel") -> FieldState:
    """Initial state.

    ``"windkessel"``: A = ((p_w - p0)/beta(x) + sqrt(A0))^2 with p_w = R_T Qbar + p_v,
    u = 0 and every capacitor pressure at p_w.  ``"rest"``: A = A0, u = 0,
    capacitor pressures at p_v.
    """
    net = mesh.net
    nt = len(mesh.term_ids)
    pv = np.array([net.terminals[s].pv for s in mesh.term_ids]) if nt else np.zeros(0)
    u = np.zeros((mesh.n_el, mesh.m))
    if mode == "rest":
        A = mesh.sqrtA0_nodes**2
        return FieldState(A.copy(), u, pv.copy())
    if mode != "windkessel":
        raise ValueError(f"unknown initialization {mode!r}")
    wk = [s for s in mesh.term_ids if net.terminals[s].kind == "windkessel"]
    pv_ref = net.terminals[wk[0]].pv if wk else 0.0
    pw = net.total_resistance() * Qbar + pv_ref if Qbar != 0 else pv_ref
    p0 = mesh.seg_p0[mesh.el_seg][:, None]
    A = ((pw - p0) / mesh.el_beta_nodes + mesh.sqrtA0_nodes) ** 2
    pC = np.full(nt, pw)
    for t, s in enumerate(mesh.term_ids):
        if net.terminals[s].kind != "windkessel":
            pC[t] = pv[t]
    return FieldState(A, u, pC)


def periodicity_error(p_prev: np.ndarray, p_curr: np.ndarray) -> float:
    """max over stations of ||p_k - p_{k-1}||_2 / ||p_k||_2 over the cycle samples."""
    num = np.linalg.norm(p_curr - p_prev, axis=0)
    den = np.linalg.norm(p_curr, axis=0)
    ratio = np.where(den > 0, num / np.where(den > 0, den, 1.0), np.where(num > 0, np.inf, 0.0))
    return float(np.max(ratio))


class Simulation:
    """One network + inflow + solver configuration.

    Parameters
    ----------
    net : NetworkTopology
    inflow : callable
        Flow rate Q(t) (vectorized) with a ``period`` attribute and ``mean``.
    cfg : SolverConfig
    outlet_override : dict, optional
        Replace terminal outlet kinds, e.g. ``{3: "absorbing"}``.
    exterior : dict, optional
        ``{(segment, side): (A, u)}`` exterior states for characteristic
        boundary conditions (side 0 = start, 1 = end).
    forcing : callable, optional
        ``forcing(sid, x) -> (gA, gu)`` steady source added to the equations.
    stations : iterable of (segment, x, label), optional
        Extra recording points.
    """

    def __init__(self, net, inflow, cfg: SolverConfig | None = None, outlet_override=None,
                 exterior=None, forcing=None, stations=()):
        self.net = net
        self.inflow = inflow
        self.cfg = cfg or SolverConfig()
        self.mesh = Mesh(net, outlet_override, exterior)
        mesh = self.mesh
        self.forcing = np.zeros((mesh.n_el, len(mesh.ref.xq), 2))
        self.use_forcing = forcing is not None
        if forcing is not None:
            for sid in mesh.seg_ids:
                sl = mesh.segment_slice(sid)
                gA, gu = forcing(sid, mesh.el_x_q[sl])
                self.forcing[sl, :, 0] = gA
                self.forcing[sl, :, 1] = gu
        self.stations = mesh.stations(self.cfg.record_ends, stations)
        self._st_el = np.empty(len(self.stations), dtype=np.int64)
        self._st_phi = np.empty((len(self.stations), mesh.m))
        for j, s in enumerate(self.stations):
            self._st_el[j], self._st_phi[j] = mesh.locate(s.segment, s.x)
        self.bif_x = np.zeros((len(mesh.bif_seg), 6))

    # -- configuration -------------------------------------------------------
    def speed_ratio(self, state: FieldState) -> float:
        """max over elements of (|u| + c) / h."""
        m = self.mesh
        c = np.sqrt(m.el_beta_nodes * np.sqrt(state.A) / (2.0 * m.rho))
        return float(np.max((np.abs(state.u) + c).max(axis=1) / m.el_h))

    def time_grid(self, state: FieldState):
        """(dt, samples per cycle, steps per sample)."""
        T = float(self.inflow.period)
        m = self.mesh
        dt_max = self.cfg.cfl / ((m.p + 1) ** 2 * self.speed_ratio(state))
        if self.cfg.dt is not None:
            if self.cfg.dt > dt_max * (1 + 1e-12):
                raise SimulationError(f"dt = {self.cfg.dt:.3e} violates the CFL bound {dt_max:.3e}")
            dt_max = self.cfg.dt
        S = max(1, math.ceil(T * self.cfg.sample_rate - 1e-9))
        k = max(1, math.ceil(T / (S * dt_max) - 1e-9))
        return T / (S * k), S, k

    def initial_state(self) -> FieldState:
        return initialize(self.mesh, float(getattr(self.inflow, "mean", 0.0)), self.cfg.init)

    def _prime(self, state: FieldState):
        if state.rA is None:
            state.rA = np.zeros_like(state.A)
            state.ru = np.zeros_like(state.u)
            state.rpC = np.zeros_like(state.pC)
        if not np.any(self.bif_x):
            self._warm_start(state)

    def _warm_start(self, state: FieldState):
        m = self.mesh
        for b, (ip, i1, i2) in enumerate(m.bif_seg):
            ep = m.seg_e0[ip] + m.seg_ne[ip] - 1
            e1, e2 = m.seg_e0[i1], m.seg_e0[i2]
            self.bif_x[b] = (state.u[ep, -1], state.u[e1, 0], state.u[e2, 0],
                             state.A[ep, -1], state.A[e1, 0], state.A[e2, 0])

    def _kernel_args(self):
        m = self.mesh
        ref = m.ref
        return (
            m.el_h, m.el_beta_q, m.el_beta_R, m.seg_e0, m.seg_ne, m.seg_sqrtA0, m.seg_p0,
            m.seg_left, m.seg_left_idx, m.seg_right, m.seg_right_idx, m.seg_beta_L, m.seg_beta_R,
            m.bif_seg, self.bif_x, m.term_par, m.ext_state,
            ref.Bq, ref.Kvol, ref.Ksrc, ref.lift_L, ref.lift_R, m.rho, m.Kfric,
            self.forcing, self.use_forcing, self.cfg.newton_tol, self.cfg.newton_maxit,
        )

    # -- evaluation ----------------------------------------------------------
    def rhs(self, state: FieldState, t: float | None = None):
        """Time derivatives (dA, du, dpC) of a state; raises on failure."""
        self._prime(state)
        m = self.mesh
        dA, du = np.empty_like(state.A), np.empty_like(state.u)
        dpC = np.empty_like(state.pC)
        diag = np.zeros(2)
        Q = float(self.inflow(state.t if t is None else t))
        st = K.rhs(state.A, state.u, state.pC, Q, *self._kernel_args(),
                   dA, du, dpC, np.zeros((m.n_el, 2)), np.zeros((len(m.seg_ids), 2, 2)),
                   np.zeros(len(m.term_ids)), diag)
        if st != K.OK:
            raise SimulationError(K.STATUS_TEXT[st], st, state.t)
        return dA, du, dpC

    def advance(self, state: FieldState, n_steps: int, dt: float, rec_every: int, acc: np.ndarray):
        """Advance in place; returns recorded (A, u, pC) station arrays."""
        self._prime(state)
        n_rec = n_steps // rec_every + 1
        rec_A = np.empty((n_rec, len(self.stations)))
        rec_u = np.empty_like(rec_A)
        rec_pC = np.empty((n_rec, len(state.pC)))
        Qin = np.asarray(self.inflow(state.t + dt * np.arange(n_steps)), dtype=float)
        st, k = K.advance(
            state.A, state.u, state.pC, n_steps, dt, Qin, state.ab2,
            state.rA, state.ru, state.rpC, state.rq,
            *self._kernel_args(), rec_every, self._st_el, self._st_phi, rec_A, rec_u, rec_pC, acc,
        )
        if st != K.OK:
            raise SimulationError(f"{K.STATUS_TEXT[st]} at t = {state.t + k * dt:.6g} s", st, state.t + k * dt)
        state.t += n_steps * dt
        state.dt = dt
        return rec_A, rec_u, rec_pC

    def run(self, state: FieldState | None = None) -> WaveformRecord:
        """Integrate ``n_cycles`` periods (or until periodic) and record the last one."""
        cfg = self.cfg
        state = self.initial_state() if state is None else state
        dt, S, k = self.time_grid(state)
        cfl0 = dt * (self.mesh.p + 1) ** 2 * self.speed_ratio(state)
        acc = np.zeros(4)
        wall = time.perf_counter()
        history, cycles = [], []
        vol0 = self.mesh.volume(state.A)
        p_prev = None
        beta = np.array([s.beta for s in self.stations])
        sA0 = np.array([s.sqrtA0 for s in self.stations])
        p0s = np.array([s.p0 for s in self.stations])
        cycle_audit = []
        n_done = 0
        for c in range(cfg.n_cycles):
            v_start, acc_in, acc_out = self.mesh.volume(state.A), acc[0], acc[1]
            rec_A, rec_u, rec_pC = self.advance(state, S * k, dt, k, acc)
            n_done += 1
            v_in, v_out = acc[0] - acc_in, acc[1] - acc_out
            dvol = self.mesh.volume(state.A) - v_start
            cycle_audit.append({"inlet": v_in, "outlet": v_out, "storage": dvol})
            p = p0s + beta * (np.sqrt(rec_A) - sA0)
            if p_prev is not None:
                history.append(periodicity_error(p_prev, p))
            p_prev = p
            if cfg.keep_cycles:
                cycles.append((rec_A.copy(), rec_u.copy()))
            if cfg.cfl_limit is not None and dt * (self.mesh.p + 1) ** 2 * acc[3] > cfg.cfl_limit:
                raise SimulationError("CFL limit exceeded during the run", None, state.t)
            if cfg.stop_when_periodic and history and history[-1] < cfg.periodicity_tol:
                break
        t = dt * k * np.arange(S + 1)
        last = cycle_audit[-1]
        balance = last["inlet"] - last["outlet"] - last["storage"]
        meta = {
            "dt": dt,
            "samples_per_cycle": S,
            "steps_per_sample": k,
            "cycles": n_done,
            "period": float(self.inflow.period),
            "cfl_initial": cfl0,
            "cfl_max": dt * (self.mesh.p + 1) ** 2 * acc[3],
            "periodicity": history,
            "periodicity_final": history[-1] if history else None,
            "bifurcation_defect_max": acc[2],
            "volume_in_total": acc[0],
            "volume_out_total": acc[1],
            "volume_change_total": self.mesh.volume(state.A) - vol0,
            "cycle_volume_balance": balance,
            "cycle_volume_balance_rel": balance / last["inlet"] if last["inlet"] else 0.0,
            "cycle_audit": cycle_audit,
            "wall_clock_s": time.perf_counter() - wall,
            "init": cfg.init,
        }
        rec = WaveformRecord(t=t, stations=self.stations, A=rec_A, u=rec_u, rho=self.mesh.rho,
                             pC=rec_pC, meta=meta)
        if cfg.keep_cycles:
            rec.cycles = cycles
        self.final_state = state
        return rec


def run(net, inflow, cfg: SolverConfig | None = None, **kw) -> WaveformRecord:
    """Convenience wrapper: build a :class:`Simulation` and run it."""
    return Simulation(net, inflow, cfg, **kw).run()
