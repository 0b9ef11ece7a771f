"""Wave separation and pulse-wave quantities of interest.

Forward/backward separation integrates the characteristic increments

    dp_f = (dp + rho c(A) du) / 2,    dp_b = (dp - rho c(A) du) / 2

over one cycle, with c(A) evaluated on the instantaneous state (trapezoidal
average over each sampling interval).  Each component receives half the
cycle-mean pressure as integration constant, so p_f + p_b = p.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .network import NetworkTopology


PRESSURE_FLOOR = 1e-6  # Pa; amplitudes below this are round-off (rest state)


class WaveAnalysisError(ValueError):
    pass


class NonPeriodicError(WaveAnalysisError):
    """Input signal does not close over the cycle."""


def _check_periodic(name, x, tol, atol):
    scale = np.max(np.abs(x))
    if abs(x[-1] - x[0]) > tol * scale + atol:
        raise NonPeriodicError(
            f"{name} is not periodic: end-point mismatch {abs(x[-1] - x[0]):.3e} "
            f"exceeds {tol:g} x {scale:.3e}"
        )


def cycle_mean(x) -> float:
    """Mean over one periodic cycle sampled with both end points (trapezoid rule)."""
    x = np.asarray(x, dtype=float)
    if len(x) < 2:
        return float(x[0])
    return float(0.5 * np.sum(x[1:] + x[:-1]) / (len(x) - 1))


def separate_waves(p, u, A, beta, A0, rho, periodic_tol: float = 5e-3, check: bool = True):
    """Nonlinear forward/backward pressure separation over one cycle.

    Parameters
    ----------
    p, u, A : array_like, shape (n,)
        Synchronized samples of one cycle, first and last sample one period apart.
    beta, A0, rho : float
        Wall stiffness, reference area and density at the station.
    periodic_tol : float
        Allowed end-point mismatch relative to the signal magnitude.

    Returns
    -------
    p_f, p_b : ndarray
    """
    p = np.asarray(p, dtype=float)
    u = np.asarray(u, dtype=float)
    A = np.asarray(A, dtype=float)
    if not (p.shape == u.shape == A.shape) or p.ndim != 1 or len(p) < 3:
        raise WaveAnalysisError("p, u and A must be 1-D arrays of equal length >= 3")
    if np.any(A <= 0):
        raise WaveAnalysisError("non-positive area in record")
    if check:
        # absolute floors (Pa, m/s) keep round-off at rest from counting as a mismatch
        _check_periodic("pressure", p, periodic_tol, 1e-6)
        _check_periodic("velocity", u, periodic_tol, 1e-9)
    c = np.sqrt(beta * np.sqrt(A) / (2.0 * rho))
    cm = 0.5 * (c[1:] + c[:-1])
    dp, du = np.diff(p), np.diff(u)
    pf = np.concatenate(([0.0], np.cumsum(0.5 * (dp + rho * cm * du))))
    pb = np.concatenate(([0.0], np.cumsum(0.5 * (dp - rho * cm * du))))
    half = 0.5 * cycle_mean(p)
    # raw pf + pb = p - p[0], so shifting each to mean p/2 restores p exactly
    pf += half - cycle_mean(pf)
    pb += half - cycle_mean(pb)
    return pf, pb


def wave_amplitude(x, mode: str = "peak") -> float:
    """Amplitude of a separated component.

    ``"peak"``: maximum above the component's integration constant (its
    cycle mean).  ``"peak_to_peak"``: max - min.
    """
    x = np.asarray(x, dtype=float)
    if mode == "peak":
        return float(np.max(x) - cycle_mean(x))
    if mode == "peak_to_peak":
        return float(np.max(x) - np.min(x))
    raise ValueError(f"unknown amplitude mode {mode!r}")


def reflection_magnitude(pf, pb, mode: str = "peak") -> float:
    af = wave_amplitude(pf, mode)
    if af <= 0:
        raise WaveAnalysisError("forward wave has zero amplitude")
    return wave_amplitude(pb, mode) / af


@dataclass
class QoIRecord:
    """Per-station pulse quantities; arrays are aligned with ``stations``."""

    stations: list  # (segment, label)
    PP: np.ndarray
    AD: np.ndarray
    RM: np.ndarray
    P_f: np.ndarray
    P_b: np.ndarray
    AF: np.ndarray
    p_sys: np.ndarray
    p_dia: np.ndarray
    A_sys: np.ndarray
    A_dia: np.ndarray
    reference: tuple = ()
    meta: dict = field(default_factory=dict)

    QOI_NAMES = ("PP", "AD", "RM", "AF")

    def index(self, segment: int, label: str = "mid") -> int:
        return self.stations.index((segment, label))

    def value(self, name: str, segment: int, label: str = "mid") -> float:
        return float(getattr(self, name)[self.index(segment, label)])

    def as_array(self, names=QOI_NAMES) -> np.ndarray:
        """(n_stations, n_qoi) matrix of the named quantities."""
        return np.stack([getattr(self, n) for n in names], axis=1)

    def to_dict(self) -> dict:
        out = {"stations": [list(s) for s in self.stations], "reference": list(self.reference)}
        for n in ("PP", "AD", "RM", "P_f", "P_b", "AF", "p_sys", "p_dia", "A_sys", "A_dia"):
            out[n] = [float(v) for v in getattr(self, n)]
        return out

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["station", "PP_Pa", "AD", "RM", "AF"])
            for k, (sid, label) in enumerate(self.stations):
                w.writerow([f"{sid}:{label}"] + [repr(float(getattr(self, n)[k])) for n in self.QOI_NAMES])


def compute_qoi(record, net: NetworkTopology | None = None, reference: int | None = None,
                rm_mode: str = "peak", periodic_tol: float = 5e-3) -> QoIRecord:
    """Pulse pressure, distensibility, reflection magnitude and amplification.

    Parameters
    ----------
    record : WaveformRecord
        Final periodic cycle.
    net : NetworkTopology, optional
        Supplies the default reference segment (``net.reference_station``).
    reference : int, optional
        Segment whose midpoint is the AF reference; overrides ``net``.
    rm_mode : {"peak", "peak_to_peak"}
    """
    ref = reference if reference is not None else (net.reference_station if net is not None else None)
    keys = [(s.segment, s.label) for s in record.stations]
    if ref is None or (ref, "mid") not in keys:
        raise WaveAnalysisError(f"reference station {ref!r} is not in the record")
    p, A, u = record.p, record.A, record.u
    n = len(keys)
    out = {k: np.empty(n) for k in ("PP", "AD", "RM", "P_f", "P_b", "p_sys", "p_dia", "A_sys", "A_dia")}
    for j, st in enumerate(record.stations):
        out["p_sys"][j], out["p_dia"][j] = p[:, j].max(), p[:, j].min()
        out["A_sys"][j], out["A_dia"][j] = A[:, j].max(), A[:, j].min()
        pf, pb = separate_waves(p[:, j], u[:, j], A[:, j], st.beta, st.A0, record.rho, periodic_tol)
        out["P_f"][j] = wave_amplitude(pf, rm_mode)
        out["P_b"][j] = wave_amplitude(pb, rm_mode)
        out["RM"][j] = out["P_b"][j] / out["P_f"][j] if out["P_f"][j] > PRESSURE_FLOOR else 0.0
    out["PP"] = out["p_sys"] - out["p_dia"]
    out["AD"] = (out["A_sys"] - out["A_dia"]) / out["A_dia"]
    r = keys.index((ref, "mid"))
    with np.errstate(divide="ignore", invalid="ignore"):
        AF = np.where(out["PP"] > PRESSURE_FLOOR, out["PP"][r] / out["PP"], np.nan)
    AF[r] = 1.0
    return QoIRecord(stations=keys, AF=AF, reference=(ref, "mid"), meta={"rm_mode": rm_mode}, **out)


def group_statistics(segments, means, stds, groups: dict) -> dict:
    """Average station means and stds over each group of segments.

    Parameters
    ----------
    segments : sequence of int
        Segment id of each entry of ``means``/``stds`` (first axis).
    means, stds : array_like
        Per-station statistics; trailing axes are carried through.
    groups : dict
        Group name -> list of segment ids.

    Returns
    -------
    dict
        Group name -> {"mean": ..., "std": ..., "n": count}.
    """
    means = np.asarray(means, dtype=float)
    stds = np.asarray(stds, dtype=float)
    pos = {int(s): k for k, s in enumerate(segments)}
    out = {}
    for name, members in groups.items():
        if not members:
            raise WaveAnalysisError(f"group {name!r} is empty")
        missing = [m for m in members if int(m) not in pos]
        if missing:
            raise WaveAnalysisError(f"group {name!r}: no station for segments {missing}")
        rows = [pos[int(m)] for m in members]
        out[name] = {"mean": means[rows].mean(axis=0), "std": stds[rows].mean(axis=0), "n": len(rows)}
    return out


def bifurcation_distance(net: NetworkTopology, sid: int) -> float:
    """Number of bifurcations from the root times the path length to the segment midpoint."""
    return net.generation(sid) * net.distance_to_midpoint(sid)


def write_group_json(path, stats: dict) -> None:
    doc = {g: {k: (np.asarray(v).tolist() if k != "n" else v) for k, v in d.items()} for g, d in stats.items()}
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
