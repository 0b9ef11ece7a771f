"""Arterial tree data model, wall laws and network-file ingestion.

Network files are JSON documents with SI units::

    {
      "fluid": {"rho": 1060, "mu": 0.004, "alpha": 1.1},
      "segments": [
        {"id": 1, "name": "Ascending aorta", "length_m": 0.04, "A0_m2": 7.3e-4,
         "stiffness": {"kind": "c0", "values": 5.0},
         "p0_Pa": 0.0, "cells": 1, "poly_order": 3}, ...],
      "bifurcations": [[1, 2, 3], ...],
      "inlet": 1,
      "terminals": {"6": {"R1": 1e9, "R2": 5e9, "C": 1e-10, "pv": 0.0}, ...},
      "aorta_path": [1, 2, 14, ...],
      "groups": {"aorta": [...], ...}          (optional)
    }

Stiffness ``values`` is either a scalar or a list of ``[x, value]`` pairs
(local abscissa in metres) interpolated linearly.  For ``kind == "Eh"`` the
values are ``{"E": scalar-or-pairs, "h0": scalar}``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

POISSON = 0.5


class NetworkError(ValueError):
    """Invalid network description."""


class NetworkParseError(NetworkError):
    pass


class NetworkValidationError(NetworkError):
    pass


# --- wall laws --------------------------------------------------------------


def _positive(name, *values):
    for v in values:
        if np.any(np.asarray(v) <= 0) or not np.all(np.isfinite(v)):
            raise ValueError(f"{name} must be positive and finite")


def beta_from_c0(c0, A0, rho):
    """beta = 2 rho c0^2 / sqrt(A0)."""
    _positive("c0, A0 and rho", c0, A0, rho)
    return 2.0 * rho * np.asarray(c0, dtype=float) ** 2 / np.sqrt(A0)


def c0_from_beta(beta, A0, rho):
    _positive("beta, A0 and rho", beta, A0, rho)
    return np.sqrt(np.asarray(beta, dtype=float) * np.sqrt(A0) / (2.0 * rho))


def beta_from_Eh(E, h0, A0, nu=POISSON):
    """beta = sqrt(pi) h0 E / ((1 - nu^2) A0)."""
    _positive("E, h0 and A0", E, h0, A0)
    return math.sqrt(math.pi) * h0 * np.asarray(E, dtype=float) / ((1.0 - nu**2) * A0)


def E_from_beta(beta, h0, A0, nu=POISSON):
    _positive("beta, h0 and A0", beta, h0, A0)
    return np.asarray(beta, dtype=float) * (1.0 - nu**2) * A0 / (math.sqrt(math.pi) * h0)


# --- data model -------------------------------------------------------------


@dataclass(frozen=True)
class Fluid:
    rho: float = 1060.0
    mu: float = 4.0e-3
    alpha: float = 1.1

    @property
    def zeta(self) -> float:
        """Velocity-profile exponent (2 - alpha) / (alpha - 1)."""
        return (2.0 - self.alpha) / (self.alpha - 1.0)

    @property
    def friction_coefficient(self) -> float:
        """K such that the friction force per unit length is f = -K u."""
        return 2.0 * math.pi * self.mu * self.alpha / (self.alpha - 1.0)


@dataclass(frozen=True)
class ArterySegment:
    """One vessel; stiffness stored as a piecewise-linear beta(x) profile."""

    id: int
    name: str
    length: float
    A0: float
    beta_x: np.ndarray  # local abscissae of the samples, first 0, last = length
    beta_values: np.ndarray
    p0: float = 0.0
    cells: int = 1
    poly_order: int = 3
    h0: float | None = None

    def beta(self, x) -> np.ndarray:
        """Stiffness at local abscissa(e) ``x`` in [0, length]."""
        return np.interp(x, self.beta_x, self.beta_values)

    def c0(self, x, rho: float) -> np.ndarray:
        return c0_from_beta(self.beta(x), self.A0, rho)

    @property
    def beta_mean(self) -> float:
        if len(self.beta_x) == 1:
            return float(self.beta_values[0])
        return float(np.trapz(self.beta_values, self.beta_x) / self.length)

    def friction_resistance(self, fluid: Fluid) -> float:
        """Poiseuille-type resistance 2 (zeta + 2) pi mu l / A0^2."""
        return 2.0 * (fluid.zeta + 2.0) * math.pi * fluid.mu * self.length / self.A0**2

    def with_c0_profile(self, x, c0, rho) -> "ArterySegment":
        x = np.asarray(x, dtype=float)
        return replace(
            self, beta_x=x.copy(), beta_values=beta_from_c0(np.asarray(c0, float), self.A0, rho)
        )


OUTLET_KINDS = ("windkessel", "absorbing", "closed")


@dataclass(frozen=True)
class WindkesselOutlet:
    """Three-element R1-C-R2 terminal. ``kind`` allows ideal outlets for tests."""

    R1: float = 0.0
    R2: float = 0.0
    C: float = 0.0
    pv: float = 0.0
    kind: str = "windkessel"

    @property
    def resistance(self) -> float:
        return self.R1 + self.R2


@dataclass(frozen=True)
class NetworkTopology:
    segments: dict  # id -> ArterySegment, insertion-ordered
    bifurcations: list  # (parent, d1, d2)
    inlet: int
    terminals: dict  # id -> WindkesselOutlet
    fluid: Fluid = field(default_factory=Fluid)
    aorta_path: list = field(default_factory=list)
    groups: dict = field(default_factory=dict)
    name: str = ""
    reference_station: int | None = None
    metadata: dict = field(default_factory=dict)

    # -- structure --------------------------------------------------------
    def segment(self, sid: int) -> ArterySegment:
        return self.segments[sid]

    @property
    def ids(self) -> list[int]:
        return list(self.segments)

    def children(self, sid: int) -> tuple[int, int] | None:
        for p, d1, d2 in self.bifurcations:
            if p == sid:
                return d1, d2
        return None

    def parent(self, sid: int) -> int | None:
        for p, d1, d2 in self.bifurcations:
            if sid in (d1, d2):
                return p
        return None

    def path_to(self, sid: int) -> list[int]:
        """Segment ids from the inlet down to ``sid`` (inclusive)."""
        path = [sid]
        while path[-1] != self.inlet:
            par = self.parent(path[-1])
            if par is None:
                raise NetworkValidationError(f"segment {sid} is not connected to the inlet")
            path.append(par)
        return path[::-1]

    def generation(self, sid: int) -> int:
        """Number of bifurcations traversed from the aortic root to ``sid``."""
        return len(self.path_to(sid)) - 1

    def distance_to_midpoint(self, sid: int) -> float:
        """Path length from the inlet to the midpoint of ``sid``."""
        path = self.path_to(sid)
        return sum(self.segments[k].length for k in path[:-1]) + 0.5 * self.segments[sid].length

    def aorta_offsets(self) -> dict[int, float]:
        """Arclength of the start of each aortic segment along ``aorta_path``."""
        out, s = {}, 0.0
        for sid in self.aorta_path:
            out[sid] = s
            s += self.segments[sid].length
        return out

    @property
    def aorta_length(self) -> float:
        return sum(self.segments[k].length for k in self.aorta_path)

    def with_segments(self, updated: dict) -> "NetworkTopology":
        segs = dict(self.segments)
        segs.update(updated)
        return replace(self, segments=segs)

    def with_resolution(self, cells_per_meter: float | None = None, poly_order: int | None = None):
        segs = {}
        for sid, s in self.segments.items():
            kw = {}
            if cells_per_meter is not None:
                kw["cells"] = max(1, int(round(cells_per_meter * s.length)))
            if poly_order is not None:
                kw["poly_order"] = poly_order
            segs[sid] = replace(s, **kw)
        return replace(self, segments=segs)

    # -- lumped resistance -----------------------------------------------
    def branch_resistance(self, sid: int) -> float:
        seg = self.segments[sid]
        rf = seg.friction_resistance(self.fluid)
        kids = self.children(sid)
        if kids is None:
            out = self.terminals[sid]
            if out.kind != "windkessel":
                raise NetworkError(f"terminal {sid} ({out.kind}) has no finite DC resistance")
            return rf + out.resistance
        r1, r2 = (self.branch_resistance(k) for k in kids)
        return rf + r1 * r2 / (r1 + r2)

    def total_resistance(self) -> float:
        """Series/parallel reduction of friction and terminal resistances."""
        return self.branch_resistance(self.inlet)

    def validate(self) -> None:
        validate(self)


# --- validation -------------------------------------------------------------


def validate(net: NetworkTopology) -> None:
    fl = net.fluid
    if not (fl.rho > 0 and fl.mu >= 0):
        raise NetworkValidationError("fluid: rho > 0 and mu >= 0 required")
    if fl.alpha == 1.0:
        raise NetworkValidationError("fluid: alpha != 1 required (friction factor alpha/(alpha-1))")
    for sid, s in net.segments.items():
        if not s.length > 0:
            raise NetworkValidationError(f"segment {sid}: l > 0 violated (l = {s.length})")
        if not s.A0 > 0:
            raise NetworkValidationError(f"segment {sid}: A0 > 0 violated (A0 = {s.A0})")
        if not np.all(s.beta_values > 0) or not np.all(np.isfinite(s.beta_values)):
            raise NetworkValidationError(f"segment {sid}: beta(x) > 0 violated")
        if s.cells < 1 or s.poly_order < 1:
            raise NetworkValidationError(f"segment {sid}: cells >= 1 and poly_order >= 1 required")
    if net.inlet not in net.segments:
        raise NetworkValidationError(f"inlet {net.inlet} is not a segment")
    seen_parent, seen_child = set(), set()
    for p, d1, d2 in net.bifurcations:
        for k in (p, d1, d2):
            if k not in net.segments:
                raise NetworkValidationError(f"bifurcation ({p}, {d1}, {d2}) references unknown segment {k}")
        if len({p, d1, d2}) != 3:
            raise NetworkValidationError(f"bifurcation ({p}, {d1}, {d2}) repeats a segment")
        if p in seen_parent:
            raise NetworkValidationError(f"segment {p} is the parent of more than one bifurcation")
        for d in (d1, d2):
            if d in seen_child:
                raise NetworkValidationError(f"segment {d} has more than one parent")
            if d == net.inlet:
                raise NetworkValidationError(f"inlet segment {d} cannot be a daughter")
            seen_child.add(d)
        seen_parent.add(p)
    for sid in net.segments:
        if sid in seen_parent and sid in net.terminals:
            raise NetworkValidationError(f"segment {sid} is both a bifurcation parent and a terminal")
        if sid not in seen_parent and sid not in net.terminals:
            raise NetworkValidationError(f"segment {sid}: unterminated leaf (no bifurcation, no outlet)")
        if sid != net.inlet and sid not in seen_child:
            raise NetworkValidationError(f"segment {sid}: orphan segment (no parent)")
    for sid in net.terminals:
        if sid not in net.segments:
            raise NetworkValidationError(f"terminal {sid} is not a segment")
    # reachability from the inlet rules out cycles once every segment has one parent
    reached, stack = set(), [net.inlet]
    while stack:
        k = stack.pop()
        if k in reached:
            raise NetworkValidationError(f"cycle detected through segment {k}")
        reached.add(k)
        kids = net.children(k)
        if kids:
            stack.extend(kids)
    missing = set(net.segments) - reached
    if missing:
        raise NetworkValidationError(f"segments not reachable from the inlet (cycle?): {sorted(missing)}")
    for sid, t in net.terminals.items():
        if t.kind not in OUTLET_KINDS:
            raise NetworkValidationError(f"terminal {sid}: unknown outlet kind {t.kind!r}")
        if t.kind == "windkessel" and not (t.R1 > 0 and t.R2 > 0 and t.C > 0):
            raise NetworkValidationError(f"terminal {sid}: R1, R2, C > 0 violated")
    for sid in net.aorta_path:
        if sid not in net.segments:
            raise NetworkValidationError(f"aorta_path references unknown segment {sid}")
    for a, b in zip(net.aorta_path[:-1], net.aorta_path[1:]):
        if b not in (net.children(a) or ()):
            raise NetworkValidationError(f"aorta_path: {b} is not a daughter of {a}")
    if net.reference_station is not None and net.reference_station not in net.segments:
        raise NetworkValidationError(f"reference_station {net.reference_station} is not a segment")
    for g, members in net.groups.items():
        for sid in members:
            if sid not in net.segments:
                raise NetworkValidationError(f"group {g!r} references unknown segment {sid}")


# --- ingestion --------------------------------------------------------------


def _profile(values, length):
    if isinstance(values, (int, float)):
        return np.array([0.0, length]), np.array([float(values)] * 2)
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or len(arr) < 1:
        raise NetworkParseError("profile must be a scalar or a list of [x, value] pairs")
    order = np.argsort(arr[:, 0], kind="stable")
    return arr[order, 0], arr[order, 1]


def _segment_from_dict(d: dict, fluid: Fluid) -> ArterySegment:
    sid = int(d["id"])
    length = float(d["length_m"])
    A0 = float(d["A0_m2"])
    if not length > 0:
        raise NetworkValidationError(f"segment {sid}: l > 0 violated (l = {length})")
    if not A0 > 0:
        raise NetworkValidationError(f"segment {sid}: A0 > 0 violated (A0 = {A0})")
    st = d["stiffness"]
    kind = st["kind"]
    h0 = None
    try:
        if kind == "beta":
            x, v = _profile(st["values"], length)
            beta = v
        elif kind == "c0":
            x, v = _profile(st["values"], length)
            beta = beta_from_c0(v, A0, fluid.rho)
        elif kind == "Eh":
            vals = st["values"]
            h0 = float(vals["h0"])
            x, E = _profile(vals["E"], length)
            beta = beta_from_Eh(E, h0, A0)
        else:
            raise NetworkParseError(f"segment {sid}: unknown stiffness kind {kind!r}")
    except ValueError as exc:
        if isinstance(exc, NetworkError):
            raise
        raise NetworkValidationError(f"segment {sid}: beta(x) > 0 violated ({exc})") from exc
    return ArterySegment(
        id=sid,
        name=str(d.get("name", f"segment {sid}")),
        length=length,
        A0=A0,
        beta_x=x,
        beta_values=np.asarray(beta, dtype=float),
        p0=float(d.get("p0_Pa", 0.0)),
        cells=int(d.get("cells", 1)),
        poly_order=int(d.get("poly_order", 3)),
        h0=h0,
    )


_CORE_KEYS = {
    "name", "fluid", "segments", "bifurcations", "inlet", "terminals",
    "aorta_path", "groups", "reference_station",
}


def network_from_dict(doc: dict, name: str = "") -> NetworkTopology:
    try:
        fd = doc.get("fluid", {})
        fluid = Fluid(float(fd.get("rho", 1060.0)), float(fd.get("mu", 4e-3)), float(fd.get("alpha", 1.1)))
        segs = {}
        for d in doc["segments"]:
            s = _segment_from_dict(d, fluid)
            if s.id in segs:
                raise NetworkValidationError(f"duplicate segment id {s.id}")
            segs[s.id] = s
        bifs = [tuple(int(v) for v in b) for b in doc.get("bifurcations", [])]
        if any(len(b) != 3 for b in bifs):
            raise NetworkParseError("bifurcations must be [parent, d1, d2] triples")
        terms = {}
        for k, t in doc.get("terminals", {}).items():
            sid = int(k)
            kind = t.get("kind", "windkessel")
            if kind == "windkessel":
                R1 = t.get("R1")
                if R1 is None and sid in segs:
                    s = segs[sid]
                    R1 = fluid.rho * float(s.c0(s.length, fluid.rho)) / s.A0
                terms[sid] = WindkesselOutlet(float(R1), float(t["R2"]), float(t["C"]), float(t.get("pv", 0.0)))
            else:
                terms[sid] = WindkesselOutlet(kind=kind, pv=float(t.get("pv", 0.0)))
        net = NetworkTopology(
            segments=segs,
            bifurcations=bifs,
            inlet=int(doc["inlet"]),
            terminals=terms,
            fluid=fluid,
            aorta_path=[int(v) for v in doc.get("aorta_path", [])],
            groups={k: [int(v) for v in vals] for k, vals in doc.get("groups", {}).items()},
            name=name or str(doc.get("name", "")),
            reference_station=(int(doc["reference_station"]) if doc.get("reference_station") is not None else None),
            metadata={k: v for k, v in doc.items() if k not in _CORE_KEYS},
        )
    except (KeyError, TypeError) as exc:
        raise NetworkParseError(f"malformed network document: {exc!r}") from exc
    validate(net)
    return net


def load_network(path) -> NetworkTopology:
    """Read and validate a JSON network file."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise NetworkParseError(f"{path}: {exc}") from exc
    return network_from_dict(doc, name=path.stem)


def network_to_dict(net: NetworkTopology) -> dict:
    segs = []
    for s in net.segments.values():
        if len(s.beta_x) == 2 and s.beta_values[0] == s.beta_values[1]:
            vals = float(s.beta_values[0])
        else:
            vals = [[float(x), float(v)] for x, v in zip(s.beta_x, s.beta_values)]
        segs.append(
            {
                "id": s.id,
                "name": s.name,
                "length_m": s.length,
                "A0_m2": s.A0,
                "stiffness": {"kind": "beta", "values": vals},
                "p0_Pa": s.p0,
                "cells": s.cells,
                "poly_order": s.poly_order,
            }
        )
    terms = {}
    for sid, t in net.terminals.items():
        if t.kind == "windkessel":
            terms[str(sid)] = {"R1": t.R1, "R2": t.R2, "C": t.C, "pv": t.pv}
        else:
            terms[str(sid)] = {"kind": t.kind, "pv": t.pv}
    return {
        "name": net.name,
        "fluid": {"rho": net.fluid.rho, "mu": net.fluid.mu, "alpha": net.fluid.alpha},
        "segments": segs,
        "bifurcations": [list(b) for b in net.bifurcations],
        "inlet": net.inlet,
        "terminals": terms,
        "aorta_path": list(net.aorta_path),
        "groups": {k: list(v) for k, v in net.groups.items()},
        "reference_station": net.reference_station,
        **net.metadata,
    }


def sample_network_path(name: str = "sample_55") -> Path:
    """Path of a network file shipped with the package."""
    from importlib import resources

    return Path(str(resources.files("arterial_uq.data").joinpath(f"{name}.json")))
