"""UQ campaigns: sparse-grid ensembles, surrogate assembly and report tables.

Layout of a campaign directory::

    manifest.json            configuration, parameter space, grid, node accounting
    nodes/<k>/params.json    standardized and physical coordinates of node k
    nodes/<k>/qoi.json       per-station QoIs (or the failure message)
    nodes/<k>/run.json       solver metadata incl. wall-clock (not compared)
    nodes/<k>/waveforms.csv  midpoint p and Q over the final cycle (optional)
    surrogates.json          PCE coefficients per station and QoI
    tables/*.csv             statistics, Sobol indices, correlations, plot data

Everything except ``run.json`` and ``timings.json`` is a deterministic
function of the configuration, whatever the number of workers.
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from dataclasses import field as dc_field
from importlib import resources
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .inflow import NOMINAL_INFLOW, InfeasibleInflowError, InflowParams, canonical_inflow, uniform_bounds
from .network import NetworkError, NetworkTopology, load_network, sample_network_path
from .random_field import (
    SQRT3,
    RandomFieldError,
    field_from_network,
    proximal_statistics,
    realize_network,
    realize_proximal,
)
from .solver import SimulationError, SolverConfig, Simulation
from .uq import PCESurrogate, build_grid, n_terms, project
from .uq.pce import from_unit
from .uq.sensitivity import ZeroVarianceError, conditional_mean, correlations, sobol_indices, total_indices
from .waves import QoIRecord, WaveAnalysisError, bifurcation_distance, compute_qoi, group_statistics

CASE_DIMS = {"reference": 3, "case1": 4, "case2": 6}
DEFAULT_LEVEL = {"reference": 5, "case1": 5, "case2": 4}
QOI_NAMES = ("PP", "AD", "RM", "AF")
WORKERS_ENV = "ARTERIAL_UQ_WORKERS"


class ConfigError(ValueError):
    """Invalid campaign or run configuration."""


class CampaignError(RuntimeError):
    """Node failures or an incomplete/corrupt campaign directory."""


def default_workers() -> int:
    v = os.environ.get(WORKERS_ENV)
    if v is None:
        return 1
    try:
        n = int(v)
    except ValueError as exc:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {v!r}") from exc
    if n < 1:
        raise ConfigError(f"{WORKERS_ENV} must be >= 1")
    return n


# --- configuration ------------------------------------------------------------


def _nominal_inflow():
    return {k: [m, s] for k, (m, s) in NOMINAL_INFLOW.items()}


@dataclass
class CampaignConfig:
    """Campaign settings.

    ``inflow`` maps T, Qbar, Qmax to ``[mean, std / mean]`` of independent
    uniform variables.  ``solver`` holds :class:`SolverConfig` overrides and
    ``resolution`` optional ``cells_per_meter``/``poly_order`` overrides of
    the network mesh.
    """

    case: str = "reference"
    network: str = "sample_55"
    inflow: dict = dc_field(default_factory=_nominal_inflow)
    shape_exponent: float = 13.0
    field: dict = dc_field(default_factory=lambda: {"Cl_over_L": 1.0 / 3.0, "n_modes": 3, "M": 64})
    level: int | None = None
    order: int = 3
    solver: dict = dc_field(default_factory=dict)
    resolution: dict = dc_field(default_factory=dict)
    seed: int = 0
    strict: bool = True
    save_waveforms: bool = True
    rm_mode: str = "peak"
    name: str = ""

    def __post_init__(self):
        if self.case not in CASE_DIMS:
            raise ConfigError(f"case must be one of {sorted(CASE_DIMS)}, got {self.case!r}")
        if self.level is None:
            self.level = DEFAULT_LEVEL[self.case]
        try:
            self.inflow, n = canonical_inflow(self.inflow)
        except ValueError as exc:
            raise ConfigError(f"inflow: {exc}") from exc
        if n is not None:
            self.shape_exponent = n
        if int(self.level) < 1 or int(self.order) < 0:
            raise ConfigError("level must be >= 1 and order >= 0")
        for k in ("T", "Qbar", "Qmax"):
            if k not in self.inflow:
                raise ConfigError(f"inflow: missing {k}")
            m, s = self.inflow[k]
            if not (m > 0 and s >= 0):
                raise ConfigError(f"inflow {k}: mean > 0 and relative std >= 0 required")
            if uniform_bounds(m, s)[0] <= 0:
                raise ConfigError(f"inflow {k}: support reaches non-positive values")
        if self.case == "case2" and int(self.field.get("n_modes", 3)) != 3:
            raise ConfigError("case2 uses N = 6, i.e. exactly 3 KL modes")
        if self.rm_mode not in ("peak", "peak_to_peak"):
            raise ConfigError(f"rm_mode must be 'peak' or 'peak_to_peak', got {self.rm_mode!r}")
        try:
            SolverConfig(**self.solver)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"solver: {exc}") from exc

    @property
    def dim(self) -> int:
        return CASE_DIMS[self.case]

    @classmethod
    def from_dict(cls, d: dict) -> "CampaignConfig":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown campaign keys: {sorted(extra)}")
        try:
            return cls(**d)
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        return asdict(self)


def bundled_config_path(name: str) -> Path:
    return Path(str(resources.files("arterial_uq.data").joinpath("configs", f"{name}.json")))


def load_config(path_or_name) -> CampaignConfig:
    """Campaign config from a JSON file or the name of a bundled config."""
    p = Path(path_or_name)
    if not p.exists():
        cand = bundled_config_path(str(path_or_name))
        if not cand.exists():
            raise ConfigError(f"config {path_or_name!r} not found")
        p = cand
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{p}: top level must be an object")
    return CampaignConfig.from_dict(doc)


def resolve_network(ref: str) -> NetworkTopology:
    p = Path(ref)
    if not p.exists():
        try:
            p = sample_network_path(ref)
        except FileNotFoundError:
            raise ConfigError(f"network {ref!r} not found") from None
        if not p.exists():
            raise ConfigError(f"network {ref!r} not found")
    try:
        return load_network(p)
    except NetworkError as exc:
        raise ConfigError(f"network {ref}: {exc}") from exc


# --- parameter space ------------------------------------------------------------


class ParameterSpace:
    """Bijective map between grid coordinates in [-1, 1]^N and model inputs."""

    def __init__(self, cfg: CampaignConfig, net: NetworkTopology):
        self.cfg = cfg
        self.names = ["T", "Qbar", "Qmax"]
        self.lower, self.upper = [], []
        for k in self.names:
            lo, hi = uniform_bounds(*cfg.inflow[k])
            self.lower.append(lo)
            self.upper.append(hi)
        self.field = None
        if cfg.case in ("case1", "case2"):
            f = cfg.field
            self.field = field_from_network(net, f.get("Cl_over_L", 1 / 3), int(f.get("n_modes", 3)),
                                            int(f.get("M", 64)))
        if cfg.case == "case1":
            m, s = proximal_statistics(net, self.field)
            self.names.append(f"c0_{net.aorta_path[0]}")
            self.lower.append(m - SQRT3 * s)
            self.upper.append(m + SQRT3 * s)
        elif cfg.case == "case2":
            for i in range(self.field.n_modes):
                self.names.append(f"xi_{i + 1}")
                self.lower.append(-SQRT3)
                self.upper.append(SQRT3)
        self.lower = np.array(self.lower)
        self.upper = np.array(self.upper)

    @property
    def dim(self) -> int:
        return len(self.names)

    def physical(self, xi) -> dict:
        x = from_unit(np.asarray(xi, dtype=float), self.lower, self.upper)
        return {n: float(v) for n, v in zip(self.names, x)}

    def network(self, base: NetworkTopology, params: dict) -> NetworkTopology:
        if self.cfg.case == "reference":
            return base
        if self.cfg.case == "case1":
            m, s = proximal_statistics(base, self.field)
            xi1 = (params[self.names[3]] - m) / s if s > 0 else 0.0
            return realize_proximal(base, self.field, xi1)
        return realize_network(base, self.field, np.array([params[n] for n in self.names[3:]]))

    def describe(self) -> dict:
        return {"names": self.names, "lower": self.lower.tolist(), "upper": self.upper.tolist()}


# --- single runs ------------------------------------------------------------------


def make_inflow(T: float, Qbar: float, Qmax: float, n: float = 13.0):
    from .inflow import ConstantInflow

    if Qbar == 0 and Qmax == 0:
        return ConstantInflow(0.0, T)
    return InflowParams.from_triplet(T, Qbar, Qmax, n)


def prepare_network(net: NetworkTopology, resolution: dict) -> NetworkTopology:
    if resolution:
        net = net.with_resolution(resolution.get("cells_per_meter"), resolution.get("poly_order"))
    return net


def simulate(net: NetworkTopology, params: dict, solver: dict, n: float = 13.0, rm_mode: str = "peak"):
    """Run one parameter set; returns (WaveformRecord, QoIRecord)."""
    inflow = make_inflow(params["T"], params["Qbar"], params["Qmax"], n)
    rec = Simulation(net, inflow, SolverConfig(**solver)).run()
    q = compute_qoi(rec, net, rm_mode=rm_mode)
    return rec, q


_NET_CACHE: dict = {}


def _base_network(cfg: CampaignConfig) -> NetworkTopology:
    key = (cfg.network, json.dumps(cfg.resolution, sort_keys=True))
    if key not in _NET_CACHE:
        _NET_CACHE[key] = prepare_network(resolve_network(cfg.network), cfg.resolution)
    return _NET_CACHE[key]


def _dumps(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True, allow_nan=True) + "\n"


def _write_waveforms(path: Path, rec) -> None:
    mids = [j for j, s in enumerate(rec.stations) if s.label == "mid"]
    p, Q = rec.p, rec.Q
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t_s"] + [f"p_{rec.stations[j].segment}" for j in mids] + [f"Q_{rec.stations[j].segment}" for j in mids])
        for i in range(len(rec.t)):
            w.writerow([repr(float(rec.t[i]))] + [repr(float(p[i, j])) for j in mids] + [repr(float(Q[i, j])) for j in mids])


def run_node(cfg_dict: dict, k: int, xi, out_dir: str) -> dict:
    """Execute node ``k`` and persist its records; never raises for model failures."""
    cfg = CampaignConfig.from_dict(cfg_dict)
    base = _base_network(cfg)
    space = ParameterSpace(cfg, base)
    params = space.physical(xi)
    node_dir = Path(out_dir) / "nodes" / str(k)
    node_dir.mkdir(parents=True, exist_ok=True)
    (node_dir / "params.json").write_text(_dumps({"index": k, "xi": [float(v) for v in xi], "params": params}))
    t0 = time.perf_counter()
    try:
        net = space.network(base, params)
        rec, q = simulate(net, params, cfg.solver, cfg.shape_exponent, cfg.rm_mode)
    except (SimulationError, InfeasibleInflowError, RandomFieldError, WaveAnalysisError, NetworkError) as exc:
        doc = {"index": k, "status": "failed", "error": f"{type(exc).__name__}: {exc}"}
        (node_dir / "qoi.json").write_text(_dumps(doc))
        return {"index": k, "status": "failed", "error": doc["error"], "wall_s": time.perf_counter() - t0}
    mids = [j for j, s in enumerate(q.stations) if s[1] == "mid"]
    doc = {
        "index": k,
        "status": "ok",
        "stations": [q.stations[j][0] for j in mids],
        "qoi": {n: [float(getattr(q, n)[j]) for j in mids] for n in QOI_NAMES + ("P_f", "P_b", "p_sys", "p_dia")},
        "cycles": rec.meta["cycles"],
        "periodicity_final": rec.meta["periodicity_final"],
    }
    (node_dir / "qoi.json").write_text(_dumps(doc))
    meta = dict(rec.meta)
    meta.pop("cycle_audit", None)
    (node_dir / "run.json").write_text(_dumps(meta))
    if cfg.save_waveforms:
        _write_waveforms(node_dir / "waveforms.csv", rec)
    return {"index": k, "status": "ok", "wall_s": time.perf_counter() - t0}


def _node_done(out: Path, k: int, xi) -> bool:
    qp, pp = out / "nodes" / str(k) / "qoi.json", out / "nodes" / str(k) / "params.json"
    if not (qp.exists() and pp.exists()):
        return False
    try:
        q, p = json.loads(qp.read_text()), json.loads(pp.read_text())
    except json.JSONDecodeError:
        return False
    return q.get("status") == "ok" and np.array_equal(np.array(p["xi"]), np.asarray(xi, dtype=float))


# --- campaign --------------------------------------------------------------------


@dataclass
class CampaignResult:
    out_dir: Path
    manifest: dict
    surrogates: dict | None
    failed: list


def _manifest(cfg: CampaignConfig, space: ParameterSpace, grid, net: NetworkTopology, statuses: dict) -> dict:
    failed = sorted(k for k, s in statuses.items() if s["status"] != "ok")
    return {
        "format": 1,
        "versions": {"arterial_uq": __version__, "numpy": np.__version__, "scipy": scipy.__version__},
        "config": cfg.to_dict(),
        "seed": cfg.seed,
        "parameters": space.describe(),
        "grid": {"dim": grid.dim, "level": grid.level, "n_nodes": len(grid)},
        "pce": {"order": cfg.order, "n_terms": n_terms(grid.dim, cfg.order)},
        "network": {"name": net.name, "n_segments": len(net.segments), "reference_station": net.reference_station},
        "qoi_names": list(QOI_NAMES),
        "accounting": {"dispatched": len(statuses), "completed": len(statuses) - len(failed),
                       "failed": len(failed), "failed_nodes": failed},
        "nodes": [[float(v) for v in row] for row in grid.nodes],
    }


def run_campaign(cfg: CampaignConfig, out_dir, workers: int | None = None, resume: bool = False) -> CampaignResult:
    """Run every grid node, then assemble surrogates and tables.

    Raises
    ------
    CampaignError
        Any node failed under the strict policy (after writing the manifest).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    workers = default_workers() if workers is None else int(workers)
    if workers < 1:
        raise ConfigError("workers must be >= 1")
    base = _base_network(cfg)
    space = ParameterSpace(cfg, base)
    if space.dim != cfg.dim:
        raise ConfigError(f"case {cfg.case} expects N = {cfg.dim}, parameter space has {space.dim}")
    grid = build_grid(space.dim, int(cfg.level))
    cfg_dict = cfg.to_dict()
    todo = [k for k in range(len(grid)) if not (resume and _node_done(out, k, grid.nodes[k]))]
    statuses = {k: {"index": k, "status": "ok", "wall_s": 0.0} for k in range(len(grid)) if k not in todo}
    t0 = time.perf_counter()
    if workers == 1 or len(todo) <= 1:
        for k in todo:
            statuses[k] = run_node(cfg_dict, k, grid.nodes[k], str(out))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futs = {k: pool.submit(run_node, cfg_dict, k, grid.nodes[k], str(out)) for k in todo}
            for k in todo:
                statuses[k] = futs[k].result()
    manifest = _manifest(cfg, space, grid, base, statuses)
    (out / "manifest.json").write_text(_dumps(manifest))
    (out / "timings.json").write_text(_dumps({
        "workers": workers, "wall_s": time.perf_counter() - t0,
        "nodes": {str(k): statuses[k].get("wall_s", 0.0) for k in sorted(statuses)},
    }))
    failed = manifest["accounting"]["failed_nodes"]
    if failed:
        msgs = "; ".join(f"node {k}: {statuses[k].get('error', '')}" for k in failed[:5])
        if cfg.strict:
            raise CampaignError(f"{len(failed)} of {len(grid)} nodes failed ({msgs})")
        return CampaignResult(out, manifest, None, failed)
    surrogates = assemble(out)
    return CampaignResult(out, manifest, surrogates, [])


# --- assembly / postprocessing --------------------------------------------------------


def _read_json(path: Path) -> dict:
    try:
        return json.loads(path.read_text())
    except FileNotFoundError:
        raise CampaignError(f"missing file {path}") from None
    except json.JSONDecodeError as exc:
        raise CampaignError(f"corrupt file {path}: {exc}") from exc


def load_samples(out: Path, manifest: dict):
    """Node QoIs as an array (n_nodes, n_stations, n_qoi); checks completeness."""
    n = manifest["grid"]["n_nodes"]
    stations, rows, missing, failed = None, [], [], []
    for k in range(n):
        qp = out / "nodes" / str(k) / "qoi.json"
        if not qp.exists():
            missing.append(k)
            continue
        doc = _read_json(qp)
        if doc.get("status") != "ok":
            failed.append(k)
            continue
        if stations is None:
            stations = doc["stations"]
        elif doc["stations"] != stations:
            raise CampaignError(f"node {k}: station list differs from node 0")
        rows.append(np.array([doc["qoi"][q] for q in QOI_NAMES], dtype=float).T)
    if missing:
        raise CampaignError(f"incomplete campaign: missing node records {missing[:10]}"
                            + (" ..." if len(missing) > 10 else ""))
    if failed:
        raise CampaignError(f"campaign has failed nodes {failed[:10]}; surrogates need the complete grid")
    return stations, np.stack(rows)


def _fmt(v) -> str:
    v = float(v)
    return "nan" if math.isnan(v) else repr(v)


def _write_csv(path: Path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([c if isinstance(c, str) else _fmt(c) for c in r])
    path.write_text(buf.getvalue())


def _column_surrogate(s: PCESurrogate, j: int, q: int) -> PCESurrogate:
    return PCESurrogate(s.dim, s.order, s.indices, s.coefficients[:, j, q], s.names)


def assemble(out_dir) -> dict:
    """Build surrogates from node records and (re)write all tables.

    Deterministic: depends only on the manifest and node records.
    """
    out = Path(out_dir)
    manifest = _read_json(out / "manifest.json")
    cfg = CampaignConfig.from_dict(manifest["config"])
    stations, samples = load_samples(out, manifest)
    nodes = np.array(manifest["nodes"], dtype=float)
    grid = build_grid(manifest["grid"]["dim"], manifest["grid"]["level"])
    if len(grid) != len(nodes) or not np.array_equal(grid.nodes, nodes):
        raise CampaignError("grid/PCE mismatch: manifest nodes differ from the regenerated grid")
    names = manifest["parameters"]["names"]
    s = project(samples, grid, cfg.order, names)
    sur = {
        "parameters": manifest["parameters"],
        "order": cfg.order,
        "indices": s.indices.tolist(),
        "stations": stations,
        "qoi_names": list(QOI_NAMES),
        "coefficients": s.coefficients.tolist(),  # (n_terms, n_stations, n_qoi)
    }
    (out / "surrogates.json").write_text(_dumps(sur))
    tables = out / "tables"
    tables.mkdir(exist_ok=True)
    net = _base_network(cfg)
    write_tables(tables, s, stations, names, net, cfg)
    return sur


def load_surrogates(out_dir) -> tuple[PCESurrogate, list]:
    doc = _read_json(Path(out_dir) / "surrogates.json")
    coeffs = np.array(doc["coefficients"], dtype=float)
    idx = np.array(doc["indices"], dtype=int)
    s = PCESurrogate(idx.shape[1], doc["order"], idx, coeffs, doc["parameters"]["names"])
    return s, doc["stations"]


def _safe(fn, s):
    try:
        return fn(s)
    except ZeroVarianceError:
        return None


def write_tables(tables: Path, s: PCESurrogate, stations, names, net: NetworkTopology, cfg: CampaignConfig) -> None:
    N = s.dim
    mean, std = s.mean, s.std
    rng = np.random.default_rng(cfg.seed)
    xi_mc = rng.uniform(-1.0, 1.0, size=(20000, N))
    vals = s(xi_mc)  # (n_mc, n_stations, n_qoi)
    qlo, qmed, qhi = (np.quantile(vals, lv, axis=0) for lv in (0.025, 0.5, 0.975))
    stat_rows, first, second, total, corr = [], [], [], [], []
    pairs = [(a, b) for a in range(N) for b in range(a + 1, N)]
    for j, sid in enumerate(stations):
        for q, qn in enumerate(QOI_NAMES):
            stat_rows.append([str(sid), qn, mean[j, q], std[j, q], qlo[j, q], qmed[j, q], qhi[j, q]])
            col = _column_surrogate(s, j, q)
            si = _safe(lambda c: sobol_indices(c, 2), col)
            ti = _safe(total_indices, col)
            rc = _safe(correlations, col)
            nanN = [math.nan] * N
            first.append([str(sid), qn] + ([si[(d,)] for d in range(N)] if si else nanN))
            second.append([str(sid), qn] + ([si[p] for p in pairs] if si else [math.nan] * len(pairs))
                          + [si["remainder"] if si else math.nan])
            total.append([str(sid), qn] + (list(ti) if ti is not None else nanN))
            corr.append([str(sid), qn] + (list(rc) if rc is not None else nanN))
    _write_csv(tables / "statistics.csv", ["station", "qoi", "mean", "std", "q025", "q500", "q975"], stat_rows)
    _write_csv(tables / "sobol_first.csv", ["station", "qoi"] + [f"S_{n}" for n in names], first)
    _write_csv(tables / "sobol_second.csv", ["station", "qoi"] + [f"S_{names[a]}_{names[b]}" for a, b in pairs]
               + ["remainder"], second)
    _write_csv(tables / "sobol_total.csv", ["station", "qoi"] + [f"ST_{n}" for n in names], total)
    _write_csv(tables / "correlation.csv", ["station", "qoi"] + [f"rho_{n}" for n in names], corr)
    # group aggregates
    groups = dict(net.groups)
    groups.setdefault("aorta", list(net.aorta_path))
    groups = {g: [m for m in members if m in stations] for g, members in groups.items()}
    groups = {g: m for g, m in groups.items() if m}
    gs = group_statistics(stations, mean, std, groups)
    _write_csv(tables / "groups.csv", ["group", "qoi", "n", "mean", "std"],
               [[g, qn, str(gs[g]["n"]), gs[g]["mean"][q], gs[g]["std"][q]]
                for g in sorted(gs) for q, qn in enumerate(QOI_NAMES)])
    # AF and correlations against bifurcation count x distance
    iaf = QOI_NAMES.index("AF")
    ipp = QOI_NAMES.index("PP")
    rows = []
    for j, sid in enumerate(stations):
        col = _column_surrogate(s, j, ipp)
        rc = _safe(correlations, col)
        rows.append([str(sid), float(net.generation(sid)), net.distance_to_midpoint(sid), bifurcation_distance(net, sid),
                     mean[j, iaf], std[j, iaf]] + (list(rc) if rc is not None else [math.nan] * N))
    _write_csv(tables / "af_vs_distance.csv", ["station", "generation", "distance_m", "bifurcation_distance_m",
                                               "AF_mean", "AF_std"] + [f"rho_PP_{n}" for n in names], rows)
    # PP against heart rate, marginalized over the other inputs
    Tlo, Thi = uniform_bounds(*cfg.inflow["T"])
    xs = np.linspace(-1.0, 1.0, 21)
    rows = []
    cm = conditional_mean(PCESurrogate(N, s.order, s.indices, s.coefficients[:, :, ipp]), 0, xs)
    for i, x in enumerate(xs):
        T = float(from_unit(x, Tlo, Thi))
        for j, sid in enumerate(stations):
            rows.append([str(sid), T, 60.0 / T, cm[i, j]])
    _write_csv(tables / "pp_vs_hr.csv", ["station", "T_s", "hr_bpm", "PP_mean_Pa"], rows)


def postprocess(result_dir) -> dict:
    """Regenerate surrogates and tables of a finished campaign without re-running it."""
    out = Path(result_dir)
    if not (out / "manifest.json").exists():
        raise CampaignError(f"{out} is not a campaign directory (no manifest.json)")
    return assemble(out)
