"""Command-line entry point: ``arterial-uq {simulate,validate,campaign,postprocess}``.

Exit codes: 0 success, 1 computation or check failure, 2 configuration error.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import benchmarks as bm
from .campaign import (
    CampaignError,
    ConfigError,
    load_config,
    make_inflow,
    prepare_network,
    postprocess,
    resolve_network,
    run_campaign,
)
from .inflow import NOMINAL_INFLOW, InfeasibleInflowError, canonical_inflow
from .random_field import RandomFieldError
from .solver import Simulation, SimulationError, SolverConfig
from .waves import WaveAnalysisError, compute_qoi, group_statistics, write_group_json

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _read_json(path) -> dict:
    p = Path(path)
    if not p.exists():
        bundled = Path(str(bm.__file__)).parent / "data" / "configs" / f"{path}.json"
        if not bundled.exists():
            raise ConfigError(f"config {path!r} not found")
        p = bundled
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{p}: top level must be an object")
    return doc


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items() if k != "records" and k != "record"}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


# --- simulate ---------------------------------------------------------------------


SIMULATE_KEYS = {"network", "inflow", "solver", "resolution", "shape_exponent", "rm_mode", "out"}


def cmd_simulate(args) -> int:
    doc = _read_json(args.config)
    extra = set(doc) - SIMULATE_KEYS
    if extra:
        raise ConfigError(f"unknown simulate keys: {sorted(extra)}")
    net = prepare_network(resolve_network(doc.get("network", "sample_55")), doc.get("resolution") or {})
    inflow_doc = {k: v[0] for k, v in NOMINAL_INFLOW.items()}
    try:
        given, n = canonical_inflow(doc.get("inflow", {}))
    except ValueError as exc:
        raise ConfigError(f"inflow: {exc}") from exc
    if set(given) - set(inflow_doc):
        raise ConfigError(f"inflow: unknown keys {sorted(set(given) - set(inflow_doc))}")
    inflow_doc.update(given)
    n = n if n is not None else float(doc.get("shape_exponent", 13.0))
    try:
        cfg = SolverConfig(**doc.get("solver", {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"solver: {exc}") from exc
    try:
        inflow = make_inflow(float(inflow_doc["T"]), float(inflow_doc["Qbar"]), float(inflow_doc["Qmax"]), n)
    except InfeasibleInflowError as exc:
        raise ConfigError(f"inflow: {exc}") from exc
    out = Path(args.out or doc.get("out", "run_output"))
    rec = Simulation(net, inflow, cfg).run()
    rec.write(out / "waveforms")
    q = compute_qoi(rec, net, rm_mode=doc.get("rm_mode", "peak"))
    q.write_csv(out / "qoi.csv")
    mids = [j for j, s in enumerate(q.stations) if s[1] == "mid"]
    segs = [q.stations[j][0] for j in mids]
    vals = q.as_array()[mids]
    groups = {g: [m for m in members if m in segs] for g, members in net.groups.items()}
    stats = group_statistics(segs, vals, np.zeros_like(vals), {g: m for g, m in groups.items() if m})
    write_group_json(out / "groups.json", {g: {"qoi": list(q.QOI_NAMES), **d} for g, d in stats.items()})
    per = rec.meta.get("periodicity_final")
    print(f"simulate: {rec.meta['cycles']} cycles, periodicity {per if per is not None else float('nan'):.3e}, "
          f"outputs in {out}")
    return EXIT_OK


# --- validate ---------------------------------------------------------------------


def _write_station_csv(path: Path, rec, stations) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        cols = [rec.index(s, lab) for s, lab in stations]
        w.writerow(["t_s"] + [f"p_{s}_{lab}" for s, lab in stations] + [f"Q_{s}_{lab}" for s, lab in stations])
        for i in range(len(rec.t)):
            w.writerow([repr(float(rec.t[i]))] + [repr(float(rec.p[i, c])) for c in cols]
                       + [repr(float(rec.Q[i, c])) for c in cols])


def _validate_bifurcation(out: Path) -> dict:
    r = bm.check_aortic_bifurcation()
    _write_station_csv(out / "bifurcation_waveforms.csv", r["record"], [(1, "mid"), (2, "mid"), (3, "mid")])
    return r


def _validate_stent(out: Path, l0: float, tag: str) -> dict:
    r = bm.check_stent(l0)
    for k, rec in r["records"].items():
        _write_station_csv(out / f"{tag}_k{k}_waveforms.csv", rec, [(1, "P"), (1, "M"), (1, "D")])
    return r


def _simple(fn):
    def run(out: Path) -> dict:
        r = fn()
        return {**r, "checks": {fn.__name__.removeprefix("check_"): r["passed"]}}
    return run


def _wave_speed(out: Path) -> dict:
    runs = [bm.check_wave_speed(beta, A0) for beta, A0 in bm.WAVE_SPEED_CASES]
    return {"cases": runs, "checks": {f"c0={r['c0']:.3g}": r["passed"] for r in runs}}


VALIDATIONS = {
    "bifurcation": _validate_bifurcation,
    "stent-short": lambda out: _validate_stent(out, 0.15, "stent_short"),
    "stent-long": lambda out: _validate_stent(out, 0.6, "stent_long"),
    "wave-speed": _wave_speed,
    "dc-limit": _simple(bm.check_dc_limit),
    "mms": _simple(bm.check_mms),
    "matched-outlet": _simple(bm.check_matched_outlet),
    "closed-end": _simple(bm.check_closed_end),
    "separation": _simple(bm.check_separation_identity),
    "matched-bifurcation": _simple(bm.check_matched_bifurcation),
}


def cmd_validate(args) -> int:
    out = Path(args.out or f"validate_{args.case}")
    out.mkdir(parents=True, exist_ok=True)
    r = VALIDATIONS[args.case](out)
    checks = r["checks"]
    (out / "report.json").write_text(json.dumps(_jsonable(r), indent=1, sort_keys=True, default=float) + "\n")
    for name, ok in checks.items():
        print(f"{'PASS' if ok else 'FAIL'}  {args.case}: {name}")
    failed = [n for n, ok in checks.items() if not ok]
    if failed:
        print(f"validate {args.case}: failed properties: {', '.join(failed)}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# --- campaign / postprocess ---------------------------------------------------------


def cmd_campaign(args) -> int:
    cfg = load_config(args.config)
    if args.degraded:
        cfg.strict = False
    res = run_campaign(cfg, args.out, workers=args.workers, resume=args.resume)
    acc = res.manifest["accounting"]
    print(f"campaign {cfg.case}: {acc['dispatched']} nodes, {acc['completed']} completed, {acc['failed']} failed; "
          f"results in {args.out}")
    if res.failed:
        print(f"degraded mode: surrogates not built; failed nodes {res.failed}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_postprocess(args) -> int:
    postprocess(args.inp)
    print(f"postprocess: tables regenerated in {Path(args.inp) / 'tables'}")
    return EXIT_OK


# --- entry point --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="arterial-uq", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="single deterministic run")
    p.add_argument("--config", required=True, help="JSON run config (path or bundled name, e.g. 'nominal')")
    p.add_argument("--out", help="output directory (default: config 'out' or ./run_output)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", help="run a validation benchmark")
    p.add_argument("--case", required=True, choices=sorted(VALIDATIONS))
    p.add_argument("--out", help="report directory (default ./validate_<case>)")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("campaign", help="sparse-grid UQ campaign")
    p.add_argument("--config", required=True, help="JSON campaign config (path or reference/case1/case2/smoke)")
    p.add_argument("--out", required=True, help="campaign directory")
    p.add_argument("--workers", type=int, default=None,
                   help="worker processes (default: $ARTERIAL_UQ_WORKERS or 1)")
    p.add_argument("--resume", action="store_true", help="skip nodes with a completed record")
    p.add_argument("--degraded", action="store_true",
                   help="archive runs despite node failures instead of aborting (no surrogates)")
    p.set_defaults(func=cmd_campaign)

    p = sub.add_parser("postprocess", help="regenerate tables from a finished campaign")
    p.add_argument("--in", dest="inp", required=True, help="campaign directory")
    p.set_defaults(func=cmd_postprocess)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SimulationError, CampaignError, InfeasibleInflowError, RandomFieldError, WaveAnalysisError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
