"""Station time series produced by a simulation run."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

CSV_HEADER = ["t_s", "p_Pa", "u_mps", "Q_m3ps", "A_m2"]


@dataclass(frozen=True)
class Station:
    segment: int
    x: float  # local abscissa (m)
    label: str  # "mid", "start" or "end"
    beta: float
    sqrtA0: float
    p0: float

    @property
    def A0(self) -> float:
        return self.sqrtA0**2

    def c0(self, rho: float) -> float:
        return float(np.sqrt(self.beta * self.sqrtA0 / (2.0 * rho)))


@dataclass
class WaveformRecord:
    """Sampled p, u, Q, A at each station over the recorded cycle(s).

    Arrays have shape (n_samples, n_stations).  For periodic runs the record
    holds the final cycle including both end points (n_samples = S + 1).
    """

    t: np.ndarray
    stations: list
    A: np.ndarray
    u: np.ndarray
    rho: float
    pC: np.ndarray | None = None
    meta: dict = field(default_factory=dict)
    cycles: list | None = None  # per-cycle (A, u) station arrays when kept

    @property
    def p(self) -> np.ndarray:
        beta = np.array([s.beta for s in self.stations])
        sA0 = np.array([s.sqrtA0 for s in self.stations])
        p0 = np.array([s.p0 for s in self.stations])
        return p0 + beta * (np.sqrt(self.A) - sA0)

    @property
    def Q(self) -> np.ndarray:
        return self.A * self.u

    def index(self, segment: int, label: str = "mid") -> int:
        for k, s in enumerate(self.stations):
            if s.segment == segment and s.label == label:
                return k
        raise KeyError(f"no {label} station on segment {segment}")

    def series(self, segment: int, label: str = "mid") -> dict:
        k = self.index(segment, label)
        return {"t": self.t, "p": self.p[:, k], "u": self.u[:, k], "Q": self.Q[:, k], "A": self.A[:, k]}

    def write(self, out_dir) -> None:
        """One CSV per station plus ``run.json`` with the run metadata."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        p, Q = self.p, self.Q
        for k, s in enumerate(self.stations):
            with open(out / f"segment_{s.segment:03d}_{s.label}.csv", "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(CSV_HEADER)
                for i in range(len(self.t)):
                    w.writerow([repr(float(v)) for v in (self.t[i], p[i, k], self.u[i, k], Q[i, k], self.A[i, k])])
        (out / "run.json").write_text(json.dumps(self.meta, indent=1, sort_keys=True, default=float) + "\n")
