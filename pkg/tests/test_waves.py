"""Wave separation, pulse quantities and group statistics."""
import csv
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from arterial_uq.solver.record import CSV_HEADER, Station, WaveformRecord
from arterial_uq.waves import (
    NonPeriodicError,
    WaveAnalysisError,
    compute_qoi,
    cycle_mean,
    group_statistics,
    reflection_magnitude,
    separate_waves,
    wave_amplitude,
)

RHO = 1060.0
A0 = 3.0e-4
BETA = 3.0e6


def _cycle(n=401, amp=2000.0, uamp=0.3, lag=0.4, offset=1e4):
    t = np.linspace(0.0, 1.0, n)
    p = offset + amp * np.sin(np.pi * t) ** 2
    u = uamp * np.sin(np.pi * (t - lag)) ** 2
    A = (p / BETA + math.sqrt(A0)) ** 2
    return t, p, u, A


def test_separation_reconstructs_pressure():
    _, p, u, A = _cycle()
    pf, pb = separate_waves(p, u, A, BETA, A0, RHO)
    assert np.max(np.abs(pf + pb - p)) <= 1e-8 * np.max(np.abs(p))
    assert cycle_mean(pf) == pytest.approx(0.5 * cycle_mean(p), rel=1e-12)


@given(st.floats(-5e3, 5e3), st.floats(0.0, 1.0))
def test_rm_invariant_to_pressure_offset(offset, lag):
    _, p, u, A = _cycle(lag=lag)
    pf, pb = separate_waves(p, u, A, BETA, A0, RHO)
    qf, qb = separate_waves(p + offset, u, A, BETA, A0, RHO)
    r1, r2 = reflection_magnitude(pf, pb), reflection_magnitude(qf, qb)
    assert r2 == pytest.approx(r1, rel=1e-9, abs=1e-12)


def test_pure_forward_wave_has_no_reflection():
    # u = p / (rho c) for a linear forward wave
    t = np.linspace(0, 1, 801)
    dp = 100.0 * np.sin(np.pi * t) ** 2
    A = (dp / BETA + math.sqrt(A0)) ** 2
    c = np.sqrt(BETA * np.sqrt(A) / (2 * RHO))
    u = np.concatenate(([0.0], np.cumsum(np.diff(dp) / (RHO * 0.5 * (c[1:] + c[:-1])))))
    pf, pb = separate_waves(dp, u, A, BETA, A0, RHO)
    assert reflection_magnitude(pf, pb) < 1e-12
    assert wave_amplitude(pf) > 0.4 * 100.0


def test_non_periodic_input_rejected():
    _, p, u, A = _cycle()
    p = p.copy()
    p[-1] += 500.0
    with pytest.raises(NonPeriodicError):
        separate_waves(p, u, A, BETA, A0, RHO)


def test_bad_shapes_rejected():
    with pytest.raises(WaveAnalysisError):
        separate_waves([1.0, 2.0], [0.0, 0.0], [A0, A0], BETA, A0, RHO)


def test_amplitude_modes():
    x = np.array([0.0, 1.0, 0.0, -1.0, 0.0])
    assert wave_amplitude(x, "peak_to_peak") == 2.0
    assert wave_amplitude(x, "peak") == pytest.approx(1.0)
    with pytest.raises(ValueError):
        wave_amplitude(x, "rms")


def _record(pressures, u=None):
    """Record with one station per pressure series (all on the same wall)."""
    pressures = np.asarray(pressures, dtype=float).T
    n, m = pressures.shape
    stations = [Station(k + 1, 0.1, "mid", BETA, math.sqrt(A0), 0.0) for k in range(m)]
    A = (pressures / BETA + math.sqrt(A0)) ** 2
    u = np.zeros_like(A) if u is None else u
    return WaveformRecord(t=np.linspace(0, 1, n), stations=stations, A=A, u=u, rho=RHO)


def test_qoi_on_constant_record():
    rec = _record([np.full(101, 5000.0), np.full(101, 5000.0)])
    q = compute_qoi(rec, reference=1)
    assert np.all(q.PP == 0.0) and np.all(q.AD == 0.0)
    assert np.all(q.RM == 0.0)
    assert q.AF[0] == 1.0 and np.isnan(q.AF[1])


def test_qoi_on_sin2_record():
    t = np.linspace(0, 1, 201)
    p1 = 8000.0 + 4000.0 * np.sin(np.pi * t) ** 2
    p2 = 8000.0 + 5000.0 * np.sin(np.pi * t) ** 2
    q = compute_qoi(_record([p1, p2]), reference=1)
    assert q.PP == pytest.approx([4000.0, 5000.0], rel=1e-12)
    assert q.AF == pytest.approx([1.0, 0.8], rel=1e-12)
    A_sys = (12000.0 / BETA + math.sqrt(A0)) ** 2
    A_dia = (8000.0 / BETA + math.sqrt(A0)) ** 2
    assert q.AD[0] == pytest.approx((A_sys - A_dia) / A_dia, rel=1e-12)
    # u = 0: forward and backward waves carry half the pressure each
    assert q.RM == pytest.approx([1.0, 1.0], rel=1e-12)


def test_missing_reference_station():
    rec = _record([np.full(11, 1.0)])
    with pytest.raises(WaveAnalysisError, match="reference"):
        compute_qoi(rec, reference=7)


def test_group_statistics():
    means = np.array([[1.0, 10.0], [3.0, 30.0], [5.0, 50.0]])
    stds = np.ones_like(means)
    out = group_statistics([4, 5, 6], means, stds, {"single": [5], "dup": [4, 4, 6]})
    assert np.allclose(out["single"]["mean"], [3.0, 30.0]) and out["single"]["n"] == 1
    assert np.allclose(out["dup"]["mean"], [7.0 / 3.0, 70.0 / 3.0]) and out["dup"]["n"] == 3
    with pytest.raises(WaveAnalysisError, match="empty"):
        group_statistics([4], means[:1], stds[:1], {"none": []})
    with pytest.raises(WaveAnalysisError):
        group_statistics([4], means[:1], stds[:1], {"g": [9]})


def test_waveform_csv_header(tmp_path):
    rec = _record([np.full(5, 1.0)])
    rec.write(tmp_path)
    files = sorted(tmp_path.glob("*.csv"))
    assert files
    with open(files[0]) as fh:
        assert next(csv.reader(fh)) == CSV_HEADER
