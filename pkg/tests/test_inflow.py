import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.optimize import minimize_scalar
from scipy.special import gamma

from arterial_uq.inflow import (
    NOMINAL_INFLOW,
    ConstantInflow,
    InfeasibleInflowError,
    InflowParams,
    PulseInflow,
    TabulatedInflow,
    feasible_ratio_range,
    gamma_ratio,
    normalization,
    q_inlet,
    solve_phase,
    uniform_bounds,
)

BOUNDS = {k: uniform_bounds(*v) for k, v in NOMINAL_INFLOW.items()}
triplets = st.tuples(*(st.floats(*BOUNDS[k]) for k in ("T", "Qbar", "Qmax")))


def _brute_max(p: InflowParams):
    t = np.linspace(0.0, p.T, 200_001)
    q = q_inlet(t, p)
    i = int(np.argmax(q))
    res = minimize_scalar(lambda s: -float(q_inlet(s, p)), bounds=(t[max(i - 1, 0)], t[i + 1]),
                          method="bounded", options={"xatol": 1e-14})
    return -res.fun


def test_gamma_ratio_against_scipy():
    for n in (1, 2, 5.5, 13, 20):
        assert gamma_ratio(n) == pytest.approx(gamma((n + 3) / 2) / gamma((n + 2) / 2), rel=1e-13)


def test_normalization_gives_unit_mean():
    for n in (3, 13, 7.5):
        for phi in (0.1, 0.7, math.pi / 2):
            m, _ = quad(lambda th: np.sin(th) ** n * np.cos(th - phi), 0, math.pi, epsabs=1e-13, epsrel=1e-13, limit=200)
            assert normalization(n, phi) * m / math.pi == pytest.approx(1.0, rel=1e-11)


def test_nominal_triplet():
    p = InflowParams.from_triplet(0.86, 100e-6, 650e-6)
    assert 0 < p.phi <= math.pi / 2
    assert float(q_inlet(0.0, p)) == 0.0
    assert float(q_inlet(p.t_star, p)) == pytest.approx(650e-6, rel=1e-10)
    assert p.Qmax / p.Qbar == pytest.approx(6.5)
    assert p.q_min < 0  # reverse flow


def test_phase_aligned_limit():
    n = 13
    lo, _ = feasible_ratio_range(n)
    phi, t_star, A = solve_phase(1.0, 1.0, lo, n)
    assert phi == pytest.approx(math.pi / 2, abs=1e-12)
    assert t_star == pytest.approx(0.5, abs=1e-12)
    p = InflowParams(1.0, 1.0, lo, n, phi, A, t_star)
    t = np.linspace(0, 1, 101)
    np.testing.assert_allclose(q_inlet(t, p), A * np.sin(math.pi * t) ** (n + 1), atol=1e-12)
    assert float(q_inlet(0.5, p)) == pytest.approx(A, rel=1e-12)


@given(triplets)
def test_mean_and_peak_exactness(tri):
    T, Qbar, Qmax = tri
    p = InflowParams.from_triplet(T, Qbar, Qmax)
    # composite trapezoid over one period is spectrally accurate for periodic smooth data
    t = np.linspace(0.0, T, 10_001)
    q = q_inlet(t, p)
    mean = np.sum(0.5 * (q[1:] + q[:-1])) / 10_000
    assert mean == pytest.approx(Qbar, rel=1e-10)
    assert float(q_inlet(p.t_star, p)) == pytest.approx(Qmax, rel=1e-8)
    assert _brute_max(p) == pytest.approx(Qmax, rel=1e-8)
    assert 0 < p.phi <= math.pi / 2


def test_periodic_and_zero_at_cycle_start():
    p = InflowParams.from_triplet(0.86, 100e-6, 650e-6)
    t = np.linspace(0, 0.86, 50)
    np.testing.assert_allclose(q_inlet(t + 3 * 0.86, p), q_inlet(t, p), atol=1e-18)
    assert float(q_inlet(0.86 * 5, p)) == pytest.approx(0.0, abs=1e-15)


@given(triplets, st.floats(0.01, 0.2))
def test_reverse_flow_grows_with_qmax(tri, bump):
    T, Qbar, Qmax = tri
    lo, hi = feasible_ratio_range()
    Q2 = Qmax * (1 + bump)
    if Q2 / Qbar > hi:
        return
    a = InflowParams.from_triplet(T, Qbar, Qmax)
    b = InflowParams.from_triplet(T, Qbar, Q2)
    assert abs(b.q_min) > abs(a.q_min)


@given(triplets, st.floats(0.01, 0.1))
def test_reverse_flow_shrinks_with_qbar(tri, bump):
    T, Qbar, Qmax = tri
    a = InflowParams.from_triplet(T, Qbar, Qmax)
    b = InflowParams.from_triplet(T, Qbar * (1 + bump), Qmax)
    assert abs(b.q_min) < abs(a.q_min)


def test_reverse_flow_matches_sampled_minimum():
    p = InflowParams.from_triplet(0.86, 100e-6, 650e-6)
    t = np.linspace(0, 0.86, 400_001)
    assert p.q_min == pytest.approx(q_inlet(t, p).min(), rel=1e-7)


def test_whole_nominal_box_feasible():
    for T in BOUNDS["T"]:
        for Qbar in BOUNDS["Qbar"]:
            for Qmax in BOUNDS["Qmax"]:
                InflowParams.from_triplet(T, Qbar, Qmax)


@pytest.mark.parametrize("ratio", [1.5, 1e10])
def test_infeasible_ratio_reports_range(ratio):
    with pytest.raises(InfeasibleInflowError, match="attainable range"):
        solve_phase(1.0, 1.0, ratio)


def test_invalid_inputs():
    with pytest.raises(ValueError):
        solve_phase(1.0, 1.0, 0.5)
    with pytest.raises(ValueError):
        solve_phase(-1.0, 1.0, 5.0)


def test_simple_inflows():
    c = ConstantInflow(2.0, 0.5)
    assert c.mean == 2.0 and c.period == 0.5
    np.testing.assert_array_equal(c(np.array([0.0, 0.3])), [2.0, 2.0])
    g = PulseInflow(1.0, 0.1, 0.02)
    assert float(g(0.1)) == pytest.approx(1.0)
    h = PulseInflow(1.0, 0.0, 0.01, "halfsine")
    assert float(h(0.005)) == pytest.approx(1.0)
    assert float(h(0.02)) == 0.0
    with pytest.raises(ValueError):
        PulseInflow(1.0, 0.0, 0.01, "square")(0.0)


def test_tabulated_inflow_periodic_spline():
    t = np.linspace(0, 1, 21)[:-1]
    q = 1 + np.sin(2 * np.pi * t)
    f = TabulatedInflow(t, q, 1.0)
    assert f.mean == pytest.approx(1.0, abs=1e-6)
    assert float(f(0.25)) == pytest.approx(2.0, abs=1e-3)
    assert float(f(1.25)) == pytest.approx(float(f(0.25)))
    with pytest.raises(ValueError):
        TabulatedInflow(np.array([0.1, 0.2]), np.array([1.0, 2.0]), 1.0)
