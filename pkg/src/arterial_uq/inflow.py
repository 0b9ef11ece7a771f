"""Parametric pulsatile inflow Q(t) = A Qbar sin^n(wt) cos(wt - phi), w = pi/T.

Given a triplet (T, Qbar, Qmax) the phase ``phi`` is solved so that the
waveform peaks at Qmax while its cycle mean stays at Qbar.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

PHI_MIN = 1e-9


class InfeasibleInflowError(ValueError):
    """Requested peak flow cannot be reached for phi in (0, pi/2]."""


def gamma_ratio(n: float) -> float:
    """Gamma((n+3)/2) / Gamma((n+2)/2), via log-gamma."""
    return math.exp(math.lgamma((n + 3.0) / 2.0) - math.lgamma((n + 2.0) / 2.0))


def normalization(n: float, phi: float) -> float:
    """Factor making the cycle mean of the waveform equal to Qbar.

    The mean of sin^n(th) cos(th - phi) over th in [0, pi] is
    sin(phi) Gamma((n+2)/2) / (sqrt(pi) Gamma((n+3)/2)).
    """
    return math.sqrt(math.pi) * gamma_ratio(n) / math.sin(phi)


def peak_angle(n: float, phi: float) -> float:
    """Angle w t* in (0, pi/2] of the waveform maximum.

    Stationarity gives cos(phi) tan^2 - (n+1) sin(phi) tan - n cos(phi) = 0;
    the positive root is the maximum, the negative one the reverse-flow minimum.
    """
    s, c = math.sin(phi), math.cos(phi)
    num = (n + 1) * s + math.sqrt((n + 1) ** 2 * s * s + 4 * n * c * c)
    return math.atan2(num, 2.0 * c)


def trough_angle(n: float, phi: float) -> float:
    """Angle in [pi/2, pi) of the most negative flow."""
    s, c = math.sin(phi), math.cos(phi)
    num = (n + 1) * s - math.sqrt((n + 1) ** 2 * s * s + 4 * n * c * c)
    return math.atan2(num, 2.0 * c) + math.pi


def _shape(theta, n, phi):
    return np.sin(theta) ** n * np.cos(theta - phi)


def peak_ratio(n: float, phi: float) -> float:
    """Qmax / Qbar attained for phase ``phi``."""
    th = peak_angle(n, phi)
    return normalization(n, phi) * float(_shape(th, n, phi))


def feasible_ratio_range(n: float = 13) -> tuple[float, float]:
    """Range of Qmax/Qbar reachable for phi in [PHI_MIN, pi/2]."""
    return peak_ratio(n, math.pi / 2), peak_ratio(n, PHI_MIN)


def solve_phase(T: float, Qbar: float, Qmax: float, n: float = 13, xtol: float = 1e-14):
    """Phase, time of peak and normalization for a (T, Qbar, Qmax) triplet.

    Returns
    -------
    phi : float
        Phase angle in (0, pi/2].
    t_star : float
        Time of the flow maximum within the cycle.
    A : float
        Normalization factor.
    """
    if not (T > 0 and Qbar > 0 and Qmax > Qbar):
        raise ValueError("need T > 0 and Qmax > Qbar > 0")
    ratio = Qmax / Qbar
    lo, hi = feasible_ratio_range(n)
    if ratio < lo or ratio > hi:
        raise InfeasibleInflowError(
            f"Qmax/Qbar = {ratio:.6g} is not attainable for n = {n}; "
            f"attainable range is [{lo:.6g}, {hi:.6g}]"
        )
    if ratio == lo:
        phi = math.pi / 2
    else:
        # peak ratio decreases monotonically with phi
        phi = brentq(lambda p: peak_ratio(n, p) - ratio, PHI_MIN, math.pi / 2, xtol=xtol, rtol=1e-15)
    omega = math.pi / T
    return phi, peak_angle(n, phi) / omega, normalization(n, phi)


@dataclass(frozen=True)
class InflowParams:
    """Solved parametric inflow. Construct with :meth:`from_triplet`."""

    T: float
    Qbar: float
    Qmax: float
    n: float
    phi: float
    A: float
    t_star: float

    @classmethod
    def from_triplet(cls, T: float, Qbar: float, Qmax: float, n: float = 13) -> "InflowParams":
        phi, t_star, A = solve_phase(T, Qbar, Qmax, n)
        return cls(T, Qbar, Qmax, n, phi, A, t_star)

    @property
    def omega(self) -> float:
        return math.pi / self.T

    @property
    def period(self) -> float:
        return self.T

    @property
    def mean(self) -> float:
        return self.Qbar

    @property
    def q_min(self) -> float:
        """Most negative flow of the cycle (reverse flow)."""
        th = trough_angle(self.n, self.phi)
        return self.A * self.Qbar * float(_shape(th, self.n, self.phi))

    def __call__(self, t):
        return q_inlet(t, self)


def q_inlet(t, params: InflowParams):
    """T-periodic flow rate in m^3/s."""
    tt = np.mod(np.asarray(t, dtype=float), params.T)
    return params.A * params.Qbar * _shape(params.omega * tt, params.n, params.phi)


@dataclass(frozen=True)
class TabulatedInflow:
    """Periodic cubic-spline interpolation of a sampled flow waveform.

    Used for validation inputs only.  The last sample is identified with the
    first so the interpolant is periodic.
    """

    t: np.ndarray
    q: np.ndarray
    T: float

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        q = np.asarray(self.q, dtype=float)
        if t[0] != 0.0 or np.any(np.diff(t) <= 0) or t[-1] > self.T:
            raise ValueError("sample times must start at 0, increase and stay within the period")
        if t[-1] < self.T:
            t = np.append(t, self.T)
            q = np.append(q, q[0])
        q[-1] = q[0]
        object.__setattr__(self, "_spline", CubicSpline(t, q, bc_type="periodic"))

    @property
    def period(self) -> float:
        return self.T

    @property
    def mean(self) -> float:
        return float(self._spline.integrate(0.0, self.T) / self.T)

    def __call__(self, t):
        return self._spline(np.mod(np.asarray(t, dtype=float), self.T))


@dataclass(frozen=True)
class ConstantInflow:
    Q: float
    T: float = 1.0

    @property
    def period(self) -> float:
        return self.T

    @property
    def mean(self) -> float:
        return self.Q

    def __call__(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.Q)


@dataclass(frozen=True)
class PulseInflow:
    """Single smooth pulse, for wave-propagation tests.

    ``shape`` is ``"gauss"`` (Q = amp exp(-((t-t0)/width)^2)), ``"dgauss"``
    (derivative-of-Gaussian, zero net volume) or ``"halfsine"``
    (amp sin(pi t / width) on [0, width]).
    """

    amplitude: float
    t0: float
    width: float
    shape: str = "gauss"
    T: float = 1.0

    @property
    def period(self) -> float:
        return self.T

    @property
    def mean(self) -> float:
        return 0.0

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        s = (t - self.t0) / self.width
        if self.shape == "gauss":
            return self.amplitude * np.exp(-s * s)
        if self.shape == "dgauss":
            return self.amplitude * math.sqrt(2 * math.e) * s * np.exp(-2 * s * s)
        if self.shape == "halfsine":
            return np.where((t >= 0) & (t <= self.width), self.amplitude * np.sin(np.pi * t / self.width), 0.0)
        raise ValueError(f"unknown pulse shape {self.shape!r}")


# Nominal inflow statistics: (mean, std relative to the mean)
NOMINAL_INFLOW = {
    "T": (0.86, 0.1155),
    "Qbar": (100e-6, 0.0577),
    "Qmax": (650e-6, 0.0577),
}


def uniform_bounds(mean: float, rel_std: float) -> tuple[float, float]:
    """Support [mu - sqrt(3) sigma, mu + sqrt(3) sigma] of a uniform variable."""
    half = math.sqrt(3.0) * rel_std * mean
    return mean - half, mean + half


INFLOW_ALIASES = {"T_s": "T", "Qbar_m3ps": "Qbar", "Qmax_m3ps": "Qmax", "n": "shape_exponent"}


def canonical_inflow(doc: dict) -> tuple[dict, float | None]:
    """Map unit-suffixed inflow keys onto T, Qbar, Qmax.

    Returns the renamed inflow dict and the shape exponent given as ``n``
    (None when absent).  Giving both a key and its alias is an error.
    """
    out, n = {}, None
    for k, v in doc.items():
        name = INFLOW_ALIASES.get(k, k)
        if name in out or (name == "shape_exponent" and n is not None):
            raise ValueError(f"inflow key {name!r} given twice")
        if name == "shape_exponent":
            n = float(v)
        else:
            out[name] = v
    return out, n
