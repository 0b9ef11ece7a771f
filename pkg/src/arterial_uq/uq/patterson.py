"""Nested Gauss-Patterson-Kronrod rules on [-1, 1].

The rules are tabulated in ``data/gauss_patterson.json`` (1, 3, 7, ..., 127
points, 30 significant digits).  :func:`compute_patterson_rules` regenerates
the table from scratch: each rule is the Kronrod-Patterson extension of the
previous one, i.e. the ``m + 1`` new abscissae are the roots of the polynomial
orthogonal to all polynomials of degree ``<= m`` under the weight
``prod(x - x_old)`` on [-1, 1].
"""
from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

import numpy as np

MAX_LEVEL = 7  # 2**7 - 1 = 127 points


def rule_size(level: int) -> int:
    """Number of points of the 1D rule with index ``level`` (1-based)."""
    return 2**level - 1


def _legendre_mp(n, x, mp):
    """Legendre polynomials P_0..P_n at ``x`` (mpmath)."""
    vals = [mp.mpf(1), x]
    for k in range(1, n):
        vals.append(((2 * k + 1) * x * vals[k] - k * vals[k - 1]) / (k + 1))
    return vals[: n + 1]


def _gauss_legendre_mp(n, mp):
    x0, _ = np.polynomial.legendre.leggauss(n)
    nodes, weights = [], []
    for xi in x0:
        x = mp.mpf(xi)
        for _ in range(100):
            P = _legendre_mp(n, x, mp)
            dP = n * (x * P[n] - P[n - 1]) / (x * x - 1)
            dx = P[n] / dP
            x -= dx
            if abs(dx) < mp.mpf(10) ** (-mp.dps + 5):
                break
        P = _legendre_mp(n, x, mp)
        dP = n * (x * P[n] - P[n - 1]) / (x * x - 1)
        nodes.append(x)
        weights.append(2 / ((1 - x * x) * dP * dP))
    return nodes, weights


def _extend(old, mp):
    """Patterson extension of the node set ``old`` (m nodes -> 2m + 1 nodes)."""
    m = len(old)
    k = m + 1  # degree of the extension polynomial
    nq = (3 * m + 4) // 2 + 2
    xq, wq = _gauss_legendre_mp(nq, mp)
    Pq = [_legendre_mp(k, x, mp) for x in xq]
    piq = []
    for x in xq:
        v = mp.mpf(1)
        for xo in old:
            v *= x - xo
        piq.append(v)
    # q(x) = P_k(x) + sum_{i<k} c_i P_i(x), orthogonal to P_j * pi for j <= m
    M = mp.matrix(m + 1, k)
    rhs = mp.matrix(m + 1, 1)
    for j in range(m + 1):
        for i in range(k):
            M[j, i] = mp.fsum(wq[s] * Pq[s][i] * Pq[s][j] * piq[s] for s in range(nq))
        rhs[j] = -mp.fsum(wq[s] * Pq[s][k] * Pq[s][j] * piq[s] for s in range(nq))
    coef = mp.lu_solve(M, rhs)
    leg = [float(coef[i]) for i in range(k)] + [1.0]
    guesses = np.sort(np.real(np.polynomial.legendre.legroots(leg)))
    new = []
    for g in guesses:
        x = mp.mpf(g)
        for _ in range(200):
            P = _legendre_mp(k, x, mp)
            val = P[k] + mp.fsum(coef[i] * P[i] for i in range(k))
            # derivative through dP_i = i (x P_i - P_{i-1}) / (x^2 - 1)
            dval = k * (x * P[k] - P[k - 1]) / (x * x - 1)
            for i in range(1, k):
                dval += coef[i] * i * (x * P[i] - P[i - 1]) / (x * x - 1)
            dx = val / dval
            x -= dx
            if abs(dx) < mp.mpf(10) ** (-mp.dps + 8):
                break
        new.append(x)
    return sorted(list(old) + new)


def _interpolatory_weights(nodes, mp):
    n = len(nodes)
    V = mp.matrix(n, n)
    rhs = mp.matrix(n, 1)
    for i, x in enumerate(nodes):
        P = _legendre_mp(n - 1, x, mp)
        for j in range(n):
            V[j, i] = P[j]
    rhs[0] = 2
    w = mp.lu_solve(V, rhs)
    return [w[i] for i in range(n)]


def compute_patterson_rules(max_level: int = MAX_LEVEL, dps: int = 80):
    """Generate the nested rules from scratch with ``dps`` decimal digits.

    Returns a list of ``(nodes, weights)`` pairs of mpmath numbers; weights
    sum to 2 (Lebesgue measure on [-1, 1]).
    """
    import mpmath

    mp = mpmath.mp
    with mpmath.workdps(dps):
        rules = []
        nodes = [mp.mpf(0)]
        rules.append((nodes, [mp.mpf(2)]))
        for _ in range(2, max_level + 1):
            nodes = _extend(nodes, mp)
            rules.append((nodes, _interpolatory_weights(nodes, mp)))
        return rules


@lru_cache(maxsize=None)
def _table():
    text = resources.files("arterial_uq.data").joinpath("gauss_patterson.json").read_text()
    raw = json.loads(text)
    return [
        (np.array([float(v) for v in r["nodes"]]), np.array([float(v) for v in r["weights"]]))
        for r in raw["rules"]
    ]


def patterson_rule(level: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes (ascending) and probability weights (sum 1) of the 1D rule ``level``.

    ``level`` is 1-based: level 1 is the midpoint rule, level 2 the 3-point
    Gauss rule, level ``k`` has ``2**k - 1`` points.
    """
    if level < 1:
        raise ValueError(f"rule level must be >= 1, got {level}")
    table = _table()
    if level > len(table):
        raise ValueError(
            f"Gauss-Patterson rules are tabulated up to level {len(table)} "
            f"({rule_size(len(table))} points); level {level} requested"
        )
    x, w = table[level - 1]
    return x.copy(), 0.5 * w


def write_table(path, max_level: int = MAX_LEVEL, digits: int = 30) -> None:
    import mpmath

    rules = compute_patterson_rules(max_level)
    out = {
        "description": "Nested Gauss-Patterson rules on [-1,1], weights sum to 2",
        "rules": [
            {
                "points": len(x),
                "nodes": [mpmath.nstr(v, digits) for v in x],
                "weights": [mpmath.nstr(v, digits) for v in w],
            }
            for x, w in rules
        ],
    }
    with open(path, "w") as fh:
        json.dump(out, fh, indent=1)
