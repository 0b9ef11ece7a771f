"""Generate the illustrative 55-segment network and the small benchmark trees.

The 55-segment geometry follows the classical systemic-tree layout (lengths and
radii rounded from commonly used literature values); stiffness, terminal
resistances and compliances are synthetic.  Nothing here is a reproduction of a
specific published parameter table.

Run from the repository root::

    python3 scripts/make_sample_network.py
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

OUT = Path(__file__).resolve().parents[1] / "src" / "arterial_uq" / "data"

RHO = 1060.0
MU = 4.0e-3
CELLS_PER_M = 13.0

# id: (name, length cm, radius cm)
GEOMETRY = {
    1: ("Ascending aorta", 4.0, 1.525),
    2: ("Aortic arch I", 2.0, 1.42),
    3: ("Brachiocephalic", 3.4, 0.65),
    4: ("R subclavian I", 3.4, 0.425),
    5: ("R common carotid", 17.7, 0.40),
    6: ("R vertebral", 14.8, 0.20),
    7: ("R subclavian II / brachial", 42.2, 0.407),
    8: ("R radial", 23.5, 0.175),
    9: ("R ulnar I", 6.7, 0.215),
    10: ("R interosseous", 7.9, 0.091),
    11: ("R ulnar II", 17.1, 0.203),
    12: ("R internal carotid", 17.6, 0.20),
    13: ("R external carotid", 17.7, 0.15),
    14: ("Aortic arch II", 3.9, 1.342),
    15: ("L common carotid", 20.8, 0.37),
    16: ("L internal carotid", 17.6, 0.177),
    17: ("L external carotid", 17.7, 0.177),
    18: ("Thoracic aorta I", 5.2, 1.20),
    19: ("L subclavian I", 3.4, 0.423),
    20: ("L vertebral", 14.8, 0.20),
    21: ("L subclavian II / brachial", 42.2, 0.403),
    22: ("L radial", 23.5, 0.174),
    23: ("L ulnar I", 6.7, 0.215),
    24: ("L interosseous", 7.9, 0.091),
    25: ("L ulnar II", 17.1, 0.203),
    26: ("Intercostals", 8.0, 0.20),
    27: ("Thoracic aorta II", 10.4, 1.167),
    28: ("Abdominal aorta I", 5.3, 0.80),
    29: ("Celiac I", 2.0, 0.39),
    30: ("Celiac II", 1.0, 0.20),
    31: ("Hepatic", 6.6, 0.22),
    32: ("Gastric", 7.1, 0.18),
    33: ("Splenic", 6.3, 0.275),
    34: ("Superior mesenteric", 5.9, 0.435),
    35: ("Abdominal aorta II", 1.0, 0.575),
    36: ("L renal", 3.2, 0.26),
    37: ("Abdominal aorta III", 1.0, 0.57),
    38: ("R renal", 3.2, 0.26),
    39: ("Abdominal aorta IV", 10.6, 0.57),
    40: ("Inferior mesenteric", 5.0, 0.16),
    41: ("Abdominal aorta V", 1.0, 0.52),
    42: ("R common iliac", 5.9, 0.365),
    43: ("L common iliac", 5.8, 0.365),
    44: ("L external iliac", 14.4, 0.32),
    45: ("L internal iliac", 5.0, 0.20),
    46: ("L femoral", 44.3, 0.259),
    47: ("L deep femoral", 12.6, 0.255),
    48: ("L posterior tibial", 32.1, 0.247),
    49: ("L anterior tibial", 34.3, 0.13),
    50: ("R external iliac", 14.5, 0.32),
    51: ("R internal iliac", 5.0, 0.20),
    52: ("R femoral", 44.4, 0.259),
    53: ("R deep femoral", 12.7, 0.255),
    54: ("R posterior tibial", 32.2, 0.247),
    55: ("R anterior tibial", 34.4, 0.13),
}

BIFURCATIONS = [
    (1, 2, 3), (2, 14, 15), (3, 4, 5), (4, 6, 7), (7, 8, 9), (9, 10, 11),
    (5, 12, 13), (14, 18, 19), (15, 16, 17), (19, 20, 21), (21, 22, 23),
    (23, 24, 25), (18, 26, 27), (27, 28, 29), (29, 30, 31), (30, 32, 33),
    (28, 34, 35), (35, 36, 37), (37, 38, 39), (39, 40, 41), (41, 42, 43),
    (43, 44, 45), (44, 46, 47), (46, 48, 49), (42, 50, 51), (50, 52, 53),
    (52, 54, 55),
]

AORTA = [1, 2, 14, 18, 27, 28, 35, 37, 39, 41]

GROUPS = {
    "aorta": AORTA,
    "head_shoulders": [3, 4, 5, 6, 12, 13, 15, 16, 17, 19, 20],
    "upper_limbs": [7, 8, 9, 10, 11, 21, 22, 23, 24, 25],
    "organs": [26, 29, 30, 31, 32, 33, 34, 36, 38, 40],
    "lower_limbs": [42, 43, 44, 45, 46, 47, 48, 49, 50, 51, 52, 53, 54, 55],
}

# aortic wave speed: linear profiles along the aortic arclength
AORTA_C0_MEAN = (4.5, 7.5)
AORTA_C0_STD = (0.6, 0.3)

# peripheral stiffness law Eh/r0 = k1 exp(k2 r0) + k3
K1, K2, K3 = 1.0e6, -1000.0, 4.0e4

R_TOTAL = 1.33e8  # Pa s m^-3, about 100 mmHg at 100 ml/s
C_TERMINAL = 3.0e-9  # m^3/Pa, summed over terminals
AREA_EXPONENT = 1.5


def peripheral_c0(r0):
    eh_r = K1 * math.exp(K2 * r0) + K3
    return math.sqrt(2.0 / 3.0 * eh_r / RHO)


def build_sample():
    ids = list(GEOMETRY)
    parents = {p for p, _, _ in BIFURCATIONS}
    terminals = [k for k in ids if k not in parents]
    aorta_len = sum(GEOMETRY[k][1] for k in AORTA) * 1e-2
    segments, start = [], 0.0
    c0_end = {}
    offsets = {}
    s = 0.0
    for k in AORTA:
        offsets[k] = s
        s += GEOMETRY[k][1] * 1e-2
    for k in ids:
        name, lcm, rcm = GEOMETRY[k]
        length, r0 = lcm * 1e-2, rcm * 1e-2
        A0 = math.pi * r0**2
        if k in offsets:
            x0 = offsets[k]
            xs = [0.0, length]
            vals = [
                AORTA_C0_MEAN[0] + (AORTA_C0_MEAN[1] - AORTA_C0_MEAN[0]) * (x0 + x) / aorta_len
                for x in xs
            ]
            stiff = {"kind": "c0", "values": [[x, v] for x, v in zip(xs, vals)]}
            c0_end[k] = vals[-1]
        else:
            c0 = peripheral_c0(r0)
            stiff = {"kind": "c0", "values": round(c0, 6)}
            c0_end[k] = c0
        segments.append(
            {
                "id": k,
                "name": name,
                "length_m": length,
                "A0_m2": A0,
                "stiffness": stiff,
                "p0_Pa": 0.0,
                "cells": max(1, int(round(CELLS_PER_M * length))),
                "poly_order": 3,
            }
        )
    seg_area = {k: math.pi * (GEOMETRY[k][2] * 1e-2) ** 2 for k in ids}
    w = np.array([seg_area[k] ** AREA_EXPONENT for k in terminals])
    w /= w.sum()
    terms = {}
    for k, wk in zip(terminals, w):
        R = R_TOTAL / wk
        R1 = RHO * c0_end[k] / seg_area[k]
        if R1 >= R:
            raise ValueError(f"terminal {k}: characteristic impedance exceeds total resistance")
        terms[str(k)] = {"R1": R1, "R2": R - R1, "C": C_TERMINAL * wk, "pv": 0.0}
    return {
        "name": "sample_55",
        "description": "Illustrative 55-segment systemic tree (synthetic stiffness and terminals)",
        "fluid": {"rho": RHO, "mu": MU, "alpha": 1.1},
        "segments": segments,
        "bifurcations": [list(b) for b in BIFURCATIONS],
        "inlet": 1,
        "terminals": terms,
        "aorta_path": AORTA,
        "groups": GROUPS,
        "reference_station": 5,
        "aorta_c0": {
            "mean_profile": [[0.0, AORTA_C0_MEAN[0]], [aorta_len, AORTA_C0_MEAN[1]]],
            "std_profile": [[0.0, AORTA_C0_STD[0]], [aorta_len, AORTA_C0_STD[1]]],
        },
    }


def build_bifurcation_3():
    """Minimal tree: one parent, two identical daughters."""
    seg = lambda i, name, l, r: {
        "id": i, "name": name, "length_m": l, "A0_m2": math.pi * r**2,
        "stiffness": {"kind": "c0", "values": 5.0}, "p0_Pa": 0.0, "cells": 2, "poly_order": 3,
    }
    return {
        "name": "bifurcation_3",
        "fluid": {"rho": RHO, "mu": MU, "alpha": 1.1},
        "segments": [seg(1, "parent", 0.1, 0.01), seg(2, "daughter 1", 0.1, 0.007),
                     seg(3, "daughter 2", 0.1, 0.007)],
        "bifurcations": [[1, 2, 3]],
        "inlet": 1,
        "terminals": {"2": {"R2": 2.0e9, "C": 5e-10, "pv": 0.0}, "3": {"R2": 2.0e9, "C": 5e-10, "pv": 0.0}},
        "aorta_path": [1],
        "groups": {"parent": [1], "daughters": [2, 3]},
        "reference_station": 2,
    }


def build_aortic_bifurcation():
    """Aorta splitting into two identical iliacs, wall data given as (E, h0)."""
    def seg(i, name, l, r, h, E, cells):
        return {
            "id": i, "name": name, "length_m": l, "A0_m2": math.pi * r**2,
            "stiffness": {"kind": "Eh", "values": {"E": E, "h0": h}},
            "p0_Pa": 0.0, "cells": cells, "poly_order": 3,
        }
    term = {"R1": 6.8123e7, "R2": 3.1013e9, "C": 3.6664e-10, "pv": 0.0}
    return {
        "name": "aortic_bifurcation",
        "fluid": {"rho": 1060.0, "mu": 4.0e-3, "alpha": 1.1},
        "segments": [
            seg(1, "Aorta", 0.086, 0.0086, 1.032e-3, 500.0e3, 4),
            seg(2, "R iliac", 0.085, 0.0060, 0.72e-3, 700.0e3, 4),
            seg(3, "L iliac", 0.085, 0.0060, 0.72e-3, 700.0e3, 4),
        ],
        "bifurcations": [[1, 2, 3]],
        "inlet": 1,
        "terminals": {"2": term, "3": dict(term)},
        "aorta_path": [1],
        "groups": {"aorta": [1], "iliacs": [2, 3]},
        "reference_station": 2,
    }


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for name, doc in [
        ("sample_55", build_sample()),
        ("bifurcation_3", build_bifurcation_3()),
        ("aortic_bifurcation", build_aortic_bifurcation()),
    ]:
        (OUT / f"{name}.json").write_text(json.dumps(doc, indent=1) + "\n")
        print("wrote", OUT / f"{name}.json")


if __name__ == "__main__":
    main()
