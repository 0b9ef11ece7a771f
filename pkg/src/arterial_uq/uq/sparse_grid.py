"""Smolyak sparse cubature built on nested Gauss-Patterson rules."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

import numpy as np

from .patterson import patterson_rule


@dataclass(frozen=True)
class SparseGrid:
    """Sparse cubature on [-1, 1]^N under the uniform probability measure.

    Attributes
    ----------
    dim : int
        Number of random dimensions N.
    level : int
        Smolyak level (1-based); level 1 is the single centre point.
    nodes : ndarray, shape (n_nodes, dim)
    weights : ndarray, shape (n_nodes,)
        Combination weights; they sum to one. Some are negative.
    """

    dim: int
    level: int
    nodes: np.ndarray
    weights: np.ndarray

    def __len__(self) -> int:
        return len(self.weights)

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Cubature of sampled values (first axis runs over nodes)."""
        values = np.asarray(values, dtype=float)
        if values.shape[0] != len(self):
            raise ValueError(f"expected {len(self)} samples, got {values.shape[0]}")
        return np.tensordot(self.weights, values, axes=(0, 0))


def _nested_1d(max_index: int):
    """Union of nested 1D nodes and, for each rule index, (node ids, weights)."""
    x_top, _ = patterson_rule(max_index)
    rules = {}
    for i in range(1, max_index + 1):
        x, w = patterson_rule(i)
        ids = np.array([int(np.argmin(np.abs(x_top - xi))) for xi in x])
        if np.max(np.abs(x_top[ids] - x)) > 1e-13:
            raise RuntimeError("Gauss-Patterson table is not nested")
        rules[i] = (ids, w)
    return x_top, rules


def _compositions(total: int, parts: int):
    """All tuples of ``parts`` positive integers summing to ``total``."""
    for cuts in itertools.combinations(range(1, total), parts - 1):
        bounds = (0,) + cuts + (total,)
        yield tuple(bounds[k + 1] - bounds[k] for k in range(parts))


def build_grid(dim: int, level: int) -> SparseGrid:
    """Smolyak combination of 1D Gauss-Patterson rules.

    Level ``l`` uses multi-indices ``i`` (entries >= 1, rule ``i_k`` having
    ``2**i_k - 1`` points) with ``N <= |i| <= N + l - 1``.  With this
    convention (N=3, l=5), (N=4, l=5) and (N=6, l=4) give 351, 769 and 545
    nodes.

    Duplicate nodes across the tensor grids are merged and their combination
    weights summed.
    """
    if dim < 1 or level < 1:
        raise ValueError(f"dimension and level must be >= 1 (got N={dim}, l={level})")
    q = dim + level - 1
    x_top, rules = _nested_1d(level)
    acc: dict[tuple[int, ...], float] = {}
    for total in range(max(dim, q - dim + 1), q + 1):
        coef = (-1) ** (q - total) * comb(dim - 1, q - total)
        for idx in _compositions(total, dim):
            id_lists = [rules[i][0] for i in idx]
            w_lists = [rules[i][1] for i in idx]
            for combo in itertools.product(*[range(len(ids)) for ids in id_lists]):
                key = tuple(int(id_lists[k][c]) for k, c in enumerate(combo))
                w = coef
                for k, c in enumerate(combo):
                    w *= w_lists[k][c]
                acc[key] = acc.get(key, 0.0) + w
    keys = sorted(acc)
    nodes = x_top[np.array(keys, dtype=int)].reshape(len(keys), dim)
    weights = np.array([acc[k] for k in keys])
    return SparseGrid(dim=dim, level=level, nodes=nodes, weights=weights)


def grid_size(dim: int, level: int) -> int:
    """Node count of :func:`build_grid` without building it."""
    q = dim + level - 1

    def new_points(i):
        return 1 if i == 1 else 2 ** (i - 1)

    count = 0
    for total in range(dim, q + 1):
        for idx in _compositions(total, dim):
            count += int(np.prod([new_points(i) for i in idx]))
    return count
