"""Closed-form ProbLife update.

Each cell's next value is

    sum_n N(n) * (survive[n] * C + birth[n] * (1 - C))

where ``C`` is the cell's current value and ``N`` is the Poisson-binomial
distribution of its living-neighbour count, with the eight neighbours
treated as independent Bernoulli variables. From a binary start this is
exact for the first two generations; afterwards neighbouring cells share
ancestors and the independence assumption is an approximation (see
:mod:`problife.exact`).
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .grid import BoundaryPolicy, GridState, NEIGHBOR_OFFSETS, max_abs_diff, neighbor_planes
from .rules import NUM_COUNTS, Ruleset


def _pb_update(pmf: np.ndarray, p) -> np.ndarray:
    # new[k] = old[k] * (1 - p) + old[k - 1] * p
    new = pmf * (1.0 - p)
    new[1:] += pmf[:-1] * p
    return new


def neighbor_pmf(s: GridState, x: int, y: int,
                 boundary: BoundaryPolicy = BoundaryPolicy.DEAD) -> np.ndarray:
    """Distribution of the number of living neighbours of cell ``(x, y)``.

    Returns a length-9 array; entry ``n`` is the probability of exactly ``n``
    living neighbours.
    """
    if not (0 <= x < s.width and 0 <= y < s.height):
        raise IndexError(f"cell ({x}, {y}) outside {s.width}x{s.height} grid")
    pmf = np.zeros(NUM_COUNTS)
    pmf[0] = 1.0
    for dy, dx in NEIGHBOR_OFFSETS:
        nx, ny = x + dx, y + dy
        if boundary is BoundaryPolicy.TOROIDAL:
            p = s.values[ny % s.height, nx % s.width]
        elif 0 <= nx < s.width and 0 <= ny < s.height:
            p = s.values[ny, nx]
        else:
            p = 0.0
        pmf = _pb_update(pmf, p)
    return pmf


def neighbor_pmf_grid(values: np.ndarray, boundary: BoundaryPolicy) -> np.ndarray:
    """Vectorised :func:`neighbor_pmf` for every cell: shape ``(9, h, w)``.

    Performs the same floating-point operations in the same order as the
    per-cell version, so results are bit-identical.
    """
    pmf = np.zeros((NUM_COUNTS,) + values.shape)
    pmf[0] = 1.0
    for plane in neighbor_planes(values, boundary):
        pmf = _pb_update(pmf, plane)
    return pmf


def step(s: GridState, r: Ruleset,
         boundary: BoundaryPolicy = BoundaryPolicy.DEAD) -> GridState:
    c = s.values
    pmf = neighbor_pmf_grid(c, boundary)
    dead = 1.0 - c
    acc = np.zeros_like(c)
    for n in range(NUM_COUNTS):
        acc = acc + pmf[n] * (r.survive[n] * c + r.birth[n] * dead)
    # a convex combination, but rounding can overshoot 1 by an ulp
    np.clip(acc, 0.0, 1.0, out=acc)
    return GridState(acc, s.generation + 1)


def run(s: GridState, r: Ruleset, steps: int,
        boundary: BoundaryPolicy = BoundaryPolicy.DEAD) -> list[GridState]:
    """``[s, step(s), step(step(s)), ...]``, ``steps + 1`` states in total."""
    if steps < 0:
        raise ValueError("steps must be non-negative")
    states = [s]
    for _ in range(steps):
        states.append(step(states[-1], r, boundary))
    return states


def find_fixed_point(states: Sequence[GridState], eps: float = 0.0) -> int | None:
    """Smallest ``k`` with ``max_abs_diff(states[k], states[k + 1]) <= eps``."""
    if eps < 0:
        raise ValueError("eps must be non-negative")
    for k in range(len(states) - 1):
        if max_abs_diff(states[k], states[k + 1]) <= eps:
            return k
    return None
