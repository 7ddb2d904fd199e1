"""Exact possible-worlds inference for small grids.

A world is a binary grid encoded as an integer: bit ``y * width + x`` is set
when cell ``(x, y)`` is alive. Given a world, every cell's next state is an
independent Bernoulli draw with probability ``survive[n]`` (alive) or
``birth[n]`` (dead), ``n`` being its living-neighbour count in that world.
Evolving the full distribution over worlds gives exact marginals, at a cost
of O(4**cells) per generation.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .grid import BoundaryPolicy, GridState, neighbor_counts
from .rules import Ruleset

DEFAULT_CELL_LIMIT = 12
CELL_LIMIT_ENV = "PROBLIFE_CELL_LIMIT"

# upper bound on floats in one batch of successor distributions
_BATCH_FLOATS = 1 << 21
# larger grids accumulate successors sparsely instead of in a 2**cells array
_DENSE_CELLS = 16


class ExactLimitError(ValueError):
    """The grid has too many cells for exact enumeration."""


def default_cell_limit() -> int:
    raw = os.environ.get(CELL_LIMIT_ENV)
    if raw is None or raw.strip() == "":
        return DEFAULT_CELL_LIMIT
    try:
        limit = int(raw)
    except ValueError:
        raise ValueError(f"{CELL_LIMIT_ENV} must be an integer, got {raw!r}") from None
    if limit < 1:
        raise ValueError(f"{CELL_LIMIT_ENV} must be positive")
    return limit


@dataclass(frozen=True)
class WorldDistribution:
    """Probability mass over binary worlds; zero-mass worlds are absent."""

    width: int
    height: int
    mass: dict[int, float]

    def __post_init__(self):
        n = self.width * self.height
        for w, p in self.mass.items():
            if not 0 <= w < (1 << n):
                raise ValueError(f"world {w} does not fit {n} cells")
            if p < 0:
                raise ValueError("negative probability mass")
        total = self.total()
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"total mass {total!r} is not 1")

    @property
    def cells(self) -> int:
        return self.width * self.height

    def total(self) -> float:
        return float(sum(self.mass[w] for w in sorted(self.mass)))

    def world_grid(self, world: int, generation: int = 0) -> GridState:
        return GridState(_decode(np.array([world]), self.width, self.height)[0], generation)

    def __len__(self) -> int:
        return len(self.mass)


def _decode(worlds: np.ndarray, width: int, height: int) -> np.ndarray:
    n = width * height
    bits = (worlds[:, None].astype(np.int64) >> np.arange(n, dtype=np.int64)) & 1
    return bits.reshape(-1, height, width).astype(bool)


def encode_world(s: GridState) -> int:
    """Integer id of a binary grid."""
    if not s.is_binary():
        raise ValueError("only binary grids name a single world")
    return sum(1 << i for i, v in enumerate(s.values.ravel()) if v)


def initial_distribution(s: GridState) -> WorldDistribution:
    """Independent Bernoulli start: each cell alive with probability equal to its value."""
    flat = s.values.ravel()
    worlds = {encode_world(GridState((s.values == 1.0).astype(float))): 1.0}
    for i, v in enumerate(flat):
        if v in (0.0, 1.0):
            continue
        nxt: dict[int, float] = {}
        bit = 1 << i
        for w, p in worlds.items():
            nxt[w] = p * (1.0 - v)
            nxt[w | bit] = p * v
        worlds = nxt
    worlds = {w: worlds[w] for w in sorted(worlds) if worlds[w] > 0.0}
    return WorldDistribution(s.width, s.height, worlds)


def firing_probabilities(worlds: np.ndarray, width: int, height: int, r: Ruleset,
                         boundary: BoundaryPolicy) -> np.ndarray:
    """Per-cell probability of being alive next generation, for each source
    world. Shape ``(len(worlds), width * height)``."""
    alive = _decode(worlds, width, height)
    counts = neighbor_counts(alive, boundary)
    survive = np.asarray(r.survive)[counts]
    birth = np.asarray(r.birth)[counts]
    return np.where(alive, survive, birth).reshape(len(worlds), -1)


def _successor_matrix(q: np.ndarray) -> np.ndarray:
    # row i: product distribution over all 2**n successor worlds of source i
    probs = np.ones((q.shape[0], 1))
    for c in range(q.shape[1]):
        qc = q[:, c:c + 1]
        probs = np.concatenate([probs * (1.0 - qc), probs * qc], axis=1)
    return probs


def _evolve_dense(masses: np.ndarray, q: np.ndarray) -> dict[int, float]:
    n = q.shape[1]
    total = np.zeros(1 << n)
    batch = max(1, _BATCH_FLOATS >> n)
    for lo in range(0, len(masses), batch):
        succ = _successor_matrix(q[lo:lo + batch])
        # ascending source order keeps the accumulation bit-reproducible
        for m, row in zip(masses[lo:lo + batch], succ):
            total += m * row
    return {int(w): float(total[w]) for w in np.flatnonzero(total)}


def _evolve_sparse(masses: np.ndarray, q: np.ndarray) -> dict[int, float]:
    # Only cells with 0 < q < 1 branch, so each source has 2**k successors.
    bits = np.left_shift(1, np.arange(q.shape[1], dtype=np.int64))
    all_idx, all_val = [], []
    for m, qs in zip(masses, q):
        idx = np.array([int(bits[qs == 1.0].sum())], dtype=np.int64)
        val = np.array([m])
        for c in np.flatnonzero((qs > 0.0) & (qs < 1.0)):
            idx = np.concatenate([idx, idx | bits[c]])
            val = np.concatenate([val * (1.0 - qs[c]), val * qs[c]])
        all_idx.append(idx)
        all_val.append(val)
    worlds, inverse = np.unique(np.concatenate(all_idx), return_inverse=True)
    # bincount adds weights sequentially in input (= ascending source) order
    sums = np.bincount(inverse, weights=np.concatenate(all_val), minlength=len(worlds))
    return {int(w): float(p) for w, p in zip(worlds, sums) if p > 0.0}


def evolve_distribution(d: WorldDistribution, r: Ruleset,
                        boundary: BoundaryPolicy = BoundaryPolicy.DEAD,
                        cell_limit: int | None = None) -> WorldDistribution:
    """Exact distribution over worlds one generation later.

    Raises :class:`ExactLimitError` when the grid has more than ``cell_limit``
    cells (default 12, or ``$PROBLIFE_CELL_LIMIT``).
    """
    if cell_limit is None:
        cell_limit = default_cell_limit()
    n = d.cells
    if n > cell_limit:
        raise ExactLimitError(
            f"{d.width}x{d.height} grid has {n} cells, exact limit is {cell_limit}; "
            "use the sampler or raise the cell limit")
    sources = np.array(sorted(d.mass), dtype=np.int64)
    masses = np.array([d.mass[w] for w in sources])
    q = firing_probabilities(sources, d.width, d.height, r, boundary)
    if n <= _DENSE_CELLS:
        mass = _evolve_dense(masses, q)
    else:
        mass = _evolve_sparse(masses, q)
    return WorldDistribution(d.width, d.height, mass)


def exact_marginals(d: WorldDistribution, generation: int = 0) -> GridState:
    """Per-cell probability of being alive."""
    worlds = np.array(sorted(d.mass), dtype=np.int64)
    masses = np.array([d.mass[w] for w in worlds])
    alive = _decode(worlds, d.width, d.height)
    acc = np.zeros((d.height, d.width))
    for m, a in zip(masses, alive):
        acc += m * a
    np.clip(acc, 0.0, 1.0, out=acc)
    return GridState(acc, generation)


def run_exact(s: GridState, r: Ruleset, steps: int,
              boundary: BoundaryPolicy = BoundaryPolicy.DEAD,
              cell_limit: int | None = None) -> list[GridState]:
    """Exact marginals for generations ``s.generation .. s.generation + steps``."""
    if steps < 0:
        raise ValueError("steps must be non-negative")
    if cell_limit is None:
        cell_limit = default_cell_limit()
    if steps and s.width * s.height > cell_limit:
        raise ExactLimitError(
            f"{s.width}x{s.height} grid has {s.width * s.height} cells, "
            f"exact limit is {cell_limit}")
    d = initial_distribution(s)
    out = [exact_marginals(d, s.generation)]
    for k in range(1, steps + 1):
        d = evolve_distribution(d, r, boundary, cell_limit)
        out.append(exact_marginals(d, s.generation + k))
    return out
