"""Monte Carlo sample runs and marginal estimates.

Randomness contract
-------------------
Every trajectory owns an independent SplitMix64 stream. The stream key is

    key = mix64(mix64(seed + GOLDEN) + index * GOLDEN)

and draw ``k`` (0-based) of the stream is ``mix64(key + (k + 1) * GOLDEN)``,
all arithmetic modulo 2**64, where ``mix64`` is the SplitMix64 finaliser
and ``GOLDEN = 0x9E3779B97F4A7C15``. A draw becomes a uniform double in
[0, 1) from its top 53 bits. A cell comes alive when its draw is below its
firing probability.

Draws are consumed in a fixed order: when the start grid is not binary, one
draw per cell (row-major) first realises generation 0; then each generation
consumes one draw per cell, row-major. Because draw ``k`` of trajectory
``i`` depends only on ``(seed, i, k)``, trajectories can be computed in any
grouping or order and still give identical results.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .grid import BoundaryPolicy, GridState, neighbor_counts
from .rules import Ruleset

_MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_GOLDEN = np.uint64(GOLDEN)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_TO_UNIT = 2.0 ** -53

DEFAULT_CHUNK = 8192


def mix64(z: np.ndarray) -> np.ndarray:
    """SplitMix64 output function on a uint64 array (wrapping arithmetic)."""
    z = np.asarray(z, dtype=np.uint64)
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def stream_keys(seed: int, indices) -> np.ndarray:
    """Stream keys for trajectory ``indices`` under ``seed``."""
    base = mix64(np.array([(seed + GOLDEN) & _MASK64], dtype=np.uint64))
    idx = np.atleast_1d(np.asarray(indices, dtype=np.uint64))
    return mix64(base + idx * _GOLDEN)


def _uniforms(keys: np.ndarray, start: int, count: int) -> np.ndarray:
    """Draws ``start .. start + count - 1`` of each stream, shape ``(len(keys), count)``."""
    ctr = np.arange(start + 1, start + count + 1, dtype=np.uint64) * _GOLDEN
    raw = mix64(keys[:, None] + ctr[None, :])
    return (raw >> np.uint64(11)).astype(np.float64) * _TO_UNIT


class SplitMixStream:
    """One trajectory's random stream; ``random(size)`` advances the counter."""

    def __init__(self, seed: int = 0, index: int = 0, *, key: int | None = None):
        if key is None:
            key = int(stream_keys(seed, [index])[0])
        self.key = np.array([key], dtype=np.uint64)
        self.counter = 0

    def random(self, size: int) -> np.ndarray:
        out = _uniforms(self.key, self.counter, size)[0]
        self.counter += size
        return out


def _next_worlds(alive: np.ndarray, r: Ruleset, boundary: BoundaryPolicy,
                 draws: np.ndarray) -> np.ndarray:
    counts = neighbor_counts(alive, boundary)
    q = np.where(alive, np.asarray(r.survive)[counts], np.asarray(r.birth)[counts])
    return draws < q


def sample_step(w: GridState, r: Ruleset, boundary: BoundaryPolicy, rng) -> GridState:
    """One sampled generation from binary grid ``w``.

    ``rng`` is anything with a ``random(size)`` method returning uniforms in
    [0, 1): a :class:`SplitMixStream` or a :class:`numpy.random.Generator`.
    """
    if not w.is_binary():
        raise ValueError("sample_step needs a binary grid")
    draws = np.asarray(rng.random(w.width * w.height)).reshape(w.shape)
    nxt = _next_worlds(w.values.astype(bool), r, boundary, draws)
    return GridState(nxt.astype(float), w.generation + 1)


def sample_trajectory(s0: GridState, r: Ruleset, steps: int,
                      boundary: BoundaryPolicy = BoundaryPolicy.DEAD,
                      seed: int = 0, index: int = 0) -> list[GridState]:
    """One possible world: ``steps + 1`` binary grids starting from ``s0``.

    A non-binary ``s0`` is first realised cell-wise, so the returned first
    grid is then a sample of ``s0`` rather than ``s0`` itself.
    """
    if steps < 0:
        raise ValueError("steps must be non-negative")
    rng = SplitMixStream(seed, index)
    if s0.is_binary():
        start = s0
    else:
        draws = rng.random(s0.width * s0.height).reshape(s0.shape)
        start = GridState((draws < s0.values).astype(float), s0.generation)
    out = [start]
    for _ in range(steps):
        out.append(sample_step(out[-1], r, boundary, rng))
    return out


@dataclass(frozen=True)
class SampleEstimate:
    """Monte Carlo estimate of per-cell aliveness at one generation."""

    means: np.ndarray
    stderr: np.ndarray
    samples: int
    generation: int = 0

    def as_grid(self) -> GridState:
        return GridState(self.means, self.generation)


def _count_chunk(s0: GridState, r: Ruleset, steps: int, boundary: BoundaryPolicy,
                 seed: int, lo: int, hi: int) -> np.ndarray:
    cells = s0.width * s0.height
    keys = stream_keys(seed, np.arange(lo, hi))
    counts = np.zeros((steps + 1,) + s0.shape, dtype=np.int64)
    offset = 0
    if s0.is_binary():
        alive = np.broadcast_to(s0.values.astype(bool), (hi - lo,) + s0.shape)
    else:
        draws = _uniforms(keys, 0, cells).reshape((hi - lo,) + s0.shape)
        alive = draws < s0.values
        offset = cells
    counts[0] = alive.sum(axis=0)
    for t in range(steps):
        draws = _uniforms(keys, offset + t * cells, cells).reshape((hi - lo,) + s0.shape)
        alive = _next_worlds(alive, r, boundary, draws)
        counts[t + 1] = alive.sum(axis=0)
    return counts


def alive_counts(s0: GridState, r: Ruleset, steps: int, n: int,
                 boundary: BoundaryPolicy = BoundaryPolicy.DEAD, seed: int = 0,
                 workers: int = 1, chunk: int = DEFAULT_CHUNK) -> np.ndarray:
    """Integer alive counts over trajectories ``0 .. n-1``, shape ``(steps + 1, h, w)``.

    Chunks may run on several threads; integer summation makes the result
    independent of ``workers`` and ``chunk``.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    if steps < 0:
        raise ValueError("steps must be non-negative")
    bounds = [(lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]

    def job(b):
        return _count_chunk(s0, r, steps, boundary, seed, *b)

    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(job, bounds))
    else:
        parts = [job(b) for b in bounds]
    return sum(parts[1:], parts[0])


def _estimate(counts: np.ndarray, n: int, generation: int) -> SampleEstimate:
    means = counts / n
    stderr = np.sqrt(means * (1.0 - means) / n)
    return SampleEstimate(means, stderr, n, generation)


def estimate_marginals(s0: GridState, r: Ruleset, steps: int, n: int,
                       boundary: BoundaryPolicy = BoundaryPolicy.DEAD, seed: int = 0,
                       workers: int = 1) -> SampleEstimate:
    """Fraction of ``n`` sampled trajectories in which each cell is alive at
    the final generation."""
    counts = alive_counts(s0, r, steps, n, boundary, seed, workers)
    return _estimate(counts[-1], n, s0.generation + steps)


def estimate_all_generations(s0: GridState, r: Ruleset, steps: int, n: int,
                             boundary: BoundaryPolicy = BoundaryPolicy.DEAD,
                             seed: int = 0, workers: int = 1) -> list[SampleEstimate]:
    """Like :func:`estimate_marginals`, for every generation."""
    counts = alive_counts(s0, r, steps, n, boundary, seed, workers)
    return [_estimate(c, n, s0.generation + t) for t, c in enumerate(counts)]
