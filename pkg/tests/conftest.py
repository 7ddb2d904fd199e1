"""Shared fixtures and independent oracles.

The oracles here are deliberately naive (enumeration, nested loops) and
share no code with the engines they check.
"""
import itertools
from pathlib import Path

import numpy as np
import pytest

from problife.grid import GridState, load_bundled_pattern
from problife.rules import parse_ruleset

GOLDEN_DIR = Path(__file__).parent / "golden"

STANDARD = "B3:0.8/S2:0.9,3:0.9"

# Fig. 1: classic Life, live cells (x, y) per generation
FIG1_STATES = [
    {(1, 1), (2, 1), (3, 3), (2, 4), (3, 4)},
    {(2, 2), (2, 3), (3, 3), (2, 4), (3, 4)},
    {(2, 2), (3, 2), (1, 3), (2, 4), (3, 4)},
]

# Fig. 2: values printed in the cells
FIG2_GEN1 = {(2, 2): 0.8, (2, 3): 0.8, (3, 3): 0.9, (2, 4): 0.9, (3, 4): 0.9}
FIG2_GEN2_ROUNDED = {(2, 2): 0.52, (3, 2): 0.46, (1, 3): 0.46, (2, 3): 0.35,
                     (3, 3): 0.41, (2, 4): 0.82, (3, 4): 0.82}

# Hue argument of the figure cell macros at generation 2; the printed Fig. 2
# cells show hue = (1 - value) / 2.
FIG_GEN2_HUES = {
    "fig2": {(2, 2): 0.24, (3, 2): 0.27, (1, 3): 0.27, (2, 3): 0.325, (3, 3): 0.295,
             (2, 4): 0.09, (3, 4): 0.09},
    "fig3": {(2, 2): 0.2408, (3, 2): 0.2408, (1, 3): 0.27, (2, 3): 0.27288,
             (3, 3): 0.27288, (4, 3): 0.27, (2, 4): 0.1049, (3, 4): 0.1049},
    "fig4": {(3, 1): 0.2696, (3, 2): 0.24},
    # the figure draws the two 0.2696 cells one column further out than any
    # three-neighbour cell; (4, 1) and (1, 5) see at most two live neighbours
    "fig5": {(3, 1): 0.2696, (2, 2): 0.11984, (3, 2): 0.2555, (4, 2): 0.2408,
             (1, 3): 0.34128, (2, 3): 0.4742305, (3, 3): 0.4742305, (4, 3): 0.34128,
             (1, 4): 0.2408, (2, 4): 0.2555, (3, 4): 0.11984, (2, 5): 0.2696},
}


def brute_force_pmf(ps):
    """Neighbour-count distribution by summing over all 2**len(ps) outcomes."""
    pmf = [0.0] * 9
    for outcome in itertools.product((0, 1), repeat=len(ps)):
        prob = 1.0
        for bit, p in zip(outcome, ps):
            prob *= p if bit else 1.0 - p
        pmf[sum(outcome)] += prob
    return pmf


def life_step_reference(cells, width, height):
    """Conway's Life on a bounded grid, cells as a set of (x, y)."""
    nxt = set()
    for y in range(height):
        for x in range(width):
            n = sum((x + dx, y + dy) in cells
                    for dx in (-1, 0, 1) for dy in (-1, 0, 1) if dx or dy)
            if (x, y) in cells and n in (2, 3):
                nxt.add((x, y))
            elif (x, y) not in cells and n == 3:
                nxt.add((x, y))
    return nxt


def cells_of(s: GridState):
    return {(x, y) for y in range(s.height) for x in range(s.width) if s.values[y, x] == 1.0}


def blinker_3x3() -> GridState:
    return GridState.from_cells(3, 3, [(0, 1), (1, 1), (2, 1)])


DIVERGENT_RULES = STANDARD
SAMPLER_RULES = "B2:0.5,3:0.8/S1:0.3,2:0.9,3:0.9,4:0.4"


@pytest.fixture
def fig2_start():
    return load_bundled_pattern("fig2")


@pytest.fixture
def standard():
    return parse_ruleset(STANDARD)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    import test_acceptance
    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(test_acceptance.RESULTS, key=lambda l: int(l.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
