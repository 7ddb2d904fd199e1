"""ProbLife: Game of Life with probabilistic rules and continuous aliveness.

Three engines share one ruleset/grid model:

* :mod:`problife.meanfield` -- the closed-form per-cell update;
* :mod:`problife.exact` -- exact marginals by enumerating possible worlds;
* :mod:`problife.sampler` -- seeded Monte Carlo sample runs.

:mod:`problife.render` turns states into gradient-coloured PPM images.
"""
from .grid import (BoundaryPolicy, GridState, PatternError, alive_cells, format_pattern,
                   is_extinct, load_bundled_pattern, max_abs_diff, parse_pattern)
from .meanfield import find_fixed_point, neighbor_pmf, run, step
from .rules import (Ruleset, RulesetError, classic_life, format_ruleset, is_strobing,
                    parse_ruleset, standard_ruleset)

__version__ = "0.1.0"

__all__ = [
    "BoundaryPolicy", "GridState", "PatternError", "Ruleset", "RulesetError",
    "alive_cells", "classic_life", "find_fixed_point", "format_pattern",
    "format_ruleset", "is_extinct", "is_strobing", "load_bundled_pattern",
    "max_abs_diff", "neighbor_pmf", "parse_pattern", "parse_ruleset", "run",
    "standard_ruleset", "step",
]
