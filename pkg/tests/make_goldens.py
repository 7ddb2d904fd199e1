"""Regenerate the frozen golden PPMs in tests/golden/.

Run only when the rendering contract changes deliberately:
    python tests/make_goldens.py
"""
from pathlib import Path

from problife.grid import load_bundled_pattern
from problife.meanfield import run
from problife.render import RenderSpec, render_sequence
from problife.rules import standard_ruleset

GOLDEN_DIR = Path(__file__).parent / "golden"
GOLDEN_SPEC = RenderSpec(cell_size=8, gridlines=True)
FIGURES = ("fig2", "fig3", "fig4", "fig5")


def golden_name(fig: str) -> str:
    return str(GOLDEN_DIR / f"{fig}_gen{{:03}}.ppm")


def main():
    GOLDEN_DIR.mkdir(exist_ok=True)
    for fig in FIGURES:
        states = run(load_bundled_pattern(fig), standard_ruleset(), 2)
        for path in render_sequence(states, GOLDEN_SPEC, golden_name(fig)):
            print(path)


if __name__ == "__main__":
    main()
