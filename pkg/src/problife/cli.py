"""``problife`` command line.

Subcommands: ``run`` (closed-form engine), ``exact`` (possible-worlds
marginals), ``sample`` (Monte Carlo), ``compare`` (closed form against a
reference engine) and ``render`` (PPM frames).

Exit statuses: 0 success, 1 usage error, 2 ruleset/pattern/config parse
error, 3 grid too large for exact inference, 4 I/O failure.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass
from typing import Sequence, TextIO

import numpy as np

from . import exact, meanfield, sampler
from .grid import (BoundaryPolicy, GridState, PatternError, bundled_pattern_names,
                   format_pattern, load_bundled_pattern, parse_pattern, total_mass)
from .render import RenderSpec, render_sequence
from .rules import Ruleset, RulesetError, format_ruleset, parse_ruleset

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_LIMIT, EXIT_IO = 0, 1, 2, 3, 4

DEFAULTS = {
    "rules": None,
    "pattern": None,
    "steps": 1,
    "engine": None,
    "samples": 1000,
    "seed": 0,
    "index": 0,
    "trajectory": False,
    "all_generations": False,
    "boundary": "dead",
    "cell_limit": None,
    "precision": 6,
    "out": None,
    "format": None,
    "cell_size": 16,
    "gridlines": False,
    "workers": 1,
}
_INT_KEYS = {"steps", "samples", "seed", "index", "cell_limit", "precision", "cell_size", "workers"}
_BOOL_KEYS = {"trajectory", "all_generations", "gridlines"}
_ENGINES = ("meanfield", "exact", "sample")
_DEFAULT_ENGINE = {"run": "meanfield", "exact": "exact", "sample": "sample",
                   "compare": "exact", "render": "meanfield"}


class UsageError(Exception):
    pass


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


@dataclass
class RunConfig:
    command: str
    rules: Ruleset
    rules_text: str
    pattern: str
    steps: int
    boundary: BoundaryPolicy
    engine: str
    samples: int
    seed: int
    index: int
    trajectory: bool
    all_generations: bool
    cell_limit: int
    precision: int
    out: str | None
    format: str
    render_spec: RenderSpec
    workers: int


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    S = argparse.SUPPRESS
    common.add_argument("--rules", default=S, help='ruleset, e.g. "B3:0.8/S2:0.9,3:0.9"')
    common.add_argument("--pattern", default=S,
                        help="pattern file ('-' for stdin); bundled names like fig2.cells also work")
    common.add_argument("--steps", type=int, default=S, help="generations to simulate (default 1)")
    common.add_argument("--engine", choices=_ENGINES, default=S)
    common.add_argument("--samples", type=int, default=S, help="trajectories for the sampler (default 1000)")
    common.add_argument("--seed", type=int, default=S, help="sampler seed (default 0)")
    common.add_argument("--index", type=int, default=S, help="trajectory index for --trajectory (default 0)")
    common.add_argument("--trajectory", action="store_true", default=S,
                        help="emit one sampled trajectory instead of estimates")
    common.add_argument("--all-generations", dest="all_generations", action="store_true",
                        default=S, help="report sampler estimates for every generation")
    common.add_argument("--boundary", choices=("dead", "wrap", "toroidal"), default=S)
    common.add_argument("--cell-limit", dest="cell_limit", type=int, default=S,
                        help="largest grid (in cells) for exact inference (default 12)")
    common.add_argument("--precision", type=int, default=S, help="decimal places, 1..17 (default 6)")
    common.add_argument("--out", default=S,
                        help="output file; a template such as gen{:03}.ppm writes one file per generation")
    common.add_argument("--format", choices=("csv", "pattern", "ppm"), default=S)
    common.add_argument("--cell-size", dest="cell_size", type=int, default=S, help="pixels per cell")
    common.add_argument("--gridlines", action="store_true", default=S)
    common.add_argument("--workers", type=int, default=S, help="sampler threads (results do not depend on it)")
    common.add_argument("--config", default=S, help="key=value file supplying defaults for these flags")

    parser = _Parser(prog="problife", description="Probabilistic Game of Life simulator")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True
    sub.add_parser("run", parents=[common], help="iterate the closed-form update")
    sub.add_parser("exact", parents=[common], help="exact marginals by enumerating worlds")
    sub.add_parser("sample", parents=[common], help="sampled trajectory or Monte Carlo estimates")
    sub.add_parser("compare", parents=[common], help="closed form vs exact/sampled marginals")
    sub.add_parser("render", parents=[common], help="write one PPM image per generation")
    return parser


def read_config(path: str) -> dict:
    """Parse a ``key = value`` file; keys are flag names without dashes."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    out = {}
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{no}: expected key=value")
        key, value = (p.strip() for p in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in DEFAULTS:
            raise ConfigError(f"{path}:{no}: unknown key {key!r}")
        if key in _INT_KEYS:
            try:
                out[key] = int(value)
            except ValueError:
                raise ConfigError(f"{path}:{no}: {key} must be an integer") from None
        elif key in _BOOL_KEYS:
            if value.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise ConfigError(f"{path}:{no}: {key} must be a boolean")
            out[key] = value.lower() in ("true", "1", "yes")
        else:
            out[key] = value
    return out


def _load_pattern(path: str) -> GridState:
    if path == "-":
        return parse_pattern(sys.stdin.read())
    if not os.path.exists(path):
        name = os.path.basename(path)
        if path == name and name in bundled_pattern_names():
            return load_bundled_pattern(name)
    with open(path, encoding="utf-8") as fh:
        return parse_pattern(fh.read())


def make_config(args: argparse.Namespace) -> RunConfig:
    given = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    settings = dict(DEFAULTS)
    if getattr(args, "config", None):
        settings.update(read_config(args.config))
    settings.update(given)

    if settings["rules"] is None:
        raise UsageError("--rules is required")
    rules = parse_ruleset(settings["rules"])
    if settings["pattern"] is None:
        raise UsageError("--pattern is required")
    for key in ("steps", "index"):
        if settings[key] < 0:
            raise UsageError(f"--{key} must be non-negative")
    if settings["samples"] < 1:
        raise UsageError("--samples must be at least 1")
    if not 1 <= settings["precision"] <= 17:
        raise UsageError("--precision must be in 1..17")
    if settings["workers"] < 1:
        raise UsageError("--workers must be at least 1")
    if settings["cell_size"] < 1:
        raise UsageError("--cell-size must be at least 1")
    try:
        cell_limit = settings["cell_limit"]
        if cell_limit is None:
            cell_limit = exact.default_cell_limit()
        boundary = BoundaryPolicy.from_name(settings["boundary"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if cell_limit < 1:
        raise UsageError("--cell-limit must be positive")
    engine = settings["engine"] or _DEFAULT_ENGINE[args.command]
    if engine not in _ENGINES:
        raise UsageError(f"unknown engine {engine!r}")
    fmt = settings["format"] or ("ppm" if args.command == "render" else "csv")
    if fmt not in ("csv", "pattern", "ppm"):
        raise UsageError(f"unknown format {fmt!r}")
    if args.command == "render" and fmt != "ppm":
        raise UsageError("render only writes ppm")
    return RunConfig(
        command=args.command, rules=rules, rules_text=format_ruleset(rules),
        pattern=settings["pattern"], steps=settings["steps"], boundary=boundary,
        engine=engine, samples=settings["samples"], seed=settings["seed"],
        index=settings["index"], trajectory=bool(settings["trajectory"]),
        all_generations=bool(settings["all_generations"]), cell_limit=cell_limit,
        precision=settings["precision"], out=settings["out"], format=fmt,
        render_spec=RenderSpec(cell_size=settings["cell_size"], gridlines=bool(settings["gridlines"])),
        workers=settings["workers"],
    )


def format_csv_grid(values: np.ndarray, precision: int) -> str:
    return "".join(",".join(f"{v:.{precision}f}" for v in row) + "\n" for row in values)


def _grid_block(cfg: RunConfig, s: GridState, label: str, values=None) -> str:
    head = f"# generation={s.generation} rules={cfg.rules_text} {label}\n"
    if cfg.format == "pattern":
        body = format_pattern(GridState(values, s.generation) if values is not None else s,
                              cfg.precision)
    else:
        body = format_csv_grid(s.values if values is None else values, cfg.precision)
    return head + body


def _write_text(cfg: RunConfig, blocks: list[tuple[int, str]], stdout: TextIO):
    if cfg.out and "{" in cfg.out:
        for gen, block in blocks:
            path = cfg.out.format(gen)
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(block)
        return
    text = "\n".join(block for _, block in blocks)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        stdout.write(text)


def _emit_states(cfg: RunConfig, states: list[GridState], label: str, stdout: TextIO):
    if cfg.format == "ppm":
        paths = render_sequence(states, cfg.render_spec, cfg.out or "gen{:03}.ppm")
        for p in paths:
            print(p, file=stdout)
        return
    _write_text(cfg, [(s.generation, _grid_block(cfg, s, label)) for s in states], stdout)


def _meanfield_states(cfg: RunConfig, start: GridState) -> list[GridState]:
    return meanfield.run(start, cfg.rules, cfg.steps, cfg.boundary)


def _exact_states(cfg: RunConfig, start: GridState) -> list[GridState]:
    return exact.run_exact(start, cfg.rules, cfg.steps, cfg.boundary, cfg.cell_limit)


def _sampled_estimates(cfg: RunConfig, start: GridState) -> list[sampler.SampleEstimate]:
    return sampler.estimate_all_generations(start, cfg.rules, cfg.steps, cfg.samples,
                                            cfg.boundary, cfg.seed, cfg.workers)


def cmd_run(cfg: RunConfig, stdout: TextIO = sys.stdout) -> int:
    if cfg.engine == "exact":
        return cmd_exact(cfg, stdout)
    if cfg.engine == "sample":
        return cmd_sample(cfg, stdout)
    start = _load_pattern(cfg.pattern)
    _emit_states(cfg, _meanfield_states(cfg, start), "engine=meanfield", stdout)
    return EXIT_OK


def cmd_exact(cfg: RunConfig, stdout: TextIO = sys.stdout) -> int:
    start = _load_pattern(cfg.pattern)
    _emit_states(cfg, _exact_states(cfg, start), "engine=exact", stdout)
    return EXIT_OK


def cmd_sample(cfg: RunConfig, stdout: TextIO = sys.stdout) -> int:
    start = _load_pattern(cfg.pattern)
    if cfg.trajectory:
        states = sampler.sample_trajectory(start, cfg.rules, cfg.steps, cfg.boundary,
                                           cfg.seed, cfg.index)
        _emit_states(cfg, states, f"engine=sample seed={cfg.seed} index={cfg.index}", stdout)
        return EXIT_OK
    estimates = _sampled_estimates(cfg, start)
    if not cfg.all_generations:
        estimates = estimates[-1:]
    if cfg.format == "ppm":
        _emit_states(cfg, [e.as_grid() for e in estimates], "", stdout)
        return EXIT_OK
    blocks = []
    tag = f"engine=sample seed={cfg.seed} samples={cfg.samples}"
    for e in estimates:
        g = e.as_grid()
        blocks.append((e.generation, _grid_block(cfg, g, f"{tag} stat=mean")))
        blocks.append((e.generation, _grid_block(cfg, g, f"{tag} stat=stderr", e.stderr)))
    if cfg.out and "{" in cfg.out:
        merged: dict[int, list[str]] = {}
        for gen, block in blocks:
            merged.setdefault(gen, []).append(block)
        blocks = [(gen, "\n".join(parts)) for gen, parts in merged.items()]
    _write_text(cfg, blocks, stdout)
    return EXIT_OK


def compare_rows(reference: list[GridState], closed_form: list[GridState]) -> list[tuple]:
    """``(generation, max |diff|, mean |diff|, mass closed form, mass reference)`` per generation."""
    rows = []
    for ref, mf in zip(reference, closed_form):
        diff = np.abs(mf.values - ref.values)
        rows.append((mf.generation, float(diff.max()), float(diff.mean()),
                     total_mass(mf), total_mass(ref)))
    return rows


def cmd_compare(cfg: RunConfig, stdout: TextIO = sys.stdout) -> int:
    start = _load_pattern(cfg.pattern)
    closed_form = _meanfield_states(cfg, start)
    if cfg.engine == "exact":
        reference = _exact_states(cfg, start)
    elif cfg.engine == "sample":
        reference = [e.as_grid() for e in _sampled_estimates(cfg, start)]
    else:
        reference = closed_form
    p = cfg.precision
    lines = [f"# rules={cfg.rules_text} reference={cfg.engine}",
             "generation,max_abs_diff,mean_abs_diff,mass_meanfield,mass_reference"]
    for gen, mx, mean, m_mf, m_ref in compare_rows(reference, closed_form):
        lines.append(f"{gen},{mx:.{p}e},{mean:.{p}e},{m_mf:.{p}f},{m_ref:.{p}f}")
    text = "\n".join(lines) + "\n"
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return EXIT_OK


def cmd_render(cfg: RunConfig, stdout: TextIO = sys.stdout) -> int:
    start = _load_pattern(cfg.pattern)
    if cfg.engine == "exact":
        states = _exact_states(cfg, start)
    elif cfg.engine == "sample":
        states = [e.as_grid() for e in _sampled_estimates(cfg, start)]
    else:
        states = _meanfield_states(cfg, start)
    _emit_states(cfg, states, "", stdout)
    return EXIT_OK


COMMANDS = {"run": cmd_run, "exact": cmd_exact, "sample": cmd_sample,
            "compare": cmd_compare, "render": cmd_render}


def main(argv: Sequence[str] | None = None, stdout: TextIO | None = None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = make_config(args)
        return COMMANDS[cfg.command](cfg, stdout)
    except UsageError as exc:
        print(f"problife: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RulesetError, PatternError, ConfigError) as exc:
        print(f"problife: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except exact.ExactLimitError as exc:
        print(f"problife: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except OSError as exc:
        print(f"problife: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
