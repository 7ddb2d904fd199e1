"""Grid states, boundary policies and pattern files.

Coordinates are 0-based with the origin at the top left: ``x`` is the
column, ``y`` the row. Values are stored row-major in a read-only
``(height, width)`` float64 array.

Two pattern formats are read and written:

ASCII (binary states)::

    # comment
    .OO..
    .....

Numeric (arbitrary aliveness values)::

    P 2 1
    0.8 0.25
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterator

import numpy as np

# Moore neighbourhood offsets (dy, dx) in row-major order. Every engine scans
# neighbours in this order, which fixes floating-point summation order.
NEIGHBOR_OFFSETS: tuple[tuple[int, int], ...] = tuple(
    (dy, dx) for dy in (-1, 0, 1) for dx in (-1, 0, 1) if (dy, dx) != (0, 0)
)


class PatternError(ValueError):
    """Raised for malformed pattern text."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class BoundaryPolicy(enum.Enum):
    """What a neighbour lookup sees past the grid edge."""

    DEAD = "dead"
    TOROIDAL = "toroidal"

    @classmethod
    def from_name(cls, name: str | "BoundaryPolicy") -> "BoundaryPolicy":
        if isinstance(name, cls):
            return name
        key = name.strip().lower()
        if key == "wrap":
            return cls.TOROIDAL
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown boundary policy {name!r} (use dead or wrap)") from None


@dataclass(frozen=True, eq=False)
class GridState:
    """Aliveness probabilities of every cell at one generation."""

    values: np.ndarray
    generation: int = 0
    _hash: int | None = field(default=None, init=False, repr=False)

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64, copy=True)
        if arr.ndim != 2:
            raise ValueError(f"grid values must be 2-D, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("grid must have positive width and height")
        if not np.all((arr >= 0.0) & (arr <= 1.0)):
            raise ValueError("grid values must lie in [0, 1]")
        if self.generation < 0:
            raise ValueError("generation must be non-negative")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def __getitem__(self, xy: tuple[int, int]) -> float:
        x, y = xy
        return float(self.values[y, x])

    def __eq__(self, other) -> bool:
        if not isinstance(other, GridState):
            return NotImplemented
        return (self.generation == other.generation
                and self.shape == other.shape
                and np.array_equal(self.values, other.values))

    def __hash__(self) -> int:
        return hash((self.generation, self.shape, self.values.tobytes()))

    def is_binary(self) -> bool:
        return bool(np.all((self.values == 0.0) | (self.values == 1.0)))

    def with_generation(self, generation: int) -> "GridState":
        return GridState(self.values, generation)

    @classmethod
    def zeros(cls, width: int, height: int, generation: int = 0) -> "GridState":
        return cls(np.zeros((height, width)), generation)

    @classmethod
    def from_cells(cls, width: int, height: int, cells, value: float = 1.0) -> "GridState":
        """Grid with ``value`` at each ``(x, y)`` in ``cells`` and 0 elsewhere."""
        arr = np.zeros((height, width))
        for x, y in cells:
            arr[y, x] = value
        return cls(arr)


def neighbor_planes(values: np.ndarray, boundary: BoundaryPolicy) -> Iterator[np.ndarray]:
    """Yield, for each Moore offset in :data:`NEIGHBOR_OFFSETS`, an array
    whose ``[..., y, x]`` entry is the neighbour value of cell ``(x, y)``.

    Works on the last two axes, so batches of grids are supported.
    """
    h, w = values.shape[-2:]
    if boundary is BoundaryPolicy.TOROIDAL:
        for dy, dx in NEIGHBOR_OFFSETS:
            yield np.roll(values, shift=(-dy, -dx), axis=(-2, -1))
    else:
        pad = [(0, 0)] * (values.ndim - 2) + [(1, 1), (1, 1)]
        padded = np.pad(values, pad)
        for dy, dx in NEIGHBOR_OFFSETS:
            yield padded[..., 1 + dy:1 + dy + h, 1 + dx:1 + dx + w]


def neighbor_counts(alive: np.ndarray, boundary: BoundaryPolicy) -> np.ndarray:
    """Exact living-neighbour counts of a binary grid (or batch of grids)."""
    alive = np.asarray(alive, dtype=np.int8)
    counts = np.zeros(alive.shape, dtype=np.int8)
    for plane in neighbor_planes(alive, boundary):
        counts += plane
    return counts


def alive_cells(s: GridState, threshold: float = 0.0) -> list[tuple[int, int]]:
    """``(x, y)`` of every cell whose value exceeds ``threshold``, row-major."""
    ys, xs = np.nonzero(s.values > threshold)
    return [(int(x), int(y)) for y, x in zip(ys, xs)]


def is_extinct(s: GridState) -> bool:
    # exact-zero test on purpose; use max_abs_diff for a tolerance
    return not np.any(s.values)


def max_abs_diff(a: GridState, b: GridState) -> float:
    if a.shape != b.shape:
        raise ValueError(f"grid dimensions differ: {a.width}x{a.height} vs {b.width}x{b.height}")
    return float(np.max(np.abs(a.values - b.values)))


def total_mass(s: GridState) -> float:
    """Expected number of living cells."""
    return float(np.sum(s.values))


def _content_lines(text: str) -> list[tuple[int, str]]:
    lines = []
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip()
        if line.lstrip().startswith("#"):
            continue
        lines.append((no, line))
    while lines and not lines[-1][1]:
        lines.pop()
    while lines and not lines[0][1]:
        lines.pop(0)
    return lines


def _parse_numeric(lines: list[tuple[int, str]]) -> GridState:
    no, header = lines[0]
    parts = header.split()
    if len(parts) != 3 or parts[0] != "P":
        raise PatternError("numeric header must be 'P <width> <height>'", no)
    try:
        width, height = int(parts[1]), int(parts[2])
    except ValueError:
        raise PatternError("width and height must be integers", no) from None
    if width < 1 or height < 1:
        raise PatternError("width and height must be positive", no)
    rows = lines[1:]
    if len(rows) != height:
        raise PatternError(f"expected {height} rows, found {len(rows)}",
                           rows[-1][0] if rows else no)
    arr = np.empty((height, width))
    for y, (no, line) in enumerate(rows):
        fields = line.split()
        if len(fields) != width:
            raise PatternError(f"expected {width} values, found {len(fields)}", no)
        for x, tok in enumerate(fields):
            try:
                v = float(tok)
            except ValueError:
                raise PatternError(f"malformed number {tok!r}", no) from None
            if not (0.0 <= v <= 1.0):
                raise PatternError(f"value {tok} outside [0, 1]", no)
            arr[y, x] = v
    return GridState(arr)


def _parse_ascii(lines: list[tuple[int, str]]) -> GridState:
    width = len(lines[0][1])
    arr = np.zeros((len(lines), width))
    for y, (no, line) in enumerate(lines):
        if len(line) != width:
            raise PatternError(f"ragged row: length {len(line)}, expected {width}", no)
        for x, ch in enumerate(line):
            if ch == "O":
                arr[y, x] = 1.0
            elif ch != ".":
                raise PatternError(f"unexpected character {ch!r} at column {x}", no)
    return GridState(arr)


def parse_pattern(text: str) -> GridState:
    """Read an ASCII or numeric pattern; the format is detected from the
    first non-comment line."""
    lines = _content_lines(text)
    if not lines:
        raise PatternError("pattern is empty")
    first = lines[0][1]
    if first == "P" or first.startswith("P "):
        return _parse_numeric(lines)
    return _parse_ascii(lines)


def format_pattern(s: GridState, precision: int = 6) -> str:
    """Emit ASCII for binary grids, numeric otherwise.

    Numeric values use fixed-point with ``precision`` decimals; Python's
    float formatting rounds the exact binary value half-to-even.
    """
    if s.is_binary():
        rows = ("".join("O" if v else "." for v in row) for row in s.values)
        return "\n".join(rows) + "\n"
    out = [f"P {s.width} {s.height}"]
    for row in s.values:
        out.append(" ".join(f"{v:.{precision}f}" for v in row))
    return "\n".join(out) + "\n"


def bundled_pattern_names() -> list[str]:
    return sorted(p.name for p in resources.files("problife.patterns").iterdir()
                  if p.name.endswith(".cells"))


def load_bundled_pattern(name: str) -> GridState:
    """Load one of the shipped figure patterns (``fig1.cells`` ... ``fig5.cells``)."""
    if not name.endswith(".cells"):
        name += ".cells"
    return parse_pattern(resources.files("problife.patterns").joinpath(name).read_text())
