"""Gradient rendering of grid states to binary PPM images.

Aliveness maps to colour along two linear RGB segments: blue at 0, green at
0.5, red at 1. Cells whose value is exactly 0 are drawn in the background
colour (white by default) instead, so empty space stays blank; the map is
therefore discontinuous at 0.
"""
from __future__ import annotations

import io
import os
from dataclasses import dataclass, field
from typing import BinaryIO, NamedTuple, Sequence

import numpy as np

from .grid import GridState


class Color(NamedTuple):
    r: int
    g: int
    b: int


BLUE = Color(0, 0, 255)
GREEN = Color(0, 255, 0)
RED = Color(255, 0, 0)
WHITE = Color(255, 255, 255)
BLACK = Color(0, 0, 0)


def _check_color(c: Color) -> Color:
    c = Color(*c)
    if not all(isinstance(ch, (int, np.integer)) and 0 <= ch <= 255 for ch in c):
        raise ValueError(f"colour channels must be integers in 0..255, got {c}")
    return c


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def value_to_color(v: float) -> Color:
    """Gradient colour for aliveness ``v``. ``0`` maps to pure blue here;
    :func:`render_grid` substitutes the background for exact zeros."""
    if not (0.0 <= v <= 1.0):
        raise ValueError(f"value {v!r} outside [0, 1]")
    if v <= 0.5:
        t = v / 0.5
        return Color(0, _round_half_up(255 * t), _round_half_up(255 * (1.0 - t)))
    t = (v - 0.5) / 0.5
    return Color(_round_half_up(255 * t), _round_half_up(255 * (1.0 - t)), 0)


@dataclass(frozen=True)
class RenderSpec:
    cell_size: int = 16
    gridlines: bool = False
    gridline_color: Color = BLACK
    background: Color = WHITE

    def __post_init__(self):
        if int(self.cell_size) != self.cell_size or self.cell_size < 1:
            raise ValueError("cell_size must be a positive integer")
        object.__setattr__(self, "gridline_color", _check_color(self.gridline_color))
        object.__setattr__(self, "background", _check_color(self.background))


@dataclass(frozen=True)
class Image:
    """RGB raster; ``pixels`` has shape ``(height, width, 3)``, dtype uint8."""

    width: int
    height: int
    pixels: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.pixels.shape != (self.height, self.width, 3):
            raise ValueError(f"pixel array shape {self.pixels.shape} does not match "
                             f"{self.width}x{self.height}")

    def pixel(self, x: int, y: int) -> Color:
        return Color(*(int(c) for c in self.pixels[y, x]))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Image):
            return NotImplemented
        return (self.width, self.height) == (other.width, other.height) and \
            np.array_equal(self.pixels, other.pixels)


def image_size(grid_width: int, grid_height: int, spec: RenderSpec) -> tuple[int, int]:
    """Pixel dimensions; gridlines add one pixel between adjacent cells."""
    sep = 1 if spec.gridlines else 0
    return (grid_width * spec.cell_size + (grid_width - 1) * sep,
            grid_height * spec.cell_size + (grid_height - 1) * sep)


def render_grid(s: GridState, spec: RenderSpec = RenderSpec()) -> Image:
    width, height = image_size(s.width, s.height, spec)
    pixels = np.empty((height, width, 3), dtype=np.uint8)
    pixels[:] = spec.gridline_color if spec.gridlines else spec.background
    pitch = spec.cell_size + (1 if spec.gridlines else 0)
    for y in range(s.height):
        for x in range(s.width):
            v = float(s.values[y, x])
            color = spec.background if v == 0.0 else value_to_color(v)
            py, px = y * pitch, x * pitch
            pixels[py:py + spec.cell_size, px:px + spec.cell_size] = color
    return Image(width, height, pixels)


def ppm_bytes(img: Image) -> bytes:
    header = f"P6\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + np.ascontiguousarray(img.pixels, dtype=np.uint8).tobytes()


def write_ppm(img: Image, sink: BinaryIO) -> int:
    """Write ``img`` as binary PPM (P6) to ``sink``; returns the byte count."""
    data = ppm_bytes(img)
    sink.write(data)
    return len(data)


def read_ppm(data: bytes | BinaryIO) -> Image:
    """Parse a P6 image with maxval 255 (the format :func:`write_ppm` emits)."""
    if not isinstance(data, (bytes, bytearray)):
        data = data.read()
    buf = io.BytesIO(data)
    tokens: list[bytes] = []
    while len(tokens) < 4:
        line = buf.readline()
        if not line:
            raise ValueError("truncated PPM header")
        tokens.extend(line.split(b"#", 1)[0].split())
    magic, w, h, maxval = tokens[:4]
    if magic != b"P6" or maxval != b"255":
        raise ValueError("only P6 with maxval 255 is supported")
    width, height = int(w), int(h)
    payload = buf.read()
    if len(payload) != width * height * 3:
        raise ValueError(f"expected {width * height * 3} pixel bytes, got {len(payload)}")
    pixels = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, 3).copy()
    return Image(width, height, pixels)


def render_sequence(states: Sequence[GridState], spec: RenderSpec = RenderSpec(),
                    naming: str = "gen{:03}.ppm") -> list[str]:
    """Write one PPM per state; ``naming`` is formatted with the generation index."""
    if not states:
        raise ValueError("no states to render")
    paths = []
    for s in states:
        path = naming.format(s.generation)
        parent = os.path.dirname(path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        with open(path, "wb") as fh:
            write_ppm(render_grid(s, spec), fh)
        paths.append(path)
    return paths
