"""Pixel-grid geometry and image-to-world scaling.

Conventions used throughout the package:

- Pixel frame: origin at the top-left image corner, x rightward, y downward,
  0 <= x < w and 0 <= y < h.
- Grid frame: Cartesian, origin at the image midpoint, x rightward, y upward,
  units of grid cells (real-valued; odd image dimensions give half-cell
  lattice positions).
- World frame: meters; the grid frame maps to it through a uniform
  meters-per-cell scale and an optional origin offset (the camera's ground
  projection point).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple


class GridPoint(NamedTuple):
    x: float
    y: float


class WorldPoint(NamedTuple):
    x: float
    y: float


class PixelPoint(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class GridSpec:
    """Pixel-grid layout: image size and the cell edge length, all in pixels."""

    image_width: int
    image_height: int
    cell_size: float

    def __post_init__(self):
        if self.image_width <= 0 or self.image_height <= 0:
            raise ValueError("image dimensions must be positive")
        if self.cell_size <= 0:
            raise ValueError("cell_size must be positive")
        if self.cell_size > min(self.image_width, self.image_height):
            raise ValueError("cell_size must not exceed the smaller image dimension")


@dataclass(frozen=True)
class CameraModel:
    """Downward camera: altitude, horizontal FOV, and the pixel grid interval.

    ``image_height`` is optional and defaults to a square image; it only
    feeds the vertical footprint extent (aspect ratio), never the scale.
    """

    altitude: float
    horizontal_fov: float
    image_width: int
    grid_interval: float
    image_height: int | None = None

    def __post_init__(self):
        if not 0.0 < self.horizontal_fov < math.pi:
            raise ValueError("horizontal_fov must lie in (0, pi)")
        if self.altitude <= 0:
            raise ValueError("altitude must be positive")
        if self.grid_interval <= 0:
            raise ValueError("grid_interval must be positive")
        if self.image_width <= 0:
            raise ValueError("image_width must be positive")

    @property
    def height(self) -> int:
        return self.image_height if self.image_height is not None else self.image_width


@dataclass(frozen=True)
class GroundScale:
    """Result of the resolution/FOV-adaptive scale computation."""

    n_grid: int
    width_real: float
    cell_m: float
    truncated: bool = False
    degenerate: bool = False


def grid_vertices(spec: GridSpec) -> tuple[list[float], list[float]]:
    """Lattice line positions in pixel coordinates, both lists sorted ascending.

    Vertical lines sit at x = w/2 + i*s and horizontal lines at y = h/2 - j*s
    for every integer i, j keeping the position inside [0, w) x [0, h).
    """
    w, h, s = float(spec.image_width), float(spec.image_height), float(spec.cell_size)
    xs = []
    i = math.ceil(-w / (2.0 * s)) - 2
    while True:
        x = w / 2.0 + i * s
        if x >= w:
            break
        if x >= 0.0:
            xs.append(x)
        i += 1
    ys = []
    j = math.floor(-h / (2.0 * s)) - 2
    while True:
        y = h / 2.0 - j * s
        if y < 0.0:
            break
        if y < h:
            ys.append(y)
        j += 1
    ys.reverse()
    return xs, ys


def grid_line_indices(spec: GridSpec) -> tuple[list[int], list[int]]:
    """Integer lattice indices (i, j) matching :func:`grid_vertices` order."""
    w, h, s = float(spec.image_width), float(spec.image_height), float(spec.cell_size)
    xs, ys = grid_vertices(spec)
    is_ = [round((x - w / 2.0) / s) for x in xs]
    js = [round((h / 2.0 - y) / s) for y in ys]
    return is_, js


def ground_scale(camera: CameraModel) -> GroundScale:
    """Meters-per-cell from altitude, horizontal FOV, and grid interval.

    n_grid = w / r (truncated toward zero when fractional, with a flag),
    width_real = 2 * altitude * tan(FOV / 2), cell_m = width_real / n_grid.
    """
    ratio = camera.image_width / camera.grid_interval
    n_grid = int(ratio)
    truncated = n_grid != ratio
    if n_grid == 0:
        raise ValueError("grid_interval exceeds image width (n_grid = 0)")
    width_real = 2.0 * camera.altitude * math.tan(camera.horizontal_fov / 2.0)
    cell_m = width_real / n_grid
    return GroundScale(
        n_grid=n_grid,
        width_real=width_real,
        cell_m=cell_m,
        truncated=truncated,
        degenerate=cell_m <= 1e-12,  # FOV -> 0 limit collapses the footprint
    )


def grid_to_world(cell_m: float, p, origin=None) -> WorldPoint:
    """Scale a grid-frame point to meters, optionally offset by the camera's
    ground-projection point."""
    if cell_m <= 0:
        raise ValueError("cell_m must be positive")
    ox, oy = (0.0, 0.0) if origin is None else (origin[0], origin[1])
    return WorldPoint(cell_m * p[0] + ox, cell_m * p[1] + oy)


def world_to_grid(cell_m: float, p, origin=None) -> GridPoint:
    """Inverse of :func:`grid_to_world`."""
    if cell_m <= 0:
        raise ValueError("cell_m must be positive")
    ox, oy = (0.0, 0.0) if origin is None else (origin[0], origin[1])
    return GridPoint((p[0] - ox) / cell_m, (p[1] - oy) / cell_m)


def pixel_to_grid(spec: GridSpec, p) -> GridPoint:
    """Pixel frame -> centered grid frame (cells)."""
    return GridPoint(
        (p[0] - spec.image_width / 2.0) / spec.cell_size,
        (spec.image_height / 2.0 - p[1]) / spec.cell_size,
    )


def grid_to_pixel(spec: GridSpec, p) -> PixelPoint:
    """Centered grid frame (cells) -> pixel frame."""
    return PixelPoint(
        spec.image_width / 2.0 + p[0] * spec.cell_size,
        spec.image_height / 2.0 - p[1] * spec.cell_size,
    )


def _fmt(v: float) -> str:
    # %g keeps integral positions short ("80" not "80.0") and is deterministic
    return "%g" % v


def render_gridmask_svg(spec: GridSpec) -> str:
    """Deterministic SVG document with one line per lattice line and an index
    label per line. Identical specs produce byte-identical text."""
    w, h = spec.image_width, spec.image_height
    xs, ys = grid_vertices(spec)
    is_, js = grid_line_indices(spec)
    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_fmt(w)}" height="{_fmt(h)}" viewBox="0 0 {_fmt(w)} {_fmt(h)}">',
        f'<rect x="0" y="0" width="{_fmt(w)}" height="{_fmt(h)}" '
        'fill="white" stroke="black" stroke-width="1"/>',
    ]
    for x in xs:
        parts.append(
            f'<line x1="{_fmt(x)}" y1="0" x2="{_fmt(x)}" y2="{_fmt(h)}" '
            'stroke="gray" stroke-width="1"/>'
        )
    for y in ys:
        parts.append(
            f'<line x1="0" y1="{_fmt(y)}" x2="{_fmt(w)}" y2="{_fmt(y)}" '
            'stroke="gray" stroke-width="1"/>'
        )
    for x, i in zip(xs, is_):
        parts.append(
            f'<text x="{_fmt(x + 2)}" y="{_fmt(h - 4)}" font-size="10" '
            f'fill="black">{i}</text>'
        )
    for y, j in zip(ys, js):
        parts.append(
            f'<text x="2" y="{_fmt(y - 2)}" font-size="10" fill="black">{j}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
