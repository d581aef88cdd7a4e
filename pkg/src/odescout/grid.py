"""Regular parameter grids with graph-distance neighborhoods.

A grid discretizes an axis-aligned box with per-axis spacings, anchored at
the lower bounds.  Points are addressed by integer index tuples; the graph
distance between two points is the L1 distance of their index tuples, and a
neighborhood of size ``n_size`` collects every point within that distance
(excluding the center, clipped to the box).

A grid may vary only a subset of a model's parameters.  In that case it
carries the full base parameter vector and maps each grid point to a complete
parameter vector by overwriting the varied entries.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigError, DegenerateAxisError, DimensionMismatchError
from .models import Array, ParameterVector

# Slack (in index units) when converting a length to a point count and when
# testing whether a value sits on a grid plane.
_INDEX_SLACK = 1e-9
_ALIGN_TOL = 1e-6


@dataclass(frozen=True)
class Box:
    """Closed axis-aligned box given as ``((lo, hi), ...)``."""

    axes: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        if not self.axes:
            raise ConfigError("box needs at least one axis")
        for i, (lo, hi) in enumerate(self.axes):
            if not hi > lo:
                raise DegenerateAxisError(f"axis {i} has empty extent [{lo!r}, {hi!r}]")

    @property
    def dim(self) -> int:
        return len(self.axes)


@dataclass(frozen=True)
class GridPoint:
    """A grid node: index tuple plus the axis values it stands for."""

    index: tuple[int, ...]
    values: Array


@dataclass(frozen=True)
class Grid:
    """A regular grid over ``box`` with the given spacings.

    ``axis_names`` name the varied parameters.  ``base`` (optional) is the
    full model parameter vector whose named entries the grid axes overwrite;
    without it, grid values are used as the parameter vector directly.
    """

    box: Box
    spacings: tuple[float, ...]
    counts: tuple[int, ...]
    axis_names: tuple[str, ...]
    base: ParameterVector | None = None

    # ---- geometry -------------------------------------------------------------

    @property
    def dim(self) -> int:
        return len(self.counts)

    @property
    def size(self) -> int:
        return math.prod(self.counts)

    def _check_index(self, index: tuple[int, ...]) -> None:
        if len(index) != self.dim:
            raise DimensionMismatchError(f"index {index!r} has wrong length for a {self.dim}-axis grid")
        for i, (j, c) in enumerate(zip(index, self.counts)):
            if not 0 <= j < c:
                raise ConfigError(f"index {index!r} is outside the grid (axis {i} has {c} points)")

    def value_at(self, index: tuple[int, ...]) -> Array:
        self._check_index(index)
        return np.array([lo + j * s for j, (lo, _), s in zip(index, self.box.axes, self.spacings)])

    def params_at(self, index: tuple[int, ...]) -> Array:
        """Full parameter vector for a grid point (base overwritten by axes)."""
        values = self.value_at(index)
        if self.base is None:
            return values
        full = self.base.values.copy()
        for name, v in zip(self.axis_names, values):
            full[self.base.index_of(name)] = v
        return full

    def point(self, index: int | tuple[int, ...]) -> GridPoint:
        if isinstance(index, (int, np.integer)):
            index = self.index_from_flat(int(index))
        else:
            index = tuple(int(j) for j in index)
            self._check_index(index)
        return GridPoint(index=index, values=self.value_at(index))

    # ---- flat ordering (row-major) ---------------------------------------------

    def flat_index(self, index: tuple[int, ...]) -> int:
        self._check_index(index)
        flat = 0
        for j, c in zip(index, self.counts):
            flat = flat * c + j
        return flat

    def index_from_flat(self, flat: int) -> tuple[int, ...]:
        if not 0 <= flat < self.size:
            raise ConfigError(f"flat index {flat!r} outside grid of size {self.size}")
        out = []
        for c in reversed(self.counts):
            out.append(flat % c)
            flat //= c
        return tuple(reversed(out))

    def indices(self):
        """All index tuples in row-major order."""
        return itertools.product(*(range(c) for c in self.counts))

    # ---- alignment --------------------------------------------------------------

    def axis_number(self, name: str) -> int:
        try:
            return self.axis_names.index(name)
        except ValueError:
            raise ConfigError(f"unknown grid axis {name!r}; axes: {', '.join(self.axis_names)}") from None

    def align(self, axis: int, value: float) -> int | None:
        """Index of the grid plane holding ``value`` on ``axis``, or None."""
        lo, hi = self.box.axes[axis]
        u = (value - lo) / self.spacings[axis]
        j = int(round(u))
        if abs(u - j) <= _ALIGN_TOL and 0 <= j < self.counts[axis]:
            return j
        return None

    def nearest_planes(self, axis: int, value: float) -> tuple[float, float]:
        """The two grid-plane values bracketing ``value`` (clipped to the box)."""
        lo, _ = self.box.axes[axis]
        s = self.spacings[axis]
        c = self.counts[axis]
        u = (value - lo) / s
        below = min(max(int(math.floor(u)), 0), c - 1)
        above = min(max(int(math.ceil(u)), 0), c - 1)
        return lo + below * s, lo + above * s

    def axis_values(self, axis: int) -> Array:
        lo, _ = self.box.axes[axis]
        return lo + self.spacings[axis] * np.arange(self.counts[axis])


def build_grid(
    box: Box,
    spacings: tuple[float, ...] | list[float],
    axis_names: tuple[str, ...] | None = None,
    base: ParameterVector | None = None,
) -> Grid:
    """Build the grid anchored at the box's lower bounds.

    The point count per axis is ``floor((hi - lo) / spacing) + 1`` (with a
    small slack so exact multiples of the spacing are not lost to rounding).
    Every axis must carry at least two points.
    """
    if len(spacings) != box.dim:
        raise ConfigError(f"got {len(spacings)} spacings for a {box.dim}-axis box")
    counts = []
    for i, ((lo, hi), s) in enumerate(zip(box.axes, spacings)):
        if not s > 0.0:
            raise ConfigError(f"spacing for axis {i} must be positive, got {s!r}")
        c = int(math.floor((hi - lo) / s + _INDEX_SLACK)) + 1
        if c < 2:
            raise ConfigError(f"axis {i} has fewer than 2 grid points (extent {hi - lo!r}, spacing {s!r})")
        counts.append(c)
    if axis_names is None:
        axis_names = tuple(f"x{i}" for i in range(box.dim))
    if len(axis_names) != box.dim:
        raise ConfigError("axis_names must match the box dimension")
    if base is not None:
        for name in axis_names:
            base.index_of(name)  # raises on unknown names
    return Grid(box=box, spacings=tuple(float(s) for s in spacings), counts=tuple(counts),
                axis_names=tuple(axis_names), base=base)


def graph_distance(a: tuple[int, ...], b: tuple[int, ...]) -> int:
    """L1 distance between two index tuples."""
    if len(a) != len(b):
        raise DimensionMismatchError(f"index tuples {a!r} and {b!r} differ in length")
    return int(sum(abs(i - j) for i, j in zip(a, b)))


@lru_cache(maxsize=None)
def _offsets(dim: int, n_size: int) -> tuple[tuple[int, ...], ...]:
    """All nonzero integer offsets with L1 norm at most ``n_size``, lex order."""
    rng = range(-n_size, n_size + 1)
    return tuple(
        off for off in itertools.product(rng, repeat=dim)
        if 0 < sum(abs(o) for o in off) <= n_size
    )


def neighborhood(grid: Grid, index: tuple[int, ...], n_size: int) -> list[tuple[int, ...]]:
    """Grid points within graph distance ``n_size`` of ``index`` (center excluded)."""
    if n_size < 1:
        raise ConfigError(f"n_size must be at least 1, got {n_size!r}")
    grid._check_index(tuple(index))
    out = []
    for off in _offsets(grid.dim, n_size):
        cand = tuple(j + o for j, o in zip(index, off))
        if all(0 <= j < c for j, c in zip(cand, grid.counts)):
            out.append(cand)
    return out
