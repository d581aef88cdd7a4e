"""Interpolation of explored feature values back onto the whole box.

An InterpolatedField wraps a ResultSet.  Queries resolve in three ways:

* at a stored grid point: the stored value, bit for bit;
* queries off the grid planes in at most three axes: simplex (Delaunay)
  interpolation over the stored points of the grid plane the query lies on,
  with no extrapolation outside their hull;
* higher-dimensional queries: multilinear interpolation on the full grid
  after filling unexplored nodes with the value of their nearest explored
  node (grid-graph distance, first-come tie break).

Coordinates are mapped to index units before triangulating, which keeps the
geometry well conditioned for axes whose physical scales differ by orders of
magnitude.

``interpolate_1d`` provides the stand-alone 1-D linear and natural cubic
spline interpolants used to illustrate how few data points pin down a curve.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.interpolate import CubicSpline, LinearNDInterpolator
from scipy.spatial import QhullError

from .errors import ConfigError, ExtrapolationError
from .exploration import ResultSet
from .models import Array

FLAG_INTERPOLATED = "interpolated"
FLAG_MISSING = "missing"

# Slack, in index units, on the box-membership test for queries.
_BOX_SLACK = 1e-9

# The simplex route handles queries that are off-plane in at most this many
# axes; anything higher-dimensional uses the filled multilinear route.
_SIMPLEX_MAX_DIM = 3


@dataclass
class SliceResult:
    """A two-axis slice of a field, evaluated on the grid planes.

    ``values[i, j]`` corresponds to ``axis_values[0][i]`` and
    ``axis_values[1][j]``; missing cells hold NaN.  ``flags`` entries are
    computed, copied, interpolated or missing.
    """

    axes: tuple[str, str]
    fixed: dict[str, float]
    axis_values: tuple[Array, Array]
    values: Array
    flags: Array


class InterpolatedField:
    """Evaluates a ResultSet anywhere inside the data hull."""

    def __init__(self, result: ResultSet):
        if not result.entries:
            raise ConfigError("cannot interpolate an empty result set")
        self.result = result
        self.grid = result.grid
        self._plane_cache: dict[tuple, object] = {}
        self._full_simplex: object = _UNSET
        self._filled: Array | None = None

    # ---- public evaluation ------------------------------------------------------

    def interpolate(self, p: Array | Sequence[float]) -> float:
        """Value of the field at ``p`` (coordinates over the grid axes).

        Raises ExtrapolationError for queries outside the hull of the
        available data (or outside the box, for the multilinear route).
        """
        grid = self.grid
        p = np.asarray(p, dtype=float)
        if p.shape != (grid.dim,):
            raise ConfigError(f"query has shape {p.shape}, grid has {grid.dim} axes")

        aligned: dict[int, int] = {}
        free: list[int] = []
        for axis in range(grid.dim):
            lo, _ = grid.box.axes[axis]
            u = (p[axis] - lo) / grid.spacings[axis]
            if u < -_BOX_SLACK or u > grid.counts[axis] - 1 + _BOX_SLACK:
                raise ExtrapolationError(
                    f"query value {p[axis]!r} is outside the box on axis {grid.axis_names[axis]!r}"
                )
            j = grid.align(axis, float(p[axis]))
            if j is None:
                free.append(axis)
            else:
                aligned[axis] = j

        if not free:
            idx = tuple(aligned[a] for a in range(grid.dim))
            entry = self.result.entries.get(idx)
            if entry is not None:
                return entry.value
            return self._eval_full(p)
        if len(free) <= _SIMPLEX_MAX_DIM and aligned:
            return self._eval_plane(tuple(free), tuple(sorted(aligned.items())), p)
        return self._eval_full(p)

    def extract_slice(self, free_axes: tuple[str, str], fixed: dict[str, float]) -> SliceResult:
        """Evaluate the field on every node of a two-axis grid plane."""
        grid = self.grid
        if len(free_axes) != 2 or free_axes[0] == free_axes[1]:
            raise ConfigError(f"need two distinct slice axes, got {free_axes!r}")
        a_axis = grid.axis_number(free_axes[0])
        b_axis = grid.axis_number(free_axes[1])
        expected_fixed = set(range(grid.dim)) - {a_axis, b_axis}
        fixed_idx: dict[int, int] = {}
        fixed_echo: dict[str, float] = {}
        for name, value in fixed.items():
            axis = grid.axis_number(name)
            if axis in (a_axis, b_axis):
                raise ConfigError(f"axis {name!r} cannot be both free and fixed")
            j = grid.align(axis, float(value))
            if j is None:
                below, above = grid.nearest_planes(axis, float(value))
                raise ConfigError(
                    f"value {value!r} for axis {name!r} is not on a grid plane; "
                    f"nearest planes: {below!r} and {above!r}"
                )
            fixed_idx[axis] = j
            fixed_echo[name] = float(grid.axis_values(axis)[j])
        if set(fixed_idx) != expected_fixed:
            missing = [grid.axis_names[a] for a in sorted(expected_fixed - set(fixed_idx))]
            raise ConfigError(f"fixed values required for axes: {', '.join(missing)}")

        free_sorted = tuple(sorted((a_axis, b_axis)))
        itp = self._plane_interpolator(free_sorted, tuple(sorted(fixed_idx.items())))
        na, nb = grid.counts[a_axis], grid.counts[b_axis]
        values = np.full((na, nb), np.nan)
        flags = np.full((na, nb), FLAG_MISSING, dtype="<U12")
        template = [0] * grid.dim
        for axis, j in fixed_idx.items():
            template[axis] = j
        for i in range(na):
            template[a_axis] = i
            for j in range(nb):
                template[b_axis] = j
                idx = tuple(template)
                entry = self.result.entries.get(idx)
                if entry is not None:
                    values[i, j] = entry.value
                    flags[i, j] = entry.flag
                    continue
                if itp is None:
                    continue
                coords = (idx[free_sorted[0]], idx[free_sorted[1]])
                val = itp(coords)
                if val is not None:
                    values[i, j] = val
                    flags[i, j] = FLAG_INTERPOLATED
        return SliceResult(
            axes=(grid.axis_names[a_axis], grid.axis_names[b_axis]),
            fixed=fixed_echo,
            axis_values=(grid.axis_values(a_axis), grid.axis_values(b_axis)),
            values=values,
            flags=flags,
        )

    # ---- plane route ------------------------------------------------------------

    def _plane_members(self, free: tuple[int, ...], fixed: tuple[tuple[int, int], ...]):
        fixed_d = dict(fixed)
        coords = []
        vals = []
        for idx, entry in self.result.entries.items():
            if all(idx[a] == j for a, j in fixed_d.items()):
                coords.append([float(idx[a]) for a in free])
                vals.append(entry.value)
        return np.asarray(coords), np.asarray(vals)

    def _plane_interpolator(self, free: tuple[int, ...], fixed: tuple[tuple[int, int], ...]):
        """A callable (index coords) -> value-or-None, or None if no hull exists."""
        key = (free, fixed)
        if key in self._plane_cache:
            return self._plane_cache[key]
        coords, vals = self._plane_members(free, fixed)
        itp = _make_simplex_interpolator(coords, vals)
        self._plane_cache[key] = itp
        return itp

    def _eval_plane(self, free: tuple[int, ...], fixed: tuple[tuple[int, int], ...], p: Array) -> float:
        itp = self._plane_interpolator(free, fixed)
        if itp is None:
            raise ExtrapolationError("no interpolable data on the query's grid plane")
        grid = self.grid
        coords = tuple(
            (p[a] - grid.box.axes[a][0]) / grid.spacings[a] for a in free
        )
        val = itp(coords)
        if val is None:
            raise ExtrapolationError("query lies outside the hull of the plane's data")
        return val

    # ---- full-dimensional route ---------------------------------------------------

    def _eval_full(self, p: Array) -> float:
        grid = self.grid
        u = np.array([
            (p[a] - grid.box.axes[a][0]) / grid.spacings[a] for a in range(grid.dim)
        ])
        if grid.dim <= _SIMPLEX_MAX_DIM:
            if self._full_simplex is _UNSET:
                coords = np.array([[float(j) for j in idx] for idx in self.result.entries])
                vals = np.array([e.value for e in self.result.entries.values()])
                self._full_simplex = _make_simplex_interpolator(coords, vals)
            if self._full_simplex is None:
                raise ExtrapolationError("the stored points span no simplex to interpolate on")
            val = self._full_simplex(tuple(u))
            if val is None:
                raise ExtrapolationError("query lies outside the hull of the stored points")
            return val
        return self.eval_multilinear_index(u)

    def filled_values(self) -> Array:
        """Feature values on the full grid, holes filled from nearest data.

        Unexplored nodes take the value of their nearest explored node in the
        grid graph (L1 index distance); equidistant ties resolve to the seed
        that comes first in row-major order.
        """
        if self._filled is None:
            vals = np.full(self.grid.counts, np.nan)
            for idx, entry in self.result.entries.items():
                vals[idx] = entry.value
            if np.isnan(vals).any():
                queue = deque(sorted(self.result.entries.keys()))
                counts = self.grid.counts
                dim = self.grid.dim
                while queue:
                    idx = queue.popleft()
                    v = vals[idx]
                    for axis in range(dim):
                        for step in (-1, 1):
                            j = idx[axis] + step
                            if 0 <= j < counts[axis]:
                                nidx = idx[:axis] + (j,) + idx[axis + 1:]
                                if np.isnan(vals[nidx]):
                                    vals[nidx] = v
                                    queue.append(nidx)
            self._filled = vals
        return self._filled

    def eval_multilinear_index(self, u: Array) -> float:
        """Multilinear interpolation on the filled grid, in index coordinates."""
        vals = self.filled_values()
        counts = self.grid.counts
        base = []
        weights = []
        for a in range(self.grid.dim):
            i0 = int(np.floor(u[a]))
            i0 = min(max(i0, 0), counts[a] - 2)
            w = min(max(u[a] - i0, 0.0), 1.0)
            base.append(i0)
            weights.append(w)
        total = 0.0
        for corner in np.ndindex(*([2] * self.grid.dim)):
            weight = 1.0
            for a, c in enumerate(corner):
                weight *= weights[a] if c else 1.0 - weights[a]
            if weight:
                total += weight * float(vals[tuple(b + c for b, c in zip(base, corner))])
        return total


class _Unset:
    pass


_UNSET = _Unset()


def _make_simplex_interpolator(coords: Array, vals: Array):
    """Wrap LinearNDInterpolator (or 1-D linear) as coords-tuple -> value-or-None."""
    if coords.size == 0:
        return None
    ndim = coords.shape[1]
    if ndim == 1:
        xs = coords[:, 0]
        order = np.argsort(xs)
        xs = xs[order]
        ys = vals[order]
        if xs.size < 2:
            return None

        def interp1(c: tuple[float, ...]):
            x = c[0]
            if x < xs[0] or x > xs[-1]:
                return None
            return float(np.interp(x, xs, ys))

        return interp1
    if coords.shape[0] < ndim + 1:
        return None
    try:
        itp = LinearNDInterpolator(coords, vals)
        # Qhull runs lazily in some scipy versions; force it now.
        itp(coords[0])
    except (QhullError, ValueError):
        return None

    def interp(c: tuple[float, ...]):
        val = np.asarray(itp(np.asarray(c, dtype=float))).item()
        if np.isnan(val):
            return None
        return val

    return interp


def interpolate_1d(
    points: Sequence[tuple[float, float]],
    query: float | Array,
    method: str = "linear",
) -> float | Array:
    """Interpolate scattered 1-D data at ``query``.

    ``method`` is "linear" for piecewise-linear interpolation or
    "cubic-spline" for a natural cubic spline.  Queries outside the data
    range raise ExtrapolationError.
    """
    if len(points) < 2:
        raise ConfigError("1-D interpolation needs at least two points")
    xs = np.array([float(x) for x, _ in points])
    ys = np.array([float(y) for _, y in points])
    order = np.argsort(xs)
    xs, ys = xs[order], ys[order]
    if np.any(np.diff(xs) <= 0.0):
        raise ConfigError("1-D interpolation points must have distinct x values")
    q = np.asarray(query, dtype=float)
    if np.any(q < xs[0]) or np.any(q > xs[-1]):
        raise ExtrapolationError(f"query {query!r} outside the data range [{xs[0]!r}, {xs[-1]!r}]")
    if method == "linear":
        out = np.interp(q, xs, ys)
    elif method == "cubic-spline":
        out = CubicSpline(xs, ys, bc_type="natural")(q)
    else:
        raise ConfigError(f"method must be 'linear' or 'cubic-spline', got {method!r}")
    if np.isscalar(query) or np.asarray(query).ndim == 0:
        return float(out)
    return np.asarray(out, dtype=float)
