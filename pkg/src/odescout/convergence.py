"""Empirical error analysis for explored-and-interpolated fields.

The interesting empirical law: with random exploration the L1 distance
between the interpolated field and a brute-force reference decays like
``n^(-1/2)`` in the number of exactly computed points, the Monte-Carlo rate.
``convergence_study`` measures that rate over a sequence of grid refinements
and seed ensembles and fits the log-log slope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.stats import linregress

from .errors import ConfigError
from .exploration import (
    FLAG_COMPUTED,
    ExplorationConfig,
    ResultSet,
    run_full,
    run_random_exploration,
)
from .grid import Grid, GridPoint
from .interpolation import InterpolatedField
from .models import Array


# Named synthetic fields for studies that don't need an ODE behind them.
SYNTHETIC_TARGETS: dict[str, Callable[[Array], float]] = {
    "sin-sq": lambda v: math.sin(v[0]) * v[1] ** 2,
    "constant": lambda v: 1.0,
    "linear": lambda v: float(np.sum(v)),
}


def mc_integral_estimate(field: InterpolatedField, sample_points: Array) -> float:
    """Monte-Carlo estimate of the field's mean over the box.

    ``sample_points`` is an (m, k) array of query points; they must lie
    inside the data hull (extrapolation errors propagate).
    """
    pts = np.asarray(sample_points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 1:
        raise ConfigError("sample_points must be a non-empty (m, k) array")
    total = 0.0
    for row in pts:
        total += field.interpolate(row)
    return total / pts.shape[0]


def _check_same_grid(a: Grid, b: Grid) -> None:
    same = (
        a.box.axes == b.box.axes
        and a.spacings == b.spacings
        and a.counts == b.counts
        and a.axis_names == b.axis_names
    )
    if not same:
        raise ConfigError("field and reference live on different grids")


def _cell_midpoint_means(filled: Array) -> Array:
    """Multilinear values at all cell midpoints: the mean of the cell corners."""
    dim = filled.ndim
    out = None
    for corner in np.ndindex(*([2] * dim)):
        view = filled[tuple(slice(c, filled.shape[a] - 1 + c) for a, c in enumerate(corner))]
        out = view.copy() if out is None else out + view
    return out / (2 ** dim)


def l1_error(field: InterpolatedField, reference: ResultSet) -> float:
    """Grid-quadrature L1 distance between the field and a full-grid reference.

    Both fields are evaluated at every grid-cell midpoint via the filled
    multilinear route (adequate since both are piecewise linear) and the mean
    absolute difference is returned; the box volume is normalized to 1.
    """
    _check_same_grid(field.grid, reference.grid)
    if len(reference.entries) != reference.grid.size:
        raise ConfigError("reference must cover every grid point")
    ref_field = InterpolatedField(reference)
    a = _cell_midpoint_means(field.filled_values())
    b = _cell_midpoint_means(ref_field.filled_values())
    return float(np.mean(np.abs(a - b)))


@dataclass(frozen=True)
class ErrorStudyConfig:
    """Settings for a convergence study.

    Args:
        grids: refinement sequence (at least 3 levels).
        i_max: per-level center budgets, aligned with ``grids``.
        seeds: exploration seeds; every level runs once per seed.
        tol: exploration tolerance (0 keeps every visited point exact).
        n_size: neighborhood radius for the exploration runs.
    """

    grids: tuple[Grid, ...]
    i_max: tuple[int, ...]
    seeds: tuple[int, ...]
    tol: float = 0.0
    n_size: int = 1

    def __post_init__(self) -> None:
        if len(self.grids) < 3:
            raise ConfigError(f"a convergence study needs at least 3 levels, got {len(self.grids)}")
        if len(self.i_max) != len(self.grids):
            raise ConfigError("i_max must provide one budget per level")
        if len(self.seeds) < 1:
            raise ConfigError("at least one seed is required")


@dataclass(frozen=True)
class LevelRecord:
    """Seed-ensemble statistics for one refinement level."""

    grid_size: int
    n_mean: float
    n_std: float
    l1_mean: float
    l1_std: float
    i_a_mean: float
    i_a_std: float


@dataclass(frozen=True)
class ErrorReport:
    """Convergence-study output.

    ``slope`` is the fitted log-log slope of mean L1 error against the mean
    number of computed points; it is None (and ``exact`` True) when every
    level's error vanishes.  ``slope_interval`` is a 95% confidence interval.
    """

    levels: tuple[LevelRecord, ...]
    slope: float | None
    slope_interval: tuple[float, float] | None
    exact: bool


def pointwise_target(f: Callable[[Array], float]) -> Callable[[Grid], Callable[[GridPoint], float]]:
    """Adapt a plain function of the axis values into an evaluator factory."""

    def make(grid: Grid) -> Callable[[GridPoint], float]:
        return lambda point: float(f(point.values))

    return make


def convergence_study(
    make_evaluator: Callable[[Grid], Callable[[GridPoint], float]],
    config: ErrorStudyConfig,
) -> ErrorReport:
    """Measure how the L1 error decays with the number of computed points.

    ``make_evaluator`` builds the per-grid feature evaluator; it serves both
    the brute-force reference and the exploration runs of each level.
    Relevance never enters (the study runs are compute-everything walks with
    a center budget), so ``tol`` must be 0.
    """
    if config.tol != 0.0:
        raise ConfigError("convergence_study runs at tol=0 (no relevance model is built)")

    levels: list[LevelRecord] = []
    for grid, budget in zip(config.grids, config.i_max):
        if budget > grid.size:
            raise ConfigError(f"level budget {budget} exceeds grid size {grid.size}")
        evaluator = make_evaluator(grid)
        reference = run_full(grid, evaluator)
        ns: list[float] = []
        l1s: list[float] = []
        ias: list[float] = []
        for seed in config.seeds:
            run_cfg = ExplorationConfig(
                tol=config.tol, i_max=budget, n_size=config.n_size, seed=seed
            )
            result = run_random_exploration(grid, None, run_cfg, evaluator)
            field = InterpolatedField(result)
            computed = [e.value for e in result.entries.values() if e.flag == FLAG_COMPUTED]
            ns.append(len(computed))
            ias.append(float(np.mean(computed)))
            l1s.append(l1_error(field, reference))
        levels.append(
            LevelRecord(
                grid_size=grid.size,
                n_mean=float(np.mean(ns)),
                n_std=float(np.std(ns)),
                l1_mean=float(np.mean(l1s)),
                l1_std=float(np.std(l1s)),
                i_a_mean=float(np.mean(ias)),
                i_a_std=float(np.std(ias)),
            )
        )

    if all(rec.l1_mean == 0.0 for rec in levels):
        return ErrorReport(levels=tuple(levels), slope=None, slope_interval=None, exact=True)
    if any(rec.l1_mean == 0.0 for rec in levels):
        raise ConfigError("cannot fit a slope: some levels have exactly zero error")
    xs = np.log([rec.n_mean for rec in levels])
    ys = np.log([rec.l1_mean for rec in levels])
    fit = linregress(xs, ys)
    half_width = 1.96 * fit.stderr if math.isfinite(fit.stderr) else 0.0
    return ErrorReport(
        levels=tuple(levels),
        slope=float(fit.slope),
        slope_interval=(float(fit.slope - half_width), float(fit.slope + half_width)),
        exact=False,
    )
