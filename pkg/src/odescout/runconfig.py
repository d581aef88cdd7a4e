"""Run configuration: JSON schema, validation, and assembly helpers.

A run config names a registered model, the scalar feature to extract, the
varied parameter axes (with ranges and spacings), fixed overrides for the
remaining parameters, and the solver / cycle / relevance / exploration
settings.  Parsing is strict: unknown keys and out-of-range values raise
ConfigError with the offending field path in the message.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .cycles import CycleConfig, find_limit_cycle, measure
from .errors import ConfigError
from .exploration import ExplorationConfig
from .grid import Box, Grid, GridPoint, build_grid
from .models import ModelInfo, get_model
from .relevance import RelevanceSettings
from .rosenbrock import SolverConfig


@dataclass(frozen=True)
class AxisSpec:
    name: str
    lo: float
    hi: float
    spacing: float


@dataclass(frozen=True)
class RunConfig:
    model: str
    feature: str
    axes: tuple[AxisSpec, ...]
    fixed: dict[str, float]
    solver: SolverConfig
    cycle: CycleConfig
    relevance: RelevanceSettings
    exploration: ExplorationConfig


def _require_keys(data: dict, allowed: set[str], path: str) -> None:
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)!r} (allowed: {sorted(allowed)!r})")


def _get(data: dict, key: str, path: str, kind, default=None, required: bool = False):
    value = data.get(key)
    if value is None:
        # an explicit JSON null means "unset", same as a missing key
        if required:
            raise ConfigError(f"{path}.{key}: required field is missing")
        return default
    try:
        return kind(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}.{key}: {exc}") from exc


def _parse_axes(raw: Any, model: ModelInfo) -> tuple[AxisSpec, ...]:
    if not isinstance(raw, list) or not raw:
        raise ConfigError("axes: must be a non-empty list of axis objects")
    axes: list[AxisSpec] = []
    seen: set[str] = set()
    for i, item in enumerate(raw):
        path = f"axes[{i}]"
        if not isinstance(item, dict):
            raise ConfigError(f"{path}: must be an object with name/lo/hi/spacing")
        _require_keys(item, {"name", "lo", "hi", "spacing"}, path)
        name = _get(item, "name", path, str, required=True)
        if name not in model.defaults.names:
            raise ConfigError(f"{path}.name: {name!r} is not a parameter of model {model.name!r}")
        if name in seen:
            raise ConfigError(f"{path}.name: axis {name!r} appears twice")
        seen.add(name)
        lo = _get(item, "lo", path, float, required=True)
        hi = _get(item, "hi", path, float, required=True)
        spacing = _get(item, "spacing", path, float, required=True)
        if not hi > lo:
            raise ConfigError(f"{path}: needs hi > lo, got [{lo!r}, {hi!r}]")
        if not spacing > 0.0:
            raise ConfigError(f"{path}.spacing: must be positive, got {spacing!r} for axis {name!r}")
        axes.append(AxisSpec(name=name, lo=lo, hi=hi, spacing=spacing))
    return tuple(axes)


def _parse_fixed(raw: Any, model: ModelInfo, axis_names: set[str]) -> dict[str, float]:
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise ConfigError("fixed: must be an object mapping parameter names to values")
    fixed: dict[str, float] = {}
    for name, value in raw.items():
        if name not in model.defaults.names:
            raise ConfigError(f"fixed.{name}: not a parameter of model {model.name!r}")
        if name in axis_names:
            raise ConfigError(f"fixed.{name}: parameter is already a varied axis")
        fixed[name] = _get(raw, name, "fixed", float, required=True)
    return fixed


def _parse_solver(raw: Any) -> SolverConfig:
    if raw is None:
        return SolverConfig()
    _require_keys(raw, {"rtol", "atol", "h_init", "h_max", "max_steps"}, "solver")
    try:
        return SolverConfig(
            rtol=_get(raw, "rtol", "solver", float, default=1e-6),
            atol=_get(raw, "atol", "solver", float, default=1e-9),
            h_init=_get(raw, "h_init", "solver", float),
            h_max=_get(raw, "h_max", "solver", float),
            max_steps=_get(raw, "max_steps", "solver", int, default=2_000_000),
        )
    except ConfigError as exc:
        raise ConfigError(f"solver: {exc}") from exc


def _parse_cycle(raw: Any) -> CycleConfig:
    if raw is None:
        return CycleConfig()
    _require_keys(raw, {"transient_time", "max_time", "closure_tol", "section_coordinate", "n_points"}, "cycle")
    try:
        return CycleConfig(
            transient_time=_get(raw, "transient_time", "cycle", float, default=200.0),
            max_time=_get(raw, "max_time", "cycle", float, default=1000.0),
            closure_tol=_get(raw, "closure_tol", "cycle", float, default=0.01),
            section_coordinate=_get(raw, "section_coordinate", "cycle", int, default=0),
            n_points=_get(raw, "n_points", "cycle", int, default=512),
        )
    except ConfigError as exc:
        raise ConfigError(f"cycle: {exc}") from exc


def _parse_relevance(raw: Any) -> RelevanceSettings:
    if raw is None:
        return RelevanceSettings()
    _require_keys(raw, {"k1", "m", "k3", "k4", "n_size", "variant", "seed"}, "relevance")
    try:
        return RelevanceSettings(
            k1=_get(raw, "k1", "relevance", int, default=4),
            m=_get(raw, "m", "relevance", int, default=4),
            k3=_get(raw, "k3", "relevance", int, default=8),
            k4=_get(raw, "k4", "relevance", int, default=3),
            n_size=_get(raw, "n_size", "relevance", int, default=1),
            variant=_get(raw, "variant", "relevance", str, default="norm"),
            seed=_get(raw, "seed", "relevance", int, default=0),
        )
    except ConfigError as exc:
        raise ConfigError(f"relevance: {exc}") from exc


def _parse_exploration(raw: Any) -> ExplorationConfig:
    if raw is None or "tol" not in raw:
        raise ConfigError("exploration.tol: required field is missing")
    _require_keys(raw, {"mode", "tol", "i_max", "fraction", "n_size", "seed", "g0"}, "exploration")
    g0_raw = raw.get("g0")
    g0 = None
    if g0_raw is not None:
        if not isinstance(g0_raw, list):
            raise ConfigError("exploration.g0: must be a list of index tuples")
        g0 = tuple(tuple(int(j) for j in idx) for idx in g0_raw)
    try:
        return ExplorationConfig(
            tol=_get(raw, "tol", "exploration", float, required=True),
            mode=_get(raw, "mode", "exploration", str, default="random"),
            i_max=_get(raw, "i_max", "exploration", int),
            fraction=_get(raw, "fraction", "exploration", float),
            n_size=_get(raw, "n_size", "exploration", int, default=1),
            seed=_get(raw, "seed", "exploration", int, default=0),
            g0=g0,
        )
    except ConfigError as exc:
        raise ConfigError(f"exploration: {exc}") from exc


def parse_run_config(data: dict) -> RunConfig:
    """Validate a raw config mapping and return the typed RunConfig."""
    if not isinstance(data, dict):
        raise ConfigError("run config must be a JSON object")
    _require_keys(
        data,
        {"model", "feature", "axes", "fixed", "solver", "cycle", "relevance", "exploration"},
        "config",
    )
    model_name = _get(data, "model", "config", str, required=True)
    model = get_model(model_name)
    feature = _get(data, "feature", "config", str, required=True)
    feature_coordinate(model, feature)  # validates
    axes = _parse_axes(data.get("axes"), model)
    fixed = _parse_fixed(data.get("fixed"), model, {a.name for a in axes})
    return RunConfig(
        model=model_name,
        feature=feature,
        axes=axes,
        fixed=fixed,
        solver=_parse_solver(data.get("solver")),
        cycle=_parse_cycle(data.get("cycle")),
        relevance=_parse_relevance(data.get("relevance")),
        exploration=_parse_exploration(data.get("exploration")),
    )


def load_run_config(path: str | Path) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_run_config(json.load(fh))


def run_config_to_dict(config: RunConfig) -> dict:
    """Echo the config with every setting resolved to its effective value."""
    atol = config.solver.atol
    return {
        "model": config.model,
        "feature": config.feature,
        "axes": [
            {"name": a.name, "lo": a.lo, "hi": a.hi, "spacing": a.spacing} for a in config.axes
        ],
        "fixed": dict(config.fixed),
        "solver": {
            "rtol": config.solver.rtol,
            "atol": atol if np.isscalar(atol) else list(np.asarray(atol, dtype=float)),
            "h_init": config.solver.h_init,
            "h_max": config.solver.h_max,
            "max_steps": config.solver.max_steps,
        },
        "cycle": {
            "transient_time": config.cycle.transient_time,
            "max_time": config.cycle.max_time,
            "closure_tol": config.cycle.closure_tol,
            "section_coordinate": config.cycle.section_coordinate,
            "n_points": config.cycle.n_points,
        },
        "relevance": {
            "k1": config.relevance.k1,
            "m": config.relevance.m,
            "k3": config.relevance.k3,
            "k4": config.relevance.k4,
            "n_size": config.relevance.n_size,
            "variant": config.relevance.variant,
            "seed": config.relevance.seed,
        },
        "exploration": {
            "mode": config.exploration.mode,
            "tol": config.exploration.tol,
            "i_max": config.exploration.i_max,
            "fraction": config.exploration.fraction,
            "n_size": config.exploration.n_size,
            "seed": config.exploration.seed,
            "g0": None if config.exploration.g0 is None else [list(idx) for idx in config.exploration.g0],
        },
    }


def feature_coordinate(model: ModelInfo, feature: str) -> int:
    """Map a feature name like "max-N" to its state coordinate index."""
    if not feature.startswith("max-"):
        raise ConfigError(f"feature: only 'max-<coordinate>' features are supported, got {feature!r}")
    coord = feature[len("max-"):]
    try:
        return model.coordinates.index(coord)
    except ValueError:
        raise ConfigError(
            f"feature: coordinate {coord!r} unknown for model {model.name!r}; "
            f"coordinates: {', '.join(model.coordinates)}"
        ) from None


def build_run_grid(config: RunConfig) -> Grid:
    """Grid over the varied axes, based on model defaults plus fixed overrides."""
    model = get_model(config.model)
    base = model.defaults.replace(**config.fixed) if config.fixed else model.defaults
    box = Box(axes=tuple((a.lo, a.hi) for a in config.axes))
    return build_grid(
        box,
        [a.spacing for a in config.axes],
        axis_names=tuple(a.name for a in config.axes),
        base=base,
    )


def make_evaluator_factory(
    model_name: str,
    feature: str,
    solver_config: SolverConfig,
    cycle_config: CycleConfig,
) -> Callable[[Grid], Callable[[GridPoint], float]]:
    """Per-grid builders of the expensive map C(p): cycle search plus measure."""
    model = get_model(model_name)
    coord = feature_coordinate(model, feature)

    def make(grid: Grid) -> Callable[[GridPoint], float]:
        def evaluator(point: GridPoint) -> float:
            p_full = grid.params_at(point.index)
            cycle = find_limit_cycle(
                model.system, p_full, model.initial_state(p_full), solver_config, cycle_config
            )
            return measure(cycle, coord)

        return evaluator

    return make


def make_feature_evaluator(config: RunConfig, grid: Grid) -> Callable[[GridPoint], float]:
    """The expensive map C(p) for one run config on one grid."""
    factory = make_evaluator_factory(config.model, config.feature, config.solver, config.cycle)
    return factory(grid)


def _level_grid(axes: tuple[AxisSpec, ...], counts: list[int], base) -> Grid:
    spacings = []
    for a, c in zip(axes, counts):
        if c < 2:
            raise ConfigError(f"levels: axis {a.name!r} needs at least 2 points, got {c}")
        spacings.append((a.hi - a.lo) / (c - 1))
    box = Box(axes=tuple((a.lo, a.hi) for a in axes))
    return build_grid(box, spacings, axis_names=tuple(a.name for a in axes), base=base)


def parse_error_study_config(data: dict):
    """Parse an error-study document into (evaluator factory, ErrorStudyConfig).

    The target is either a named synthetic field::

        {"target": "sin-sq", "axes": [...], "levels": [...], ...}

    or a registered model::

        {"target": {"model": "budworm", "feature": "max-N", "fixed": {...},
                    "solver": {...}, "cycle": {...}}, ...}

    Axes give the box only; each level sets per-axis point counts and the
    exploration center budget i_max.
    """
    from .convergence import ErrorStudyConfig, SYNTHETIC_TARGETS, pointwise_target

    if not isinstance(data, dict):
        raise ConfigError("error study config must be a JSON object")
    _require_keys(data, {"target", "axes", "levels", "seeds", "tol", "n_size"}, "config")

    target = data.get("target")
    base = None
    if isinstance(target, str):
        if target not in SYNTHETIC_TARGETS:
            raise ConfigError(
                f"target: unknown synthetic field {target!r}; "
                f"available: {', '.join(sorted(SYNTHETIC_TARGETS))}"
            )
        factory = pointwise_target(SYNTHETIC_TARGETS[target])
        axes = _parse_axes_box_only(data.get("axes"), None)
    elif isinstance(target, dict):
        _require_keys(target, {"model", "feature", "fixed", "solver", "cycle"}, "target")
        model = get_model(_get(target, "model", "target", str, required=True))
        feature = _get(target, "feature", "target", str, required=True)
        factory = make_evaluator_factory(
            model.name, feature, _parse_solver(target.get("solver")), _parse_cycle(target.get("cycle"))
        )
        axes = _parse_axes_box_only(data.get("axes"), model)
        fixed = _parse_fixed(target.get("fixed"), model, {a.name for a in axes})
        base = model.defaults.replace(**fixed) if fixed else model.defaults
    else:
        raise ConfigError("target: must be a synthetic field name or a model object")

    levels_raw = data.get("levels")
    if not isinstance(levels_raw, list) or len(levels_raw) < 3:
        raise ConfigError("levels: need at least 3 refinement levels")
    grids = []
    budgets = []
    for i, item in enumerate(levels_raw):
        path = f"levels[{i}]"
        _require_keys(item, {"counts", "i_max"}, path)
        counts = item.get("counts")
        if not isinstance(counts, list) or len(counts) != len(axes):
            raise ConfigError(f"{path}.counts: need one point count per axis")
        grids.append(_level_grid(axes, [int(c) for c in counts], base))
        budgets.append(_get(item, "i_max", path, int, required=True))

    seeds_raw = data.get("seeds", 10)
    if isinstance(seeds_raw, int):
        seeds = tuple(range(seeds_raw))
    else:
        seeds = tuple(int(s) for s in seeds_raw)

    study = ErrorStudyConfig(
        grids=tuple(grids),
        i_max=tuple(budgets),
        seeds=seeds,
        tol=_get(data, "tol", "config", float, default=0.0),
        n_size=_get(data, "n_size", "config", int, default=1),
    )
    return factory, study


def _parse_axes_box_only(raw, model: ModelInfo | None) -> tuple[AxisSpec, ...]:
    if not isinstance(raw, list) or not raw:
        raise ConfigError("axes: must be a non-empty list")
    axes = []
    seen: set[str] = set()
    for i, item in enumerate(raw):
        path = f"axes[{i}]"
        if not isinstance(item, dict):
            raise ConfigError(f"{path}: must be an object with name/lo/hi")
        _require_keys(item, {"name", "lo", "hi"}, path)
        name = _get(item, "name", path, str, required=True)
        if model is not None and name not in model.defaults.names:
            raise ConfigError(f"{path}.name: {name!r} is not a parameter of model {model.name!r}")
        if name in seen:
            raise ConfigError(f"{path}.name: axis {name!r} appears twice")
        seen.add(name)
        lo = _get(item, "lo", path, float, required=True)
        hi = _get(item, "hi", path, float, required=True)
        if not hi > lo:
            raise ConfigError(f"{path}: needs hi > lo, got [{lo!r}, {hi!r}]")
        axes.append(AxisSpec(name=name, lo=lo, hi=hi, spacing=1.0))
    return tuple(axes)
