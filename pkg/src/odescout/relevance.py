"""Vector-field relevance measures over a parameter grid.

The computable stand-in for "how much does the feature change here" is built
from the vector field alone, so it is cheap compared to computing the feature
itself.  A phase sample ``{x_1, ..., x_k2}`` is collected once per run from a
few limit cycles; the relevance function of a parameter point is then either

* norm variant: ``M(p) = (1/k2) * sum_i ||f(x_i, p)||_2``, or
* derivative variant: ``M(p) = (1/(k*k2)) * sum_i sum_l ||df/dp_l(x_i, p)||_2``

and the relevance measure ``r`` is the mean absolute difference of ``M``
between randomly sampled grid points and random points of their neighborhoods.
Exploration later compares ``|M(p) - M(q)|`` against ``tol * r``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .cycles import CycleConfig, find_limit_cycle, sample_cycle_points
from .errors import ConfigError, DomainViolationError, HyperbolicDomainError, NoCycleError
from .grid import Grid, neighborhood
from .models import Array, OdeSystem
from .rosenbrock import SolverConfig

VARIANT_NORM = "norm"
VARIANT_DERIVATIVE = "derivative"

# A phase-sample draw gives up after this many cycle attempts per requested
# cycle.
_DRAW_ATTEMPT_FACTOR = 10


@dataclass(frozen=True)
class RelevanceSettings:
    """Sampling sizes and variant for the relevance computation.

    Args:
        k1: number of limit cycles contributing phase points.
        m: phase points drawn per cycle (so the sample holds k1*m states).
        k3: grid points sampled when estimating r.
        k4: neighbors compared per sampled grid point.
        n_size: neighborhood radius (graph distance) for the r estimate.
        variant: "norm" or "derivative".
        seed: seed for the relevance sampling stream.
    """

    k1: int = 4
    m: int = 4
    k3: int = 8
    k4: int = 3
    n_size: int = 1
    variant: str = VARIANT_NORM
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("k1", "m", "k3", "k4", "n_size"):
            if getattr(self, name) < 1:
                raise ConfigError(f"relevance.{name} must be at least 1, got {getattr(self, name)!r}")
        if self.variant not in (VARIANT_NORM, VARIANT_DERIVATIVE):
            raise ConfigError(
                f"relevance.variant must be '{VARIANT_NORM}' or '{VARIANT_DERIVATIVE}', got {self.variant!r}"
            )


@dataclass
class PhaseSample:
    """States sampled from limit cycles, with their provenance.

    ``states`` has shape (k1*m, n); ``parameter_points`` holds the k1 full
    parameter vectors whose cycles produced the states.
    """

    states: Array
    parameter_points: Array
    m: int

    @property
    def k2(self) -> int:
        return self.states.shape[0]

    def __post_init__(self) -> None:
        if self.states.ndim != 2 or self.states.shape[0] < 1:
            raise ConfigError("phase sample must hold at least one state")
        if self.states.shape[0] != self.parameter_points.shape[0] * self.m:
            raise ConfigError("phase sample size must equal k1 * m")


def build_phase_sample(
    system: OdeSystem,
    grid: Grid,
    k1: int,
    m: int,
    solver_config: SolverConfig,
    cycle_config: CycleConfig,
    rng: np.random.Generator,
    initial_state: Callable[[Array], Array],
) -> PhaseSample:
    """Draw ``k1`` grid points, compute their cycles, and sample ``m`` states each.

    Points are drawn uniformly without replacement.  A draw whose cycle search
    fails is recorded and redrawn; after ``10 * k1`` failed-or-successful
    cycle attempts without filling the sample the grid is declared outside the
    usable domain.
    """
    if k1 < 1 or m < 1:
        raise ConfigError(f"k1 and m must be at least 1, got {k1!r}, {m!r}")
    total = grid.size
    if k1 > total:
        raise ConfigError(f"k1={k1} exceeds the grid size {total}")

    states: list[Array] = []
    parameter_points: list[Array] = []
    tried: set[int] = set()
    attempts = 0
    max_attempts = _DRAW_ATTEMPT_FACTOR * k1
    while len(parameter_points) < k1:
        if attempts >= max_attempts or len(tried) >= total:
            raise HyperbolicDomainError(
                f"phase sampling found {len(parameter_points)} cycles in {attempts} attempts (need {k1})"
            )
        flat = int(rng.integers(total))
        if flat in tried:
            continue
        tried.add(flat)
        attempts += 1
        p_full = grid.params_at(grid.index_from_flat(flat))
        try:
            cycle = find_limit_cycle(system, p_full, initial_state(p_full), solver_config, cycle_config)
        except (NoCycleError, DomainViolationError):
            continue
        states.append(sample_cycle_points(cycle, m, rng))
        parameter_points.append(p_full)
    return PhaseSample(states=np.vstack(states), parameter_points=np.asarray(parameter_points), m=m)


def relevance_function(system: OdeSystem, sample: PhaseSample, p: Array, variant: str = VARIANT_NORM) -> float:
    """Evaluate the relevance function M(p) over the phase sample."""
    p = np.asarray(p, dtype=float)
    if variant == VARIANT_NORM:
        total = 0.0
        for x in sample.states:
            total += float(np.linalg.norm(system.eval_rhs(x, p)))
        return total / sample.k2
    if variant == VARIANT_DERIVATIVE:
        total = 0.0
        for x in sample.states:
            deriv = system.eval_param_derivatives(x, p)
            total += float(np.linalg.norm(deriv, axis=0).sum())
        return total / (sample.k2 * system.param_dim)
    raise ConfigError(f"unknown relevance variant {variant!r}")


@dataclass
class RelevanceModel:
    """A frozen relevance computation for one run.

    ``r`` is computed once and reused for every neighbor comparison of the
    run; ``m_value`` evaluates M(p) with the run's sample and variant.
    """

    system: OdeSystem
    sample: PhaseSample
    settings: RelevanceSettings
    r: float

    @property
    def variant(self) -> str:
        return self.settings.variant

    def m_value(self, p: Array) -> float:
        return relevance_function(self.system, self.sample, p, self.settings.variant)


def relevance_measure(
    system: OdeSystem,
    sample: PhaseSample,
    grid: Grid,
    settings: RelevanceSettings,
    rng: np.random.Generator,
) -> RelevanceModel:
    """Estimate r as the mean |M(p) - M(q)| over sampled neighbor pairs.

    ``k3`` grid points are drawn uniformly without replacement; for each,
    ``k4`` distinct members of its neighborhood are drawn.  Every sampled
    point must have at least ``k4`` neighbors.
    """
    total = grid.size
    if settings.k3 > total:
        raise ConfigError(f"relevance.k3={settings.k3} exceeds the grid size {total}")

    picks: list[int] = []
    while len(picks) < settings.k3:
        flat = int(rng.integers(total))
        if flat not in picks:
            picks.append(flat)

    m_cache: dict[int, float] = {}

    def m_at(flat: int) -> float:
        value = m_cache.get(flat)
        if value is None:
            value = relevance_function(system, sample, grid.params_at(grid.index_from_flat(flat)), settings.variant)
            m_cache[flat] = value
        return value

    diffs: list[float] = []
    for flat in picks:
        idx = grid.index_from_flat(flat)
        omega = neighborhood(grid, idx, settings.n_size)
        if len(omega) < settings.k4:
            raise ConfigError(
                f"grid point {idx!r} has only {len(omega)} neighbors within n_size={settings.n_size}, "
                f"need k4={settings.k4}"
            )
        chosen = rng.choice(len(omega), size=settings.k4, replace=False)
        for pos in chosen:
            qflat = grid.flat_index(omega[int(pos)])
            diffs.append(abs(m_at(flat) - m_at(qflat)))
    r = float(np.mean(diffs))
    return RelevanceModel(system=system, sample=sample, settings=settings, r=r)


def build_relevance_model(
    system: OdeSystem,
    grid: Grid,
    settings: RelevanceSettings,
    solver_config: SolverConfig,
    cycle_config: CycleConfig,
    initial_state: Callable[[Array], Array],
) -> RelevanceModel:
    """Convenience wrapper: phase sample plus measure from one seeded stream."""
    rng = np.random.default_rng(settings.seed)
    sample = build_phase_sample(
        system, grid, settings.k1, settings.m, solver_config, cycle_config, rng, initial_state
    )
    return relevance_measure(system, sample, grid, settings, rng)
