"""Limit-cycle detection and scalar feature extraction.

A cycle is located by integrating past a transient, then watching a section
coordinate cross its trailing mean from below.  Successive upward crossings
yield the period; one period is re-sampled at uniform time spacing and the
feature of interest (for example the maximum of a coordinate) is read off the
re-sampled cycle with parabolic peak refinement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainViolationError, NoCycleError
from .models import Array, OdeSystem
from .rosenbrock import STATUS_COMPLETED, SolverConfig, Trajectory, integrate

# Length of one detection window; the search extends window by window until
# the time budget runs out.
_DETECTION_WINDOW = 150.0
# Two consecutive period estimates must agree to this relative tolerance.
_PERIOD_AGREEMENT = 0.05
# Tolerated relative undershoot below zero before a positive-state system is
# considered to have left its domain.
_POSITIVITY_SLACK = 1e-9


@dataclass(frozen=True)
class CycleConfig:
    """Settings for the cycle search.

    Args:
        transient_time: time integrated and discarded before detection.
        max_time: total integration budget including the transient.
        closure_tol: relative mismatch allowed between the first and last
            point of the extracted period.
        section_coordinate: state coordinate whose mean crossings define the
            Poincare section.
        n_points: number of uniform samples per period (at least 32).
    """

    transient_time: float = 200.0
    max_time: float = 1000.0
    closure_tol: float = 0.01
    section_coordinate: int = 0
    n_points: int = 512

    def __post_init__(self) -> None:
        if not 0.0 <= self.transient_time < self.max_time:
            raise ConfigError(
                f"need 0 <= transient_time < max_time, got {self.transient_time!r}, {self.max_time!r}"
            )
        if not self.closure_tol > 0.0:
            raise ConfigError(f"closure_tol must be positive, got {self.closure_tol!r}")
        if self.section_coordinate < 0:
            raise ConfigError(f"section_coordinate must be non-negative, got {self.section_coordinate!r}")
        if self.n_points < 32:
            raise ConfigError(f"n_points must be at least 32, got {self.n_points!r}")


@dataclass
class LimitCycle:
    """One period of an attracting cycle, sampled at uniform time spacing.

    ``points`` has shape (n_points + 1, n); the last row closes the loop and
    matches the first row to within the closure tolerance.  ``times`` are the
    sample times relative to the start of the period.
    """

    times: Array
    points: Array
    period: float
    params: Array


def _time_weighted_mean(ts: Array, xs: Array) -> float:
    dt = np.diff(ts)
    total = float(dt.sum())
    if total <= 0.0:
        return float(xs.mean())
    return float(np.sum(0.5 * (xs[:-1] + xs[1:]) * dt) / total)


def _upward_crossings(ts: Array, xs: Array, level: float) -> Array:
    """Times where ``xs`` crosses ``level`` from below, linearly interpolated."""
    s = xs - level
    idx = np.nonzero((s[:-1] < 0.0) & (s[1:] >= 0.0))[0]
    if idx.size == 0:
        return np.empty(0)
    frac = -s[idx] / (s[idx + 1] - s[idx])
    return ts[idx] + frac * (ts[idx + 1] - ts[idx])


def find_limit_cycle(
    system: OdeSystem,
    p: Array,
    x0: Array,
    solver_config: SolverConfig | None = None,
    cycle_config: CycleConfig | None = None,
) -> LimitCycle:
    """Detect an attracting limit cycle from the given initial condition.

    Raises:
        NoCycleError: no settled periodic orbit was found within the budget.
        DomainViolationError: the trajectory left the positive quadrant of a
            positive-state system.
        ConfigError: the section coordinate does not exist for this system.
    """
    solver_config = solver_config or SolverConfig()
    cfg = cycle_config or CycleConfig()
    if cfg.section_coordinate >= system.state_dim:
        raise ConfigError(
            f"section_coordinate {cfg.section_coordinate} out of range for state dimension {system.state_dim}"
        )
    p = np.asarray(p, dtype=float)

    if cfg.transient_time > 0.0:
        settle = integrate(system, x0, p, (0.0, cfg.transient_time), solver_config, keep="last")
        if settle.status != STATUS_COMPLETED:
            raise NoCycleError(f"transient integration stopped early ({settle.status})")
        state = settle.final_state
        _check_positive(system, settle.states)
    else:
        state = np.asarray(x0, dtype=float)

    budget = cfg.max_time - cfg.transient_time
    window = min(_DETECTION_WINDOW, budget)
    elapsed = 0.0
    all_times: list[Array] = []
    all_states: list[Array] = []

    while elapsed < budget:
        chunk_len = min(window, budget - elapsed)
        chunk = integrate(system, state, p, (0.0, chunk_len), solver_config, keep="all")
        if chunk.status != STATUS_COMPLETED:
            raise NoCycleError(f"detection integration stopped early ({chunk.status})")
        _check_positive(system, chunk.states)
        offset = 1 if all_times else 0  # drop the duplicated junction point
        all_times.append(chunk.times[offset:] + elapsed)
        all_states.append(chunk.states[offset:])
        elapsed += chunk_len
        state = chunk.final_state

        ts = np.concatenate(all_times)
        xs = np.vstack(all_states)
        cycle = _try_extract(ts, xs, cfg, p)
        if cycle is not None:
            return cycle

    raise NoCycleError(
        f"no settled limit cycle within max_time={cfg.max_time!r} (transient {cfg.transient_time!r})"
    )


def _check_positive(system: OdeSystem, states: Array) -> None:
    if not system.positive_states:
        return
    scale = max(1.0, float(np.max(np.abs(states))))
    if float(states.min()) < -_POSITIVITY_SLACK * scale:
        raise DomainViolationError("trajectory left the positive quadrant")


def _try_extract(ts: Array, xs: Array, cfg: CycleConfig, p: Array) -> LimitCycle | None:
    coord = xs[:, cfg.section_coordinate]
    level = _time_weighted_mean(ts, coord)
    crossings = _upward_crossings(ts, coord, level)
    if crossings.size < 3:
        return None
    period = float(crossings[-1] - crossings[-2])
    previous = float(crossings[-2] - crossings[-3])
    if period <= 0.0 or abs(period - previous) > _PERIOD_AGREEMENT * period:
        return None

    t_start = float(crossings[-2])
    sample_times = t_start + period * np.arange(cfg.n_points + 1) / cfg.n_points
    points = np.empty((cfg.n_points + 1, xs.shape[1]))
    for j in range(xs.shape[1]):
        points[:, j] = np.interp(sample_times, ts, xs[:, j])

    amplitude = points.max(axis=0) - points.min(axis=0)
    amp_norm = float(np.linalg.norm(amplitude))
    if amp_norm == 0.0:
        return None
    gap = float(np.linalg.norm(points[0] - points[-1]))
    if gap > cfg.closure_tol * amp_norm:
        return None
    return LimitCycle(times=sample_times - t_start, points=points, period=period, params=p.copy())


def measure(cycle: LimitCycle, coordinate: int) -> float:
    """Maximum of one coordinate over the cycle, with parabolic refinement.

    The refinement fits a parabola through the discrete peak and its two
    periodic neighbours; it never returns less than the discrete maximum.
    """
    if coordinate < 0 or coordinate >= cycle.points.shape[1]:
        raise ConfigError(f"coordinate {coordinate} out of range for cycle with {cycle.points.shape[1]} coordinates")
    vals = cycle.points[:-1, coordinate]
    n = vals.size
    i = int(np.argmax(vals))
    y0 = float(vals[i])
    ym = float(vals[(i - 1) % n])
    yp = float(vals[(i + 1) % n])
    curvature = yp - 2.0 * y0 + ym
    if curvature >= 0.0:
        return y0
    return y0 - (yp - ym) ** 2 / (8.0 * curvature)


def sample_cycle_points(cycle: LimitCycle, m: int, rng: np.random.Generator) -> Array:
    """Draw ``m`` near-equally spaced points from the cycle at a random phase.

    The start index is uniform over the cycle's unique samples; the remaining
    indices advance by ``n/m`` samples (floored), wrapping around the period.
    """
    n = cycle.points.shape[0] - 1
    if not 1 <= m <= n:
        raise ConfigError(f"m must be between 1 and the cycle sample count {n}, got {m}")
    start = int(rng.integers(n))
    idx = (start + (np.arange(m) * n) // m) % n
    return cycle.points[idx].copy()
