"""Grid exploration: compute the expensive feature only where it matters.

The engine walks the grid center by center.  Each center's feature value is
computed exactly; every not-yet-marked point of its neighborhood is then
either computed as well (when the relevance function differs enough from the
center's) or copies the center's value.  All visited points are marked and
never revisited, so the walk terminates after at most ``i_max`` centers or
when no unmarked point remains.

The comparison rule for a neighbor q of center p is:

* ``tol == 0``: always compute (no comparison is made at all);
* otherwise compute iff ``|M(p) - M(q)| >= tol * r`` and the difference is
  nonzero.  A zero difference carries no evidence of variation, so it copies
  for every positive tolerance, including the degenerate case ``r == 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigError, DomainViolationError, HyperbolicDomainError, NoCycleError
from .grid import Grid, GridPoint, neighborhood
from .relevance import RelevanceModel

FLAG_COMPUTED = "computed"
FLAG_COPIED = "copied"

MODE_RANDOM = "random"
MODE_DETERMINISTIC = "deterministic"

# Abort threshold: if this many centers fail before any succeeds, the box is
# assumed to be outside the usable domain.
_INITIAL_FAILURE_LIMIT = 10

Evaluator = Callable[[GridPoint], float]


@dataclass(frozen=True)
class ExplorationConfig:
    """Exploration settings.

    Exactly one of ``i_max`` (absolute center budget) and ``fraction``
    (budget as a fraction of the grid size) must be given for random mode;
    deterministic mode takes its centers from ``g0`` instead.
    """

    tol: float
    mode: str = MODE_RANDOM
    i_max: int | None = None
    fraction: float | None = None
    n_size: int = 1
    seed: int = 0
    g0: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self) -> None:
        if self.tol < 0.0 or not math.isfinite(self.tol):
            raise ConfigError(f"tol must be finite and >= 0, got {self.tol!r}")
        if self.mode not in (MODE_RANDOM, MODE_DETERMINISTIC):
            raise ConfigError(f"mode must be '{MODE_RANDOM}' or '{MODE_DETERMINISTIC}', got {self.mode!r}")
        if self.n_size < 1:
            raise ConfigError(f"n_size must be at least 1, got {self.n_size!r}")
        if self.mode == MODE_RANDOM:
            if (self.i_max is None) == (self.fraction is None):
                raise ConfigError("random mode needs exactly one of i_max and fraction")
            if self.i_max is not None and self.i_max < 1:
                raise ConfigError(f"i_max must be at least 1, got {self.i_max!r}")
            if self.fraction is not None and not 0.0 < self.fraction <= 1.0:
                raise ConfigError(f"fraction must be in (0, 1], got {self.fraction!r}")
        else:
            if not self.g0:
                raise ConfigError("deterministic mode needs a non-empty g0")


def resolve_i_max(config: ExplorationConfig, grid: Grid) -> int:
    if config.i_max is not None:
        if config.i_max > grid.size:
            raise ConfigError(f"i_max={config.i_max} exceeds the grid size {grid.size}")
        return config.i_max
    return max(1, round(config.fraction * grid.size))


@dataclass
class Counters:
    centers_computed: int = 0
    neighbors_computed: int = 0
    neighbors_copied: int = 0
    failures: int = 0
    evaluator_calls: int = 0

    def as_dict(self) -> dict[str, int]:
        return {
            "centers_computed": self.centers_computed,
            "neighbors_computed": self.neighbors_computed,
            "neighbors_copied": self.neighbors_copied,
            "failures": self.failures,
            "evaluator_calls": self.evaluator_calls,
        }


@dataclass(frozen=True)
class Entry:
    """One grid point's stored feature value.

    ``flag`` is "computed" for exact evaluations and "copied" for values
    propagated from a center; ``source`` then names the center's index.
    """

    value: float
    flag: str
    source: tuple[int, ...] | None = None


@dataclass
class ResultSet:
    """The set of known feature values over a grid (the explored subset G*)."""

    grid: Grid
    entries: dict[tuple[int, ...], Entry]
    failures: set[tuple[int, ...]]
    counters: Counters
    tol: float
    relevance_r: float | None = None
    relevance_variant: str | None = None

    def computed_indices(self) -> set[tuple[int, ...]]:
        return {idx for idx, e in self.entries.items() if e.flag == FLAG_COMPUTED}

    def copied_indices(self) -> set[tuple[int, ...]]:
        return {idx for idx, e in self.entries.items() if e.flag == FLAG_COPIED}

    def values_by_index(self) -> dict[tuple[int, ...], float]:
        return {idx: e.value for idx, e in self.entries.items()}


class _State:
    """Mutable bookkeeping for one exploration run."""

    def __init__(self, grid: Grid, relevance: RelevanceModel | None, evaluator: Evaluator):
        self.grid = grid
        self.relevance = relevance
        self.evaluator = evaluator
        self.entries: dict[tuple[int, ...], Entry] = {}
        self.failures: set[tuple[int, ...]] = set()
        self.counters = Counters()
        self.marked = np.zeros(grid.size, dtype=bool)
        self._m_cache: dict[int, float] = {}

    def m_at(self, flat: int) -> float:
        value = self._m_cache.get(flat)
        if value is None:
            idx = self.grid.index_from_flat(flat)
            value = self.relevance.m_value(self.grid.params_at(idx))
            self._m_cache[flat] = value
        return value

    def evaluate(self, idx: tuple[int, ...]) -> float | None:
        """Run the evaluator; record and swallow feature failures."""
        self.counters.evaluator_calls += 1
        try:
            return float(self.evaluator(self.grid.point(idx)))
        except (NoCycleError, DomainViolationError):
            self.failures.add(idx)
            self.counters.failures += 1
            return None

    def result(self, tol: float, relevance: RelevanceModel | None) -> ResultSet:
        return ResultSet(
            grid=self.grid,
            entries=self.entries,
            failures=self.failures,
            counters=self.counters,
            tol=tol,
            relevance_r=None if relevance is None else relevance.r,
            relevance_variant=None if relevance is None else relevance.variant,
        )


def neighbor_compare(
    state: _State,
    center: tuple[int, ...],
    center_value: float,
    tol: float,
    n_size: int,
    mark: Callable[[int], None],
) -> None:
    """Decide compute-vs-copy for every unmarked neighbor of a computed center."""
    grid = state.grid
    center_flat = grid.flat_index(center)
    m_center: float | None = None
    for q in neighborhood(grid, center, n_size):
        qflat = grid.flat_index(q)
        if state.marked[qflat]:
            continue
        mark(qflat)
        if tol == 0.0:
            compute = True
        else:
            if m_center is None:
                m_center = state.m_at(center_flat)
            dm = abs(m_center - state.m_at(qflat))
            compute = dm > 0.0 and dm >= tol * state.relevance.r
        if compute:
            value = state.evaluate(q)
            if value is not None:
                state.entries[q] = Entry(value, FLAG_COMPUTED)
                state.counters.neighbors_computed += 1
        else:
            state.entries[q] = Entry(center_value, FLAG_COPIED, source=center)
            state.counters.neighbors_copied += 1


def _require_relevance(config: ExplorationConfig, relevance: RelevanceModel | None) -> None:
    if config.tol > 0.0 and relevance is None:
        raise ConfigError("a relevance model is required when tol > 0")


def run_random_exploration(
    grid: Grid,
    relevance: RelevanceModel | None,
    config: ExplorationConfig,
    evaluator: Evaluator,
) -> ResultSet:
    """Explore with uniformly random unmarked centers.

    Runs until ``i_max`` centers have been computed or every point is marked.
    A fixed seed gives an identical ResultSet on every run.  If the first ten
    centers in a row fail to produce a feature value, the run aborts.
    """
    if config.mode != MODE_RANDOM:
        raise ConfigError(f"run_random_exploration needs mode='{MODE_RANDOM}', got {config.mode!r}")
    _require_relevance(config, relevance)
    i_max = resolve_i_max(config, grid)
    rng = np.random.default_rng(config.seed)
    state = _State(grid, relevance, evaluator)

    total = grid.size
    avail = np.arange(total, dtype=np.int64)
    pos = np.arange(total, dtype=np.int64)
    remaining = total

    def mark(flat: int) -> None:
        nonlocal remaining
        if state.marked[flat]:
            return
        state.marked[flat] = True
        i = pos[flat]
        last = avail[remaining - 1]
        avail[i] = last
        pos[last] = i
        pos[flat] = -1
        remaining -= 1

    centers = 0
    initial_failures = 0
    any_success = False
    while centers < i_max and remaining > 0:
        flat = int(avail[int(rng.integers(remaining))])
        idx = grid.index_from_flat(flat)
        mark(flat)
        value = state.evaluate(idx)
        if value is None:
            if not any_success:
                initial_failures += 1
                if initial_failures >= _INITIAL_FAILURE_LIMIT:
                    raise HyperbolicDomainError(
                        f"the first {_INITIAL_FAILURE_LIMIT} exploration centers all failed"
                    )
            continue
        any_success = True
        state.entries[idx] = Entry(value, FLAG_COMPUTED)
        state.counters.centers_computed += 1
        centers += 1
        neighbor_compare(state, idx, value, config.tol, config.n_size, mark)

    return state.result(config.tol, relevance)


def run_deterministic_exploration(
    grid: Grid,
    g0: list[tuple[int, ...]],
    relevance: RelevanceModel | None,
    config: ExplorationConfig,
    evaluator: Evaluator,
) -> ResultSet:
    """Explore from a fixed center set: compute all of g0, then compare neighborhoods.

    The portions of the centers' neighborhoods lying outside g0 must be
    pairwise disjoint so no point is ever compared against two centers.
    """
    _require_relevance(config, relevance)
    g0 = [tuple(int(j) for j in idx) for idx in g0]
    if not g0:
        raise ConfigError("g0 must not be empty")
    if len(set(g0)) != len(g0):
        raise ConfigError("g0 contains duplicate grid points")
    g0_set = set(g0)
    outside: dict[tuple[int, ...], set[tuple[int, ...]]] = {}
    for idx in g0:
        grid._check_index(idx)
        outside[idx] = {q for q in neighborhood(grid, idx, config.n_size) if q not in g0_set}
    for i, a in enumerate(g0):
        for b in g0[i + 1:]:
            overlap = outside[a] & outside[b]
            if overlap:
                raise ConfigError(
                    f"neighborhoods of g0 centers {a!r} and {b!r} overlap at {sorted(overlap)[0]!r}"
                )

    state = _State(grid, relevance, evaluator)

    def mark(flat: int) -> None:
        state.marked[flat] = True

    computed: list[tuple[tuple[int, ...], float]] = []
    for idx in g0:
        mark(grid.flat_index(idx))
        value = state.evaluate(idx)
        if value is None:
            continue
        state.entries[idx] = Entry(value, FLAG_COMPUTED)
        state.counters.centers_computed += 1
        computed.append((idx, value))

    for idx, value in computed:
        neighbor_compare(state, idx, value, config.tol, config.n_size, mark)

    return state.result(config.tol, relevance)


def run_full(grid: Grid, evaluator: Evaluator) -> ResultSet:
    """Compute the feature on every grid point (the brute-force reference)."""
    state = _State(grid, None, evaluator)
    for idx in grid.indices():
        value = state.evaluate(idx)
        if value is not None:
            state.entries[idx] = Entry(value, FLAG_COMPUTED)
            state.counters.centers_computed += 1
    state.marked[:] = True
    return state.result(0.0, None)
