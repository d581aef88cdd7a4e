"""End-to-end run execution: config in, persisted result out."""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import NoCycleError, DomainViolationError
from .exploration import (
    Counters,
    Entry,
    FLAG_COMPUTED,
    MODE_DETERMINISTIC,
    ResultSet,
    run_deterministic_exploration,
    run_full,
    run_random_exploration,
)
from .grid import Grid
from .models import get_model
from .relevance import build_relevance_model
from .runconfig import RunConfig, build_run_grid, make_feature_evaluator
from .store import RunStore, STATUS_DONE, STATUS_FAILED, STATUS_RUNNING


@dataclass
class RunRecord:
    run_id: str
    result: ResultSet
    relevance_r: float | None
    elapsed: float


def execute_exploration(config: RunConfig, grid: Grid | None = None) -> RunRecord:
    """Relevance measure plus exploration, per the config."""
    t0 = time.perf_counter()
    if grid is None:
        grid = build_run_grid(config)
    model = get_model(config.model)
    rel = build_relevance_model(
        model.system,
        grid,
        config.relevance,
        solver_config=config.solver,
        cycle_config=config.cycle,
        initial_state=model.initial_state,
    )
    evaluator = make_feature_evaluator(config, grid)
    if config.exploration.mode == MODE_DETERMINISTIC:
        result = run_deterministic_exploration(
            grid, list(config.exploration.g0), rel, config.exploration, evaluator
        )
    else:
        result = run_random_exploration(grid, rel, config.exploration, evaluator)
    elapsed = time.perf_counter() - t0
    return RunRecord(run_id="", result=result, relevance_r=rel.r, elapsed=elapsed)


def _full_worker(args):
    # module-level so ProcessPoolExecutor can pickle it
    config, flat_indices = args
    grid = build_run_grid(config)
    evaluator = make_feature_evaluator(config, grid)
    out = []
    for flat in flat_indices:
        point = grid.point(flat)
        try:
            out.append((flat, evaluator(point), None))
        except (NoCycleError, DomainViolationError) as exc:
            out.append((flat, None, str(exc)))
    return out


def execute_full(config: RunConfig, grid: Grid | None = None, workers: int = 1) -> RunRecord:
    """Evaluate the feature at every grid node (the reference sweep)."""
    t0 = time.perf_counter()
    if grid is None:
        grid = build_run_grid(config)
    if workers <= 1:
        evaluator = make_feature_evaluator(config, grid)
        result = run_full(grid, evaluator)
    else:
        flats = np.arange(grid.size)
        chunks = [(config, chunk.tolist()) for chunk in np.array_split(flats, workers * 4) if chunk.size]
        entries: dict[tuple[int, ...], Entry] = {}
        failures: set[tuple[int, ...]] = set()
        counters = Counters()
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for batch in pool.map(_full_worker, chunks):
                for flat, value, err in batch:
                    index = grid.index_from_flat(flat)
                    counters.evaluator_calls += 1
                    if err is None:
                        entries[index] = Entry(value=value, flag=FLAG_COMPUTED, source=None)
                        counters.centers_computed += 1
                    else:
                        failures.add(index)
                        counters.failures += 1
        result = ResultSet(
            grid=grid,
            entries=entries,
            failures=failures,
            counters=counters,
            tol=0.0,
            relevance_r=None,
            relevance_variant=None,
        )
    elapsed = time.perf_counter() - t0
    return RunRecord(run_id="", result=result, relevance_r=result.relevance_r, elapsed=elapsed)


def run_and_store(store: RunStore, config: RunConfig, run_id: str | None = None,
                  full: bool = False, workers: int = 1) -> RunRecord:
    """Execute a run and persist it; status file tracks progress/failure."""
    if run_id is None:
        run_id = store.new_run_id()
        store.create(run_id, config)
    store.set_status(run_id, STATUS_RUNNING)
    try:
        if full:
            record = execute_full(config, workers=workers)
        else:
            record = execute_exploration(config)
    except Exception as exc:
        store.set_status(run_id, STATUS_FAILED, error=f"{type(exc).__name__}: {exc}")
        raise
    store.save_result(run_id, record.result, elapsed=record.elapsed)
    store.set_status(run_id, STATUS_DONE)
    record.run_id = run_id
    return record
