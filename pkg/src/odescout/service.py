"""HTTP API over a run store.

Read endpoints serve persisted runs; POST /runs validates a config and
launches the pipeline on a small worker pool, returning immediately with a
queued id.  Runs are immutable once written, so loaded fields are cached
in-process for slice queries.
"""

from __future__ import annotations

import math
import threading
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Query, Request
from fastapi.middleware.cors import CORSMiddleware

from .errors import ConfigError, ExtrapolationError, OdescoutError
from .interpolation import InterpolatedField, SliceResult
from .pipeline import run_and_store
from .runconfig import parse_run_config, run_config_to_dict
from .store import RunStore, STATUS_DONE, StoredRun


def slice_to_payload(slc: SliceResult) -> dict:
    """JSON-safe dict for a slice; NaN values become null."""
    values = [
        [None if math.isnan(v) else v for v in row]
        for row in np.asarray(slc.values, dtype=float).tolist()
    ]
    return {
        "axes": list(slc.axes),
        "fixed": dict(slc.fixed),
        "axis_values": [np.asarray(a, dtype=float).tolist() for a in slc.axis_values],
        "values": values,
        "flags": [list(row) for row in np.asarray(slc.flags)],
    }


def parse_fix_params(raw: list[str]) -> dict[str, float]:
    """Parse fix=name:value items (comma-separated lists allowed)."""
    fixed: dict[str, float] = {}
    for item in raw:
        for part in item.split(","):
            part = part.strip()
            if not part:
                continue
            name, sep, value_s = part.partition(":")
            if not sep or not name:
                raise ConfigError(f"fix parameter {part!r} is not of the form name:value")
            try:
                value = float(value_s)
            except ValueError:
                raise ConfigError(f"fix parameter {part!r}: {value_s!r} is not a number") from None
            if name in fixed:
                raise ConfigError(f"fix parameter {name!r} given twice")
            fixed[name] = value
    return fixed


class _FieldCache:
    """Loaded runs and their interpolators, keyed by run id."""

    def __init__(self, store: RunStore):
        self.store = store
        self._lock = threading.Lock()
        self._loaded: dict[str, tuple[StoredRun, InterpolatedField]] = {}

    def get(self, run_id: str) -> tuple[StoredRun, InterpolatedField]:
        with self._lock:
            hit = self._loaded.get(run_id)
        if hit is not None:
            return hit
        run = self.store.load(run_id)
        field = InterpolatedField(run.result)
        with self._lock:
            self._loaded[run_id] = (run, field)
        return run, field


def create_app(store: RunStore | str | Path, max_workers: int = 2) -> FastAPI:
    if not isinstance(store, RunStore):
        store = RunStore(store)
    app = FastAPI(title="odescout", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["GET", "POST"],
        allow_headers=["*"],
    )
    app.state.store = store
    app.state.cache = _FieldCache(store)
    app.state.pool = ThreadPoolExecutor(max_workers=max_workers)

    def _not_found(run_id: str) -> HTTPException:
        return HTTPException(status_code=404, detail=f"unknown run id {run_id!r}")

    @app.get("/runs")
    def list_runs() -> list[dict]:
        return store.list_runs()

    @app.get("/runs/{run_id}")
    def get_run(run_id: str) -> dict:
        try:
            store.run_dir(run_id)
        except KeyError:
            raise _not_found(run_id) from None
        status = store.get_status(run_id)
        meta = store.load_meta(run_id)
        config = run_config_to_dict(store.load_config(run_id))
        counters = None
        if status.get("status") == STATUS_DONE:
            run, _ = app.state.cache.get(run_id)
            counters = run.result.counters.as_dict()
        return {
            "id": run_id,
            "status": status.get("status"),
            "error": status.get("error"),
            "config": config,
            "counters": counters,
            "meta": meta,
        }

    @app.get("/runs/{run_id}/status")
    def get_status(run_id: str) -> dict:
        try:
            store.run_dir(run_id)
        except KeyError:
            raise _not_found(run_id) from None
        status = store.get_status(run_id)
        return {"status": status.get("status"), "error": status.get("error")}

    @app.get("/runs/{run_id}/slice")
    def get_slice(
        run_id: str,
        axes: str = Query(..., description="two grid axis names, comma-separated"),
        fix: list[str] = Query(default=[], description="name:value for each remaining axis"),
    ) -> dict:
        try:
            store.run_dir(run_id)
        except KeyError:
            raise _not_found(run_id) from None
        axis_pair = tuple(a.strip() for a in axes.split(",") if a.strip())
        if len(axis_pair) != 2:
            raise HTTPException(status_code=400, detail=f"axes must name two axes, got {axes!r}")
        try:
            fixed = parse_fix_params(fix)
            _, field = app.state.cache.get(run_id)
            slc = field.extract_slice(axis_pair, fixed)
        except (ConfigError, ExtrapolationError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        return slice_to_payload(slc)

    @app.post("/runs", status_code=201)
    async def launch_run(request: Request) -> dict:
        try:
            body = await request.json()
        except Exception:
            raise HTTPException(status_code=400, detail="request body is not valid JSON") from None
        try:
            config = parse_run_config(body)
        except OdescoutError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        run_id = store.new_run_id()
        store.create(run_id, config)

        def job() -> None:
            try:
                run_and_store(store, config, run_id=run_id)
            except Exception:
                pass  # status file already records the failure

        app.state.pool.submit(job)
        return {"id": run_id, "status": "queued"}

    return app
