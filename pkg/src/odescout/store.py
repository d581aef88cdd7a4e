"""Disk-backed store for exploration runs.

Each run lives in its own directory under the store root:

    <root>/<run_id>/
        config.json    resolved run configuration (echo of the input)
        entries.csv    one row per grid node: axis indices, parameter
                       values, feature value, flag, source (flat index of
                       the copied-from center, empty otherwise)
        counters.csv   evaluation counters
        meta.json      grid shape, relevance r, tol, timestamps
        status.json    {"status": ..., "error": ...}

Tabular files are comma-delimited with headers.  Floats are serialized with
repr() so a load returns bit-identical values.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError
from .exploration import Counters, Entry, ResultSet
from .grid import Grid
from .runconfig import RunConfig, build_run_grid, parse_run_config, run_config_to_dict

STATUS_QUEUED = "queued"
STATUS_RUNNING = "running"
STATUS_DONE = "done"
STATUS_FAILED = "failed"

_ID_ALPHABET = "0123456789abcdefghijklmnopqrstuvwxyz"


@dataclass
class StoredRun:
    run_id: str
    config: RunConfig
    grid: Grid
    result: ResultSet
    meta: dict = field(default_factory=dict)


def _format_float(x: float) -> str:
    return repr(float(x))


class RunStore:
    """Create, persist, and reload runs under a root directory."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def run_dir(self, run_id: str) -> Path:
        d = self.root / run_id
        if not d.is_dir():
            raise KeyError(run_id)
        return d

    def new_run_id(self) -> str:
        stamp = time.strftime("%Y%m%d-%H%M%S")
        existing = {p.name for p in self.root.iterdir() if p.is_dir()}
        for i in range(len(_ID_ALPHABET)):
            candidate = f"{stamp}-{_ID_ALPHABET[i]}"
            if candidate not in existing:
                return candidate
        raise RuntimeError("run id space exhausted for this second")

    def create(self, run_id: str, config: RunConfig) -> Path:
        d = self.root / run_id
        d.mkdir(parents=True, exist_ok=False)
        with open(d / "config.json", "w", encoding="utf-8") as fh:
            json.dump(run_config_to_dict(config), fh, indent=2)
        self.set_status(run_id, STATUS_QUEUED)
        return d

    def set_status(self, run_id: str, status: str, error: str | None = None) -> None:
        d = self.root / run_id
        payload = {"status": status, "error": error, "updated": time.time()}
        tmp = d / "status.json.tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(payload, fh)
        tmp.replace(d / "status.json")

    def get_status(self, run_id: str) -> dict:
        d = self.run_dir(run_id)
        path = d / "status.json"
        if not path.exists():
            return {"status": STATUS_QUEUED, "error": None}
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)

    def save_result(self, run_id: str, result: ResultSet, elapsed: float | None = None) -> None:
        d = self.run_dir(run_id)
        grid = result.grid
        names = grid.axis_names
        with open(d / "entries.csv", "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                [f"i_{n}" for n in names] + list(names) + ["value", "flag", "source"]
            )

            def row_for(index, value, flag, source):
                coords = grid.value_at(index)
                return (
                    [str(j) for j in index]
                    + [_format_float(c) for c in coords]
                    + [value, flag, source]
                )

            for index in sorted(result.entries):
                entry = result.entries[index]
                source = "" if entry.source is None else str(grid.flat_index(entry.source))
                writer.writerow(row_for(index, _format_float(entry.value), entry.flag, source))
            for index in sorted(result.failures):
                writer.writerow(row_for(index, "", "failed", ""))
        with open(d / "counters.csv", "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["counter", "value"])
            for name, value in result.counters.as_dict().items():
                writer.writerow([name, value])
        meta = {
            "grid_counts": list(result.grid.counts),
            "axis_names": list(result.grid.axis_names),
            "tol": result.tol,
            "relevance_r": None if result.relevance_r is None else _format_float(result.relevance_r),
            "relevance_variant": result.relevance_variant,
            "elapsed_seconds": elapsed,
            "n_entries": len(result.entries),
            "n_failures": len(result.failures),
        }
        with open(d / "meta.json", "w", encoding="utf-8") as fh:
            json.dump(meta, fh, indent=2)

    def list_runs(self) -> list[dict]:
        rows = []
        for d in sorted(self.root.iterdir()):
            if not d.is_dir() or not (d / "config.json").exists():
                continue
            status = self.get_status(d.name)
            row = {"id": d.name, "status": status.get("status")}
            meta_path = d / "meta.json"
            if meta_path.exists():
                with open(meta_path, "r", encoding="utf-8") as fh:
                    meta = json.load(fh)
                row["grid_counts"] = meta.get("grid_counts")
                row["axis_names"] = meta.get("axis_names")
                row["tol"] = meta.get("tol")
            rows.append(row)
        return rows

    def load_config(self, run_id: str) -> RunConfig:
        d = self.run_dir(run_id)
        with open(d / "config.json", "r", encoding="utf-8") as fh:
            return parse_run_config(json.load(fh))

    def load_meta(self, run_id: str) -> dict:
        d = self.run_dir(run_id)
        path = d / "meta.json"
        if not path.exists():
            return {}
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)

    def load(self, run_id: str) -> StoredRun:
        """Reload a finished run; values round-trip bit-identically."""
        d = self.run_dir(run_id)
        config = self.load_config(run_id)
        grid = build_run_grid(config)
        entries: dict[tuple[int, ...], Entry] = {}
        failures: set[tuple[int, ...]] = set()
        path = d / "entries.csv"
        if not path.exists():
            raise ConfigError(f"run {run_id!r} has no saved entries (status: {self.get_status(run_id)['status']})")
        dim = grid.dim
        expected = [f"i_{n}" for n in grid.axis_names] + list(grid.axis_names) + [
            "value", "flag", "source",
        ]
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if header != expected:
                raise ConfigError(f"run {run_id!r}: unexpected entries.csv header {header!r}")
            for row in reader:
                index = tuple(int(s) for s in row[:dim])
                value_s, flag, source_s = row[2 * dim], row[2 * dim + 1], row[2 * dim + 2]
                if flag == "failed":
                    failures.add(index)
                    continue
                source = grid.index_from_flat(int(source_s)) if source_s else None
                entries[index] = Entry(value=float(value_s), flag=flag, source=source)
        counters = Counters()
        counters_path = d / "counters.csv"
        if counters_path.exists():
            with open(counters_path, "r", encoding="utf-8", newline="") as fh:
                reader = csv.reader(fh)
                next(reader)
                for name, value in reader:
                    if hasattr(counters, name):
                        setattr(counters, name, int(value))
        meta = self.load_meta(run_id)
        r_raw = meta.get("relevance_r")
        result = ResultSet(
            grid=grid,
            entries=entries,
            failures=failures,
            counters=counters,
            tol=meta.get("tol", 0.0),
            relevance_r=None if r_raw is None else float(r_raw),
            relevance_variant=meta.get("relevance_variant"),
        )
        return StoredRun(run_id=run_id, config=config, grid=grid, result=result, meta=meta)
