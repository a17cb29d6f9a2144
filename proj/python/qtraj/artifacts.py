"""Reader for artifact directories written by `qtraj simulate` / `qtraj master`.

Plotting code should go through this module (or the documented CSV/JSON
layout) rather than the compiled extension.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path


def _read_series(path: Path) -> tuple[list[str], dict[str, dict[str, list[float]]]]:
    """Columns and {traj_id: {"time": [...], column: [...]}} of one CSV."""
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:2] != ["time", "traj_id"]:
            raise ValueError(f"{path}: header must start with time,traj_id")
        columns = header[2:]
        runs: dict[str, dict[str, list[float]]] = {}
        for row in reader:
            if not row:
                continue
            run = runs.setdefault(row[1], {"time": [], **{c: [] for c in columns}})
            run["time"].append(float(row[0]))
            for c, v in zip(columns, row[2:]):
                run[c].append(float(v))
    return columns, runs


@dataclass
class RunDirectory:
    path: Path
    manifest: dict
    columns: list[str]
    runs: dict[str, dict[str, list[float]]] = field(default_factory=dict)
    aggregate: dict[str, dict[str, list[float]]] = field(default_factory=dict)

    def series(self, column: str, traj_id: str | None = None) -> tuple[list[float], list[float]]:
        if column not in self.columns:
            raise KeyError(f"observable {column!r} not found; available: {', '.join(self.columns)}")
        source = self.runs if traj_id is not None else (self.aggregate or self.runs)
        key = traj_id if traj_id is not None else ("mean" if self.aggregate else next(iter(self.runs)))
        run = source[key]
        return run["time"], run[column]

    def jump_log(self) -> list[tuple[str, float, str]]:
        path = self.path / "jumps.csv"
        if not path.exists():
            return []
        with path.open(newline="") as fh:
            rows = list(csv.DictReader(fh))
        return [(r["traj_id"], float(r["time"]), r["channel"]) for r in rows]


def load_run_directory(path: str | Path) -> RunDirectory:
    path = Path(path)
    manifest = json.loads((path / "manifest.json").read_text())
    if manifest.get("schema_version") != 1:
        raise ValueError(f"{path}: unsupported schema_version {manifest.get('schema_version')}")
    columns: list[str] = []
    runs: dict[str, dict[str, list[float]]] = {}
    for csv_path in sorted(path.glob("traj_*.csv"), key=lambda p: int(p.stem[5:])):
        columns, r = _read_series(csv_path)
        runs.update(r)
    if (path / "master.csv").exists():
        columns, runs = _read_series(path / "master.csv")
    aggregate: dict[str, dict[str, list[float]]] = {}
    if (path / "aggregate.csv").exists():
        _, aggregate = _read_series(path / "aggregate.csv")
    return RunDirectory(path, manifest, columns, runs, aggregate)


def is_nan(x: float) -> bool:
    return isinstance(x, float) and math.isnan(x)
