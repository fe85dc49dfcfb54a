"""Grid sweeps over one or two run-config axes."""
from __future__ import annotations

import itertools
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from ..errors import ConfigError, SsinrError
from ..metrics import aggregate_trials
from ..numerics import derive_seed
from .config import check_keys, merge, resolve
from .runner import execute, write_csv

DEFAULT_MAX_CELLS = 128
STAT_KEYS = ("psnr", "ssim", "mse")


@dataclass
class SweepSpec:
    base: dict
    axes: list                      # [(name, [values...]), ...]
    seeds: int = 1
    max_cells: int = DEFAULT_MAX_CELLS

    @classmethod
    def from_dict(cls, doc):
        unknown = set(doc) - {"base", "axes", "seeds", "max_cells"}
        if unknown:
            raise ConfigError(f"unknown sweep key(s): {', '.join(sorted(unknown))}")
        base = doc.get("base", {})
        check_keys(base, "base config")
        axes = []
        for ax in doc.get("axes", []):
            name, values = ax.get("name"), ax.get("values")
            if not name:
                raise ConfigError("sweep axis without a name")
            check_keys({name: None}, "axis")
            if not values:
                raise ConfigError(f"sweep axis {name!r} has no values")
            axes.append((name, list(values)))
        if not 1 <= len(axes) <= 2:
            raise ConfigError(f"a sweep needs one or two axes, got {len(axes)}")
        spec = cls(base, axes, int(doc.get("seeds", 1)), int(doc.get("max_cells", DEFAULT_MAX_CELLS)))
        if spec.seeds < 1:
            raise ConfigError("seeds per cell must be >= 1")
        if len(spec.cells()) > spec.max_cells:
            raise ConfigError(f"sweep has {len(spec.cells())} cells, above the cap of {spec.max_cells}")
        return spec

    @classmethod
    def load(cls, path):
        try:
            with open(path, encoding="utf-8") as fh:
                return cls.from_dict(json.load(fh))
        except OSError as exc:
            raise ConfigError(f"cannot read sweep spec {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"sweep spec {path} is not valid JSON: {exc}") from None

    @property
    def axis_names(self):
        return [name for name, _ in self.axes]

    def cells(self):
        return [dict(zip(self.axis_names, combo)) for combo in itertools.product(*(v for _, v in self.axes))]


def _job(args):
    cfg, out_dir = args
    try:
        s = execute(cfg, out_dir)
        return {"status": "ok", **{k: s["final"][k] for k in STAT_KEYS}}
    except SsinrError as exc:
        return {"status": f"failed:{type(exc).__name__}", "error": str(exc)}


def run_sweep(spec, out_dir, jobs=1):
    """Run every cell x seed, then aggregate. Returns the aggregated rows."""
    out_dir = Path(out_dir)
    base = merge(spec.base)
    base_seed = int(base["seed"])
    tasks, owners = [], []
    for ci, cell in enumerate(spec.cells()):
        for trial in range(spec.seeds):
            cfg = {**base, **cell, "seed": derive_seed(base_seed, ci, trial)}
            cell_dir = out_dir / f"cell_{ci:03d}" / f"seed_{trial}"
            try:
                cfg = resolve(cfg)
            except ConfigError as exc:
                tasks.append(None)
                owners.append((ci, {"status": "failed:ConfigError", "error": str(exc)}))
                continue
            tasks.append((cfg, str(cell_dir)))
            owners.append((ci, None))

    todo = [t for t in tasks if t is not None]
    if jobs > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            done = iter(list(pool.map(_job, todo)))
    else:
        done = iter([_job(t) for t in todo])

    per_cell = {}
    for task, (ci, failure) in zip(tasks, owners):
        per_cell.setdefault(ci, []).append(failure if task is None else next(done))

    rows = []
    for ci, cell in enumerate(spec.cells()):
        results = per_cell.get(ci, [])
        ok = [r for r in results if r["status"] == "ok"]
        row = {"cell": ci, **{k: json.dumps(v) if not isinstance(v, (int, float, str)) else v for k, v in cell.items()}}
        failed = [r for r in results if r["status"] != "ok"]
        row["status"] = "ok" if not failed else failed[0]["status"]
        row["seeds"] = len(ok)
        for key in STAT_KEYS:
            if ok:
                st = aggregate_trials(r[key] for r in ok)
                row[f"{key}_mean"], row[f"{key}_std"] = st.mean, st.std
        rows.append(row)
    columns = ["cell", *spec.axis_names, "status", "seeds"] + [f"{k}_{s}" for k in STAT_KEYS for s in ("mean", "std")]
    write_csv(out_dir / "sweep.csv", columns, rows)
    return rows
