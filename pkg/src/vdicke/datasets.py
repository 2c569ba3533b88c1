"""Parameter grids, sweep execution and dataset export.

Datasets are CSV bodies (one row per grid point, full 17-significant-digit
precision) plus a JSON manifest carrying the complete configuration, the
resolved sign convention, code version and wall time.  Row order equals
grid order regardless of worker scheduling, so identical configurations
produce byte-identical CSV bodies.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .errors import ValidationError
from .params import OMEGA_SIGN_CONVENTION, ModelParams

GRID_AXES = ("lambda1", "lambda2", "phi", "lambda_r")


@dataclass(frozen=True)
class GridAxis:
    name: str
    start: float
    stop: float
    num: int

    def __post_init__(self):
        if self.name not in GRID_AXES:
            raise ValidationError(f"unknown grid axis {self.name!r}; "
                                  f"expected one of {GRID_AXES}")
        if self.num < 0:
            raise ValidationError("axis point count must be nonnegative")

    def values(self):
        if self.num == 0:
            return []
        if self.num == 1:
            return [self.start]
        step = (self.stop - self.start) / (self.num - 1)
        return [self.start + i * step for i in range(self.num)]


@dataclass(frozen=True)
class GridSpec:
    """One- or two-axis grid with an optional fixed coupling ratio.

    ``ratio`` interprets a ``lambda_r`` axis as the radial coupling with
    ``lambda2 = ratio * lambda1`` (and likewise fixes the partner when only
    one coupling axis is swept).
    """

    axes: tuple
    ratio: float | None = None   # lambda2 / lambda1

    def __post_init__(self):
        if not 1 <= len(self.axes) <= 2:
            raise ValidationError("grid must have one or two axes")
        names = [a.name for a in self.axes]
        if len(set(names)) != len(names):
            raise ValidationError("grid axes must be distinct")

    def points(self, base: ModelParams):
        """Yield (coords, ModelParams) in row-major order."""
        axes = self.axes
        if len(axes) == 1:
            coords = [(v,) for v in axes[0].values()]
        else:
            coords = [(u, v) for u in axes[0].values() for v in axes[1].values()]
        for coord in coords:
            yield coord, self._apply(base, dict(zip([a.name for a in axes], coord)))

    def _apply(self, base: ModelParams, values: dict) -> ModelParams:
        kw = {}
        if "lambda_r" in values:
            r = self.ratio if self.ratio is not None else (
                base.lambda2 / base.lambda1 if base.lambda1 > 0 else 0.0)
            lam1 = values["lambda_r"] / math.sqrt(1.0 + r * r)
            kw["lambda1"] = lam1
            kw["lambda2"] = r * lam1
        for name in ("lambda1", "lambda2", "phi"):
            if name in values:
                kw[name] = values[name]
        if self.ratio is not None and "lambda_r" not in values:
            if "lambda1" in kw and "lambda2" not in values:
                kw["lambda2"] = self.ratio * kw["lambda1"]
            elif "lambda2" in kw and "lambda1" not in values:
                kw["lambda1"] = kw["lambda2"] / self.ratio if self.ratio else 0.0
        return base.replace(**kw)


@dataclass
class Dataset:
    """Rows plus metadata; the in-memory form of one sweep artifact."""

    columns: list
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        def fmt(v):
            if isinstance(v, float):
                return f"{v:.17g}"
            return str(v)
        lines = [",".join(self.columns)]
        for row in self.rows:
            lines.append(",".join(fmt(row.get(c, "")) for c in self.columns))
        return "\n".join(lines) + "\n"

    @property
    def n_failed(self) -> int:
        return sum(1 for r in self.rows if r.get("error"))


def _eval_point(args):
    fn, coord, p = args
    try:
        row = fn(p)
        row["error"] = ""
    except Exception as exc:  # per-point failures are data, not crashes
        row = {"error": f"{type(exc).__name__}: {exc}"}
    return coord, row


def run_sweep(fn, grid: GridSpec, base: ModelParams, coord_names=None,
              workers: int = 0, meta: dict | None = None) -> Dataset:
    """Evaluate ``fn(params) -> row dict`` over the grid.

    Rows are assembled in grid order; per-point exceptions are recorded in
    the row's ``error`` field and do not abort the sweep.
    """
    t0 = time.time()
    names = coord_names or [a.name for a in grid.axes]
    tasks = [(fn, coord, p) for coord, p in grid.points(base)]
    if workers and workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_eval_point, tasks, chunksize=8))
    else:
        results = [_eval_point(t) for t in tasks]

    columns = list(names)
    seen = set(columns)
    for _, row in results:
        for key in row:
            if key not in seen:
                seen.add(key)
                columns.append(key)
    if "error" in columns:
        columns.remove("error")
        columns.append("error")

    ds = Dataset(columns=columns)
    for coord, row in results:
        full = dict(zip(names, coord))
        full.update(row)
        ds.rows.append(full)
    ds.meta = dict(meta or {})
    ds.meta.update({
        "base_params": {k: getattr(base, k) for k in ModelParams._KV_FIELDS},
        "grid": [{"name": a.name, "start": a.start, "stop": a.stop, "num": a.num}
                 for a in grid.axes],
        "ratio": grid.ratio,
        "omega_sign_convention": OMEGA_SIGN_CONVENTION,
        "wall_time_s": time.time() - t0,
        "n_points": len(ds.rows),
        "n_failed": ds.n_failed,
    })
    return ds


def write_dataset(ds: Dataset, csv_path, manifest_path=None) -> None:
    with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(ds.to_csv())
    if manifest_path is not None:
        with open(manifest_path, "w", encoding="utf-8") as fh:
            json.dump(ds.meta, fh, indent=2, sort_keys=True)
            fh.write("\n")
