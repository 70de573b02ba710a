"""Parallel (omega, E) parameter sweeps with checkpoint/resume.

Cells are computed independently in row-major order (omega outer, E inner)
by a worker pool; results are keyed by cell index so the assembled grid and
its CSV are byte-identical regardless of worker count or scheduling.  The
checkpoint is an append-only JSONL record log with a hash of the sweep
specification; on completion it is compacted in index order via an atomic
rename.
"""
from __future__ import annotations

import hashlib
import io
import json
import math
import multiprocessing
import os
from dataclasses import dataclass

import numpy as np

from . import fastpath
from .burst import burst_metrics
from .errors import FhnBurstError, IncompleteGrid, IntegrationError
from .geometry import classify_region
from .integrator import IntegratorConfig
from .model import Forcing, ModelParams

CSV_HEADER = "omega,E,status,spike_count,l2,est_count,region"
CHECKPOINT_FORMAT = 1
DEFAULT_FLUSH_EVERY = 256
ALL_METRICS = ("spike_count", "l2", "est_count", "region")


@dataclass(frozen=True)
class SweepSpec:
    """Rectangular sweep: inclusive [lo, hi] axes walked with a fixed step."""

    omega_range: tuple[float, float, float]     # (lo, hi, step)
    e_range: tuple[float, float, float]
    metrics: tuple[str, ...] = ALL_METRICS
    workers: int = 1

    def __post_init__(self):
        for rng in (self.omega_range, self.e_range):
            lo, hi, step = rng
            if not (step > 0.0 and hi > lo):
                raise ValueError("ranges must be non-degenerate with positive step")
        bad = set(self.metrics) - set(ALL_METRICS)
        if bad:
            raise ValueError(f"unknown metrics: {sorted(bad)}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    @staticmethod
    def _axis(rng) -> np.ndarray:
        lo, hi, step = rng
        n = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return lo + step * np.arange(n)

    @property
    def omegas(self) -> np.ndarray:
        return self._axis(self.omega_range)

    @property
    def e_values(self) -> np.ndarray:
        return self._axis(self.e_range)

    @property
    def cell_count(self) -> int:
        return len(self.omegas) * len(self.e_values)


@dataclass(frozen=True)
class CellResult:
    omega: float
    E: float
    status: str = "ok"
    spike_count: int | None = None
    l2: float | None = None
    est_count: int | None = None
    region: str | None = None

    def csv_row(self) -> str:
        def num(v, fmt="{:.17g}"):
            return "" if v is None else fmt.format(v)

        return ",".join(
            [
                f"{self.omega:.17g}",
                f"{self.E:.17g}",
                self.status,
                "" if self.spike_count is None else str(self.spike_count),
                num(self.l2),
                "" if self.est_count is None else str(self.est_count),
                self.region or "",
            ]
        )


class SweepGrid:
    """Dense row-major grid of cell results plus provenance metadata."""

    def __init__(self, spec: SweepSpec, params: ModelParams, meta=None):
        self.spec = spec
        self.params = params
        self.omegas = spec.omegas
        self.e_values = spec.e_values
        self.cells: list[CellResult | None] = [None] * spec.cell_count
        self.meta = dict(meta) if meta else {}

    def index(self, i: int, j: int) -> int:
        return i * len(self.e_values) + j

    def cell(self, i: int, j: int) -> CellResult | None:
        return self.cells[self.index(i, j)]

    @property
    def complete(self) -> bool:
        return all(c is not None for c in self.cells)

    def pending_indices(self) -> list[int]:
        return [k for k, c in enumerate(self.cells) if c is None]

    def value_array(self, metric: str) -> np.ndarray:
        """Metric values as a (n_omega, n_e) float array, NaN where unavailable."""
        if not self.complete:
            raise IncompleteGrid("grid has pending cells")
        out = np.full((len(self.omegas), len(self.e_values)), np.nan)
        for i in range(len(self.omegas)):
            for j in range(len(self.e_values)):
                c = self.cells[self.index(i, j)]
                if c.status != "ok":
                    continue
                v = getattr(c, metric)
                if v is not None:
                    out[i, j] = float(v)
        return out

    def to_csv(self) -> str:
        if not self.complete:
            raise IncompleteGrid("grid has pending cells")
        buf = io.StringIO()
        buf.write(CSV_HEADER + "\n")
        for cell in self.cells:
            buf.write(cell.csv_row() + "\n")
        return buf.getvalue()


def spec_fingerprint(spec: SweepSpec, params: ModelParams, config: IntegratorConfig) -> str:
    doc = {
        "omega_range": list(spec.omega_range),
        "e_range": list(spec.e_range),
        "metrics": list(spec.metrics),
        "params": [params.a, params.b, params.eps],
        "config": [config.rel_tol, config.abs_tol, config.max_step or 0.0],
        "backend": fastpath.active_backend(),
        "format": CHECKPOINT_FORMAT,
    }
    return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()


def _compute_cell(args) -> tuple[int, CellResult]:
    idx, omega, e_val, params, config, metrics = args
    forcing = Forcing(E=e_val, omega=omega)
    region = classify_region(params, forcing) if "region" in metrics else None
    try:
        m = burst_metrics(
            params, forcing, config, with_estimate="est_count" in metrics
        )
    except (IntegrationError, FhnBurstError) as exc:
        return idx, CellResult(
            omega=omega, E=e_val, status=f"err:{type(exc).__name__}", region=region
        )
    return idx, CellResult(
        omega=omega,
        E=e_val,
        status="ok",
        spike_count=m.spike_count if "spike_count" in metrics else None,
        l2=m.l2 if "l2" in metrics else None,
        est_count=m.est_count if "est_count" in metrics else None,
        region=region,
    )


def _cell_to_record(idx: int, cell: CellResult) -> str:
    return json.dumps(
        {
            "i": idx,
            "omega": cell.omega,
            "E": cell.E,
            "status": cell.status,
            "spike_count": cell.spike_count,
            "l2": cell.l2,
            "est_count": cell.est_count,
            "region": cell.region,
        },
        sort_keys=True,
    )


def _record_to_cell(rec: dict) -> tuple[int, CellResult]:
    return rec["i"], CellResult(
        omega=rec["omega"],
        E=rec["E"],
        status=rec["status"],
        spike_count=rec["spike_count"],
        l2=rec["l2"],
        est_count=rec["est_count"],
        region=rec["region"],
    )


def load_checkpoint(path: str, fingerprint: str) -> dict[int, CellResult]:
    """Completed cells from a record log; rejects a mismatched fingerprint."""
    done: dict[int, CellResult] = {}
    with open(path, "r", encoding="utf-8") as fh:
        header_line = fh.readline()
        if not header_line:
            return done
        header = json.loads(header_line)
        if header.get("spec_hash") != fingerprint:
            raise ValueError("checkpoint does not match this sweep specification")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            idx, cell = _record_to_cell(json.loads(line))
            done[idx] = cell
    return done


def run_sweep(
    spec: SweepSpec,
    params: ModelParams | None = None,
    config: IntegratorConfig | None = None,
    checkpoint_path: str | None = None,
    flush_every: int = DEFAULT_FLUSH_EVERY,
    progress=None,
) -> SweepGrid:
    """Run (or resume) the sweep; per-cell failures are recorded, never raised."""
    params = params or ModelParams()
    config = config or IntegratorConfig()
    fingerprint = spec_fingerprint(spec, params, config)
    grid = SweepGrid(
        spec, params, meta={"spec_hash": fingerprint, "backend": fastpath.active_backend()}
    )
    omegas, e_values = grid.omegas, grid.e_values
    n_e = len(e_values)

    if checkpoint_path and os.path.exists(checkpoint_path):
        for idx, cell in load_checkpoint(checkpoint_path, fingerprint).items():
            grid.cells[idx] = cell

    pending = grid.pending_indices()
    log_fh = None
    if checkpoint_path:
        fresh = not os.path.exists(checkpoint_path)
        log_fh = open(checkpoint_path, "a", encoding="utf-8")
        if fresh:
            log_fh.write(
                json.dumps({"format": CHECKPOINT_FORMAT, "spec_hash": fingerprint})
                + "\n"
            )
            log_fh.flush()

    def tasks():
        for idx in pending:
            i, j = divmod(idx, n_e)
            yield idx, float(omegas[i]), float(e_values[j]), params, config, spec.metrics

    try:
        since_flush = 0
        if spec.workers == 1 or len(pending) <= 1:
            results = map(_compute_cell, tasks())
            for idx, cell in results:
                grid.cells[idx] = cell
                if log_fh:
                    log_fh.write(_cell_to_record(idx, cell) + "\n")
                    since_flush += 1
                    if since_flush >= flush_every:
                        log_fh.flush()
                        os.fsync(log_fh.fileno())
                        since_flush = 0
                if progress:
                    progress(idx, cell)
        else:
            chunk = max(1, len(pending) // (spec.workers * 8))
            with multiprocessing.Pool(spec.workers) as pool:
                for idx, cell in pool.imap_unordered(_compute_cell, tasks(), chunk):
                    grid.cells[idx] = cell
                    if log_fh:
                        log_fh.write(_cell_to_record(idx, cell) + "\n")
                        since_flush += 1
                        if since_flush >= flush_every:
                            log_fh.flush()
                            os.fsync(log_fh.fileno())
                            since_flush = 0
                    if progress:
                        progress(idx, cell)
    finally:
        if log_fh:
            log_fh.flush()
            os.fsync(log_fh.fileno())
            log_fh.close()

    if checkpoint_path and grid.complete:
        compact_checkpoint(checkpoint_path, fingerprint, grid)
    return grid


def compact_checkpoint(path: str, fingerprint: str, grid: SweepGrid) -> None:
    """Rewrite the log in index order and atomically replace it."""
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"format": CHECKPOINT_FORMAT, "spec_hash": fingerprint}) + "\n")
        for idx, cell in enumerate(grid.cells):
            fh.write(_cell_to_record(idx, cell) + "\n")
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def write_grid_csv(grid: SweepGrid, path: str) -> None:
    """Atomic CSV export of a complete grid."""
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(grid.to_csv())
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def load_grid_csv(path: str) -> tuple[np.ndarray, np.ndarray, list[dict]]:
    """Parse a grid CSV back into axes plus row dictionaries."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"unexpected grid CSV header: {header!r}")
        for line in fh:
            parts = line.rstrip("\n").split(",")
            rows.append(
                {
                    "omega": float(parts[0]),
                    "E": float(parts[1]),
                    "status": parts[2],
                    "spike_count": int(parts[3]) if parts[3] else None,
                    "l2": float(parts[4]) if parts[4] else None,
                    "est_count": int(parts[5]) if parts[5] else None,
                    "region": parts[6] or None,
                }
            )
    omegas = np.unique([r["omega"] for r in rows])
    e_values = np.unique([r["E"] for r in rows])
    return omegas, e_values, rows


def grid_from_rows(omegas, e_values, rows) -> tuple[np.ndarray, np.ndarray, dict[str, np.ndarray]]:
    """Rebuild dense metric arrays from CSV rows (NaN for failed/missing)."""
    n_o, n_e = len(omegas), len(e_values)
    arrays = {
        "spike_count": np.full((n_o, n_e), np.nan),
        "l2": np.full((n_o, n_e), np.nan),
        "est_count": np.full((n_o, n_e), np.nan),
    }
    o_index = {v: k for k, v in enumerate(omegas)}
    e_index = {v: k for k, v in enumerate(e_values)}
    for r in rows:
        i, j = o_index[r["omega"]], e_index[r["E"]]
        if r["status"] != "ok":
            continue
        for key in arrays:
            if r[key] is not None:
                arrays[key][i, j] = float(r[key])
    return np.asarray(omegas), np.asarray(e_values), arrays
