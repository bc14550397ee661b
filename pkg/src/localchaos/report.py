"""Write an :class:`ExperimentRecord` to a directory: manifest.json, CSV tables, SVG plots."""

from __future__ import annotations

import csv
import json
import math
import platform
from pathlib import Path

import numba
import numpy as np
import scipy

from . import __version__
from ._svg import line_plot, scatter_plot
from .experiments import ExperimentKind, ExperimentRecord, Table
from .models import UNIT_SYSTEM

__all__ = ["SCHEMA_VERSION", "emit_report", "format_cell", "write_csv"]

SCHEMA_VERSION = 1


def format_cell(v) -> str:
    """Round-trip text for one CSV cell: floats with 17 significant digits."""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    return str(v)


def _write(path: Path, writer):
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer(fh)
    except OSError as err:
        raise OSError(f"cannot write {path}: {err.strerror or err}") from err


def write_csv(path, table: Table) -> Path:
    path = Path(path)

    def body(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(table.columns)
        for row in table.rows:
            w.writerow([format_cell(v) for v in row])

    _write(path, body)
    return path


def _plots(record: ExperimentRecord) -> dict[str, str]:
    kind = record.config.kind
    tables = record.tables
    out = {}
    if kind is ExperimentKind.TOY:
        tab = tables["toy"]
        t = tab.column("t")
        xi1, xi2 = tab.column("xi1"), tab.column("xi2")
        peak = max(np.abs(xi1).max(), np.abs(xi2).max())
        out["toy.svg"] = line_plot(
            t,
            [("xi1", xi1, "red"), ("xi2", xi2, "blue"), ("envelope", tab.column("envelope"), "black")],
            title=f"Deviation under the toy matrix, delta_t = {record.config.delta_t:g}",
            xlabel="t", ylabel="displacement", source="toy.csv", x_column="t", ylim=(-1.2 * peak, 1.2 * peak),
        )
    elif kind is ExperimentKind.TODA_SWEEP:
        tab = tables["toda_sweep"]
        out["toda_sweep.svg"] = line_plot(
            tab.column("energy"),
            [("max_product", tab.column("max_product"), "black"),
             ("cumulative_product", tab.column("cumulative_product"), "#888")],
            title="Largest delta_t * lambda_max over the ensemble", xlabel="energy", ylabel="product",
            source="toda_sweep.csv", x_column="energy",
        )
    elif kind is ExperimentKind.TODA_POINCARE:
        tab = tables["section"]
        if tab.rows:
            out["section.svg"] = scatter_plot(
                tab.column("y"), tab.column("p_y"),
                title=f"Section x = 0, p_x > 0 at E = {record.config.energy:g}",
                xlabel="y", ylabel="p_y", source="section.csv", columns=["y", "p_y"],
            )
    elif kind is ExperimentKind.CELESTIAL and "series" in tables:
        tab = tables["series"]
        ind = record.config.indicator.value
        out["lambda_plus.svg"] = line_plot(
            tab.column("t"), [(f"{ind}_plus", tab.column(f"{ind}_plus"), "black")],
            title=f"Largest eigenvalue of N ({ind})", xlabel="t [yr]", ylabel="lambda_plus [1/yr^2]",
            source="series.csv", x_column="t",
        )
        out["orbit.svg"] = scatter_plot(
            tab.column("x"), tab.column("y"), title="Orbit", xlabel="x [AU]", ylabel="y [AU]",
            source="series.csv", columns=["x", "y"], radius=0.8,
        )
    return out


def _manifest(record: ExperimentRecord, files) -> dict:
    cfg = record.config.to_dict()
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "localchaos", "version": __version__},
        "versions": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "numba": numba.__version__,
        },
        "units": UNIT_SYSTEM,
        "seed": record.config.seed,
        "config": cfg,
        "runs": [{"name": r.name, "status": "ok" if r.ok else "failed", "reason": r.reason} for r in record.runs],
        "summary": record.summary,
        "wall_time_s": record.wall_time,
        "files": list(files),
    }


def _json_default(o):
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def emit_report(record: ExperimentRecord, out_dir=None) -> list[Path]:
    """Write the record's tables, plots and manifest; return the written paths.

    ``out_dir`` defaults to the directory named in the config.
    """
    out_dir = Path(out_dir if out_dir is not None else record.config.output_dir or ".")
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as err:
        raise OSError(f"cannot create {out_dir}: {err.strerror or err}") from err

    written = []
    for name, table in record.tables.items():
        written.append(write_csv(out_dir / f"{name}.csv", table))
    for name, svg in _plots(record).items():
        path = out_dir / name
        _write(path, lambda fh, s=svg: fh.write(s))
        written.append(path)
    names = [p.name for p in written]
    manifest = out_dir / "manifest.json"
    _write(manifest, lambda fh: json.dump(_manifest(record, names), fh, indent=2, default=_json_default,
                                          allow_nan=True))
    written.append(manifest)
    record.files = [p.name for p in written]
    return written
