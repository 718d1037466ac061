"""Persistence of run artifacts: CSV tables, JSON reports, manifests.

All CSV floats are written with 17 significant digits so a value survives
a write/read round trip bit for bit.  JSON files are UTF-8 with sorted
keys; non-finite numbers become nulls because JSON has no spelling for
them.  The manifest is the one deliberately non-reproducible file (it
records wall-clock metadata); everything else is bit-identical across
reruns of the same config.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .core import trapezoid_1d

TIMESERIES_COLUMNS = ("t", "H", "KE", "PE", "damping_power", "sigma",
                      "boundary_B", "max_eta", "cumulative_damping")
SNAPSHOT_COLUMNS = ("x", "eta", "psi", "P_ext")
CONVERGENCE_COLUMNS = ("identity", "residual_1x", "residual_2x",
                       "residual_4x", "factor_12", "factor_24",
                       "fitted_factor")


def fmt(value: float) -> str:
    return "%.17g" % float(value)


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([cell if isinstance(cell, str) else fmt(cell)
                             for cell in row])


def _jsonify(obj):
    """Recursively convert report objects into JSON-safe structures."""
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else None
    if isinstance(obj, np.ndarray):
        return [_jsonify(v) for v in obj.tolist()]
    return obj


def write_json(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_jsonify(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_timeseries(history, path) -> None:
    """Scalar diagnostics of a run, one row per stored instant."""
    times = np.asarray(history.times, dtype=float)
    power = np.array([r.damping_power for r in history.diagnostics])
    cumulative = np.concatenate(
        ([0.0], np.cumsum(0.5 * (power[1:] + power[:-1]) * np.diff(times)))
    ) if times.size > 1 else np.zeros(times.size)
    rows = []
    for k, rec in enumerate(history.diagnostics):
        eta = history.states[k].eta
        rows.append((rec.t, rec.H, rec.KE, rec.PE, rec.damping_power,
                     rec.Sigma, rec.boundary_B, float(np.max(np.abs(eta))),
                     cumulative[k]))
    write_csv(Path(path), TIMESERIES_COLUMNS, rows)


def write_snapshot(history, index: int, path) -> None:
    state = history.states[index]
    pressure = history.pressures[index]
    rows = zip(history.grid.x, state.eta, state.psi, pressure.P)
    write_csv(Path(path), SNAPSHOT_COLUMNS, rows)


def snapshot_pressure_mean(history, index: int) -> float:
    pressure = history.pressures[index]
    return float(trapezoid_1d(pressure.P, history.grid.dx) / history.geo.L)


def decay_payload(report) -> dict:
    """DecayReport flattened for the summary and audit files."""
    return {
        "Cm": report.constants.Cm,
        "c": report.constants.c,
        "alpha": report.constants.alpha,
        "N1T": report.constants.N1T,
        "N2T": report.constants.N2T,
        "admissible": report.constants.admissible,
        "certificate_lhs": report.certificate_lhs,
        "certificate_rhs": report.certificate_rhs,
        "certificate_holds": report.certificate_holds,
        "observation_lhs": report.observation_lhs,
        "observation_rhs": report.observation_rhs,
        "observation_holds": report.observation_holds,
        "boundary_term": report.boundary_term,
        "boundary_bound": report.boundary_bound,
        "decay_rate": report.decay_rate,
        "window_ratios": list(report.window_ratios),
        "certifying": report.certifying,
    }


def identity_payload(report) -> dict:
    return {
        "lhs": report.lhs,
        "rhs": report.rhs,
        "residual": report.residual,
        "relative_residual": report.relative_residual,
        "per_term_breakdown": dict(report.per_term_breakdown),
    }


@dataclass
class RunManifest:
    """What a command produced: config, version, timing, files."""

    command: str
    config: dict
    files: list[str] = field(default_factory=list)
    version: str = __version__
    started_utc: str = ""
    duration_seconds: float = 0.0

    def add(self, path, name: str | None = None) -> Path:
        """Register an emitted file under its name (or a relative name)."""
        path = Path(path)
        name = path.name if name is None else name
        if name != "manifest.json" and name not in self.files:
            self.files.append(name)
        return path

    def merge(self, other: "RunManifest", prefix: str) -> None:
        """Absorb a sub-run's file list under a directory prefix."""
        for name in [*other.files, "manifest.json"]:
            entry = f"{prefix}/{name}"
            if entry not in self.files:
                self.files.append(entry)

    def payload(self) -> dict:
        return {
            "command": self.command,
            "config": self.config,
            "files": sorted(self.files),
            "version": self.version,
            "started_utc": self.started_utc,
            "duration_seconds": self.duration_seconds,
        }


def start_manifest(command: str, config_snapshot: dict) -> RunManifest:
    return RunManifest(
        command=command,
        config=config_snapshot,
        started_utc=datetime.now(timezone.utc).isoformat(),
    )


def finish_manifest(manifest: RunManifest, out_dir, t0: float,
                    t1: float) -> None:
    manifest.duration_seconds = t1 - t0
    write_json(Path(out_dir) / "manifest.json", manifest.payload())


def write_circle_norms(history, s_values, path) -> None:
    """Norm trajectories of a circle run: t, l2, (Pu,u), H^s pair sums."""
    header = ["t", "l2_norm", "pu_u"]
    columns = [np.asarray(history.times), history.l2,
               history.damping_quadratic]
    for s in s_values:
        header.append("sobolev_%g" % s)
        columns.append(history.sobolev[float(s)])
    write_csv(Path(path), header, zip(*columns))
