"""Readers for the simulation CLI's artifacts, with strict validation.

The column lists and JSON schemas here are this package's pinned copy of
the producer's documented output contract. Validation happens before any
plotting so a malformed file fails loudly instead of rendering garbage.
"""

import csv
import json
from importlib.resources import files
from pathlib import Path

import jsonschema
import numpy as np

from .errors import SchemaMismatch

TIMESERIES_COLUMNS = (
    "t",
    "H",
    "KE",
    "PE",
    "damping_power",
    "sigma",
    "boundary_B",
    "max_eta",
    "cumulative_damping",
)
SNAPSHOT_COLUMNS = ("x", "eta", "psi", "P_ext")
CONVERGENCE_COLUMNS = (
    "identity",
    "residual_1x",
    "residual_2x",
    "residual_4x",
    "factor_12",
    "factor_24",
    "fitted_factor",
)
CIRCLE_FIXED_COLUMNS = ("t", "l2_norm", "pu_u")


def _check_exists(path) -> Path:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"input file does not exist: {path}")
    return path


def read_table(path, required, numeric=True, extra_prefix=None):
    """One CSV as a dict of named columns.

    Exact header match against `required` unless `extra_prefix` names a
    prefix that additional trailing columns must carry (the circle norms
    file has one Sobolev column per requested index). Missing columns,
    unexpected columns, and files without data rows all raise
    SchemaMismatch naming the problem.
    """
    path = _check_exists(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaMismatch(f"{path.name}: empty file, no header row")
    header = rows[0]
    for col in required:
        if col not in header:
            raise SchemaMismatch(f"{path.name}: missing column {col!r}")
    for col in header:
        if col in required:
            continue
        if extra_prefix is not None and col.startswith(extra_prefix):
            continue
        raise SchemaMismatch(f"{path.name}: unexpected column {col!r}")
    if len(rows) < 2:
        raise SchemaMismatch(f"{path.name}: no data rows")

    table = {}
    for j, col in enumerate(header):
        values = [r[j] for r in rows[1:]]
        if numeric or col != "identity":
            try:
                table[col] = np.array([float(v) for v in values])
            except ValueError as exc:
                raise SchemaMismatch(
                    f"{path.name}: non-numeric value in column {col!r}"
                ) from exc
        else:
            table[col] = values
    return table


def read_timeseries(path):
    return read_table(path, TIMESERIES_COLUMNS)


def read_snapshot(path):
    return read_table(path, SNAPSHOT_COLUMNS)


def read_convergence(path):
    return read_table(path, CONVERGENCE_COLUMNS, numeric=False)


def read_circle_norms(path):
    table = read_table(path, CIRCLE_FIXED_COLUMNS, extra_prefix="sobolev_")
    if not any(c.startswith("sobolev_") for c in table):
        raise SchemaMismatch(f"{Path(path).name}: no sobolev_* columns")
    return table


def _load_validated(path, schema_name):
    path = _check_exists(path)
    with open(path) as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaMismatch(f"{path.name}: not valid JSON: {exc}") from exc
    schema = json.loads(
        files("beachplots").joinpath(f"schemas/{schema_name}.schema.json").read_text()
    )
    try:
        jsonschema.validate(payload, schema)
    except jsonschema.ValidationError as exc:
        raise SchemaMismatch(
            f"{path.name}: schema violation at "
            f"{'/'.join(str(p) for p in exc.absolute_path) or '<root>'}: "
            f"{exc.message}"
        ) from exc
    return payload


def read_summary(path):
    return _load_validated(path, "summary")


def read_manifest(path):
    return _load_validated(path, "manifest")


def beach_zone(manifest):
    """(L - delta, L) from a run manifest's config, or None when the run
    had no beach section."""
    config = manifest["config"]
    try:
        L = float(config["geometry"]["L"])
    except (KeyError, ValueError) as exc:
        raise SchemaMismatch(f"manifest config is missing [geometry] L") from exc
    beach = config.get("beach", {})
    if "delta" not in beach:
        return None
    try:
        delta = float(beach["delta"])
    except ValueError as exc:
        raise SchemaMismatch("manifest [beach] delta is not a number") from exc
    return (L - delta, L)


def snapshot_entry(summary, snapshot_path):
    """The summary record describing one snapshot file, matched by name."""
    name = Path(snapshot_path).name
    for entry in summary["snapshots"]:
        if entry["file"] == name:
            return entry
    raise SchemaMismatch(f"summary lists no snapshot entry for {name!r}")
