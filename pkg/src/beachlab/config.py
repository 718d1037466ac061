"""INI-style run configuration: parsing, validation, defaults.

Physical parameters never default: a config that does not state the tank
length, depth, and gravity is rejected with the offending key named.
Numerical parameters default conservatively (dt from the dispersion
guard, sampling every step).  Keys are case sensitive.

Sections and keys:

    [geometry]  L, h, g                       (floats, required)
    [grid]      nx, ny                        (ints, required)
    [beach]     delta                         (float; required for damping)
    [time]      t_final (required), dt (default: dispersion guard),
                sample_stride (default 1)
    [model]     kind = nonlinear | linear_tank      (default nonlinear)
    [damping]   mode = off | depth_integrated       (default off)
    [ic]        eta_modes, psi_modes ("n:amp" pairs, comma separated),
                bump_amplitude, bump_center, bump_width
    [output]    snapshot_times (comma separated), audit_tolerance
                (default 2e-2)
    [circle]    n_modes, t_long (required for the circle command), dt,
                s_values (default "0, 0.5, 1"), cutoff = bump | zero |
                uniform (default bump), plateau, ramp, eta_modes,
                psi_modes
    [sweep]     deltas (comma separated, required for the sweep command)
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from pathlib import Path

from .core import TankGeometry, SimGrid
from .dynamics import InitialCondition, SimConfig, max_stable_dt
from .errors import ConfigError
from .multipliers import build_beach

DEFAULT_AUDIT_TOLERANCE = 2e-2


def _read_ini(path) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keep key case: L is not l
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from exc
    return parser


def raw_snapshot(parser: configparser.ConfigParser) -> dict:
    """The config as nested plain dicts, values kept verbatim."""
    return {section: dict(parser.items(section))
            for section in parser.sections()}


def _get(parser, section: str, key: str, conv, default=None):
    if not parser.has_option(section, key):
        if default is not None:
            return default
        raise ConfigError(f"config is missing [{section}] {key}")
    raw = parser.get(section, key)
    try:
        return conv(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(
            f"config key [{section}] {key} = {raw!r} is not a valid "
            f"{conv.__name__}"
        ) from exc


def _float_list(raw: str) -> list[float]:
    parts = [p for chunk in raw.split(",") for p in chunk.split()]
    return [float(p) for p in parts]


def _mode_pairs(raw: str) -> tuple[tuple[int, float], ...]:
    """Parse "3:0.05, 2:-0.01" into ((3, 0.05), (2, -0.01))."""
    pairs = []
    for part in _split_items(raw):
        if ":" not in part:
            raise ValueError(f"mode entry {part!r} is not n:amplitude")
        n, amp = part.split(":", 1)
        pairs.append((int(n), float(amp)))
    return tuple(pairs)


def _split_items(raw: str) -> list[str]:
    return [p for chunk in raw.split(",") for p in chunk.split()]


@dataclass(frozen=True)
class OutputOptions:
    """Sampling instants for snapshots and the audit gate tolerance."""

    snapshot_times: tuple[float, ...]
    audit_tolerance: float


def parse_sim_config(path) -> tuple[SimConfig, OutputOptions, dict]:
    """Build a validated simulation config from an INI file.

    Returns the config, the output options, and the verbatim key/value
    snapshot for the run manifest.
    """
    parser = _read_ini(path)
    geo = TankGeometry(
        L=_get(parser, "geometry", "L", float),
        h=_get(parser, "geometry", "h", float),
        g=_get(parser, "geometry", "g", float),
    )
    grid = SimGrid(geo,
                   nx=_get(parser, "grid", "nx", int),
                   ny=_get(parser, "grid", "ny", int))

    beach = None
    if parser.has_option("beach", "delta"):
        beach = build_beach(geo, grid, _get(parser, "beach", "delta", float))

    dt = _get(parser, "time", "dt", float, default=max_stable_dt(geo, grid))
    t_final = _get(parser, "time", "t_final", float)
    stride = _get(parser, "time", "sample_stride", int, default=1)

    ic = InitialCondition(
        eta_modes=_get(parser, "ic", "eta_modes", _mode_pairs, default=()),
        psi_modes=_get(parser, "ic", "psi_modes", _mode_pairs, default=()),
        bump_amplitude=_get(parser, "ic", "bump_amplitude", float,
                            default=0.0),
        bump_center=_get(parser, "ic", "bump_center", float, default=0.0),
        bump_width=_get(parser, "ic", "bump_width", float, default=0.0),
    )

    cfg = SimConfig(
        geo=geo,
        grid=grid,
        ic=ic,
        dt=dt,
        t_final=t_final,
        beach=beach,
        model=_get(parser, "model", "kind", str, default="nonlinear"),
        damping=_get(parser, "damping", "mode", str, default="off"),
        sample_stride=stride,
    )

    snap_raw = _get(parser, "output", "snapshot_times", str, default="")
    try:
        snapshot_times = tuple(_float_list(snap_raw))
    except ValueError as exc:
        raise ConfigError(f"bad snapshot_times: {exc}") from exc
    tolerance = _get(parser, "output", "audit_tolerance", float,
                     default=DEFAULT_AUDIT_TOLERANCE)
    if tolerance <= 0:
        raise ConfigError(f"audit_tolerance must be positive, got {tolerance}")
    return cfg, OutputOptions(snapshot_times, tolerance), raw_snapshot(parser)


@dataclass(frozen=True)
class CircleConfig:
    """One circle-model experiment: data, cutoff, horizon, norm scale."""

    n_modes: int
    t_long: float
    dt: float | None
    s_values: tuple[float, ...]
    cutoff: str
    plateau: float
    ramp: float
    eta_modes: tuple[tuple[int, float], ...]
    psi_modes: tuple[tuple[int, float], ...]


_CIRCLE_CUTOFFS = ("bump", "zero", "uniform")


def parse_circle_config(path) -> tuple[CircleConfig, dict]:
    parser = _read_ini(path)
    if not parser.has_section("circle"):
        raise ConfigError("config is missing the [circle] section")
    cutoff = _get(parser, "circle", "cutoff", str, default="bump")
    if cutoff not in _CIRCLE_CUTOFFS:
        raise ConfigError(
            f"unknown circle cutoff {cutoff!r}; pick from {_CIRCLE_CUTOFFS}"
        )
    s_raw = _get(parser, "circle", "s_values", str, default="0, 0.5, 1")
    try:
        s_values = tuple(_float_list(s_raw))
    except ValueError as exc:
        raise ConfigError(f"bad s_values: {exc}") from exc
    dt = (_get(parser, "circle", "dt", float)
          if parser.has_option("circle", "dt") else None)
    cfg = CircleConfig(
        n_modes=_get(parser, "circle", "n_modes", int),
        t_long=_get(parser, "circle", "t_long", float),
        dt=dt,
        s_values=s_values,
        cutoff=cutoff,
        plateau=_get(parser, "circle", "plateau", float, default=1.0),
        ramp=_get(parser, "circle", "ramp", float, default=0.8),
        eta_modes=_get(parser, "circle", "eta_modes", _mode_pairs,
                       default=()),
        psi_modes=_get(parser, "circle", "psi_modes", _mode_pairs,
                       default=()),
    )
    if cfg.n_modes < 1:
        raise ConfigError(f"n_modes must be >= 1, got {cfg.n_modes}")
    if cfg.t_long < 0:
        raise ConfigError(f"t_long must be >= 0, got {cfg.t_long}")
    return cfg, raw_snapshot(parser)


def parse_sweep_deltas(path) -> tuple[float, ...]:
    parser = _read_ini(path)
    raw = _get(parser, "sweep", "deltas", str)
    try:
        deltas = tuple(_float_list(raw))
    except ValueError as exc:
        raise ConfigError(f"bad sweep deltas: {exc}") from exc
    if not deltas:
        raise ConfigError("sweep needs at least one delta")
    return deltas
