"""Command-line entry point: simulate, audit, convergence, circle, sweep.

Commands read one INI config and write their artifacts into an output
directory (--out, overridden by the BEACHLAB_OUT environment variable).
Exit codes: 0 success, 2 physics failure (blow-up, degenerate depth,
solver breakdown), 3 input error, 4 audit tolerance failure.

The audit and convergence commands re-run the simulation from its config
rather than deserializing states: runs are bit-deterministic, so the
replay is exact and the CSV files never need to carry full field data.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .config import (
    CircleConfig,
    OutputOptions,
    parse_circle_config,
    parse_sim_config,
    parse_sweep_deltas,
)
from .core import SimGrid
from .diagnostics import decay_report, run_all_audits, audit_pohozaev, audit_remainder
from .dynamics import SimConfig, simulate
from .elliptic import PotentialSolver, compute_traces
from .errors import (
    BadBeach,
    BeachLabError,
    BlowUp,
    ConfigError,
    DegenerateDepth,
    InsufficientSampling,
    NonFiniteField,
    SolverFailure,
    ZeroEnergy,
)
from . import io as lab_io
from . import linear_circle as lc
from .multipliers import build_beach, derived_multipliers

AUDIT_NAMES = ("observation_primary", "equipartition",
               "observation_alternate", "pohozaev", "remainder_split")


def _parse_args(argv):
    parser = argparse.ArgumentParser(
        prog="beachlab",
        description="wave-tank simulations with an absorbing beach, "
                    "identity audits, and decay certificates",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    descriptions = {
        "simulate": "run one configured simulation and persist its output",
        "audit": "replay a run and audit every integral identity",
        "convergence": "replay at 1x/2x/4x resolution and fit reductions",
        "circle": "run the periodic deep-water companion model",
        "sweep": "re-run the simulation over a grid of beach lengths",
    }
    for name, text in descriptions.items():
        cmd = sub.add_parser(name, help=text)
        cmd.add_argument("--config", required=True, help="INI config path")
        cmd.add_argument("--out", default="beachlab_out",
                         help="output directory (default: beachlab_out)")
        cmd.add_argument("--tolerance", type=float, default=None,
                         help="audit gate on relative residuals "
                              "(default: config audit_tolerance)")
        cmd.add_argument("--threads", type=int, default=1,
                         help="worker threads for convergence levels")
    return parser.parse_args(argv)


def main(argv=None) -> int:
    args = _parse_args(argv)
    out_dir = Path(os.environ.get("BEACHLAB_OUT") or args.out)
    handlers = {
        "simulate": cmd_simulate,
        "audit": cmd_audit,
        "convergence": cmd_convergence,
        "circle": cmd_circle,
        "sweep": cmd_sweep,
    }
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        return handlers[args.command](args, out_dir)
    except (BlowUp, DegenerateDepth, NonFiniteField, SolverFailure) as exc:
        print(f"physics failure: {exc}", file=sys.stderr)
        return 2
    except (BeachLabError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 3


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------


def _decay_block(history, cfg: SimConfig):
    """Decay certificate of a run, or (None, why-not)."""
    if cfg.damping != "depth_integrated":
        return None, "decay certificates apply to damped runs only"
    if cfg.sample_stride != 1:
        return None, "decay certificates need sample_stride = 1"
    try:
        return lab_io.decay_payload(decay_report(history)), None
    except (ZeroEnergy, BadBeach, InsufficientSampling) as exc:
        return None, str(exc)


def _snapshot_indices(history, opts: OutputOptions) -> list[int]:
    times = np.asarray(history.times)
    if not opts.snapshot_times:
        return [len(times) - 1]
    indices = []
    for t in opts.snapshot_times:
        indices.append(int(np.argmin(np.abs(times - t))))
    # stable order, duplicates collapsed
    return sorted(set(indices))


def _write_run_outputs(history, cfg: SimConfig, opts: OutputOptions,
                       out_dir: Path, manifest: lab_io.RunManifest) -> dict:
    lab_io.write_timeseries(history, manifest.add(out_dir / "timeseries.csv"))
    snapshots = []
    for k, index in enumerate(_snapshot_indices(history, opts)):
        name = f"snapshot_{k}.csv"
        lab_io.write_snapshot(history, index, manifest.add(out_dir / name))
        snapshots.append({
            "file": name,
            "t": float(history.times[index]),
            "pressure_mean": lab_io.snapshot_pressure_mean(history, index),
        })
    decay, skipped = _decay_block(history, cfg)
    summary = {
        "H0": history.H0,
        "final_H": history.diagnostics[-1].H,
        "t_final": cfg.t_final,
        "dt": cfg.dt,
        "n_samples": len(history.times),
        "model": cfg.model,
        "damping": cfg.damping,
        "decay": decay,
        "decay_skipped_reason": skipped,
        "snapshots": snapshots,
    }
    lab_io.write_json(manifest.add(out_dir / "summary.json"), summary)
    return summary


def cmd_simulate(args, out_dir: Path) -> int:
    cfg, opts, raw = parse_sim_config(args.config)
    manifest = lab_io.start_manifest("simulate", raw)
    t0 = time.time()
    history = simulate(cfg)
    summary = _write_run_outputs(history, cfg, opts, out_dir, manifest)
    lab_io.finish_manifest(manifest, out_dir, t0, time.time())
    print(f"simulate: {len(history.times)} samples, H(0) = "
          f"{summary['H0']:.6g}, H(T) = {summary['final_H']:.6g} "
          f"-> {out_dir}")
    return 0


# ---------------------------------------------------------------------------
# audit
# ---------------------------------------------------------------------------


def cmd_audit(args, out_dir: Path) -> int:
    cfg, opts, raw = parse_sim_config(args.config)
    if cfg.sample_stride != 1:
        raise InsufficientSampling(
            "audits integrate over every step: set sample_stride = 1"
        )
    tolerance = args.tolerance if args.tolerance is not None \
        else opts.audit_tolerance
    if tolerance <= 0:
        raise ConfigError(f"tolerance must be positive, got {tolerance}")
    manifest = lab_io.start_manifest("audit", raw)
    t0 = time.time()
    history = simulate(cfg)
    reports = run_all_audits(history)
    decay, skipped = _decay_block(history, cfg)
    ok = True
    identities = {}
    for name in AUDIT_NAMES:
        report = reports[name]
        identities[name] = lab_io.identity_payload(report)
        passed = report.relative_residual <= tolerance
        ok = ok and passed
        print(f"audit {name}: relative residual "
              f"{report.relative_residual:.3e} "
              f"{'<=' if passed else '>'} {tolerance:.3e} "
              f"[{'pass' if passed else 'FAIL'}]")
    payload = {
        "tolerance": tolerance,
        "identities": identities,
        "all_within_tolerance": ok,
        "decay": decay,
        "decay_skipped_reason": skipped,
    }
    lab_io.write_json(manifest.add(out_dir / "identity_reports.json"),
                      payload)
    lab_io.finish_manifest(manifest, out_dir, t0, time.time())
    return 0 if ok else 4


# ---------------------------------------------------------------------------
# convergence
# ---------------------------------------------------------------------------


def _scaled_config(cfg: SimConfig, factor: int) -> SimConfig:
    grid = SimGrid(cfg.geo, cfg.grid.nx * factor, cfg.grid.ny * factor)
    beach = None
    if cfg.beach is not None:
        beach = build_beach(cfg.geo, grid, cfg.beach.delta)
    return SimConfig(
        geo=cfg.geo,
        grid=grid,
        ic=cfg.ic,
        dt=cfg.dt / factor,
        t_final=cfg.t_final,
        beach=beach,
        model=cfg.model,
        damping=cfg.damping,
        sample_stride=cfg.sample_stride,
    )


def _level_residuals(cfg: SimConfig) -> dict:
    """Relative residuals of every identity at one resolution.

    Time-integrated identities audit the whole run; the instantaneous
    ones are evaluated at the initial state, which every level shares up
    to sampling, so their residuals isolate quadrature error rather than
    trajectory divergence.
    """
    history = simulate(cfg)
    reports = run_all_audits(history)
    state0 = history.states[0]
    solver = PotentialSolver(cfg.geo, cfg.grid)
    field0 = solver.solve(state0)
    traces0 = compute_traces(field0, state0, cfg.geo, cfg.grid)
    beach = history.beach
    if beach is None:
        raise BadBeach(
            "convergence audits need a beach profile: add [beach] delta"
        )
    derived0 = derived_multipliers(state0, beach, cfg.geo, cfg.grid)
    reports["pohozaev"] = audit_pohozaev(state0, field0, traces0, cfg.geo,
                                         cfg.grid)
    reports["remainder_split"] = audit_remainder(state0, field0, derived0,
                                                 cfg.geo, cfg.grid)
    return {name: reports[name].relative_residual for name in AUDIT_NAMES}


_RESIDUAL_FLOOR = 1e-14


def _reduction_factor(coarse: float, fine: float) -> float:
    if fine <= _RESIDUAL_FLOOR:
        return math.inf
    return coarse / fine


def _fitted_factor(residuals, factors=(1, 2, 4)) -> float:
    """Per-halving reduction fitted to log residual vs log resolution.

    A single refinement step can land on an error sign change and shrink
    by an accidental amount in either direction; the least-squares slope
    over all levels is the stable figure.  Levels at the round-off floor
    are dropped; with fewer than two live levels the identity is
    resolved to the floor and counts as converged.
    """
    live = [(math.log(f), math.log(r))
            for f, r in zip(factors, residuals) if r > _RESIDUAL_FLOOR]
    if len(live) < 2:
        return math.inf
    xs, ys = zip(*live)
    slope = np.polyfit(xs, ys, 1)[0]
    return float(2.0 ** (-slope))


def cmd_convergence(args, out_dir: Path) -> int:
    cfg, opts, raw = parse_sim_config(args.config)
    if cfg.sample_stride != 1:
        raise InsufficientSampling(
            "audits integrate over every step: set sample_stride = 1"
        )
    manifest = lab_io.start_manifest("convergence", raw)
    t0 = time.time()
    factors = (1, 2, 4)
    workers = max(1, int(args.threads))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        residuals = list(pool.map(
            lambda f: _level_residuals(_scaled_config(cfg, f)), factors
        ))
    rows = []
    ok = True
    for name in AUDIT_NAMES:
        r1, r2, r4 = (res[name] for res in residuals)
        f12 = _reduction_factor(r1, r2)
        f24 = _reduction_factor(r2, r4)
        fitted = _fitted_factor((r1, r2, r4))
        rows.append((name, r1, r2, r4,
                     "inf" if math.isinf(f12) else f12,
                     "inf" if math.isinf(f24) else f24,
                     "inf" if math.isinf(fitted) else fitted))
        passed = fitted >= 2.0
        ok = ok and passed
        print(f"convergence {name}: {r1:.3e} -> {r2:.3e} -> {r4:.3e} "
              f"(fitted factor {fitted:.2f}) "
              f"[{'pass' if passed else 'FAIL'}]")
    lab_io.write_csv(manifest.add(out_dir / "convergence.csv"),
                      lab_io.CONVERGENCE_COLUMNS, rows)
    lab_io.finish_manifest(manifest, out_dir, t0, time.time())
    return 0 if ok else 4


# ---------------------------------------------------------------------------
# circle
# ---------------------------------------------------------------------------


def _circle_initial(cfg: CircleConfig) -> lc.SpectralState:
    x = lc.collocation_nodes(cfg.n_modes)
    eta = np.zeros_like(x)
    psi = np.zeros_like(x)
    for target, modes in ((eta, cfg.eta_modes), (psi, cfg.psi_modes)):
        for n, amp in modes:
            if not 1 <= n <= cfg.n_modes:
                raise ConfigError(
                    f"circle mode {n} outside the resolvable range "
                    f"1..{cfg.n_modes}"
                )
            target += amp * np.cos(n * x)
    if not np.any(eta) and not np.any(psi):
        raise ConfigError("circle initial data is identically zero; "
                          "give eta_modes or psi_modes")
    return lc.SpectralState.from_physical(eta, psi)


def _circle_cutoff_samples(cfg: CircleConfig) -> np.ndarray:
    count = 2 * cfg.n_modes + 1
    if cfg.cutoff == "zero":
        return np.zeros(count)
    if cfg.cutoff == "uniform":
        return np.ones(count)
    return lc.circle_cutoff(cfg.n_modes, plateau=cfg.plateau, ramp=cfg.ramp)


def cmd_circle(args, out_dir: Path) -> int:
    cfg, raw = parse_circle_config(args.config)
    manifest = lab_io.start_manifest("circle", raw)
    t0 = time.time()
    report = lc.uniform_bound_experiment(
        _circle_initial(cfg), _circle_cutoff_samples(cfg), cfg.s_values,
        cfg.t_long, dt=cfg.dt,
    )
    lab_io.write_circle_norms(report.history, cfg.s_values,
                              manifest.add(out_dir / "circle_norms.csv"))
    payload = {
        "horizon": report.horizon,
        "dt": report.dt,
        "sup_ratios": {"%g" % s: v for s, v in report.sup_ratios.items()},
        "invariant_ratios": {"%g" % s: v
                             for s, v in report.invariant_ratios.items()},
        "rate_ratio": report.rate_ratio,
        "frequency_ratios": list(report.frequency_ratios),
        "initial_ratios": list(report.initial_ratios),
        "initial_l2": float(report.history.l2[0]),
        "final_l2": float(report.history.l2[-1]),
    }
    lab_io.write_json(manifest.add(out_dir / "uniform_report.json"), payload)
    lab_io.finish_manifest(manifest, out_dir, t0, time.time())
    ratios = ", ".join(f"s={s:g}: {v:.4f}"
                       for s, v in sorted(report.sup_ratios.items()))
    print(f"circle: horizon {cfg.t_long:g}, sup ratios {ratios} -> {out_dir}")
    return 0


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


def cmd_sweep(args, out_dir: Path) -> int:
    cfg, opts, raw = parse_sim_config(args.config)
    deltas = parse_sweep_deltas(args.config)
    if cfg.damping != "depth_integrated":
        raise ConfigError("sweep varies the beach length: set "
                          "[damping] mode = depth_integrated")
    manifest = lab_io.start_manifest("sweep", raw)
    t0 = time.time()
    rows = []
    for delta in deltas:
        case_cfg = SimConfig(
            geo=cfg.geo,
            grid=cfg.grid,
            ic=cfg.ic,
            dt=cfg.dt,
            t_final=cfg.t_final,
            beach=build_beach(cfg.geo, cfg.grid, delta),
            model=cfg.model,
            damping=cfg.damping,
            sample_stride=cfg.sample_stride,
        )
        case_dir = out_dir / ("delta_%g" % delta)
        case_dir.mkdir(parents=True, exist_ok=True)
        case_manifest = lab_io.start_manifest("simulate", raw)
        case_t0 = time.time()
        history = simulate(case_cfg)
        summary = _write_run_outputs(history, case_cfg, opts, case_dir,
                                     case_manifest)
        lab_io.finish_manifest(case_manifest, case_dir, case_t0, time.time())
        manifest.merge(case_manifest, "delta_%g" % delta)
        decay = summary["decay"] or {}
        rows.append((
            delta,
            summary["H0"],
            summary["final_H"],
            decay.get("decay_rate", math.nan),
            decay.get("c", math.nan),
            decay.get("Cm", math.nan),
            1.0 if decay.get("admissible") else 0.0,
            1.0 if decay.get("certifying") else 0.0,
        ))
        print(f"sweep delta={delta:g}: H(T)/H(0) = "
              f"{summary['final_H'] / summary['H0']:.4e}"
              if summary["H0"] > 0 else
              f"sweep delta={delta:g}: H(0) = 0")
    header = ("delta", "H0", "final_H", "decay_rate", "c", "Cm",
              "admissible", "certifying")
    lab_io.write_csv(manifest.add(out_dir / "sweep.csv"), header, rows)
    lab_io.finish_manifest(manifest, out_dir, t0, time.time())
    return 0


if __name__ == "__main__":
    sys.exit(main())
