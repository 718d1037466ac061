"""Time integration of the tank's surface system.

Two models share one integrator. The nonlinear model advances the full
surface pair: the elevation moves with the variational flux trace of the
solved potential and the trace variable feels gravity, the quadratic
surface term, and the external pressure. The linear-tank model replaces
the solve by the flat-strip normal-derivative operator, drops the
quadratic term, and builds the pressure from the linearized
depth-integrated velocity, which is minus the cumulative surface flux.

The stepper is classical RK4 with one potential solve per stage. A
dispersion-based guard rejects steps that would put the grid's fastest
gravity mode outside the stable region. After every step the elevation
mean is projected out; the flux trace annihilates constants, so the
projection removes roundoff only, and the mean stays at machine zero.

Energy bookkeeping note: pairing the elevation equation with the flux
trace makes the kinetic energy the exact quadratic form preserved by the
spatially discrete conservative flow, so undamped energy drift is a pure
time-integration artifact, fourth order in dt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    SimGrid,
    TankGeometry,
    cosine_coeffs,
    dct_antiderivative_meanzero,
    dct_cumulative_integral,
    sine_synthesis,
    trapezoid_1d,
)
from .damping import PressureField, pressure_from_vbar
from .diagnostics import DiagnosticsRecord, make_record
from .elliptic import (
    PotentialField,
    PotentialSolver,
    SurfaceState,
    TraceSet,
    compute_traces,
    flat_dtn,
)
from .errors import BlowUp, ConfigError, DegenerateDepth
from .multipliers import BeachProfile, derived_multipliers, identity_weight_profile

__all__ = [
    "InitialCondition",
    "SimConfig",
    "RunHistory",
    "max_stable_dt",
    "rhs",
    "step_rk4",
    "simulate",
]

MODELS = ("nonlinear", "linear_tank")
DAMPING_MODES = ("off", "depth_integrated")


def max_stable_dt(geo: TankGeometry, grid: SimGrid) -> float:
    """Largest admissible step: half the period scale of the fastest mode.

    The bound is 0.5*sqrt(L/(g*nx*pi)), the deep-water limit of
    1/(2*omega_max); it is conservative at finite depth, where the true
    omega carries an extra tanh factor below one.
    """
    return 0.5 * math.sqrt(geo.L / (geo.g * grid.nx * math.pi))


@dataclass(frozen=True)
class InitialCondition:
    """Starting surface content: cosine modes plus an optional bump.

    eta_modes and psi_modes are (mode index, amplitude) pairs; the bump
    is a Gaussian in the elevation.  The built elevation is projected to
    zero mean, so a constant (mode 0) contribution cancels.
    """

    eta_modes: tuple[tuple[int, float], ...] = ()
    psi_modes: tuple[tuple[int, float], ...] = ()
    bump_amplitude: float = 0.0
    bump_center: float = 0.0
    bump_width: float = 0.0

    def build(self, geo: TankGeometry, grid: SimGrid) -> SurfaceState:
        eta = np.zeros(grid.nx + 1)
        psi = np.zeros(grid.nx + 1)
        for target, modes in ((eta, self.eta_modes), (psi, self.psi_modes)):
            for n, amp in modes:
                n = int(n)
                if not 0 <= n <= grid.nx:
                    raise ConfigError(
                        f"mode {n} is outside the grid's resolvable range 0..{grid.nx}"
                    )
                target += float(amp) * np.cos(n * np.pi * grid.x / geo.L)
        if self.bump_amplitude != 0.0:
            if self.bump_width <= 0.0:
                raise ConfigError("a surface bump needs a positive width")
            eta += self.bump_amplitude * np.exp(
                -(((grid.x - self.bump_center) / self.bump_width) ** 2)
            )
        eta -= trapezoid_1d(eta, grid.dx) / geo.L
        return SurfaceState(eta=eta, psi=psi)


@dataclass(frozen=True)
class SimConfig:
    """Everything a run needs; validated on construction.

    t_final = 0 is allowed and produces an initial-state-only history;
    any positive duration must cover at least one step.
    """

    geo: TankGeometry
    grid: SimGrid
    ic: InitialCondition
    dt: float
    t_final: float
    beach: BeachProfile | None = None
    model: str = "nonlinear"
    damping: str = "off"
    sample_stride: int = 1

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"unknown model {self.model!r}; pick from {MODELS}")
        if self.damping not in DAMPING_MODES:
            raise ConfigError(
                f"unknown damping mode {self.damping!r}; pick from {DAMPING_MODES}"
            )
        if not self.dt > 0.0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if self.t_final != 0.0 and self.t_final < self.dt:
            raise ConfigError(
                f"t_final must be 0 or at least dt, got {self.t_final} < {self.dt}"
            )
        cap = max_stable_dt(self.geo, self.grid)
        if self.dt > cap * (1.0 + 1e-12):
            raise ConfigError(
                f"dt {self.dt:.6g} exceeds the dispersion guard {cap:.6g} "
                f"for nx={self.grid.nx}"
            )
        if self.damping == "depth_integrated" and self.beach is None:
            raise ConfigError("depth_integrated damping needs a beach profile")
        if int(self.sample_stride) < 1:
            raise ConfigError(f"sample_stride must be >= 1, got {self.sample_stride}")


@dataclass(frozen=True)
class RunHistory:
    """Sampled output of one run.

    states, pressures, and diagnostics are aligned with times; the grid,
    geometry, and beach travel along so audits can re-solve the stored
    states without the original config.
    """

    times: np.ndarray
    states: tuple[SurfaceState, ...]
    pressures: tuple[PressureField, ...]
    diagnostics: tuple[DiagnosticsRecord, ...]
    geo: TankGeometry
    grid: SimGrid
    beach: BeachProfile | None
    sample_stride: int

    @property
    def H0(self) -> float:
        return self.diagnostics[0].H


@dataclass(frozen=True)
class _Force:
    """One force evaluation plus everything the diagnostics reuse."""

    deta: np.ndarray
    dpsi: np.ndarray
    pressure: PressureField
    field: PotentialField | None
    traces: TraceSet | None
    vbar: np.ndarray


def _zero_pressure(grid: SimGrid) -> PressureField:
    z = np.zeros(grid.nx + 1)
    return PressureField(P=z, dP=z)


def _force(state: SurfaceState, cfg: SimConfig, solver: PotentialSolver | None) -> _Force:
    geo, grid = cfg.geo, cfg.grid
    if cfg.model == "linear_tank":
        gpsi0 = flat_dtn(state.psi, geo)
        vbar = -dct_cumulative_integral(gpsi0, geo.L)
        if cfg.damping == "depth_integrated":
            dP = cfg.beach.chi * vbar
            pressure = PressureField(
                P=dct_antiderivative_meanzero(dP, geo.L), dP=dP
            )
        else:
            pressure = _zero_pressure(grid)
        dpsi = -geo.g * state.eta - pressure.P
        return _Force(
            deta=gpsi0, dpsi=dpsi, pressure=pressure, field=None, traces=None, vbar=vbar
        )
    field = solver.solve(state)
    traces = compute_traces(field, state, geo, grid)
    if cfg.damping == "depth_integrated":
        pressure = pressure_from_vbar(traces, cfg.beach, geo, grid)
    else:
        pressure = _zero_pressure(grid)
    dpsi = -geo.g * state.eta - traces.Npsi - pressure.P
    return _Force(
        deta=traces.Gpsi_flux,
        dpsi=dpsi,
        pressure=pressure,
        field=field,
        traces=traces,
        vbar=traces.Vbar,
    )


def _make_solver(cfg: SimConfig) -> PotentialSolver | None:
    return PotentialSolver(cfg.geo, cfg.grid) if cfg.model == "nonlinear" else None


def rhs(
    state: SurfaceState, cfg: SimConfig, solver: PotentialSolver | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Time derivative of (eta, psi) under the configured model."""
    if solver is None:
        solver = _make_solver(cfg)
    f = _force(state, cfg, solver)
    return f.deta, f.dpsi


def _advance(
    state: SurfaceState, cfg: SimConfig, solver: PotentialSolver | None, f1: _Force
) -> SurfaceState:
    dt = cfg.dt
    e, p = state.eta, state.psi

    f2 = _force(SurfaceState(eta=e + 0.5 * dt * f1.deta, psi=p + 0.5 * dt * f1.dpsi), cfg, solver)
    f3 = _force(SurfaceState(eta=e + 0.5 * dt * f2.deta, psi=p + 0.5 * dt * f2.dpsi), cfg, solver)
    f4 = _force(SurfaceState(eta=e + dt * f3.deta, psi=p + dt * f3.dpsi), cfg, solver)

    eta = e + (dt / 6.0) * (f1.deta + 2.0 * f2.deta + 2.0 * f3.deta + f4.deta)
    psi = p + (dt / 6.0) * (f1.dpsi + 2.0 * f2.dpsi + 2.0 * f3.dpsi + f4.dpsi)
    eta = eta - trapezoid_1d(eta, cfg.grid.dx) / cfg.geo.L

    if not np.all(np.isfinite(eta)) or np.max(np.abs(eta)) > 0.5 * cfg.geo.h:
        raise BlowUp("surface elevation left the modeling regime |eta| <= h/2")
    return SurfaceState(eta=eta, psi=psi)


def step_rk4(
    state: SurfaceState, cfg: SimConfig, solver: PotentialSolver | None = None
) -> SurfaceState:
    """One classical RK4 step with post-step mean projection."""
    if solver is None:
        solver = _make_solver(cfg)
    return _advance(state, cfg, solver, _force(state, cfg, solver))


def _flat_wall_bottom(
    psi: np.ndarray, geo: TankGeometry, grid: SimGrid
) -> tuple[np.ndarray, np.ndarray]:
    """Bottom horizontal and far-wall vertical velocities of the flat-strip
    harmonic extension of psi, mode by mode.

    The wall profile uses the exponential form of sinh/cosh, stable for
    every wavenumber the grid carries.
    """
    c = cosine_coeffs(psi)
    m = psi.shape[-1] - 1
    n = np.arange(1, m + 1)
    k = n * np.pi / geo.L
    sech = 1.0 / np.cosh(k * geo.h)
    bottom = np.zeros(grid.nx + 1)
    # top mode's sine vanishes at every node
    bottom[1:-1] = sine_synthesis(-c[1:m] * k[: m - 1] * sech[: m - 1])
    y = -geo.h + grid.s * geo.h
    ratio = (
        np.exp(k[:, None] * y[None, :])
        * (1.0 - np.exp(-2.0 * k[:, None] * (y[None, :] + geo.h)))
        / (1.0 + np.exp(-2.0 * k[:, None] * geo.h))
    )
    signs = np.where(n % 2 == 0, 1.0, -1.0)
    wall = ((c[1:] * signs * k)[:, None] * ratio).sum(axis=0)
    return bottom, wall


def _linear_record(
    t: float, state: SurfaceState, f: _Force, cfg: SimConfig, beach: BeachProfile
) -> DiagnosticsRecord:
    geo, grid = cfg.geo, cfg.grid
    ke = 0.5 * trapezoid_1d(state.psi * f.deta, grid.dx)
    pe = 0.5 * geo.g * trapezoid_1d(state.eta**2, grid.dx)
    bottom, wall = _flat_wall_bottom(state.psi, geo, grid)
    dy = geo.h * grid.ds
    wall_term = 0.5 * geo.L * trapezoid_1d(wall**2, dy)
    derived = derived_multipliers(state, beach, geo, grid)
    return DiagnosticsRecord(
        t=float(t),
        H=ke + pe,
        KE=ke,
        PE=pe,
        Theta_int=trapezoid_1d(
            -state.eta * f.dpsi - 0.5 * geo.g * state.eta**2, grid.dx
        ),
        Sigma=0.5 * geo.h * trapezoid_1d(bottom**2, grid.dx) + wall_term,
        Q_integrand=trapezoid_1d(
            (0.5 * geo.h + 0.5 * derived.rho) * bottom**2, grid.dx
        )
        + wall_term,
        damping_power=trapezoid_1d(beach.chi * f.vbar**2, grid.dx),
        boundary_B=trapezoid_1d(derived.zeta * state.psi, grid.dx),
    )


def _record(
    t: float, state: SurfaceState, f: _Force, cfg: SimConfig, beach: BeachProfile
) -> DiagnosticsRecord:
    if cfg.model == "linear_tank":
        return _linear_record(t, state, f, cfg, beach)
    derived = derived_multipliers(state, beach, cfg.geo, cfg.grid)
    return make_record(
        t, state, f.field, f.traces, derived, f.pressure, f.dpsi, beach, cfg.geo, cfg.grid
    )


def simulate(cfg: SimConfig) -> RunHistory:
    """Run the configured model and sample states plus diagnostics.

    The state is recorded before each sampled step and once at the final
    time; the force evaluation behind each record doubles as the first
    RK stage, so sampling costs no extra solves.  Failures raise with
    the failing time attached.
    """
    geo, grid = cfg.geo, cfg.grid
    state = cfg.ic.build(geo, grid)
    solver = _make_solver(cfg)
    record_beach = cfg.beach if cfg.beach is not None else identity_weight_profile(geo, grid)
    n_steps = 0 if cfg.t_final == 0.0 else int(math.ceil(cfg.t_final / cfg.dt - 1e-9))
    stride = int(cfg.sample_stride)

    times: list[float] = []
    states: list[SurfaceState] = []
    pressures: list[PressureField] = []
    records: list[DiagnosticsRecord] = []

    for index in range(n_steps + 1):
        t = index * cfg.dt
        try:
            force = _force(state, cfg, solver)
        except DegenerateDepth as exc:
            raise DegenerateDepth(f"{exc} (at t = {t:.6g})") from exc
        if index % stride == 0 or index == n_steps:
            times.append(t)
            states.append(state)
            pressures.append(force.pressure)
            records.append(_record(t, state, force, cfg, record_beach))
        if index == n_steps:
            break
        try:
            state = _advance(state, cfg, solver, force)
        except BlowUp as exc:
            raise BlowUp(str(exc), time=(index + 1) * cfg.dt) from exc
        except DegenerateDepth as exc:
            raise DegenerateDepth(
                f"{exc} (during the step to t = {(index + 1) * cfg.dt:.6g})"
            ) from exc

    return RunHistory(
        times=np.asarray(times, dtype=float),
        states=tuple(states),
        pressures=tuple(pressures),
        diagnostics=tuple(records),
        geo=geo,
        grid=grid,
        beach=cfg.beach,
        sample_stride=stride,
    )
