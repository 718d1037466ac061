"""Energy ledger and term-by-term audits of the tank's integral identities.

Every audit evaluates both sides of an identity that is exact for the
continuum system, reports the residual, and itemizes each contributing
term.  Residuals are pure discretization artifacts: halving dx and dt
together must shrink them by at least a factor of two, and a residual
that refuses to shrink indicates a bookkeeping error rather than noise.

Time integrals are trapezoid sums over every stored step, so histories
saved with a stride are rejected up front (coarse time quadrature would
swamp the structure under audit).  Interior potentials are re-solved
from the stored surface states instead of being kept in memory; the
solves are deterministic, so recomputation is exact.

Two conventions used throughout: terms that integrate the surface flux
of the potential against a smooth test function use the variational
flux trace (whose trapezoid pairing is the discrete energy bilinear
form), while the quadratic surface term N uses the pointwise traces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    SimGrid,
    TankGeometry,
    dct_derivative,
    trapezoid_1d,
    volume_integral,
)
from .damping import PressureField
from .elliptic import (
    PotentialField,
    PotentialSolver,
    SurfaceState,
    TraceSet,
    compute_traces,
)
from .errors import BadBeach, InadmissibleRho, InsufficientSampling
from .multipliers import (
    BeachProfile,
    DecayConstants,
    DerivedMultipliers,
    decay_constants,
    derived_multipliers,
)

__all__ = [
    "DiagnosticsRecord",
    "IdentityReport",
    "DecayReport",
    "energy",
    "kinetic_volume",
    "sigma_functional",
    "theta",
    "make_record",
    "audit_identity_T22",
    "audit_equipartition",
    "audit_pohozaev",
    "audit_remainder",
    "audit_identity_appC",
    "decay_report",
    "run_all_audits",
]


@dataclass(frozen=True)
class DiagnosticsRecord:
    """Scalar ledger of one sampled instant of a run.

    H, KE, PE are the total, kinetic, and potential energies; Theta_int
    integrates the observation density -eta*dpsi_dt - (g/2)eta^2;
    Sigma is the positive bottom-plus-wall flux functional; Q_integrand
    is the instantaneous value of the accumulated boundary observation;
    damping_power is the instantaneous energy drain of the beach;
    boundary_B pairs the combined surface multiplier with psi.
    """

    t: float
    H: float
    KE: float
    PE: float
    Theta_int: float
    Sigma: float
    Q_integrand: float
    damping_power: float
    boundary_B: float


@dataclass(frozen=True)
class IdentityReport:
    """Two sides of one audited identity plus its itemized terms.

    residual = lhs - rhs; relative_residual normalizes by the largest of
    |lhs|, |rhs|, and the run's initial energy (or the state's own energy
    for instantaneous audits) so near-zero identities do not blow up.
    """

    name: str
    lhs: float
    rhs: float
    residual: float
    relative_residual: float
    per_term_breakdown: dict[str, float]


@dataclass(frozen=True)
class DecayReport:
    """Quantitative decay certificate evaluated on one damped run.

    certificate_* is the endpoint inequality (1/2 - c - alpha)*T*H(T) <=
    (Cm^2/(2 alpha g) + sqrt(T)*N2T + (2 sqrt 2/sqrt g)*N1T)*H(0);
    observation_* is the intermediate inequality bounding
    (1/2 - c)*int H dt by the three observation terms.  decay_rate is
    the fitted slope of log H over the second half of the run, and
    window_ratios are energy ratios across four equal time windows.
    certifying requires admissible multiplier bounds and both
    inequalities to hold.
    """

    constants: DecayConstants
    certificate_lhs: float
    certificate_rhs: float
    certificate_holds: bool
    observation_lhs: float
    observation_rhs: float
    observation_holds: bool
    boundary_term: float
    boundary_bound: float
    decay_rate: float
    window_ratios: tuple[float, ...]
    certifying: bool


# ---------------------------------------------------------------------------
# Instantaneous scalars
# ---------------------------------------------------------------------------


def energy(state: SurfaceState, traces: TraceSet, geo: TankGeometry) -> tuple[float, float, float]:
    """Total, kinetic, and potential energy of one state.

    KE pairs psi with the variational flux trace, which makes it exactly
    the quadratic form the conservative dynamics preserves; PE is the
    hydrostatic surface term.
    """
    dx = geo.L / (state.eta.shape[0] - 1)
    ke = 0.5 * trapezoid_1d(state.psi * traces.Gpsi_flux, dx)
    pe = 0.5 * geo.g * trapezoid_1d(state.eta**2, dx)
    return ke + pe, ke, pe


def kinetic_volume(field: PotentialField, state: SurfaceState, geo: TankGeometry, grid: SimGrid) -> float:
    """Kinetic energy as half the squared velocity integrated over the fluid."""
    return 0.5 * volume_integral(field.phix**2 + field.phiy**2, state.eta, geo, grid)


def sigma_functional(field: PotentialField, state: SurfaceState, geo: TankGeometry, grid: SimGrid) -> float:
    """Positive functional (h/2)*int phix^2 on the bottom plus (L/2)*int
    phiy^2 on the far wall; nonnegative by construction."""
    bottom = trapezoid_1d(field.phix[:, 0] ** 2, grid.dx)
    dy_wall = (geo.h + state.eta[-1]) * grid.ds
    wall = trapezoid_1d(field.phiy[-1, :] ** 2, dy_wall)
    return 0.5 * geo.h * bottom + 0.5 * geo.L * wall


def theta(state: SurfaceState, dpsi_dt: np.ndarray, geo: TankGeometry) -> np.ndarray:
    """Observation density -eta*dpsi_dt - (g/2)*eta^2, nodewise."""
    return -state.eta * np.asarray(dpsi_dt, dtype=float) - 0.5 * geo.g * state.eta**2


def make_record(
    t: float,
    state: SurfaceState,
    field: PotentialField,
    traces: TraceSet,
    derived: DerivedMultipliers,
    pressure: PressureField,
    dpsi_dt: np.ndarray,
    beach: BeachProfile,
    geo: TankGeometry,
    grid: SimGrid,
) -> DiagnosticsRecord:
    """Assemble the per-step scalar ledger from already-computed fields."""
    h, ke, pe = energy(state, traces, geo)
    bottom = field.phix[:, 0] ** 2
    q_bottom = trapezoid_1d((0.5 * geo.h + 0.5 * derived.rho) * bottom, grid.dx)
    dy_wall = (geo.h + state.eta[-1]) * grid.ds
    q_wall = 0.5 * geo.L * trapezoid_1d(field.phiy[-1, :] ** 2, dy_wall)
    return DiagnosticsRecord(
        t=float(t),
        H=h,
        KE=ke,
        PE=pe,
        Theta_int=trapezoid_1d(theta(state, dpsi_dt, geo), grid.dx),
        Sigma=sigma_functional(field, state, geo, grid),
        Q_integrand=q_bottom + q_wall,
        damping_power=trapezoid_1d(beach.chi * traces.Vbar**2, grid.dx),
        boundary_B=trapezoid_1d(derived.zeta * state.psi, grid.dx),
    )


# ---------------------------------------------------------------------------
# Per-run scalar series (one elliptic re-solve per stored step)
# ---------------------------------------------------------------------------


def _require_full_sampling(history) -> None:
    stride = int(getattr(history, "sample_stride", 1))
    if stride != 1:
        raise InsufficientSampling(
            f"audits need every step; history stores stride {stride}"
        )


def _instant_scalars(state, pressure, beach, geo, grid, solver) -> dict[str, float]:
    """All per-time integrands the run-level audits consume, in one solve."""
    field = solver.solve(state)
    traces = compute_traces(field, state, geo, grid)
    d = derived_multipliers(state, beach, geo, grid)
    eta, psi = state.eta, state.psi
    eta_x = dct_derivative(eta, geo.L)
    psi_x = dct_derivative(psi, geo.L)
    dx = grid.dx
    g = geo.g

    one_minus_mx = 1.0 - beach.m_x
    xm = grid.x - beach.m
    bottom = field.phix[:, 0] ** 2
    dy_wall = (geo.h + eta[-1]) * grid.ds
    wall = trapezoid_1d(field.phiy[-1, :] ** 2, dy_wall)
    grad_diff = field.phix**2 - field.phiy**2
    cross = field.phix * field.phiy
    y = -geo.h + grid.s[None, :] * (geo.h + eta[:, None])
    zeta_tilde = d.zeta - 0.5 * one_minus_mx * eta
    slope_mx_eta = beach.m_xx * eta + beach.m_x * eta_x

    ke = 0.5 * trapezoid_1d(psi * traces.Gpsi_flux, dx)
    pe = 0.5 * g * trapezoid_1d(eta**2, dx)

    s: dict[str, float] = {
        "KE": ke,
        "PE": pe,
        "H": ke + pe,
        # accumulated boundary observation, bottom and wall parts
        "q_bottom": trapezoid_1d((0.5 * geo.h + 0.5 * d.rho) * bottom, dx),
        "q_wall": 0.5 * geo.L * wall,
        "Sigma": 0.5 * geo.h * trapezoid_1d(bottom, dx) + 0.5 * geo.L * wall,
        # primary observation identity pieces
        "p_zeta": trapezoid_1d(pressure.P * d.zeta, dx),
        "obs_kin": trapezoid_1d(
            (0.5 * one_minus_mx * psi + xm * psi_x) * traces.Gpsi_flux, dx
        ),
        "obs_kin_vbar": trapezoid_1d(d.Psi2 * traces.Vbar, dx),
        "vol_rhox": volume_integral(d.rho_x[:, None] * cross, eta, geo, grid),
        "B_zeta": trapezoid_1d(d.zeta * psi, dx),
        # alternate observation identity pieces
        "p_zeta_tilde": trapezoid_1d(pressure.P * zeta_tilde, dx),
        "B_zeta_tilde": trapezoid_1d(zeta_tilde * psi, dx),
        "pot_taper": 0.5 * g * trapezoid_1d(one_minus_mx * eta**2, dx),
        "bulk_taper": 0.5
        * volume_integral(one_minus_mx[:, None] * grad_diff, eta, geo, grid),
        "bottom_alt": trapezoid_1d(
            (0.5 * geo.h + (0.375 + 0.5 * beach.m_x) * eta) * bottom, dx
        ),
        "mixed_alt": volume_integral(
            (0.75 * eta_x + slope_mx_eta)[:, None] * cross, eta, geo, grid
        ),
        # same two terms with the remainder corrections interchanged
        "bottom_var": trapezoid_1d(
            (0.5 * geo.h + 0.25 * (3.0 - beach.m_x) * eta) * bottom, dx
        ),
        "mixed_var": volume_integral(
            (1.5 * eta_x - 0.5 * slope_mx_eta)[:, None] * cross, eta, geo, grid
        ),
        # quadratic remainders, surface and volume routes
        "Ra_surface": trapezoid_1d(traces.Gpsi_flux * beach.m * psi_x, dx)
        + trapezoid_1d(traces.Npsi * beach.m * eta_x, dx),
        "Ra_symmetrized": 0.5
        * trapezoid_1d(
            traces.Gpsi * beach.m * traces.V + traces.B * beach.m * psi_x, dx
        ),
        "Rb_surface": 0.5 * trapezoid_1d(eta * traces.Npsi, dx),
        "Rc_surface": trapezoid_1d(beach.m_x * eta * traces.Npsi, dx),
        "Ra_volume": volume_integral(
            0.5 * beach.m_x[:, None] * grad_diff, eta, geo, grid
        ),
        "Rb_volume": 0.25 * volume_integral(grad_diff, eta, geo, grid)
        - 0.25 * geo.h * trapezoid_1d(bottom, dx),
        "Rc_volume": 0.5
        * volume_integral(
            beach.m_x[:, None] * grad_diff - 2.0 * beach.m_xx[:, None] * y * cross,
            eta,
            geo,
            grid,
        )
        - 0.5 * geo.h * trapezoid_1d(beach.m_x * bottom, dx),
        # equipartition pieces, unweighted and cutoff-weighted
        "eta_P": trapezoid_1d(eta * pressure.P, dx),
        "B_eta": trapezoid_1d(eta * psi, dx),
        "chi_pe": 0.5 * g * trapezoid_1d(beach.chi * eta**2, dx),
        "chi_ke": 0.5 * trapezoid_1d(beach.chi * psi * traces.Gpsi_flux, dx),
        "chi_eta_P": trapezoid_1d(beach.chi * eta * pressure.P, dx),
        "chi_eta_N": trapezoid_1d(beach.chi * eta * traces.Npsi, dx),
        "B_chi_eta": trapezoid_1d(beach.chi * eta * psi, dx),
        "damping_power": trapezoid_1d(beach.chi * traces.Vbar**2, dx),
    }

    # bulk-reduction identity checked with the unit weight and with the
    # taper slope as the weight (zero and nonzero weight-derivative paths)
    for tag, w, w_x in (
        ("unit", np.ones(grid.nx + 1), np.zeros(grid.nx + 1)),
        ("slope", beach.m_x, beach.m_xx),
    ):
        s[f"bulk_reduction_{tag}_lhs"] = volume_integral(
            w[:, None] * grad_diff, eta, geo, grid
        ) - geo.h * trapezoid_1d(w * bottom, dx)
        s[f"bulk_reduction_{tag}_rhs"] = (
            trapezoid_1d(w * eta * bottom, dx)
            - 2.0 * volume_integral((w * eta_x)[:, None] * cross, eta, geo, grid)
            + 2.0
            * volume_integral(w_x[:, None] * (y - eta[:, None]) * cross, eta, geo, grid)
        )
    return s


def _series(
    history, beach: BeachProfile | None = None
) -> tuple[dict[str, np.ndarray], np.ndarray]:
    """One pass over a stored run: every audit integrand as a time array."""
    _require_full_sampling(history)
    geo, grid = history.geo, history.grid
    beach = history.beach if beach is None else beach
    if beach is None:
        raise BadBeach(
            "audits need a multiplier profile; damped runs carry one, "
            "otherwise pass beach explicitly"
        )
    solver = PotentialSolver(geo, grid)
    rows: list[dict[str, float]] = [
        _instant_scalars(state, pressure, beach, geo, grid, solver)
        for state, pressure in zip(history.states, history.pressures)
    ]
    times = np.asarray(history.times, dtype=float)
    series = {key: np.array([r[key] for r in rows]) for key in rows[0]}
    return series, times


def _report(name: str, lhs: float, rhs: float, scale_floor: float, breakdown: dict[str, float]) -> IdentityReport:
    residual = lhs - rhs
    scale = max(abs(lhs), abs(rhs), scale_floor)
    rel = abs(residual) / scale if scale > 0.0 else 0.0
    return IdentityReport(
        name=name,
        lhs=float(lhs),
        rhs=float(rhs),
        residual=float(residual),
        relative_residual=float(rel),
        per_term_breakdown={k: float(v) for k, v in breakdown.items()},
    )


def _pair_residual(a: float, b: float, floor: float) -> float:
    scale = max(abs(a), abs(b), floor)
    return abs(a - b) / scale if scale > 0.0 else 0.0


# ---------------------------------------------------------------------------
# Run-level audits
# ---------------------------------------------------------------------------


def audit_identity_T22(history, beach: BeachProfile | None = None) -> IdentityReport:
    """Audit the time-averaged energy observation identity.

    Half the time-integrated energy plus the accumulated boundary
    observation must equal the pressure work against the combined surface
    multiplier, the endpoint boundary pairing, the kinetic observation
    term, and the mixed-velocity volume term.
    """
    series, times = _series(history, beach)
    return _t22_from_series(series, times, history)


def _t22_from_series(series, times, history) -> IdentityReport:
    def tint(key: str) -> float:
        return float(np.trapezoid(series[key], x=times))

    half_h = 0.5 * tint("H")
    q_total = tint("q_bottom") + tint("q_wall")
    pressure_work = tint("p_zeta")
    boundary_jump = float(series["B_zeta"][-1] - series["B_zeta"][0])
    kinetic_obs = tint("obs_kin")
    mixed_volume = tint("vol_rhox")
    lhs = half_h + q_total
    rhs = -pressure_work - boundary_jump + kinetic_obs + mixed_volume
    return _report(
        "observation_primary",
        lhs,
        rhs,
        float(history.H0),
        {
            "half_energy_time_integral": half_h,
            "q_bottom": tint("q_bottom"),
            "q_wall": tint("q_wall"),
            "pressure_work": pressure_work,
            "boundary_jump": boundary_jump,
            "kinetic_observation": kinetic_obs,
            "kinetic_observation_flux_route": tint("obs_kin_vbar"),
            "mixed_volume": mixed_volume,
        },
    )


def audit_equipartition(history, beach: BeachProfile | None = None) -> IdentityReport:
    """Audit the kinetic/potential balance, plain and cutoff-weighted.

    The time-averaged kinetic excess A_K - A_P must equal half the
    pressure work on eta, the quadratic surface remainder, and half the
    endpoint eta-psi pairing; the weighted variant inserts the beach
    cutoff into every term.
    """
    series, times = _series(history, beach)
    return _equipartition_from_series(series, times, history)


def _equipartition_from_series(series, times, history) -> IdentityReport:
    def tint(key: str) -> float:
        return float(np.trapezoid(series[key], x=times))

    a_k = tint("KE")
    a_p = tint("PE")
    pressure_term = 0.5 * tint("eta_P")
    remainder_term = tint("Rb_surface")
    boundary_jump = 0.5 * float(series["B_eta"][-1] - series["B_eta"][0])
    lhs = a_k - a_p
    rhs = pressure_term + remainder_term + boundary_jump

    w_lhs = tint("chi_pe")
    w_jump = 0.5 * float(series["B_chi_eta"][-1] - series["B_chi_eta"][0])
    w_rhs = tint("chi_ke") - 0.5 * tint("chi_eta_P") - w_jump - 0.5 * tint("chi_eta_N")
    h0 = float(history.H0)
    w_scale = max(abs(w_lhs), abs(w_rhs), h0)
    return _report(
        "equipartition",
        lhs,
        rhs,
        h0,
        {
            "kinetic_time_integral": a_k,
            "potential_time_integral": a_p,
            "pressure_term": pressure_term,
            "remainder_term": remainder_term,
            "boundary_jump": boundary_jump,
            "weighted_lhs": w_lhs,
            "weighted_rhs": w_rhs,
            "weighted_residual": w_lhs - w_rhs,
            "weighted_relative_residual": abs(w_lhs - w_rhs) / w_scale
            if w_scale > 0.0
            else 0.0,
        },
    )


def audit_identity_appC(history, beach: BeachProfile | None = None) -> IdentityReport:
    """Audit the alternate observation identity and its remainder lemmas.

    The identity trades the accumulated boundary observation for a
    bottom-pressure term plus taper-localized potential, bulk, and
    mixed-velocity terms.  Two combinations of the quadratic remainders
    appear in the ledger: the main lhs/rhs uses the combination that
    balances in the continuum; the breakdown also carries a variant with
    the two remainder corrections interchanged, whose residual stays
    finite under refinement and is recorded for comparison only.

    The breakdown additionally reports each quadratic remainder computed
    by its surface route and its volume route, and the bulk-reduction
    identity behind them with the unit weight and the taper slope, so a
    failure localizes to a single lemma.
    """
    series, times = _series(history, beach)
    return _appc_from_series(series, times, history)


def _appc_from_series(series, times, history) -> IdentityReport:
    def tint(key: str) -> float:
        return float(np.trapezoid(series[key], x=times))

    h0 = float(history.H0)
    half_h = 0.5 * tint("H")
    pressure_work = tint("p_zeta_tilde")
    boundary_jump = float(series["B_zeta_tilde"][-1] - series["B_zeta_tilde"][0])
    pot_taper = tint("pot_taper")
    bulk_taper = tint("bulk_taper")
    bottom_alt = tint("bottom_alt")
    mixed_alt = tint("mixed_alt")
    lhs = half_h + bottom_alt
    rhs = -pressure_work - boundary_jump + pot_taper + bulk_taper + mixed_alt

    bottom_var = tint("bottom_var")
    mixed_var = tint("mixed_var")
    var_lhs = half_h + bottom_var
    var_rhs = -pressure_work - boundary_jump + pot_taper + bulk_taper + mixed_var
    var_scale = max(abs(var_lhs), abs(var_rhs), h0)

    breakdown = {
        "half_energy_time_integral": half_h,
        "bottom_pressure_term": bottom_alt,
        "pressure_work": pressure_work,
        "boundary_jump": boundary_jump,
        "potential_taper_term": pot_taper,
        "bulk_taper_term": bulk_taper,
        "mixed_volume_term": mixed_alt,
        "variant_bottom_pressure_term": bottom_var,
        "variant_mixed_volume_term": mixed_var,
        "variant_residual": var_lhs - var_rhs,
        "variant_relative_residual": abs(var_lhs - var_rhs) / var_scale
        if var_scale > 0.0
        else 0.0,
    }
    for tag in ("Ra", "Rb", "Rc"):
        surf = tint(f"{tag}_surface")
        vol = tint(f"{tag}_volume")
        breakdown[f"{tag}_surface"] = surf
        breakdown[f"{tag}_volume"] = vol
        breakdown[f"{tag}_form_relative_residual"] = _pair_residual(surf, vol, h0)
    breakdown["Ra_symmetrized"] = tint("Ra_symmetrized")
    for tag in ("unit", "slope"):
        b_lhs = tint(f"bulk_reduction_{tag}_lhs")
        b_rhs = tint(f"bulk_reduction_{tag}_rhs")
        breakdown[f"bulk_reduction_{tag}_lhs"] = b_lhs
        breakdown[f"bulk_reduction_{tag}_rhs"] = b_rhs
        breakdown[f"bulk_reduction_{tag}_relative_residual"] = _pair_residual(
            b_lhs, b_rhs, h0
        )
    return _report("observation_alternate", lhs, rhs, h0, breakdown)


# ---------------------------------------------------------------------------
# Instantaneous audits
# ---------------------------------------------------------------------------


def audit_pohozaev(
    state: SurfaceState,
    field: PotentialField,
    traces: TraceSet,
    geo: TankGeometry,
    grid: SimGrid,
) -> IdentityReport:
    """Audit the stretched-multiplier flux identity at one instant.

    Pairing the surface flux with x times the tangential surface-potential
    slope must reproduce the positive bottom-and-wall functional plus the
    quadratic surface term against eta - x*eta_x.  Normalization uses the
    state's own energy.
    """
    eta_x = dct_derivative(state.eta, geo.L)
    psi_x = dct_derivative(state.psi, geo.L)
    lhs = trapezoid_1d(traces.Gpsi_flux * grid.x * psi_x, grid.dx)
    sigma = sigma_functional(field, state, geo, grid)
    mult_term = trapezoid_1d((state.eta - grid.x * eta_x) * traces.Npsi, grid.dx)
    rhs = sigma + mult_term
    h_state, _, _ = energy(state, traces, geo)
    return _report(
        "pohozaev",
        lhs,
        rhs,
        abs(h_state),
        {
            "Sigma": sigma,
            "multiplier_term": mult_term,
            "state_energy": h_state,
        },
    )


def audit_remainder(
    state: SurfaceState,
    field: PotentialField,
    derived: DerivedMultipliers,
    geo: TankGeometry,
    grid: SimGrid,
) -> IdentityReport:
    """Audit the split of the weighted quadratic surface term at one instant.

    The weighted surface integral of the quadratic term must equal a
    mixed-velocity volume term against the weight's slope plus half the
    weighted bottom slip; this is the step that converts an a-priori
    uncontrollable surface quantity into energy-controlled pieces.
    """
    eta_x = dct_derivative(state.eta, geo.L)
    v = field.phix[:, -1]
    b = field.phiy[:, -1]
    npsi = 0.5 * v**2 - 0.5 * b**2 + eta_x * v * b
    lhs = trapezoid_1d(derived.rho * npsi, grid.dx)
    volume_term = -volume_integral(
        derived.rho_x[:, None] * field.phix * field.phiy, state.eta, geo, grid
    )
    bottom_term = 0.5 * trapezoid_1d(derived.rho * field.phix[:, 0] ** 2, grid.dx)
    rhs = volume_term + bottom_term
    traces = compute_traces(field, state, geo, grid)
    h_state, _, _ = energy(state, traces, geo)
    return _report(
        "remainder_split",
        lhs,
        rhs,
        abs(h_state),
        {
            "volume_term": volume_term,
            "bottom_term": bottom_term,
            "state_energy": h_state,
        },
    )


# ---------------------------------------------------------------------------
# Decay certificate
# ---------------------------------------------------------------------------


def decay_report(
    history,
    beach: BeachProfile | None = None,
    alpha: float = 0.125,
    require_admissible: bool = False,
) -> DecayReport:
    """Evaluate the quantitative decay certificate on a stored run.

    Reports both the endpoint certificate and the intermediate
    observation inequality so a failure localizes to the identity layer
    or the estimate layer.  With require_admissible the multiplier
    admissibility bounds (rho >= -h, |rho_x| < 1/2) become a hard error;
    otherwise an inadmissible run still yields a report flagged
    non-certifying.
    """
    beach = history.beach if beach is None else beach
    if beach is None:
        raise BadBeach(
            "the decay certificate needs a multiplier profile; damped runs "
            "carry one, otherwise pass beach explicitly"
        )
    geo, grid = history.geo, history.grid
    consts = decay_constants(beach, history, geo, grid, alpha=alpha)
    if require_admissible and not consts.admissible:
        raise InadmissibleRho(
            f"multiplier bounds violated (c = {consts.c:.3g}); certificate void"
        )
    series, times = _series(history, beach)

    def tint(key: str) -> float:
        return float(np.trapezoid(series[key], x=times))

    h0 = float(history.H0)
    t_span = float(times[-1] - times[0])
    h_final = float(series["H"][-1])
    cert_lhs = (0.5 - consts.c - consts.alpha) * t_span * h_final
    cert_rhs = (
        consts.Cm**2 / (2.0 * consts.alpha * geo.g)
        + math.sqrt(t_span) * consts.N2T
        + (2.0 * math.sqrt(2.0) / math.sqrt(geo.g)) * consts.N1T
    ) * h0
    boundary_term = float(series["B_zeta"][-1] - series["B_zeta"][0])
    boundary_bound = (2.0 * math.sqrt(2.0) / math.sqrt(geo.g)) * consts.N1T * h0
    obs_lhs = (0.5 - consts.c) * tint("H")
    obs_rhs = -tint("p_zeta") - boundary_term + tint("obs_kin")

    tail = times >= times[0] + 0.5 * t_span
    h_tail = series["H"][tail]
    if tail.sum() >= 2 and np.all(h_tail > 0.0):
        rate = float(np.polyfit(times[tail], np.log(h_tail), 1)[0])
    else:
        rate = float("nan")
    edges = times[0] + t_span * np.linspace(0.0, 1.0, 5)
    idx = np.searchsorted(times, edges, side="left").clip(0, len(times) - 1)
    h_at = series["H"][idx]
    ratios = tuple(
        float(h_at[k + 1] / h_at[k]) if h_at[k] > 0.0 else float("nan")
        for k in range(4)
    )

    cert_holds = bool(cert_lhs <= cert_rhs)
    obs_holds = bool(obs_lhs <= obs_rhs)
    return DecayReport(
        constants=consts,
        certificate_lhs=float(cert_lhs),
        certificate_rhs=float(cert_rhs),
        certificate_holds=cert_holds,
        observation_lhs=float(obs_lhs),
        observation_rhs=float(obs_rhs),
        observation_holds=obs_holds,
        boundary_term=boundary_term,
        boundary_bound=float(boundary_bound),
        decay_rate=rate,
        window_ratios=ratios,
        certifying=bool(consts.admissible and cert_holds and obs_holds),
    )


def run_all_audits(
    history, beach: BeachProfile | None = None
) -> dict[str, IdentityReport]:
    """Every identity audit of a run in one pass, keyed by report name.

    The run-level audits share a single series walk; the instantaneous
    audits are evaluated at the final stored state.
    """
    beach = history.beach if beach is None else beach
    series, times = _series(history, beach)
    geo, grid = history.geo, history.grid
    state = history.states[-1]
    field = PotentialSolver(geo, grid).solve(state)
    traces = compute_traces(field, state, geo, grid)
    derived = derived_multipliers(state, beach, geo, grid)
    reports = [
        _t22_from_series(series, times, history),
        _equipartition_from_series(series, times, history),
        _appc_from_series(series, times, history),
        audit_pohozaev(state, field, traces, geo, grid),
        audit_remainder(state, field, derived, geo, grid),
    ]
    return {r.name: r for r in reports}
