"""Beach cutoff, position weight, and the derived multiplier fields.

The damping zone occupies the last stretch [L - delta, L] of the tank. Two
ingredients live there: a cutoff chi ramping from 0 to 1 across
[L - delta, L - delta/2], and a weight m(x) = x * kappa(x) that coincides
with x on [0, L - delta/2] and tapers to m(L) = 0. All derivatives of the
weight are obtained spectrally from kappa, whose even extension is smooth,
rather than from m itself (m has unit slope at the left wall, which the
cosine basis cannot represent).

Derived fields are expanded by the product rule before differentiation so
every spectral derivative acts on a plain cosine-basis function:

    zeta = (m eta)_x - eta/4 + (1 - m_x) eta/2
    rho  = (m - x) eta_x + (5/4 + m_x/2) eta
    Psi1 = -m psi_x - psi/4 + (1 - m_x) psi/2
    Psi2 = -m_xx psi/2 + (3/2)(1 - m_x) psi_x + (x - m) psi_xx

The scalar constants attached to a run: Cm = sup m + (L/2) sup|1/2 - m_x|,
c = the largest sup|rho_x| seen along the run, and the normalized multiplier
sizes N1T, N2T (largest L2 norms of Psi1, Psi2 over the run, divided by
sqrt of the initial energy).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    SimGrid,
    TankGeometry,
    cosine_coeffs,
    cosine_synthesis,
    dct_derivative,
    smooth_cutoff,
    trapezoid_1d,
)
from .elliptic import SurfaceState
from .errors import BadBeach, ZeroEnergy


@dataclass(frozen=True)
class BeachProfile:
    """Damping-zone geometry sampled on the grid nodes."""

    delta: float
    chi: np.ndarray
    m: np.ndarray
    m_x: np.ndarray
    m_xx: np.ndarray


@dataclass(frozen=True)
class DerivedMultipliers:
    zeta: np.ndarray
    rho: np.ndarray
    rho_x: np.ndarray
    Psi1: np.ndarray
    Psi2: np.ndarray


@dataclass(frozen=True)
class DecayConstants:
    Cm: float
    c: float
    alpha: float
    N1T: float
    N2T: float
    admissible: bool


def _second_derivative(f: np.ndarray, length: float) -> np.ndarray:
    c = cosine_coeffs(f)
    n = np.arange(c.size)
    return cosine_synthesis(-((n * np.pi / length) ** 2) * c)


def build_beach(geo: TankGeometry, grid: SimGrid, delta: float) -> BeachProfile:
    """Construct the cutoff and weight for a beach of length delta."""
    if not 0.0 < delta < geo.L / 2:
        raise BadBeach(f"beach length must lie in (0, L/2), got {delta}")
    chi = smooth_cutoff(grid, geo.L - delta, geo.L - delta / 2)
    kappa = 1.0 - smooth_cutoff(grid, geo.L - delta / 2, geo.L)
    kappa_x = dct_derivative(kappa, geo.L)
    kappa_xx = _second_derivative(kappa, geo.L)
    m = grid.x * kappa
    m_x = kappa + grid.x * kappa_x
    m_xx = 2.0 * kappa_x + grid.x * kappa_xx
    return BeachProfile(delta=delta, chi=chi, m=m, m_x=m_x, m_xx=m_xx)


def identity_weight_profile(geo: TankGeometry, grid: SimGrid) -> BeachProfile:
    """Diagnostic profile with m(x) = x everywhere and no damping.

    Violates the endpoint condition m(L) = 0, so it certifies nothing;
    it exists because the derived fields collapse to closed forms on it.
    """
    zero = np.zeros(grid.nx + 1)
    return BeachProfile(
        delta=0.0,
        chi=zero,
        m=grid.x.copy(),
        m_x=np.ones(grid.nx + 1),
        m_xx=zero.copy(),
    )


def derived_multipliers(
    state: SurfaceState,
    beach: BeachProfile,
    geo: TankGeometry,
    grid: SimGrid,
    psi: np.ndarray | None = None,
) -> DerivedMultipliers:
    """Evaluate the multiplier fields for one state.

    psi overrides state.psi when the caller needs the fields for a
    modified trace (time-integrated, say).
    """
    if psi is None:
        psi = state.psi
    eta = state.eta
    L = geo.L
    eta_x = dct_derivative(eta, L)
    eta_xx = _second_derivative(eta, L)
    psi_x = dct_derivative(psi, L)
    psi_xx = _second_derivative(psi, L)
    m, m_x, m_xx = beach.m, beach.m_x, beach.m_xx

    zeta = m_x * eta + m * eta_x - eta / 4.0 + (1.0 - m_x) * eta / 2.0
    rho = (m - grid.x) * eta_x + (1.25 + m_x / 2.0) * eta
    rho_x = (
        (m_x - 1.0) * eta_x
        + (m - grid.x) * eta_xx
        + (m_xx / 2.0) * eta
        + (1.25 + m_x / 2.0) * eta_x
    )
    psi1 = -m * psi_x - psi / 4.0 + (1.0 - m_x) * psi / 2.0
    psi2 = (
        -m_xx * psi / 2.0
        + 1.5 * (1.0 - m_x) * psi_x
        + (grid.x - m) * psi_xx
    )
    return DerivedMultipliers(zeta=zeta, rho=rho, rho_x=rho_x, Psi1=psi1, Psi2=psi2)


def _dense_weight_samples(geo: TankGeometry, delta: float, n: int):
    """Closed-form weight and its spectral derivative on n+1 dense nodes.

    The sups entering Cm are properties of the beach shape alone; grid-node
    maxima miss the sharp m_x trough between nodes by a few tenths of a
    percent, so they are taken on a fixed dense sampling instead.
    """
    x = np.linspace(0.0, geo.L, n + 1)
    kappa = 1.0 - smooth_cutoff(x, geo.L - delta / 2, geo.L)
    m = x * kappa
    m_x = kappa + x * dct_derivative(kappa, geo.L)
    return m, m_x


def weight_constant(beach: BeachProfile, geo: TankGeometry, n_dense: int = 262144) -> float:
    """Cm = sup m + (L/2) sup|1/2 - m_x| for the beach's weight."""
    if beach.delta > 0.0:
        m, m_x = _dense_weight_samples(geo, beach.delta, n_dense)
    else:
        # profiles built directly from nodal arrays (no closed form to refine)
        m, m_x = beach.m, beach.m_x
    return float(np.max(m) + (geo.L / 2.0) * np.max(np.abs(0.5 - m_x)))


def decay_constants(
    beach: BeachProfile,
    run_history,
    geo: TankGeometry,
    grid: SimGrid,
    alpha: float = 0.125,
) -> DecayConstants:
    """Scalar certificate inputs measured over a stored run.

    run_history must expose .states (the sampled surface states, first one
    initial) and .H0 (initial energy). The admissibility flag records
    whether rho stayed above -h and the observed c stayed below 1/2.
    """
    if alpha <= 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    H0 = float(run_history.H0)
    if H0 <= 0.0:
        raise ZeroEnergy("initial energy is zero; normalized constants undefined")
    c = 0.0
    n1 = 0.0
    n2 = 0.0
    rho_min = np.inf
    for state in run_history.states:
        d = derived_multipliers(state, beach, geo, grid)
        c = max(c, float(np.max(np.abs(d.rho_x))))
        rho_min = min(rho_min, float(np.min(d.rho)))
        n1 = max(n1, float(np.sqrt(trapezoid_1d(d.Psi1**2, grid.dx))))
        n2 = max(n2, float(np.sqrt(trapezoid_1d(d.Psi2**2, grid.dx))))
    sqrtH0 = np.sqrt(H0)
    admissible = (rho_min >= -geo.h) and (c < 0.5)
    return DecayConstants(
        Cm=weight_constant(beach, geo),
        c=c,
        alpha=alpha,
        N1T=n1 / sqrtH0,
        N2T=n2 / sqrtH0,
        admissible=admissible,
    )
