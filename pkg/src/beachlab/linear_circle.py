"""Linearized deep-water model on the unit circle with pneumatic damping.

A companion to the tank: gravity is 1, depth is infinite, and the domain is
the 2*pi-periodic circle, so every operator is a Fourier multiplier and the
only coupling comes from the damping pressure.  The surface pair (eta, psi)
obeys

    d/dt eta = |D| psi,
    d/dt psi = -eta - P_ext,      P_ext = -IDX( chi * IDX(|D| psi) ),

where IDX is the zero-mean antiderivative (division by i*n, with the n = 0
mode dropped).  Substituting theta = |D|^{1/2} psi symmetrizes the system:
the undamped generator becomes a modewise rotation between eta_n and
theta_n, and the damping acts on theta alone through a nonnegative
quadratic form.

Conventions.  States store full complex spectra in numpy fft layout on
2N+1 collocation nodes.  Inner products and norms use the plain coefficient
l2 sum (Parseval up to the 2*pi area factor), so a real field a*cos(n x)
has L2 norm |a|/sqrt(2) * sqrt(2) = |a| * sqrt(1/2) per coefficient pair;
concretely a unit coefficient on modes +-1 gives norm sqrt(2).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import pi, sqrt
from typing import Dict, Sequence, Tuple

import numpy as np

from .core import smooth_cutoff
from .errors import ConfigError, NegativeCutoff, NonFiniteField

_MULTIPLIER_OPS = ("abs_D", "sqrt_abs_D", "inv_dx")


def mode_numbers(n_modes: int) -> np.ndarray:
    """Integer wavenumbers in fft layout: 0, 1, .., N, -N, .., -1."""
    count = 2 * n_modes + 1
    return np.fft.fftfreq(count, d=1.0 / count).round().astype(int)


def collocation_nodes(n_modes: int) -> np.ndarray:
    count = 2 * n_modes + 1
    return 2.0 * pi * np.arange(count) / count


@dataclass(frozen=True)
class SpectralState:
    """Surface pair on the circle, stored spectrally.

    eta_hat and psi_hat hold the coefficients of sum_n c_n exp(i n x) in
    fft layout, length 2N+1.  The elevation must be mean free; the mean of
    psi is carried (it is a constant of the damped motion) but never feeds
    back into the dynamics.
    """

    eta_hat: np.ndarray
    psi_hat: np.ndarray
    n_modes: int

    def __post_init__(self):
        count = 2 * self.n_modes + 1
        if self.eta_hat.shape != (count,) or self.psi_hat.shape != (count,):
            raise ConfigError(
                f"spectra must have length {count} for {self.n_modes} modes"
            )
        if not (np.all(np.isfinite(self.eta_hat.view(float)))
                and np.all(np.isfinite(self.psi_hat.view(float)))):
            raise NonFiniteField("non-finite spectral coefficient")
        scale = max(float(np.max(np.abs(self.eta_hat))), 1.0)
        if abs(self.eta_hat[0]) > 1e-12 * scale:
            raise ConfigError("elevation must be mean free on the circle")

    @classmethod
    def from_physical(cls, eta, psi) -> "SpectralState":
        """Build from samples on the 2N+1-point collocation grid.

        The elevation mean is projected out rather than rejected: sampled
        initial data rarely lands on exact zero mean.
        """
        eta = np.asarray(eta, dtype=float)
        psi = np.asarray(psi, dtype=float)
        if eta.shape != psi.shape or eta.ndim != 1 or eta.size % 2 == 0:
            raise ConfigError("need matching odd-length sample vectors")
        n_modes = (eta.size - 1) // 2
        eta_hat = np.fft.fft(eta) / eta.size
        psi_hat = np.fft.fft(psi) / psi.size
        eta_hat[0] = 0.0
        return cls(eta_hat, psi_hat, n_modes)

    @classmethod
    def single_mode(cls, n_modes: int, mode: int, eta_amp: float = 0.0,
                    psi_amp: float = 0.0) -> "SpectralState":
        """Pure-cosine state: eta = eta_amp*cos(mode x), same for psi."""
        if not 1 <= mode <= n_modes:
            raise ConfigError(f"mode must lie in 1..{n_modes}, got {mode}")
        count = 2 * n_modes + 1
        eta_hat = np.zeros(count, dtype=complex)
        psi_hat = np.zeros(count, dtype=complex)
        eta_hat[mode] = eta_hat[-mode] = 0.5 * eta_amp
        psi_hat[mode] = psi_hat[-mode] = 0.5 * psi_amp
        return cls(eta_hat, psi_hat, n_modes)

    def to_physical(self) -> Tuple[np.ndarray, np.ndarray]:
        count = 2 * self.n_modes + 1
        eta = np.fft.ifft(self.eta_hat * count)
        psi = np.fft.ifft(self.psi_hat * count)
        return eta.real.copy(), psi.real.copy()


@dataclass(frozen=True)
class SymmetrizedState:
    """The pair u = (eta_hat, theta_hat) with theta = |D|^{1/2} psi."""

    eta_hat: np.ndarray
    theta_hat: np.ndarray
    n_modes: int


def _abs_n(n_modes: int) -> np.ndarray:
    return np.abs(mode_numbers(n_modes)).astype(float)


def _inv_ik(n_modes: int) -> np.ndarray:
    """Multiplier of the zero-mean antiderivative: 1/(i n), zero at n = 0."""
    n = mode_numbers(n_modes).astype(float)
    out = np.zeros(n.size, dtype=complex)
    out[1:] = 1.0 / (1j * n[1:])
    return out


def multiplier(op: str, state: SpectralState) -> SpectralState:
    """Apply a diagonal Fourier multiplier to both components of a state.

    op is one of "abs_D" (|n|), "sqrt_abs_D" (sqrt|n|), "inv_dx"
    (1/(i n) with the constant mode annihilated).  Applying sqrt_abs_D
    twice reproduces abs_D exactly.
    """
    if op not in _MULTIPLIER_OPS:
        raise ConfigError(
            f"unknown multiplier {op!r}; choose from {_MULTIPLIER_OPS}"
        )
    if op == "abs_D":
        symbol = _abs_n(state.n_modes).astype(complex)
    elif op == "sqrt_abs_D":
        symbol = np.sqrt(_abs_n(state.n_modes)).astype(complex)
    else:
        symbol = _inv_ik(state.n_modes)
    return SpectralState(symbol * state.eta_hat, symbol * state.psi_hat,
                         state.n_modes)


def symmetrize(state: SpectralState) -> Tuple[SymmetrizedState, complex]:
    """Return u = (eta, |D|^{1/2} psi) plus the carried psi mean."""
    root = np.sqrt(_abs_n(state.n_modes))
    return (SymmetrizedState(state.eta_hat.copy(), root * state.psi_hat,
                             state.n_modes),
            complex(state.psi_hat[0]))


def desymmetrize(u: SymmetrizedState, psi_mean: complex = 0.0) -> SpectralState:
    root = np.sqrt(_abs_n(u.n_modes))
    psi_hat = np.zeros_like(u.theta_hat)
    psi_hat[1:] = u.theta_hat[1:] / root[1:]
    psi_hat[0] = psi_mean
    return SpectralState(u.eta_hat.copy(), psi_hat, u.n_modes)


def _check_cutoff(chi, n_modes: int) -> np.ndarray:
    chi = np.asarray(chi, dtype=float)
    if chi.shape != (2 * n_modes + 1,):
        raise ConfigError(
            f"cutoff must be sampled on the {2 * n_modes + 1}-point grid"
        )
    if np.any(chi < 0.0):
        raise NegativeCutoff(
            f"cutoff samples must be nonnegative, min is {chi.min():.3e}"
        )
    return chi


class _PaddedProduct:
    """Alias-free physical multiplication by a fixed sampled function.

    Both factors are band limited to N, so the product lives below 2N and a
    doubled grid (4N+2 points >= the 4N+1 needed) represents it exactly;
    truncating back to |n| <= N then equals the exact projection.  The
    cutoff enters through its trigonometric interpolant.
    """

    def __init__(self, chi_samples: np.ndarray, n_modes: int):
        count = 2 * n_modes + 1
        self.count = count
        self.fine = 2 * count
        self.n_modes = n_modes
        chi_hat = np.fft.fft(chi_samples) / count
        self.chi_fine = np.fft.ifft(self._pad(chi_hat) * self.fine).real

    def _pad(self, coeffs: np.ndarray) -> np.ndarray:
        out = np.zeros(self.fine, dtype=complex)
        half = self.n_modes + 1
        out[:half] = coeffs[:half]
        out[-self.n_modes:] = coeffs[-self.n_modes:]
        return out

    def apply(self, coeffs: np.ndarray) -> np.ndarray:
        """Spectrum of chi * f from the spectrum of f, truncated to N."""
        fine = np.fft.ifft(self._pad(coeffs) * self.fine)
        prod = np.fft.fft(self.chi_fine * fine) / self.fine
        half = self.n_modes + 1
        out = np.empty(self.count, dtype=complex)
        out[:half] = prod[:half]
        out[-self.n_modes:] = prod[-self.n_modes:]
        return out


class _CircleOperator:
    """Precomputed symbols for the symmetrized generator du/dt = -(L+P)u."""

    def __init__(self, n_modes: int, chi_samples: np.ndarray):
        self.n_modes = n_modes
        self.root = np.sqrt(_abs_n(n_modes))
        # multiplier of IDX |D|^{1/2}: sqrt|n| / (i n)
        self.half_idx = _inv_ik(n_modes) * self.root
        self.product = _PaddedProduct(_check_cutoff(chi_samples, n_modes),
                                      n_modes)

    def damping(self, theta_hat: np.ndarray) -> np.ndarray:
        """P theta = -IDX |D|^{1/2} ( chi * IDX |D|^{1/2} theta )."""
        inner = self.product.apply(self.half_idx * theta_hat)
        return -self.half_idx * inner

    def rhs(self, eta_hat: np.ndarray, theta_hat: np.ndarray):
        """Time derivative (d eta, d theta) of the symmetrized pair."""
        return (self.root * theta_hat,
                -self.root * eta_hat - self.damping(theta_hat))

    def quadratic_form(self, theta_hat: np.ndarray) -> float:
        """(P u, u): the integral of chi times the squared half-integral.

        Equals sum_n of w_n conj(w_n) weighted against the cutoff, i.e. a
        nonnegative number whenever the cutoff interpolant is nonnegative.
        """
        w = self.half_idx * theta_hat
        return float(np.real(np.vdot(w, self.product.apply(w))))


def apply_damping(state: SpectralState, chi_samples) -> SpectralState:
    """Damping block applied to a state: zero on eta, P on theta.

    Returns the state whose psi component is |D|^{-1/2} P |D|^{1/2} psi,
    which is exactly the damping pressure subtracted from d psi / dt in
    the unsymmetrized system.
    """
    op = _CircleOperator(state.n_modes, np.asarray(chi_samples, dtype=float))
    u, _ = symmetrize(state)
    damped = SymmetrizedState(np.zeros_like(u.eta_hat),
                              op.damping(u.theta_hat), u.n_modes)
    return desymmetrize(damped)


def damping_form(state: SpectralState, chi_samples) -> float:
    """The quadratic form (P u, u) >= 0 of the symmetrized damping."""
    op = _CircleOperator(state.n_modes, np.asarray(chi_samples, dtype=float))
    u, _ = symmetrize(state)
    return op.quadratic_form(u.theta_hat)


def skew_part(state: SpectralState) -> Tuple[np.ndarray, np.ndarray]:
    """L u for the symmetrized pair: (-|D|^{1/2} theta, |D|^{1/2} eta)."""
    u, _ = symmetrize(state)
    root = np.sqrt(_abs_n(state.n_modes))
    return -root * u.theta_hat, root * u.eta_hat


def inner_product(a: SymmetrizedState, b: SymmetrizedState) -> float:
    return float(np.real(np.vdot(b.eta_hat, a.eta_hat)
                         + np.real(np.vdot(b.theta_hat, a.theta_hat))))


def sobolev_norm(state: SpectralState, s: float) -> Tuple[float, float]:
    """Sobolev pair (|eta|_{H^s}, |psi|_{H^{s+1/2}}).

    The regularity index must be a half-integer (2s a nonnegative
    integer); that is the scale on which the uniform bounds hold.  Norms
    are coefficient sums: |f|_{H^s}^2 = sum (1+n^2)^s |f_n|^2.
    """
    two_s = 2.0 * s
    if s < 0 or abs(two_s - round(two_s)) > 1e-12:
        raise ConfigError(
            f"regularity index must be a nonnegative half-integer, got {s}"
        )
    n = mode_numbers(state.n_modes).astype(float)
    weight = (1.0 + n * n)
    eta_norm = sqrt(float(np.sum(weight ** s * np.abs(state.eta_hat) ** 2)))
    psi_norm = sqrt(float(np.sum(weight ** (s + 0.5)
                                 * np.abs(state.psi_hat) ** 2)))
    return eta_norm, psi_norm


def _symmetrized_norm(eta_hat, theta_hat, psi_mean, weight_s) -> float:
    # the modewise-invariant norm of the undamped rotation; psi's carried
    # mean is included so the value matches the full state
    total = (np.sum(weight_s * (np.abs(eta_hat) ** 2
                                + np.abs(theta_hat) ** 2))
             + abs(psi_mean) ** 2)
    return sqrt(float(total))


@dataclass
class CircleHistory:
    """Per-step scalar records of a circle evolution plus the final state."""

    times: np.ndarray
    l2: np.ndarray                    # |u| in the coefficient l2 sense
    damping_quadratic: np.ndarray     # (P u, u) at each step
    rate_l2: np.ndarray               # |du/dt| at each step
    sobolev: Dict[float, np.ndarray]  # s -> |eta|_{H^s} + |psi|_{H^{s+1/2}}
    invariant: Dict[float, np.ndarray]  # s -> rotation-invariant pair norm
    final_state: SpectralState
    dt: float
    chi: np.ndarray = field(repr=False)


def evolve_circle(state: SpectralState, chi_samples, dt: float,
                  t_final: float,
                  s_values: Sequence[float] = (0.0, 0.5, 1.0)) -> CircleHistory:
    """March the damped circle system with classical RK4.

    Stability of the modewise rotation requires dt * sqrt(N) <= 1 (the
    fastest frequency is sqrt(N)); violating it is a configuration error,
    not a blow-up.  Every step stores the l2 norm, the damping form, the
    time-derivative norm, and the requested Sobolev pair sums.
    """
    if dt <= 0.0 or t_final < 0.0:
        raise ConfigError("need dt > 0 and t_final >= 0")
    if dt * sqrt(state.n_modes) > 1.0 + 1e-12:
        raise ConfigError(
            f"dt={dt:.4g} unstable for N={state.n_modes}: "
            f"need dt*sqrt(N) <= 1"
        )
    for s in s_values:
        sobolev_norm(state, s)  # validate the index set up front

    op = _CircleOperator(state.n_modes,
                         np.asarray(chi_samples, dtype=float))
    u, psi_mean = symmetrize(state)
    eta, theta = u.eta_hat.copy(), u.theta_hat.copy()
    n_steps = int(round(t_final / dt))
    if abs(n_steps * dt - t_final) > 1e-9 * max(t_final, dt):
        n_steps = int(np.ceil(t_final / dt - 1e-12))

    n = mode_numbers(state.n_modes).astype(float)
    weight = 1.0 + n * n
    root = op.root
    s_values = tuple(float(s) for s in s_values)
    count = n_steps + 1
    times = np.empty(count)
    l2 = np.empty(count)
    quad = np.empty(count)
    rate = np.empty(count)
    sob = {s: np.empty(count) for s in s_values}
    inv = {s: np.empty(count) for s in s_values}

    def record(k, t, eta, theta, d_eta, d_theta):
        times[k] = t
        l2[k] = sqrt(float(np.real(np.vdot(eta, eta))
                           + np.real(np.vdot(theta, theta))))
        quad[k] = op.quadratic_form(theta)
        rate[k] = sqrt(float(np.real(np.vdot(d_eta, d_eta))
                             + np.real(np.vdot(d_theta, d_theta))))
        psi_abs2 = np.zeros_like(weight)
        psi_abs2[1:] = np.abs(theta[1:]) ** 2 / np.abs(n[1:])
        psi_abs2[0] = abs(psi_mean) ** 2
        eta_abs2 = np.abs(eta) ** 2
        for s in s_values:
            w_s = weight ** s
            sob[s][k] = (sqrt(float(np.sum(w_s * eta_abs2)))
                         + sqrt(float(np.sum(w_s * weight ** 0.5
                                             * psi_abs2))))
            inv[s][k] = _symmetrized_norm(eta, theta, psi_mean, w_s)

    for k in range(n_steps + 1):
        d_eta, d_theta = op.rhs(eta, theta)
        record(k, k * dt, eta, theta, d_eta, d_theta)
        if k == n_steps:
            break
        k1e, k1t = d_eta, d_theta
        k2e, k2t = op.rhs(eta + 0.5 * dt * k1e, theta + 0.5 * dt * k1t)
        k3e, k3t = op.rhs(eta + 0.5 * dt * k2e, theta + 0.5 * dt * k2t)
        k4e, k4t = op.rhs(eta + dt * k3e, theta + dt * k3t)
        eta = eta + (dt / 6.0) * (k1e + 2.0 * k2e + 2.0 * k3e + k4e)
        theta = theta + (dt / 6.0) * (k1t + 2.0 * k2t + 2.0 * k3t + k4t)

    final = desymmetrize(SymmetrizedState(eta, theta, state.n_modes),
                         psi_mean)
    return CircleHistory(times, l2, quad, rate, sob, inv, final, dt,
                         np.asarray(chi_samples, dtype=float))


def circle_cutoff(n_modes: int, plateau: float = 1.0,
                  ramp: float = 1.0) -> np.ndarray:
    """Even C-infinity bump centered at pi: 1 on a plateau, 0 near x = 0.

    plateau is the half-width of the flat region, ramp the width of each
    smooth transition; plateau + ramp must stay below pi so the damping
    vanishes in a neighborhood of the observation point x = 0.
    """
    if plateau < 0 or ramp <= 0 or plateau + ramp >= pi:
        raise ConfigError("need 0 <= plateau, 0 < ramp, plateau + ramp < pi")
    x = collocation_nodes(n_modes)
    rise = smooth_cutoff(x, pi - plateau - ramp, pi - plateau)
    fall = smooth_cutoff(x, pi + plateau, pi + plateau + ramp)
    return rise * (1.0 - fall)


@dataclass
class UniformBoundReport:
    """Sup-in-time norm ratios of a long damped run.

    sup_ratios uses the literal Sobolev pair sum; invariant_ratios uses
    the rotation-invariant symmetrized norm, which the undamped flow
    preserves exactly (so with a zero cutoff every value is 1).  The
    rate_ratio tracks |du/dt|, which the damped flow never increases.
    frequency_ratios and initial_ratios compare the sup of |psi|_{H^1}
    and |psi|_{H^2} against the corresponding ratio of the initial data,
    mirroring the frequency-localization heuristic for the tank's damping
    functionals.
    """

    horizon: float
    dt: float
    sup_ratios: Dict[float, float]
    invariant_ratios: Dict[float, float]
    rate_ratio: float
    frequency_ratios: Tuple[float, float]
    initial_ratios: Tuple[float, float]
    history: CircleHistory = field(repr=False)


def uniform_bound_experiment(initial: SpectralState, chi_samples,
                             s_values: Sequence[float], horizon: float,
                             dt: float | None = None) -> UniformBoundReport:
    """Evolve far past the damping time and report sup-norm ratios.

    The interesting output is whether the ratios are uniform in the
    horizon: doubling `horizon` should leave every ratio essentially
    unchanged if the damped semigroup is bounded on the Sobolev pair
    scale.
    """
    if dt is None:
        dt = 0.5 / sqrt(initial.n_modes)
    s_values = tuple(float(s) for s in s_values)
    need = set(s_values) | {0.5, 1.5}
    hist = evolve_circle(initial, chi_samples, dt, horizon,
                         s_values=sorted(need))

    sup_ratios = {}
    invariant_ratios = {}
    for s in s_values:
        series = hist.sobolev[s]
        sup_ratios[s] = float(np.max(series) / series[0])
        inv_series = hist.invariant[s]
        invariant_ratios[s] = float(np.max(inv_series) / inv_series[0])
    rate0 = hist.rate_l2[0]
    rate_ratio = float(np.max(hist.rate_l2) / rate0) if rate0 > 0 else 0.0

    # psi-norm sups against the initial l2 size, and the initial-data
    # frequency ratios they are expected to track
    eta0_h, psi0_h = sobolev_norm(initial, 0.5)
    eta0_h32, psi0_h2 = sobolev_norm(initial, 1.5)
    theta0 = multiplier("sqrt_abs_D", initial).psi_hat
    u0 = sqrt(float(np.real(np.vdot(initial.eta_hat, initial.eta_hat))
                    + np.real(np.vdot(theta0, theta0))))
    denom = u0 if u0 > 0 else 1.0
    initial_ratios = ((eta0_h + psi0_h) / denom,
                      (eta0_h32 + psi0_h2) / denom)
    frequency_ratios = (
        float(np.max(hist.sobolev[0.5]) / denom),
        float(np.max(hist.sobolev[1.5]) / denom),
    )
    return UniformBoundReport(horizon, dt, sup_ratios, invariant_ratios,
                              rate_ratio, frequency_ratios, initial_ratios,
                              hist)
