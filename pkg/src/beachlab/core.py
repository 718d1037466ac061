"""Shared numerical substrate: tank geometry, sigma-coordinate grids,
trapezoid quadrature, and cosine/sine spectral derivatives.

Conventions used throughout the package:

* horizontal nodes x_i = i*L/nx, i = 0..nx, including both walls;
* vertical sigma nodes s_j = j/ny, s=0 the flat bottom, s=1 the free surface;
* 2D arrays are indexed [i, j] = (x node, s node), shape (nx+1, ny+1);
* grid functions live in the cosine basis implied by the Neumann walls, so
  spectral derivatives of even data are sine series vanishing at the walls.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.fft import dct, dst

from .errors import BadInterval, DegenerateDepth, NonFiniteField, NonzeroMean

__all__ = [
    "TankGeometry",
    "SimGrid",
    "trap_weights",
    "trapezoid_1d",
    "volume_integral",
    "cosine_coeffs",
    "cosine_synthesis",
    "sine_coeffs",
    "sine_synthesis",
    "dct_derivative",
    "dct_antiderivative_meanzero",
    "smooth_cutoff",
    "ensure_finite",
]


@dataclass(frozen=True)
class TankGeometry:
    """Rectangular tank: length L, rest depth h, gravitational acceleration g."""

    L: float
    h: float
    g: float

    def __post_init__(self):
        if self.L <= 0 or self.h <= 0 or self.g <= 0:
            raise ValueError(
                f"tank geometry must be positive, got L={self.L}, h={self.h}, g={self.g}"
            )


@dataclass(frozen=True)
class SimGrid:
    """Uniform tensor grid on [0, L] x [0, 1] in mapped coordinates.

    nx is the horizontal cell count (nx+1 nodes, walls included); ny the
    vertical layer count (ny+1 sigma levels, bottom s=0 and surface s=1
    included).
    """

    geo: TankGeometry
    nx: int
    ny: int
    dx: float = field(init=False)
    ds: float = field(init=False)
    x: np.ndarray = field(init=False, repr=False, compare=False)
    s: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.nx < 8:
            raise ValueError(f"nx must be >= 8, got {self.nx}")
        if self.ny < 4:
            raise ValueError(f"ny must be >= 4, got {self.ny}")
        object.__setattr__(self, "dx", self.geo.L / self.nx)
        object.__setattr__(self, "ds", 1.0 / self.ny)
        object.__setattr__(self, "x", np.linspace(0.0, self.geo.L, self.nx + 1))
        object.__setattr__(self, "s", np.linspace(0.0, 1.0, self.ny + 1))


def ensure_finite(name: str, values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise NonFiniteField(f"{name} contains non-finite entries")
    return values


def trap_weights(n_nodes: int) -> np.ndarray:
    """Composite-trapezoid node weights (1/2 at the two ends, 1 inside)."""
    w = np.ones(n_nodes)
    w[0] = 0.5
    w[-1] = 0.5
    return w


def trapezoid_1d(f: np.ndarray, dx: float) -> float:
    """Composite trapezoid of nodal samples with uniform spacing dx."""
    f = np.asarray(f, dtype=float)
    return float(dx * (0.5 * (f[0] + f[-1]) + f[1:-1].sum()))


def volume_integral(f: np.ndarray, eta: np.ndarray, geo: TankGeometry, grid: SimGrid) -> float:
    """Integral of f over the fluid domain via the sigma map.

    f is sampled on the mapped rectangle, shape (nx+1, ny+1); the Jacobian of
    y = -h + s*(h + eta(x)) contributes a factor (h + eta(x)).
    """
    f = np.asarray(f, dtype=float)
    eta = np.asarray(eta, dtype=float)
    depth = geo.h + eta
    if depth.min() <= 0.25 * geo.h:
        raise DegenerateDepth(
            f"min water column {depth.min():.3g} <= h/4 = {0.25 * geo.h:.3g}"
        )
    wx = trap_weights(grid.nx + 1)
    ws = trap_weights(grid.ny + 1)
    column = f @ ws  # s-quadrature per x node
    return float(grid.dx * grid.ds * np.dot(wx * depth, column))


# ---------------------------------------------------------------------------
# Cosine/sine transforms on the wall-reflected grid.
#
# A grid function f_i, i = 0..nx, is identified with the cosine series
# f(x) = sum_n c_n cos(n pi x / L).  Its spectral derivative is the sine
# series -sum_n c_n (n pi / L) sin(n pi x / L); the top mode n = nx is
# invisible to the derivative on this node set and is dropped.
# ---------------------------------------------------------------------------


def cosine_coeffs(f: np.ndarray) -> np.ndarray:
    """Coefficients c_n, n = 0..nx, of the interpolating cosine series."""
    f = np.asarray(f, dtype=float)
    m = f.shape[-1] - 1
    c = dct(f, type=1, axis=-1)
    c = c / m
    c[..., 0] *= 0.5
    c[..., -1] *= 0.5
    return c


def cosine_synthesis(c: np.ndarray) -> np.ndarray:
    """Nodal values of sum_n c_n cos(n pi x_i / L); inverse of cosine_coeffs."""
    c = np.asarray(c, dtype=float)
    u = 0.5 * c
    u[..., 0] = c[..., 0]
    u[..., -1] = c[..., -1]
    return dct(u, type=1, axis=-1)


def sine_coeffs(f_interior: np.ndarray) -> np.ndarray:
    """Coefficients b_n, n = 1..nx-1, of the interior sine interpolant."""
    f_interior = np.asarray(f_interior, dtype=float)
    m = f_interior.shape[-1] + 1
    return dst(f_interior, type=1, axis=-1) / m


def sine_synthesis(b: np.ndarray) -> np.ndarray:
    """Interior nodal values of sum_n b_n sin(n pi x_i / L)."""
    b = np.asarray(b, dtype=float)
    return 0.5 * dst(b, type=1, axis=-1)


def dct_derivative(f: np.ndarray, length: float) -> np.ndarray:
    """Spectral d/dx of even (Neumann-wall) data; vanishes at both walls."""
    f = np.asarray(f, dtype=float)
    m = f.shape[-1] - 1
    c = cosine_coeffs(f)
    n = np.arange(1, m)
    b = -c[..., 1:m] * (n * np.pi / length)
    out = np.zeros_like(f)
    out[..., 1:m] = sine_synthesis(b)
    return out


def dct_antiderivative_meanzero(f: np.ndarray, length: float) -> np.ndarray:
    """Mean-zero primitive of odd (wall-vanishing) data.

    The input is represented as an interior sine series; its primitive is the
    cosine series with zero mean.  A nonzero wall value means the input holds
    constant or even content with no Neumann-compatible primitive (for the
    damping pressure gradient it signals a nonzero net surface flux), and
    raises NonzeroMean.
    """
    f = np.asarray(f, dtype=float)
    scale = np.abs(f).max()
    if scale > 0.0:
        wall = max(abs(float(f[0])), abs(float(f[-1])))
        if wall > 1e-10 * scale:
            raise NonzeroMean(
                f"wall values up to {wall:.3g} (relative {wall / scale:.3g}) admit no "
                "mean-zero Neumann-compatible primitive"
            )
    m = f.shape[-1] - 1
    b = sine_coeffs(f[..., 1:m])
    n = np.arange(1, m)
    q = np.zeros(f.shape[:-1] + (m + 1,))
    q[..., 1:m] = -b * (length / (n * np.pi))
    return cosine_synthesis(q)


def dct_cumulative_integral(f: np.ndarray, length: float) -> np.ndarray:
    """Integral from the left wall of cosine-represented (Neumann-wall) data.

    Exact on the interpolating series: the constant mode integrates to a
    linear ramp and each cos(n pi x / L) mode to (L / (n pi)) sin(n pi x / L).
    The top mode's primitive vanishes at every node.  For mean-zero input the
    result vanishes at both walls.
    """
    f = np.asarray(f, dtype=float)
    m = f.shape[-1] - 1
    c = cosine_coeffs(f)
    n = np.arange(1, m)
    b = c[..., 1:m] * (length / (n * np.pi))
    out = np.zeros_like(f)
    out[..., 1:m] = sine_synthesis(b)
    x = np.linspace(0.0, length, m + 1)
    return out + c[..., :1] * x


def _blend(t: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for t <= 0, 1 for t >= 1, exp(-1/t) based blend."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = (t > 0.0) & (t < 1.0)
    ti = t[inside]
    with np.errstate(over="ignore"):
        a = np.exp(-1.0 / ti)
        b = np.exp(-1.0 / (1.0 - ti))
    out[inside] = a / (a + b)
    out[t >= 1.0] = 1.0
    return out


def smooth_cutoff(x, x0: float, x1: float) -> np.ndarray:
    """Monotone C-infinity cutoff: 0 for x <= x0, 1 for x >= x1.

    `x` may be a SimGrid (its horizontal nodes are used) or an array of
    positions.  Symmetric construction: chi(x0+t) + chi(x1-t) = 1.
    """
    if x1 <= x0:
        raise BadInterval(f"need x0 < x1, got [{x0}, {x1}]")
    nodes = x.x if isinstance(x, SimGrid) else np.asarray(x, dtype=float)
    return _blend((nodes - x0) / (x1 - x0))
