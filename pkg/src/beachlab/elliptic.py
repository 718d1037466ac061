"""Potential boundary-value problem on the sigma-mapped tank.

The Laplace problem (Dirichlet data psi on the free surface, Neumann bottom
and walls) is discretized through its Dirichlet energy on the mapped
rectangle,

    E(phi) = 1/2 int int [ H phi_x^2 - 2 s H_x phi_x phi_s
                           + (1 + s^2 H_x^2)/H phi_s^2 ] ds dx,

with H = h + eta.  First-derivative operators are composed with diagonal
coefficient/quadrature weights, so the assembled operator is symmetric
positive semidefinite by construction, the surface-flux functional is exactly
self-adjoint, and the net discrete flux of any state is exactly zero.  The
x-derivative is the 4th-order five-point stencil closed by even reflection at
the walls (the natural closure when eta_x and psi_x vanish there); the
s-derivative lives on cell midlevels at 2nd order, which sets the overall
convergence rate.

The time loop solves with matrix-free conjugate gradients preconditioned by
the exact inverse of the flat-tank (eta = 0) operator, applied spectrally
(cosine transform in x, tridiagonal sweeps in s); an assembled sparse direct
solve is kept as an independent path for cross-validation and fallback.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.fft import dct

from .core import (
    SimGrid,
    TankGeometry,
    cosine_coeffs,
    cosine_synthesis,
    dct_derivative,
    ensure_finite,
    trap_weights,
    trapezoid_1d,
)
from .errors import DegenerateDepth, SolverFailure

__all__ = [
    "SurfaceState",
    "PotentialField",
    "TraceSet",
    "PotentialSolver",
    "solve_potential",
    "compute_traces",
    "flat_dtn",
]


@dataclass
class SurfaceState:
    """Free-surface elevation eta and surface potential psi on x nodes."""

    eta: np.ndarray
    psi: np.ndarray

    def __post_init__(self):
        self.eta = np.asarray(self.eta, dtype=float)
        self.psi = np.asarray(self.psi, dtype=float)

    def validate(self, geo: TankGeometry, grid: SimGrid) -> None:
        """Check the state invariants: finiteness, zero mean, depth bound."""
        ensure_finite("eta", self.eta)
        ensure_finite("psi", self.psi)
        if self.eta.shape != (grid.nx + 1,) or self.psi.shape != (grid.nx + 1,):
            raise ValueError("state arrays must live on the full x node set")
        scale = np.abs(self.eta).max()
        mean = trapezoid_1d(self.eta, grid.dx)
        if scale > 0 and abs(mean) > 1e-10 * geo.L * scale:
            raise ValueError(f"eta mean {mean:.3g} violates the zero-mean gauge")
        if self.eta.min() < -0.5 * geo.h:
            raise ValueError("eta drops below -h/2")


@dataclass
class PotentialField:
    """Interior potential and its derivatives on the mapped grid.

    phi, phix, phiy are true-coordinate quantities; phixs and phis are the
    mapped partial derivatives (at fixed s / at fixed x) from which they are
    reconstructed.  solve_residual is the final relative residual of the
    linear solve.
    """

    phi: np.ndarray
    phix: np.ndarray
    phiy: np.ndarray
    phixs: np.ndarray
    phis: np.ndarray
    solve_residual: float


@dataclass
class TraceSet:
    """Surface traces of the solved potential.

    Gpsi is the nodewise trace combination B - eta_x V; Gpsi_flux is the
    variationally consistent surface flux of the same solve (the form whose
    quadratic energy the dynamics conserves).  They agree to discretization
    accuracy.
    """

    Gpsi: np.ndarray
    V: np.ndarray
    B: np.ndarray
    Npsi: np.ndarray
    Vbar: np.ndarray
    Gpsi_flux: np.ndarray


def _fd_row(offsets: np.ndarray, dx: float) -> np.ndarray:
    """First-derivative weights on the given integer offsets (Fornberg-style
    via the Vandermonde system; exact for polynomials up to len(offsets)-1)."""
    n = len(offsets)
    m = np.vander(offsets.astype(float), n, increasing=True).T
    rhs = np.zeros(n)
    rhs[1] = 1.0
    return np.linalg.solve(m, rhs) / dx


@lru_cache(maxsize=8)
def _grid_ops(nx: int, ny: int, dx: float, ds: float):
    """Grid-level sparse operators, cached per discretization.

    Dx: 4th-order first derivative on x nodes, closed by even reflection.
    Ds_node: 4th-order first derivative in s on nodes (for traces/fields).
    """
    m = nx
    rows, cols, vals = [], [], []
    c = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / (12.0 * dx)
    offs = np.array([-2, -1, 0, 1, 2])
    for i in range(m + 1):
        for o, w in zip(offs, c):
            if w == 0.0:
                continue
            j = i + o
            if j < 0:
                j = -j
            elif j > m:
                j = 2 * m - j
            rows.append(i)
            cols.append(j)
            vals.append(w)
    dx_sp = sp.csr_matrix((vals, (rows, cols)), shape=(m + 1, m + 1))
    dx_sp.sum_duplicates()

    npts = 5 if ny >= 4 else ny + 1
    ds_node = np.zeros((ny + 1, ny + 1))
    for j in range(ny + 1):
        lo = min(max(j - npts // 2, 0), ny + 1 - npts)
        offsets = np.arange(lo, lo + npts) - j
        ds_node[j, lo : lo + npts] = _fd_row(offsets, ds)

    wx = trap_weights(nx + 1)
    return dx_sp, sp.csr_matrix(dx_sp.T), ds_node, wx


def _coefficients(geo: TankGeometry, grid: SimGrid, eta: np.ndarray, etax: np.ndarray):
    """Mapped-Dirichlet-energy coefficients at (x node, s midcell)."""
    depth = geo.h + eta
    if depth.min() <= 0.25 * geo.h:
        raise DegenerateDepth(
            f"min water column {depth.min():.3g} <= h/4 = {0.25 * geo.h:.3g}"
        )
    smid = 0.5 * (grid.s[1:] + grid.s[:-1])
    h_col = depth[:, None]
    ex_col = etax[:, None]
    c11 = np.broadcast_to(h_col, (grid.nx + 1, grid.ny)).copy()
    c12 = -smid[None, :] * ex_col
    c22 = (1.0 + smid[None, :] ** 2 * ex_col**2) / h_col
    _, _, _, wx = _grid_ops(grid.nx, grid.ny, grid.dx, grid.ds)
    w2 = wx[:, None] * grid.dx * grid.ds
    return w2 * c11, w2 * c12, w2 * c22


class _FormApplier:
    """Matrix-free application of the symmetric mapped-Laplacian form."""

    def __init__(self, geo: TankGeometry, grid: SimGrid, eta: np.ndarray, etax: np.ndarray):
        self.grid = grid
        self.q11, self.q12, self.q22 = _coefficients(geo, grid, eta, etax)
        self.dx_sp, self.dxT_sp, _, self.wx = _grid_ops(
            grid.nx, grid.ny, grid.dx, grid.ds
        )
        self.ds = grid.ds

    def __call__(self, phi: np.ndarray) -> np.ndarray:
        ds = self.ds
        dphi = self.dx_sp @ phi
        u = 0.5 * (dphi[:, 1:] + dphi[:, :-1])
        v = (phi[:, 1:] - phi[:, :-1]) / ds
        p = self.q11 * u + self.q12 * v
        q = self.q12 * u + self.q22 * v
        # adjoint of the s midcell average, then adjoint of Dx
        pa = np.zeros_like(phi)
        pa[:, :-1] += 0.5 * p
        pa[:, 1:] += 0.5 * p
        out = self.dxT_sp @ pa
        # adjoint of the s midcell difference
        out[:, :-1] -= q / ds
        out[:, 1:] += q / ds
        return out


def _assemble_sparse(geo: TankGeometry, grid: SimGrid, eta: np.ndarray, etax: np.ndarray):
    """Assembled sparse operator, identical to the matrix-free form."""
    q11, q12, q22 = _coefficients(geo, grid, eta, etax)
    dx_sp, _, _, _ = _grid_ops(grid.nx, grid.ny, grid.dx, grid.ds)
    ny = grid.ny
    avg = sp.diags_array(
        [np.full(ny, 0.5), np.full(ny, 0.5)], offsets=[0, 1], shape=(ny, ny + 1)
    )
    dif = sp.diags_array(
        [np.full(ny, -1.0 / grid.ds), np.full(ny, 1.0 / grid.ds)],
        offsets=[0, 1],
        shape=(ny, ny + 1),
    )
    ix = sp.eye_array(grid.nx + 1)
    exm = sp.kron(dx_sp, avg, format="csr")
    esm = sp.kron(ix, dif, format="csr")
    d11 = sp.diags_array(q11.ravel())
    d12 = sp.diags_array(q12.ravel())
    d22 = sp.diags_array(q22.ravel())
    a = exm.T @ d11 @ exm + exm.T @ d12 @ esm + esm.T @ d12 @ exm + esm.T @ d22 @ esm
    return a.tocsr()


def _interior_mask(grid: SimGrid) -> np.ndarray:
    mask = np.ones((grid.nx + 1, grid.ny + 1), dtype=bool)
    mask[:, -1] = False
    return mask.ravel()


def _cosine_projection(r: np.ndarray) -> np.ndarray:
    """Unweighted projections sum_i cos(n pi i/m) r_i along axis 0."""
    x = dct(r, type=1, axis=0)
    ends = r[:1] + np.where(np.arange(r.shape[0]) % 2 == 0, 1.0, -1.0)[:, None] * r[-1:]
    return 0.5 * (x + ends)


class _FlatStripInverse:
    """Exact inverse of the flat-tank interior operator.

    The x-part of the flat form has the grid cosines as generalized
    eigenvectors (4th-order symbol squared against the trapezoid mass),
    so one cosine transform per application reduces the solve to a
    family of tridiagonal systems in s, factorized here once.  The
    n = 0 and Nyquist columns keep only the vertical part, which the
    surface Dirichlet condition keeps invertible.
    """

    def __init__(self, geo: TankGeometry, grid: SimGrid):
        nx, ny, dx, ds = grid.nx, grid.ny, grid.dx, grid.ds
        self.shape_2d = (nx + 1, ny)
        th = np.pi * np.arange(nx + 1) / nx
        ktil = (8.0 * np.sin(th) - np.sin(2.0 * th)) / (6.0 * dx)
        lam = ktil**2
        dw = np.full(nx + 1, nx / 2.0)
        dw[0] = dw[-1] = float(nx)

        # s-node tridiagonals of avg^T avg and dif^T dif, surface column dropped
        a_main = np.full(ny, 0.5)
        a_main[0] = 0.25
        a_off = np.full(ny - 1, 0.25)
        d_main = np.full(ny, 2.0) / ds**2
        d_main[0] = 1.0 / ds**2
        d_off = np.full(ny - 1, -1.0) / ds**2

        scale = (dx * ds) * dw[:, None]
        main = scale * (geo.h * lam[:, None] * a_main[None, :] + d_main[None, :] / geo.h)
        off = scale * (geo.h * lam[:, None] * a_off[None, :] + d_off[None, :] / geo.h)

        denom = np.empty_like(main)
        low = np.empty_like(off)
        denom[:, 0] = main[:, 0]
        for j in range(1, ny):
            low[:, j - 1] = off[:, j - 1] / denom[:, j - 1]
            denom[:, j] = main[:, j] - low[:, j - 1] * off[:, j - 1]
        self._off = off
        self._low = low
        self._denom = denom

    def solve(self, r: np.ndarray) -> np.ndarray:
        nxp, ny = self.shape_2d
        rhat = _cosine_projection(np.asarray(r, dtype=float).reshape(self.shape_2d))
        y = np.empty_like(rhat)
        y[:, 0] = rhat[:, 0]
        for j in range(1, ny):
            y[:, j] = rhat[:, j] - self._low[:, j - 1] * y[:, j - 1]
        u = np.empty_like(y)
        u[:, -1] = y[:, -1] / self._denom[:, -1]
        for j in range(ny - 2, -1, -1):
            u[:, j] = (y[:, j] - self._off[:, j] * u[:, j + 1]) / self._denom[:, j]
        return _cosine_projection(u).ravel()


class PotentialSolver:
    """Reusable solver for one (geometry, grid) pair.

    Holds the factorized flat-tank preconditioner and the previous solution
    for warm starts.  Not meant to be shared between threads; build one per
    worker.
    """

    def __init__(self, geo: TankGeometry, grid: SimGrid):
        self.geo = geo
        self.grid = grid
        self.mask = _interior_mask(grid)
        flat = _FlatStripInverse(geo, grid)
        n_i = int(self.mask.sum())
        self.preconditioner = spla.LinearOperator(
            (n_i, n_i), matvec=flat.solve, dtype=np.float64
        )
        self.warm: np.ndarray | None = None

    def solve(self, state: SurfaceState, method: str = "auto") -> PotentialField:
        geo, grid = self.geo, self.grid
        eta = ensure_finite("eta", state.eta)
        psi = ensure_finite("psi", state.psi)
        etax = dct_derivative(eta, geo.L)
        apply_full = _FormApplier(geo, grid, eta, etax)

        shape = (grid.nx + 1, grid.ny + 1)
        lift = np.zeros(shape)
        lift[:, -1] = psi
        b = -apply_full(lift).ravel()[self.mask]

        def apply_interior(vec: np.ndarray) -> np.ndarray:
            full = np.zeros(shape)
            full.ravel()[self.mask] = vec
            return apply_full(full).ravel()[self.mask]

        n_i = int(self.mask.sum())
        sol = None
        if method in ("auto", "pcg"):
            op = spla.LinearOperator((n_i, n_i), matvec=apply_interior, dtype=np.float64)
            x0 = self.warm if self.warm is not None and self.warm.size == n_i else None
            vec, info = spla.cg(
                op, b, x0=x0, M=self.preconditioner, rtol=1e-13, atol=0.0, maxiter=200
            )
            if info == 0:
                sol = vec
            elif method == "pcg":
                raise SolverFailure(f"PCG did not converge (info={info})")
        if sol is None:
            a = _assemble_sparse(geo, grid, eta, etax)
            a_ii = a[self.mask][:, self.mask].tocsc()
            try:
                lu = spla.splu(a_ii)
            except RuntimeError as exc:
                raise SolverFailure(f"direct factorization failed: {exc}")
            sol = lu.solve(b)
            if not np.all(np.isfinite(sol)):
                raise SolverFailure("direct solve returned non-finite values")
        self.warm = sol.copy()

        phi = np.zeros(shape)
        phi.ravel()[self.mask] = sol
        phi[:, -1] = psi
        bnorm = float(np.linalg.norm(b))
        res = float(np.linalg.norm(apply_interior(sol) - b))
        rel = res / bnorm if bnorm > 0 else res
        return _build_field(geo, grid, eta, etax, phi, rel)


def _build_field(geo, grid, eta, etax, phi, rel_residual) -> PotentialField:
    dx_sp, _, ds_node, _ = _grid_ops(grid.nx, grid.ny, grid.dx, grid.ds)
    depth = geo.h + eta
    phixs = dx_sp @ phi
    phis = phi @ ds_node.T
    phiy = phis / depth[:, None]
    phix = phixs - grid.s[None, :] * etax[:, None] * phiy
    return PotentialField(
        phi=phi, phix=phix, phiy=phiy, phixs=phixs, phis=phis, solve_residual=rel_residual
    )


def solve_potential(
    geo: TankGeometry, grid: SimGrid, state: SurfaceState, method: str = "auto"
) -> PotentialField:
    """One-off solve; reuse a PotentialSolver in loops instead."""
    if method == "direct":
        eta = ensure_finite("eta", state.eta)
        etax = dct_derivative(eta, geo.L)
        mask = _interior_mask(grid)
        shape = (grid.nx + 1, grid.ny + 1)
        lift = np.zeros(shape)
        lift[:, -1] = state.psi
        a = _assemble_sparse(geo, grid, eta, etax)
        b = -(a @ lift.ravel())[mask]
        a_ii = a[mask][:, mask].tocsc()
        try:
            lu = spla.splu(a_ii)
        except RuntimeError as exc:
            raise SolverFailure(f"direct factorization failed: {exc}")
        sol = lu.solve(b)
        if not np.all(np.isfinite(sol)):
            raise SolverFailure("direct solve returned non-finite values")
        phi = np.zeros(shape)
        phi.ravel()[mask] = sol
        phi[:, -1] = state.psi
        res = float(np.linalg.norm((a @ phi.ravel())[mask]))
        bn = float(np.linalg.norm(b))
        rel = res / bn if bn > 0 else res
        return _build_field(geo, grid, eta, etax, phi, rel)
    return PotentialSolver(geo, grid).solve(state, method=method)


def compute_traces(
    field: PotentialField, state: SurfaceState, geo: TankGeometry, grid: SimGrid
) -> TraceSet:
    """Surface traces, the quadratic surface term, and the depth-integrated
    horizontal velocity of a solved potential."""
    eta = state.eta
    etax = dct_derivative(eta, geo.L)
    depth = geo.h + eta

    v = field.phix[:, -1]
    b = field.phiy[:, -1]
    gpsi = b - etax * v
    npsi = 0.5 * v**2 - 0.5 * b**2 + etax * v * b

    integrand = field.phixs * depth[:, None] - grid.s[None, :] * etax[:, None] * field.phis
    ws = trap_weights(grid.ny + 1)
    vbar = grid.ds * (integrand @ ws)

    apply_full = _FormApplier(geo, grid, eta, etax)
    _, _, _, wx = _grid_ops(grid.nx, grid.ny, grid.dx, grid.ds)
    flux = apply_full(field.phi)[:, -1] / (wx * grid.dx)

    return TraceSet(Gpsi=gpsi, V=v, B=b, Npsi=npsi, Vbar=vbar, Gpsi_flux=flux)


def flat_dtn(psi: np.ndarray, geo: TankGeometry) -> np.ndarray:
    """Flat-surface Dirichlet-to-Neumann map: cosine multiplier k tanh(k h)."""
    psi = np.asarray(psi, dtype=float)
    n = np.arange(psi.shape[-1])
    k = n * np.pi / geo.L
    mult = k * np.tanh(k * geo.h)
    return cosine_synthesis(cosine_coeffs(psi) * mult)
