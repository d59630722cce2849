"""Forward wave simulation and boundary-data synthesis.

Solves c(x) u_tt = u_xx on [-a, a] x [0, T] with first-order absorbing ends
(u_t -/+ u_x = 0) and a smoothed-Dirac initial velocity, by an implicit
finite-difference scheme (one sparse solve per time step). Also provides the
near-origin data correction, boundary-trace extraction, multiplicative noise
injection, and regularized differentiation of noisy traces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import HorizonTooShort, OffGridObservation, SingularSystem
from .grid import Field2D, Signal, SpaceTimeGrid, d1_apply


@dataclass
class MediumProfile:
    """A sampled dielectric profile c(x) on a uniform spatial partition.

    c equals 1 outside the containment interval and lies in
    [c_lower, c_upper] inside it.
    """

    x: np.ndarray
    c: np.ndarray
    c_lower: float = 1.0
    c_upper: float = 15.0

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.c = np.asarray(self.c, dtype=float)
        if self.x.shape != self.c.shape:
            raise ValueError("x and c must have the same shape")
        if self.c_lower <= 0:
            raise ValueError("c_lower must be positive")
        if np.any(self.c <= 0) or not np.all(np.isfinite(self.c)):
            raise ValueError("c must be positive and finite")

    @classmethod
    def from_callable(cls, fn, x_lo, x_hi, n, c_lower=1.0, c_upper=15.0):
        x = np.linspace(x_lo, x_hi, n + 1)
        return cls(x, np.array([float(fn(xi)) for xi in x]), c_lower, c_upper)

    def sample(self, x_query: np.ndarray) -> np.ndarray:
        """Linear interpolation, extended by the background value 1 outside."""
        return np.interp(x_query, self.x, self.c, left=1.0, right=1.0)


@dataclass
class SourceModel:
    """Smoothed Dirac initial velocity (k/sqrt(2*pi)) * exp(-(k*x)^2 / 2)."""

    k: float = 30.0

    def __post_init__(self):
        if self.k <= 0:
            raise ValueError("k must be positive")

    def evaluate(self, x: np.ndarray) -> np.ndarray:
        return self.k / np.sqrt(2.0 * np.pi) * np.exp(-((self.k * x) ** 2) / 2.0)


@dataclass
class CorrectionBox:
    """Region [0, x_hi] x [0, t_hi] on which the wave is reassigned to 1/2."""

    x_hi: float = 0.0067
    t_hi: float = 0.26

    def __post_init__(self):
        if self.x_hi < 0 or self.t_hi < 0:
            raise ValueError("box bounds must be nonnegative")


def simulate(c: MediumProfile, grid: SpaceTimeGrid, src: SourceModel | None = None) -> Field2D:
    """Implicit finite-difference solution of the absorbing-ends wave problem.

    Time-centered implicit scheme: the Laplacian is averaged over the new and
    old time levels around the standard three-level u_tt difference, which is
    unconditionally stable and non-dissipative, so the wavefront stays sharp
    at the large time steps the data generation uses. Each step is one
    factorized sparse solve. The first step is bootstrapped from the Taylor
    expansion at t=0 (u(.,0)=0, so u^1 = dt * source).
    """
    if src is None:
        src = SourceModel()
    x = grid.x_nodes()
    nx, nt = grid.nx, grid.nt
    dx, dt = grid.dx, grid.dt
    cv = c.sample(x)
    r = 0.5 * dt * dt / (dx * dx)

    rows, cols, vals = [], [], []
    for i in range(1, nx):
        rows += [i, i, i]
        cols += [i - 1, i, i + 1]
        vals += [-r, cv[i] + 2.0 * r, -r]
    # Absorbing rows u_t -/+ u_x = 0 at the ends: second-order backward time
    # difference and second-order one-sided space derivative, all at the new
    # level so the system stays tridiagonal-banded.
    rows += [0, 0, 0]
    cols += [0, 1, 2]
    vals += [3.0 / (2 * dt) + 3.0 / (2 * dx), -4.0 / (2 * dx), 1.0 / (2 * dx)]
    rows += [nx, nx, nx]
    cols += [nx, nx - 1, nx - 2]
    vals += [3.0 / (2 * dt) + 3.0 / (2 * dx), -4.0 / (2 * dx), 1.0 / (2 * dx)]
    A = sp.csc_matrix((vals, (rows, cols)), shape=(nx + 1, nx + 1))
    try:
        lu = spla.splu(A)
    except RuntimeError as exc:
        raise SingularSystem(f"implicit wave step matrix is singular: {exc}") from exc

    u = np.zeros((nx + 1, nt + 1))
    u[:, 1] = dt * src.evaluate(x)
    u[0, 1] = u[nx, 1] = 0.0
    rhs = np.zeros(nx + 1)
    for n in range(1, nt):
        rhs[1:nx] = cv[1:nx] * (2.0 * u[1:nx, n] - u[1:nx, n - 1]) + r * (
            u[0 : nx - 1, n - 1] - 2.0 * u[1:nx, n - 1] + u[2 : nx + 1, n - 1]
        )
        rhs[0] = (4.0 * u[0, n] - u[0, n - 1]) / (2 * dt)
        rhs[nx] = (4.0 * u[nx, n] - u[nx, n - 1]) / (2 * dt)
        sol = lu.solve(rhs)
        if not np.all(np.isfinite(sol)):
            raise SingularSystem("implicit wave step produced non-finite values")
        u[:, n + 1] = sol
    return Field2D(grid, u)


def correct_near_origin(u: Field2D, box: CorrectionBox) -> Field2D:
    """Reassign u = 1/2 on [0, x_hi] x [0, t_hi] to remove the smoothed-source dip."""
    out = u.copy()
    x = u.grid.x_nodes()
    t = u.grid.t_nodes()
    xm = (x >= 0.0) & (x <= box.x_hi)
    tm = t <= box.t_hi
    out.values[np.ix_(xm, tm)] = 0.5
    return out


def extract_boundary(u: Field2D, x_obs: float, horizon: float):
    """Read (g0, g1) at a grid node: the field trace and its one-sided x-derivative."""
    from .transform import BoundaryData

    g = u.grid
    x = g.x_nodes()
    i = int(round((x_obs - g.x_min) / g.dx))
    if i < 0 or i > g.nx or abs(x[i] - x_obs) > 1e-9 * max(1.0, g.dx):
        raise OffGridObservation(f"x_obs={x_obs} is not a node of the grid")
    if horizon > g.t_max + 1e-12:
        raise HorizonTooShort(f"horizon {horizon} exceeds simulated t_max {g.t_max}")
    m = int(round(horizon / g.dt))
    m = min(m, g.nt)
    if i + 2 > g.nx:
        raise OffGridObservation(f"x_obs={x_obs} too close to the right edge for the one-sided stencil")
    v = u.values
    ux = (-3.0 * v[i] + 4.0 * v[i + 1] - v[i + 2]) / (2.0 * g.dx)
    g0 = Signal(0.0, g.dt, u.values[i, : m + 1].copy())
    g1 = Signal(0.0, g.dt, ux[: m + 1].copy())
    return BoundaryData(g0=g0, g1=g1, eps=max(x_obs, 0.0))


def add_noise(g: Signal, delta: float, seed: int) -> Signal:
    """Multiplicative uniform noise g * (1 + delta * r), r ~ U[-1, 1], seeded."""
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    if delta == 0:
        return g.copy()
    rng = np.random.Generator(np.random.Philox(seed))
    r = rng.uniform(-1.0, 1.0, size=g.samples.size)
    return Signal(g.t0, g.dt, g.samples * (1.0 + delta * r))


def tikhonov_differentiate(g: Signal, reg: float) -> Signal:
    """Stable derivative of a noisy trace.

    Returns the minimizer d of ||K d - (g - g(t0))||^2 + reg * ||d'||^2 where
    K is cumulative trapezoidal integration from t0; the normal equations are
    solved as one dense symmetric positive-definite system.
    """
    if reg <= 0:
        raise ValueError("reg must be positive")
    n = g.samples.size
    dt = g.dt
    K = np.zeros((n, n))
    for i in range(1, n):
        K[i, 0] = dt / 2.0
        K[i, 1:i] = dt
        K[i, i] = dt / 2.0
    D = np.zeros((n - 1, n))
    idx = np.arange(n - 1)
    D[idx, idx] = -1.0 / dt
    D[idx, idx + 1] = 1.0 / dt
    y = g.samples - g.samples[0]
    lhs = K.T @ K + reg * (D.T @ D)
    rhs = K.T @ y
    try:
        d = scipy.linalg.solve(lhs, rhs, assume_a="pos")
    except scipy.linalg.LinAlgError as exc:
        raise SingularSystem(f"regularized differentiation solve failed: {exc}") from exc
    if not np.all(np.isfinite(d)):
        raise SingularSystem("regularized differentiation produced non-finite values")
    return Signal(g.t0, dt, d)
