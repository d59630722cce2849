"""Uniform space-time grids, sampled fields, finite-difference stencils, norms.

Everything downstream (wave simulation, the weighted objective, the
quasi-reversibility solves) shares the stencils and quadrature defined here:
second-order central differences with second-order one-sided closures at the
boundaries, and tensor-product trapezoidal quadrature.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class SpaceTimeGrid:
    """Uniform discretization of [x_min, x_max] x [0, t_max].

    ``nx`` and ``nt`` count intervals; node (i, j) sits at
    (x_min + i*dx, j*dt).
    """

    x_min: float
    x_max: float
    t_max: float
    nx: int
    nt: int

    def __post_init__(self):
        if self.nx < 2 or self.nt < 2:
            raise ValueError("need nx >= 2 and nt >= 2")
        if not (self.x_max > self.x_min):
            raise ValueError("x_max must exceed x_min")
        if not (self.t_max > 0):
            raise ValueError("t_max must be positive")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.nx

    @property
    def dt(self) -> float:
        return self.t_max / self.nt

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx + 1, self.nt + 1)

    def x_nodes(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.nx + 1)

    def t_nodes(self) -> np.ndarray:
        return self.dt * np.arange(self.nt + 1)


@dataclass
class Field2D:
    """A real scalar field sampled on a SpaceTimeGrid, values[i, j] = f(x_i, t_j)."""

    grid: SpaceTimeGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"values shape {self.values.shape} does not match grid {self.grid.shape}"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field contains non-finite values")

    @classmethod
    def zeros(cls, grid: SpaceTimeGrid) -> "Field2D":
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def from_function(cls, grid: SpaceTimeGrid, fn) -> "Field2D":
        x = grid.x_nodes()[:, None]
        t = grid.t_nodes()[None, :]
        return cls(grid, np.broadcast_to(fn(x, t), grid.shape).astype(float).copy())

    def copy(self) -> "Field2D":
        return Field2D(self.grid, self.values.copy())


@dataclass
class Signal:
    """A uniformly sampled scalar time series starting at t0."""

    t0: float
    dt: float
    samples: np.ndarray

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=float)
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.samples.size == 0:
            raise ValueError("samples must be non-empty")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("signal contains non-finite values")

    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(self.samples.size)

    @property
    def t_end(self) -> float:
        return self.t0 + self.dt * (self.samples.size - 1)

    def copy(self) -> "Signal":
        return Signal(self.t0, self.dt, self.samples.copy())


# ---------------------------------------------------------------------------
# 1D stencils (applied along a chosen axis of the node array)
# ---------------------------------------------------------------------------

def d1_apply(v: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Second-order first derivative: central interior, one-sided at the ends."""
    v = np.moveaxis(v, axis, 0)
    out = np.empty_like(v)
    out[1:-1] = (v[2:] - v[:-2]) / (2.0 * h)
    out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
    out[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * h)
    return np.moveaxis(out, 0, axis)


def d2_apply(v: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Second-order second derivative: central interior, one-sided at the ends."""
    v = np.moveaxis(v, axis, 0)
    out = np.empty_like(v)
    h2 = h * h
    out[1:-1] = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / h2
    if v.shape[0] >= 4:
        out[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h2
        out[-1] = (2.0 * v[-1] - 5.0 * v[-2] + 4.0 * v[-3] - v[-4]) / h2
    else:
        # only three nodes: the central stencil is the best available closure
        out[0] = (v[0] - 2.0 * v[1] + v[2]) / h2
        out[-1] = (v[-1] - 2.0 * v[-2] + v[-3]) / h2
    return np.moveaxis(out, 0, axis)


def d1_coeffs(n: int, h: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(rows, cols, vals) triplets of the (n+1)x(n+1) first-derivative matrix."""
    rows, cols, vals = [], [], []
    for i in range(1, n):
        rows += [i, i]
        cols += [i - 1, i + 1]
        vals += [-1.0 / (2 * h), 1.0 / (2 * h)]
    rows += [0, 0, 0]
    cols += [0, 1, 2]
    vals += [-3.0 / (2 * h), 4.0 / (2 * h), -1.0 / (2 * h)]
    rows += [n, n, n]
    cols += [n, n - 1, n - 2]
    vals += [3.0 / (2 * h), -4.0 / (2 * h), 1.0 / (2 * h)]
    return np.array(rows), np.array(cols), np.array(vals)


def d2_coeffs(n: int, h: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(rows, cols, vals) triplets of the (n+1)x(n+1) second-derivative matrix."""
    h2 = h * h
    rows, cols, vals = [], [], []
    for i in range(1, n):
        rows += [i, i, i]
        cols += [i - 1, i, i + 1]
        vals += [1.0 / h2, -2.0 / h2, 1.0 / h2]
    if n + 1 >= 4:
        rows += [0, 0, 0, 0]
        cols += [0, 1, 2, 3]
        vals += [2.0 / h2, -5.0 / h2, 4.0 / h2, -1.0 / h2]
        rows += [n, n, n, n]
        cols += [n, n - 1, n - 2, n - 3]
        vals += [2.0 / h2, -5.0 / h2, 4.0 / h2, -1.0 / h2]
    else:
        rows += [0, 0, 0]
        cols += [0, 1, 2]
        vals += [1.0 / h2, -2.0 / h2, 1.0 / h2]
        rows += [n, n, n]
        cols += [n, n - 1, n - 2]
        vals += [1.0 / h2, -2.0 / h2, 1.0 / h2]
    return np.array(rows), np.array(cols), np.array(vals)


# ---------------------------------------------------------------------------
# Field operations
# ---------------------------------------------------------------------------

def diff_x(f: Field2D) -> Field2D:
    return Field2D(f.grid, d1_apply(f.values, f.grid.dx, axis=0))


def diff_t(f: Field2D) -> Field2D:
    return Field2D(f.grid, d1_apply(f.values, f.grid.dt, axis=1))


def diff_xx(f: Field2D) -> Field2D:
    return Field2D(f.grid, d2_apply(f.values, f.grid.dx, axis=0))


def diff_tt(f: Field2D) -> Field2D:
    return Field2D(f.grid, d2_apply(f.values, f.grid.dt, axis=1))


def diff_xt(f: Field2D) -> Field2D:
    """Mixed derivative as the composition of the two first-derivative stencils."""
    return diff_x(diff_t(f))


def trapezoid_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n + 1, h)
    w[0] = w[-1] = h / 2.0
    return w


def quad_weights(grid: SpaceTimeGrid) -> np.ndarray:
    """Tensor-product trapezoidal weights, shape (nx+1, nt+1)."""
    wx = trapezoid_weights(grid.nx, grid.dx)
    wt = trapezoid_weights(grid.nt, grid.dt)
    return wx[:, None] * wt[None, :]


def integrate(f: Field2D) -> float:
    return float(np.sum(quad_weights(f.grid) * f.values))


H2_DERIVATIVES = (diff_x, diff_t, diff_xx, diff_xt, diff_tt)


def h2_norm_sq(f: Field2D) -> float:
    """Discrete squared H2 norm: integral of f^2 plus all derivatives up to order 2."""
    total = integrate(Field2D(f.grid, f.values**2))
    for op in H2_DERIVATIVES:
        g = op(f)
        total += integrate(Field2D(f.grid, g.values**2))
    return total


# ---------------------------------------------------------------------------
# CSV serialization
# ---------------------------------------------------------------------------

def field_to_csv(f: Field2D) -> str:
    g = f.grid
    buf = io.StringIO()
    buf.write(f"# grid {g.x_min!r} {g.x_max!r} {g.t_max!r} {g.nx} {g.nt}\n")
    np.savetxt(buf, f.values, delimiter=",", fmt="%.17g")
    return buf.getvalue()


def field_from_csv(text: str) -> Field2D:
    lines = text.strip().splitlines()
    header = lines[0]
    if not header.startswith("# grid"):
        raise ValueError("missing '# grid' header line")
    parts = header.split()
    x_min, x_max, t_max = (float(p) for p in parts[2:5])
    nx, nt = int(parts[5]), int(parts[6])
    grid = SpaceTimeGrid(x_min, x_max, t_max, nx, nt)
    values = np.loadtxt(io.StringIO("\n".join(lines[1:])), delimiter=",")
    return Field2D(grid, values.reshape(grid.shape))


def signal_to_csv(s: Signal) -> str:
    buf = io.StringIO()
    buf.write("t,value\n")
    for t, v in zip(s.times(), s.samples):
        buf.write(f"{float(t)!r},{float(v)!r}\n")
    return buf.getvalue()


def signal_from_csv(text: str) -> Signal:
    lines = [ln for ln in text.strip().splitlines() if ln and not ln.startswith("#")]
    if lines and lines[0].lower().startswith("t,"):
        lines = lines[1:]
    data = np.loadtxt(io.StringIO("\n".join(lines)), delimiter=",")
    data = np.atleast_2d(data)
    t, v = data[:, 0], data[:, 1]
    if t.size < 2:
        raise ValueError("signal CSV needs at least two samples")
    dt = float(t[1] - t[0])
    return Signal(float(t[0]), dt, v)
