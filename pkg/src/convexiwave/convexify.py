"""The weighted strictly-convexifiable objective and its exact discrete gradient.

The objective is the quadrature of the exponentially weighted squared residual
of the nonlocal PDE for q, plus boundary-trace penalties at both ends of the
spatial interval and a discrete-H2 regularization term. The gradient is the
exact derivative of the discretized objective: all stencils are assembled as
sparse matrices once per grid, and the chain rule runs through the stencil
transposes, the nonlocal t=0 row, the weight, and the penalties. Convexity on
the admissible set is probed numerically through Bregman-divergence sampling.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import FloorViolation
from .grid import (
    Field2D,
    Signal,
    SpaceTimeGrid,
    d1_coeffs,
    d2_coeffs,
    h2_norm_sq,
    quad_weights,
    trapezoid_weights,
)
from .transform import DEFAULT_C_UPPER, QField, q_floor_from_c_upper


@dataclass(frozen=True)
class ConvexParams:
    """Weight exponents, regularization weight and descent step size."""

    lam: float = 2.0
    alpha: float = 0.3
    beta: float = 1e-9
    eta_step: float = 0.1

    def __post_init__(self):
        if self.lam < 0 or not np.isfinite(self.lam):
            raise ValueError("lam must be finite and nonnegative")
        if self.alpha <= 0 or not np.isfinite(self.alpha):
            raise ValueError("alpha must be positive and finite")
        if not (0 < self.beta < 1):
            raise ValueError("beta must lie in (0, 1)")
        if self.eta_step <= 0:
            raise ValueError("eta_step must be positive")


class DiscreteOperators:
    """Sparse stencil matrices and quadrature weights for one grid.

    Fields are flattened row-major, index = i * (nt + 1) + j.
    """

    def __init__(self, grid: SpaceTimeGrid):
        self.grid = grid
        P, Q = grid.shape
        self.P, self.Q = P, Q
        Ix = sp.identity(P, format="csr")
        It = sp.identity(Q, format="csr")
        def build(coeffs, size):
            rows, cols, vals = coeffs
            return sp.csr_matrix((vals, (rows, cols)), shape=(size, size))

        self.Gx1d = build(d1_coeffs(grid.nx, grid.dx), P)
        Gt1d = build(d1_coeffs(grid.nt, grid.dt), Q)
        Hx1d = build(d2_coeffs(grid.nx, grid.dx), P)
        Ht1d = build(d2_coeffs(grid.nt, grid.dt), Q)
        self.Dx = sp.kron(self.Gx1d, It, format="csr")
        self.Dt = sp.kron(Ix, Gt1d, format="csr")
        self.Dxx = sp.kron(Hx1d, It, format="csr")
        self.Dtt = sp.kron(Ix, Ht1d, format="csr")
        self.Dxt = (self.Dx @ self.Dt).tocsr()
        self.w2 = quad_weights(grid)          # (P, Q) area quadrature
        self.wt = trapezoid_weights(grid.nt, grid.dt)  # (Q,) time-line quadrature
        self.h2_ops = (None, self.Dx, self.Dt, self.Dxx, self.Dxt, self.Dtt)

    def apply2d(self, op: sp.spmatrix, v: np.ndarray) -> np.ndarray:
        return (op @ v.ravel()).reshape(self.P, self.Q)


_OPS_CACHE: dict[SpaceTimeGrid, DiscreteOperators] = {}


def operators_for(grid: SpaceTimeGrid) -> DiscreteOperators:
    ops = _OPS_CACHE.get(grid)
    if ops is None:
        ops = DiscreteOperators(grid)
        _OPS_CACHE[grid] = ops
    return ops


def carleman_weight(grid: SpaceTimeGrid, lam: float, alpha: float) -> Field2D:
    """W(x, t) = exp(-2 lam (x + alpha t)) at every node."""
    x = grid.x_nodes()[:, None]
    t = grid.t_nodes()[None, :]
    return Field2D(grid, np.exp(-2.0 * lam * (x + alpha * t)))


@dataclass
class ObjectiveContext:
    """Immutable bundle of everything the objective needs besides the iterate."""

    grid: SpaceTimeGrid
    q_eps: np.ndarray
    qx_eps: np.ndarray
    params: ConvexParams
    q_floor: float
    weight: np.ndarray = field(init=False)
    ops: DiscreteOperators = field(init=False)

    def __post_init__(self):
        self.q_eps = np.asarray(self.q_eps, dtype=float)
        self.qx_eps = np.asarray(self.qx_eps, dtype=float)
        Q = self.grid.nt + 1
        if self.q_eps.shape != (Q,) or self.qx_eps.shape != (Q,):
            raise ValueError("boundary traces must be sampled on the grid's t-nodes")
        self.weight = carleman_weight(self.grid, self.params.lam, self.params.alpha).values
        self.ops = operators_for(self.grid)


def make_context(
    grid: SpaceTimeGrid,
    q_eps: Signal | np.ndarray,
    qx_eps: Signal | np.ndarray,
    params: ConvexParams,
    c_upper: float = DEFAULT_C_UPPER,
) -> ObjectiveContext:
    qe = q_eps.samples if isinstance(q_eps, Signal) else np.asarray(q_eps, float)
    qxe = qx_eps.samples if isinstance(qx_eps, Signal) else np.asarray(qx_eps, float)
    return ObjectiveContext(grid, qe, qxe, params, q_floor_from_c_upper(c_upper))


def _check_floor(q: QField, ctx: ObjectiveContext) -> np.ndarray:
    trace = q.initial_trace()
    if np.any(trace < ctx.q_floor - 1e-12):
        raise FloorViolation("iterate's q(x,0) below the admissible floor")
    return trace


def _residual_parts(q: QField, ctx: ObjectiveContext):
    ops = ctx.ops
    v = q.values.values
    r = _check_floor(q, ctx)
    s = ops.Gx1d @ r
    Aq = ops.apply2d(ops.Dxx, v)
    Bq = ops.apply2d(ops.Dxt, v)
    Cq = ops.apply2d(ops.Dt, v)
    a = 1.0 / (2.0 * r**2)
    b = s / (2.0 * r**3)
    F = Aq - a[:, None] * Bq + b[:, None] * Cq
    return r, s, a, b, Aq, Bq, Cq, F


def evaluate_J(q: QField, ctx: ObjectiveContext) -> float:
    """Weighted residual + boundary penalties + H2 regularization."""
    ops = ctx.ops
    v = q.values.values
    _, _, _, _, _, _, _, F = _residual_parts(q, ctx)
    W = ctx.weight
    total = float(np.sum(ops.w2 * W * F**2))
    # boundary penalties: value and x-derivative at x_min, x-derivative at x_max
    qx = ops.apply2d(ops.Dx, v)
    total += float(np.sum(ops.wt * W[0] * (v[0] - ctx.q_eps) ** 2))
    total += float(np.sum(ops.wt * W[0] * (qx[0] - ctx.qx_eps) ** 2))
    total += float(np.sum(ops.wt * W[-1] * qx[-1] ** 2))
    total += ctx.params.beta * h2_norm_sq(q.values)
    return total


def gradient_J(q: QField, ctx: ObjectiveContext) -> Field2D:
    """Exact gradient of the discretized objective with respect to nodal values."""
    ops = ctx.ops
    P, Q = ops.P, ops.Q
    v = q.values.values
    r, s, a, b, _, Bq, Cq, F = _residual_parts(q, ctx)
    W = ctx.weight
    MF = ops.w2 * W * F
    grad = 2.0 * (
        (ops.Dxx.T @ MF.ravel())
        - (ops.Dxt.T @ (a[:, None] * MF).ravel())
        + (ops.Dt.T @ (b[:, None] * MF).ravel())
    ).reshape(P, Q)
    # chain rule through the nonlocal t=0 traces r = q(.,0), s = r_x
    sum_B = np.sum(MF * Bq, axis=1)
    sum_C = np.sum(MF * Cq, axis=1)
    trace_grad = sum_B / r**3 - sum_C * (3.0 * s) / (2.0 * r**4)
    trace_grad = trace_grad + ops.Gx1d.T @ (sum_C / (2.0 * r**3))
    grad[:, 0] += 2.0 * trace_grad
    # boundary penalties
    grad[0] += 2.0 * ops.wt * W[0] * (v[0] - ctx.q_eps)
    qx = ops.apply2d(ops.Dx, v)
    Z = np.zeros((P, Q))
    Z[0] = ops.wt * W[0] * (qx[0] - ctx.qx_eps)
    Z[-1] = ops.wt * W[-1] * qx[-1]
    grad += 2.0 * (ops.Dx.T @ Z.ravel()).reshape(P, Q)
    # H2 regularization
    beta = ctx.params.beta
    grad += 2.0 * beta * ops.w2 * v
    for op in ops.h2_ops[1:]:
        grad += 2.0 * beta * (op.T @ (ops.w2 * ops.apply2d(op, v)).ravel()).reshape(P, Q)
    return Field2D(q.grid, grad)


def bregman_divergence(q: QField, h: Field2D, ctx: ObjectiveContext) -> float:
    """J(q + h) - J(q) - <grad J(q), h>; nonnegativity over a set certifies convexity."""
    qh = QField(q.grid, Field2D(q.grid, q.values.values + h.values), q.q_floor)
    g = gradient_J(q, ctx)
    return evaluate_J(qh, ctx) - evaluate_J(q, ctx) - float(np.sum(g.values * h.values))


# ---------------------------------------------------------------------------
# Convexity probing
# ---------------------------------------------------------------------------

def random_smooth_field(grid: SpaceTimeGrid, rng: np.random.Generator, modes: int = 3) -> Field2D:
    """Low-frequency random trigonometric field with unit-scale coefficients."""
    x = grid.x_nodes()[:, None]
    t = grid.t_nodes()[None, :]
    Lx = grid.x_max - grid.x_min
    Lt = grid.t_max
    vals = np.zeros(grid.shape)
    for k in range(modes):
        for l in range(modes):
            akl = rng.normal()
            bkl = rng.normal()
            phix = np.cos(np.pi * k * (x - grid.x_min) / Lx)
            phit = np.cos(np.pi * l * t / Lt)
            psix = np.sin(np.pi * (k + 1) * (x - grid.x_min) / Lx)
            psit = np.sin(np.pi * (l + 1) * t / Lt)
            vals += akl * phix * phit + bkl * psix * psit
    return Field2D(grid, vals / modes)


def _scaled_to_ball(f: Field2D, radius: float) -> Field2D:
    norm = np.sqrt(h2_norm_sq(f))
    if norm == 0:
        return f
    return Field2D(f.grid, f.values * (radius / norm))


def sample_admissible_pair(
    grid: SpaceTimeGrid,
    rng: np.random.Generator,
    radius: float,
    q_floor: float,
    base: float = 0.5,
) -> tuple[Field2D, Field2D]:
    """A random admissible iterate around the null-scatterer and a perturbation.

    Both q and q + h stay inside the H2-ball of the given radius around the
    constant base field and keep their t=0 rows above the floor.
    """
    margin = 0.02
    headroom = base - q_floor - margin
    if headroom <= 0:
        raise ValueError("floor leaves no admissible headroom around the base")
    out = []
    for _ in range(2):
        f = _scaled_to_ball(random_smooth_field(grid, rng), radius / 2.0 * rng.uniform(0.3, 1.0))
        peak = np.max(np.abs(f.values[:, 0]))
        cap = headroom / 2.0
        if peak > cap:
            f = Field2D(grid, f.values * (cap / peak))
        out.append(f)
    h1, h2 = out
    q_vals = base + h1.values
    return Field2D(grid, q_vals), h2


def convexity_scan(
    grid: SpaceTimeGrid,
    lambdas,
    n_pairs: int,
    radius: float,
    seed: int = 0,
    alpha: float = 0.3,
    beta: float = 1e-9,
    c_upper: float = DEFAULT_C_UPPER,
) -> dict[float, float]:
    """Minimum normalized Bregman divergence over sampled pairs, per weight exponent.

    The boundary data is the null-scatterer's (q_eps = 1/2, qx_eps = 0).
    Strict convexity holds on the set of iterates sharing the prescribed
    boundary data, so the sampled perturbations are masked to vanish to
    second order at the observation boundary (h = h_x = 0 at x = x_min).
    Each divergence is reported relative to the Carleman-weighted L2 norm of
    its perturbation: the raw values scale with the total mass of the weight,
    which shrinks with the exponent and would hide the convexification trend.
    """
    floor = q_floor_from_c_upper(c_upper)
    rng = np.random.Generator(np.random.Philox(seed))
    x = grid.x_nodes()[:, None]
    span = grid.x_max - grid.x_min
    mask = ((x - grid.x_min) / span) ** 2
    base = 0.5
    pairs = []
    for _ in range(n_pairs):
        q_vals, h = sample_admissible_pair(grid, rng, radius, floor, base)
        pairs.append((
            Field2D(grid, base + (q_vals.values - base) * mask),
            Field2D(grid, h.values * mask),
        ))
    q_eps = np.full(grid.nt + 1, base)
    qx_eps = np.zeros(grid.nt + 1)
    qw = quad_weights(grid)
    result: dict[float, float] = {}
    for lam in lambdas:
        params = ConvexParams(lam=float(lam), alpha=alpha, beta=beta)
        ctx = make_context(grid, q_eps, qx_eps, params, c_upper)
        w = carleman_weight(grid, float(lam), alpha)
        w_vals = w.values if hasattr(w, "values") else w
        best = np.inf
        for q_vals, h in pairs:
            q = QField(grid, q_vals, floor)
            d = bregman_divergence(q, h, ctx)
            h_sq = float(np.sum(qw * w_vals * h.values**2))
            best = min(best, d / h_sq)
        result[float(lam)] = float(best)
    return result
