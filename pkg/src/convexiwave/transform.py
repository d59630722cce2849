"""Travel-time change of variables and conversions among u, q and c.

The wave u(x, t) is re-clocked along the wavefront, q(x, t) = u(x, t + tau(x)),
which turns the unknown-coefficient wave equation into a nonlinear nonlocal
PDE for q alone; its t=0 trace recovers c through c = 1 / (16 q(x,0)^4).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import FloorViolation, HorizonTooShort
from .forward import MediumProfile, tikhonov_differentiate
from .grid import Field2D, Signal, SpaceTimeGrid, d1_apply, diff_t, diff_x, diff_xt, diff_xx

DEFAULT_C_UPPER = 15.0


def q_floor_from_c_upper(c_upper: float) -> float:
    """Admissible lower bound on q(x, 0) implied by a known upper bound on c."""
    return 1.0 / (2.0 * c_upper**0.25)


@dataclass
class TravelTime:
    """Cumulative wavefront arrival time tau(x) = integral of sqrt(c) from 0 to x."""

    x: np.ndarray
    tau: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.tau = np.asarray(self.tau, dtype=float)
        if np.any(np.diff(self.tau) <= 0):
            raise ValueError("tau must be strictly increasing")

    def at(self, x_query: np.ndarray) -> np.ndarray:
        return np.interp(x_query, self.x, self.tau)


@dataclass
class QField:
    """q(x, t) on the inversion grid with its admissible initial-trace floor."""

    grid: SpaceTimeGrid
    values: Field2D
    q_floor: float

    def __post_init__(self):
        if self.values.grid != self.grid:
            raise ValueError("field grid does not match")
        if self.q_floor <= 0:
            raise ValueError("q_floor must be positive")
        if np.any(self.values.values[:, 0] < self.q_floor - 1e-12):
            raise FloorViolation(
                f"q(x,0) dips to {self.values.values[:, 0].min():.6g} "
                f"below the floor {self.q_floor:.6g}"
            )

    def initial_trace(self) -> np.ndarray:
        return self.values.values[:, 0]

    def copy(self) -> "QField":
        return QField(self.grid, self.values.copy(), self.q_floor)


@dataclass
class BoundaryData:
    """The measured pair (g0, g1) at the observation point, covering [0, T+eps]."""

    g0: Signal
    g1: Signal
    eps: float = 0.0

    def __post_init__(self):
        if abs(self.g0.t0 - self.g1.t0) > 1e-12 or abs(self.g0.dt - self.g1.dt) > 1e-12:
            raise ValueError("g0 and g1 must share t-sampling")
        if self.g0.samples.size != self.g1.samples.size:
            raise ValueError("g0 and g1 must have the same length")
        if self.eps < 0:
            raise ValueError("eps must be nonnegative")


def travel_time(c: MediumProfile) -> TravelTime:
    """Trapezoidal cumulative quadrature of sqrt(c), anchored so tau(0) = 0."""
    tau = cumulative_trapezoid(np.sqrt(c.c), c.x, initial=0.0)
    tau -= np.interp(0.0, c.x, tau)
    return TravelTime(c.x, tau)


def q_from_u(
    u: Field2D,
    tau: TravelTime,
    grid_q: SpaceTimeGrid,
    c_upper: float = DEFAULT_C_UPPER,
    front_offset: float = 0.1,
) -> QField:
    """Sample q(x, t) = u(x, t + tau(x)) onto the inversion grid.

    Linear interpolation in x (between u's node columns) and in t. The t=0
    row sits exactly on the wavefront jump of u, where the intended value is
    the limit from above; with a smoothed source that limit is reached only
    past the smoothing width, so the t=0 row is sampled at tau(x) +
    ``front_offset`` (default: the smoothing width of the standard source).
    """
    xq = grid_q.x_nodes()
    tq = grid_q.t_nodes()
    tau_q = tau.at(xq)
    if np.max(tq[-1] + tau_q) > u.grid.t_max + 1e-9:
        raise HorizonTooShort(
            f"u covers t <= {u.grid.t_max} but q needs t + tau up to "
            f"{np.max(tq[-1] + tau_q):.6g}"
        )
    xu = u.grid.x_nodes()
    tu = u.grid.t_nodes()
    vals = np.empty((xq.size, tq.size))
    for i, (xi, ti_shift) in enumerate(zip(xq, tau_q)):
        j = np.clip(np.searchsorted(xu, xi) - 1, 0, xu.size - 2)
        w = (xi - xu[j]) / (xu[j + 1] - xu[j])
        col = (1.0 - w) * u.values[j] + w * u.values[j + 1]
        vals[i] = np.interp(tq + ti_shift, tu, col)
        vals[i, 0] = np.interp(min(ti_shift + front_offset, tu[-1]), tu, col)
    floor = q_floor_from_c_upper(c_upper)
    # Sampling near the wavefront can land a hair below the admissible floor;
    # project back, as the descent iteration does.
    np.maximum(vals[:, 0], floor, out=vals[:, 0])
    return QField(grid_q, Field2D(grid_q, vals), floor)


def c_from_q(q: QField, c_lower: float = 0.01, c_upper: float | None = None) -> MediumProfile:
    """Pointwise inverse c(x) = 1 / (16 q(x,0)^4) on the inversion interval."""
    trace = q.initial_trace()
    if np.any(trace < q.q_floor - 1e-12):
        raise FloorViolation("q(x,0) below the admissible floor")
    c = 1.0 / (16.0 * trace**4)
    if c_upper is None:
        c_upper = 1.0 / (16.0 * q.q_floor**4)
    return MediumProfile(q.grid.x_nodes(), c, c_lower=c_lower, c_upper=c_upper)


def residual_F(q: QField) -> Field2D:
    """The nonlinear nonlocal residual whose root characterizes the exact q.

    F(q) = q_xx - q_xt / (2 q(x,0)^2) + q_t q_x(x,0) / (2 q(x,0)^3), with the
    t=0 traces read from the field's initial row.
    """
    trace = q.initial_trace()
    if np.any(trace < q.q_floor - 1e-12):
        raise FloorViolation("q(x,0) below the admissible floor")
    f = q.values
    r = trace[:, None]
    s = d1_apply(trace, q.grid.dx, axis=0)[:, None]
    vals = (
        diff_xx(f).values
        - diff_xt(f).values / (2.0 * r**2)
        + diff_t(f).values * s / (2.0 * r**3)
    )
    return Field2D(q.grid, vals)


def boundary_traces_from_data(
    d: BoundaryData,
    grid: SpaceTimeGrid,
    diff_reg: float = 1e-6,
    g0_deriv: Signal | None = None,
) -> tuple[Signal, Signal]:
    """Boundary traces for the q-system, resampled to the inversion t-nodes.

    q(eps, t) = g0(t + eps) and q_x(eps, t) = g1(t + eps) + g0'(t + eps);
    g0' comes from regularized differentiation unless supplied.
    """
    t_needed = grid.t_max + d.eps
    if d.g0.t_end + 1e-9 < t_needed:
        raise HorizonTooShort(
            f"data ends at t={d.g0.t_end} but traces need t up to {t_needed:.6g}"
        )
    if g0_deriv is None:
        g0_deriv = tikhonov_differentiate(d.g0, diff_reg)
    tq = grid.t_nodes() + d.eps
    g0_vals = np.interp(tq, d.g0.times(), d.g0.samples)
    g1_vals = np.interp(tq, d.g1.times(), d.g1.samples)
    dg0_vals = np.interp(tq, g0_deriv.times(), g0_deriv.samples)
    q_eps = Signal(0.0, grid.dt, g0_vals)
    qx_eps = Signal(0.0, grid.dt, g1_vals + dg0_vals)
    return q_eps, qx_eps
