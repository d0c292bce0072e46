"""Doubled-index grid functions, discrete scalar products and energy monitoring.

Nodal fields on a square ``N x N`` grid are lifted to the ``(2N+1)^2`` lattice
that also carries edge midpoints and cell centres.  On that lattice the
finite-volume scheme reads as a finite-difference scheme, and summation by
parts can be checked exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .anisotropy import SurfaceEnergy
from .errors import ContractError
from .grid import Grid, GridFunction
from .spatial import apply_u_bc


@dataclass(frozen=True)
class DoubledField:
    """Values ``U[k, l]`` for ``k, l = 0..2N`` on a square grid of step ``h``.

    Entries may be NaN where a derived difference is undefined; a product
    that touches such an entry comes out NaN.
    """

    values: np.ndarray
    h: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] % 2 != 1 or v.shape[0] < 3:
            raise ContractError(f"doubled field needs shape (2N+1, 2N+1), got {v.shape}")
        if not self.h > 0:
            raise ContractError(f"h must be positive, got {self.h}")
        object.__setattr__(self, "values", v)

    @property
    def N(self) -> int:
        return (self.values.shape[0] - 1) // 2

    @classmethod
    def from_nodal(cls, u, h: float | None = None) -> "DoubledField":
        """Lift nodal values: even-even entries copy, the rest average two nodes.

        Edge midpoints average their two endpoints; a cell centre averages the
        diagonal pair ``(i, j)`` and ``(i+1, j+1)``.
        """
        if isinstance(u, GridFunction):
            g = u.grid
            if not _square(g):
                raise ContractError("doubled fields need a square grid with h1 == h2")
            h, u = g.h1, u.values
        if h is None:
            raise ContractError("h is required with raw arrays")
        u = np.asarray(u, dtype=float)
        if u.ndim != 2 or u.shape[0] != u.shape[1]:
            raise ContractError(f"nodal field must be square, got {u.shape}")
        n = u.shape[0] - 1
        U = np.empty((2 * n + 1, 2 * n + 1))
        U[::2, ::2] = u
        U[1::2, ::2] = 0.5 * (u[:-1, :] + u[1:, :])
        U[::2, 1::2] = 0.5 * (u[:, :-1] + u[:, 1:])
        U[1::2, 1::2] = 0.5 * (u[:-1, :-1] + u[1:, 1:])
        return cls(U, float(h))

    def nodal(self) -> np.ndarray:
        return self.values[::2, ::2].copy()


def _square(g: Grid) -> bool:
    return g.n1 == g.n2 and np.isclose(g.h1, g.h2, rtol=1e-12, atol=0.0)


def _same(F: DoubledField, G: DoubledField):
    if F.values.shape != G.values.shape or F.h != G.h:
        raise ContractError("fields live on different doubled grids")


def bracket(F: DoubledField, G: DoubledField, p: int, q: int, P: int, Q: int) -> float:
    """``(h^2/4) sum_{k=p..P, l=q..Q} F[k,l] G[k,l]``."""
    _same(F, G)
    top = 2 * F.N
    if p > P or q > Q:
        raise ContractError(f"inverted bounds [{p}, {P}] x [{q}, {Q}]")
    if min(p, q) < 0 or max(P, Q) > top:
        raise ContractError(f"bounds outside 0..{top}")
    block = F.values[p : P + 1, q : Q + 1] * G.values[p : P + 1, q : Q + 1]
    return 0.25 * F.h * F.h * float(block.sum())


# --- differences on the doubled lattice ---------------------------------------
# a lattice step is h/2, hence the factor 2/h


def _shifted(U: DoubledField, axis: int, forward: bool) -> DoubledField:
    v = U.values
    d = np.full_like(v, np.nan)
    s = 2.0 / U.h
    lo = [slice(None)] * 2
    hi = [slice(None)] * 2
    lo[axis], hi[axis] = slice(None, -1), slice(1, None)
    if forward:
        d[tuple(lo)] = s * (v[tuple(hi)] - v[tuple(lo)])
    else:
        d[tuple(hi)] = s * (v[tuple(hi)] - v[tuple(lo)])
    return DoubledField(d, U.h)


def forward_x(U):
    return _shifted(U, 0, True)


def backward_x(U):
    return _shifted(U, 0, False)


def forward_y(U):
    return _shifted(U, 1, True)


def backward_y(U):
    return _shifted(U, 1, False)


def central_x(U):
    return DoubledField(0.5 * (forward_x(U).values + backward_x(U).values), U.h)


def central_y(U):
    return DoubledField(0.5 * (forward_y(U).values + backward_y(U).values), U.h)


def gradient(U: DoubledField):
    """``(U_c., U_.c)`` everywhere, one-sided on the outer lattice lines."""
    gx, gy = central_x(U).values, central_y(U).values
    gx[0, :] = forward_x(U).values[0, :]
    gx[-1, :] = backward_x(U).values[-1, :]
    gy[:, 0] = forward_y(U).values[:, 0]
    gy[:, -1] = backward_y(U).values[:, -1]
    return DoubledField(gx, U.h), DoubledField(gy, U.h)


# --- scalar products ------------------------------------------------------------


def h_product(F: DoubledField, G: DoubledField) -> float:
    top = 2 * F.N - 1
    return bracket(F, G, 1, 1, top, top)


def c_product_x(F: DoubledField, G: DoubledField) -> float:
    """Average of the forward and backward pairings of ``F`` with ``dG/dx``.

    Each pairing alone already approximates the full integral, so the two
    are averaged rather than added.
    """
    n2 = 2 * F.N
    return 0.5 * (bracket(F, forward_x(G), 0, 1, n2 - 1, n2 - 1) + bracket(F, backward_x(G), 1, 1, n2, n2 - 1))


def c_product_y(F: DoubledField, G: DoubledField) -> float:
    n2 = 2 * F.N
    return 0.5 * (bracket(F, forward_y(G), 1, 0, n2 - 1, n2 - 1) + bracket(F, backward_y(G), 1, 1, n2 - 1, n2))


def c_product_grad(F1: DoubledField, F2: DoubledField, G: DoubledField) -> float:
    """``(F, grad G)_c`` for the vector field ``F = (F1, F2)``."""
    return c_product_x(F1, G) + c_product_y(F2, G)


def products_h_and_c(F: DoubledField, G: DoubledField):
    """``((F, G)_h, (F, G_c.)_c, (F, G_.c)_c)``."""
    _same(F, G)
    return h_product(F, G), c_product_x(F, G), c_product_y(F, G)


# --- summation by parts ------------------------------------------------------------


def _boundary_x(U: DoubledField, V: DoubledField) -> float:
    u, v, n2 = U.values, V.values, 2 * U.N
    l = slice(1, n2)
    s = ((u[n2 - 1, l] + u[n2, l]) * v[n2, l] - (u[0, l] + u[1, l]) * v[0, l]).sum()
    return 0.25 * U.h * float(s)


def _boundary_y(U: DoubledField, V: DoubledField) -> float:
    u, v, n2 = U.values, V.values, 2 * U.N
    k = slice(1, n2)
    s = ((u[k, n2 - 1] + u[k, n2]) * v[k, n2] - (u[k, 0] + u[k, 1]) * v[k, 0]).sum()
    return 0.25 * U.h * float(s)


def lemma_residual(u, v, h: float | None = None) -> float:
    """Largest mismatch of the per-direction discrete Green identities.

    ``(U_c., V)_h = -(U, V_c.)_c + (h/4) sum_l [(U_{2N-1,l} + U_{2N,l}) V_{2N,l} - (U_{0l} + U_{1l}) V_{0l}]``
    and its counterpart in ``y``.
    """
    U = DoubledField.from_nodal(u, h)
    V = DoubledField.from_nodal(v, U.h)
    rx = h_product(central_x(U), V) - (-c_product_x(U, V) + _boundary_x(U, V))
    ry = h_product(central_y(U), V) - (-c_product_y(U, V) + _boundary_y(U, V))
    return max(abs(rx), abs(ry))


def zero_green_residual(u, v, h: float | None = None, p=None) -> float:
    """``|(div(p grad u), v)_h + (p grad u, grad v)_c|`` for ``v`` zero on the boundary."""
    U = DoubledField.from_nodal(u, h)
    V = DoubledField.from_nodal(v, U.h)
    P = np.ones_like(U.values) if p is None else DoubledField.from_nodal(p, U.h).values
    gx, gy = gradient(U)
    F1 = DoubledField(P * gx.values, U.h)
    F2 = DoubledField(P * gy.values, U.h)
    div = DoubledField(central_x(F1).values + central_y(F2).values, U.h)
    return abs(h_product(div, V) + c_product_grad(F1, F2, V))


def green_residual(u, v, h: float | None = None) -> float:
    """Residual of the discrete Green formula for nodal ``u`` and ``v``.

    When ``v`` vanishes on the boundary the flux form with unit coefficient
    is checked; otherwise the identity with its explicit boundary sums.
    """
    vv = v.values if isinstance(v, GridFunction) else np.asarray(v, dtype=float)
    edge = np.concatenate([vv[0], vv[-1], vv[:, 0], vv[:, -1]])
    if np.all(edge == 0.0):
        return zero_green_residual(u, v, h)
    return lemma_residual(u, v, h)


# --- energy and dissipation ------------------------------------------------------


def willmore_energy(u: GridFunction, energy: SurfaceEnergy, backend: str | None = None) -> float:
    """``sum_interior H^2 Q h1 h2`` for a field whose boundary values are set.

    This is the unhalved functional; the continuous Willmore energy carries an
    extra factor 1/2.
    """
    if not isinstance(u, GridFunction):
        raise ContractError("willmore_energy expects a GridFunction")
    g = u.grid
    H, Q = _backend.get(backend).curvature(u.values, g.h1, g.h2, energy)
    return float((H * H * Q).sum()) * g.h1 * g.h2


def _interior(a, shape):
    a = np.asarray(a, dtype=float)
    if a.shape == shape:
        return a[1:-1, 1:-1]
    if a.shape == (shape[0] - 2, shape[1] - 2):
        return a
    raise ContractError(f"field of shape {a.shape} does not match grid {shape}")


def dissipation_step(u_prev, u_next, dt: float, Q_field, grid: Grid | None = None) -> float:
    """``sum_interior ((u_next - u_prev)/dt)^2 / Q h1 h2``."""
    if not dt > 0:
        raise ContractError(f"dt must be positive, got {dt}")
    if isinstance(u_next, GridFunction):
        grid = u_next.grid
    if grid is None:
        raise ContractError("a grid is required with raw arrays")
    a = u_prev.values if isinstance(u_prev, GridFunction) else np.asarray(u_prev, dtype=float)
    b = u_next.values if isinstance(u_next, GridFunction) else np.asarray(u_next, dtype=float)
    if a.shape != grid.shape or b.shape != grid.shape:
        raise ContractError("u_prev and u_next must match the grid")
    q = _interior(Q_field, grid.shape)
    if np.any(q <= 0):
        raise ContractError("Q must be positive")
    ut = (b[1:-1, 1:-1] - a[1:-1, 1:-1]) / dt
    return float((ut * ut / q).sum()) * grid.h1 * grid.h2


@dataclass(frozen=True)
class EnergyReport:
    t: float
    willmore: float
    dissipation: float
    drift: float


@dataclass
class EnergyMonitor:
    """Integrator observer recording the discrete energy at accepted steps.

    A step counts as an increase when the energy grows by more than
    ``slack_factor * tolerance * dt``; ``increases`` holds
    ``(step, t, growth)`` with ``step`` counting accepted steps from 1.
    """

    problem: object
    tolerance: float
    slack_factor: float = 10.0
    reports: list = field(default_factory=list)
    increases: list = field(default_factory=list)

    def __post_init__(self):
        self._prev = None
        self._e0 = None
        self.steps = 0

    def _state(self, u, t):
        g = self.problem.grid
        ub = np.array(u.values if isinstance(u, GridFunction) else u, dtype=float)
        apply_u_bc(self.problem, ub, t)
        H, Q = self.problem.kernels.curvature(ub, g.h1, g.h2, self.problem.energy)
        return ub, float((H * H * Q).sum()) * g.h1 * g.h2, Q

    def start(self, t: float, u) -> EnergyReport:
        ub, e, _ = self._state(u, t)
        self._prev, self._e0 = (t, ub, e), e
        rep = EnergyReport(t, e, 0.0, 0.0)
        self.reports.append(rep)
        return rep

    def __call__(self, t, u, outcome=None):
        if self._prev is None:
            raise ContractError("call start() with the initial state first")
        ub, e, Q = self._state(u, t)
        self.steps += 1
        t0, u0, e0 = self._prev
        dt = t - t0
        diss = dissipation_step(u0, ub, dt, Q, self.problem.grid) if dt > 0 else 0.0
        if e - e0 > self.slack_factor * self.tolerance * dt:
            self.increases.append((self.steps, t, e - e0))
        rep = EnergyReport(t, e, diss, max(0.0, e - self._e0))
        self.reports.append(rep)
        self._prev = (t, ub, e)
        return rep
