"""Complementary finite-volume discretization of the anisotropic Willmore flow.

The semidiscrete system evolves the nodal heights ``u`` by

    du/dt = -Q div(E grad w - w^2 / (2 Q^3) grad u) + F,    w = Q H,

where ``H`` is the discrete divergence of ``grad_p gamma`` over the dual cell,
``Q`` the cell average of the four edge area factors and ``E`` the Hessian
of ``gamma`` at the edge gradient.  Boundary nodes are not evolved; their
values come from the boundary condition on every evaluation.

Scalar helpers (``edge_Q``, ``mean_curvature``, ``edge_flux`` ...) evaluate
one stencil at a time and serve as a readable reference for the vectorized
path in :func:`rhs`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _backend
from .anisotropy import Hessian2, SurfaceEnergy
from .errors import ContractError, DivergenceError, StencilError
from .grid import (
    Direction,
    EdgeId,
    Grid,
    GridFunction,
    edge_gradient,
    horizontal_edge_gradients,
    vertical_edge_gradients,
)

# |E_nn| below this at a Neumann edge falls back to copying w
DEGENERATE_HESSIAN = 1e-12


# --- boundary conditions -----------------------------------------------------


@dataclass
class Dirichlet:
    """``u = g1`` and ``w = g2`` on the boundary.

    Each of ``g1``/``g2`` may be a number, a full node array (only boundary
    entries are read), a 1-D array with one entry per boundary node (in
    j-outer, i-inner order), or a callable ``g(X, Y, t)``.
    """

    g1: object = 0.0
    g2: object = 0.0


@dataclass
class NeumannHomogeneous:
    """Zero normal derivative of ``u`` and zero normal flux ``E grad w . n``."""


BoundaryCondition = Dirichlet | NeumannHomogeneous


@dataclass
class FlowProblem:
    """Grid, surface energy, boundary condition and optional forcing ``F(X, Y, t)``."""

    grid: Grid
    energy: SurfaceEnergy
    bc: BoundaryCondition = field(default_factory=Dirichlet)
    forcing: Callable | None = None
    backend: str | None = None
    diagnostics: dict = field(default_factory=lambda: {"neumann_fallback": 0})

    def __post_init__(self):
        if not isinstance(self.energy, SurfaceEnergy):
            raise ContractError("energy must be a SurfaceEnergy")
        if not isinstance(self.bc, (Dirichlet, NeumannHomogeneous)):
            raise ContractError("bc must be Dirichlet or NeumannHomogeneous")
        self.X, self.Y = self.grid.meshgrid()
        self._mask = self.grid.boundary_mask()
        self.kernels = _backend.get(self.backend)

    def boundary_values(self, g, t: float) -> np.ndarray:
        """Values of a Dirichlet datum at the boundary nodes (mask order)."""
        mask = self._mask
        if callable(g):
            vals = np.broadcast_to(g(self.X[mask], self.Y[mask], t), (int(mask.sum()),))
        elif np.ndim(g) == 0:
            vals = np.full(int(mask.sum()), float(g))
        else:
            arr = np.asarray(g, dtype=float)
            if arr.shape == self.grid.shape:
                vals = arr[mask]
            elif arr.shape == (self.grid.boundary_count(),):
                full = np.zeros(self.grid.shape)
                full.T[mask.T] = arr
                vals = full[mask]
            else:
                raise ContractError(
                    f"Dirichlet data has shape {arr.shape}; expected {self.grid.shape} "
                    f"or ({self.grid.boundary_count()},)"
                )
        return np.asarray(vals, dtype=float)


# --- scalar stencils -----------------------------------------------------------


def _arr(u):
    return u.values if isinstance(u, GridFunction) else np.asarray(u, dtype=float)


def _steps(u, grid: Grid | None):
    if isinstance(u, GridFunction):
        return u.grid.h1, u.grid.h2
    if grid is None:
        raise ContractError("a grid is required with raw arrays")
    return grid.h1, grid.h2


def edge_Q(u, e: EdgeId, grid: Grid | None = None) -> float:
    h1, h2 = _steps(u, grid)
    gx, gy = edge_gradient(_arr(u), e, h1, h2)
    return float(np.sqrt(1.0 + gx * gx + gy * gy))


def _interior_edges(i, j):
    return [EdgeId(i, j, d) for d in (Direction.EAST, Direction.NORTH, Direction.WEST, Direction.SOUTH)]


def cell_Q(u, i: int, j: int, grid: Grid | None = None) -> float:
    _check_interior(_arr(u), i, j)
    return 0.25 * sum(edge_Q(u, e, grid) for e in _interior_edges(i, j))


def _check_interior(v, i, j):
    n1, n2 = v.shape[0] - 1, v.shape[1] - 1
    if not (1 <= i <= n1 - 1 and 1 <= j <= n2 - 1):
        raise StencilError(f"node ({i}, {j}) is not an interior node", (i, j))


def mean_curvature(u, energy: SurfaceEnergy, i: int, j: int, grid: Grid | None = None) -> float:
    """Discrete ``div grad_p gamma`` over the dual cell of node ``(i, j)``."""
    v = _arr(u)
    _check_interior(v, i, j)
    h1, h2 = _steps(u, grid)
    pe = energy.grad_p(*edge_gradient(v, EdgeId(i, j, Direction.EAST), h1, h2))
    pw = energy.grad_p(*edge_gradient(v, EdgeId(i, j, Direction.WEST), h1, h2))
    pn = energy.grad_p(*edge_gradient(v, EdgeId(i, j, Direction.NORTH), h1, h2))
    ps = energy.grad_p(*edge_gradient(v, EdgeId(i, j, Direction.SOUTH), h1, h2))
    return float((pe[0] - pw[0]) / h1 + (pn[1] - ps[1]) / h2)


def edge_w(w, e: EdgeId) -> float:
    v = _arr(w)
    a, b = e.neighbor
    if not (0 <= a < v.shape[0] and 0 <= b < v.shape[1]):
        raise StencilError(f"node ({a}, {b}) lies outside the grid closure", (a, b))
    return 0.5 * float(v[e.i, e.j] + v[a, b])


def edge_hessian(u, energy: SurfaceEnergy, e: EdgeId, grid: Grid | None = None) -> Hessian2:
    h1, h2 = _steps(u, grid)
    gx, gy = edge_gradient(_arr(u), e, h1, h2)
    return Hessian2(*(float(x) for x in energy.hessian(gx, gy)))


def edge_flux(u, w, energy: SurfaceEnergy, e: EdgeId, grid: Grid | None = None) -> float:
    """Outward normal component of ``E grad w - w^2/(2Q^3) grad u`` on edge ``e``."""
    h1, h2 = _steps(u, grid)
    gu = edge_gradient(_arr(u), e, h1, h2)
    gw = edge_gradient(_arr(w), e, h1, h2)
    E = energy.hessian(*gu)
    q = np.sqrt(1.0 + gu[0] ** 2 + gu[1] ** 2)
    wm = edge_w(w, e)
    fx = E.e11 * gw[0] + E.e12 * gw[1] - 0.5 * wm * wm / q**3 * gu[0]
    fy = E.e21 * gw[0] + E.e22 * gw[1] - 0.5 * wm * wm / q**3 * gu[1]
    nx, ny = e.direction.normal
    return float(fx * nx + fy * ny)


def rhs_at(u, w, energy: SurfaceEnergy, i: int, j: int, grid: Grid | None = None) -> float:
    """Unforced time derivative at one interior node, edge by edge."""
    h1, h2 = _steps(u, grid)
    total = 0.0
    for e in _interior_edges(i, j):
        length = h2 if e.direction in (Direction.EAST, Direction.WEST) else h1
        total += length * edge_flux(u, w, energy, e, grid)
    return -cell_Q(u, i, j, grid) / (h1 * h2) * total


# --- boundary application ----------------------------------------------------


def apply_u_bc(problem: FlowProblem, u: np.ndarray, t: float) -> np.ndarray:
    """Impose the boundary values of ``u`` in place and return it."""
    bc = problem.bc
    if isinstance(bc, Dirichlet):
        u[problem._mask] = problem.boundary_values(bc.g1, t)
    else:
        u[0, 1:-1] = u[1, 1:-1]
        u[-1, 1:-1] = u[-2, 1:-1]
        u[1:-1, 0] = u[1:-1, 1]
        u[1:-1, -1] = u[1:-1, -2]
        _fill_corners(u)
    return u


def _fill_corners(v: np.ndarray):
    v[0, 0] = 0.5 * (v[1, 0] + v[0, 1])
    v[-1, 0] = 0.5 * (v[-2, 0] + v[-1, 1])
    v[0, -1] = 0.5 * (v[1, -1] + v[0, -2])
    v[-1, -1] = 0.5 * (v[-2, -1] + v[-1, -2])


def _tangential_diff(line: np.ndarray, h: float) -> np.ndarray:
    """Difference along an interior row/column: central inside, one-sided at the ends."""
    d = np.zeros_like(line)
    if line.size >= 2:
        d[1:-1] = (line[2:] - line[:-2]) / (2.0 * h)
        d[0] = (line[1] - line[0]) / h
        d[-1] = (line[-1] - line[-2]) / h
    return d


def apply_w_bc(problem: FlowProblem, u: np.ndarray, w: np.ndarray, t: float) -> np.ndarray:
    """Impose boundary values of ``w`` in place; ``u`` must already carry its own."""
    bc = problem.bc
    if isinstance(bc, Dirichlet):
        w[problem._mask] = problem.boundary_values(bc.g2, t)
        return w
    g = problem.grid
    h1, h2 = g.h1, g.h2
    en = problem.energy
    vx, vy = vertical_edge_gradients(u, h1, h2)
    hx, hy = horizontal_edge_gradients(u, h1, h2)
    fallback = 0

    def solve(inner, tangential, e_nn, e_nt, step, sign):
        nonlocal fallback
        ok = np.abs(e_nn) >= DEGENERATE_HESSIAN
        fallback += int((~ok).sum())
        ratio = np.where(ok, e_nt / np.where(ok, e_nn, 1.0), 0.0)
        return inner + sign * step * ratio * tangential

    # x = x_min and x = x_max: E11 dw/dx + E12 dw/dy = 0
    E = en.hessian(vx[0], vy[0])
    w[0, 1:-1] = solve(w[1, 1:-1], _tangential_diff(w[1, 1:-1], h2), E.e11, E.e12, h1, +1.0)
    E = en.hessian(vx[-1], vy[-1])
    w[-1, 1:-1] = solve(w[-2, 1:-1], _tangential_diff(w[-2, 1:-1], h2), E.e11, E.e12, h1, -1.0)
    # y = y_min and y = y_max: E21 dw/dx + E22 dw/dy = 0
    E = en.hessian(hx[:, 0], hy[:, 0])
    w[1:-1, 0] = solve(w[1:-1, 1], _tangential_diff(w[1:-1, 1], h1), E.e22, E.e21, h2, +1.0)
    E = en.hessian(hx[:, -1], hy[:, -1])
    w[1:-1, -1] = solve(w[1:-1, -2], _tangential_diff(w[1:-1, -2], h1), E.e22, E.e21, h2, -1.0)
    _fill_corners(w)
    problem.diagnostics["neumann_fallback"] += fallback
    return w


def apply_bc(problem: FlowProblem, u, w, t: float = 0.0):
    """Impose boundary values on ``u`` and then on ``w`` (both in place)."""
    uv, wv = _arr(u), _arr(w)
    apply_u_bc(problem, uv, t)
    apply_w_bc(problem, uv, wv, t)


# --- whole-grid evaluation ---------------------------------------------------


def curvature_fields(problem: FlowProblem, u, t: float = 0.0):
    """Return ``(u_bc, w, H, Q)`` as full node arrays.

    ``H`` and ``Q`` are defined on interior nodes; boundary entries of ``Q``
    repeat the nearest interior value and boundary ``H`` is ``w / Q``.
    """
    ub = apply_u_bc(problem, np.array(_arr(u), dtype=float), t)
    g = problem.grid
    Hi, Qi = problem.kernels.curvature(ub, g.h1, g.h2, problem.energy)
    w = np.zeros(g.shape)
    w[1:-1, 1:-1] = Qi * Hi
    apply_w_bc(problem, ub, w, t)
    Q = np.pad(Qi, 1, mode="edge")
    H = w / Q
    H[1:-1, 1:-1] = Hi
    return ub, w, H, Q


def w_field(problem: FlowProblem, u, t: float = 0.0):
    _, w, _, _ = curvature_fields(problem, u, t)
    return GridFunction(problem.grid, w) if isinstance(u, GridFunction) else w


def rhs(problem: FlowProblem, u, t: float = 0.0):
    """Time derivative of every node; boundary entries are zero."""
    g = problem.grid
    ub = apply_u_bc(problem, np.array(_arr(u), dtype=float), t)
    k = problem.kernels
    Hi, Qi = k.curvature(ub, g.h1, g.h2, problem.energy)
    w = np.zeros(g.shape)
    w[1:-1, 1:-1] = Qi * Hi
    apply_w_bc(problem, ub, w, t)
    D = k.flux_divergence(ub, w, g.h1, g.h2, problem.energy)
    du = np.zeros(g.shape)
    du[1:-1, 1:-1] = -Qi * D
    if problem.forcing is not None:
        du[1:-1, 1:-1] += np.broadcast_to(problem.forcing(problem.X, problem.Y, t), g.shape)[1:-1, 1:-1]
    if not np.isfinite(du).all():
        bad = tuple(int(x) for x in np.argwhere(~np.isfinite(du))[0])
        raise DivergenceError(f"non-finite time derivative at node {bad}, t={t}", node=bad, t=t)
    return GridFunction(g, du) if isinstance(u, GridFunction) else du
