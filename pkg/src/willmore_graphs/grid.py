"""Structured node grid, its dual finite-volume mesh and elementary stencils.

Nodes are indexed ``(i, j)`` with ``0 <= i <= n1`` along x and ``0 <= j <= n2``
along y.  Grid function values are stored as ``values[i, j]``; any flat or
serialized view walks ``j`` in the outer loop and ``i`` in the inner loop.

Every interior node ``(i, j)`` owns the dual cell
``[x_i - h1/2, x_i + h1/2] x [y_j - h2/2, y_j + h2/2]`` whose four sides are
identified by :class:`EdgeId`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, StencilError


@dataclass(frozen=True)
class Grid:
    """Uniform rectangular grid over ``[x_origin, x_origin + l1] x [y_origin, y_origin + l2]``."""

    l1: float
    l2: float
    n1: int
    n2: int
    x_origin: float = 0.0
    y_origin: float = 0.0

    def __post_init__(self):
        if int(self.n1) != self.n1 or int(self.n2) != self.n2:
            raise ContractError("cell counts must be integers")
        if self.n1 < 2 or self.n2 < 2:
            raise ContractError(f"need n1 >= 2 and n2 >= 2, got ({self.n1}, {self.n2})")
        if not (self.l1 > 0 and self.l2 > 0) or not np.isfinite([self.l1, self.l2]).all():
            raise ContractError(f"domain lengths must be positive, got ({self.l1}, {self.l2})")

    @classmethod
    def from_bounds(cls, x_min, x_max, y_min, y_max, n1, n2) -> "Grid":
        return cls(l1=x_max - x_min, l2=y_max - y_min, n1=n1, n2=n2, x_origin=x_min, y_origin=y_min)

    @property
    def h1(self) -> float:
        return self.l1 / self.n1

    @property
    def h2(self) -> float:
        return self.l2 / self.n2

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n1 + 1, self.n2 + 1)

    @property
    def is_square(self) -> bool:
        return self.n1 == self.n2 and self.h1 == self.h2

    def x(self) -> np.ndarray:
        return self.x_origin + self.h1 * np.arange(self.n1 + 1)

    def y(self) -> np.ndarray:
        return self.y_origin + self.h2 * np.arange(self.n2 + 1)

    def node(self, i: int, j: int) -> tuple[float, float]:
        self.check_node(i, j)
        return (self.x_origin + i * self.h1, self.y_origin + j * self.h2)

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray]:
        """Node coordinate arrays ``X[i, j], Y[i, j]``."""
        return np.meshgrid(self.x(), self.y(), indexing="ij")

    def in_closure(self, i: int, j: int) -> bool:
        return 0 <= i <= self.n1 and 0 <= j <= self.n2

    def is_interior(self, i: int, j: int) -> bool:
        return 1 <= i <= self.n1 - 1 and 1 <= j <= self.n2 - 1

    def check_node(self, i: int, j: int):
        if not self.in_closure(i, j):
            raise StencilError(f"node ({i}, {j}) lies outside the grid closure", (i, j))

    def check_interior(self, i: int, j: int):
        if not self.is_interior(i, j):
            raise StencilError(f"node ({i}, {j}) is not an interior node", (i, j))

    def boundary_mask(self) -> np.ndarray:
        mask = np.ones(self.shape, dtype=bool)
        mask[1:-1, 1:-1] = False
        return mask

    def boundary_count(self) -> int:
        return 2 * (self.n1 + 1) + 2 * (self.n2 + 1) - 4

    def zeros(self) -> np.ndarray:
        return np.zeros(self.shape)


@dataclass
class GridFunction:
    """Scalar field sampled at every node of the grid closure."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.shape:
            raise ContractError(f"expected values of shape {self.grid.shape}, got {values.shape}")
        if not np.isfinite(values).all():
            bad = tuple(int(k) for k in np.argwhere(~np.isfinite(values))[0])
            raise ContractError(f"non-finite grid function value at node {bad}")
        self.values = values

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "GridFunction":
        X, Y = grid.meshgrid()
        return cls(grid, np.broadcast_to(fn(X, Y), grid.shape).astype(float))

    def __getitem__(self, ij):
        return self.values[ij]

    def copy(self) -> "GridFunction":
        return GridFunction(self.grid, self.values.copy())


class Direction(enum.Enum):
    EAST = (1, 0)
    NORTH = (0, 1)
    WEST = (-1, 0)
    SOUTH = (0, -1)

    @property
    def normal(self) -> tuple[int, int]:
        return self.value


@dataclass(frozen=True)
class EdgeId:
    """Side of the dual cell of node ``(i, j)`` facing ``direction``."""

    i: int
    j: int
    direction: Direction

    @property
    def neighbor(self) -> tuple[int, int]:
        di, dj = self.direction.value
        return (self.i + di, self.j + dj)


def _vals(u):
    return u.values if isinstance(u, GridFunction) else np.asarray(u)


def _check(values: np.ndarray, i: int, j: int):
    n1, n2 = values.shape[0] - 1, values.shape[1] - 1
    if not (0 <= i <= n1 and 0 <= j <= n2):
        raise StencilError(f"node ({i}, {j}) lies outside the grid closure", (i, j))


def corner_average(u, i: int, j: int, sx: int, sy: int) -> float:
    """Mean of the four nodes spanning the dual-cell corner in quadrant ``(sx, sy)``."""
    if sx not in (-1, 1) or sy not in (-1, 1):
        raise ContractError("corner signs must be +1 or -1")
    v = _vals(u)
    _check(v, i, j)
    _check(v, i + sx, j + sy)
    return 0.25 * (v[i, j] + v[i + sx, j] + v[i, j + sy] + v[i + sx, j + sy])


def edge_gradient(u, e: EdgeId, h1: float | None = None, h2: float | None = None) -> tuple[float, float]:
    """Discrete gradient at the midpoint of edge ``e``.

    The normal component is a two-point difference across the edge, the
    tangential one differences the two corner averages at the edge ends.
    ``h1``/``h2`` are taken from ``u.grid`` when ``u`` is a GridFunction.
    """
    if isinstance(u, GridFunction):
        h1, h2 = u.grid.h1, u.grid.h2
    if h1 is None or h2 is None:
        raise ContractError("space steps are required for raw arrays")
    v = _vals(u)
    i, j = e.i, e.j
    d = e.direction
    try:
        if d is Direction.EAST:
            gx = (v_at(v, i + 1, j) - v_at(v, i, j)) / h1
            gy = (corner_average(v, i, j, 1, 1) - corner_average(v, i, j, 1, -1)) / h2
        elif d is Direction.WEST:
            gx = (v_at(v, i, j) - v_at(v, i - 1, j)) / h1
            gy = (corner_average(v, i, j, -1, 1) - corner_average(v, i, j, -1, -1)) / h2
        elif d is Direction.NORTH:
            gy = (v_at(v, i, j + 1) - v_at(v, i, j)) / h2
            gx = (corner_average(v, i, j, 1, 1) - corner_average(v, i, j, -1, 1)) / h1
        else:
            gy = (v_at(v, i, j) - v_at(v, i, j - 1)) / h2
            gx = (corner_average(v, i, j, 1, -1) - corner_average(v, i, j, -1, -1)) / h1
    except StencilError as exc:
        raise StencilError(
            f"edge {d.name} of node ({i}, {j}) needs node {exc.node} outside the closure; "
            "apply boundary values first",
            exc.node,
        ) from None
    return (float(gx), float(gy))


def v_at(v: np.ndarray, i: int, j: int) -> float:
    _check(v, i, j)
    return v[i, j]


# --- whole-grid edge stencils (vectorized) -----------------------------------
#
# Vertical edges sit between nodes (i, j) and (i+1, j) for 0 <= i < n1 and
# 1 <= j <= n2-1; the returned arrays have shape (n1, n2-1) with entry [i, j-1].
# Horizontal edges sit between (i, j) and (i, j+1) for 1 <= i <= n1-1 and
# 0 <= j < n2; arrays of shape (n1-1, n2) with entry [i-1, j].


def cell_corner_means(v: np.ndarray) -> np.ndarray:
    """``C[i, j]`` = mean of the four nodes of the primal cell ``[i, i+1] x [j, j+1]``."""
    return 0.25 * (v[:-1, :-1] + v[1:, :-1] + v[:-1, 1:] + v[1:, 1:])


def vertical_edge_gradients(v: np.ndarray, h1: float, h2: float):
    c = cell_corner_means(v)
    gx = (v[1:, 1:-1] - v[:-1, 1:-1]) / h1
    gy = (c[:, 1:] - c[:, :-1]) / h2
    return gx, gy


def horizontal_edge_gradients(v: np.ndarray, h1: float, h2: float):
    c = cell_corner_means(v)
    gx = (c[1:, :] - c[:-1, :]) / h1
    gy = (v[1:-1, 1:] - v[1:-1, :-1]) / h2
    return gx, gy
