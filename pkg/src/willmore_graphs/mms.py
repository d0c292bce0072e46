"""Manufactured solution, its forcing term, space-time error norms and EOC."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import BarycentricInterpolator

from .anisotropy import SurfaceEnergy
from .errors import ContractError


@dataclass(frozen=True)
class ZetaParams:
    """``zeta = cos(pi t) r^-2n (x^n - r^n)(y^n - r^n) exp(-sigma (x^2 + y^2))`` on ``[-r, r]^2``."""

    r: float = 4.0
    n: int = 2
    sigma: float = 1.0

    def __post_init__(self):
        if not self.r > 0:
            raise ContractError(f"r must be positive, got {self.r}")
        if int(self.n) != self.n or self.n <= 0 or self.n % 2:
            raise ContractError(f"n must be a positive even integer, got {self.n}")
        if not self.sigma > 0:
            raise ContractError(f"sigma must be positive, got {self.sigma}")


@dataclass(frozen=True)
class ErrorRecord:
    h: float
    err_l1: float
    err_l2: float
    err_linf: float


def _profile(p: ZetaParams, x):
    """1-D factor ``f(x) = (x^n - r^n) exp(-sigma x^2)`` and its first two derivatives."""
    n, r, s = p.n, p.r, p.sigma
    x = np.asarray(x, dtype=float)
    e = np.exp(-s * x * x)
    a = x**n - r**n
    da = n * x ** (n - 1)
    dda = n * (n - 1) * x ** (n - 2) if n >= 2 else np.zeros_like(x)
    f = a * e
    df = (da - 2.0 * s * x * a) * e
    ddf = (dda - 4.0 * s * x * da - 2.0 * s * a + 4.0 * s * s * x * x * a) * e
    return f, df, ddf


def _spatial(p: ZetaParams, x, y):
    fx, dfx, ddfx = _profile(p, x)
    fy, dfy, ddfy = _profile(p, y)
    c = 1.0 / p.r ** (2 * p.n)
    return (
        c * fx * fy,
        c * dfx * fy,
        c * fx * dfy,
        c * ddfx * fy,
        c * dfx * dfy,
        c * fx * ddfy,
    )


def zeta(p: ZetaParams, x, y, t):
    return math.cos(math.pi * t) * _spatial(p, x, y)[0]


def zeta_dt(p: ZetaParams, x, y, t):
    return -math.pi * math.sin(math.pi * t) * _spatial(p, x, y)[0]


def zeta_derivatives(p: ZetaParams, x, y, t):
    """``(zeta, z_x, z_y, z_xx, z_xy, z_yy)`` in closed form."""
    c = math.cos(math.pi * t)
    return tuple(c * d for d in _spatial(p, x, y))


def w_exact(energy: SurfaceEnergy, p: ZetaParams, x, y, t):
    """``Q H_gamma`` of the manufactured surface, via ``H = sum E_ij d_i d_j zeta``."""
    _, zx, zy, zxx, zxy, zyy = zeta_derivatives(p, x, y, t)
    E = energy.hessian(zx, zy)
    q = np.sqrt(1.0 + zx * zx + zy * zy)
    return q * (E.e11 * zxx + (E.e12 + E.e21) * zxy + E.e22 * zyy)


def _flux(energy, p, x, y, t, delta):
    w = lambda a, b: w_exact(energy, p, a, b, t)  # noqa: E731
    wx = (w(x + delta, y) - w(x - delta, y)) / (2.0 * delta)
    wy = (w(x, y + delta) - w(x, y - delta)) / (2.0 * delta)
    _, zx, zy, zxx, zxy, zyy = zeta_derivatives(p, x, y, t)
    E = energy.hessian(zx, zy)
    q2 = 1.0 + zx * zx + zy * zy
    q = np.sqrt(q2)
    wc = q * (E.e11 * zxx + (E.e12 + E.e21) * zxy + E.e22 * zyy)
    c = 0.5 * wc * wc / (q * q2)
    return E.e11 * wx + E.e12 * wy - c * zx, E.e21 * wx + E.e22 * wy - c * zy


def forcing(energy: SurfaceEnergy, p: ZetaParams, x, y, t, delta: float):
    """Forcing that makes ``zeta`` an exact solution of the forced flow.

    ``Q(zeta) div(flux(zeta)) + d zeta/dt``, with the gradient of ``w`` and the
    outer divergence taken by central differences of step ``delta``.
    """
    if not delta > 0:
        raise ContractError(f"delta must be positive, got {delta}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    fxp, _ = _flux(energy, p, x + delta, y, t, delta)
    fxm, _ = _flux(energy, p, x - delta, y, t, delta)
    _, fyp = _flux(energy, p, x, y + delta, t, delta)
    _, fym = _flux(energy, p, x, y - delta, t, delta)
    div = (fxp - fxm + fyp - fym) / (2.0 * delta)
    _, zx, zy, *_ = zeta_derivatives(p, x, y, t)
    q = np.sqrt(1.0 + zx * zx + zy * zy)
    return q * div + zeta_dt(p, x, y, t)


class TimeInterpolatedForcing:
    """Forcing on a fixed node set, interpolated in time from Chebyshev samples.

    The manufactured forcing is analytic in ``t``; sampling it at ``n_nodes``
    Chebyshev points of ``[t0, t1]`` and evaluating the barycentric
    interpolant avoids recomputing the nested differences at every stage.
    Callable as ``F(X, Y, t)`` for the ``X, Y`` it was built on.
    """

    def __init__(self, energy, p: ZetaParams, X, Y, t0: float, t1: float, delta: float, n_nodes: int = 12):
        if not t1 > t0:
            raise ContractError("need t1 > t0")
        self.X, self.Y = X, Y
        self.t0, self.t1 = t0, t1
        k = np.arange(n_nodes)
        nodes = 0.5 * (t0 + t1) + 0.5 * (t1 - t0) * np.cos(np.pi * (2 * k + 1) / (2 * n_nodes))
        samples = np.stack([forcing(energy, p, X, Y, tk, delta).ravel() for tk in nodes])
        self._shape = np.shape(X)
        self._interp = BarycentricInterpolator(nodes, samples)

    def __call__(self, X, Y, t):
        if np.shape(X) != self._shape:
            raise ContractError("forcing was tabulated on a different node set")
        return self._interp(t).reshape(self._shape)


def spacetime_norms(snapshots, p: ZetaParams, grid, tau: float | None = None, exact=None):
    """Discrete ``L1``, ``L2`` and max norms of ``u - zeta`` over nodes and time levels.

    ``snapshots`` is a sequence of ``(t_k, u_k)`` with ``t_k = t_0 + k tau``.
    ``exact(X, Y, t)`` replaces ``zeta`` as the reference when given.
    """
    if len(snapshots) < 2:
        raise ContractError("need at least two time levels")
    times = np.array([s[0] for s in snapshots], dtype=float)
    steps = np.diff(times)
    if tau is None:
        tau = float(steps[0])
    if not tau > 0 or not np.allclose(steps, tau, rtol=1e-9, atol=1e-14):
        raise ContractError("snapshots must be uniformly spaced by tau")
    X, Y = grid.meshgrid()
    ref = exact if exact is not None else (lambda a, b, t: zeta(p, a, b, t))
    cell = grid.h1 * grid.h2
    l1 = l2 = linf = 0.0
    for t, u in snapshots:
        err = np.abs(np.asarray(u, dtype=float) - ref(X, Y, t))
        l1 += tau * cell * float(err.sum())
        l2 += tau * cell * float((err * err).sum())
        linf = max(linf, float(err.max()))
    return l1, math.sqrt(l2), linf


def eoc(err1: float, err2: float, h1: float, h2: float) -> float:
    """Experimental order of convergence between two mesh levels."""
    if min(err1, err2, h1, h2) <= 0:
        raise ContractError("errors and mesh sizes must be positive")
    if h1 == h2:
        raise ContractError("mesh sizes must differ")
    return math.log(err1 / err2) / math.log(h1 / h2)
