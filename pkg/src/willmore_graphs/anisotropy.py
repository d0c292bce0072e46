"""Anisotropic surface-energy densities for graphs.

Each density is a convex, positively 1-homogeneous function ``gamma(P)`` of a
3-vector; for a graph ``z = u(x, y)`` it is evaluated at ``P = (p1, p2, -1)``
with ``p = grad u``.  All evaluations accept scalars or equally shaped numpy
arrays and are written in closed form.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy.spatial import HalfspaceIntersection

from .errors import ContractError

ISOTROPIC, QUADRATIC, REGULARIZED_ABS = 0, 1, 2


class Hessian2(NamedTuple):
    e11: np.ndarray
    e12: np.ndarray
    e21: np.ndarray
    e22: np.ndarray

    def as_matrix(self) -> np.ndarray:
        return np.array([[self.e11, self.e12], [self.e21, self.e22]], dtype=float)


class SurfaceEnergy:
    """Common interface; concrete subclasses implement the closed forms."""

    kind: int

    def gamma(self, p1, p2):
        return self.gamma_full(p1, p2, -1.0)

    def gamma_full(self, P1, P2, P3):
        raise NotImplementedError

    def grad_p(self, p1, p2):
        raise NotImplementedError

    def hessian(self, p1, p2) -> Hessian2:
        raise NotImplementedError

    def kernel_params(self) -> tuple[int, float, float, float, float]:
        """``(kind, g11, g12, g22, eps)`` for the compiled kernels."""
        raise NotImplementedError


class Isotropic(SurfaceEnergy):
    """Area integrand ``sqrt(1 + |p|^2)``."""

    kind = ISOTROPIC

    def gamma_full(self, P1, P2, P3):
        return np.sqrt(np.square(P1) + np.square(P2) + np.square(P3))

    def grad_p(self, p1, p2):
        q = np.sqrt(1.0 + p1 * p1 + p2 * p2)
        return p1 / q, p2 / q

    def hessian(self, p1, p2):
        q2 = 1.0 + p1 * p1 + p2 * p2
        q = np.sqrt(q2)
        q3 = q * q2
        e12 = -p1 * p2 / q3
        return Hessian2((1.0 + p2 * p2) / q3, e12, e12, (1.0 + p1 * p1) / q3)

    def kernel_params(self):
        return (ISOTROPIC, 1.0, 0.0, 1.0, 0.0)

    def __repr__(self):
        return "Isotropic()"


class QuadraticForm(SurfaceEnergy):
    """``sqrt(P3^2 + p^T G p)`` for a symmetric positive definite 2x2 ``G``."""

    kind = QUADRATIC

    def __init__(self, G):
        G = np.asarray(G, dtype=float)
        if G.shape != (2, 2) or not np.isfinite(G).all():
            raise ContractError("G must be a finite 2x2 matrix")
        if G[0, 1] != G[1, 0]:
            raise ContractError(f"G must be symmetric, got off-diagonals {G[0, 1]} and {G[1, 0]}")
        if np.linalg.eigvalsh(G).min() <= 0:
            raise ContractError("G must be positive definite")
        self.G = G
        self.g11, self.g12, self.g22 = float(G[0, 0]), float(G[0, 1]), float(G[1, 1])

    def _form(self, p1, p2):
        return self.g11 * p1 * p1 + 2.0 * self.g12 * p1 * p2 + self.g22 * p2 * p2

    def gamma_full(self, P1, P2, P3):
        return np.sqrt(np.square(P3) + self._form(P1, P2))

    def grad_p(self, p1, p2):
        g = np.sqrt(1.0 + self._form(p1, p2))
        return (self.g11 * p1 + self.g12 * p2) / g, (self.g12 * p1 + self.g22 * p2) / g

    def hessian(self, p1, p2):
        g2 = 1.0 + self._form(p1, p2)
        g = np.sqrt(g2)
        a1 = self.g11 * p1 + self.g12 * p2
        a2 = self.g12 * p1 + self.g22 * p2
        g3 = g * g2
        e12 = self.g12 / g - a1 * a2 / g3
        return Hessian2(self.g11 / g - a1 * a1 / g3, e12, e12, self.g22 / g - a2 * a2 / g3)

    def kernel_params(self):
        return (QUADRATIC, self.g11, self.g12, self.g22, 0.0)

    def __repr__(self):
        return f"QuadraticForm(G=[[{self.g11}, {self.g12}], [{self.g12}, {self.g22}]])"


class RegularizedAbs(SurfaceEnergy):
    """``sum_i sqrt(P_i^2 + eps |P|^2)``, a smoothed l1 norm of the normal."""

    kind = REGULARIZED_ABS

    def __init__(self, eps_abs: float):
        if not (eps_abs > 0 and math.isfinite(eps_abs)):
            raise ContractError(f"eps_abs must be positive, got {eps_abs}")
        self.eps = float(eps_abs)

    def gamma_full(self, P1, P2, P3):
        s = self.eps * (np.square(P1) + np.square(P2) + np.square(P3))
        return np.sqrt(np.square(P1) + s) + np.sqrt(np.square(P2) + s) + np.sqrt(np.square(P3) + s)

    def _terms(self, p1, p2):
        s = self.eps * (p1 * p1 + p2 * p2 + 1.0)
        return np.sqrt(p1 * p1 + s), np.sqrt(p2 * p2 + s), np.sqrt(1.0 + s)

    def grad_p(self, p1, p2):
        a1, a2, a3 = self._terms(p1, p2)
        inv = 1.0 / a1 + 1.0 / a2 + 1.0 / a3
        return p1 / a1 + self.eps * p1 * inv, p2 / a2 + self.eps * p2 * inv

    def hessian(self, p1, p2):
        eps = self.eps
        a1, a2, a3 = self._terms(p1, p2)
        inv = 1.0 / a1 + 1.0 / a2 + 1.0 / a3
        inv3 = 1.0 / (a1 * a1 * a1) + 1.0 / (a2 * a2 * a2) + 1.0 / (a3 * a3 * a3)
        c1 = 1.0 / (a1 * a1 * a1)
        c2 = 1.0 / (a2 * a2 * a2)
        # d/dp_i of p_i/a_i contributes 1/a_i - (1+eps) p_i^2 / a_i^3
        e11 = eps * inv - eps * eps * p1 * p1 * inv3 + 1.0 / a1 - (1.0 + 2.0 * eps) * p1 * p1 * c1
        e22 = eps * inv - eps * eps * p2 * p2 * inv3 + 1.0 / a2 - (1.0 + 2.0 * eps) * p2 * p2 * c2
        e12 = -eps * eps * p1 * p2 * inv3 - eps * p1 * p2 * (c1 + c2)
        return Hessian2(e11, e12, e12, e22)

    def kernel_params(self):
        return (REGULARIZED_ABS, 0.0, 0.0, 0.0, self.eps)

    def __repr__(self):
        return f"RegularizedAbs(eps_abs={self.eps})"


def gamma(se: SurfaceEnergy, p) -> float:
    return se.gamma(p[0], p[1])


def grad_p(se: SurfaceEnergy, p):
    return se.grad_p(p[0], p[1])


def hessian(se: SurfaceEnergy, p) -> Hessian2:
    return se.hessian(p[0], p[1])


def wulff_boundary(se: SurfaceEnergy, n_samples: int = 360, q3: float = 0.0) -> np.ndarray:
    """Boundary samples of a planar slice of the Wulff shape.

    Directions ``q = (s cos t, s sin t, q3)`` with ``s = sqrt(1 - q3^2)`` and
    ``t_k = 2 pi k / n_samples`` give the half-planes
    ``x . (cos t, sin t) <= gamma(q) / s`` in the plane ``x3 = 0``.  For each
    ``t_k`` the returned point is the support point of the intersection
    polygon in that direction (the midpoint of its edge when the half-plane
    is active).  Returns an ``(n_samples, 3)`` array of ``(theta, x, y)``.
    """
    if n_samples < 8:
        raise ContractError(f"n_samples must be at least 8, got {n_samples}")
    if not -1.0 < q3 < 1.0:
        raise ContractError(f"latitude q3 must lie in (-1, 1), got {q3}")
    theta = 2.0 * np.pi * np.arange(n_samples) / n_samples
    s = math.sqrt(1.0 - q3 * q3)
    c, sn = np.cos(theta), np.sin(theta)
    support = np.asarray(se.gamma_full(s * c, s * sn, q3), dtype=float) / s
    # scipy convention: A x + b <= 0
    halfspaces = np.column_stack([c, sn, -support])
    verts = HalfspaceIntersection(halfspaces, np.zeros(2)).intersections
    proj = verts @ np.vstack([c, sn])
    best = proj.max(axis=0)
    scale = max(1.0, float(np.abs(support).max()))
    pts = np.empty((n_samples, 2))
    for k in range(n_samples):
        on = np.abs(proj[:, k] - best[k]) <= 1e-10 * scale
        face = verts[on]
        if len(face) == 1:
            pts[k] = face[0]
        else:
            # extreme points of the supporting face along its tangent
            t = face @ np.array([-sn[k], c[k]])
            pts[k] = 0.5 * (face[t.argmin()] + face[t.argmax()])
    return np.column_stack([theta, pts])
