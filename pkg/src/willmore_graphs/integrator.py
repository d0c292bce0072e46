"""Runge-Kutta-Merson time stepping with embedded error control."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ContractError, DivergenceError, StepFailure

MAX_GROWTH = 2.0
MAX_SHRINK = 0.1


@dataclass(frozen=True)
class StepperConfig:
    """Controller settings.  ``tolerance=inf`` selects fixed-step mode."""

    tolerance: float = 1e-7
    dt_init: float = 1e-6
    dt_min: float = 1e-15
    dt_max: float = 1.0
    safety: float = 0.8

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ContractError(f"tolerance must be positive, got {self.tolerance}")
        if not (0 < self.dt_min <= self.dt_init <= self.dt_max):
            raise ContractError(
                f"need 0 < dt_min <= dt_init <= dt_max, got {self.dt_min}, {self.dt_init}, {self.dt_max}"
            )
        if not 0 < self.safety <= 1:
            raise ContractError(f"safety must lie in (0, 1], got {self.safety}")

    @property
    def fixed_step(self) -> bool:
        return math.isinf(self.tolerance)


@dataclass(frozen=True)
class StepOutcome:
    accepted: bool
    dt_used: float
    dt_next: float
    error_estimate: float


def _max_norm(a: np.ndarray) -> float:
    return float(np.max(np.abs(a))) if np.size(a) else 0.0


def _finite(k, t):
    if not np.all(np.isfinite(k)):
        raise DivergenceError(f"non-finite stage value at t={t}", t=t)
    return k


def rkm_step(f: Callable, u, t: float, dt: float, cfg: StepperConfig):
    """One Merson step of size ``dt``.

    Returns ``(u_new, outcome)``; ``u_new`` is ``u`` itself (unchanged) when the
    step is rejected.
    """
    k1 = _finite(f(u, t), t)
    k2 = _finite(f(u + dt * k1 / 3.0, t + dt / 3.0), t)
    k3 = _finite(f(u + dt * (k1 + k2) / 6.0, t + dt / 3.0), t)
    k4 = _finite(f(u + dt * (k1 + 3.0 * k3) / 8.0, t + dt / 2.0), t)
    k5 = _finite(f(u + dt * (k1 - 3.0 * k3 + 4.0 * k4) / 2.0, t + dt), t)
    err = _max_norm(dt * (2.0 * k1 - 9.0 * k3 + 8.0 * k4 - k5) / 30.0)
    if not math.isfinite(err):
        raise DivergenceError(f"non-finite error estimate at t={t}", t=t)

    if cfg.fixed_step:
        return u + dt * (k1 + 4.0 * k4 + k5) / 6.0, StepOutcome(True, dt, dt, err)

    if err == 0.0:
        factor = MAX_GROWTH
    else:
        factor = cfg.safety * (cfg.tolerance / err) ** 0.2
        factor = min(MAX_GROWTH, max(MAX_SHRINK, factor))
    dt_next = min(cfg.dt_max, max(cfg.dt_min, dt * factor))
    accepted = err <= cfg.tolerance
    if accepted:
        return u + dt * (k1 + 4.0 * k4 + k5) / 6.0, StepOutcome(True, dt, dt_next, err)
    return u, StepOutcome(False, dt, dt_next, err)


@dataclass
class IntegrationResult:
    u: np.ndarray
    t: float
    snapshots: list = field(default_factory=list)
    accepted: int = 0
    rejected: int = 0
    dt_sum: float = 0.0


def integrate(
    f: Callable,
    u0,
    t0: float,
    t_end: float,
    cfg: StepperConfig,
    snapshot_times=(),
    observer: Callable | None = None,
    on_snapshot: Callable | None = None,
) -> IntegrationResult:
    """Advance ``du/dt = f(u, t)`` from ``t0`` to ``t_end``.

    Steps are truncated so that every requested snapshot time and ``t_end`` are
    hit exactly; each snapshot is a copy of the state and is emitted once.
    ``observer(t, u, outcome)`` runs after every accepted step and
    ``on_snapshot(t, u)`` as each snapshot is taken.  On failure the raised
    error carries the last good state in ``.state``, its time in ``.t`` and
    the snapshots taken so far in ``.snapshots``.
    """
    if t_end < t0:
        raise ContractError(f"t_end={t_end} precedes t0={t0}")
    targets = sorted(set(float(s) for s in snapshot_times))
    if targets and (targets[0] < t0 or targets[-1] > t_end):
        raise ContractError("snapshot times must lie in [t0, t_end]")

    u = np.array(u0, dtype=float, copy=True)
    t = float(t0)
    res = IntegrationResult(u=u, t=t)
    pending = list(targets)

    def take_snapshots():
        while pending and pending[0] <= t:
            snap = (pending.pop(0), u.copy())
            res.snapshots.append(snap)
            if on_snapshot is not None:
                on_snapshot(*snap)

    take_snapshots()

    dt = cfg.dt_init
    while t < t_end:
        stop = pending[0] if pending else t_end
        step = min(dt, stop - t)
        landing = step == stop - t
        try:
            u_new, out = rkm_step(f, u, t, step, cfg)
        except DivergenceError as exc:
            exc.state, exc.t, exc.snapshots = u.copy(), t, res.snapshots
            raise
        if not out.accepted:
            res.rejected += 1
            if step <= cfg.dt_min:
                exc = StepFailure(f"step size fell below dt_min={cfg.dt_min} at t={t}", t=t, state=u.copy())
                exc.snapshots = res.snapshots
                raise exc
            dt = min(out.dt_next, step)
            continue
        u = u_new
        t = stop if landing else t + step
        res.accepted += 1
        res.dt_sum += step
        # a truncated landing step should not shrink the next proposal
        dt = max(out.dt_next, dt) if landing and not cfg.fixed_step else out.dt_next
        if cfg.fixed_step:
            dt = cfg.dt_init
        if observer is not None:
            observer(t, u, out)
        take_snapshots()
    res.u, res.t = u, t
    return res
