"""Experiment drivers behind the command line: evolve, eoc and wulff."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Callable

import numpy as np

from . import mms, output
from .anisotropy import wulff_boundary
from .config import RunConfig
from .energy import EnergyMonitor
from .errors import ConfigError, ContractError, DivergenceError, StepFailure
from .grid import Grid
from .integrator import integrate
from .spatial import Dirichlet, FlowProblem, NeumannHomogeneous, apply_u_bc, curvature_fields, rhs

log = logging.getLogger(__name__)

OUTPUT_ENV = "WILLMORE_OUTPUT_DIR"


def output_dir(cfg: RunConfig, override=None) -> Path:
    """Output directory: explicit override, then the environment, then the config."""
    d = override or os.environ.get(OUTPUT_ENV) or cfg.output.directory
    p = Path(d)
    p.mkdir(parents=True, exist_ok=True)
    return p


def preset_path(name: str) -> Path:
    ref = resources.files("willmore_graphs") / "presets" / f"{name}.ini"
    if not ref.is_file():
        known = sorted(p.name[:-4] for p in (resources.files("willmore_graphs") / "presets").iterdir() if p.name.endswith(".ini"))
        raise ConfigError("preset", f"unknown preset {name!r}; known: {', '.join(known)}")
    return Path(str(ref))


# --- initial conditions and problem assembly -----------------------------------


def sine_radial(X, Y):
    return np.sin(3.0 * np.pi * np.sqrt(X * X + Y * Y))


def initial_field(cfg: RunConfig, grid: Grid) -> np.ndarray:
    X, Y = grid.meshgrid()
    preset = cfg.initial.preset
    if preset == "zero":
        return np.zeros(grid.shape)
    if preset == "sine_radial":
        return sine_radial(X, Y)
    if preset == "mms_zeta":
        return mms.zeta(cfg.zeta_params(), X, Y, 0.0)
    try:
        data = output.read_snapshot_csv(cfg.initial.path, grid)
    except (OSError, ContractError) as exc:
        raise ConfigError("initial.path", str(exc)) from exc
    if "u" not in data:
        raise ConfigError("initial.path", "file has no u column")
    return data["u"]


def build_problem(cfg: RunConfig, grid: Grid | None = None, t_end: float | None = None) -> FlowProblem:
    """Flow problem for a config; the manufactured forcing is on with ``initial = mms_zeta``."""
    grid = grid or cfg.make_grid()
    energy = cfg.make_energy()
    p = cfg.zeta_params()
    if cfg.bc.kind == "neumann":
        bc = NeumannHomogeneous()
    elif cfg.bc.dirichlet == "mms_zeta":
        bc = Dirichlet(lambda x, y, t: mms.zeta(p, x, y, t), 0.0)
    else:
        bc = Dirichlet(0.0, 0.0)
    forcing = None
    if cfg.initial.preset == "mms_zeta":
        X, Y = grid.meshgrid()
        T = cfg.time.t_end if t_end is None else t_end
        forcing = mms.TimeInterpolatedForcing(
            energy, p, X, Y, 0.0, T, delta=grid.h1 / 100.0, n_nodes=cfg.mms.forcing_nodes
        )
    return FlowProblem(grid, energy, bc, forcing)


def snapshot_fields(problem: FlowProblem, u, t: float) -> dict:
    ub, w, H, Q = curvature_fields(problem, u, t)
    return {"u": ub, "w": w, "Q": Q, "H": H}


# --- evolve ---------------------------------------------------------------------


@dataclass
class EvolveResult:
    status: str
    directory: Path
    snapshot_times: list = field(default_factory=list)
    files: list = field(default_factory=list)
    monitor: EnergyMonitor | None = None
    error: Exception | None = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def run_evolve(cfg: RunConfig, out=None) -> EvolveResult:
    """Integrate from the configured initial state and write snapshots and the energy trace.

    Divergence keeps the files already written, adds ``failed_t<t>.csv`` with
    the last good state and returns ``status='diverged'``.
    """
    directory = output_dir(cfg, out)
    grid = cfg.make_grid()
    problem = build_problem(cfg, grid)
    stepper = cfg.make_stepper()
    u0 = apply_u_bc(problem, initial_field(cfg, grid).astype(float), 0.0)
    result = EvolveResult("ok", directory)
    formats = cfg.output.formats

    def write(name_csv, name_vtk, t, u):
        fields = snapshot_fields(problem, u, t)
        if "csv" in formats:
            result.files.append(output.write_snapshot_csv(directory / name_csv, grid, fields))
        if "vtk" in formats:
            result.files.append(output.write_vtk(directory / name_vtk, grid, fields, title=f"t={t!r}"))

    def on_snapshot(t, u):
        write(output.snapshot_name(t), output.snapshot_name(t, "vtk"), t, u)
        result.snapshot_times.append(t)

    monitor = EnergyMonitor(problem, stepper.tolerance)
    monitor.start(0.0, u0)
    result.monitor = monitor
    log.info("evolve: %s grid %dx%d, t_end=%g", type(problem.energy).__name__, grid.n1, grid.n2, cfg.time.t_end)
    try:
        integrate(
            lambda u, t: rhs(problem, u, t),
            u0,
            0.0,
            cfg.time.t_end,
            stepper,
            snapshot_times=cfg.snapshot_times(),
            observer=monitor,
            on_snapshot=on_snapshot,
        )
    except (DivergenceError, StepFailure) as exc:
        result.status, result.error = "diverged", exc
        tag = output.time_tag(exc.t)
        fields = snapshot_fields(problem, exc.state, exc.t)
        result.files.append(output.write_snapshot_csv(directory / f"failed_t{tag}.csv", grid, fields))
        log.error("run stopped at t=%g: %s", exc.t, exc)
    result.files.append(output.write_energy_csv(directory / "energy.csv", monitor.reports))
    if monitor.reports:
        last = monitor.reports[-1]
        # the continuous functional carries a factor 1/2 relative to the tracked quantity
        log.info("final (H^2, Q)_h = %.6e (half: %.6e)", last.willmore, 0.5 * last.willmore)
    return result


# --- eoc ------------------------------------------------------------------------


@dataclass
class EOCResult:
    rows_u: list
    rows_w: list
    directory: Path
    files: list = field(default_factory=list)
    failures: dict = field(default_factory=dict)


def solve_mms(cfg: RunConfig, mesh: int):
    """Forced run on ``[-r, r]^2`` with ``mesh`` cells per side.

    Returns ``(ErrorRecord for u, ErrorRecord for w)`` in the space-time norms
    sampled at ``tau_levels + 1`` equally spaced times.  The boundary data,
    initial state and forcing of the manufactured problem replace whatever
    ``[bc]`` and ``[initial]`` request.
    """
    cfg = _with_mms(cfg)
    p = cfg.zeta_params()
    grid = Grid.from_bounds(-p.r, p.r, -p.r, p.r, mesh, mesh)
    T = cfg.time.t_end
    problem = build_problem(cfg, grid, T)
    M = cfg.mms.tau_levels
    times = [T * k / M for k in range(M + 1)]
    X, Y = grid.meshgrid()
    res = integrate(lambda u, t: rhs(problem, u, t), mms.zeta(p, X, Y, 0.0), 0.0, T, cfg.make_stepper(), times)
    u_snaps, w_snaps = [], []
    for t, u in res.snapshots:
        f = snapshot_fields(problem, u, t)
        u_snaps.append((t, f["u"]))
        w_snaps.append((t, f["w"]))
    tau = T / M
    eu = mms.spacetime_norms(u_snaps, p, grid, tau)
    ew = mms.spacetime_norms(w_snaps, p, grid, tau, exact=lambda a, b, t: mms.w_exact(problem.energy, p, a, b, t))
    return mms.ErrorRecord(grid.h1, *eu), mms.ErrorRecord(grid.h1, *ew)


def run_eoc(cfg: RunConfig, out=None, solver: Callable | None = None) -> EOCResult:
    """Solve the manufactured problem on every mesh and tabulate errors and EOC.

    ``solver(cfg, mesh)`` defaults to :func:`solve_mms`; it must return a pair
    of ``ErrorRecord`` for ``u`` and ``w``.  A mesh whose solve fails is kept
    as a failed row and the remaining meshes still run.
    """
    directory = output_dir(cfg, out)
    solver = solver or solve_mms
    rec_u, rec_w, failures = [], [], {}
    for mesh in cfg.mms.meshes:
        try:
            eu, ew = solver(cfg, mesh)
        except (DivergenceError, StepFailure, FloatingPointError) as exc:
            log.error("mesh %d failed: %s", mesh, exc)
            failures[mesh] = exc
            eu = ew = None
        rec_u.append((mesh, eu))
        rec_w.append((mesh, ew))
    rows_u = output.eoc_rows(rec_u, mms.eoc)
    rows_w = output.eoc_rows(rec_w, mms.eoc)
    res = EOCResult(rows_u, rows_w, directory, failures=failures)
    res.files.append(output.write_eoc_csv(directory / "eoc_u.csv", rows_u))
    res.files.append(output.write_eoc_csv(directory / "eoc_w.csv", rows_w))
    text = output.format_eoc_table(rows_u, "u") + "\n" + output.format_eoc_table(rows_w, "w")
    (directory / "eoc.txt").write_text(text)
    res.files.append(directory / "eoc.txt")
    return res


def _with_mms(cfg: RunConfig) -> RunConfig:
    return replace(
        cfg,
        bc=replace(cfg.bc, kind="dirichlet", dirichlet="mms_zeta"),
        initial=replace(cfg.initial, preset="mms_zeta"),
    )


# --- wulff ----------------------------------------------------------------------


def wulff_name(q3: float) -> str:
    return f"wulff_q3_{q3:g}.csv"


def run_wulff(cfg: RunConfig, out=None) -> list:
    """Write one ``theta,x,y`` polyline per requested latitude."""
    directory = output_dir(cfg, out)
    energy = cfg.make_energy()
    files = []
    for q3 in cfg.wulff.latitudes:
        pts = wulff_boundary(energy, cfg.wulff.n_samples, q3)
        if not np.all(np.isfinite(pts)):
            raise FloatingPointError("non-finite Wulff sample")
        files.append(output.write_wulff_csv(directory / wulff_name(q3), pts))
    return files

