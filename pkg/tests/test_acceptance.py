"""Acceptance criteria, each run at its stated tolerance.

Every check records a line through ``conftest.record``; the terminal summary
prints one PASS/FAIL line per criterion.  Checks known to miss their target
are marked ``xfail(strict=True)``: they still run and assert the original
bound, and an unexpected pass turns the suite red.
"""

import math
from dataclasses import replace

import numpy as np
import pytest
from conftest import record

from willmore_graphs import app
from willmore_graphs.anisotropy import Isotropic, QuadraticForm, RegularizedAbs
from willmore_graphs.config import parse_config
from willmore_graphs.energy import EnergyMonitor, green_residual, lemma_residual
from willmore_graphs.grid import Grid
from willmore_graphs.integrator import StepperConfig, integrate
from willmore_graphs.mms import ZetaParams, eoc, forcing, zeta, zeta_dt
from willmore_graphs.output import read_snapshot_csv, snapshot_name
from willmore_graphs.spatial import Dirichlet, FlowProblem, rhs


def ladder(preset):
    """L1 EOC of ``u`` between consecutive meshes of a packaged EOC preset."""
    cfg = parse_config(app.preset_path(preset))
    recs = [app.solve_mms(cfg, m)[0] for m in cfg.mms.meshes]
    orders = [eoc(a.err_l1, b.err_l1, a.h, b.h) for a, b in zip(recs, recs[1:])]
    return cfg.mms.meshes, recs, orders


def fmt(orders):
    return ", ".join(f"{o:.3f}" for o in orders)


# --- 1-3: EOC ladders ----------------------------------------------------------


def test_criterion_1_eoc_isotropic():
    meshes, recs, orders = ladder("eoc_iso")
    ok = 1.5 <= orders[-1] <= 2.5
    record(1, "EOC isotropic 32/64 in [1.5, 2.5]", "u L1", ok, f"EOC {fmt(orders)} on {meshes}")
    assert ok


@pytest.mark.xfail(strict=True, reason="pre-asymptotic jump on the desk ladder; see decisions ledger")
def test_criterion_2_eoc_diagonal():
    meshes, recs, orders = ladder("eoc_g2001")
    ok = 1.4 <= orders[-1] <= 2.6
    record(2, "EOC G=diag(2,1) finest pair in [1.4, 2.6]", "u L1", ok, f"EOC {fmt(orders)} on {meshes}")
    assert ok


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="full-Hessian flux keeps second order for mixed G; see decisions ledger")
def test_criterion_3_eoc_mixed():
    meshes, recs, orders = ladder("eoc_g2111")
    ok = 0.8 <= orders[-1] <= 1.6
    record(3, "EOC G=[[2,1],[1,1]] 64/128 in [0.8, 1.6]", "u L1", ok, f"EOC {fmt(orders)} on {meshes}")
    assert ok


# --- 4: energy dissipation -------------------------------------------------------


@pytest.mark.parametrize("name, se", [("isotropic", Isotropic()), ("diag(2,1)", QuadraticForm([[2, 0], [0, 1]]))])
def test_criterion_4_energy_dissipation(name, se):
    p = ZetaParams()
    g = Grid.from_bounds(-p.r, p.r, -p.r, p.r, 32, 32)
    X, Y = g.meshgrid()
    pb = FlowProblem(g, se, Dirichlet(0.0, 0.0))
    cfg = StepperConfig(1e-7, 1e-8, 1e-15, 1e-2)
    mon = EnergyMonitor(pb, cfg.tolerance)
    u0 = zeta(p, X, Y, 0.0)
    mon.start(0.0, u0)
    integrate(lambda u, t: rhs(pb, u, t), u0, 0.0, 1e-4, cfg, observer=mon)
    e0 = mon.reports[0].willmore
    drift = max(r.drift for r in mon.reports) / e0
    ok = not mon.increases and drift <= 1e-6
    detail = f"{mon.steps} steps, {len(mon.increases)} increases, E {e0:.6g} -> {mon.reports[-1].willmore:.6g}, drift {drift:.1e}"
    record(4, "energy non-increasing within 10*tol*dt, drift <= 1e-6", name, ok, detail)
    assert ok


# --- 5: discrete Green formula ------------------------------------------------------


def test_criterion_5_green_formula():
    rng = np.random.default_rng(5)
    worst_zero = worst_full = 0.0
    for k in range(100):
        n = 3 + k % 6
        u, v = rng.normal(size=(2, n + 1, n + 1))
        worst_full = max(worst_full, green_residual(u, v, 1.0 / n), lemma_residual(u, v, 1.0 / n))
        v[0], v[-1], v[:, 0], v[:, -1] = 0.0, 0.0, 0.0, 0.0
        worst_zero = max(worst_zero, green_residual(u, v, 1.0 / n))
    ok = max(worst_zero, worst_full) <= 1e-12
    record(5, "discrete Green residual <= 1e-12", "100 pairs N=3..8", ok, f"zero-boundary {worst_zero:.1e}, with boundary sums {worst_full:.1e}")
    assert ok


# --- 6: anisotropy derivative suite ------------------------------------------------

SUITE = [
    Isotropic(),
    QuadraticForm([[2, 0], [0, 1]]),
    QuadraticForm([[2, 1], [1, 1]]),
    QuadraticForm([[8, 0], [0, 1]]),
    QuadraticForm([[10, 8], [8, 10]]),
    RegularizedAbs(1.0),
    RegularizedAbs(0.1),
    RegularizedAbs(0.001),
]


@pytest.mark.parametrize("se", SUITE, ids=[repr(s) for s in SUITE])
def test_criterion_6_anisotropy_suite(se):
    rng = np.random.default_rng(6)
    radius = 10 * np.sqrt(rng.random(100))
    angle = 2 * np.pi * rng.random(100)
    worst = dict(grad=0.0, hess=0.0, homog=0.0, sym=0.0)
    min_eig = np.inf
    for r, a in zip(radius, angle):
        p1, p2 = r * math.cos(a), r * math.sin(a)
        d = 1e-6
        fd = ((se.gamma(p1 + d, p2) - se.gamma(p1 - d, p2)) / (2 * d), (se.gamma(p1, p2 + d) - se.gamma(p1, p2 - d)) / (2 * d))
        worst["grad"] = max(worst["grad"], float(np.abs(np.subtract(se.grad_p(p1, p2), fd)).max()))
        d = 1e-5
        c1 = (np.array(se.grad_p(p1 + d, p2)) - np.array(se.grad_p(p1 - d, p2))) / (2 * d)
        c2 = (np.array(se.grad_p(p1, p2 + d)) - np.array(se.grad_p(p1, p2 - d))) / (2 * d)
        H = se.hessian(p1, p2)
        worst["hess"] = max(worst["hess"], float(np.abs(H.as_matrix() - np.column_stack([c1, c2])).max()))
        worst["sym"] = max(worst["sym"], abs(H.e12 - H.e21))
        min_eig = min(min_eig, float(np.linalg.eigvalsh(H.as_matrix()).min()))
        base = se.gamma_full(p1, p2, -1.0)
        for lam in (0.5, 2.0, -3.0):
            scaled = se.gamma_full(lam * p1, lam * p2, -lam)
            worst["homog"] = max(worst["homog"], abs(scaled - abs(lam) * base) / (abs(lam) * base))
    ok = worst["grad"] <= 1e-6 and worst["hess"] <= 1e-5 and worst["homog"] <= 1e-12 and worst["sym"] <= 1e-12 and min_eig >= -1e-10
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + f", min eig {min_eig:.2e}"
    record(6, "anisotropy derivatives, homogeneity, symmetry, convexity", repr(se), ok, detail)
    assert ok


# --- 7: integrator order ------------------------------------------------------------


def test_criterion_7_integrator_order():
    errs = []
    for dt in (1e-2, 5e-3, 2.5e-3):
        res = integrate(lambda u, t: -u, np.array([1.0]), 0.0, 1.0, StepperConfig(math.inf, dt, 1e-12, 1.0))
        errs.append(abs(res.u[0] - math.exp(-1)))
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    tol = 1e-8
    res = integrate(lambda u, t: -u, np.array([1.0]), 0.0, 1.0, StepperConfig(tol, 1e-3, 1e-12, 1.0))
    adaptive = abs(res.u[0] - math.exp(-1))
    ok = min(orders) >= 3.8 and adaptive <= 10 * tol
    record(7, "fixed-step order >= 3.8, adaptive within 10*tol", "u'=-u", ok, f"orders {fmt(orders)}, adaptive error {adaptive:.1e}")
    assert ok


# --- 8: MMS residual consistency ------------------------------------------------------


def residual_orders(se):
    p = ZetaParams()
    norms, hs = [], []
    for n in (16, 32, 64):
        g = Grid.from_bounds(-p.r, p.r, -p.r, p.r, n, n)
        X, Y = g.meshgrid()
        pb = FlowProblem(g, se, Dirichlet(lambda x, y, t: zeta(p, x, y, t), 0.0))
        res = rhs(pb, zeta(p, X, Y, 0.0), 0.0) + forcing(se, p, X, Y, 0.0, g.h1 / 100) - zeta_dt(p, X, Y, 0.0)
        norms.append(float(np.abs(res[1:-1, 1:-1]).max()))
        hs.append(g.h1)
    return norms, [eoc(a, b, ha, hb) for a, b, ha, hb in zip(norms, norms[1:], hs, hs[1:])]


def _criterion_8(name, se, bound):
    norms, orders = residual_orders(se)
    ok = orders[-1] >= bound
    record(8, "MMS residual order (>= 1.7 iso/diag, >= 1.0 abs)", name, ok, f"residual {', '.join(f'{x:.3g}' for x in norms)}, order {fmt(orders)}")
    assert ok


@pytest.mark.xfail(strict=True, reason="residual still pre-asymptotic on 16/32/64; see decisions ledger")
def test_criterion_8_residual_isotropic():
    _criterion_8("isotropic", Isotropic(), 1.7)


@pytest.mark.xfail(strict=True, reason="residual still pre-asymptotic on 16/32/64; see decisions ledger")
def test_criterion_8_residual_diagonal():
    _criterion_8("diag(2,1)", QuadraticForm([[2, 0], [0, 1]]), 1.7)


def test_criterion_8_residual_abs():
    _criterion_8("abs eps=1", RegularizedAbs(1.0), 1.0)


# --- 9: qualitative smoke run ------------------------------------------------------------

TIMES = (0.0, 1.6e-5, 1.28e-4)


@pytest.fixture(scope="module")
def smoke_run(tmp_path_factory):
    cfg = parse_config(app.preset_path("g8001"))
    cfg = replace(cfg, time=replace(cfg.time, t_end=TIMES[-1], snapshot_times=TIMES))
    out = tmp_path_factory.mktemp("smoke")
    return app.run_evolve(cfg, out), out


@pytest.mark.slow
def test_criterion_9_smoke_run(smoke_run):
    res, out = smoke_run
    q_min, finite = np.inf, True
    for t in TIMES:
        data = read_snapshot_csv(out / snapshot_name(t))
        finite &= all(np.all(np.isfinite(data[k])) for k in ("u", "w", "Q", "H"))
        q_min = min(q_min, float(data["Q"].min()))
    ok = res.ok and res.snapshot_times == list(TIMES) and finite and q_min >= 1.0
    record(9, "G=diag(8,1) Neumann sine_radial 100x100", "run", ok, f"status {res.status}, snapshots {res.snapshot_times}, min Q {q_min:.6f}, finite {finite}")
    assert ok


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="semidiscrete energy rises briefly near t=2.1e-5 at this resolution; see decisions ledger")
def test_criterion_9_energy_trace(smoke_run):
    res, _ = smoke_run
    late = [inc for inc in res.monitor.increases if inc[0] > 10]
    detail = f"{len(late)} increases after step 10 of {res.monitor.steps}"
    if late:
        worst = max(late, key=lambda inc: inc[2])
        detail += f", largest +{worst[2]:.3g} at t={worst[1]:.4g} (E={res.monitor.reports[worst[0]].willmore:.6g})"
    ok = not late
    record(9, "G=diag(8,1) Neumann sine_radial 100x100", "energy", ok, detail)
    assert ok


# --- 10: plumbing ---------------------------------------------------------------------


def test_criterion_10_plumbing(tmp_path):
    from pathlib import Path

    from willmore_graphs import cli

    text = "[grid]\nn1 = 24\nn2 = 24\n[bc]\nkind = neumann\n[initial]\npreset = sine_radial\n[time]\nt_end = 1e-6\nsnapshot_count = 3\n[output]\nformats = csv, vtk\n"
    cfg_path = tmp_path / "run.ini"
    cfg_path.write_text(text)
    cfg = parse_config(cfg_path)
    a = app.run_evolve(cfg, tmp_path / "a")
    b = app.run_evolve(cfg, tmp_path / "b")
    identical = all(fa.read_bytes() == fb.read_bytes() for fa, fb in zip(a.files, b.files)) and len(a.files) == len(b.files)

    last = tmp_path / "a" / snapshot_name(a.snapshot_times[-1])
    written = read_snapshot_csv(last)
    cfg2 = replace(cfg, initial=replace(cfg.initial, preset="csv_path", path=str(last)))
    round_trip = app.initial_field(cfg2, cfg2.make_grid()).tobytes() == written["u"].tobytes()

    fixtures = sorted((Path(__file__).parent / "fixtures" / "invalid").glob("*.ini"))
    codes = {f.stem: cli.main(["evolve", "--config", str(f), "--output", str(tmp_path / "x")]) for f in fixtures}
    exit_ok = len(codes) >= 10 and all(c == cli.EXIT_CONFIG for c in codes.values())
    ok = identical and round_trip and exit_ok
    record(10, "CSV round trip, deterministic reruns, config exit code 2", "plumbing", ok,
           f"byte-identical {identical}, round trip {round_trip}, exit 2 on {sum(c == 2 for c in codes.values())}/{len(codes)} fixtures")
    assert ok
