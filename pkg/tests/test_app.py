import filecmp
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from willmore_graphs import app, cli
from willmore_graphs.config import parse_config
from willmore_graphs.errors import ConfigError
from willmore_graphs.mms import ErrorRecord
from willmore_graphs.output import read_snapshot_csv, snapshot_name

INVALID = sorted((Path(__file__).parent / "fixtures" / "invalid").glob("*.ini"))


def small(tmp_path, text):
    p = tmp_path / "run.ini"
    p.write_text(text)
    return p


SINE = """
[domain]
x_min = -1
x_max = 1
y_min = -1
y_max = 1
[grid]
n1 = 20
n2 = 20
[bc]
kind = neumann
[initial]
preset = sine_radial
[time]
t_end = 1e-6
snapshot_count = 3
[output]
formats = csv, vtk
"""


def test_zero_state_stays_zero(tmp_path):
    cfg = parse_config(small(tmp_path, "[anisotropy]\nkind = abs\neps_abs = 0.1\n[grid]\nn1 = 8\nn2 = 8\n[time]\nt_end = 1e-5\nsnapshot_count = 3\n"))
    res = app.run_evolve(cfg, tmp_path / "out")
    assert res.ok and res.snapshot_times == [0.0, 5e-6, 1e-5]
    for t in res.snapshot_times:
        data = read_snapshot_csv(tmp_path / "out" / snapshot_name(t))
        assert np.all(data["u"] == 0) and np.all(data["w"] == 0) and np.all(data["Q"] == 1)


def test_sine_radial_smoke(tmp_path):
    cfg = parse_config(small(tmp_path, SINE))
    res = app.run_evolve(cfg, tmp_path / "out")
    assert res.ok
    for t in res.snapshot_times:
        data = read_snapshot_csv(tmp_path / "out" / snapshot_name(t))
        assert np.all(np.isfinite(data["u"])) and data["Q"].min() >= 1.0
        assert (tmp_path / "out" / snapshot_name(t, "vtk")).is_file()
    assert (tmp_path / "out" / "energy.csv").is_file()


def test_evolve_is_deterministic(tmp_path):
    cfg = parse_config(small(tmp_path, SINE))
    a = app.run_evolve(cfg, tmp_path / "a")
    b = app.run_evolve(cfg, tmp_path / "b")
    for fa, fb in zip(a.files, b.files):
        assert fa.name == fb.name and filecmp.cmp(fa, fb, shallow=False)


def test_csv_initial_state_round_trip(tmp_path):
    cfg = parse_config(small(tmp_path, SINE))
    res = app.run_evolve(cfg, tmp_path / "a")
    last = tmp_path / "a" / snapshot_name(res.snapshot_times[-1])
    cfg2 = replace(cfg, initial=replace(cfg.initial, preset="csv_path", path=str(last)))
    u = app.initial_field(cfg2, cfg2.make_grid())
    assert u.tobytes() == read_snapshot_csv(last)["u"].tobytes()
    bad = replace(cfg2, initial=replace(cfg2.initial, path=str(tmp_path / "missing.csv")))
    with pytest.raises(ConfigError):
        app.initial_field(bad, bad.make_grid())


def test_divergence_keeps_partial_output(tmp_path, monkeypatch):
    real_rhs = app.rhs

    def failing_rhs(problem, u, t):
        du = real_rhs(problem, u, t)
        return du * np.nan if t > 6e-7 else du

    monkeypatch.setattr(app, "rhs", failing_rhs)
    cfg = parse_config(small(tmp_path, SINE))
    res = app.run_evolve(cfg, tmp_path / "out")
    assert res.status == "diverged" and not res.ok
    assert res.snapshot_times == [0.0, 5e-7]
    failed = list((tmp_path / "out").glob("failed_t*.csv"))
    assert len(failed) == 1
    assert np.all(np.isfinite(read_snapshot_csv(failed[0])["u"]))
    assert (tmp_path / "out" / "energy.csv").is_file()
    assert cli.main(["evolve", "--config", str(small(tmp_path, SINE)), "--output", str(tmp_path / "cli")]) == cli.EXIT_DIVERGED


def test_output_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv(app.OUTPUT_ENV, str(tmp_path / "env"))
    cfg = parse_config()
    assert app.output_dir(cfg) == tmp_path / "env"
    assert app.output_dir(cfg, tmp_path / "explicit") == tmp_path / "explicit"


def test_eoc_pipeline_with_injected_errors(tmp_path):
    cfg = parse_config(small(tmp_path, "[mms]\nmeshes = 8, 16, 32\n"))

    def solver(cfg, mesh):
        h = 8.0 / mesh
        rec = ErrorRecord(h, 3 * h**2, 2 * h**2, h**2)
        return rec, rec

    res = app.run_eoc(cfg, tmp_path / "out", solver)
    assert [r["eoc_l1"] for r in res.rows_u] == [None, pytest.approx(2.0), pytest.approx(2.0)]
    assert (tmp_path / "out" / "eoc_u.csv").is_file() and (tmp_path / "out" / "eoc.txt").is_file()


def test_eoc_records_failed_mesh(tmp_path):
    cfg = parse_config(small(tmp_path, "[mms]\nmeshes = 8, 16\n"))

    def solver(cfg, mesh):
        if mesh == 16:
            raise FloatingPointError("boom")
        return ErrorRecord(1.0, 1.0, 1.0, 1.0), ErrorRecord(1.0, 1.0, 1.0, 1.0)

    res = app.run_eoc(cfg, tmp_path / "out", solver)
    assert list(res.failures) == [16] and res.rows_u[1]["status"] == "failed"


def test_small_mms_solve_converges(tmp_path):
    cfg = parse_config(app.preset_path("eoc_g2001"))
    eu16, ew16 = app.solve_mms(cfg, 16)
    eu32, ew32 = app.solve_mms(cfg, 32)
    assert eu32.err_l1 < eu16.err_l1 / 4 and ew32.err_linf < ew16.err_linf / 2


def test_wulff_outputs(tmp_path):
    cfg = parse_config(small(tmp_path, "[anisotropy]\nkind = quadratic\ng11 = 2\ng22 = 1\n[wulff]\nlatitudes = 0, 0.5\n"))
    files = app.run_wulff(cfg, tmp_path)
    assert [f.name for f in files] == ["wulff_q3_0.csv", "wulff_q3_0.5.csv"]
    data = np.loadtxt(files[0], delimiter=",", skiprows=1)
    assert data.shape == (360, 3)
    q = np.column_stack([np.cos(data[:, 0]), np.sin(data[:, 0])])
    support = cfg.make_energy().gamma_full(q[:, 0], q[:, 1], 0.0)
    assert np.all(data[:, 1:] @ q.T <= support + 1e-9)


# --- command line ---


def test_cli_wulff_preset(tmp_path, capsys):
    assert cli.main(["wulff", "--preset", "wulff_g2001", "--output", str(tmp_path)]) == cli.EXIT_OK
    assert len((tmp_path / "wulff_q3_0.csv").read_text().splitlines()) == 361


def test_cli_evolve(tmp_path, capsys):
    assert cli.main(["evolve", "--config", str(small(tmp_path, SINE)), "--output", str(tmp_path / "o")]) == 0
    assert "wrote" in capsys.readouterr().out


def test_cli_eoc_small(tmp_path, capsys):
    cfg = small(tmp_path, "[mms]\nmeshes = 8, 16\ntau_levels = 2\n[time]\nt_end = 1e-3\n")
    assert cli.main(["eoc", "--config", str(cfg), "--output", str(tmp_path / "o")]) == 0
    assert "err_l1" in capsys.readouterr().out


@pytest.mark.parametrize("path", INVALID, ids=[p.stem for p in INVALID])
def test_cli_config_errors_exit_2(path, tmp_path, capsys):
    assert cli.main(["evolve", "--config", str(path), "--output", str(tmp_path)]) == cli.EXIT_CONFIG
    assert path.read_text().splitlines()[0].split("expect:")[1].strip() in capsys.readouterr().err


def test_cli_requires_a_config(capsys):
    assert cli.main(["evolve"]) == cli.EXIT_CONFIG


def test_module_entry_point(tmp_path):
    import subprocess
    import sys

    r = subprocess.run([sys.executable, "-m", "willmore_graphs", "wulff", "--preset", "wulff_g2001", "--output", str(tmp_path)], capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
