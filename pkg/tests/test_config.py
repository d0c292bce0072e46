from pathlib import Path

import numpy as np
import pytest

from willmore_graphs.anisotropy import Isotropic, QuadraticForm, RegularizedAbs
from willmore_graphs.app import preset_path
from willmore_graphs.config import RunConfig, parse_config
from willmore_graphs.errors import ConfigError

INVALID = sorted((Path(__file__).parent / "fixtures" / "invalid").glob("*.ini"))
PRESETS = ["g8001", "g108810", "abs_text", "abs_caption", "eoc_iso", "eoc_g2001", "eoc_g2111", "eoc_abs", "wulff_g2001"]


def expected_key(path: Path) -> str:
    return path.read_text().splitlines()[0].split("expect:")[1].strip()


def write(tmp_path, text, name="c.ini"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_defaults():
    cfg = parse_config()
    assert cfg == RunConfig()
    assert cfg.make_grid().shape == (33, 33)
    assert isinstance(cfg.make_energy(), Isotropic)
    assert cfg.snapshot_times() == [0.0, cfg.time.t_end]


@pytest.mark.parametrize("path", INVALID, ids=[p.stem for p in INVALID])
def test_invalid_fixture_names_its_key(path):
    with pytest.raises(ConfigError) as exc:
        parse_config(path)
    assert exc.value.key == expected_key(path)
    assert expected_key(path) in str(exc.value)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        parse_config(tmp_path / "nope.ini")


def test_malformed_file(tmp_path):
    with pytest.raises(ConfigError, match="malformed"):
        parse_config(write(tmp_path, "n1 = 3\n"))


def test_later_files_override(tmp_path):
    a = write(tmp_path, "[grid]\nn1 = 8\nn2 = 8\n", "a.ini")
    b = write(tmp_path, "[grid]\nn2 = 12\n", "b.ini")
    cfg = parse_config(a, b)
    assert (cfg.grid.n1, cfg.grid.n2) == (8, 12)


def test_energies_and_lists(tmp_path):
    cfg = parse_config(write(tmp_path, "[anisotropy]\nkind = quadratic\ng11 = 2\ng12 = 1\ng22 = 1\n[mms]\nmeshes = 8, 16\n[output]\nformats = CSV, vtk\n"))
    se = cfg.make_energy()
    assert isinstance(se, QuadraticForm) and np.array_equal(se.G, [[2, 1], [1, 1]])
    assert cfg.mms.meshes == (8, 16) and cfg.output.formats == ("csv", "vtk")
    cfg = parse_config(write(tmp_path, "[anisotropy]\nkind = abs\neps_abs = 0.25\n"))
    se = cfg.make_energy()
    assert isinstance(se, RegularizedAbs) and se.eps == 0.25


def test_snapshot_times(tmp_path):
    cfg = parse_config(write(tmp_path, "[time]\nt_end = 1\nsnapshot_count = 5\n"))
    assert cfg.snapshot_times() == [0.0, 0.25, 0.5, 0.75, 1.0]
    cfg = parse_config(write(tmp_path, "[time]\nt_end = 1\nsnapshot_times = 0.5, 0.1\n"))
    assert cfg.snapshot_times() == [0.0, 0.1, 0.5, 1.0]


def test_overrides_are_validated():
    assert parse_config(overrides={"grid.n1": 4}).grid.n1 == 4
    with pytest.raises(ConfigError) as exc:
        parse_config(overrides={"time.safety": 2.0})
    assert exc.value.key == "time.safety"


@pytest.mark.parametrize("name", PRESETS)
def test_presets_parse(name):
    cfg = parse_config(preset_path(name))
    cfg.make_energy()
    cfg.make_stepper()


def test_preset_values():
    g = parse_config(preset_path("g8001"))
    assert g.snapshot_times() == [0.0, 1.6e-5, 1.28e-4, 1e-3]
    assert (g.grid.n1, g.bc.kind, g.initial.preset) == (100, "neumann", "sine_radial")
    assert parse_config(preset_path("abs_text")).anisotropy.eps_abs == 0.001
    assert parse_config(preset_path("abs_caption")).anisotropy.eps_abs == 0.1
    assert parse_config(preset_path("eoc_g2111")).mms.meshes == (16, 32, 64, 128)


def test_unknown_preset():
    with pytest.raises(ConfigError, match="known"):
        preset_path("nothing")
