"""Run configuration: INI schema, strict parsing and validation.

Every section and key is optional and falls back to the defaults below.
Unknown sections or keys, unparsable values and invariant violations raise
:class:`ConfigError` naming the offending ``section.key``.

Schema::

    [domain]      x_min, x_max, y_min, y_max
    [grid]        n1, n2                      (cells per direction)
    [anisotropy]  kind = isotropic | quadratic | abs; g11, g12, g22; eps_abs
    [bc]          kind = dirichlet | neumann; dirichlet = zero | mms_zeta
    [initial]     preset = zero | sine_radial | mms_zeta | csv_path; path
    [time]        t_end, snapshot_count, snapshot_times, tolerance,
                  dt_init, dt_min, dt_max, safety
    [mms]         r, n, sigma, tau_levels, meshes, forcing_nodes
    [output]      directory, formats = csv and/or vtk
    [wulff]       n_samples, latitudes

Lists are comma separated.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .anisotropy import Isotropic, QuadraticForm, RegularizedAbs, SurfaceEnergy
from .errors import ConfigError
from .grid import Grid
from .integrator import StepperConfig
from .mms import ZetaParams


def _floats(text: str):
    return tuple(float(x) for x in text.split(",") if x.strip())


def _ints(text: str):
    return tuple(int(x) for x in text.split(",") if x.strip())


def _words(text: str):
    return tuple(x.strip().lower() for x in text.split(",") if x.strip())


def _word(text: str):
    return text.strip().lower()


def _path(text: str):
    return text.strip()


SCHEMA = {
    "domain": {"x_min": float, "x_max": float, "y_min": float, "y_max": float},
    "grid": {"n1": int, "n2": int},
    "anisotropy": {"kind": _word, "g11": float, "g12": float, "g22": float, "eps_abs": float},
    "bc": {"kind": _word, "dirichlet": _word},
    "initial": {"preset": _word, "path": _path},
    "time": {
        "t_end": float,
        "snapshot_count": int,
        "snapshot_times": _floats,
        "tolerance": float,
        "dt_init": float,
        "dt_min": float,
        "dt_max": float,
        "safety": float,
    },
    "mms": {"r": float, "n": int, "sigma": float, "tau_levels": int, "meshes": _ints, "forcing_nodes": int},
    "output": {"directory": _path, "formats": _words},
    "wulff": {"n_samples": int, "latitudes": _floats},
}


@dataclass(frozen=True)
class DomainConfig:
    x_min: float = -1.0
    x_max: float = 1.0
    y_min: float = -1.0
    y_max: float = 1.0


@dataclass(frozen=True)
class GridConfig:
    n1: int = 32
    n2: int = 32


@dataclass(frozen=True)
class AnisotropyConfig:
    kind: str = "isotropic"
    g11: float = 1.0
    g12: float = 0.0
    g22: float = 1.0
    eps_abs: float = 1.0


@dataclass(frozen=True)
class BCConfig:
    kind: str = "dirichlet"
    dirichlet: str = "zero"


@dataclass(frozen=True)
class InitialConfig:
    preset: str = "zero"
    path: str = ""


@dataclass(frozen=True)
class TimeConfig:
    t_end: float = 1e-4
    snapshot_count: int = 2
    snapshot_times: tuple = ()
    tolerance: float = 1e-7
    dt_init: float = 1e-8
    dt_min: float = 1e-15
    dt_max: float = 1e-2
    safety: float = 0.8


@dataclass(frozen=True)
class MMSConfig:
    r: float = 4.0
    n: int = 2
    sigma: float = 1.0
    tau_levels: int = 10
    meshes: tuple = (16, 32, 64)
    forcing_nodes: int = 12


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "output"
    formats: tuple = ("csv",)


@dataclass(frozen=True)
class WulffConfig:
    n_samples: int = 360
    latitudes: tuple = (0.0,)


@dataclass(frozen=True)
class RunConfig:
    domain: DomainConfig = field(default_factory=DomainConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    anisotropy: AnisotropyConfig = field(default_factory=AnisotropyConfig)
    bc: BCConfig = field(default_factory=BCConfig)
    initial: InitialConfig = field(default_factory=InitialConfig)
    time: TimeConfig = field(default_factory=TimeConfig)
    mms: MMSConfig = field(default_factory=MMSConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    wulff: WulffConfig = field(default_factory=WulffConfig)

    # --- derived objects ---

    def make_grid(self) -> Grid:
        d, g = self.domain, self.grid
        return Grid.from_bounds(d.x_min, d.x_max, d.y_min, d.y_max, g.n1, g.n2)

    def make_energy(self) -> SurfaceEnergy:
        a = self.anisotropy
        if a.kind == "isotropic":
            return Isotropic()
        if a.kind == "quadratic":
            return QuadraticForm(np.array([[a.g11, a.g12], [a.g12, a.g22]]))
        return RegularizedAbs(a.eps_abs)

    def make_stepper(self) -> StepperConfig:
        t = self.time
        return StepperConfig(t.tolerance, t.dt_init, t.dt_min, t.dt_max, t.safety)

    def zeta_params(self) -> ZetaParams:
        return ZetaParams(self.mms.r, self.mms.n, self.mms.sigma)

    def snapshot_times(self) -> list:
        """Requested output times, always including 0 and ``t_end``."""
        t = self.time
        if t.snapshot_times:
            times = set(t.snapshot_times)
        else:
            times = {t.t_end * k / (t.snapshot_count - 1) for k in range(t.snapshot_count)}
        times |= {0.0, t.t_end}
        return sorted(times)


_SECTIONS = {
    "domain": DomainConfig,
    "grid": GridConfig,
    "anisotropy": AnisotropyConfig,
    "bc": BCConfig,
    "initial": InitialConfig,
    "time": TimeConfig,
    "mms": MMSConfig,
    "output": OutputConfig,
    "wulff": WulffConfig,
}


def _reader() -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None, default_section="__none__")
    cp.optionxform = str
    return cp


def _read(paths) -> configparser.ConfigParser:
    cp = _reader()
    for p in paths:
        p = Path(p)
        if not p.is_file():
            raise ConfigError("config", f"file not found: {p}")
        try:
            cp.read_string(p.read_text(), source=str(p))
        except configparser.DuplicateOptionError as exc:
            raise ConfigError(f"{exc.section}.{exc.option}", "duplicate key") from exc
        except configparser.DuplicateSectionError as exc:
            raise ConfigError(exc.section, "duplicate section") from exc
        except configparser.Error as exc:
            raise ConfigError("config", f"malformed file {p}: {exc}") from exc
    return cp


def parse_config(*paths, overrides: dict | None = None) -> RunConfig:
    """Read INI files in order (later files override earlier ones) and validate."""
    cp = _read(paths)
    values = {name: {} for name in SCHEMA}
    for section in cp.sections():
        if section not in SCHEMA:
            raise ConfigError(section, "unknown section")
        for key, raw in cp.items(section):
            if key not in SCHEMA[section]:
                raise ConfigError(f"{section}.{key}", "unknown key")
            try:
                values[section][key] = SCHEMA[section][key](raw)
            except ValueError as exc:
                raise ConfigError(f"{section}.{key}", f"cannot parse {raw!r}") from exc
    for dotted, v in (overrides or {}).items():
        section, key = dotted.split(".", 1)
        values[section][key] = v
    cfg = RunConfig(**{name: cls(**values[name]) for name, cls in _SECTIONS.items()})
    validate(cfg)
    return cfg


def _need(cond: bool, key: str, message: str):
    if not cond:
        raise ConfigError(key, message)


def _finite(x) -> bool:
    return isinstance(x, (int, float)) and math.isfinite(x)


def validate(cfg: RunConfig) -> None:
    """Raise ``ConfigError`` on the first violated invariant."""
    d = cfg.domain
    for k in ("x_min", "x_max", "y_min", "y_max"):
        _need(_finite(getattr(d, k)), f"domain.{k}", "must be finite")
    _need(d.x_max > d.x_min, "domain.x_max", "must exceed x_min")
    _need(d.y_max > d.y_min, "domain.y_max", "must exceed y_min")
    _need(cfg.grid.n1 >= 2, "grid.n1", "need at least 2 cells")
    _need(cfg.grid.n2 >= 2, "grid.n2", "need at least 2 cells")

    a = cfg.anisotropy
    _need(a.kind in ("isotropic", "quadratic", "abs"), "anisotropy.kind", f"unknown kind {a.kind!r}")
    for k in ("g11", "g12", "g22", "eps_abs"):
        _need(_finite(getattr(a, k)), f"anisotropy.{k}", "must be finite")
    if a.kind == "quadratic":
        _need(a.g11 > 0, "anisotropy.g11", "must be positive")
        _need(a.g11 * a.g22 - a.g12 * a.g12 > 0, "anisotropy.g12", "G is not positive definite")
    if a.kind == "abs":
        _need(a.eps_abs > 0, "anisotropy.eps_abs", "must be positive")

    _need(cfg.bc.kind in ("dirichlet", "neumann"), "bc.kind", f"unknown kind {cfg.bc.kind!r}")
    _need(cfg.bc.dirichlet in ("zero", "mms_zeta"), "bc.dirichlet", f"unknown preset {cfg.bc.dirichlet!r}")

    ini = cfg.initial
    _need(ini.preset in ("zero", "sine_radial", "mms_zeta", "csv_path"), "initial.preset", f"unknown preset {ini.preset!r}")
    if ini.preset == "csv_path":
        _need(bool(ini.path), "initial.path", "required with preset csv_path")

    t = cfg.time
    _need(_finite(t.t_end) and t.t_end > 0, "time.t_end", "must be positive")
    _need(t.snapshot_count >= 2, "time.snapshot_count", "need at least 2")
    for s in t.snapshot_times:
        _need(_finite(s) and 0.0 <= s <= t.t_end, "time.snapshot_times", f"{s} outside [0, t_end]")
    _need(t.tolerance > 0, "time.tolerance", "must be positive (inf selects fixed steps)")
    _need(_finite(t.dt_min) and t.dt_min > 0, "time.dt_min", "must be positive")
    _need(_finite(t.dt_init) and t.dt_init >= t.dt_min, "time.dt_init", "must lie in [dt_min, dt_max]")
    _need(_finite(t.dt_max) and t.dt_max >= t.dt_init, "time.dt_max", "must be at least dt_init")
    _need(0 < t.safety <= 1, "time.safety", "must lie in (0, 1]")

    m = cfg.mms
    _need(_finite(m.r) and m.r > 0, "mms.r", "must be positive")
    _need(m.n > 0 and m.n % 2 == 0, "mms.n", "must be a positive even integer")
    _need(_finite(m.sigma) and m.sigma > 0, "mms.sigma", "must be positive")
    _need(m.tau_levels >= 1, "mms.tau_levels", "need at least 1 interval")
    _need(len(m.meshes) >= 1 and all(n >= 2 for n in m.meshes), "mms.meshes", "need mesh sizes >= 2")
    _need(m.forcing_nodes >= 2, "mms.forcing_nodes", "need at least 2")

    fm = cfg.output.formats
    _need(len(fm) >= 1 and set(fm) <= {"csv", "vtk"}, "output.formats", f"expected csv and/or vtk, got {fm}")
    _need(bool(cfg.output.directory), "output.directory", "must not be empty")

    _need(cfg.wulff.n_samples >= 8, "wulff.n_samples", "need at least 8")
    for q in cfg.wulff.latitudes:
        _need(_finite(q) and abs(q) < 1.0, "wulff.latitudes", f"latitude {q} must lie in (-1, 1)")
