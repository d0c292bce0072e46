"""Snapshot, energy, EOC and Wulff serialization (CSV and legacy VTK)."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .errors import ContractError
from .grid import Grid

SNAPSHOT_FIELDS = ("u", "w", "Q", "H")
# 17 significant digits round-trip every double exactly
FMT = "%.17g"


def time_tag(t: float) -> str:
    return f"{t:.9e}"


def snapshot_name(t: float, ext: str = "csv") -> str:
    return f"snapshot_t{time_tag(t)}.{ext}"


def _column(a: np.ndarray) -> np.ndarray:
    # rows run i fastest, then j
    return np.asarray(a, dtype=float).T.ravel()


def write_snapshot_csv(path, grid: Grid, fields: dict) -> Path:
    """Write ``x,y,u,w,Q,H`` rows with ``i`` varying fastest."""
    missing = [k for k in SNAPSHOT_FIELDS if k not in fields]
    if missing:
        raise ContractError(f"snapshot lacks fields {missing}")
    X, Y = grid.meshgrid()
    cols = [_column(X), _column(Y)] + [_column(fields[k]) for k in SNAPSHOT_FIELDS]
    data = np.column_stack(cols)
    path = Path(path)
    np.savetxt(path, data, fmt=FMT, delimiter=",", header="x,y," + ",".join(SNAPSHOT_FIELDS), comments="")
    return path


def read_snapshot_csv(path, grid: Grid | None = None) -> dict:
    """Read a snapshot CSV back into node arrays keyed by column name.

    With ``grid`` given the node coordinates must match it; otherwise the
    grid is reconstructed from the coordinate columns.
    """
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip().split(",")
    if header[:2] != ["x", "y"]:
        raise ContractError(f"{path}: expected columns starting with x,y, got {header}")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    xs, ys = np.unique(data[:, 0]), np.unique(data[:, 1])
    if grid is None:
        grid = Grid.from_bounds(xs[0], xs[-1], ys[0], ys[-1], len(xs) - 1, len(ys) - 1)
    if data.shape[0] != grid.shape[0] * grid.shape[1]:
        raise ContractError(f"{path}: {data.shape[0]} rows do not match grid {grid.shape}")
    out = {}
    for k, name in enumerate(header):
        out[name] = data[:, k].reshape(grid.shape[1], grid.shape[0]).T.copy()
    X, Y = grid.meshgrid()
    scale = max(1.0, float(np.abs(X).max()), float(np.abs(Y).max()))
    if not (np.allclose(out["x"], X, rtol=0, atol=1e-12 * scale) and np.allclose(out["y"], Y, rtol=0, atol=1e-12 * scale)):
        raise ContractError(f"{path}: node coordinates do not match the grid")
    out["grid"] = grid
    return out


def write_vtk(path, grid: Grid, fields: dict, title: str = "willmore snapshot") -> Path:
    """Legacy ASCII VTK ``STRUCTURED_POINTS`` with one ``SCALARS`` block per field."""
    nx, ny = grid.shape
    lines = [
        "# vtk DataFile Version 3.0",
        title,
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        f"DIMENSIONS {nx} {ny} 1",
        f"ORIGIN {grid.x_origin!r} {grid.y_origin!r} 0",
        f"SPACING {grid.h1!r} {grid.h2!r} 1",
        f"POINT_DATA {nx * ny}",
    ]
    for name, values in fields.items():
        lines.append(f"SCALARS {name} double 1")
        lines.append("LOOKUP_TABLE default")
        lines.extend(FMT % v for v in _column(values))
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


def write_energy_csv(path, reports) -> Path:
    path = Path(path)
    with path.open("w") as fh:
        fh.write("t,willmore,dissipation,drift\n")
        for r in reports:
            fh.write(",".join(FMT % v for v in (r.t, r.willmore, r.dissipation, r.drift)) + "\n")
    return path


def write_wulff_csv(path, samples: np.ndarray) -> Path:
    path = Path(path)
    np.savetxt(path, np.asarray(samples), fmt=FMT, delimiter=",", header="theta,x,y", comments="")
    return path


EOC_COLUMNS = ("mesh", "h", "err_l1", "eoc_l1", "err_l2", "eoc_l2", "err_linf", "eoc_linf")


def eoc_rows(records, eoc_fn) -> list:
    """Table rows from ``(mesh, ErrorRecord | None)`` pairs; ``None`` marks a failed mesh.

    The EOC of a row compares it with the previous successful row.
    """
    rows, prev = [], None
    for mesh, rec in records:
        if rec is None:
            rows.append({"mesh": mesh, "h": None, "status": "failed"})
            continue
        row = {"mesh": mesh, "h": rec.h, "status": "ok"}
        for norm in ("l1", "l2", "linf"):
            err = getattr(rec, f"err_{norm}")
            row[f"err_{norm}"] = err
            ok = prev is not None and err > 0 and getattr(prev, f"err_{norm}") > 0
            row[f"eoc_{norm}"] = eoc_fn(getattr(prev, f"err_{norm}"), err, prev.h, rec.h) if ok else None
        rows.append(row)
        prev = rec
    return rows


def _cell(row, col):
    if row["status"] == "failed" and col not in ("mesh",):
        return "failed" if col == "h" else ""
    v = row.get(col)
    if v is None:
        return ""
    if col == "mesh":
        return str(v)
    return FMT % v


def write_eoc_csv(path, rows) -> Path:
    path = Path(path)
    with path.open("w") as fh:
        fh.write(",".join(EOC_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(_cell(row, c) for c in EOC_COLUMNS) + "\n")
    return path


def format_eoc_table(rows, title: str = "") -> str:
    """Fixed-width text table with the same columns as the CSV."""

    def show(row, col):
        if row["status"] == "failed":
            return {"mesh": str(row["mesh"]), "h": "failed"}.get(col, "-")
        v = row.get(col)
        if v is None:
            return "-"
        if col == "mesh":
            return str(v)
        if col.startswith("eoc"):
            return f"{v:.3f}"
        return f"{v:.4e}" if math.isfinite(v) else str(v)

    cells = [list(EOC_COLUMNS)] + [[show(r, c) for c in EOC_COLUMNS] for r in rows]
    widths = [max(len(line[k]) for line in cells) for k in range(len(EOC_COLUMNS))]
    out = [title] if title else []
    for n, line in enumerate(cells):
        out.append("  ".join(s.rjust(w) for s, w in zip(line, widths)))
        if n == 0:
            out.append("  ".join("-" * w for w in widths))
    return "\n".join(out) + "\n"
