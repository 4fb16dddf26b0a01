"""CSV and legacy-VTK writers shared by the command-line tools."""
from __future__ import annotations

import csv
import io
import os
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__


def run_timestamp() -> str:
    """ISO-8601 UTC stamp; honours ``SOURCE_DATE_EPOCH`` for byte-reproducible output."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    when = (datetime.fromtimestamp(int(epoch), tz=timezone.utc) if epoch
            else datetime.now(timezone.utc).replace(microsecond=0))
    return when.isoformat().replace("+00:00", "Z")


def metadata_line(command: str, **meta) -> str:
    items = " ".join(f"{k}={v}" for k, v in meta.items())
    return f"# stirmix {__version__} {command} created={run_timestamp()} {items}".rstrip()


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, header, rows, command: str, **meta) -> None:
    buf = io.StringIO()
    buf.write(metadata_line(command, **meta) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def read_csv(path):
    """Return ``(metadata, header, rows)`` with rows as lists of strings."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    meta = lines[0] if lines and lines[0].startswith("#") else ""
    body = lines[1:] if meta else lines
    rows = list(csv.reader(body))
    return meta, rows[0], rows[1:]


def vertex_values(field) -> np.ndarray:
    """Average of the element traces at each mesh vertex."""
    mesh = field.space.mesh
    tri = mesh.triangles
    pts = mesh.vertices[tri]  # (nK, 3, 2)
    idx = np.repeat(np.arange(len(tri)), 3)
    vals = field.evaluate(idx, pts.reshape(-1, 2))
    acc = np.bincount(tri.ravel(), weights=vals, minlength=mesh.n_vertices)
    cnt = np.bincount(tri.ravel(), minlength=mesh.n_vertices)
    return acc / np.maximum(cnt, 1)


def write_vtk(path, mesh, cell_data: dict | None = None, point_data: dict | None = None,
              title: str = "stirmix") -> None:
    """Legacy ASCII unstructured grid made of triangles (VTK cell type 5)."""
    out = ["# vtk DataFile Version 3.0", title[:255], "ASCII", "DATASET UNSTRUCTURED_GRID",
           f"POINTS {mesh.n_vertices} double"]
    out += [f"{x!r} {y!r} 0.0" for x, y in mesh.vertices.tolist()]
    nt = mesh.n_triangles
    out.append(f"CELLS {nt} {4 * nt}")
    out += [f"3 {a} {b} {c}" for a, b, c in mesh.triangles.tolist()]
    out.append(f"CELL_TYPES {nt}")
    out += ["5"] * nt
    for kind, data, n in (("CELL_DATA", cell_data, nt), ("POINT_DATA", point_data, mesh.n_vertices)):
        if not data:
            continue
        out.append(f"{kind} {n}")
        for name, vals in data.items():
            vals = np.asarray(vals, dtype=float)
            if vals.shape != (n,):
                raise ValueError(f"{name}: expected {n} values, got {vals.shape}")
            out += [f"SCALARS {name} double 1", "LOOKUP_TABLE default"]
            out += [repr(v) for v in vals.tolist()]
    Path(path).write_text("\n".join(out) + "\n", encoding="ascii")


def write_field_vtk(path, field, name: str = "theta", vertex: bool = True, title: str = "") -> None:
    pd = {name: vertex_values(field)} if vertex else None
    write_vtk(path, field.space.mesh, {name + "_avg": field.cell_averages()}, pd,
              title or name)
