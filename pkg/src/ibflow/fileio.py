"""Plain-text geometry decks and simulation output files.

Geometry decks follow the usual immersed-boundary tooling conventions:
a count header line, then one whitespace-separated record per line, with
1-based node indices in the files (converted to 0-based in memory).

* point/vertex files: "x y" per node
* target decks:       "index k_target"
* spring decks:       "master slave k_spring rest_length"
* beam decks:         "idx1 idx2 idx3 k_beam curv_x curv_y"

Field and marker snapshots are legacy-text VTK, chosen so golden files
stay diffable; all writers pin '\n' line endings and C-locale number
formatting so output bytes are platform independent.
"""

from __future__ import annotations

import csv
import os

import numpy as np

from .fluid import vorticity

__all__ = [
    "read_points", "write_points", "read_target_deck", "write_target_deck",
    "read_spring_deck", "write_spring_deck", "read_beam_deck",
    "write_beam_deck", "write_scalar_vtk", "read_scalar_vtk",
    "write_vector_vtk", "write_lag_points_vtk", "read_lag_points_vtk",
    "write_fields_vtk", "write_timeseries_csv", "read_timeseries_csv",
    "TIMESERIES_HEADER",
]

_FMT = "%.16e"


def _data_lines(path):
    """Non-blank lines of a text file with their 1-based line numbers."""
    out = []
    with open(path, "r") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if line:
                out.append((lineno, line))
    return out


def _parse_row(path, lineno, line, n_cols):
    parts = line.split()
    if len(parts) != n_cols:
        raise ValueError(f"{path}:{lineno}: expected {n_cols} columns, "
                         f"got {len(parts)}")
    try:
        return [float(tok) for tok in parts]
    except ValueError:
        raise ValueError(f"{path}:{lineno}: non-numeric token in {line!r}") from None


def _read_deck(path, n_cols):
    """Count-headed deck -> list of float rows, validated against the header."""
    lines = _data_lines(path)
    if not lines:
        raise ValueError(f"{path}: empty file")
    lineno, header = lines[0]
    try:
        count = int(header)
    except ValueError:
        raise ValueError(f"{path}:{lineno}: expected a record count, "
                         f"got {header!r}") from None
    body = lines[1:]
    if len(body) != count:
        raise ValueError(f"{path}: header says {count} records, "
                         f"file has {len(body)}")
    return [_parse_row(path, ln, line, n_cols) for ln, line in body]


def read_points(path):
    """Load an (n, 2) point matrix from a vertex or point-state file.

    A leading single-integer line is taken as the record count and checked;
    files that start directly with an "x y" row are accepted as headerless.
    """
    lines = _data_lines(path)
    if not lines:
        raise ValueError(f"{path}: empty file")
    if len(lines[0][1].split()) == 1:
        rows = _read_deck(path, 2)
    else:
        rows = [_parse_row(path, ln, line, 2) for ln, line in lines]
    return np.array(rows, dtype=float)


def write_points(path, points, header=True):
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] != 2:
        raise ValueError("points must be an (n, 2) array")
    with open(path, "w", newline="\n") as fh:
        if header:
            fh.write(f"{len(points)}\n")
        for x, y in points:
            fh.write(f"{_FMT % x} {_FMT % y}\n")


def read_target_deck(path):
    """-> (indices, stiffness) with 0-based indices."""
    rows = np.array(_read_deck(path, 2), dtype=float).reshape(-1, 2)
    idx = rows[:, 0].astype(int)
    if np.any(rows[:, 0] != idx) or np.any(idx < 1):
        raise ValueError(f"{path}: node indices must be positive integers")
    return idx - 1, rows[:, 1].copy()


def write_target_deck(path, idx, k):
    idx = np.asarray(idx, dtype=int)
    k = np.asarray(k, dtype=float)
    with open(path, "w", newline="\n") as fh:
        fh.write(f"{len(idx)}\n")
        for i, ki in zip(idx, k):
            fh.write(f"{i + 1} {_FMT % ki}\n")


def read_spring_deck(path):
    """-> (master, slave, stiffness, rest_length) with 0-based indices."""
    rows = np.array(_read_deck(path, 4), dtype=float).reshape(-1, 4)
    ends = rows[:, :2].astype(int)
    if np.any(rows[:, :2] != ends) or np.any(ends < 1):
        raise ValueError(f"{path}: node indices must be positive integers")
    return ends[:, 0] - 1, ends[:, 1] - 1, rows[:, 2].copy(), rows[:, 3].copy()


def write_spring_deck(path, master, slave, k, rest):
    with open(path, "w", newline="\n") as fh:
        fh.write(f"{len(master)}\n")
        for m, s, ki, ri in zip(master, slave, k, rest):
            fh.write(f"{int(m) + 1} {int(s) + 1} {_FMT % ki} {_FMT % ri}\n")


def read_beam_deck(path):
    """-> (i1, i2, i3, stiffness, curvature (n, 2)) with 0-based indices."""
    rows = np.array(_read_deck(path, 6), dtype=float).reshape(-1, 6)
    triples = rows[:, :3].astype(int)
    if np.any(rows[:, :3] != triples) or np.any(triples < 1):
        raise ValueError(f"{path}: node indices must be positive integers")
    return (triples[:, 0] - 1, triples[:, 1] - 1, triples[:, 2] - 1,
            rows[:, 3].copy(), rows[:, 4:6].copy())


def write_beam_deck(path, i1, i2, i3, k, curvature):
    curvature = np.asarray(curvature, dtype=float).reshape(-1, 2)
    with open(path, "w", newline="\n") as fh:
        fh.write(f"{len(i1)}\n")
        for a, b, c, ki, (cx, cy) in zip(i1, i2, i3, k, curvature):
            fh.write(f"{int(a) + 1} {int(b) + 1} {int(c) + 1} "
                     f"{_FMT % ki} {_FMT % cx} {_FMT % cy}\n")


def _vtk_grid_header(fh, title, nx, ny, h):
    fh.write("# vtk DataFile Version 2.0\n")
    fh.write(f"{title}\n")
    fh.write("ASCII\n")
    fh.write("DATASET STRUCTURED_POINTS\n")
    fh.write(f"DIMENSIONS {nx} {ny} 1\n")
    fh.write("ORIGIN 0 0 0\n")
    fh.write(f"SPACING {_FMT % h} {_FMT % h} {_FMT % h}\n")
    fh.write(f"POINT_DATA {nx * ny}\n")


def write_scalar_vtk(path, name, field, h):
    """Scalar grid field, VTK point order (x varies fastest)."""
    field = np.asarray(field, dtype=float)
    nx, ny = field.shape
    with open(path, "w", newline="\n") as fh:
        _vtk_grid_header(fh, name, nx, ny, h)
        fh.write(f"SCALARS {name} double\n")
        fh.write("LOOKUP_TABLE default\n")
        for value in field.T.ravel():
            fh.write(f"{_FMT % value}\n")


def read_scalar_vtk(path):
    """-> (field (nx, ny), spacing h) from a scalar file written above."""
    with open(path, "r") as fh:
        lines = fh.read().splitlines()
    dims = spacing = None
    start = None
    for i, line in enumerate(lines):
        if line.startswith("DIMENSIONS"):
            dims = [int(tok) for tok in line.split()[1:]]
        elif line.startswith("SPACING"):
            spacing = float(line.split()[1])
        elif line.startswith("LOOKUP_TABLE"):
            start = i + 1
            break
    if dims is None or start is None:
        raise ValueError(f"{path}: not a scalar grid file")
    nx, ny = dims[0], dims[1]
    values = np.array([float(tok) for line in lines[start:start + nx * ny]
                       for tok in line.split()], dtype=float)
    if values.size != nx * ny:
        raise ValueError(f"{path}: expected {nx * ny} values, got {values.size}")
    return values.reshape(ny, nx).T.copy(), spacing


def write_vector_vtk(path, name, u, v, h):
    """Planar vector grid field; the third component is written as zero."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError("component shapes differ")
    nx, ny = u.shape
    with open(path, "w", newline="\n") as fh:
        _vtk_grid_header(fh, name, nx, ny, h)
        fh.write(f"VECTORS {name} double\n")
        for uu, vv in zip(u.T.ravel(), v.T.ravel()):
            fh.write(f"{_FMT % uu} {_FMT % vv} {_FMT % 0.0}\n")


def write_lag_points_vtk(path, points):
    """Marker positions as a VTK polydata vertex cloud."""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    n = len(points)
    with open(path, "w", newline="\n") as fh:
        fh.write("# vtk DataFile Version 2.0\n")
        fh.write("lagrangian points\n")
        fh.write("ASCII\n")
        fh.write("DATASET POLYDATA\n")
        fh.write(f"POINTS {n} double\n")
        for x, y in points:
            fh.write(f"{_FMT % x} {_FMT % y} {_FMT % 0.0}\n")
        fh.write(f"VERTICES {n} {2 * n}\n")
        for i in range(n):
            fh.write(f"1 {i}\n")


def read_lag_points_vtk(path):
    """-> (n, 2) positions from a marker file written above."""
    with open(path, "r") as fh:
        lines = fh.read().splitlines()
    for i, line in enumerate(lines):
        if line.startswith("POINTS"):
            n = int(line.split()[1])
            rows = [_parse_row(path, i + 2 + j, lines[i + 1 + j], 3)
                    for j in range(n)]
            return np.array(rows, dtype=float)[:, :2].copy()
    raise ValueError(f"{path}: no POINTS block found")


def write_fields_vtk(state, lag_points, dump_index, out_dir):
    """Write one dump: u-magnitude, vorticity, pressure, velocity, markers.

    Returns the list of files written, each named <field>.<index>.vtk with
    a six-digit zero-padded dump index.
    """
    os.makedirs(out_dir, exist_ok=True)
    tag = f"{dump_index:06d}"
    h = state.h
    paths = []

    def name(stem):
        p = os.path.join(out_dir, f"{stem}.{tag}.vtk")
        paths.append(p)
        return p

    write_scalar_vtk(name("uMag"), "uMag", np.hypot(state.u, state.v), h)
    write_scalar_vtk(name("vorticity"), "vorticity", vorticity(state), h)
    write_scalar_vtk(name("pressure"), "pressure", state.p, h)
    write_vector_vtk(name("velocity"), "velocity", state.u, state.v, h)
    if lag_points is not None:
        write_lag_points_vtk(name("lag"), lag_points)
    return paths


TIMESERIES_HEADER = ("time", "stroke", "head_x", "head_y",
                     "distance_bl", "speed_bl_per_stroke")


def write_timeseries_csv(path, records):
    """Swim-metric rows: time, stroke count, head position, progress."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TIMESERIES_HEADER)
        for rec in records:
            row = list(rec)
            if len(row) != len(TIMESERIES_HEADER):
                raise ValueError(f"record has {len(row)} fields, "
                                 f"expected {len(TIMESERIES_HEADER)}")
            writer.writerow(f"{float(val):.12g}" for val in row)


def read_timeseries_csv(path):
    """-> list of float tuples, skipping the header row."""
    with open(path, "r", newline="") as fh:
        reader = csv.reader(fh)
        rows = list(reader)
    if not rows or tuple(rows[0]) != TIMESERIES_HEADER:
        raise ValueError(f"{path}: missing or unexpected header")
    return [tuple(float(tok) for tok in row) for row in rows[1:]]
