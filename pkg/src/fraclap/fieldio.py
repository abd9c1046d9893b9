"""Field persistence: CSV (coordinates, value) and a little-endian binary container.

Binary layout: ``dim`` and ``n`` as int64, ``L`` as float64 (all little
endian), followed by ``n**dim`` float64 samples in row-major order.
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from fraclap.grid import Field, make_grid

_HEADER = struct.Struct("<qqd")
BINARY_SUFFIXES = (".bin", ".fld")


def write_csv(f: Field, path) -> None:
    g = f.grid
    names = ["x", "y"][: g.dim] + ["value"]
    cols = [c.ravel() for c in g.coords] + [f.values.ravel()]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for row in zip(*cols):
            w.writerow([repr(float(v)) for v in row])


def read_csv(path) -> Field:
    """Rebuild a field from a CSV written by :func:`write_csv`.

    The grid is recovered from the coordinate columns, which must form a
    complete uniform periodic lattice.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], np.array(rows[1:], dtype=np.float64)
    dim = len(header) - 1
    if dim not in (1, 2):
        raise ValueError(f"{path}: expected 1 or 2 coordinate columns, found {dim}")
    n = round(len(body) ** (1.0 / dim))
    if n**dim != len(body):
        raise ValueError(f"{path}: {len(body)} rows do not form an n^{dim} lattice")
    x = np.unique(body[:, 0])
    h = x[1] - x[0]
    L = -float(x[0])
    if not np.isclose(2 * L, n * h, rtol=1e-9):
        raise ValueError(f"{path}: coordinates are not a periodic [-L, L) lattice")
    grid = make_grid(dim, n, L)
    return Field(grid, body[:, -1].reshape(grid.shape))


def write_binary(f: Field, path) -> None:
    g = f.grid
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(g.dim, g.n, g.L))
        fh.write(np.ascontiguousarray(f.values, dtype="<f8").tobytes())


def read_binary(path) -> Field:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated header")
    dim, n, L = _HEADER.unpack_from(raw)
    grid = make_grid(dim, n, L)
    body = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if body.size != grid.size:
        raise ValueError(f"{path}: expected {grid.size} samples, found {body.size}")
    return Field(grid, body.reshape(grid.shape).astype(np.float64))


def save_field(f: Field, path) -> None:
    if Path(path).suffix in BINARY_SUFFIXES:
        write_binary(f, path)
    else:
        write_csv(f, path)


def load_field(path) -> Field:
    if Path(path).suffix in BINARY_SUFFIXES:
        return read_binary(path)
    return read_csv(path)
