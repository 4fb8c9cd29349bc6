"""Binary snapshot files.

Layout (all little-endian):

    bytes 0..3    magic b"FALN"
    bytes 4..7    format version, uint32 (currently 1)
    bytes 8..11   n_points, uint32
    bytes 12..19  alpha, float64
    bytes 20..27  t, float64
    bytes 28..35  mass, float64
    then three arrays of n_points float64 each: u, rho, e

Round trips are bit-exact; loaders reject unknown versions and truncated
files.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dynamics import State, compute_derived
from .spectral import Field, TorusGrid

__all__ = ["MAGIC", "FORMAT_VERSION", "SnapshotError", "save_snapshot", "load_snapshot", "LoadedSnapshot"]

MAGIC = b"FALN"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIIddd")


class SnapshotError(RuntimeError):
    pass


@dataclass
class LoadedSnapshot:
    state: State
    e: Field
    mass: float


def save_snapshot(path, state: State, e: Field | None = None) -> None:
    if e is None:
        e = compute_derived(state).e
    path = Path(path)
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, state.grid.n_points,
                          state.alpha, state.t, state.mass())
    with open(path, "wb") as fh:
        fh.write(header)
        for arr in (state.u.samples, state.rho.samples, e.samples):
            fh.write(np.asarray(arr, "<f8").tobytes())


def load_snapshot(path, padding_factor: int = 2) -> LoadedSnapshot:
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise SnapshotError(f"{path}: truncated header ({len(raw)} bytes)")
    magic, version, n_points, alpha, t, mass = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise SnapshotError(f"{path}: bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise SnapshotError(f"{path}: unsupported format version {version}")
    need = _HEADER.size + 3 * 8 * n_points
    if len(raw) != need:
        raise SnapshotError(f"{path}: expected {need} bytes, found {len(raw)}")
    body = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    grid = TorusGrid(n_points, padding_factor=padding_factor)
    u = Field(grid, body[:n_points].copy())
    rho = Field(grid, body[n_points:2 * n_points].copy())
    e = Field(grid, body[2 * n_points:].copy())
    return LoadedSnapshot(state=State(u, rho, t, alpha), e=e, mass=mass)
