"""Binary snapshot files shared by both solvers.

Layout (little-endian): magic ``HYLM``, format version u32, nx ny nz u32,
then l1 l2 eps alpha t as f64, then one f64 array per velocity component in
x-fastest order (x, then y, then z).  Three components mean a scaled
Navier-Stokes state (v1, v2, w); two components mean a primitive-equations
state (v1, v2), flagged by the sentinel eps = alpha = 0.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .spectral import Grid, make_grid

MAGIC = b"HYLM"
VERSION = 1

_HEADER = struct.Struct("<4sIIII5d")


@dataclass(frozen=True)
class Snapshot:
    grid: Grid
    eps: float
    alpha: float
    t: float
    components: tuple  # physical-space f64 arrays, shape (nx, ny, nz)

    @property
    def is_pe(self):
        return len(self.components) == 2


def _to_x_fastest(arr):
    # in-memory axes are (x, y, z) C-order; the file wants x varying fastest
    return np.ascontiguousarray(np.transpose(arr, (2, 1, 0)))


def _from_x_fastest(flat, shape):
    nx, ny, nz = shape
    return np.ascontiguousarray(flat.reshape(nz, ny, nx).transpose(2, 1, 0))


def write_snapshot(path, grid: Grid, components, eps, alpha, t):
    """Write physical-space component arrays to one snapshot file."""
    comps = tuple(np.asarray(c, dtype=np.float64) for c in components)
    if len(comps) not in (2, 3):
        raise ValueError("snapshots hold 2 or 3 components")
    for c in comps:
        if c.shape != grid.shape:
            raise ValueError("component shape does not match grid")
    header = _HEADER.pack(MAGIC, VERSION, grid.nx, grid.ny, grid.nz,
                          grid.l1, grid.l2, float(eps), float(alpha), float(t))
    with open(path, "wb") as fh:
        fh.write(header)
        for c in comps:
            fh.write(_to_x_fastest(c).astype("<f8").tobytes())


def read_snapshot(path) -> Snapshot:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated snapshot header")
    magic, version, nx, ny, nz, l1, l2, eps, alpha, t = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise ValueError(f"{path}: unknown snapshot format version {version}")
    grid = make_grid(nx, ny, nz, l1, l2)
    body = raw[_HEADER.size:]
    per_comp = 8 * nx * ny * nz
    if len(body) % per_comp != 0:
        raise ValueError(f"{path}: body size {len(body)} is not a whole "
                         "number of components")
    n_comp = len(body) // per_comp
    if n_comp not in (2, 3):
        raise ValueError(f"{path}: expected 2 or 3 components, found {n_comp}")
    comps = []
    for i in range(n_comp):
        flat = np.frombuffer(body, dtype="<f8", count=nx * ny * nz,
                             offset=i * per_comp)
        comps.append(_from_x_fastest(flat, grid.shape))
    return Snapshot(grid, eps, alpha, t, tuple(comps))


def snapshot_name(index):
    return f"snap_{index:06d}.hylm"


def write_trajectory(outdir, grid, frames, eps, alpha):
    """Write a time-ordered list of (t, components) pairs to a directory."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, (t, comps) in enumerate(frames):
        p = outdir / snapshot_name(i)
        write_snapshot(p, grid, comps, eps, alpha, t)
        paths.append(p)
    return paths


def read_trajectory(directory):
    """Read all snapshots in a directory, ordered by filename."""
    paths = sorted(Path(directory).glob("snap_*.hylm"))
    if not paths:
        raise ValueError(f"no snapshots found in {directory}")
    return [read_snapshot(p) for p in paths]


def trajectory_checksum(directory):
    """SHA-256 over the snapshot files of a directory, in name order."""
    h = hashlib.sha256()
    for p in sorted(Path(directory).glob("snap_*.hylm")):
        h.update(p.name.encode())
        h.update(p.read_bytes())
    return h.hexdigest()
