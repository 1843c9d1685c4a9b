"""Flat binary weight container with a JSON sidecar.

Layout of ``<path>``:

    bytes 0-3    magic b"RNLB"
    byte  4      format version (1)
    byte  5      architecture id (index into ARCH_IDS)
    byte  6      gate id (0 logistic, 1 hard)
    byte  7      reserved (0)
    bytes 8-11   n, unsigned 32-bit little-endian
    bytes 12-15  m, unsigned 32-bit little-endian
    bytes 16-19  array count, unsigned 32-bit little-endian
    bytes 20-    arrays, concatenated little-endian float64, in the cell's
                 fixed slot order, then any extra arrays (e.g. a classifier
                 head) in their dict order

``<path>.json`` lists every array's name, shape, and absolute byte offset so
the container can be read without this code.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ..linalg import GATE_FNS
from .base import CellParams, get_cell, slot_shape

MAGIC = b"RNLB"
VERSION = 1
ARCH_IDS = ("rnn", "gru", "lstm", "plstm", "litelstm")
_HEADER = struct.Struct("<4sBBBBIII")


def save_params(path: str | Path, params: CellParams, extra: dict[str, np.ndarray] | None = None) -> None:
    """Write cell parameters (and optional extra named arrays) to ``path``."""
    path = Path(path)
    cell = get_cell(params.arch)
    extra = extra or {}
    names = [name for name, _ in cell.slots] + list(extra)
    all_arrays = dict(params.arrays, **extra)
    header = _HEADER.pack(
        MAGIC,
        VERSION,
        ARCH_IDS.index(params.arch),
        GATE_FNS.index(params.gate_fn),
        0,
        params.n,
        params.m,
        len(names),
    )
    sidecar: dict = {
        "format": "rnlb-v1",
        "arch": params.arch,
        "n": params.n,
        "m": params.m,
        "gate_fn": params.gate_fn,
        "arrays": [],
    }
    offset = _HEADER.size
    with open(path, "wb") as fh:
        fh.write(header)
        for name in names:
            arr = np.ascontiguousarray(all_arrays[name], dtype="<f8")
            sidecar["arrays"].append({
                "name": name,
                "shape": list(arr.shape),
                "offset": offset,
                "dtype": "<f8",
            })
            fh.write(arr.tobytes())
            offset += arr.nbytes
    with open(path.with_name(path.name + ".json"), "w") as fh:
        json.dump(sidecar, fh, indent=2)


def load_params(path: str | Path) -> tuple[CellParams, dict[str, np.ndarray]]:
    """Read a container written by :func:`save_params`.

    Returns the cell parameters plus a dict of any extra arrays that were
    appended after the cell's slots.
    """
    path = Path(path)
    blob = path.read_bytes()
    if len(blob) < _HEADER.size:
        raise ValueError(f"{path}: truncated header, file is {len(blob)} bytes")
    magic, version, arch_id, gate_id, _, n, m, count = _HEADER.unpack_from(blob, 0)
    if magic != MAGIC:
        raise ValueError(f"{path}: bad magic {magic!r} at byte 0, expected {MAGIC!r}")
    if version != VERSION:
        raise ValueError(f"{path}: unsupported format version {version}")
    if arch_id >= len(ARCH_IDS) or gate_id >= len(GATE_FNS):
        raise ValueError(f"{path}: invalid architecture/gate id ({arch_id}, {gate_id})")
    arch = ARCH_IDS[arch_id]
    cell = get_cell(arch)
    if count < len(cell.slots):
        raise ValueError(
            f"{path}: header declares {count} arrays but {arch} requires {len(cell.slots)}"
        )

    offset = _HEADER.size
    arrays: dict[str, np.ndarray] = {}
    for name, kind in cell.slots:
        shape = slot_shape(kind, n, m)
        nbytes = 8 * int(np.prod(shape))
        if offset + nbytes > len(blob):
            raise ValueError(f"{path}: truncated at byte {len(blob)} while reading {name!r}")
        arrays[name] = np.frombuffer(blob, dtype="<f8", count=nbytes // 8, offset=offset).reshape(shape).copy()
        offset += nbytes

    # Extra arrays carry no shape in the header; recover them from the sidecar.
    extra: dict[str, np.ndarray] = {}
    n_extra = count - len(cell.slots)
    if n_extra:
        sidecar_path = path.with_name(path.name + ".json")
        if not sidecar_path.exists():
            raise ValueError(f"{path}: {n_extra} extra arrays but sidecar {sidecar_path} is missing")
        with open(sidecar_path) as fh:
            sidecar = json.load(fh)
        for entry in sidecar["arrays"][len(cell.slots):]:
            shape = tuple(entry["shape"])
            nbytes = 8 * int(np.prod(shape))
            off = entry["offset"]
            if off + nbytes > len(blob):
                raise ValueError(f"{path}: truncated while reading extra array {entry['name']!r}")
            extra[entry["name"]] = (
                np.frombuffer(blob, dtype="<f8", count=nbytes // 8, offset=off).reshape(shape).copy()
            )

    params = CellParams(arch=arch, n=n, m=m, gate_fn=GATE_FNS[gate_id], arrays=arrays)
    return params, extra
