"""Dense real third-order tensors.

A tensor is a float64 ``numpy.ndarray`` of shape ``(n1, n2, n3)``. Element
``t[i, j, k]`` is entry ``(i+1, j+1, k+1)`` in 1-based notation. The flat
linearization used by every serialized form runs the first index fastest and
the third slowest, which is numpy's Fortran (``order="F"``) ravel.

Public functions never return views into their arguments.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import DimensionError

TNS_MAGIC = b"TNS1"
_TNS_HEADER = struct.Struct("<4sIII")


def as_tensor3(data, copy: bool = True) -> np.ndarray:
    """Validate ``data`` as a real third-order tensor and return it as float64.

    2-D input is promoted to ``n3 = 1``.
    """
    arr = np.asarray(data)
    if np.iscomplexobj(arr):
        raise TypeError("tensor data must be real")
    if arr.ndim == 2:
        arr = arr[:, :, np.newaxis]
    if arr.ndim != 3:
        raise DimensionError(f"expected a third-order tensor, got ndim={arr.ndim}")
    if 0 in arr.shape:
        raise DimensionError(f"all dimensions must be positive, got {arr.shape}")
    arr = np.array(arr, dtype=np.float64, copy=copy)
    if not np.all(np.isfinite(arr)):
        raise ValueError("tensor contains NaN or Inf")
    return arr


def from_data(dims, data) -> np.ndarray:
    """Build a tensor from a flat sequence in the first-index-fastest order."""
    dims = tuple(int(d) for d in dims)
    flat = np.asarray(data, dtype=np.float64).ravel()
    if len(dims) != 3 or min(dims) < 1:
        raise DimensionError(f"invalid dims {dims}")
    if flat.size != dims[0] * dims[1] * dims[2]:
        raise DimensionError(f"{flat.size} values do not fill dims {dims}")
    return as_tensor3(flat.reshape(dims, order="F"))


def to_data(t) -> np.ndarray:
    """Flatten ``t`` in the first-index-fastest order."""
    return np.asarray(t, dtype=np.float64).ravel(order="F").copy()


def frontal_slice(t, i: int) -> np.ndarray:
    """Return frontal slice ``i`` (1-based) as a new ``n1 x n2`` matrix."""
    t = np.asarray(t)
    n3 = t.shape[2]
    if not 1 <= i <= n3:
        raise IndexError(f"slice index {i} outside 1..{n3}")
    return t[:, :, i - 1].copy()


def unfold(t) -> np.ndarray:
    """Stack the frontal slices vertically into an ``(n1*n3) x n2`` matrix."""
    t = np.asarray(t)
    n1, n2, n3 = t.shape
    return np.ascontiguousarray(np.moveaxis(t, 2, 0).reshape(n3 * n1, n2))


def fold(m, dims) -> np.ndarray:
    """Inverse of :func:`unfold`."""
    m = np.asarray(m)
    n1, n2, n3 = (int(d) for d in dims)
    if m.ndim != 2 or m.shape != (n1 * n3, n2):
        raise DimensionError(
            f"matrix of shape {m.shape} cannot fold to dims {(n1, n2, n3)}"
        )
    return np.ascontiguousarray(np.moveaxis(m.reshape(n3, n1, n2), 0, 2))


def bcirc(t) -> np.ndarray:
    """Block circulant matrix: block ``(p, q)`` is slice ``(p - q) mod n3``."""
    t = np.asarray(t)
    n1, n2, n3 = t.shape
    out = np.empty((n1 * n3, n2 * n3), dtype=t.dtype)
    for p in range(n3):
        for q in range(n3):
            out[p * n1:(p + 1) * n1, q * n2:(q + 1) * n2] = t[:, :, (p - q) % n3]
    return out


def _same_dims(a, b):
    if a.shape != b.shape:
        raise DimensionError(f"dims differ: {a.shape} vs {b.shape}")


def inner(a, b) -> float:
    a = np.asarray(a)
    b = np.asarray(b)
    _same_dims(a, b)
    return float(np.vdot(a, b).real)


def trace_tensor(t) -> float:
    """Sum of the traces of all frontal slices."""
    t = np.asarray(t)
    if t.shape[0] != t.shape[1]:
        raise DimensionError(f"frontal slices are not square: {t.shape[:2]}")
    return float(np.trace(t, axis1=0, axis2=1).sum().real)


class Norms(NamedTuple):
    l1: float
    linf: float
    fro: float


def norms(t) -> Norms:
    a = np.abs(np.asarray(t))
    return Norms(float(a.sum()), float(a.max()), float(np.sqrt(np.sum(a * a))))


def tns_bytes(t) -> bytes:
    t = as_tensor3(t, copy=False)
    n1, n2, n3 = t.shape
    return _TNS_HEADER.pack(TNS_MAGIC, n1, n2, n3) + to_data(t).astype("<f8").tobytes()


def tns_from_bytes(buf: bytes) -> np.ndarray:
    if len(buf) < _TNS_HEADER.size:
        raise ValueError("truncated TNS1 header")
    magic, n1, n2, n3 = _TNS_HEADER.unpack_from(buf)
    if magic != TNS_MAGIC:
        raise ValueError(f"bad magic {magic!r}, expected {TNS_MAGIC!r}")
    count = n1 * n2 * n3
    body = buf[_TNS_HEADER.size:]
    if len(body) != 8 * count:
        raise ValueError(f"TNS1 body holds {len(body)} bytes, expected {8 * count}")
    return from_data((n1, n2, n3), np.frombuffer(body, dtype="<f8"))


def save_tns(t, path) -> None:
    Path(path).write_bytes(tns_bytes(t))


def load_tns(path) -> np.ndarray:
    return tns_from_bytes(Path(path).read_bytes())
