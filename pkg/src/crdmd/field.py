"""Spatio-temporal field container, canonical vectorization, and FLD1 file I/O.

A field is a real-valued tensor with spatial resolution ``n1 x n2`` and ``m``
snapshots.  The canonical vector view is frame-major: snapshot t occupies
entries ``[t*N, (t+1)*N)`` with ``N = n1*n2``, and pixels inside a frame are
row-major (row index varies slowest).  Every module in the package relies on
this single ordering.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionError, FormatError

_MAGIC = b"FLD1"
_HEADER = struct.Struct("<4sIII")


@dataclass(frozen=True)
class Field:
    """Immutable spatio-temporal field.

    Parameters
    ----------
    n1, n2 : int
        Vertical and horizontal spatial resolution.
    m : int
        Number of snapshots.
    values : ndarray
        Flat float64 array of length ``n1*n2*m`` in canonical order.
    """

    n1: int
    n2: int
    m: int
    values: np.ndarray

    def __post_init__(self):
        if self.n1 < 1 or self.n2 < 1 or self.m < 1:
            raise DimensionError(
                f"field dimensions must be positive, got {self.n1}x{self.n2}x{self.m}"
            )
        values = np.ascontiguousarray(self.values, dtype=np.float64).ravel()
        if values.size != self.n1 * self.n2 * self.m:
            raise DimensionError(
                f"expected {self.n1 * self.n2 * self.m} values for a "
                f"{self.n1}x{self.n2}x{self.m} field, got {values.size}"
            )
        if not np.all(np.isfinite(values)):
            raise DimensionError("field values must be finite")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        """Pixels per snapshot."""
        return self.n1 * self.n2

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.n1, self.n2, self.m)

    def frames(self) -> np.ndarray:
        """Read-only view of shape ``(m, n1, n2)``."""
        return self.values.reshape(self.m, self.n1, self.n2)

    def snapshot_matrix(self) -> np.ndarray:
        """Snapshot matrix of shape ``(N, m)``: column t is snapshot t."""
        return self.values.reshape(self.m, self.n).T.copy()


def field_from_frames(frames: np.ndarray) -> Field:
    """Build a field from an ``(m, n1, n2)`` array of frames."""
    frames = np.asarray(frames, dtype=np.float64)
    if frames.ndim != 3:
        raise DimensionError(f"expected a 3-d frame array, got shape {frames.shape}")
    m, n1, n2 = frames.shape
    return Field(n1, n2, m, frames.ravel())


def field_from_matrix(mat: np.ndarray, n1: int, n2: int) -> Field:
    """Build a field from an ``(N, m)`` snapshot matrix."""
    mat = np.asarray(mat, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] != n1 * n2:
        raise DimensionError(
            f"snapshot matrix shape {mat.shape} does not match {n1}x{n2} frames"
        )
    return Field(n1, n2, mat.shape[1], mat.T.ravel())


def vectorize(field: Field) -> np.ndarray:
    """Canonical vector view (length N*m) of a field."""
    return field.values


def reshape(vec: np.ndarray, n1: int, n2: int, m: int) -> Field:
    """Inverse of :func:`vectorize`."""
    vec = np.asarray(vec, dtype=np.float64).ravel()
    if vec.size != n1 * n2 * m:
        raise DimensionError(
            f"vector of length {vec.size} cannot form a {n1}x{n2}x{m} field"
        )
    return Field(n1, n2, m, vec.copy())


def save(field: Field, path) -> None:
    """Write a field in the FLD1 binary format.

    Layout: 4-byte ASCII magic ``FLD1``; three unsigned 32-bit little-endian
    integers n1, n2, m; then ``n1*n2*m`` float64 little-endian values in
    canonical order.  No padding, no checksum.
    """
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(_MAGIC, field.n1, field.n2, field.m))
        fh.write(field.values.astype("<f8").tobytes())


def load(path) -> Field:
    """Read a field from an FLD1 file, validating format and finiteness."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise FormatError(f"{path}: truncated header")
    magic, n1, n2, m = _HEADER.unpack_from(raw)
    if magic != _MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}")
    if n1 < 1 or n2 < 1 or m < 1:
        raise FormatError(f"{path}: non-positive dimensions {n1}x{n2}x{m}")
    count = n1 * n2 * m
    expected = _HEADER.size + 8 * count
    if len(raw) != expected:
        raise FormatError(
            f"{path}: payload holds {(len(raw) - _HEADER.size) // 8} values, "
            f"header declares {count}"
        )
    values = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if not np.all(np.isfinite(values)):
        raise FormatError(f"{path}: non-finite values in payload")
    return Field(n1, n2, m, values.astype(np.float64))
