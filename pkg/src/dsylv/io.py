"""Matrix Market and dense binary snapshot I/O.

Binary layout (little-endian)::

    bytes 0-7    magic b"DSYLVMAT"
    bytes 8-15   rows  (uint64)
    bytes 16-23  cols  (uint64)
    then rows*cols pairs of float64 (real, imag), row-major

Factored snapshots are written as two such files, ``<stem>.F1.bin`` and
``<stem>.F2.bin``.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sp

from .linalg_core import FactoredMatrix, as_matrix

MAGIC = b"DSYLVMAT"
_HEADER = struct.Struct("<8sQQ")


def write_binary(path, M) -> None:
    M = as_matrix(M)
    rows, cols = M.shape
    payload = np.ascontiguousarray(M, dtype="<c16")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, rows, cols))
        fh.write(payload.tobytes(order="C"))


def read_binary(path) -> np.ndarray:
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise ValueError(f"{path}: truncated header")
        magic, rows, cols = _HEADER.unpack(head)
        if magic != MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        data = fh.read()
    expected = rows * cols * 16
    if len(data) != expected:
        raise ValueError(f"{path}: expected {expected} payload bytes, found {len(data)}")
    M = np.frombuffer(data, dtype="<c16").reshape(rows, cols)
    return M.astype(np.complex128)


def write_factored(stem, F: FactoredMatrix) -> tuple[Path, Path]:
    stem = Path(stem)
    p1 = stem.with_name(stem.name + ".F1.bin")
    p2 = stem.with_name(stem.name + ".F2.bin")
    write_binary(p1, F.F1)
    write_binary(p2, F.F2)
    return p1, p2


def read_factored(stem) -> FactoredMatrix:
    stem = Path(stem)
    return FactoredMatrix(read_binary(stem.with_name(stem.name + ".F1.bin")),
                          read_binary(stem.with_name(stem.name + ".F2.bin")))


def read_matrix_market(path, dense: bool | None = None):
    """Read a Matrix Market file.

    Coordinate files come back as a complex CSR matrix unless ``dense`` is
    true; array files always come back dense.
    """
    M = scipy.io.mmread(str(path))
    if sp.issparse(M):
        M = sp.csr_matrix(M, dtype=np.complex128)
        M.sum_duplicates()
        return M.toarray() if dense else M
    return as_matrix(M)


def write_matrix_market(path, M, field: str | None = None) -> None:
    """Write dense input in array format and sparse input in coordinate format."""
    if sp.issparse(M):
        scipy.io.mmwrite(str(path), sp.coo_matrix(M), field=field)
    else:
        M = np.asarray(M)
        if field is None and np.iscomplexobj(M) and not np.any(M.imag):
            M = M.real
        scipy.io.mmwrite(str(path), M, field=field)
