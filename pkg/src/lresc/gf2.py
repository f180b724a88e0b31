"""Exact linear algebra over GF(2).

Matrices are dense ``numpy.uint8`` arrays holding 0/1 entries; vectors are 1D
arrays of the same dtype.  Elimination runs on a bit-packed copy (64 columns
per ``uint64`` word) inside numba kernels.  Pivots are chosen by lowest column
index, then lowest row index, so every reduced form is reproducible.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence

import numba
import numpy as np
import numpy.typing as npt

BinaryMatrix = npt.NDArray[np.uint8]
BinaryVector = npt.NDArray[np.uint8]

__all__ = [
    "BinaryMatrix",
    "BinaryVector",
    "as_binary",
    "from_positions",
    "positions",
    "pack_rows",
    "unpack_rows",
    "matmul",
    "rref",
    "rank",
    "nullspace",
    "solve",
    "row_equivalent",
    "rowspace_contains",
    "standard_form",
    "inverse",
    "RankDeficientError",
]


class RankDeficientError(ValueError):
    """Raised when an operation needs full row rank and does not get it."""


def as_binary(a: npt.ArrayLike) -> BinaryMatrix:
    """Coerce an array-like of integers to a uint8 array reduced mod 2."""
    arr = np.asarray(a)
    if arr.dtype == np.uint8:
        return arr & 1
    return (arr.astype(np.int64) % 2).astype(np.uint8)


def from_positions(rows: int, cols: int, entries: Iterable[tuple[int, int]]) -> BinaryMatrix:
    """Build a matrix from (row, col) positions; repeated positions cancel."""
    out = np.zeros((rows, cols), dtype=np.uint8)
    for r, c in entries:
        if not (0 <= r < rows and 0 <= c < cols):
            raise IndexError(f"position {(r, c)} outside {rows}x{cols}")
        out[r, c] ^= 1
    return out


def positions(m: BinaryMatrix) -> list[tuple[int, int]]:
    rr, cc = np.nonzero(m)
    return list(zip(rr.tolist(), cc.tolist()))


def pack_rows(m: BinaryMatrix, extra_cols: int = 0) -> np.ndarray:
    """Pack rows into uint64 words, little-endian in column index."""
    m = np.ascontiguousarray(as_binary(np.atleast_2d(m)))
    rows, cols = m.shape
    n_words = max(1, -(-(cols + extra_cols) // 64))
    padded = np.zeros((rows, n_words * 64), dtype=np.uint8)
    padded[:, :cols] = m
    return np.packbits(padded, axis=1, bitorder="little").view(np.uint64).copy()


def unpack_rows(words: np.ndarray, cols: int) -> BinaryMatrix:
    as_bytes = np.ascontiguousarray(words).view(np.uint8)
    return np.unpackbits(as_bytes, axis=1, bitorder="little")[:, :cols].copy()


@numba.njit(cache=True)
def _eliminate(words, ncols, reduced):
    """In-place Gaussian elimination on packed rows.

    Returns (rank, pivot_columns).  ``reduced`` clears entries above pivots
    too (reduced row echelon form).
    """
    m = words.shape[0]
    pivots = np.empty(min(m, ncols), dtype=np.int64)
    r = 0
    for c in range(ncols):
        if r == m:
            break
        w = c >> 6
        bit = np.uint64(1) << np.uint64(c & 63)
        p = -1
        for i in range(r, m):
            if words[i, w] & bit:
                p = i
                break
        if p < 0:
            continue
        if p != r:
            for k in range(w, words.shape[1]):
                tmp = words[p, k]
                words[p, k] = words[r, k]
                words[r, k] = tmp
        start = 0 if reduced else r + 1
        for i in range(start, m):
            if i != r and (words[i, w] & bit):
                for k in range(w, words.shape[1]):
                    words[i, k] ^= words[r, k]
        pivots[r] = c
        r += 1
    return r, pivots[:r]


def rref(m: BinaryMatrix) -> tuple[BinaryMatrix, np.ndarray]:
    """Reduced row echelon form and pivot columns (zero rows kept at the bottom)."""
    m = as_binary(np.atleast_2d(m))
    rows, cols = m.shape
    if rows == 0 or cols == 0:
        return m.copy(), np.zeros(0, dtype=np.int64)
    words = pack_rows(m)
    _, piv = _eliminate(words, cols, True)
    return unpack_rows(words, cols), piv.copy()


def rank(m: BinaryMatrix) -> int:
    m = as_binary(np.atleast_2d(m))
    if m.size == 0:
        return 0
    words = pack_rows(m)
    r, _ = _eliminate(words, m.shape[1], False)
    return int(r)


def nullspace(m: BinaryMatrix) -> BinaryMatrix:
    """Basis (as rows) of {x : m x = 0}."""
    m = as_binary(np.atleast_2d(m))
    cols = m.shape[1]
    if m.shape[0] == 0:
        return np.eye(cols, dtype=np.uint8)
    red, piv = rref(m)
    free = np.setdiff1d(np.arange(cols), piv)
    basis = np.zeros((free.size, cols), dtype=np.uint8)
    for t, f in enumerate(free):
        basis[t, f] = 1
        basis[t, piv] = red[: piv.size, f]
    return basis


def solve(m: BinaryMatrix, s: npt.ArrayLike) -> BinaryVector | None:
    """Some x with m x = s, or None when s is outside the column space."""
    m = as_binary(np.atleast_2d(m))
    s = as_binary(s).ravel()
    rows, cols = m.shape
    if s.size != rows:
        raise ValueError(f"syndrome length {s.size} != {rows} rows")
    if rows == 0:
        return np.zeros(cols, dtype=np.uint8)
    aug = np.concatenate([m, s[:, None]], axis=1)
    words = pack_rows(aug)
    r, piv = _eliminate(words, cols + 1, True)
    if r and piv[r - 1] == cols:
        return None
    red = unpack_rows(words, cols + 1)
    x = np.zeros(cols, dtype=np.uint8)
    x[piv] = red[:r, cols]
    return x


def matmul(a: BinaryMatrix, b: BinaryMatrix) -> BinaryMatrix:
    """Matrix (or matrix-vector) product mod 2.

    Works in uint8: accumulation wraps modulo 256, which preserves parity.
    """
    a, b = np.asarray(a), np.asarray(b)
    a = a if a.dtype == np.uint8 else (a % 2).astype(np.uint8)
    b = b if b.dtype == np.uint8 else (b % 2).astype(np.uint8)
    return (a @ b) & np.uint8(1)


def row_equivalent(a: BinaryMatrix, b: BinaryMatrix) -> bool:
    a = as_binary(np.atleast_2d(a))
    b = as_binary(np.atleast_2d(b))
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"column mismatch: {a.shape[1]} vs {b.shape[1]}")
    ra = rank(a)
    return ra == rank(b) == rank(np.concatenate([a, b], axis=0))


def rowspace_contains(m: BinaryMatrix, v: npt.ArrayLike) -> bool:
    """True if every row of v lies in the row space of m."""
    m = as_binary(np.atleast_2d(m))
    v = as_binary(np.atleast_2d(v))
    if m.shape[0] == 0:
        return not v.any()
    return rank(np.concatenate([m, v], axis=0)) == rank(m)


def standard_form(g: BinaryMatrix) -> tuple[BinaryMatrix, np.ndarray]:
    """Row-reduce a full-rank generator matrix; columns stay in place.

    Returns (reduced matrix, pivot columns).
    """
    g = as_binary(np.atleast_2d(g))
    red, piv = rref(g)
    if piv.size != g.shape[0]:
        raise RankDeficientError(f"rank {piv.size} < {g.shape[0]} rows")
    return red, piv


def inverse(m: BinaryMatrix) -> BinaryMatrix:
    m = as_binary(np.atleast_2d(m))
    n = m.shape[0]
    if m.shape != (n, n):
        raise ValueError("inverse needs a square matrix")
    red, piv = rref(np.concatenate([m, np.eye(n, dtype=np.uint8)], axis=1))
    if piv.size < n or piv[n - 1] != n - 1:
        raise RankDeficientError("matrix is singular over GF(2)")
    return red[:, n:].copy()


def int_rows(m: BinaryMatrix) -> list[int]:
    """Rows as Python-int bitsets (bit j = column j)."""
    m = as_binary(np.atleast_2d(m))
    weights = [1 << j for j in range(m.shape[1])]
    return [sum(w for w, x in zip(weights, row) if x) for row in m.tolist()]


def int_to_vector(x: int, n: int) -> BinaryVector:
    return np.array([(x >> j) & 1 for j in range(n)], dtype=np.uint8)


def kron(*mats: Sequence) -> BinaryMatrix:
    out = np.ones((1, 1), dtype=np.uint8)
    for m in mats:
        out = np.kron(out, as_binary(np.atleast_2d(m))).astype(np.uint8)
    return out
