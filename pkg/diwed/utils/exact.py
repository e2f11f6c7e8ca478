"""Exact linear algebra and sign transforms.

Rank is computed over the rationals. A fast elimination modulo a large prime
gives a lower bound on the rational rank; when that lower bound already hits
the largest possible rank it is exact, otherwise a fraction-free (Bareiss)
elimination over Python integers settles it.
"""

import logging
from typing import Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)

MODULUS = 2147483647  # 2**31 - 1, products of residues fit in int64


def fwht(values: Sequence[float]) -> np.ndarray:
    """Unnormalised Walsh-Hadamard transform in natural (bitwise) order.

    ``out[r] = sum_x values[x] * (-1) ** popcount(r & x)``.

    Args:
        values: Array whose length is a power of two.

    Returns:
        Transformed array, same length, float64 (int64 if the input is integral).
    """
    a = np.asarray(values)
    size = a.shape[0]
    if size == 0 or size & (size - 1):
        raise ValueError(f"length must be a power of two, got {size}")
    a = a.astype(np.int64 if np.issubdtype(a.dtype, np.integer) else np.float64)
    h = 1
    while h < size:
        a = a.reshape(-1, 2, h)
        a = np.stack((a[:, 0] + a[:, 1], a[:, 0] - a[:, 1]), axis=1)
        h *= 2
    return a.reshape(size)


def sign_transform_direct(values: Sequence[float]) -> np.ndarray:
    """O(4^n) reference for :func:`fwht`."""
    a = np.asarray(values, dtype=np.float64)
    size = a.shape[0]
    idx = np.arange(size)
    parity = np.array(
        [[bin(r & x).count("1") & 1 for x in idx] for r in idx], dtype=np.int64
    )
    return (1 - 2 * parity) @ a


def modular_rank(matrix: np.ndarray, modulus: int = MODULUS, upper: Optional[int] = None) -> int:
    """Rank of an integer matrix over GF(modulus).

    Gauss-Jordan elimination on int64 residues, one pivot column at a time.
    Stops early once ``upper`` pivots are found.
    """
    a = np.mod(np.asarray(matrix, dtype=np.int64), modulus)
    rows, cols = a.shape
    limit = min(rows, cols) if upper is None else min(rows, cols, upper)
    rank = 0
    for c in range(cols):
        if rank >= limit or a.shape[0] == 0:
            break
        nz = np.flatnonzero(a[:, c])
        if nz.size == 0:
            continue
        p = nz[0]
        pivot = a[p, c:].copy()
        inv = pow(int(pivot[0]), modulus - 2, modulus)
        pivot = (pivot * inv) % modulus
        a = np.delete(a, p, axis=0)
        factors = a[:, c]
        hit = np.flatnonzero(factors)
        if hit.size:
            sub = a[hit, c:]
            sub = (sub - (factors[hit, None] * pivot[None, :]) % modulus) % modulus
            a[hit, c:] = sub
        # rows left with only zeros carry no further rank
        keep = np.any(a[:, c + 1 :] != 0, axis=1)
        a = a[keep]
        rank += 1
    return rank


def bareiss_rank(matrix: np.ndarray) -> int:
    """Exact rank by fraction-free elimination over Python integers."""
    a = [[int(v) for v in row] for row in np.asarray(matrix)]
    rows = len(a)
    cols = len(a[0]) if rows else 0
    rank = 0
    prev = 1
    for c in range(cols):
        if rank == rows:
            break
        p = next((r for r in range(rank, rows) if a[r][c] != 0), None)
        if p is None:
            continue
        a[rank], a[p] = a[p], a[rank]
        piv = a[rank][c]
        for r in range(rank + 1, rows):
            lead = a[r][c]
            row_r = a[r]
            row_p = a[rank]
            for j in range(c + 1, cols):
                row_r[j] = (piv * row_r[j] - lead * row_p[j]) // prev
            row_r[c] = 0
        prev = piv
        rank += 1
    return rank


def integer_rank(matrix: np.ndarray, upper: Optional[int] = None) -> int:
    """Exact rational rank of an integer matrix.

    Args:
        matrix: 2-D integer array.
        upper: Known upper bound on the rank (e.g. the dimension that would make
            a face a facet). Defaults to ``min(rows, cols)``.

    Returns:
        The rank over Q.
    """
    m = np.asarray(matrix)
    if m.ndim != 2:
        raise ValueError("matrix must be two-dimensional")
    if m.size == 0:
        return 0
    bound = min(m.shape) if upper is None else min(min(m.shape), upper)
    r = modular_rank(m, upper=bound)
    if r >= bound:
        return r
    logger.debug(
        "modular rank %d below bound %d for %dx%d matrix, running Bareiss",
        r,
        bound,
        *m.shape,
    )
    return bareiss_rank(m)
