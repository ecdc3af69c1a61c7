"""Dense linear algebra over the prime field GF(p).

Everything here works on integer numpy arrays with entries reduced to
[0, p).  Matrices stay small (a few thousand rows at most, from lattices
up to L ~ 100), so plain vectorized Gaussian elimination is enough.
"""

from __future__ import annotations

import numpy as np

__all__ = ["modinv", "rref", "rank", "solve"]


def _work_dtype(p: int):
    # row ops produce intermediates up to p^2; keep them exact
    return np.int16 if p <= 181 else np.int64


def modinv(a: int, p: int) -> int:
    """Multiplicative inverse of a modulo prime p."""
    a = int(a) % p
    if a == 0:
        raise ZeroDivisionError("0 has no inverse mod %d" % p)
    return pow(a, p - 2, p)


def rref(mat: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form of `mat` over GF(p).

    Returns (R, pivot_cols).  Input is not modified.
    """
    a = np.asarray(mat, dtype=_work_dtype(p)) % p
    m, n = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(n):
        if r == m:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        pr = r + int(nz[0])
        if pr != r:
            a[[r, pr]] = a[[pr, r]]
        inv = modinv(int(a[r, c]), p)
        a[r] = (a[r] * inv) % p
        col = a[:, c].copy()
        col[r] = 0
        rows = np.nonzero(col)[0]
        if rows.size:
            a[rows] = (a[rows] - np.outer(col[rows], a[r])) % p
        pivots.append(c)
        r += 1
    return a, pivots


def rank(mat: np.ndarray, p: int) -> int:
    return len(rref(mat, p)[1])


def solve(mat: np.ndarray, rhs: np.ndarray, p: int) -> np.ndarray | None:
    """One particular solution x of mat @ x = rhs (mod p), or None.

    `rhs` may hold several right-hand sides as columns; the returned x
    has matching shape.  Free variables are set to zero.
    """
    a = np.asarray(mat)
    b = np.asarray(rhs)
    if b.ndim == 1:
        x = solve(a, b[:, None], p)
        return None if x is None else x[:, 0]
    m, n = a.shape
    aug, pivots = rref(np.hstack([a % p, b % p]), p)
    if any(c >= n for c in pivots):
        return None  # inconsistent system
    x = np.zeros((n, b.shape[1]), dtype=np.int64)
    for i, c in enumerate(pivots):
        x[c] = aug[i, n:]
    return x
