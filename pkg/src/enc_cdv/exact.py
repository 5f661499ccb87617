"""Small exact linear algebra over the rationals."""
from __future__ import annotations

import itertools
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Optional, Sequence

import numpy as np


def det_int(rows: Sequence[Sequence[int]]) -> int:
    """Determinant of a square integer matrix (Bareiss, fraction free)."""
    m = [list(r) for r in rows]
    n = len(m)
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k]:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1] if n else 1


def solve(a: Sequence[Sequence], b: Sequence) -> Optional[list]:
    """Solve the square system ``a x = b``; None when singular."""
    n = len(a)
    m = [[Fraction(x) for x in row] + [Fraction(y)] for row, y in zip(a, b)]
    for col in range(n):
        piv = next((i for i in range(col, n) if m[i][col] != 0), None)
        if piv is None:
            return None
        m[col], m[piv] = m[piv], m[col]
        p = m[col][col]
        for i in range(n):
            if i != col and m[i][col] != 0:
                f = m[i][col] / p
                m[i] = [x - f * y for x, y in zip(m[i], m[col])]
    return [m[i][n] / m[i][i] for i in range(n)]


def kernel_vector(rows: Sequence[Sequence[int]]) -> Optional[tuple]:
    """Primitive integer generator of the kernel of an (n-1) x n integer matrix of full rank."""
    n = len(rows[0])
    vec = []
    for k in range(n):
        minor = [[row[c] for c in range(n) if c != k] for row in rows]
        vec.append((-1) ** k * det_int(minor))
    g = 0
    for x in vec:
        g = gcd(g, x)
    if g == 0:
        return None
    return tuple(x // g for x in vec)


# ---------------------------------------------------------------- batched integer routines
# Cofactor expansion in int64; exact as long as entries stay small (degrees <= a few dozen).

_INT_LIMIT = 2**62


@lru_cache(maxsize=None)
def _permutations(n: int):
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64)
    # sign via inversion count
    inv = sum((perms[:, i] > perms[:, j]) for i in range(n) for j in range(i + 1, n))
    return perms, np.where(inv % 2, -1, 1).astype(np.int64)


def det_batch(m: np.ndarray) -> np.ndarray:
    """Exact determinants of a stack ``(N, n, n)`` of integer matrices (Leibniz expansion)."""
    n = m.shape[-1]
    perms, signs = _permutations(n)
    terms = m[:, np.arange(n)[None, :], perms].prod(axis=2)
    return terms @ signs


def cramer_batch(a: np.ndarray, b: np.ndarray):
    """Solve stacked systems ``a x = b`` exactly.

    Returns ``(det, num, ok)``: for rows with ``ok`` the solution is ``num / det``
    with ``det > 0``.
    """
    if np.abs(a).max(initial=0) ** a.shape[-1] * _fact(a.shape[-1]) >= _INT_LIMIT:
        raise OverflowError("matrix entries too large for exact int64 cofactors")
    det = det_batch(a)
    ok = det != 0
    num = np.empty(b.shape, dtype=np.int64)
    for i in range(a.shape[-1]):
        ai = a.copy()
        ai[:, :, i] = b
        num[:, i] = det_batch(ai)
    sign = np.where(det < 0, -1, 1)
    return det * sign, num * sign[:, None], ok


def _fact(n: int) -> int:
    out = 1
    for i in range(2, n + 1):
        out *= i
    return out


def kernel_batch(m: np.ndarray) -> np.ndarray:
    """Integer kernel generators (not reduced) of a stack ``(N, n-1, n)``; zero rows when rank drops."""
    n = m.shape[-1]
    cols = []
    for k in range(n):
        minor = np.delete(m, k, axis=2)
        d = det_batch(minor)
        cols.append(d if k % 2 == 0 else -d)
    return np.stack(cols, axis=1)
