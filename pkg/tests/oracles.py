"""Independent reference computations used by the tests.

Everything here is built directly from the defining formulas with plain
loops, dense matrices and explicit triangular solves; nothing is imported
from the package except where a test compares against it.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np


def sigma_table(d: list[int], upto: int) -> list[int]:
    """``[None, sigma(1), ..., sigma(upto)]`` from ``sigma(k) = 2 + sum_{j<k} d_j``."""
    out = [None]
    acc = 2
    for k in range(1, upto + 1):
        out.append(acc)
        acc += d[k - 1]
    return out


def rho_scan(sig: list[int], j: int) -> int:
    """The ``k`` with ``sigma(k) <= j < sigma(k+1)`` by a linear scan."""
    for k in range(1, len(sig) - 1):
        if sig[k] <= j < sig[k + 1]:
            return k
    raise ValueError(j)


def lambda_iter(sig: list[int], n: int) -> int:
    x = 1
    for _ in range(n):
        x = sig[x]
    return x


def gamma_scan(sig: list[int], m: int) -> int:
    n = 0
    while lambda_iter(sig, n + 1) <= m:
        n += 1
    return n


def dense_basis(d: list[int], p: float, M: int, exact: bool = False):
    """Columns ``x_1 .. x_M`` as a dense ``(rows, M)`` matrix over coordinates ``1 .. rows``."""
    sig = sigma_table(d, M + 1)
    rows = sig[M + 1] - 1
    if exact:
        q = round(1 / p)
        X = [[Fraction(0)] * M for _ in range(rows)]
        for k in range(1, M + 1):
            X[k - 1][k - 1] = Fraction(1)
            w = Fraction(1, d[k - 1] ** q)
            for j in range(sig[k], sig[k + 1]):
                X[j - 1][k - 1] = -w
        return X
    X = np.zeros((rows, M))
    for k in range(1, M + 1):
        X[k - 1, k - 1] = 1.0
        X[sig[k] - 1 : sig[k + 1] - 1, k - 1] = -(d[k - 1] ** (-1.0 / p))
    return X


def dual_by_inversion(d: list[int], p: float, M: int) -> list[list[Fraction]]:
    """Rows ``x_j*`` restricted to ``[1, M]``: the inverse of the unit lower
    triangular top block of the basis matrix, by forward substitution."""
    X = dense_basis(d, p, M, exact=True)
    L = [row[:M] for row in X[:M]]
    # solve Y L = I row by row: Y[j] L = e_j
    Y = []
    for j in range(M):
        y = [Fraction(0)] * M
        for c in range(M - 1, -1, -1):
            # (Y L)[c] = sum_r y[r] L[r][c] = y[c] + sum_{r>c} y[r] L[r][c]
            s = sum((y[r] * L[r][c] for r in range(c + 1, M) if L[r][c]), Fraction(0))
            y[c] = (1 if c == j else 0) - s
        Y.append(y)
    return Y


def power_sum(v, p: float) -> float:
    return math.fsum(abs(float(x)) ** p for x in v)


def greedy_indices(a: dict[int, float], m: int) -> list[int]:
    """Top ``m`` by magnitude, ties to the lower index, by full sort."""
    return sorted(a, key=lambda k: (-abs(a[k]), k))[:m]


def top_m_column_sum(d: list[int], p: float, k: int, m: int, rows: int) -> Fraction:
    """Sum of the ``m`` largest ``|x_j*(k)|^p`` over ``j <= rows`` by brute force."""
    sig = sigma_table(d, rows + 1)
    vals = []
    for j in range(k, rows + 1):
        # walk up from j; value is the product of 1/d along the way
        x, val = j, Fraction(1)
        while x > k:
            r = rho_scan(sig, x)
            val /= d[r - 1]
            x = r
        if x == k:
            vals.append(val)
    vals.sort(reverse=True)
    return sum(vals[:m], Fraction(0))


def step_integral_power(pieces, p: float) -> float:
    """``int |f|^p`` for ``f = sum c 1_[a, b)`` by sampling every elementary interval."""
    pts = sorted({float(a) for a, _, _ in pieces} | {float(b) for _, b, _ in pieces} | {0.0, 1.0})
    total = 0.0
    for a, b in zip(pts, pts[1:]):
        mid = (a + b) / 2
        val = sum(float(c) for lo, hi, c in pieces if float(lo) <= mid < float(hi))
        total += abs(val) ** p * (b - a)
    return total


def uv_dense(d: list[int], p: float, m: int) -> tuple[float, float]:
    """``(||u_m||^p, ||v_m||^p)`` from the recursion on dense float columns."""
    X = dense_basis(d, p, m)
    u = X[:, 0].copy()
    v = X[:, 0].copy()
    for k in range(1, m):
        uk, vk = u[k], v[k]
        s = 1.0 if vk >= 0 else -1.0
        u = u - uk * X[:, k]
        v = v - s * uk * X[:, k]
    return power_sum(u, p), power_sum(v, p)
