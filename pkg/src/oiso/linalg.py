"""Dual-mode linear algebra: float64 via numpy, exact rationals via Fraction.

Exact matrices are numpy object arrays holding fractions.Fraction entries.
The elimination routines skip zero multipliers, so sparse inputs (weighted
permutations in particular) stay cheap.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np

__all__ = [
    "SingularMatrixError",
    "is_exact",
    "as_exact",
    "as_float",
    "zeros_like_mode",
    "mat_vec",
    "mat_mat",
    "exact_inv",
    "exact_rank",
    "exact_solve_unique",
    "exact_nullspace",
    "float_nullspace",
    "rank",
    "inv",
]


class SingularMatrixError(ValueError):
    """Raised when an operator matrix is not invertible."""


def is_exact(a) -> bool:
    return isinstance(a, np.ndarray) and a.dtype == object


def as_exact(rows) -> np.ndarray:
    """Build an object-dtype matrix of Fractions from nested ints/strings/Fractions."""
    def conv(v):
        if isinstance(v, Fraction):
            return v
        if isinstance(v, (int, np.integer)):
            return Fraction(int(v))
        if isinstance(v, str):
            return Fraction(v)
        raise TypeError(f"exact mode accepts ints, 'p/q' strings or Fractions, got {v!r}")

    arr = np.array([[conv(v) for v in row] for row in rows], dtype=object)
    return arr


def as_float(a) -> np.ndarray:
    if is_exact(a):
        return np.array([[float(v) for v in row] for row in a], dtype=float)
    return np.asarray(a, dtype=float)


def zeros_like_mode(shape, exact: bool):
    if exact:
        out = np.empty(shape, dtype=object)
        out[...] = Fraction(0)
        return out
    return np.zeros(shape)


def _tolists(a):
    return [list(row) for row in a]


def mat_vec(a, v):
    """Matrix times vector, zero-skipping in exact mode."""
    if is_exact(a) or (isinstance(v, np.ndarray) and v.dtype == object):
        m, n = a.shape
        out = np.empty(m, dtype=object)
        for i in range(m):
            acc = Fraction(0)
            row = a[i]
            for j in range(n):
                x = row[j]
                if x:
                    acc += x * v[j]
            out[i] = acc
        return out
    return np.asarray(a, dtype=float) @ np.asarray(v, dtype=float)


def mat_mat(a, b):
    if is_exact(a) or is_exact(b):
        m, k = a.shape
        k2, n = b.shape
        if k != k2:
            raise ValueError("shape mismatch")
        out = np.empty((m, n), dtype=object)
        for i in range(m):
            for j in range(n):
                acc = Fraction(0)
                for t in range(k):
                    x = a[i, t]
                    if x:
                        acc += x * b[t, j]
                out[i, j] = acc
        return out
    return np.asarray(a, dtype=float) @ np.asarray(b, dtype=float)


def exact_inv(a) -> np.ndarray:
    """Gauss-Jordan inverse over the rationals. Raises SingularMatrixError."""
    n = a.shape[0]
    if a.shape[0] != a.shape[1]:
        raise ValueError("square matrix required")
    aug = [list(a[i]) + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = None
        for r in range(col, n):
            if aug[r][col]:
                piv = r
                break
        if piv is None:
            raise SingularMatrixError("matrix is singular in exact arithmetic")
        if piv != col:
            aug[col], aug[piv] = aug[piv], aug[col]
        pv = aug[col][col]
        if pv != 1:
            aug[col] = [x / pv for x in aug[col]]
        prow = aug[col]
        for r in range(n):
            if r == col:
                continue
            f = aug[r][col]
            if f:
                row = aug[r]
                for j in range(col, 2 * n):
                    if prow[j]:
                        row[j] -= f * prow[j]
    return np.array([row[n:] for row in aug], dtype=object)


def _exact_rref(rows):
    """Reduced row echelon form over the rationals; returns (rref, pivot_cols)."""
    mat = [list(r) for r in rows]
    m = len(mat)
    n = len(mat[0]) if m else 0
    pivots = []
    r = 0
    for col in range(n):
        piv = None
        for i in range(r, m):
            if mat[i][col]:
                piv = i
                break
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        pv = mat[r][col]
        if pv != 1:
            mat[r] = [x / pv for x in mat[r]]
        prow = mat[r]
        for i in range(m):
            if i == r:
                continue
            f = mat[i][col]
            if f:
                row = mat[i]
                for j in range(col, n):
                    if prow[j]:
                        row[j] -= f * prow[j]
        pivots.append(col)
        r += 1
        if r == m:
            break
    return mat, pivots


def exact_rank(a) -> int:
    if a.size == 0:
        return 0
    _, pivots = _exact_rref(_tolists(a))
    return len(pivots)


def exact_solve_unique(a, b):
    """Solve a @ x = b when `a` has full column rank; None if inconsistent."""
    m, k = a.shape
    aug = [list(a[i]) + [Fraction(b[i]) if not isinstance(b[i], Fraction) else b[i]]
           for i in range(m)]
    rref, pivots = _exact_rref(aug)
    x = [Fraction(0)] * k
    for r, col in enumerate(pivots):
        if col == k:
            return None  # a zero row equals a nonzero rhs
        x[col] = rref[r][k]
    # full column rank expected: all columns pivotal unless inconsistent input rank
    if len([c for c in pivots if c < k]) < exact_rank(a):
        return None
    xv = np.array(x, dtype=object)
    # verify (guards callers passing rank-deficient a)
    res = mat_vec(a, xv)
    for i in range(m):
        bi = b[i] if isinstance(b[i], Fraction) else Fraction(b[i])
        if res[i] != bi:
            return None
    return xv


def exact_nullspace(a) -> list:
    """Basis of the exact nullspace of `a` (list of object vectors)."""
    m, k = a.shape
    if m == 0:
        return [np.array([Fraction(int(i == j)) for j in range(k)], dtype=object)
                for i in range(k)]
    rref, pivots = _exact_rref(_tolists(a))
    free = [c for c in range(k) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * k
        v[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -rref[r][fc]
        basis.append(np.array(v, dtype=object))
    return basis


def float_nullspace(a, tol: float = 1e-10) -> list:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    if a.shape[0] == 0 or a.size == 0:
        k = a.shape[1]
        return [np.eye(k)[i] for i in range(k)]
    _, s, vt = np.linalg.svd(a)
    null_mask = np.zeros(vt.shape[0], dtype=bool)
    null_mask[len(s):] = True
    null_mask[: len(s)] |= s <= tol * max(a.shape) * (s[0] if len(s) else 1.0)
    return [vt[i] for i in range(vt.shape[0]) if null_mask[i]]


def rank(a, tol: float = 1e-10) -> int:
    if is_exact(a):
        return exact_rank(a)
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return 0
    return int(np.linalg.matrix_rank(a, tol=tol * max(a.shape) * max(1.0, float(np.abs(a).max()))))


def inv(a):
    if is_exact(a):
        return exact_inv(a)
    a = np.asarray(a, dtype=float)
    try:
        out = np.linalg.inv(a)
    except np.linalg.LinAlgError as e:
        raise SingularMatrixError(str(e)) from e
    if not np.all(np.isfinite(out)):
        raise SingularMatrixError("inverse overflow; matrix numerically singular")
    return out
