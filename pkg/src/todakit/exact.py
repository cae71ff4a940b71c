"""Exact rational scalars and dense rational matrix arithmetic.

Rational values are ``fractions.Fraction`` (arbitrary-precision, always
stored in lowest terms with a positive denominator).  Matrices are numpy
object arrays whose entries are Fractions, so every operation below is
exact; floating point enters only through the explicit conversions.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

Rational = Fraction


class ShapeError(ValueError):
    """Operand shapes are incompatible."""


class SingularMatrixError(ArithmeticError):
    """A matrix required to be invertible is singular."""


def rational(value) -> Fraction:
    """Coerce ints, strings like '2/3', or Fractions to a canonical Fraction."""
    return Fraction(value)


def rational_matrix(rows) -> np.ndarray:
    """Build a rational matrix (object ndarray of Fractions) from nested data."""
    data = [[Fraction(entry) for entry in row] for row in rows]
    ncols = {len(row) for row in data}
    if len(ncols) != 1:
        raise ShapeError("rows have unequal lengths")
    out = np.empty((len(data), ncols.pop()), dtype=object)
    for i, row in enumerate(data):
        for j, entry in enumerate(row):
            out[i, j] = entry
    return out


def rzeros(nrows: int, ncols: int) -> np.ndarray:
    out = np.empty((nrows, ncols), dtype=object)
    out[:, :] = Fraction(0)
    return out


def ridentity(n: int) -> np.ndarray:
    out = rzeros(n, n)
    for i in range(n):
        out[i, i] = Fraction(1)
    return out


def rmat_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact matrix product."""
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError("operands must be 2-d matrices")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return np.dot(a, b)


def rmat_inverse(a: np.ndarray) -> np.ndarray:
    """Exact inverse by Gauss-Jordan elimination with partial pivoting.

    The pivot is the largest entry by absolute value in the current column;
    ties are broken by the lowest row index, so the elimination order is
    deterministic.
    """
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"matrix of shape {a.shape} is not square")
    n = a.shape[0]
    work = a.copy()
    inv = ridentity(n)
    for col in range(n):
        pivot_row = max(range(col, n), key=lambda r: (abs(work[r, col]), -r))
        if work[pivot_row, col] == 0:
            raise SingularMatrixError("matrix is singular over the rationals")
        if pivot_row != col:
            work[[col, pivot_row]] = work[[pivot_row, col]]
            inv[[col, pivot_row]] = inv[[pivot_row, col]]
        pivot = work[col, col]
        work[col] = work[col] / pivot
        inv[col] = inv[col] / pivot
        for row in range(n):
            if row != col and work[row, col] != 0:
                factor = work[row, col]
                work[row] = work[row] - factor * work[col]
                inv[row] = inv[row] - factor * inv[col]
    return inv


def rat_to_float(x: Fraction) -> float:
    """Nearest double-precision value."""
    return float(x)


def rmat_to_float(a: np.ndarray) -> np.ndarray:
    return a.astype(float)


def rmat_to_complex(a: np.ndarray) -> np.ndarray:
    return a.astype(float).astype(complex)


def rmat_equal(a: np.ndarray, b: np.ndarray) -> bool:
    """Exact entrywise equality."""
    return a.shape == b.shape and bool(np.all(a == b))
