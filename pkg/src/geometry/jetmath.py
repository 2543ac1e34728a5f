"""Elementary functions and small dense linear algebra that accept floats or Jets."""

import math
from typing import List, Sequence

import numpy as np

from src.geometry.errors import DegenerateStructureError
from src.geometry.jet import Jet, value_of

PIVOT_FLOOR = 1e-14


def exp(z):
    return z.exp() if isinstance(z, Jet) else np.exp(z)


def expm1(z):
    return z.expm1() if isinstance(z, Jet) else np.expm1(z)


def log(z):
    return z.log() if isinstance(z, Jet) else np.log(z)


def log1p(z):
    return z.log1p() if isinstance(z, Jet) else np.log1p(z)


def sin(z):
    return z.sin() if isinstance(z, Jet) else np.sin(z)


def cos(z):
    return z.cos() if isinstance(z, Jet) else np.cos(z)


def sqrt(z):
    return z.sqrt() if isinstance(z, Jet) else np.sqrt(z)


def power(z, p: float):
    """z**p for real p; integer p keeps exact polynomial arithmetic on jets."""
    if isinstance(z, Jet):
        return z**p
    return math.pow(float(z), p)


def polyval(coefficients: Sequence[float], z):
    """Horner evaluation of sum(c_n z^n)."""
    result = 0.0
    for c in reversed(coefficients):
        result = result * z + c
    return result


def has_jets(rows) -> bool:
    return any(isinstance(v, Jet) for row in rows for v in row)


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> List[List]:
    """Dense product of nested lists whose entries may be jets."""
    inner = len(b)
    cols = len(b[0]) if inner else 0
    result = []
    for row in a:
        out = []
        for j in range(cols):
            acc = 0.0
            for k in range(inner):
                acc = acc + row[k] * b[k][j]
            out.append(acc)
        result.append(out)
    return result


def transpose(a: Sequence[Sequence]) -> List[List]:
    return [list(col) for col in zip(*a)]


def solve(matrix: Sequence[Sequence], rhs: Sequence[Sequence]) -> List[List]:
    """
    Solve matrix @ X = rhs for square `matrix`.

    Gaussian elimination with partial pivoting on the values; jets propagate
    derivatives of the solution. Plain floats go straight to numpy.
    """
    n = len(matrix)
    if not has_jets(matrix) and not has_jets(rhs):
        a = np.asarray(matrix, dtype=float)
        scale = np.max(np.abs(a)) if a.size else 0.0
        if scale == 0.0 or abs(np.linalg.det(a / scale)) < PIVOT_FLOOR:
            raise DegenerateStructureError("Singular matrix in solve")
        return np.linalg.solve(a, np.asarray(rhs, dtype=float)).tolist()

    a = [list(row) for row in matrix]
    b = [list(row) for row in rhs]
    scale = max((abs(value_of(v)) for row in a for v in row), default=0.0)
    if scale == 0.0:
        raise DegenerateStructureError("Singular matrix in solve")

    for col in range(n):
        pivot = max(range(col, n), key=lambda r: abs(value_of(a[r][col])))
        if abs(value_of(a[pivot][col])) < PIVOT_FLOOR * scale:
            raise DegenerateStructureError(f"Singular matrix in solve (column {col})")
        a[col], a[pivot] = a[pivot], a[col]
        b[col], b[pivot] = b[pivot], b[col]
        inv = 1.0 / a[col][col]
        for r in range(col + 1, n):
            factor = a[r][col] * inv
            if value_of(factor) == 0.0 and not isinstance(factor, Jet):
                continue
            a[r] = [a[r][c] - factor * a[col][c] for c in range(n)]
            b[r] = [b[r][c] - factor * b[col][c] for c in range(len(b[r]))]

    x = [[0.0] * len(b[0]) for _ in range(n)]
    for r in range(n - 1, -1, -1):
        for c in range(len(b[0])):
            acc = b[r][c]
            for k in range(r + 1, n):
                acc = acc - a[r][k] * x[k][c]
            x[r][c] = acc / a[r][r]
    return x


def inverse(matrix: Sequence[Sequence]) -> List[List]:
    n = len(matrix)
    identity = [[1.0 if i == j else 0.0 for j in range(n)] for i in range(n)]
    return solve(matrix, identity)


def least_squares(matrix: Sequence[Sequence], rhs: Sequence[Sequence]) -> List[List]:
    """Full-column-rank least squares through the normal equations (jet-capable)."""
    mt = transpose(matrix)
    return solve(matmul(mt, matrix), matmul(mt, rhs))


def values(rows: Sequence[Sequence]) -> np.ndarray:
    return np.array([[value_of(v) for v in row] for row in rows], dtype=float)
