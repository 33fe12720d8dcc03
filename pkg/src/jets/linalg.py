"""
shearForge Matrix Arithmetic
============================
Small dense matrices over a scalar field or the parameter ring.

Responsibilities:
- products, determinants (Bareiss in exact mode), inverses
- LU factorization with exact or partial pivoting, reused across solves
- condition estimates for float-mode acceptance checks
"""

from typing import Any, List, Sequence

import numpy as np

Matrix = List[List[Any]]


def identity_matrix(n: int, ring) -> Matrix:
    return [[ring.one() if i == j else ring.zero() for j in range(n)] for i in range(n)]


def mat_copy(a: Sequence[Sequence[Any]]) -> Matrix:
    return [list(row) for row in a]


def mat_mul(a: Sequence[Sequence[Any]], b: Sequence[Sequence[Any]], ring) -> Matrix:
    rows, inner, cols = len(a), len(b), len(b[0])
    out = []
    for i in range(rows):
        row = []
        for j in range(cols):
            acc = ring.zero()
            for k in range(inner):
                acc = acc + a[i][k] * b[k][j]
            row.append(acc)
        out.append(row)
    return out


def mat_vec(a: Sequence[Sequence[Any]], v: Sequence[Any], ring) -> List[Any]:
    out = []
    for row in a:
        acc = ring.zero()
        for x, y in zip(row, v):
            acc = acc + x * y
        out.append(acc)
    return out


def mat_sub(a, b) -> Matrix:
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_max_abs(a, ring) -> float:
    return max((float(ring.abs(x)) for row in a for x in row), default=0.0)


def mat_equal(a, b, ring) -> bool:
    return all(ring.close(x, y) for ra, rb in zip(a, b) for x, y in zip(ra, rb))


# ----------------------------------------------------------------------
# Determinants
# ----------------------------------------------------------------------


def bareiss_determinant(a: Sequence[Sequence[Any]], ring):
    """Fraction-free Bareiss elimination; all divisions are exact."""
    m = mat_copy(a)
    n = len(m)
    if n == 0:
        return ring.one()
    sign = 1
    prev = ring.one()
    for k in range(n - 1):
        if ring.is_zero(m[k][k]):
            swap = next((i for i in range(k + 1, n) if not ring.is_zero(m[i][k])), None)
            if swap is None:
                return ring.zero()
            m[k], m[swap] = m[swap], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) / prev
        prev = m[k][k]
    det = m[n - 1][n - 1]
    return det if sign > 0 else -det


def laplace_determinant(a: Sequence[Sequence[Any]], ring):
    """Cofactor expansion; only ring operations (used over the parameter ring)."""
    n = len(a)
    if n == 1:
        return a[0][0]
    if n == 2:
        return a[0][0] * a[1][1] - a[0][1] * a[1][0]
    total = ring.zero()
    for j in range(n):
        if ring.is_exact_zero(a[0][j]):
            continue
        minor = [row[:j] + row[j + 1:] for row in a[1:]]
        term = a[0][j] * laplace_determinant(minor, ring)
        total = total + term if j % 2 == 0 else total - term
    return total


def mat_det(a: Sequence[Sequence[Any]], ring):
    if not ring.is_field:
        return laplace_determinant([list(r) for r in a], ring)
    if ring.exact:
        return bareiss_determinant(a, ring)
    lu = LUFactorization(a, ring)
    return lu.determinant()


def mat_inverse(a: Sequence[Sequence[Any]], ring) -> Matrix:
    """
    Inverse over a field (Gauss-Jordan) or over the parameter ring
    (adjugate divided by a unit determinant).

    Raises:
        ValueError: singular matrix, or non-unit determinant over the ring
    """
    n = len(a)
    if not ring.is_field:
        det = mat_det(a, ring)
        if not ring.is_unit(det):
            raise ValueError("matrix determinant is not a unit of the parameter ring")
        det_inv = ring.inv(det)
        if n == 1:
            return [[det_inv]]
        adj = [[ring.zero()] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                minor = [row[:j] + row[j + 1:] for k, row in enumerate(mat_copy(a)) if k != i]
                cof = laplace_determinant(minor, ring)
                adj[j][i] = cof if (i + j) % 2 == 0 else -cof
        return [[adj[i][j] * det_inv for j in range(n)] for i in range(n)]

    lu = LUFactorization(a, ring)
    if lu.singular:
        raise ValueError("matrix is singular")
    columns = [lu.solve([ring.one() if i == j else ring.zero() for i in range(n)])
               for j in range(n)]
    return [[columns[j][i] for j in range(n)] for i in range(n)]


# ----------------------------------------------------------------------
# LU factorization
# ----------------------------------------------------------------------


class LUFactorization:
    """
    PA = LU over a field.

    Exact mode pivots on the first nonzero entry; float mode uses partial
    pivoting on the largest modulus. The factorization is kept so that a
    cached basis matrix can serve many right-hand sides.
    """

    def __init__(self, a: Sequence[Sequence[Any]], ring):
        self.ring = ring
        self.n = len(a)
        self.lu = mat_copy(a)
        self.perm = list(range(self.n))
        self.swaps = 0
        self.singular = False
        self._factor()

    def _pick_pivot(self, k: int):
        ring = self.ring
        if ring.exact:
            return next((i for i in range(k, self.n) if not ring.is_zero(self.lu[i][k])), None)
        best, best_abs = None, None
        for i in range(k, self.n):
            v = abs(self.lu[i][k])
            if best_abs is None or v > best_abs:
                best, best_abs = i, v
        if best is None or ring.is_zero(self.lu[best][k]):
            return None
        return best

    def _factor(self) -> None:
        lu, ring = self.lu, self.ring
        for k in range(self.n):
            p = self._pick_pivot(k)
            if p is None:
                self.singular = True
                return
            if p != k:
                lu[k], lu[p] = lu[p], lu[k]
                self.perm[k], self.perm[p] = self.perm[p], self.perm[k]
                self.swaps += 1
            pivot_inv = ring.inv(lu[k][k])
            row_k = lu[k]
            for i in range(k + 1, self.n):
                row_i = lu[i]
                if ring.is_exact_zero(row_i[k]):
                    continue
                factor = row_i[k] * pivot_inv
                row_i[k] = factor
                for j in range(k + 1, self.n):
                    if not ring.is_exact_zero(row_k[j]):
                        row_i[j] = row_i[j] - factor * row_k[j]

    def determinant(self):
        if self.singular:
            return self.ring.zero()
        det = self.ring.one()
        for k in range(self.n):
            det = det * self.lu[k][k]
        return -det if self.swaps % 2 else det

    def solve(self, b: Sequence[Any]) -> List[Any]:
        if self.singular:
            raise ValueError("cannot solve with a singular matrix")
        ring, lu, n = self.ring, self.lu, self.n
        y = [b[self.perm[i]] for i in range(n)]
        for i in range(n):
            acc = y[i]
            row = lu[i]
            for j in range(i):
                if not ring.is_exact_zero(row[j]):
                    acc = acc - row[j] * y[j]
            y[i] = acc
        x = [ring.zero()] * n
        for i in range(n - 1, -1, -1):
            acc = y[i]
            row = lu[i]
            for j in range(i + 1, n):
                if not ring.is_exact_zero(row[j]):
                    acc = acc - row[j] * x[j]
            x[i] = acc * ring.inv(row[i])
        return x


def condition_number(a: Sequence[Sequence[Any]], ring) -> float:
    """2-norm condition number estimated in complex128."""
    m = np.array([[ring.to_complex(x) for x in row] for row in a], dtype=np.complex128)
    return float(np.linalg.cond(m))


def matrix_to_json(a: Sequence[Sequence[Any]], ring) -> list:
    return [[ring.to_json(x) for x in row] for row in a]


def matrix_from_json(data: Sequence[Sequence[Any]], ring) -> Matrix:
    return [[ring.from_json(x) for x in row] for row in data]


def null_space(rows: Sequence[Sequence[Any]], ncols: int, ring) -> List[List[Any]]:
    """
    Basis of {x : rows . x = 0} by reduced row echelon form over a field.

    Exact mode pivots on the first nonzero entry, float mode on the largest.
    """
    m = mat_copy(rows)
    pivots: List[int] = []
    r = 0
    for col in range(ncols):
        if r >= len(m):
            break
        candidates = [i for i in range(r, len(m)) if not ring.is_zero(m[i][col])]
        if not candidates:
            continue
        p = candidates[0] if ring.exact else max(candidates, key=lambda i: abs(m[i][col]))
        m[r], m[p] = m[p], m[r]
        inv = ring.inv(m[r][col])
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and not ring.is_zero(m[i][col]):
                factor = m[i][col]
                m[i] = [x - factor * y for x, y in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
    basis = []
    for free in (c for c in range(ncols) if c not in pivots):
        vec = [ring.zero()] * ncols
        vec[free] = ring.one()
        for row, col in enumerate(pivots):
            vec[col] = -m[row][free]
        basis.append(vec)
    return basis
