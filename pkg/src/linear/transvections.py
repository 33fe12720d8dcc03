"""
shearForge Transvections
========================
Elementary factorizations of unimodular matrices.

Responsibilities:
- Transvection T(j, l, a) = I + a * E_{j,l} (0-based row j, column l)
- sln_to_transvections: SL_n over a scalar field by row reduction
- sl2_polyring_to_transvections: SL_2 over C[x] by the Euclidean algorithm
- lower/upper block grouping and multiply-back
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Sequence

from src.jets.linalg import identity_matrix, mat_copy, mat_det, mat_mul
from src.jets.unipoly import UniPoly

logger = logging.getLogger("shearForge.linear")


@dataclass(frozen=True)
class Transvection:
    """I + amount * E_{row, col}, row != col."""
    row: int
    col: int
    amount: Any

    def __post_init__(self):
        if self.row == self.col:
            raise ValueError(f"transvection needs row != col, got ({self.row}, {self.col})")

    @property
    def lower(self) -> bool:
        return self.row > self.col

    def matrix(self, n: int, ring) -> List[List[Any]]:
        m = identity_matrix(n, ring)
        m[self.row][self.col] = ring.coerce(self.amount)
        return m

    def inverse(self) -> "Transvection":
        return Transvection(self.row, self.col, -self.amount)

    def to_dict(self, ring) -> Dict:
        return {"row": self.row, "col": self.col, "amount": ring.to_json(self.amount)}

    @classmethod
    def from_dict(cls, data: Dict, ring) -> "Transvection":
        return cls(int(data["row"]), int(data["col"]), ring.from_json(data["amount"]))


def multiply_transvections(ts: Sequence[Transvection], n: int, ring) -> List[List[Any]]:
    """Left-to-right product T_1 T_2 ... T_m."""
    result = identity_matrix(n, ring)
    for t in ts:
        result = mat_mul(result, t.matrix(n, ring), ring)
    return result


def group_blocks(ts: Sequence[Transvection]) -> List[Dict]:
    """Coalesce consecutive same-triangle transvections into unipotent blocks."""
    blocks: List[Dict] = []
    for i, t in enumerate(ts):
        kind = "lower" if t.lower else "upper"
        if blocks and blocks[-1]["triangle"] == kind:
            blocks[-1]["stop"] = i + 1
        else:
            blocks.append({"triangle": kind, "start": i, "stop": i + 1})
    return blocks


# ----------------------------------------------------------------------
# SL_n over a field
# ----------------------------------------------------------------------


class _RowReducer:
    """Row operations on a working matrix; records each operation."""

    def __init__(self, a, ring):
        self.a = mat_copy(a)
        self.ring = ring
        self.ops: List[Transvection] = []

    def add_row(self, target: int, source: int, factor) -> None:
        """row_target += factor * row_source"""
        if self.ring.is_exact_zero(factor):
            return
        src = self.a[source]
        self.a[target] = [x + factor * y for x, y in zip(self.a[target], src)]
        self.ops.append(Transvection(target, source, factor))

    def factorization(self) -> List[Transvection]:
        # E_k ... E_1 Q = I  =>  Q = E_1^-1 ... E_k^-1
        return [op.inverse() for op in self.ops]


def sln_to_transvections(Q: Sequence[Sequence[Any]], ring) -> List[Transvection]:
    """
    Transvections whose left-to-right product is Q.

    Pivots are repaired with row additions only, never permutations.
    In float mode the last row is first divided by det Q so that the
    reduction ends on an exact unit pivot.

    Raises:
        ValueError: det Q != 1 (beyond tolerance in float mode)
    """
    n = len(Q)
    a = [[ring.coerce(x) for x in row] for row in Q]
    det = mat_det(a, ring)
    if ring.exact:
        if det != ring.one():
            raise ValueError(f"sln_to_transvections: det = {det}, expected 1")
    else:
        if not ring.close(det, ring.one()):
            raise ValueError(f"sln_to_transvections: det = {ring.to_complex(det)}, expected 1")
        a[n - 1] = [x * ring.inv(det) for x in a[n - 1]]

    red = _RowReducer(a, ring)
    for j in range(n - 1):
        _make_unit_pivot(red, j, n)
        for i in range(j + 1, n):
            red.add_row(i, j, -red.a[i][j])
    for j in range(n - 1, 0, -1):
        for i in range(j):
            red.add_row(i, j, -red.a[i][j])

    ts = red.factorization()
    logger.debug("sln_to_transvections: n=%d -> %d transvections", n, len(ts))
    return ts


def _make_unit_pivot(red: _RowReducer, j: int, n: int) -> None:
    ring = red.ring
    pivot = red.a[j][j]
    if ring.close(pivot, ring.one()):
        return
    below = next((i for i in range(j + 1, n) if not ring.is_zero(red.a[i][j])), None)
    if below is not None:
        # pivot + factor * a[below][j] == 1
        red.add_row(j, below, (ring.one() - pivot) * ring.inv(red.a[below][j]))
        return
    if ring.is_zero(pivot):
        raise ValueError("sln_to_transvections: singular column during reduction")
    # copy the pivot into the next row, then use it
    red.add_row(j + 1, j, ring.one())
    red.add_row(j, j + 1, (ring.one() - pivot) * ring.inv(red.a[j + 1][j]))


# ----------------------------------------------------------------------
# SL_2 over the parameter ring
# ----------------------------------------------------------------------


def _clean(p: UniPoly) -> UniPoly:
    field = p.ring
    return UniPoly([field.zero() if field.is_zero(c) else c for c in p.coeffs], field)


def sl2_polyring_to_transvections(M: Sequence[Sequence[Any]], ring) -> List[Transvection]:
    """
    Transvections with polynomial amounts whose product is M (2x2 over C[x]).

    Euclidean reduction of the first column, then unit-pivot repair and
    clearing. Amounts are UniPoly values of `ring` (a PolyRing).

    Raises:
        ValueError: not 2x2, or det M != 1 as a polynomial
    """
    if len(M) != 2 or any(len(row) != 2 for row in M):
        raise ValueError("sl2_polyring_to_transvections: matrix must be 2x2")
    a = [[ring.coerce(x) for x in row] for row in M]
    det = a[0][0] * a[1][1] - a[0][1] * a[1][0]
    if not ring.close(det, ring.one()):
        raise ValueError(f"sl2_polyring_to_transvections: det = {det}, expected 1")

    red = _RowReducer(a, ring)
    while not ring.is_zero(red.a[0][0]) and not ring.is_zero(red.a[1][0]):
        top, bottom = _clean(red.a[0][0]), _clean(red.a[1][0])
        if top.degree() >= bottom.degree():
            q, _ = top.divmod(bottom)
            red.add_row(0, 1, -q)
        else:
            q, _ = bottom.divmod(top)
            red.add_row(1, 0, -q)
        red.a = [[_clean(x) for x in row] for row in red.a]

    if ring.is_zero(red.a[0][0]):
        red.add_row(0, 1, ring.inv(red.a[1][0]))
    top = red.a[0][0]
    if not ring.close(top, ring.one()):
        if ring.is_zero(red.a[1][0]):
            red.add_row(1, 0, ring.one())
        red.add_row(0, 1, (ring.one() - top) * ring.inv(red.a[1][0]))
    red.add_row(1, 0, -red.a[1][0])
    red.add_row(0, 1, -red.a[0][1])

    ts = red.factorization()
    logger.debug("sl2_polyring_to_transvections: %d transvections", len(ts))
    return ts
