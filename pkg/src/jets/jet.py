"""
shearForge Jets
===============
Truncated multivariate Taylor maps of C^n at an anchor point.

Responsibilities:
- truncated polynomial helpers (dict: exponent tuple -> coefficient)
- JetMap / JetScalar value types with graded-lex serialization
- jet_compose, jet_inverse, jet_jacobian_det, jet_rebase, jet_exp

Coefficients are elements of a ring object (ExactField, FloatField or the
poly1 PolyRing); nothing here touches a concrete number type.
"""

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Any, Dict, List, Sequence, Tuple

from src.jets.linalg import mat_det, mat_inverse

Exponent = Tuple[int, ...]
TruncPoly = Dict[Exponent, Any]


# ======================================================================
# Monomials
# ======================================================================


def grlex_key(e: Exponent) -> Tuple:
    """Graded lexicographic order: total degree, then z1 > z2 > ... ."""
    return (sum(e), tuple(-x for x in e))


@lru_cache(maxsize=None)
def monomials(n: int, degree: int) -> Tuple[Exponent, ...]:
    """All exponents of total degree `degree` in n variables, graded-lex order."""
    out = []
    for combo in itertools.combinations_with_replacement(range(n), degree):
        e = [0] * n
        for i in combo:
            e[i] += 1
        out.append(tuple(e))
    return tuple(sorted(set(out), key=grlex_key))


def monomials_upto(n: int, order: int, start: int = 1) -> Tuple[Exponent, ...]:
    return tuple(e for d in range(start, order + 1) for e in monomials(n, d))


def unit_exponent(i: int, n: int) -> Exponent:
    return tuple(1 if j == i else 0 for j in range(n))


def multinomial(e: Exponent) -> int:
    total = math.factorial(sum(e))
    for x in e:
        total //= math.factorial(x)
    return total


# ======================================================================
# Truncated polynomials
# ======================================================================


def tp_clean(p: TruncPoly, ring) -> TruncPoly:
    return {e: c for e, c in p.items() if not ring.is_exact_zero(c)}


def tp_add(a: TruncPoly, b: TruncPoly, ring) -> TruncPoly:
    out = dict(a)
    for e, c in b.items():
        out[e] = out[e] + c if e in out else c
    return tp_clean(out, ring)


def tp_sub(a: TruncPoly, b: TruncPoly, ring) -> TruncPoly:
    out = dict(a)
    for e, c in b.items():
        out[e] = out[e] - c if e in out else -c
    return tp_clean(out, ring)


def tp_scale(a: TruncPoly, c, ring) -> TruncPoly:
    return tp_clean({e: c * v for e, v in a.items()}, ring)


def tp_truncate(a: TruncPoly, order: int) -> TruncPoly:
    return {e: c for e, c in a.items() if sum(e) <= order}


def tp_mul(a: TruncPoly, b: TruncPoly, order: int, ring) -> TruncPoly:
    out: TruncPoly = {}
    for ea, ca in a.items():
        da = sum(ea)
        if da > order:
            continue
        for eb, cb in b.items():
            if da + sum(eb) > order:
                continue
            e = tuple(x + y for x, y in zip(ea, eb))
            term = ca * cb
            out[e] = out[e] + term if e in out else term
    return tp_clean(out, ring)


def tp_constant(c, n: int, ring) -> TruncPoly:
    return tp_clean({(0,) * n: c}, ring)


def tp_linear(coeffs: Sequence[Any], ring, constant=None) -> TruncPoly:
    """sum_i coeffs[i] * t_i (+ constant)."""
    n = len(coeffs)
    out = {unit_exponent(i, n): c for i, c in enumerate(coeffs)}
    if constant is not None:
        out[(0,) * n] = constant
    return tp_clean(out, ring)


def tp_const_term(a: TruncPoly, n: int, ring):
    return a.get((0,) * n, ring.zero())


def tp_homogeneous(a: TruncPoly, degree: int) -> TruncPoly:
    return {e: c for e, c in a.items() if sum(e) == degree}


def tp_powers(p: TruncPoly, count: int, order: int, n: int, ring) -> List[TruncPoly]:
    """[1, p, p^2, ..., p^count] truncated to `order`."""
    pows = [tp_constant(ring.one(), n, ring)]
    for _ in range(count):
        pows.append(tp_mul(pows[-1], p, order, ring))
    return pows


def tp_compose(outer: TruncPoly, inner: Sequence[TruncPoly], order: int, n: int, ring) -> TruncPoly:
    """
    outer(inner_1, ..., inner_m) truncated to `order`.

    Inner polynomials must have zero constant term, so each monomial of
    outer of degree d only contributes in degrees >= d.
    """
    max_exp = [0] * len(inner)
    for e in outer:
        if sum(e) <= order:
            for j, x in enumerate(e):
                max_exp[j] = max(max_exp[j], x)
    pows = [tp_powers(inner[j], max_exp[j], order, n, ring) for j in range(len(inner))]
    out: TruncPoly = {}
    for e, c in outer.items():
        if sum(e) > order:
            continue
        term = tp_constant(c, n, ring)
        for j, x in enumerate(e):
            if x:
                term = tp_mul(term, pows[j][x], order, ring)
                if not term:
                    break
        out = tp_add(out, term, ring)
    return out


def tp_univariate(f, s: TruncPoly, order: int, n: int, ring) -> TruncPoly:
    """f(s) for a UniPoly f, by Horner with truncated products."""
    result: TruncPoly = {}
    for c in reversed(f.coeffs):
        result = tp_add(tp_mul(result, s, order, ring), tp_constant(ring.coerce(c), n, ring), ring)
    return result


def tp_exp(p: TruncPoly, order: int, n: int, ring) -> TruncPoly:
    """
    exp(p) truncated to `order`.

    The series part sum_{i<=order} (p-c)^i/i! is exact; a nonzero constant c
    contributes the single factor e^c (ValueError in exact mode).
    """
    c = tp_const_term(p, n, ring)
    rest = {e: v for e, v in p.items() if sum(e) > 0}
    total = tp_constant(ring.one(), n, ring)
    term = tp_constant(ring.one(), n, ring)
    for i in range(1, order + 1):
        term = tp_scale(tp_mul(term, rest, order, ring), ring.coerce(Fraction(1, i)), ring)
        if not term:
            break
        total = tp_add(total, term, ring)
    if ring.is_exact_zero(c):
        return total
    return tp_scale(total, ring.exp(c), ring)


def tp_derivative(a: TruncPoly, i: int, ring) -> TruncPoly:
    out: TruncPoly = {}
    for e, c in a.items():
        if e[i] == 0:
            continue
        d = list(e)
        d[i] -= 1
        out[tuple(d)] = c * ring.from_int(e[i])
    return tp_clean(out, ring)


# ======================================================================
# Value types
# ======================================================================


@dataclass(frozen=True, eq=False)
class JetMap:
    """
    k-jet of a map C^n -> C^n at `anchor`.

    Evaluation means value + sum coeffs * (z - anchor)^e; constant terms are
    never stored in `coeffs`.
    """
    n: int
    anchor: Tuple[Any, ...]
    value: Tuple[Any, ...]
    order: int
    coeffs: Tuple[TruncPoly, ...]
    ring: Any = field(repr=False)

    def __post_init__(self):
        if self.order < 1:
            raise ValueError(f"jet order must be >= 1, got {self.order}")
        if len(self.anchor) != self.n or len(self.value) != self.n or len(self.coeffs) != self.n:
            raise ValueError("jet dimension mismatch")

    # ------------------------------------------------------------------
    # Construction
    # ------------------------------------------------------------------

    @classmethod
    def build(cls, n: int, anchor, value, order: int, comps: Sequence[TruncPoly], ring) -> "JetMap":
        clean = tuple(
            tp_clean({e: ring.coerce(c) for e, c in tp_truncate(comp, order).items() if sum(e) >= 1}, ring)
            for comp in comps
        )
        return cls(n, tuple(ring.coerce(a) for a in anchor), tuple(ring.coerce(v) for v in value),
                   order, clean, ring)

    @classmethod
    def identity(cls, n: int, anchor, order: int, ring) -> "JetMap":
        comps = [{unit_exponent(i, n): ring.one()} for i in range(n)]
        return cls.build(n, anchor, anchor, order, comps, ring)

    @classmethod
    def linear(cls, matrix, anchor, value, order: int, ring) -> "JetMap":
        n = len(matrix)
        comps = [tp_linear(matrix[i], ring) for i in range(n)]
        return cls.build(n, anchor, value, order, comps, ring)

    # ------------------------------------------------------------------
    # Queries
    # ------------------------------------------------------------------

    def coefficient(self, component: int, exponent: Exponent):
        return self.coeffs[component].get(tuple(exponent), self.ring.zero())

    def linear_matrix(self) -> List[List[Any]]:
        return [[self.coefficient(i, unit_exponent(j, self.n)) for j in range(self.n)]
                for i in range(self.n)]

    def homogeneous_part(self, degree: int) -> Tuple[TruncPoly, ...]:
        return tuple(tp_homogeneous(c, degree) for c in self.coeffs)

    def nonlinear_part(self) -> Tuple[TruncPoly, ...]:
        return tuple({e: c for e, c in comp.items() if sum(e) >= 2} for comp in self.coeffs)

    def is_nondegenerate(self) -> bool:
        det = mat_det(self.linear_matrix(), self.ring)
        if self.ring.is_field:
            return not self.ring.is_zero(det)
        return self.ring.is_unit(det)

    def truncate(self, order: int) -> "JetMap":
        if order > self.order:
            raise ValueError(f"cannot raise jet order from {self.order} to {order}")
        return JetMap.build(self.n, self.anchor, self.value, order, self.coeffs, self.ring)

    def map_scalars(self, fn, ring) -> "JetMap":
        """Apply fn to every scalar (anchor, value, coefficients)."""
        comps = [{e: fn(c) for e, c in comp.items()} for comp in self.coeffs]
        return JetMap.build(self.n, [fn(a) for a in self.anchor], [fn(v) for v in self.value],
                            self.order, comps, ring)

    def specialize(self, x0) -> "JetMap":
        """Evaluate a poly1 jet at parameter value x0."""
        ring = self.ring
        return self.map_scalars(lambda c: ring.specialize(c, x0), ring.base)

    def with_ring(self, ring) -> "JetMap":
        return self.map_scalars(ring.coerce, ring)

    def evaluate(self, z: Sequence[Any]) -> Tuple[Any, ...]:
        """Evaluate the Taylor polynomial at z."""
        ring = self.ring
        d = [ring.coerce(zi) - ai for zi, ai in zip(z, self.anchor)]
        out = []
        for i in range(self.n):
            acc = self.value[i]
            for e, c in self.coeffs[i].items():
                term = c
                for j, x in enumerate(e):
                    for _ in range(x):
                        term = term * d[j]
                acc = acc + term
            out.append(acc)
        return tuple(out)

    # ------------------------------------------------------------------
    # Serialization
    # ------------------------------------------------------------------

    def to_dict(self) -> Dict:
        entries = []
        for i, comp in enumerate(self.coeffs):
            for e in sorted(comp, key=grlex_key):
                entry = {"component": i, "exponents": list(e)}
                entry.update(self.ring.to_json(comp[e]))
                entries.append(entry)
        return {
            "n": self.n,
            "order": self.order,
            "anchor": self.ring.vec_to_json(self.anchor),
            "value": self.ring.vec_to_json(self.value),
            "coeffs": entries,
        }

    @classmethod
    def from_dict(cls, data: Dict, ring) -> "JetMap":
        n = int(data["n"])
        comps: List[TruncPoly] = [{} for _ in range(n)]
        for entry in data.get("coeffs", []):
            i = int(entry["component"])
            e = tuple(int(x) for x in entry["exponents"])
            if not 0 <= i < n or len(e) != n:
                raise ValueError(f"jet coefficient entry out of range: component={i} exponents={list(e)}")
            if sum(e) == 0:
                raise ValueError("jet coefficients must not contain a constant term (use 'value')")
            scalar = {k: v for k, v in entry.items() if k not in ("component", "exponents")}
            comps[i][e] = ring.from_json(scalar)
        return cls.build(n, ring.vec_from_json(data["anchor"]), ring.vec_from_json(data["value"]),
                         int(data["order"]), comps, ring)


@dataclass(frozen=True, eq=False)
class JetScalar:
    """Truncated scalar Taylor polynomial at `anchor` (constant term included)."""
    n: int
    anchor: Tuple[Any, ...]
    order: int
    coeffs: TruncPoly
    ring: Any = field(repr=False)

    def coefficient(self, exponent: Exponent):
        return self.coeffs.get(tuple(exponent), self.ring.zero())

    def constant(self):
        return self.coefficient((0,) * self.n)

    def is_constant_one(self) -> bool:
        ring = self.ring
        for e, c in self.coeffs.items():
            target = ring.one() if sum(e) == 0 else ring.zero()
            if not ring.close(c, target):
                return False
        return (0,) * self.n in self.coeffs


# ======================================================================
# Operations
# ======================================================================


def identity_jet(n: int, anchor, order: int, ring) -> JetMap:
    return JetMap.identity(n, anchor, order, ring)


def _check_points_close(a, b, ring, what: str) -> None:
    if len(a) != len(b):
        raise ValueError(f"{what}: dimension mismatch ({len(a)} vs {len(b)})")
    if not all(ring.close(x, y) for x, y in zip(a, b)):
        raise ValueError(f"{what}: anchor mismatch")


def jet_compose(a: JetMap, b: JetMap, order: int) -> JetMap:
    """
    Jet of a o b at b.anchor, truncated to `order`.

    Raises:
        ValueError: b.value != a.anchor, or order above available data
    """
    if a.n != b.n:
        raise ValueError(f"jet_compose: dimension mismatch ({a.n} vs {b.n})")
    if order > min(a.order, b.order):
        raise ValueError(f"jet_compose: order {order} exceeds available data "
                         f"({a.order}, {b.order})")
    ring = a.ring
    _check_points_close(b.value, a.anchor, ring, "jet_compose")
    inner = list(b.coeffs)
    comps = [tp_compose(a.coeffs[i], inner, order, a.n, ring) for i in range(a.n)]
    return JetMap.build(a.n, b.anchor, a.value, order, comps, ring)


def jet_inverse(a: JetMap, order: int) -> JetMap:
    """
    Formal inverse J with a o J = id at a.value; anchor and value swap.

    Fixed-point iteration w <- L^-1 (u - N(w)), one degree per pass.
    """
    if order > a.order:
        raise ValueError(f"jet_inverse: order {order} exceeds jet order {a.order}")
    ring, n = a.ring, a.n
    try:
        l_inv = mat_inverse(a.linear_matrix(), ring)
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"jet_inverse: degenerate linear part ({exc})") from exc
    nonlinear = a.nonlinear_part()
    u = [{unit_exponent(i, n): ring.one()} for i in range(n)]
    w = [tp_linear(l_inv[i], ring) for i in range(n)]
    for t in range(2, order + 1):
        nw = [tp_compose(nonlinear[i], w, t, n, ring) for i in range(n)]
        rhs = [tp_sub(u[i], nw[i], ring) for i in range(n)]
        new_w = []
        for i in range(n):
            acc: TruncPoly = {}
            for j in range(n):
                if not ring.is_exact_zero(l_inv[i][j]):
                    acc = tp_add(acc, tp_scale(rhs[j], l_inv[i][j], ring), ring)
            new_w.append(acc)
        w = new_w
    return JetMap.build(n, a.value, a.anchor, order, w, ring)


def jet_jacobian_det(a: JetMap, order: int) -> JetScalar:
    """Truncated Taylor polynomial of det(Da) at the anchor."""
    if order > a.order - 1:
        raise ValueError(f"jet_jacobian_det: order {order} exceeds jet order - 1 ({a.order - 1})")
    ring, n = a.ring, a.n
    d = [[tp_truncate(tp_derivative(a.coeffs[i], j, ring), order) for j in range(n)]
         for i in range(n)]
    det = _tp_det(d, order, n, ring)
    return JetScalar(n, a.anchor, order, det, ring)


def _tp_det(m: List[List[TruncPoly]], order: int, n: int, ring) -> TruncPoly:
    size = len(m)
    if size == 1:
        return dict(m[0][0])
    total: TruncPoly = {}
    for j in range(size):
        if not m[0][j]:
            continue
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        term = tp_mul(m[0][j], _tp_det(minor, order, n, ring), order, ring)
        total = tp_add(total, term, ring) if j % 2 == 0 else tp_sub(total, term, ring)
    return total


def jet_rebase(a: JetMap, new_anchor: Sequence[Any], new_value: Sequence[Any]) -> JetMap:
    """Same coefficient table, new anchor and value (conjugation by translations)."""
    if len(new_anchor) != a.n or len(new_value) != a.n:
        raise ValueError(f"jet_rebase: dimension mismatch (n={a.n})")
    return JetMap.build(a.n, new_anchor, new_value, a.order, a.coeffs, a.ring)


def jet_exp(s: JetScalar) -> JetScalar:
    """Truncated exp of a scalar jet."""
    return JetScalar(s.n, s.anchor, s.order, tp_exp(s.coeffs, s.order, s.n, s.ring), s.ring)


def jet_difference(a: JetMap, b: JetMap) -> float:
    """Largest coefficient-wise modulus of a - b (values included); field rings only."""
    ring = a.ring
    worst = 0.0
    for x, y in zip(a.value, b.value):
        worst = max(worst, float(ring.abs(x - y)))
    for ca, cb in zip(a.coeffs, b.coeffs):
        for e in set(ca) | set(cb):
            if sum(e) > min(a.order, b.order):
                continue
            diff = ca.get(e, ring.zero()) - cb.get(e, ring.zero())
            worst = max(worst, float(ring.abs(diff)))
    return worst
