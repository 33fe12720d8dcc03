"""
shearForge Univariate Polynomials
=================================
UniPoly over a scalar field or over the poly1 parameter ring.

Responsibilities:
- Dense polynomial arithmetic (low degree first)
- Horner evaluation, Taylor shift, derivative, synthetic division, divmod
- Batched evaluation that stays accurate when the coefficients cancel
- PolyRing: polynomials in the parameter x used as jet coefficients
"""

import math
from typing import Any, Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from mpmath.ctx_mp import MPContext

from src.jets.scalar import make_field

# complex128 values whose rounding bound exceeds this share of |p(z)| are re-evaluated
VALUES_REL_TOL = 2.0 ** -24
VALUES_ABS_FLOOR = 1e-30
# points per block when forming the (points x degree) envelope table
ENVELOPE_BLOCK = 2048
_LN2 = math.log(2.0)


class UniPoly:
    """
    Dense univariate polynomial, coefficients low degree first.

    The highest stored coefficient is nonzero unless the polynomial is zero
    (empty coefficient tuple).

    Args:
        coeffs: coefficient sequence, low degree first
        ring: coefficient field or ring (ExactField, FloatField or PolyRing)
    """

    __slots__ = ("coeffs", "ring")

    def __init__(self, coeffs: Iterable[Any], ring):
        cs = [ring.coerce(c) for c in coeffs]
        while cs and ring.is_exact_zero(cs[-1]):
            cs.pop()
        self.coeffs: Tuple[Any, ...] = tuple(cs)
        self.ring = ring

    # ------------------------------------------------------------------
    # Constructors
    # ------------------------------------------------------------------

    @classmethod
    def zero(cls, ring) -> "UniPoly":
        return cls((), ring)

    @classmethod
    def constant(cls, value, ring) -> "UniPoly":
        return cls((value,), ring)

    @classmethod
    def monomial(cls, value, k: int, ring) -> "UniPoly":
        return cls([ring.zero()] * k + [value], ring)

    @classmethod
    def linear_factor(cls, root, ring) -> "UniPoly":
        """zeta - root"""
        return cls((-ring.coerce(root), ring.one()), ring)

    # ------------------------------------------------------------------
    # Basic queries
    # ------------------------------------------------------------------

    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def coefficient(self, k: int):
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return self.ring.zero()

    def leading(self):
        return self.coeffs[-1] if self.coeffs else self.ring.zero()

    def is_constant(self) -> bool:
        return len(self.coeffs) <= 1

    def __len__(self) -> int:
        return len(self.coeffs)

    # ------------------------------------------------------------------
    # Arithmetic
    # ------------------------------------------------------------------

    def _as_poly(self, other):
        if isinstance(other, UniPoly):
            if other.ring.depth > self.ring.depth:
                return None
            if other.ring == self.ring:
                return other
        return UniPoly((self.ring.coerce(other),), self.ring)

    def __add__(self, other):
        o = self._as_poly(other)
        if o is None:
            return NotImplemented
        a, b = self.coeffs, o.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = out[i] + c
        return UniPoly(out, self.ring)

    __radd__ = __add__

    def __neg__(self):
        return UniPoly([-c for c in self.coeffs], self.ring)

    def __sub__(self, other):
        o = self._as_poly(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._as_poly(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._as_poly(other)
        if o is None:
            return NotImplemented
        if not self.coeffs or not o.coeffs:
            return UniPoly.zero(self.ring)
        out = [self.ring.zero()] * (len(self.coeffs) + len(o.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if self.ring.is_exact_zero(a):
                continue
            for j, b in enumerate(o.coeffs):
                out[i + j] = out[i + j] + a * b
        return UniPoly(out, self.ring)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        result = UniPoly.constant(self.ring.one(), self.ring)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def scale(self, value) -> "UniPoly":
        c = self.ring.coerce(value)
        return UniPoly([c * a for a in self.coeffs], self.ring)

    def __eq__(self, other) -> bool:
        if not isinstance(other, UniPoly):
            if len(self.coeffs) > 1:
                return False
            return self.coefficient(0) == self.ring.coerce(other)
        if len(self.coeffs) != len(other.coeffs):
            return False
        return all(a == b for a, b in zip(self.coeffs, other.coeffs))

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return f"UniPoly({list(self.coeffs)!r})"

    # ------------------------------------------------------------------
    # Evaluation and transforms
    # ------------------------------------------------------------------

    def __call__(self, point):
        """Horner evaluation; the result lives in the coefficient ring."""
        result = self.ring.zero()
        for c in reversed(self.coeffs):
            result = result * point + c
        return result

    def shift(self, s) -> "UniPoly":
        """Taylor shift: returns q with q(t) = self(t + s)."""
        step = UniPoly((self.ring.coerce(s), self.ring.one()), self.ring)
        result = UniPoly.zero(self.ring)
        for c in reversed(self.coeffs):
            result = result * step + c
        return result

    def derivative(self) -> "UniPoly":
        return UniPoly([c * self.ring.from_int(k) for k, c in enumerate(self.coeffs)][1:],
                       self.ring)

    def truncate(self, degree: int) -> "UniPoly":
        return UniPoly(self.coeffs[:degree + 1], self.ring)

    def map_coeffs(self, fn: Callable[[Any], Any], ring) -> "UniPoly":
        return UniPoly([fn(c) for c in self.coeffs], ring)

    def synthetic_division(self, root) -> Tuple["UniPoly", Any]:
        """Divide by (zeta - root); returns (quotient, remainder)."""
        if not self.coeffs:
            return UniPoly.zero(self.ring), self.ring.zero()
        r = self.ring.coerce(root)
        acc = self.ring.zero()
        quotient: List[Any] = []
        for c in reversed(self.coeffs):
            acc = acc * r + c
            quotient.append(acc)
        remainder = quotient.pop()
        return UniPoly(reversed(quotient), self.ring), remainder

    def vanishing_order(self, root, limit: int) -> int:
        """Number of exact (or within-tolerance) roots at `root`, capped at `limit`."""
        poly = self
        for k in range(limit):
            if poly.is_zero():
                return limit
            poly, rem = poly.synthetic_division(root)
            if not self.ring.is_zero(rem):
                return k
        return limit

    def divmod(self, divisor: "UniPoly") -> Tuple["UniPoly", "UniPoly"]:
        """Euclidean division over a field of coefficients."""
        if divisor.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        ring = self.ring
        rem = list(self.coeffs)
        dq = len(rem) - len(divisor.coeffs) + 1
        if dq <= 0:
            return UniPoly.zero(ring), self
        lead_inv = ring.inv(divisor.leading())
        quotient = [ring.zero()] * dq
        for k in range(dq - 1, -1, -1):
            c = rem[k + len(divisor.coeffs) - 1] * lead_inv
            quotient[k] = c
            if ring.is_exact_zero(c):
                continue
            for j, d in enumerate(divisor.coeffs):
                rem[k + j] = rem[k + j] - c * d
        # the top entries are cancelled by construction
        rem = rem[:len(divisor.coeffs) - 1]
        return UniPoly(quotient, ring), UniPoly(rem, ring)

    def to_numpy(self) -> np.ndarray:
        """complex128 coefficients (field coefficients only)."""
        return np.array([self.ring.to_complex(c) for c in self.coeffs], dtype=np.complex128)

    def log_abs_coeffs(self) -> np.ndarray:
        """log |c_k| per coefficient (-inf for zeros), without overflow."""
        return np.array([_log_abs(c, self.ring) for c in self.coeffs], dtype=np.float64)

    def log_envelope(self, points: np.ndarray) -> np.ndarray:
        """Upper bound on log(sum_k |c_k| |z|^k) at each point."""
        return _log_envelope(self.log_abs_coeffs(), np.asarray(points, dtype=np.complex128))

    def values(self, points: np.ndarray) -> np.ndarray:
        """
        complex128 values p(z) at an array of points (field coefficients only).

        Plain complex128 Horner is used where its rounding bound is small
        against |p(z)|. Remaining points are evaluated in a basis shifted to
        their centroid, computed at a working precision raised with the
        coefficient envelope, and as a last resort by Horner at that
        precision.
        """
        points = np.asarray(points, dtype=np.complex128)
        if not self.coeffs:
            return np.zeros(points.shape, dtype=np.complex128)
        log_abs = self.log_abs_coeffs()
        log_env = _log_envelope(log_abs, points)
        try:
            with np.errstate(all="ignore"):
                values = np.polynomial.polynomial.polyval(points, self.to_numpy())
        except OverflowError:
            values = np.full(points.shape, np.nan, dtype=np.complex128)
        bad = _untrusted(values, log_env, self.degree())
        if bad.any():
            values = values.copy()
            values[bad] = self._values_precise(points[bad], float(np.max(log_env[bad])))
        return values

    def _values_precise(self, points: np.ndarray, log_env_max: float) -> np.ndarray:
        field = self.ring
        degree = self.degree()
        bits = max(getattr(field, "precision_bits", 53), 53)
        if math.isfinite(log_env_max) and log_env_max > 0:
            bits += int(math.ceil(log_env_max / _LN2))
        bits += int(math.ceil(math.log2(degree + 1))) + 32
        ctx = MPContext()
        ctx.prec = bits
        coeffs = [_to_mp(c, field, ctx) for c in self.coeffs]

        center = complex(float(np.mean(points.real)), float(np.mean(points.imag)))
        c0 = ctx.mpc(center)
        # Taylor shift q(t) = p(t + center) by repeated synthetic division
        shifted = list(coeffs)
        for i in range(degree):
            for k in range(degree - 1, i - 1, -1):
                shifted[k] = shifted[k] + c0 * shifted[k + 1]
        offsets = points - center
        with np.errstate(all="ignore"):
            d128 = np.array([complex(x) for x in shifted], dtype=np.complex128)
            out = np.polynomial.polynomial.polyval(offsets, d128)
            log_d = np.log(np.abs(d128))
        still = _untrusted(out, _log_envelope(log_d, offsets), degree)
        if not np.all(np.isfinite(d128)):
            still[:] = True
        for i in np.flatnonzero(still):
            z = ctx.mpc(complex(points[i]))
            acc = ctx.mpc(0)
            for c in reversed(coeffs):
                acc = acc * z + c
            out[i] = complex(acc)
        return out

    def max_abs_on(self, points: np.ndarray) -> float:
        """Largest |p(z)| over an array of complex sample points."""
        if not self.coeffs:
            return 0.0
        return float(np.max(np.abs(self.values(points))))

    # ------------------------------------------------------------------
    # Serialization
    # ------------------------------------------------------------------

    def to_json(self) -> list:
        return [self.ring.to_json(c) for c in self.coeffs]

    @classmethod
    def from_json(cls, data: Sequence, ring) -> "UniPoly":
        return cls([ring.from_json(c) for c in data], ring)


# ----------------------------------------------------------------------
# Accurate batched evaluation
# ----------------------------------------------------------------------


def _log_abs(value, field) -> float:
    if field.exact:
        norm = value.re * value.re + value.im * value.im
        if not norm:
            return -math.inf
        return 0.5 * (math.log(norm.numerator) - math.log(norm.denominator))
    magnitude = abs(value)
    if not magnitude:
        return -math.inf
    return float(field.ctx.log(magnitude))


def _to_mp(value, field, ctx):
    """`value` as an mpc of `ctx`; exact when ctx is at least as precise as the field."""
    if field.exact:
        return ctx.mpc(ctx.mpf(value.re.numerator) / value.re.denominator,
                       ctx.mpf(value.im.numerator) / value.im.denominator)
    return ctx.mpc(ctx.mpf(value.real), ctx.mpf(value.imag))


def _log_envelope(log_abs: np.ndarray, points: np.ndarray) -> np.ndarray:
    """max_k (log|c_k| + k log|z|) + log(#terms), an upper bound on log sum |c_k||z|^k."""
    keep = np.isfinite(log_abs)
    out = np.full(points.shape, -np.inf)
    if not keep.any():
        return out
    ks = np.flatnonzero(keep).astype(np.float64)
    logs = log_abs[keep]
    with np.errstate(divide="ignore"):
        log_r = np.log(np.abs(points))
    for start in range(0, points.size, ENVELOPE_BLOCK):
        block = log_r.flat[start:start + ENVELOPE_BLOCK]
        with np.errstate(invalid="ignore"):
            terms = logs[None, :] + ks[None, :] * block[:, None]
        # 0 * log(0) is the constant term
        terms = np.where(ks[None, :] == 0, logs[None, :], terms)
        out.flat[start:start + ENVELOPE_BLOCK] = np.max(terms, axis=1)
    return out + math.log(len(logs))


def _untrusted(values: np.ndarray, log_env: np.ndarray, degree: int) -> np.ndarray:
    """Points where the complex128 rounding bound is not small against |value|."""
    log_err = log_env + math.log(4.0 * (degree + 1)) - 53 * _LN2
    with np.errstate(divide="ignore"):
        log_scale = np.log(np.maximum(VALUES_REL_TOL * np.abs(values), VALUES_ABS_FLOOR))
    return ~np.isfinite(values) | (log_err > log_scale)


def product(polys: Iterable[UniPoly], ring) -> UniPoly:
    result = UniPoly.constant(ring.one(), ring)
    for p in polys:
        result = result * p
    return result


# ======================================================================
# Parameter ring
# ======================================================================


class PolyRing:
    """
    Polynomials in the family parameter x over a scalar field.

    Used as the coefficient ring of jets and shear functions in the poly1
    track. Only constants are units.
    """

    is_field = False
    depth = 1

    def __init__(self, field):
        self.field = field
        self.exact = field.exact
        self.mode = f"poly1/{field.mode}"
        self.tol = field.tol

    @property
    def base(self):
        return self.field

    def __eq__(self, other) -> bool:
        return isinstance(other, PolyRing) and other.field == self.field

    def __hash__(self) -> int:
        return hash(("poly1", hash(self.field)))

    def __repr__(self) -> str:
        return f"PolyRing({self.field!r})"

    def coerce(self, value) -> UniPoly:
        if isinstance(value, UniPoly) and value.ring == self.field:
            return value
        if isinstance(value, UniPoly):
            raise TypeError("polynomial over a different ring")
        return UniPoly((self.field.coerce(value),), self.field)

    embed = coerce

    def zero(self) -> UniPoly:
        return UniPoly.zero(self.field)

    def one(self) -> UniPoly:
        return UniPoly.constant(self.field.one(), self.field)

    def from_int(self, k: int) -> UniPoly:
        return self.coerce(k)

    def variable(self) -> UniPoly:
        return UniPoly((self.field.zero(), self.field.one()), self.field)

    def is_exact_zero(self, value: UniPoly) -> bool:
        return value.is_zero()

    def is_zero(self, value: UniPoly) -> bool:
        return all(self.field.is_zero(c) for c in value.coeffs)

    def close(self, a: UniPoly, b: UniPoly) -> bool:
        return self.is_zero(a - b)

    def is_unit(self, value: UniPoly) -> bool:
        return value.degree() == 0 and not self.field.is_zero(value.coeffs[0])

    def inv(self, value: UniPoly) -> UniPoly:
        if not self.is_unit(value):
            raise ValueError("only nonzero constants are units of the parameter ring")
        return UniPoly.constant(self.field.inv(value.coeffs[0]), self.field)

    def exp(self, value: UniPoly) -> UniPoly:
        if value.degree() > 0:
            raise ValueError("exp of a nonconstant parameter polynomial")
        return UniPoly.constant(self.field.exp(value.coefficient(0)), self.field)

    def log(self, value: UniPoly) -> UniPoly:
        if not self.is_unit(value):
            raise ValueError("log of a nonconstant parameter polynomial")
        return UniPoly.constant(self.field.log(value.coeffs[0]), self.field)

    def conj(self, value: UniPoly) -> UniPoly:
        if value.degree() > 0:
            raise ValueError("conjugation of a nonconstant parameter polynomial")
        return UniPoly.constant(self.field.conj(value.coefficient(0)), self.field)

    def specialize(self, value: UniPoly, x0):
        return value(self.field.coerce(x0))

    def max_abs_on_grid(self, value: UniPoly, grid: Sequence) -> float:
        return max(float(self.field.abs(value(self.field.coerce(x)))) for x in grid)

    def to_json(self, value) -> dict:
        return {"poly": self.coerce(value).to_json()}

    def from_json(self, data) -> UniPoly:
        if isinstance(data, dict) and "poly" in data:
            return UniPoly.from_json(data["poly"], self.field)
        return self.coerce(self.field.from_json(data))

    def vec_to_json(self, vec):
        return [self.to_json(v) for v in vec]

    def vec_from_json(self, data):
        return tuple(self.from_json(v) for v in data)


def make_ring(mode: str = "float", precision_bits: int = 128,
              tolerance: Optional[float] = None, param: Optional[str] = None):
    """Scalar field for `mode`, wrapped in the parameter ring when param == 'poly1'."""
    field = make_field(mode, precision_bits, tolerance)
    if param in (None, "none"):
        return field
    if param == "poly1":
        return PolyRing(field)
    raise ValueError(f"Unknown parameter track '{param}' (expected 'poly1' or none)")


def describe_ring(ring) -> dict:
    """Arithmetic descriptor stored in certificates; inverse of make_ring."""
    base = ring.base
    out = {"mode": base.mode, "param": "poly1" if not ring.is_field else None}
    if not base.exact:
        out["precision_bits"] = base.precision_bits
        out["tolerance"] = float(base.tol)
    return out


def ring_from_descriptor(data: dict):
    return make_ring(data.get("mode", "float"), int(data.get("precision_bits", 128)),
                     data.get("tolerance"), data.get("param"))
