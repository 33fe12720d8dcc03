"""
shearForge Scalars
==================
Complex scalar fields used by every construction.

Responsibilities:
- GaussianRational: exact complex numbers over fractions.Fraction
- ExactField: exact ring operations, exact equality, no exp/log
- FloatField: mpmath complex numbers at a fixed mantissa precision
- JSON codec for scalars ({"re": ..., "im": ...})
"""

import math
from fractions import Fraction
from typing import Any, Optional

from mpmath.ctx_mp import MPContext


def _to_fraction(value: Any) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value.strip())
    return Fraction(value)


class GaussianRational:
    """
    Exact complex number re + i*im with Fraction parts.

    Values are treated as immutable; every operation returns a new object.
    """

    __slots__ = ("re", "im")

    def __init__(self, re: Any = 0, im: Any = 0):
        self.re = re if isinstance(re, Fraction) else _to_fraction(re)
        self.im = im if isinstance(im, Fraction) else _to_fraction(im)

    @staticmethod
    def _lift(other: Any) -> Optional["GaussianRational"]:
        if isinstance(other, GaussianRational):
            return other
        if isinstance(other, (int, Fraction)):
            return GaussianRational(other, 0)
        return None

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return GaussianRational(o.re - self.re, o.im - self.im)

    def __mul__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re * o.re - self.im * o.im,
                                self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self * o.reciprocal()

    def __rtruediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o * self.reciprocal()

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __pos__(self):
        return self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.reciprocal() ** (-k)
        result = GaussianRational(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def reciprocal(self) -> "GaussianRational":
        d = self.re * self.re + self.im * self.im
        if d == 0:
            raise ZeroDivisionError("GaussianRational division by zero")
        return GaussianRational(self.re / d, -self.im / d)

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def __abs__(self) -> float:
        return math.hypot(float(self.re), float(self.im))

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __bool__(self) -> bool:
        return bool(self.re) or bool(self.im)

    def __eq__(self, other) -> bool:
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self) -> int:
        return hash((self.re, self.im))

    def __repr__(self) -> str:
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self) -> str:
        if not self.im:
            return str(self.re)
        return f"({self.re}{'+' if self.im >= 0 else '-'}{abs(self.im)}i)"


# ======================================================================
# Fields
# ======================================================================


class ScalarField:
    """
    Common interface of the scalar fields.

    Generic code (jets, polynomials, linear algebra) only talks to scalars
    through a field or ring object, so the same code runs in exact mode,
    float mode and over the poly1 parameter ring.
    """

    mode = "abstract"
    exact = False
    is_field = True
    depth = 0

    @property
    def base(self) -> "ScalarField":
        return self

    def zero(self):
        return self.coerce(0)

    def one(self):
        return self.coerce(1)

    def from_int(self, k: int):
        return self.coerce(k)

    def embed(self, value):
        return self.coerce(value)

    def is_exact_zero(self, value) -> bool:
        return value == 0

    def close(self, a, b) -> bool:
        return self.is_zero(a - b)

    def inv(self, value):
        if self.is_zero(value):
            raise ZeroDivisionError("inverse of a zero scalar")
        return self.one() / value

    def conj(self, value):
        return value.conjugate()

    def abs(self, value) -> float:
        return float(abs(value))

    def to_complex(self, value) -> complex:
        return complex(value)

    def specialize(self, value, x0):
        return value

    def vec_to_json(self, vec):
        return [self.to_json(v) for v in vec]

    def vec_from_json(self, data):
        return tuple(self.from_json(v) for v in data)

    def coerce(self, value):
        raise NotImplementedError

    def is_zero(self, value) -> bool:
        raise NotImplementedError

    def to_json(self, value) -> dict:
        raise NotImplementedError

    def from_json(self, data):
        raise NotImplementedError


class ExactField(ScalarField):
    """Gaussian rationals: exact ring operations and exact equality."""

    mode = "exact"
    exact = True
    tol = 0

    def __eq__(self, other) -> bool:
        return isinstance(other, ExactField)

    def __hash__(self) -> int:
        return hash("exact")

    def __repr__(self) -> str:
        return "ExactField()"

    def coerce(self, value) -> GaussianRational:
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, (int, Fraction)):
            return GaussianRational(value, 0)
        if isinstance(value, float):
            return GaussianRational(Fraction(value), 0)
        if isinstance(value, complex):
            return GaussianRational(Fraction(value.real), Fraction(value.imag))
        if isinstance(value, str):
            return GaussianRational(_to_fraction(value), 0)
        raise TypeError(f"cannot coerce {type(value).__name__} to an exact scalar")

    def is_zero(self, value) -> bool:
        return not value

    def exp(self, value):
        if not value:
            return self.one()
        raise ValueError("exp requested in exact mode (nonzero argument)")

    def log(self, value):
        if value == 1:
            return self.zero()
        raise ValueError("log requested in exact mode (argument != 1)")

    def sqrt(self, value):
        raise ValueError("sqrt requested in exact mode")

    def to_json(self, value) -> dict:
        v = self.coerce(value)
        return {
            "re": f"{v.re.numerator}/{v.re.denominator}",
            "im": f"{v.im.numerator}/{v.im.denominator}",
        }

    def from_json(self, data) -> GaussianRational:
        if isinstance(data, dict):
            if "poly" in data:
                raise ValueError("parametric scalar given where a constant is required")
            return GaussianRational(_to_fraction(data.get("re", 0)),
                                    _to_fraction(data.get("im", 0)))
        if isinstance(data, (list, tuple)) and len(data) == 2:
            return GaussianRational(_to_fraction(data[0]), _to_fraction(data[1]))
        return self.coerce(data)


class FloatField(ScalarField):
    """
    mpmath complex numbers at a fixed mantissa precision.

    Each field owns a private MPContext, so two fields with different
    precisions never share global state.
    """

    mode = "float"
    exact = False

    def __init__(self, precision_bits: int = 128, tolerance: Optional[float] = None):
        if precision_bits < 64:
            raise ValueError(f"precision_bits must be >= 64 in float mode, got {precision_bits}")
        self.precision_bits = int(precision_bits)
        self.ctx = MPContext()
        self.ctx.prec = self.precision_bits
        if tolerance is None:
            self.tol = self.ctx.mpf(2) ** (-(self.precision_bits - 60))
        else:
            self.tol = self.ctx.mpf(tolerance)
        # enough digits to round-trip through JSON
        self.digits = int(math.ceil(self.precision_bits * math.log10(2))) + 3

    def __eq__(self, other) -> bool:
        return (isinstance(other, FloatField)
                and other.precision_bits == self.precision_bits
                and other.tol == self.tol)

    def __hash__(self) -> int:
        return hash(("float", self.precision_bits))

    def __repr__(self) -> str:
        return f"FloatField({self.precision_bits})"

    def _real(self, value):
        if isinstance(value, Fraction):
            return self.ctx.mpf(value.numerator) / value.denominator
        if isinstance(value, str):
            text = value.strip()
            if "/" in text:
                return self._real(Fraction(text))
            return self.ctx.mpf(text)
        return self.ctx.mpf(value)

    def coerce(self, value):
        if isinstance(value, self.ctx.mpc):
            return value
        if isinstance(value, GaussianRational):
            return self.ctx.mpc(self._real(value.re), self._real(value.im))
        if isinstance(value, (Fraction, str)):
            return self.ctx.mpc(self._real(value), 0)
        if isinstance(value, (int, float, complex)):
            return self.ctx.mpc(value)
        if hasattr(value, "real") and hasattr(value, "imag"):
            # mpc/mpf from another context
            return self.ctx.mpc(self.ctx.mpf(value.real), self.ctx.mpf(value.imag))
        raise TypeError(f"cannot coerce {type(value).__name__} to a float scalar")

    def is_zero(self, value) -> bool:
        return abs(value) <= self.tol

    def close(self, a, b) -> bool:
        scale = max(1, abs(a), abs(b))
        return abs(a - b) <= self.tol * scale

    def abs(self, value):
        return abs(value)

    def exp(self, value):
        return self.ctx.exp(value)

    def log(self, value):
        return self.ctx.log(value)

    def sqrt(self, value):
        return self.ctx.sqrt(value)

    def to_json(self, value) -> dict:
        v = self.coerce(value)
        return {
            "re": self.ctx.nstr(v.real, self.digits),
            "im": self.ctx.nstr(v.imag, self.digits),
        }

    def from_json(self, data):
        if isinstance(data, dict):
            if "poly" in data:
                raise ValueError("parametric scalar given where a constant is required")
            return self.ctx.mpc(self._real(data.get("re", 0)), self._real(data.get("im", 0)))
        if isinstance(data, (list, tuple)) and len(data) == 2:
            return self.ctx.mpc(self._real(data[0]), self._real(data[1]))
        return self.coerce(data)


def make_field(mode: str = "float", precision_bits: int = 128,
               tolerance: Optional[float] = None) -> ScalarField:
    """
    Build a scalar field from run configuration values.

    Args:
        mode: "exact" or "float"
        precision_bits: mantissa bits in float mode
        tolerance: comparison tolerance; None means 2^-(precision_bits-60)
    """
    if mode == "exact":
        return ExactField()
    if mode == "float":
        return FloatField(precision_bits, tolerance)
    raise ValueError(f"Unknown arithmetic mode '{mode}' (expected 'exact' or 'float')")
