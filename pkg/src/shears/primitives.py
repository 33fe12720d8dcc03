"""
shearForge Primitives
=====================
The four automorphism building blocks of C^n.

Responsibilities:
- Shear z + f(form(z)) dir, with form(dir) = 0
- Overshear z + (exp(f(form(z))) - 1) <z - center, dir> dir, with form(dir) = 0
- Translation and invertible Linear maps
- closed-form inverses, pointwise and batched (numpy) evaluation, jets
- JSON codec for certificates

The pairing <u, w> is sum u_i * conj(w_i); the maps stay holomorphic in z
because w is fixed.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from src.jets.jet import JetMap, tp_exp, tp_linear, tp_mul, tp_scale, tp_sub, tp_univariate, unit_exponent
from src.jets.linalg import mat_det, mat_inverse, mat_vec
from src.jets.unipoly import UniPoly

logger = logging.getLogger("shearForge.shears")

Vec = Tuple[Any, ...]


# ----------------------------------------------------------------------
# Vector helpers
# ----------------------------------------------------------------------


def apply_form(form: Sequence[Any], z: Sequence[Any], ring):
    acc = ring.zero()
    for c, x in zip(form, z):
        if not ring.is_exact_zero(c):
            acc = acc + c * x
    return acc


def pairing(z: Sequence[Any], w: Sequence[Any], ring):
    """<z, w> = sum z_i conj(w_i)."""
    acc = ring.zero()
    for x, y in zip(z, w):
        if not ring.is_exact_zero(y):
            acc = acc + x * ring.conj(y)
    return acc


def vec_add(a, b) -> Vec:
    return tuple(x + y for x, y in zip(a, b))


def vec_sub(a, b) -> Vec:
    return tuple(x - y for x, y in zip(a, b))


def vec_scale(a, c) -> Vec:
    return tuple(c * x for x in a)


def vec_norm2(v, ring):
    return pairing(v, v, ring)


def to_numpy_vec(v: Sequence[Any], ring) -> np.ndarray:
    return np.array([ring.to_complex(x) for x in v], dtype=np.complex128)


def _check_dimensions(g, z) -> None:
    if len(z) != g.n:
        raise ValueError(f"{g.variant}: point has dimension {len(z)}, expected {g.n}")


# ======================================================================
# Primitives
# ======================================================================


class Primitive:
    """Common interface; concrete variants are frozen dataclasses."""

    variant = "abstract"
    volume_preserving = False

    @property
    def n(self) -> int:
        raise NotImplementedError

    def eval(self, z: Sequence[Any]) -> Vec:
        raise NotImplementedError

    def eval_numpy(self, points: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def inverse(self) -> "Primitive":
        raise NotImplementedError

    def jet(self, anchor: Sequence[Any], order: int) -> JetMap:
        raise NotImplementedError

    def specialize(self, x0) -> "Primitive":
        raise NotImplementedError

    def to_dict(self) -> Dict:
        raise NotImplementedError


def _vec(values, ring) -> Vec:
    return tuple(ring.coerce(v) for v in values)


@dataclass(frozen=True)
class Shear(Primitive):
    """z -> z + f(form(z)) * dir."""
    form: Vec
    dir: Vec
    f: UniPoly
    ring: Any

    variant = "shear"
    volume_preserving = True

    def __post_init__(self):
        if len(self.form) != len(self.dir):
            raise ValueError("shear: form and direction dimensions differ")
        if not self.ring.is_zero(apply_form(self.form, self.dir, self.ring)):
            raise ValueError("shear: form(dir) must vanish")

    @classmethod
    def build(cls, form, direction, f: UniPoly, ring) -> "Shear":
        return cls(_vec(form, ring), _vec(direction, ring), f, ring)

    @property
    def n(self) -> int:
        return len(self.form)

    def eval(self, z):
        _check_dimensions(self, z)
        ring = self.ring
        z = _vec(z, ring)
        amount = self.f(apply_form(self.form, z, ring))
        return tuple(zi + amount * di for zi, di in zip(z, self.dir))

    def eval_numpy(self, points):
        lam = points @ to_numpy_vec(self.form, self.ring)
        amount = self.f.values(lam)
        return points + amount[:, None] * to_numpy_vec(self.dir, self.ring)[None, :]

    def inverse(self):
        return Shear(self.form, self.dir, -self.f, self.ring)

    def jet(self, anchor, order):
        ring, n = self.ring, self.n
        anchor = _vec(anchor, ring)
        shifted = self.f.shift(apply_form(self.form, anchor, ring))
        lam = tp_linear(self.form, ring)
        series = {e: c for e, c in tp_univariate(shifted, lam, order, n, ring).items() if sum(e) > 0}
        comps = []
        for i in range(n):
            comp = {unit_exponent(i, n): ring.one()}
            if not ring.is_exact_zero(self.dir[i]):
                comp = _merge(comp, tp_scale(series, self.dir[i], ring), ring)
            comps.append(comp)
        return JetMap.build(n, anchor, self.eval(anchor), order, comps, ring)

    def specialize(self, x0):
        base = self.ring.base
        spec = lambda c: self.ring.specialize(c, x0)
        return Shear(tuple(spec(c) for c in self.form), tuple(spec(c) for c in self.dir),
                     self.f.map_coeffs(spec, base), base)

    def to_dict(self):
        return {
            "variant": self.variant,
            "form": self.ring.vec_to_json(self.form),
            "dir": self.ring.vec_to_json(self.dir),
            "poly": self.f.to_json(),
        }


@dataclass(frozen=True)
class Overshear(Primitive):
    """z -> z + (exp(f(form(z))) - 1) * <z - center, dir> * dir."""
    form: Vec
    dir: Vec
    f: UniPoly
    ring: Any
    center: Optional[Vec] = None

    variant = "overshear"
    volume_preserving = False

    def __post_init__(self):
        if len(self.form) != len(self.dir):
            raise ValueError("overshear: form and direction dimensions differ")
        if not self.ring.is_zero(apply_form(self.form, self.dir, self.ring)):
            raise ValueError("overshear: form(dir) must vanish")
        if self.center is not None and len(self.center) != len(self.form):
            raise ValueError("overshear: center dimension mismatch")

    @classmethod
    def build(cls, form, direction, f: UniPoly, ring, center=None) -> "Overshear":
        c = None if center is None else _vec(center, ring)
        return cls(_vec(form, ring), _vec(direction, ring), f, ring, c)

    @property
    def n(self) -> int:
        return len(self.form)

    def _offset(self, z):
        return z if self.center is None else vec_sub(z, self.center)

    def eval(self, z):
        _check_dimensions(self, z)
        ring = self.ring
        z = _vec(z, ring)
        exponent = self.f(apply_form(self.form, z, ring))
        # ExactField.exp raises unless the exponent is exactly 0
        factor = ring.exp(exponent) - ring.one()
        amount = factor * pairing(self._offset(z), self.dir, ring)
        return tuple(zi + amount * di for zi, di in zip(z, self.dir))

    def eval_numpy(self, points):
        ring = self.ring
        lam = points @ to_numpy_vec(self.form, ring)
        w = to_numpy_vec(self.dir, ring)
        exponent = self.f.values(lam)
        shifted = points if self.center is None else points - to_numpy_vec(self.center, ring)[None, :]
        amount = (np.exp(exponent) - 1.0) * (shifted @ np.conj(w))
        return points + amount[:, None] * w[None, :]

    def inverse(self):
        return Overshear(self.form, self.dir, -self.f, self.ring, self.center)

    def jet(self, anchor, order):
        ring, n = self.ring, self.n
        anchor = _vec(anchor, ring)
        shifted = self.f.shift(apply_form(self.form, anchor, ring))
        exponent = tp_univariate(shifted, tp_linear(self.form, ring), order, n, ring)
        growth = tp_sub(tp_exp(exponent, order, n, ring), {(0,) * n: ring.one()}, ring)
        conj_dir = [ring.conj(d) for d in self.dir]
        pair = tp_linear(conj_dir, ring, constant=pairing(self._offset(anchor), self.dir, ring))
        series = {e: c for e, c in tp_mul(growth, pair, order, ring).items() if sum(e) > 0}
        comps = []
        for i in range(n):
            comp = {unit_exponent(i, n): ring.one()}
            if not ring.is_exact_zero(self.dir[i]):
                comp = _merge(comp, tp_scale(series, self.dir[i], ring), ring)
            comps.append(comp)
        return JetMap.build(n, anchor, self.eval(anchor), order, comps, ring)

    def specialize(self, x0):
        base = self.ring.base
        spec = lambda c: self.ring.specialize(c, x0)
        center = None if self.center is None else tuple(spec(c) for c in self.center)
        return Overshear(tuple(spec(c) for c in self.form), tuple(spec(c) for c in self.dir),
                         self.f.map_coeffs(spec, base), base, center)

    def to_dict(self):
        out = {
            "variant": self.variant,
            "form": self.ring.vec_to_json(self.form),
            "dir": self.ring.vec_to_json(self.dir),
            "poly": self.f.to_json(),
        }
        if self.center is not None:
            out["center"] = self.ring.vec_to_json(self.center)
        return out


@dataclass(frozen=True)
class Translation(Primitive):
    """z -> z + t."""
    t: Vec
    ring: Any

    variant = "translation"
    volume_preserving = True

    @property
    def n(self) -> int:
        return len(self.t)

    def eval(self, z):
        _check_dimensions(self, z)
        return vec_add(_vec(z, self.ring), self.t)

    def eval_numpy(self, points):
        return points + to_numpy_vec(self.t, self.ring)[None, :]

    def inverse(self):
        return Translation(tuple(-x for x in self.t), self.ring)

    def jet(self, anchor, order):
        anchor = _vec(anchor, self.ring)
        jet = JetMap.identity(self.n, anchor, order, self.ring)
        return JetMap.build(self.n, anchor, self.eval(anchor), order, jet.coeffs, self.ring)

    def specialize(self, x0):
        return Translation(tuple(self.ring.specialize(c, x0) for c in self.t), self.ring.base)

    def to_dict(self):
        return {"variant": self.variant, "t": self.ring.vec_to_json(self.t)}


@dataclass(frozen=True)
class Linear(Primitive):
    """z -> M z with det M != 0 (a unit over the parameter ring)."""
    matrix: Tuple[Tuple[Any, ...], ...]
    ring: Any

    variant = "linear"

    def __post_init__(self):
        det = mat_det(self.matrix, self.ring)
        if self.ring.is_field and self.ring.is_zero(det):
            raise ValueError("linear: matrix is singular")
        if not self.ring.is_field and not self.ring.is_unit(det):
            raise ValueError("linear: determinant is not a unit of the parameter ring")

    @classmethod
    def build(cls, matrix, ring) -> "Linear":
        return cls(tuple(tuple(ring.coerce(x) for x in row) for row in matrix), ring)

    @property
    def n(self) -> int:
        return len(self.matrix)

    @property
    def volume_preserving(self) -> bool:
        return self.ring.close(mat_det(self.matrix, self.ring), self.ring.one())

    def determinant(self):
        return mat_det(self.matrix, self.ring)

    def eval(self, z):
        _check_dimensions(self, z)
        return tuple(mat_vec(self.matrix, _vec(z, self.ring), self.ring))

    def eval_numpy(self, points):
        m = np.array([[self.ring.to_complex(x) for x in row] for row in self.matrix], dtype=np.complex128)
        return points @ m.T

    def inverse(self):
        return Linear.build(mat_inverse(self.matrix, self.ring), self.ring)

    def jet(self, anchor, order):
        anchor = _vec(anchor, self.ring)
        return JetMap.linear(self.matrix, anchor, self.eval(anchor), order, self.ring)

    def specialize(self, x0):
        base = self.ring.base
        return Linear(tuple(tuple(self.ring.specialize(x, x0) for x in row) for row in self.matrix), base)

    def to_dict(self):
        return {"variant": self.variant,
                "matrix": [self.ring.vec_to_json(row) for row in self.matrix]}


def _merge(a, b, ring):
    out = dict(a)
    for e, c in b.items():
        out[e] = out[e] + c if e in out else c
    return {e: c for e, c in out.items() if not ring.is_exact_zero(c)}


# ----------------------------------------------------------------------
# Codec
# ----------------------------------------------------------------------


def primitive_from_dict(data: Dict, ring) -> Primitive:
    """
    Rebuild a primitive from its certificate entry.

    Raises:
        ValueError: unknown variant or a violated primitive invariant
    """
    variant = data.get("variant")
    if variant in ("shear", "overshear"):
        form = ring.vec_from_json(data["form"])
        direction = ring.vec_from_json(data["dir"])
        f = UniPoly([ring.from_json(c) for c in data.get("poly", [])], ring)
        if variant == "shear":
            return Shear(form, direction, f, ring)
        center = data.get("center")
        return Overshear(form, direction, f, ring,
                         None if center is None else ring.vec_from_json(center))
    if variant == "translation":
        return Translation(ring.vec_from_json(data["t"]), ring)
    if variant == "linear":
        return Linear(tuple(ring.vec_from_json(row) for row in data["matrix"]), ring)
    raise ValueError(f"Unknown primitive variant '{variant}'")


def primitive_eval(g: Primitive, z: Sequence[Any]) -> Vec:
    return g.eval(z)


def primitive_inverse(g: Primitive) -> Primitive:
    return g.inverse()
