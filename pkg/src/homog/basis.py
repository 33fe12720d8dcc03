"""
shearForge Homogeneous Shear Bases
==================================
Generic shear/overshear generators spanning homogeneous polynomial vector
fields of degree r on C^n.

Responsibilities:
- HomogField: degree-r vector field as a coefficient table
- sample_shear_basis: seeded generic forms and kernel directions
- decompose_homog: unique coefficients c (shear type) and d (overshear type)
- divergence
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.jets.jet import TruncPoly, monomials, multinomial, tp_add, tp_derivative, tp_scale
from src.jets.linalg import LUFactorization, condition_number
from src.jets.scalar import GaussianRational
from src.jets.unipoly import UniPoly
from src.shears.primitives import apply_form, pairing

logger = logging.getLogger("shearForge.homog")

# Draws per form before a sampling round is declared failed
FORM_DRAWS = 256


# ======================================================================
# Fields
# ======================================================================


@dataclass(frozen=True, eq=False)
class HomogField:
    """Homogeneous polynomial vector field of degree r (one table per component)."""
    n: int
    r: int
    coeffs: Tuple[TruncPoly, ...]
    ring: Any = field(repr=False)

    def __post_init__(self):
        if len(self.coeffs) != self.n:
            raise ValueError("homogeneous field dimension mismatch")
        for comp in self.coeffs:
            for e in comp:
                if sum(e) != self.r:
                    raise ValueError(f"monomial {e} is not of degree {self.r}")

    @classmethod
    def zero(cls, n: int, r: int, ring) -> "HomogField":
        return cls(n, r, tuple({} for _ in range(n)), ring)

    def is_zero(self) -> bool:
        return all(self.ring.is_zero(c) for comp in self.coeffs for c in comp.values())

    def __add__(self, other: "HomogField") -> "HomogField":
        return HomogField(self.n, self.r, tuple(tp_add(a, b, self.ring) for a, b in zip(self.coeffs, other.coeffs)),
                          self.ring)

    def __sub__(self, other: "HomogField") -> "HomogField":
        return self + other.scale(-self.ring.one())

    def scale(self, c) -> "HomogField":
        return HomogField(self.n, self.r, tuple(tp_scale(comp, c, self.ring) for comp in self.coeffs), self.ring)

    def to_vector(self) -> List[Any]:
        """Coefficients in the monomial basis, component-major, graded-lex within."""
        zero = self.ring.zero()
        return [comp.get(e, zero) for comp in self.coeffs for e in monomials(self.n, self.r)]

    @classmethod
    def from_vector(cls, n: int, r: int, vec: Sequence[Any], ring) -> "HomogField":
        monos = monomials(n, r)
        comps = []
        for i in range(n):
            chunk = vec[i * len(monos):(i + 1) * len(monos)]
            comps.append({e: c for e, c in zip(monos, chunk) if not ring.is_exact_zero(c)})
        return cls(n, r, tuple(comps), ring)

    def max_abs(self) -> float:
        return max((float(self.ring.abs(c)) for comp in self.coeffs for c in comp.values()), default=0.0)


def field_dimension(n: int, r: int) -> int:
    return n * math.comb(n + r - 1, r)


def overshear_count(n: int, r: int) -> int:
    """Dimension of degree r-1 scalar polynomials (the divergence image)."""
    return math.comb(n + r - 2, r - 1)


def divergence(F: HomogField) -> TruncPoly:
    total: TruncPoly = {}
    for i, comp in enumerate(F.coeffs):
        total = tp_add(total, tp_derivative(comp, i, F.ring), F.ring)
    return total


# ----------------------------------------------------------------------
# Generators
# ----------------------------------------------------------------------


def form_power(form: Sequence[Any], degree: int, ring) -> TruncPoly:
    """(form . z)^degree expanded by the multinomial theorem."""
    n = len(form)
    out: TruncPoly = {}
    for e in monomials(n, degree):
        c = ring.from_int(multinomial(e))
        for fi, x in zip(form, e):
            for _ in range(x):
                c = c * fi
        if not ring.is_exact_zero(c):
            out[e] = c
    return out


def shear_generator(form, direction, r: int, ring) -> HomogField:
    """z -> (form z)^r * direction"""
    power = form_power(form, r, ring)
    return HomogField(len(form), r, tuple(tp_scale(power, v, ring) for v in direction), ring)


def overshear_generator(form, direction, r: int, ring) -> HomogField:
    """z -> (form z)^(r-1) * <z, direction> * direction"""
    n = len(form)
    power = form_power(form, r - 1, ring)
    pair: TruncPoly = {}
    for k in range(n):
        c = ring.conj(direction[k])
        if not ring.is_exact_zero(c):
            pair[tuple(1 if j == k else 0 for j in range(n))] = c
    product: TruncPoly = {}
    for ea, ca in power.items():
        for eb, cb in pair.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            product[e] = product[e] + ca * cb if e in product else ca * cb
    product = {e: c for e, c in product.items() if not ring.is_exact_zero(c)}
    return HomogField(n, r, tuple(tp_scale(product, w, ring) for w in direction), ring)


# ======================================================================
# Basis
# ======================================================================


@dataclass(eq=False)
class ShearBasis:
    """
    Shear-type pairs (lambda_j, v_j) and overshear-type pairs (mu_j, w_j)
    with a cached factorization of the generator matrix.
    """
    n: int
    r: int
    seed: int
    shear_pairs: List[Tuple[Tuple[Any, ...], Tuple[Any, ...]]]
    overshear_pairs: List[Tuple[Tuple[Any, ...], Tuple[Any, ...]]]
    ring: Any = field(repr=False)
    lu: Optional[LUFactorization] = field(default=None, repr=False)
    condition: Optional[float] = None

    @property
    def size(self) -> int:
        return len(self.shear_pairs) + len(self.overshear_pairs)

    def generators(self) -> List[HomogField]:
        gens = [shear_generator(l, v, self.r, self.ring) for l, v in self.shear_pairs]
        gens += [overshear_generator(m, w, self.r, self.ring) for m, w in self.overshear_pairs]
        return gens

    def matrix(self) -> List[List[Any]]:
        columns = [g.to_vector() for g in self.generators()]
        return [[col[i] for col in columns] for i in range(len(columns[0]))] if columns else []

    def forms(self) -> List[Tuple[Any, ...]]:
        return [l for l, _ in self.shear_pairs] + [m for m, _ in self.overshear_pairs]

    def to_dict(self) -> Dict:
        ring = self.ring
        return {
            "n": self.n,
            "r": self.r,
            "seed": self.seed,
            "shear_pairs": [{"form": ring.vec_to_json(l), "dir": ring.vec_to_json(v)}
                            for l, v in self.shear_pairs],
            "overshear_pairs": [{"form": ring.vec_to_json(m), "dir": ring.vec_to_json(w)}
                                for m, w in self.overshear_pairs],
        }


def draw_gaussian(rng: np.random.RandomState, bound: int, denominator: int, nonzero: bool = False):
    while True:
        re, im = rng.randint(-bound, bound + 1, size=2)
        if not nonzero or re or im:
            return GaussianRational(Fraction(int(re), denominator), Fraction(int(im), denominator))


def _norm(vec: Sequence[Any], ring) -> float:
    return math.sqrt(sum(float(ring.abs(x)) ** 2 for x in vec))


def _draw_form(rng, n, ring, axis_margin, coefficient_range, denominator, avoid, form_filter) -> Tuple[Optional[tuple], str]:
    failure = "no draw"
    for _ in range(FORM_DRAWS):
        lead = draw_gaussian(rng, coefficient_range, 1, nonzero=True)
        rest = [draw_gaussian(rng, coefficient_range, denominator) for _ in range(n - 1)]
        form = tuple(ring.coerce(c) for c in [lead] + rest)
        if float(ring.abs(form[0])) < axis_margin * _norm(form, ring):
            failure = f"axis margin |form(e1)| >= {axis_margin}*|form|"
            continue
        if any(ring.is_zero(apply_form(form, a, ring)) for a in avoid):
            failure = "form vanishes at an avoid point"
            continue
        if form_filter is not None and not form_filter(form):
            failure = "form rejected by the box filter"
            continue
        return form, ""
    return None, failure


def _kernel_direction(rng, form, ring, coefficient_range, normalize: bool) -> Optional[tuple]:
    """v = y - (form(y)/form(e1)) e1 for a random y; form(v) == 0 exactly."""
    n = len(form)
    for _ in range(FORM_DRAWS):
        y = [ring.coerce(draw_gaussian(rng, coefficient_range, 1)) for _ in range(n)]
        ratio = apply_form(form, y, ring) * ring.inv(form[0])
        v = [y[0] - ratio] + y[1:]
        if all(ring.is_zero(x) for x in v):
            continue
        if normalize:
            scale = ring.inv(ring.sqrt(pairing(v, v, ring)))
            v = [x * scale for x in v]
        return tuple(v)
    return None


def sample_shear_basis(
    n: int,
    r: int,
    ring,
    avoid: Sequence[Sequence[Any]] = (),
    axis_margin: float = 0.9,
    rng_seed: int = 0,
    max_rounds: int = 64,
    max_condition: float = 1e12,
    coefficient_range: int = 3,
    coefficient_denominator: int = 8,
    form_filter: Optional[Callable[[tuple], bool]] = None,
) -> ShearBasis:
    """
    Sample a generic shear basis for degree-r fields on C^n.

    Raises:
        ValueError: r < 1 or an avoid point at the origin
        RuntimeError: no admissible basis within max_rounds
    """
    if r < 1:
        raise ValueError(f"basis degree must be >= 1, got {r}")
    field_ring = ring.base
    avoid = [tuple(field_ring.coerce(x) for x in a) for a in avoid]
    for a in avoid:
        if all(field_ring.is_zero(x) for x in a):
            raise ValueError("avoid point at the origin")

    total = field_dimension(n, r)
    b_count = overshear_count(n, r)
    a_count = total - b_count
    rng = np.random.RandomState(rng_seed)
    failure = ""
    for round_index in range(max_rounds):
        shear_pairs, overshear_pairs = [], []
        form: Optional[tuple] = ()
        for kind, count in (("shear", a_count), ("overshear", b_count)):
            for _ in range(count):
                form, failure = _draw_form(rng, n, field_ring, axis_margin, coefficient_range,
                                           coefficient_denominator, avoid, form_filter)
                if form is None:
                    break
                direction = _kernel_direction(rng, form, field_ring, coefficient_range,
                                              normalize=(kind == "overshear" and not field_ring.exact))
                if direction is None:
                    form, failure = None, "no nonzero kernel direction"
                    break
                (shear_pairs if kind == "shear" else overshear_pairs).append((form, direction))
            if form is None:
                break
        if len(shear_pairs) != a_count or len(overshear_pairs) != b_count:
            logger.warning("basis n=%d r=%d round %d: %s", n, r, round_index, failure)
            continue
        basis = ShearBasis(n, r, rng_seed, shear_pairs, overshear_pairs, field_ring)
        matrix = basis.matrix()
        if not field_ring.exact:
            cond = condition_number(matrix, field_ring)
            if not np.isfinite(cond) or cond > max_condition:
                failure = f"condition {cond:.3e} > {max_condition:.1e}"
                logger.warning("basis n=%d r=%d round %d: %s", n, r, round_index, failure)
                continue
            basis.condition = cond
        lu = LUFactorization(matrix, field_ring)
        if lu.singular:
            failure = "generator matrix singular"
            logger.warning("basis n=%d r=%d round %d: %s", n, r, round_index, failure)
            continue
        basis.lu = lu
        logger.debug("basis n=%d r=%d accepted after %d round(s): %d shear + %d overshear",
                     n, r, round_index + 1, a_count, b_count)
        return basis
    raise RuntimeError(f"shear basis sampling failed for n={n}, r={r} after {max_rounds} rounds "
                       f"(last failure: {failure})")


# ----------------------------------------------------------------------
# Decomposition
# ----------------------------------------------------------------------


def _solve_field(basis: ShearBasis, vec: Sequence[Any]) -> List[Any]:
    return basis.lu.solve(list(vec))


def decompose_homog(F: HomogField, basis: ShearBasis) -> Tuple[List[Any], List[Any]]:
    """
    Coefficients (c, d) with F = sum c_j (lambda_j z)^r v_j
    + sum d_j (mu_j z)^(r-1) <z, w_j> w_j.

    Over the parameter ring the system is solved once per power of x, so
    c and d come back as polynomials in x.

    Raises:
        ValueError: dimension/degree mismatch, or a residual above tolerance
    """
    if F.n != basis.n or F.r != basis.r:
        raise ValueError(f"field (n={F.n}, r={F.r}) does not match basis (n={basis.n}, r={basis.r})")
    if basis.lu is None or basis.lu.singular:
        raise ValueError("basis has no usable factorization")
    a_count = len(basis.shear_pairs)
    ring = F.ring
    vec = F.to_vector()
    if ring.is_field:
        sol = _solve_field(basis, vec)
    else:
        field_ring = ring.base
        top = max((v.degree() for v in vec), default=-1)
        sol = [ring.zero() for _ in range(basis.size)]
        for t in range(top + 1):
            part = _solve_field(basis, [v.coefficient(t) for v in vec])
            sol = [s + UniPoly.monomial(p, t, field_ring) for s, p in zip(sol, part)]
    rebuilt = reconstruct(sol[:a_count], sol[a_count:], basis, ring)
    for a, b in zip(rebuilt.to_vector(), vec):
        if not ring.close(a, b):
            raise ValueError("homogeneous decomposition residual above tolerance (ill-conditioned basis)")
    return sol[:a_count], sol[a_count:]


def reconstruct(c: Sequence[Any], d: Sequence[Any], basis: ShearBasis, ring) -> HomogField:
    total = HomogField.zero(basis.n, basis.r, ring)
    gens = basis.generators()
    for coeff, gen in zip(list(c) + list(d), gens):
        if ring.is_exact_zero(coeff):
            continue
        lifted = HomogField(gen.n, gen.r, tuple({e: ring.coerce(v) for e, v in comp.items()} for comp in gen.coeffs),
                            ring)
        total = total + lifted.scale(coeff)
    return total
