"""
shearForge Linear Stage
=======================
Realizes a linear part by an overshear (determinant) and shears (transvections).

Responsibilities:
- DualBasis: forms lambda_l and vectors e_l with lambda_j(e_l) = delta_jl
- det_fix_overshear: S0 with Jacobian exp(f(lambda_1 z)), f(0) = log det Q
- transvection_to_shear: T(j, l, a) -> z + f(lambda_l z) e_j, f'(0) = a
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, List, Optional, Sequence, Tuple

import numpy as np

from src.jets.linalg import identity_matrix, mat_det, mat_inverse, mat_mul
from src.homog.basis import FORM_DRAWS, draw_gaussian
from src.jets.scalar import GaussianRational
from src.onevar.interp_function import interp_along_form
from src.shears.primitives import Overshear, Shear, pairing
from src.linear.transvections import Transvection

logger = logging.getLogger("shearForge.linear")


@dataclass(frozen=True)
class DualBasis:
    """Rows of Lambda are the forms; columns of B are the vectors; Lambda B = I."""
    forms: Tuple[Tuple[Any, ...], ...]
    vectors: Tuple[Tuple[Any, ...], ...]

    @classmethod
    def standard(cls, n: int, ring) -> "DualBasis":
        eye = identity_matrix(n, ring)
        return cls(tuple(tuple(row) for row in eye), tuple(tuple(row) for row in eye))

    @classmethod
    def from_vectors(cls, columns: Sequence[Sequence[Any]], ring) -> "DualBasis":
        n = len(columns)
        b = [[columns[l][i] for l in range(n)] for i in range(n)]
        lam = mat_inverse(b, ring)
        return cls(tuple(tuple(row) for row in lam), tuple(tuple(c) for c in columns))

    @classmethod
    def from_forms(cls, forms: Sequence[Sequence[Any]], ring) -> "DualBasis":
        lam = [list(f) for f in forms]
        b = mat_inverse(lam, ring)
        n = len(lam)
        return cls(tuple(tuple(f) for f in lam), tuple(tuple(b[i][l] for i in range(n)) for l in range(n)))

    @property
    def n(self) -> int:
        return len(self.forms)

    def to_local(self, q, ring):
        """Lambda Q B: the matrix in the coordinates of the dual basis."""
        b = [[self.vectors[l][i] for l in range(self.n)] for i in range(self.n)]
        return mat_mul(mat_mul([list(r) for r in self.forms], q, ring), b, ring)

    def to_dict(self, ring) -> dict:
        return {"forms": [ring.vec_to_json(f) for f in self.forms],
                "vectors": [ring.vec_to_json(v) for v in self.vectors]}


def _draw_dominated_form(rng, n: int, axis: Optional[int], coefficient_range: int,
                         denominator: int, axis_margin: float) -> Optional[List[GaussianRational]]:
    """A Gaussian-rational form; when `axis` is set its coefficient there dominates."""
    for _ in range(FORM_DRAWS):
        form = [draw_gaussian(rng, coefficient_range, denominator) for _ in range(n)]
        if axis is None:
            return form
        form[axis] = draw_gaussian(rng, coefficient_range, 1, nonzero=True)
        norm = np.sqrt(sum(abs(complex(c)) ** 2 for c in form))
        if abs(complex(form[axis])) >= axis_margin * norm:
            return form
    return None


def sample_dual_basis(
    n: int,
    ring,
    admissible: Callable[[Tuple[Any, ...]], bool],
    rng_seed: int = 0,
    max_rounds: int = 64,
    coefficient_range: int = 3,
    coefficient_denominator: int = 8,
    axis_margin: float = 0.9,
) -> DualBasis:
    """
    Standard basis if all its forms are admissible, otherwise seeded
    generic forms Lambda with the vectors B = Lambda^-1.

    Round k draws every form dominated by the axis k mod (n + 1); the extra
    residue draws forms with no dominant axis. A box that misses 0 along one
    coordinate only is served by the rounds dominated by that coordinate.

    Raises:
        RuntimeError: no admissible basis within max_rounds
    """
    candidate = DualBasis.standard(n, ring)
    if all(admissible(f) for f in candidate.forms):
        return candidate
    rng = np.random.RandomState(rng_seed)
    for round_index in range(max_rounds):
        axis = round_index % (n + 1)
        axis = None if axis == n else axis
        forms = [_draw_dominated_form(rng, n, axis, coefficient_range, coefficient_denominator, axis_margin)
                 for _ in range(n)]
        if any(f is None for f in forms):
            continue
        forms = [tuple(ring.coerce(c) for c in f) for f in forms]
        if not all(admissible(f) for f in forms):
            continue
        try:
            candidate = DualBasis.from_forms(forms, ring)
        except ValueError:
            continue
        logger.debug("dual basis accepted after %d round(s) (dominant axis %s)", round_index + 1, axis)
        return candidate
    raise RuntimeError(f"no admissible dual basis for n={n} after {max_rounds} rounds")


# ----------------------------------------------------------------------
# Determinant fix
# ----------------------------------------------------------------------


def det_fix_overshear(
    Q: Sequence[Sequence[Any]],
    dual: DualBasis,
    fix: Sequence[Tuple[Sequence[Any], int]],
    zeros: Sequence[Sequence[Any]],
    box,
    eps: Optional[float],
    ring,
    anchor: Optional[Sequence[Any]] = None,
    grid_resolution: int = 65,
    max_retries: int = 32,
    param_grid: Optional[Sequence[Any]] = None,
    max_power: int = 1024,
) -> Tuple[Optional[Overshear], List[List[Any]]]:
    """
    Overshear S0 with det D S0(anchor) = det Q, and Q (D S0)^-1.

    `eps` bounds |S0(z) - z| on K; it is converted to the exponent bound
    log(1 + eps / (R |w|^2)) with R the corner radius of K about the anchor.

    Returns:
        (None, Q) when det Q == 1, else (S0, Q') with det Q' == 1

    Raises:
        ValueError: det Q != 1 in exact mode, a nonconstant parametric
            determinant, or a constraint collision
    """
    n = len(Q)
    q = [[ring.coerce(x) for x in row] for row in Q]
    det = mat_det(q, ring)
    if ring.close(det, ring.one()):
        return None, q
    if ring.base.exact:
        raise ValueError("det_fix_overshear: det != 1 needs a logarithm, unavailable in exact mode")
    if ring.is_field and ring.is_zero(det):
        raise ValueError("det_fix_overshear: singular linear part")
    if not ring.is_field and not ring.is_unit(det):
        raise ValueError("det_fix_overshear: parametric determinant must be a nonzero constant")
    anchor = tuple(ring.zero() for _ in range(n)) if anchor is None else tuple(ring.coerce(x) for x in anchor)

    form = dual.forms[0]
    w = dual.vectors[1]
    w = tuple(x * ring.inv(ring.base.sqrt(_constant(pairing(w, w, ring), ring))) for x in w)
    f_eps = None
    if eps is not None and box is not None:
        radius = box.corner_radius([_constant(x, ring) for x in anchor])
        f_eps = float(np.log1p(eps / max(radius, 1e-300)))
    f = interp_along_form(form, anchor, ring.log(det), 0, fix, zeros, box, f_eps, ring,
                          grid_resolution, max_retries, param_grid, max_power)
    center = anchor if any(not ring.is_exact_zero(x) for x in anchor) else None
    s0 = Overshear(tuple(form), w, f, ring, center)

    # (I + (d - 1) w w^H)^-1 = I + (1/d - 1) w w^H for |w| = 1
    factor = ring.inv(det) - ring.one()
    l0_inv = identity_matrix(n, ring)
    for i in range(n):
        for j in range(n):
            l0_inv[i][j] = l0_inv[i][j] + factor * w[i] * ring.conj(w[j])
    q_fixed = mat_mul(q, l0_inv, ring)
    logger.debug("det_fix_overshear: det=%s, deg f=%d", ring.to_complex(_constant(det, ring)), f.degree())
    return s0, q_fixed


def _constant(value, ring):
    return value if ring.is_field else value.coefficient(0)


# ----------------------------------------------------------------------
# Transvections as shears
# ----------------------------------------------------------------------


def transvection_to_shear(
    t: Transvection,
    dual: DualBasis,
    fix: Sequence[Tuple[Sequence[Any], int]],
    zeros: Sequence[Sequence[Any]],
    box,
    eps: Optional[float],
    ring,
    anchor: Optional[Sequence[Any]] = None,
    r_lead: int = 1,
    grid_resolution: int = 65,
    max_retries: int = 32,
    param_grid: Optional[Sequence[Any]] = None,
    max_power: int = 1024,
) -> Shear:
    """
    Shear z + f(lambda_l z) e_j whose linear part at the anchor is
    B T(j, l, a) B^-1 (exactly T(j, l, a) in the standard basis).

    `eps` bounds |shear(z) - z| on K; the function bound is eps / |e_j|.
    """
    n = dual.n
    anchor = tuple(ring.zero() for _ in range(n)) if anchor is None else tuple(ring.coerce(x) for x in anchor)
    form = dual.forms[t.col]
    direction = dual.vectors[t.row]
    f_eps = None
    if eps is not None:
        size = float(np.sqrt(float(ring.base.abs(_constant(pairing(direction, direction, ring), ring)))))
        f_eps = eps / size
    f = interp_along_form(form, anchor, t.amount, r_lead, fix, zeros, box, f_eps, ring,
                          grid_resolution, max_retries, param_grid, max_power)
    return Shear(tuple(form), tuple(direction), f, ring)


def shears_for_linear_part(
    Q: Sequence[Sequence[Any]],
    dual: DualBasis,
    ring,
    factorize: Callable,
    eps: Optional[float] = None,
    **kwargs,
) -> Tuple[List[Shear], List[Transvection]]:
    """
    Factor Lambda Q B into transvections and convert each into a shear.
    The stage bound `eps` is split evenly over the factors.

    The returned shears are in word order: their composition has linear
    part Q at the anchor.
    """
    local = dual.to_local([list(r) for r in Q], ring)
    ts = factorize(local, ring)
    per_factor = None if eps is None or not ts else eps / len(ts)
    return [transvection_to_shear(t, dual, eps=per_factor, ring=ring, **kwargs) for t in ts], ts
