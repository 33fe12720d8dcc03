"""
shearForge One-Variable Interpolation
=====================================
Polynomials f with a prescribed leading jet at 0, prescribed vanishing at
finitely many points and small modulus on a rectangle avoiding 0.

Responsibilities:
- separating_direction: half-plane margin of a rectangle around 0
- build_interp_function: f = beta * zeta^r * h(zeta) * u(zeta)^M / h(0)
- grid certification of the smallness bound, with retries
"""

import cmath
import logging
import math
from fractions import Fraction
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np

from src.jets.scalar import GaussianRational
from src.jets.unipoly import UniPoly, product
from src.onevar.boxes import PlaneBox
from src.shears.primitives import apply_form

logger = logging.getLogger("shearForge.onevar")

# Ternary-search iterations for the smallness parameter s
S_SEARCH_STEPS = 80
# Denominator cap when s is rationalised in exact mode
S_DENOMINATOR = 64


def separating_direction(box: PlaneBox) -> Tuple[float, float]:
    """
    Direction e^{i theta} and margin delta with Re(e^{-i theta} zeta) >= delta on the box.

    The nearest point c* of the box to 0 gives theta = arg c* and
    delta = |c*|.

    Raises:
        ValueError: the box contains or touches 0
    """
    re, im = box.nearest_to_origin()
    if re == 0 and im == 0:
        raise ValueError(f"box {box.to_dict()} contains or touches 0; no separating direction")
    c = complex(float(re), float(im))
    return cmath.phase(c), abs(c)


def _max_corner_modulus(s: float, ratios: np.ndarray) -> float:
    return float(np.max(np.abs(1.0 - s * ratios)))


def _optimal_step(ratios: np.ndarray) -> float:
    """s in (0, S] minimising max |1 - s w| over the corner ratios w = zeta / c*."""
    upper = float(np.min(2.0 * ratios.real / np.abs(ratios) ** 2))
    lo, hi = 0.0, upper
    for _ in range(S_SEARCH_STEPS):
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        if _max_corner_modulus(m1, ratios) <= _max_corner_modulus(m2, ratios):
            hi = m2
        else:
            lo = m1
    return 0.5 * (lo + hi)


def corner_modulus(box: PlaneBox) -> float:
    """Smallest attainable max |u| over the corners of a box avoiding 0."""
    re, im = box.nearest_to_origin()
    ratios = box.corners_complex() / complex(float(re), float(im))
    return _max_corner_modulus(_optimal_step(ratios), ratios)


def _validate_points(points: Sequence[Any], ring) -> None:
    for i, a in enumerate(points):
        if ring.is_zero(a):
            raise ValueError("interpolation constraint point coincides with 0")
        for b in points[:i]:
            if ring.close(a, b):
                raise ValueError(f"interpolation constraint points coincide ({a})")


def _vanishing_factor(vanish: Sequence[Tuple[Any, int]], zeros: Sequence[Any], field) -> UniPoly:
    factors: List[UniPoly] = []
    for point, order in vanish:
        if order < 0:
            raise ValueError(f"vanishing order must be >= 0, got {order}")
        factors.append(UniPoly.linear_factor(point, field) ** int(order))
    for point in zeros:
        factors.append(UniPoly.linear_factor(point, field))
    return product(factors, field)


def _power_of_linear(a, power: int, ring) -> UniPoly:
    """(1 - a zeta)^power from its binomial coefficients."""
    coeffs = [ring.one()]
    step = -a
    for k in range(1, power + 1):
        coeffs.append(coeffs[-1] * step * ring.coerce(Fraction(power - k + 1, k)))
    return UniPoly(coeffs, ring)


def _factored_max(base_values: np.ndarray, u_values: np.ndarray, power: int) -> float:
    """max |base| |u|^power over the grid, in log space."""
    with np.errstate(divide="ignore"):
        logs = np.log(np.abs(base_values)) + power * np.log(np.abs(u_values))
    return float(np.exp(np.max(logs)))


def precision_hint(f: UniPoly, grid: np.ndarray, eps: float) -> int:
    """Mantissa bits under which rounding f's coefficients stays below eps on the grid."""
    log_env = float(np.max(f.log_envelope(grid)))
    bits = (log_env - math.log(eps)) / math.log(2.0) + math.log2(f.degree() + 1)
    return int(math.ceil(bits)) + 16


def build_interp_function(
    beta,
    r: int,
    vanish: Sequence[Tuple[Any, int]],
    zeros: Sequence[Any],
    box: Optional[PlaneBox],
    eps: Optional[float],
    ring,
    grid_resolution: int = 65,
    max_retries: int = 32,
    param_grid: Optional[Sequence[Any]] = None,
    max_power: int = 1024,
) -> UniPoly:
    """
    Build f with f = beta*zeta^r + O(zeta^{r+1}), the given vanishing orders
    and zeros, and (when eps is given) max |f| <= eps on the box grid.

    The smallness factor u^M is certified twice on the grid: in factored
    form |base| |u|^M <= eps / 2, and for the stored coefficients through
    the accurate batched evaluation.

    Over the poly1 parameter ring beta may depend on x; then f = beta(x) F
    with F built over the scalar field against eps / max_T |beta|.

    Args:
        beta: leading coefficient
        r: order of vanishing at 0 (r = 0 prescribes f(0) = beta)
        vanish: (point, order) pairs
        zeros: points where f must vanish (order 1)
        box: rectangle for the smallness constraint
        eps: smallness bound, or None
        ring: scalar field or parameter ring of the coefficients
        grid_resolution: lattice size per side for the grid check
        max_retries: halvings of a rationalised step that misses |u| < 1
        param_grid: sampled parameter values (poly1 only)
        max_power: cap on the exponent M of the smallness factor

    Returns:
        UniPoly over `ring`

    Raises:
        ValueError: constraint points coincide with 0 or with each other
        RuntimeError: M would exceed max_power, the field precision cannot
            hold the coefficients to eps, or no step gives |u| < 1
    """
    if r < 0:
        raise ValueError(f"leading order r must be >= 0, got {r}")
    if not ring.is_field:
        return _build_parametric(beta, r, vanish, zeros, box, eps, ring,
                                 grid_resolution, max_retries, param_grid, max_power)

    beta = ring.coerce(beta)
    points = [ring.coerce(p) for p, _ in vanish] + [ring.coerce(z) for z in zeros]
    _validate_points(points, ring)
    h = _vanishing_factor([(ring.coerce(p), o) for p, o in vanish], [ring.coerce(z) for z in zeros], ring)
    h0_inv = ring.inv(h(ring.zero()))
    base = (UniPoly.monomial(beta, r, ring) * h).scale(h0_inv)
    if eps is None or base.is_zero():
        return base
    if box is None:
        raise ValueError("smallness bound requested without a box")

    re, im = box.nearest_to_origin()
    if re == 0 and im == 0:
        raise ValueError(f"box {box.to_dict()} contains or touches 0")
    nearest = complex(float(re), float(im))
    inv_nearest = ring.inv(ring.coerce(GaussianRational(re, im)))
    grid = box.grid(grid_resolution)
    ratios = box.corners_complex() / nearest
    base_values = base.values(grid)
    base_max = float(np.max(np.abs(base_values)))
    if base_max <= eps:
        return base
    step = _optimal_step(ratios)
    logger.debug("onevar: r=%d constraints=%d base_max=%.3e step=%.4f", r, len(points), base_max, step)

    for attempt in range(max_retries + 1):
        s = Fraction(step).limit_denominator(S_DENOMINATOR) if ring.exact else step
        if s <= 0:
            s = Fraction(1, S_DENOMINATOR) if ring.exact else step
        # |u| is convex and the box is its corners' hull
        q = _max_corner_modulus(float(s), ratios)
        if q >= 1.0:
            logger.warning("onevar: step %.4g gives corner modulus %.4f >= 1; halving", float(s), q)
            step *= 0.5
            continue
        power = max(1, int(math.ceil(math.log(0.5 * eps / base_max) / math.log(q))))
        if power > max_power:
            raise RuntimeError(f"onevar: eps={eps:.3e} on {box.to_dict()} needs M={power} "
                               f"> max_power={max_power} (corner modulus {q:.4f})")
        a = ring.coerce(s) * inv_nearest
        u_values = 1.0 - complex(ring.to_complex(a)) * grid
        factored = _factored_max(base_values, u_values, power)
        if not factored <= 0.5 * eps:
            logger.warning("onevar: factored max %.3e > eps/2 with M=%d; halving step", factored, power)
            step *= 0.5
            continue
        f = base * _power_of_linear(a, power, ring)
        worst = f.max_abs_on(grid)
        if worst <= eps:
            logger.debug("onevar: accepted M=%d q=%.4f factored=%.3e stored=%.3e (attempt %d)",
                         power, q, factored, worst, attempt)
            return f
        raise RuntimeError(f"onevar: coefficient rounding lifts max |f| to {worst:.3e} > eps={eps:.3e} "
                           f"with M={power}; needs about {precision_hint(f, grid, eps)} precision_bits")

    raise RuntimeError(f"onevar: eps={eps:.3e} unreachable on {box.to_dict()} after {max_retries} retries")


def _build_parametric(beta, r, vanish, zeros, box, eps, ring, grid_resolution, max_retries, param_grid,
                      max_power):
    field = ring.base
    beta = ring.coerce(beta)
    if beta.is_zero():
        return UniPoly.zero(ring)
    inner_eps = None
    if eps is not None:
        if not param_grid:
            raise ValueError("parametric smallness bound requires a parameter grid")
        beta_max = ring.max_abs_on_grid(beta, param_grid)
        inner_eps = eps / beta_max if beta_max > 0 else eps
    unit = build_interp_function(field.one(), r, vanish, zeros, box, inner_eps, field,
                                 grid_resolution, max_retries, max_power=max_power)
    return UniPoly([beta * ring.coerce(c) for c in unit.coeffs], ring)


# ----------------------------------------------------------------------
# Functions along a linear form
# ----------------------------------------------------------------------


def constant_value(value, ring):
    """Scalar-field value of a constant element of `ring`."""
    if ring.is_field:
        return value
    if not isinstance(value, UniPoly):
        return ring.base.coerce(value)
    if value.degree() > 0:
        raise ValueError("point depends on the family parameter; constant required here")
    return value.coefficient(0)


def form_constraints(
    form: Sequence[Any],
    anchor: Sequence[Any],
    fix: Sequence[Tuple[Sequence[Any], int]],
    zeros: Sequence[Sequence[Any]],
    box,
    ring,
) -> Tuple[List[Tuple[Any, int]], List[Any], Optional[PlaneBox]]:
    """
    Constraints for f in the local coordinate zeta = form(z - anchor).

    A fix point (a, N) asks the map to agree with the identity through
    order N at a, so f vanishes to order N + 1 at form(a - anchor).
    Coincident images are merged (largest order wins, zeros absorbed).

    Raises:
        ValueError: an image coincides with the anchor image, or the
            image box of K contains it
    """
    field = ring.base
    lam = [constant_value(c, ring) for c in form]
    origin = apply_form(lam, [constant_value(x, ring) for x in anchor], field)
    vanish: List[Tuple[Any, int]] = []
    for point, order in fix:
        image = apply_form(lam, [constant_value(x, ring) for x in point], field) - origin
        if field.is_zero(image):
            raise ValueError("constraint collision: a fix point has the same form image as the anchor")
        for k, (other, o) in enumerate(vanish):
            if field.close(other, image):
                vanish[k] = (other, max(o, order + 1))
                break
        else:
            vanish.append((image, order + 1))
    zero_images: List[Any] = []
    for point in zeros:
        image = apply_form(lam, [constant_value(x, ring) for x in point], field) - origin
        if field.is_zero(image):
            raise ValueError("constraint collision: a fixed point has the same form image as the anchor")
        if any(field.close(image, v) for v, _ in vanish) or any(field.close(image, z) for z in zero_images):
            continue
        zero_images.append(image)
    local_box = None
    if box is not None:
        local_box = box.image_under_form(lam).translate(-origin)
        if local_box.contains_zero():
            raise ValueError("constraint collision: form image of K contains the anchor image")
    return vanish, zero_images, local_box


def interp_along_form(
    form: Sequence[Any],
    anchor: Sequence[Any],
    beta,
    r: int,
    fix: Sequence[Tuple[Sequence[Any], int]],
    zeros: Sequence[Sequence[Any]],
    box,
    eps: Optional[float],
    ring,
    grid_resolution: int = 65,
    max_retries: int = 32,
    param_grid: Optional[Sequence[Any]] = None,
    max_power: int = 1024,
) -> UniPoly:
    """
    f with f(form(anchor) + zeta) = beta zeta^r + O(zeta^{r+1}), identity
    constraints at the fix points, exact zeros and |f| <= eps on form(K).

    The shifted polynomial is certified again on the image grid of K (per
    parameter sample over poly1).

    Raises:
        RuntimeError: the shift loses the bound at the field precision
    """
    vanish, zero_images, local_box = form_constraints(form, anchor, fix, zeros, box, ring)
    local = build_interp_function(beta, r, vanish, zero_images, local_box if eps is not None else None,
                                  eps, ring, grid_resolution, max_retries, param_grid, max_power)
    field = ring.base
    origin = apply_form([constant_value(c, ring) for c in form],
                        [constant_value(x, ring) for x in anchor], field)
    f = local.shift(ring.coerce(-origin))
    if eps is not None and local_box is not None:
        grid = local_box.grid(grid_resolution) + field.to_complex(origin)
        _certify_global(f, grid, eps, ring, param_grid)
    return f


def _certify_global(f: UniPoly, grid: np.ndarray, eps: float, ring, param_grid) -> None:
    if ring.is_field:
        samples = [f]
    else:
        samples = [f.map_coeffs(lambda c, x0=x0: ring.specialize(c, x0), ring.base)
                   for x0 in (param_grid or [])]
    for g in samples:
        worst = g.max_abs_on(grid)
        if worst > eps:
            raise RuntimeError(f"onevar: shifted max |f| {worst:.3e} > eps={eps:.3e}; "
                               f"needs about {precision_hint(g, grid, eps)} precision_bits")
