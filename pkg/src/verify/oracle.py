"""
shearForge Verification Oracle
==============================
Independent checks of a word against a problem.

Jets are recomputed by pushing truncated polynomials (constant terms
included) through the primitive formulas, so no engine-side jet code is
shared beyond the truncated-polynomial kernel.

Responsibilities:
- push_jet: jet of a word at a point along the independent path
- verify_word: jet match, identity to order N, exact axis fixing per factor,
  volume checks, grid deviation on K (per parameter value in poly1)
- crosscheck_numeric: central differences with a Richardson error estimate
- tail_stability: per-stage deviation of the finite-family prefixes
"""

import logging
import re
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from src.engine.problem import ApproxSpec, ProblemSpec
from src.jets.jet import (
    JetMap,
    TruncPoly,
    jet_difference,
    jet_jacobian_det,
    monomials,
    tp_add,
    tp_constant,
    tp_exp,
    tp_linear,
    tp_mul,
    tp_scale,
    tp_sub,
    tp_univariate,
    unit_exponent,
)
from src.jets.unipoly import describe_ring
from src.onevar.boxes import ProductBox
from src.shears.word import AutoWord, word_eval, word_eval_numpy, word_jet
from src.verify.report import Report

logger = logging.getLogger("shearForge.verify")

# Float-mode tolerance floor for jet residuals
FLOAT_TOLERANCE_FLOOR = 1e-20

_PSI_STAGE = re.compile(r"^(?:.*/)?psi(\d+)$")


def default_tolerance(field) -> float:
    if field.exact:
        return 0.0
    return max(float(field.tol), FLOAT_TOLERANCE_FLOOR)


def _progress_disabled() -> bool:
    return not logger.isEnabledFor(logging.INFO)


# ----------------------------------------------------------------------
# Independent jet path
# ----------------------------------------------------------------------


def _push_factor(g, comps: List[TruncPoly], order: int, n: int, ring) -> List[TruncPoly]:
    variant = g.variant
    if variant == "translation":
        return [tp_add(c, tp_constant(t, n, ring), ring) for c, t in zip(comps, g.t)]
    if variant == "linear":
        out = []
        for row in g.matrix:
            acc: TruncPoly = {}
            for m, c in zip(row, comps):
                acc = tp_add(acc, tp_scale(c, m, ring), ring)
            out.append(acc)
        return out
    # form(F(z)) as a truncated polynomial with its constant term
    s: TruncPoly = {}
    for coeff, c in zip(g.form, comps):
        s = tp_add(s, tp_scale(c, coeff, ring), ring)
    f_of_s = tp_univariate(g.f, s, order, n, ring)
    if variant == "shear":
        amount = f_of_s
    elif variant == "overshear":
        growth = tp_sub(tp_exp(f_of_s, order, n, ring), tp_constant(ring.one(), n, ring), ring)
        pair: TruncPoly = {}
        for i, c in enumerate(comps):
            shifted = c if g.center is None else tp_sub(c, tp_constant(g.center[i], n, ring), ring)
            pair = tp_add(pair, tp_scale(shifted, ring.conj(g.dir[i]), ring), ring)
        amount = tp_mul(growth, pair, order, ring)
    else:
        raise ValueError(f"unknown primitive variant '{variant}'")
    return [tp_add(c, tp_scale(amount, d, ring), ring) for c, d in zip(comps, g.dir)]


def push_jet(w: AutoWord, anchor: Sequence[Any], order: int) -> JetMap:
    """
    Jet of `w` at `anchor` through `order`, computed by substituting the
    coordinate polynomials through every factor in application order.

    Raises:
        ValueError: an exact-mode overshear with a nonzero exponent at the point
    """
    ring, n = w.ring, w.n
    anchor = tuple(ring.coerce(x) for x in anchor)
    comps = [tp_linear([ring.one() if j == i else ring.zero() for j in range(n)], ring, constant=anchor[i])
             for i in range(n)]
    for g in reversed(w.factors):
        comps = _push_factor(g, comps, order, n, ring)
    origin = (0,) * n
    value = [c.get(origin, ring.zero()) for c in comps]
    return JetMap.build(n, anchor, value, order, comps, ring)


# ----------------------------------------------------------------------
# Requirement checks
# ----------------------------------------------------------------------


def _check_jet(report: Report, entry_id: str, w: AutoWord, anchor, order: int, expected: JetMap,
               tol: float) -> None:
    try:
        got = push_jet(w, anchor, order)
    except (ValueError, ZeroDivisionError) as exc:
        report.fail(entry_id, f"jet not computable: {exc}")
        return
    report.add(entry_id, jet_difference(got, expected), tol, {"order": order})


def _check_axis_point(report: Report, index: int, w: AutoWord, c, tol: float) -> None:
    ring = w.ring
    entry_id = f"axis_fixed[{index}]"
    point = tuple(ring.coerce(x) for x in c)
    worst, worst_factor = 0.0, None
    for k, g in enumerate(w.factors):
        try:
            image = g.eval(point)
        except ValueError as exc:
            report.fail(entry_id, f"factor {k} ({g.variant}): {exc}")
            return
        diff = max(float(ring.abs(x - y)) for x, y in zip(image, point))
        if diff > worst:
            worst, worst_factor = diff, k
    report.add(entry_id, worst, tol, {"factors": len(w.factors), "worst_factor": worst_factor})


def _det_residual(w: AutoWord, anchor, order: int) -> float:
    ring = w.ring
    det = jet_jacobian_det(push_jet(w, anchor, order + 1), order)
    origin = (0,) * w.n
    worst = float(ring.abs(det.coefficient(origin) - ring.one()))
    for e, c in det.coeffs.items():
        if e != origin:
            worst = max(worst, float(ring.abs(c)))
    return worst


def _check_volume(report: Report, w: AutoWord, spec: ProblemSpec, tol: float) -> None:
    offending = [k for k, g in enumerate(w.factors)
                 if g.variant == "overshear" or (g.variant == "linear" and not g.volume_preserving)]
    report.add("volume_factors", len(offending), 0.0, {"offending": offending[:16]})
    for j, t in enumerate(spec.targets):
        entry_id = f"volume_det_jet[{j}]"
        try:
            residual = _det_residual(w, t.anchor, t.order)
        except (ValueError, ZeroDivisionError) as exc:
            report.fail(entry_id, f"determinant jet not computable: {exc}")
            continue
        report.add(entry_id, residual, tol, {"order": t.order})


def grid_deviation(w: AutoWord, box: ProductBox, grid_resolution: int, max_grid_points: Optional[int],
                   seed: int) -> Tuple[float, Dict]:
    """max |w(z) - z| over the K lattice in complex128."""
    pts = box.grid(grid_resolution, max_grid_points, seed)
    info = {"resolution": grid_resolution, "lattice_points": box.lattice_size(grid_resolution),
            "points_used": int(len(pts)), "corners_included": True}
    if not w.factors:
        return 0.0, info
    image = word_eval_numpy(w, pts)
    return float(np.max(np.linalg.norm(image - pts, axis=1))), info


def _check_deviation(report: Report, w: AutoWord, approx: ApproxSpec, grid_resolution: int,
                     max_grid_points: Optional[int], seed: int) -> None:
    deviation, info = grid_deviation(w, approx.box, grid_resolution, max_grid_points, seed)
    report.grids["K"] = info
    report.add("approx_deviation", deviation, approx.eps, {"box": approx.box.to_dict()})


def recorded_fix_order(w: AutoWord, spec: ProblemSpec) -> int:
    """N to check: the problem's own, else the one recorded at build time, else the default."""
    if spec.fix_order is not None:
        return int(spec.fix_order)
    recorded = w.meta.get("fix_order", w.meta.get("family", {}).get("fix_order"))
    return spec.effective_fix_order() if recorded is None else int(recorded)


def _verify_field(w: AutoWord, spec: ProblemSpec, tol: float, grid_resolution: int,
                  max_grid_points: Optional[int], seed: int) -> Report:
    report = Report()
    ring, n = spec.ring, spec.n
    fix_order = recorded_fix_order(w, spec)
    for j, t in enumerate(spec.targets):
        _check_jet(report, f"jet_match[{j}]", w, t.anchor, t.order, t.jet.truncate(t.order), tol)
    for i, a in enumerate(spec.fix_points):
        _check_jet(report, f"fix_identity[{i}]", w, a, fix_order, JetMap.identity(n, a, fix_order, ring), tol)
    for i, c in enumerate(spec.axis_points):
        _check_axis_point(report, i, w, c, tol)
    if spec.volume_preserving:
        _check_volume(report, w, spec, tol)
    if spec.approx is not None:
        _check_deviation(report, w, spec.approx, grid_resolution, max_grid_points, seed)
        if w.meta.get("family", {}).get("boxes"):
            report.merge(tail_stability(w, grid_resolution=grid_resolution,
                                        max_grid_points=max_grid_points, seed=seed))
    return report


def verify_word(
    w: AutoWord,
    spec: ProblemSpec,
    tol: Optional[float] = None,
    grid_resolution: int = 17,
    max_grid_points: Optional[int] = None,
    seed: int = 0,
) -> Report:
    """
    Check every requirement of `spec` on `w`; failures are recorded, never raised.

    In poly1 mode word and problem are specialized at every value of the
    parameter grid and entries are tagged T[i].
    """
    ring = spec.ring
    tol = default_tolerance(ring.base) if tol is None else float(tol)
    report = Report(seeds={"word": w.meta.get("seed"), "verify": seed}, arithmetic=describe_ring(ring))
    report.grids["tolerance"] = tol
    if w.n != spec.n:
        report.fail("dimension", f"word acts on C^{w.n}, problem on C^{spec.n}")
        return report
    if spec.parametric:
        report.grids["T"] = ring.base.vec_to_json(spec.param_grid)
        for idx, x0 in enumerate(tqdm(spec.param_grid, desc="parameter grid", disable=_progress_disabled())):
            try:
                word_x = w.specialize(x0) if not w.ring.is_field else w
                spec_x = spec.specialize(x0)
            except (ValueError, TypeError) as exc:
                report.fail(f"T[{idx}]:specialize", str(exc))
                continue
            report.merge(_verify_field(word_x, spec_x, tol, grid_resolution, max_grid_points, seed),
                         tag=f"T[{idx}]")
    else:
        report.merge(_verify_field(w, spec, tol, grid_resolution, max_grid_points, seed))
    logger.info("verify_word: %s", report.summary())
    return report


# ----------------------------------------------------------------------
# Finite-family tail stability
# ----------------------------------------------------------------------


def _psi_bounds(stages: Sequence[Dict]) -> List[Tuple[int, int]]:
    found = {}
    for stage in stages:
        match = _PSI_STAGE.match(stage.get("name", ""))
        if match:
            found[int(match.group(1))] = (int(stage["start"]), int(stage["stop"]))
    return [found[k] for k in sorted(found)]


def tail_stability(
    w: AutoWord,
    stage_bounds: Optional[Sequence[Tuple[int, int]]] = None,
    boxes: Optional[Sequence[Any]] = None,
    eps_schedule: Optional[Sequence[float]] = None,
    grid_resolution: int = 17,
    max_grid_points: Optional[int] = None,
    seed: int = 0,
) -> Report:
    """
    For each stage j >= 2, max over the K_{j-1} lattice of |F^j - F^(j-1)|
    against eps_j, where F^j = psi_j o ... o psi_1.

    Defaults come from the word's meta (stages, family.boxes, family.eps_schedule).
    """
    family = w.meta.get("family", {})
    boxes = boxes if boxes is not None else family.get("boxes", [])
    eps_schedule = eps_schedule if eps_schedule is not None else family.get("eps_schedule", [])
    bounds = list(stage_bounds) if stage_bounds is not None else _psi_bounds(w.meta.get("stages", []))
    report = Report()
    if len(bounds) < 2 or not boxes or not eps_schedule:
        return report
    end = bounds[0][1]
    for j in range(1, len(bounds)):
        entry_id = f"tail_stability[{j + 1}]"
        raw = boxes[j - 1]
        if raw is None or eps_schedule[j] is None:
            report.fail(entry_id, "no box or eps recorded for this stage")
            continue
        box = raw if isinstance(raw, ProductBox) else ProductBox.from_dict(raw)
        pts = box.grid(grid_resolution, max_grid_points, seed)
        current = AutoWord(w.n, w.ring, list(w.factors[bounds[j][0]:end]), {})
        previous = AutoWord(w.n, w.ring, list(w.factors[bounds[j - 1][0]:end]), {})
        deviation = float(np.max(np.linalg.norm(word_eval_numpy(current, pts) - word_eval_numpy(previous, pts),
                                                axis=1)))
        report.add(entry_id, deviation, float(eps_schedule[j]), {"box": box.to_dict()})
    return report


# ----------------------------------------------------------------------
# Numeric cross-check
# ----------------------------------------------------------------------


def _difference_estimates(w: AutoWord, anchor, step, order: int) -> Dict[Tuple[int, Tuple[int, ...]], Any]:
    """Taylor coefficients of orders 1..order by central differences with step `step`."""
    ring, n = w.ring, w.n

    def at(offsets: Dict[int, int]):
        z = tuple(a + (step * offsets.get(j, 0)) for j, a in enumerate(anchor))
        return word_eval(w, z)

    center = at({})
    out: Dict[Tuple[int, Tuple[int, ...]], Any] = {}
    plus = [at({j: 1}) for j in range(n)]
    minus = [at({j: -1}) for j in range(n)]
    two = ring.coerce(2)
    for j in range(n):
        e = unit_exponent(j, n)
        for i in range(n):
            out[(i, e)] = (plus[j][i] - minus[j][i]) / (two * step)
    if order < 2:
        return out
    for e in monomials(n, 2):
        idx = [j for j in range(n) for _ in range(e[j])]
        j, l = idx
        if j == l:
            for i in range(n):
                out[(i, e)] = (plus[j][i] - two * center[i] + minus[j][i]) / (two * step * step)
        else:
            pp, pm = at({j: 1, l: 1}), at({j: 1, l: -1})
            mp, mm = at({j: -1, l: 1}), at({j: -1, l: -1})
            for i in range(n):
                out[(i, e)] = (pp[i] - pm[i] - mp[i] + mm[i]) / (ring.coerce(4) * step * step)
    return out


def crosscheck_numeric(
    w: AutoWord,
    anchor: Sequence[Any],
    order: int = 2,
    h: Optional[float] = None,
    tol: Optional[float] = None,
    safety: float = 4.0,
) -> Report:
    """
    Compare word_jet with finite-difference Taylor coefficients.

    An entry passes when |D(h) - J| <= tol + safety * (C h^2 + roundoff),
    with C h^2 ~ (4/3) |D(h) - D(h/2)| (Richardson).
    """
    ring = w.ring
    report = Report(arithmetic=describe_ring(ring))
    if not ring.is_field or ring.exact:
        report.fail("fd_mode", "numeric cross-check needs a float-mode, nonparametric word")
        return report
    order = max(1, min(int(order), 2))
    bits = ring.precision_bits
    h = 2.0 ** (-bits / 3.0) if h is None else float(h)
    tol = default_tolerance(ring) if tol is None else float(tol)
    anchor = tuple(ring.coerce(x) for x in anchor)
    report.grids["finite_difference"] = {"h": h, "order": order, "safety": safety}

    reference = word_jet(w, anchor, order)
    coarse = _difference_estimates(w, anchor, ring.coerce(h), order)
    fine = _difference_estimates(w, anchor, ring.coerce(h / 2), order)
    scale = max([1.0] + [float(ring.abs(x)) for x in reference.value])
    for (i, e) in sorted(coarse):
        exact = reference.coefficient(i, e)
        d_coarse = float(ring.abs(coarse[(i, e)] - exact))
        d_fine = float(ring.abs(fine[(i, e)] - exact))
        richardson = (4.0 / 3.0) * float(ring.abs(coarse[(i, e)] - fine[(i, e)]))
        roundoff = scale * 2.0 ** (-(bits - 8)) / h ** sum(e)
        detail = {"h": h, "richardson": richardson, "halving_ratio": d_coarse / d_fine if d_fine > 0 else None}
        report.add(f"fd[{i},{''.join(map(str, e))}]", d_coarse, tol + safety * (richardson + roundoff), detail)
    logger.info("crosscheck_numeric: %s", report.summary())
    return report
