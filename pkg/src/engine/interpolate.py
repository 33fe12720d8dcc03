"""
shearForge Interpolation Engine
===============================
Builds composition words of shears and overshears that realize prescribed
jets under side conditions.

Responsibilities:
- move_point_word: one shear (or two through an intermediate point) p -> q
- interpolate_one_point: Linear factor plus degree stages at a single point
- interpolate_jet_at_point: move, S0 (det fix), S1 (transvections), S2..Sk
- interpolate_finite_family: psi_k o ... o psi_1 over growing boxes K_j
- moving_points_with_jets: W = G o H with G moving the points
- tame_normalization_word: a finite prefix sent to (j, 0, ..., 0)
- a posteriori grid check of the eps budget with halving retries
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from src.engine.problem import AXIS_POINT_READING, JetTarget, ProblemSpec
from src.homog.basis import HomogField, decompose_homog, draw_gaussian, sample_shear_basis
from src.jets.jet import JetMap, jet_compose, jet_inverse, jet_rebase, unit_exponent
from src.jets.linalg import mat_det, null_space
from src.jets.unipoly import describe_ring
from src.linear.shears import det_fix_overshear, sample_dual_basis, shears_for_linear_part
from src.linear.transvections import group_blocks, sl2_polyring_to_transvections, sln_to_transvections
from src.onevar.boxes import ProductBox
from src.onevar.interp_function import constant_value, corner_modulus, form_constraints, interp_along_form
from src.shears.primitives import Linear, Overshear, Shear, Translation, vec_add, vec_sub
from src.shears.word import AutoWord, word_eval, word_eval_numpy, word_jet

logger = logging.getLogger("shearForge.engine")


@dataclass
class Constraints:
    """Side conditions every factor of a stage respects."""
    fix: List[Tuple[tuple, int]] = field(default_factory=list)
    zeros: List[tuple] = field(default_factory=list)
    box: Optional[ProductBox] = None


class _WordBuilder:
    """Factors in application order plus named stage ranges."""

    def __init__(self, n: int, ring):
        self.n = n
        self.ring = ring
        self.app: List[Any] = []
        self.marks: List[Tuple[str, int, int]] = []

    def add_stage(self, name: str, factors: Sequence[Any]) -> None:
        start = len(self.app)
        self.app.extend(factors)
        self.marks.append((name, start, len(self.app)))

    def absorb(self, other: "_WordBuilder", name: str) -> None:
        offset = len(self.app)
        self.app.extend(other.app)
        self.marks.extend((f"{name}/{inner}", a + offset, b + offset) for inner, a, b in other.marks)
        self.marks.append((name, offset, len(self.app)))

    def partial_word(self, start: int = 0) -> AutoWord:
        return AutoWord(self.n, self.ring, list(reversed(self.app[start:])), {})

    def word(self, meta: Optional[Dict] = None) -> AutoWord:
        total = len(self.app)
        meta = dict(meta or {})
        meta["stages"] = [{"name": name, "start": total - b, "stop": total - a}
                          for name, a, b in self.marks]
        return AutoWord(self.n, self.ring, list(reversed(self.app)), meta)


def _same_point(a: Sequence[Any], b: Sequence[Any], ring) -> bool:
    return all(ring.close(x, y) for x, y in zip(a, b))


def _is_origin(p: Sequence[Any], ring) -> bool:
    return all(ring.is_zero(x) for x in p)


def _is_identity_matrix(m: Sequence[Sequence[Any]], ring) -> bool:
    return all(ring.close(m[i][j], ring.one() if i == j else ring.zero())
               for i in range(len(m)) for j in range(len(m)))


class InterpolationEngine:
    """
    Staged constructions over one ring (scalar field or poly1 parameter ring).

    Every call is deterministic given the engine seed: per-call sampling
    seeds are drawn from a counter reset at the start of each public call.
    """

    def __init__(self, ring, config: Optional[Dict] = None, seed: int = 0):
        self.ring = ring
        self.seed = int(seed)
        engine_cfg = config.get("engine", {}) if config else {}
        basis_cfg = config.get("basis", {}) if config else {}
        onevar_cfg = config.get("onevar", {}) if config else {}

        self.max_budget_rounds = int(engine_cfg.get("max_budget_rounds", 8))
        self.check_grid_resolution = int(engine_cfg.get("check_grid_resolution", 9))
        self.check_max_points = engine_cfg.get("check_max_points", 4096)
        self.default_fix_order = engine_cfg.get("fix_order")
        self.eps_ratio = float(engine_cfg.get("eps_ratio", 0.5))
        self.box_growth = float(engine_cfg.get("box_growth", 0.25))
        self.move_attempts = int(engine_cfg.get("move_attempts", 16))
        self.basis_options = {
            "axis_margin": float(basis_cfg.get("axis_margin", 0.9)),
            "max_rounds": int(basis_cfg.get("max_rounds", 64)),
            "max_condition": float(basis_cfg.get("max_condition", 1e12)),
            "coefficient_range": int(basis_cfg.get("coefficient_range", 3)),
            "coefficient_denominator": int(basis_cfg.get("coefficient_denominator", 8)),
        }
        self.grid_resolution = int(onevar_cfg.get("grid_resolution", 65))
        self.max_retries = int(onevar_cfg.get("max_retries", 32))
        self.max_power = int(onevar_cfg.get("max_power", 1024))
        self.max_corner_modulus = float(onevar_cfg.get("max_corner_modulus", 0.9))

        self.param_grid: List[Any] = []
        self._draws = 0
        self._records: Dict[str, List] = {}
        self._reset()

    # ------------------------------------------------------------------
    # Bookkeeping
    # ------------------------------------------------------------------

    def _reset(self, spec: Optional[ProblemSpec] = None) -> None:
        self._draws = 0
        self._records = {"seeds": [], "bases": [], "dual_bases": [], "transvections": []}
        self.param_grid = list(spec.param_grid) if spec is not None else []

    def _next_seed(self) -> int:
        seed = self.seed + self._draws
        self._draws += 1
        self._records["seeds"].append(seed)
        return seed

    def _snapshot(self) -> Dict[str, int]:
        return {key: len(values) for key, values in self._records.items()}

    def _rollback(self, snapshot: Dict[str, int]) -> None:
        for key, size in snapshot.items():
            del self._records[key][size:]

    def _onevar(self) -> Dict:
        return {
            "grid_resolution": self.grid_resolution,
            "max_retries": self.max_retries,
            "max_power": self.max_power,
            "param_grid": self.param_grid or None,
        }

    def _admissible(self, anchor: Sequence[Any], cons: Constraints) -> Callable[[tuple], bool]:
        def check(form) -> bool:
            try:
                _, _, local_box = form_constraints(form, anchor, cons.fix, cons.zeros, cons.box, self.ring)
            except ValueError:
                return False
            return local_box is None or corner_modulus(local_box) <= self.max_corner_modulus
        return check

    def _vector_size(self, v: Sequence[Any]) -> float:
        ring = self.ring
        values = [ring.coerce(x) for x in v]
        if ring.is_field:
            return math.sqrt(sum(float(ring.abs(x)) ** 2 for x in values))
        grid = self.param_grid or [0]
        return max(math.sqrt(sum(float(ring.base.abs(ring.specialize(x, t))) ** 2 for x in values))
                   for t in grid)

    def _nullhomotopy_note(self, spec: ProblemSpec) -> str:
        if spec.parametric:
            return "automatic: polynomial family over a contractible base"
        if spec.nullhomotopy_asserted:
            return "asserted by the user"
        return "vacuous: constant parameter"

    def _meta(self, spec: Optional[ProblemSpec] = None, **extra) -> Dict:
        meta: Dict[str, Any] = {
            "seed": self.seed,
            "arithmetic": describe_ring(self.ring),
            "seeds": list(self._records["seeds"]),
            "bases": list(self._records["bases"]),
            "dual_bases": list(self._records["dual_bases"]),
            "transvections": list(self._records["transvections"]),
        }
        if spec is not None:
            meta["axis_point_reading"] = AXIS_POINT_READING
            meta["nullhomotopy"] = self._nullhomotopy_note(spec)
            meta["volume_preserving"] = spec.volume_preserving
            meta["fix_order"] = self._fix_order(spec)
        meta.update({k: v for k, v in extra.items() if v is not None})
        return meta

    def _fix_order(self, spec: ProblemSpec) -> int:
        if spec.fix_order is not None:
            return int(spec.fix_order)
        if self.default_fix_order is not None:
            return int(self.default_fix_order)
        return spec.effective_fix_order()

    def _constraints(self, spec: ProblemSpec, box: Optional[ProductBox] = None) -> Constraints:
        order = self._fix_order(spec)
        return Constraints(
            fix=[(tuple(a), order) for a in spec.fix_points],
            zeros=[tuple(c) for c in spec.axis_points],
            box=box,
        )

    # ------------------------------------------------------------------
    # Grid check and budget
    # ------------------------------------------------------------------

    def grid_deviation(self, word: AutoWord, box: ProductBox) -> float:
        """max |word(z) - z| over the check grid of K (and the parameter grid in poly1)."""
        if not word.factors:
            return 0.0
        pts = box.grid(self.check_grid_resolution, self.check_max_points, self.seed)
        if word.ring.is_field:
            return float(np.max(np.linalg.norm(word_eval_numpy(word, pts) - pts, axis=1)))
        worst = 0.0
        for x0 in self.param_grid:
            image = word_eval_numpy(word.specialize(x0), pts)
            worst = max(worst, float(np.max(np.linalg.norm(image - pts, axis=1))))
        return worst

    def _image_points(self, word: AutoWord, pts: np.ndarray) -> np.ndarray:
        if word.ring.is_field:
            return word_eval_numpy(word, pts)
        return np.concatenate([word_eval_numpy(word.specialize(x0), pts) for x0 in self.param_grid])

    def _with_budget(self, build: Callable[[Optional[float]], _WordBuilder], eps: Optional[float],
                     box: Optional[ProductBox], label: str) -> Tuple[_WordBuilder, Optional[Dict]]:
        """Run `build` with a halving eps until the grid deviation on K is within eps."""
        if eps is None or box is None:
            return build(None), None
        scale = 1.0
        for round_index in range(self.max_budget_rounds):
            snapshot = self._snapshot()
            builder = build(eps * scale)
            deviation = self.grid_deviation(builder.partial_word(), box)
            if deviation <= eps:
                logger.info("%s: grid deviation %.3e <= eps %.3e (round %d)", label, deviation, eps, round_index + 1)
                return builder, {"eps": eps, "scale": scale, "rounds": round_index + 1,
                                 "measured_deviation": deviation,
                                 "grid_resolution": self.check_grid_resolution}
            logger.warning("%s: grid deviation %.3e > eps %.3e; halving all sub-budgets",
                           label, deviation, eps)
            self._rollback(snapshot)
            scale *= 0.5
        raise RuntimeError(f"{label}: eps budget {eps:.3e} infeasible after {self.max_budget_rounds} rounds")

    # ------------------------------------------------------------------
    # Point moving
    # ------------------------------------------------------------------

    def _blocked(self, point: Sequence[Any], cons: Constraints, extra: Sequence[Sequence[Any]] = ()) -> bool:
        ring = self.ring
        others = [a for a, _ in cons.fix] + list(cons.zeros) + list(extra)
        if any(_same_point(point, a, ring) for a in others):
            return True
        if cons.box is not None:
            try:
                values = [constant_value(x, ring) for x in point]
            except ValueError:
                return False
            return cons.box.contains(values)
        return False

    def _direct_move(self, p, q, cons: Constraints, eps: Optional[float]) -> Optional[Shear]:
        """A single shear p -> q, or None when no admissible form annihilates q - p."""
        ring = self.ring
        base = ring.base
        n = len(p)
        d = vec_sub(q, p)
        if ring.is_field:
            rows = [list(d)]
        else:
            top = max(x.degree() for x in d)
            rows = [[x.coefficient(t) for x in d] for t in range(top + 1)]
        kernel = null_space(rows, n, base)
        if not kernel:
            return None
        rng = np.random.RandomState(self._next_seed())
        admissible = self._admissible(p, cons)
        f_eps = None if eps is None or cons.box is None else eps / self._vector_size(d)
        bound = self.basis_options["coefficient_range"]
        for _ in range(self.move_attempts):
            weights = [base.coerce(draw_gaussian(rng, bound, 1, nonzero=True)) for _ in kernel]
            form = tuple(sum((w * vec[i] for w, vec in zip(weights, kernel)), base.zero()) for i in range(n))
            if all(base.is_zero(c) for c in form) or not admissible(form):
                continue
            try:
                f = interp_along_form(form, p, ring.one(), 0, cons.fix, cons.zeros, cons.box, f_eps,
                                      ring, **self._onevar())
            except RuntimeError as exc:
                logger.warning("move: form rejected (%s)", exc)
                continue
            return Shear.build(form, d, f, ring)
        return None

    def _two_step_move(self, p, q, cons: Constraints, eps: Optional[float]) -> List[Shear]:
        ring = self.ring
        rng = np.random.RandomState(self._next_seed())
        half = None if eps is None else eps / 2
        bound = self.basis_options["coefficient_range"]
        for attempt in range(self.move_attempts):
            offset = [ring.coerce(draw_gaussian(rng, bound, 1)) for _ in p]
            mid = vec_add(p, offset)
            if self._blocked(mid, cons, extra=(p, q)):
                continue
            first = self._direct_move(p, mid, cons, half)
            if first is None:
                continue
            second = self._direct_move(mid, q, cons, half)
            if second is None:
                continue
            logger.debug("move: two-step route accepted after %d attempt(s)", attempt + 1)
            return [first, second]
        raise ValueError("move_point_word: constraint collision not resolved by the two-step fallback")

    def _move(self, p, q, cons: Constraints, eps: Optional[float] = None) -> List[Shear]:
        """Shears in application order sending p to q under `cons`."""
        ring = self.ring
        p = tuple(ring.coerce(x) for x in p)
        q = tuple(ring.coerce(x) for x in q)
        if _same_point(p, q, ring):
            return []
        for point in [a for a, _ in cons.fix] + list(cons.zeros):
            if _same_point(point, p, ring) or _same_point(point, q, ring):
                raise ValueError("move_point_word: p or q coincides with a constrained point")
        shear = self._direct_move(p, q, cons, eps)
        if shear is not None:
            return [shear]
        if not ring.is_field:
            raise ValueError("move_point_word: the parametric displacement admits no single shear "
                             "(its coefficient vectors span C^n or every form collides)")
        logger.info("move: direct shear blocked, routing through an intermediate point")
        return self._two_step_move(p, q, cons, eps)

    def _free_point(self, rng: np.random.RandomState, cons: Constraints, avoid: Sequence[Sequence[Any]]):
        ring = self.ring
        bound = self.basis_options["coefficient_range"] + len(avoid)
        n = len(avoid[0])
        for _ in range(self.move_attempts * 4):
            point = tuple(ring.coerce(draw_gaussian(rng, bound, 1)) for _ in range(n))
            if not self._blocked(point, cons, extra=avoid):
                return point
        raise RuntimeError("no free intermediate point found")

    def _route(self, sources, targets, cons: Constraints, hold_order: Optional[int]) -> List[Shear]:
        """
        Sequential moves sources[j] -> targets[j] in application order.

        With `hold_order` every other point is held to that order; without
        it only the placed targets are held (exactly) and unplaced sources
        travel along.
        """
        ring = self.ring
        cur = [tuple(ring.coerce(x) for x in s) for s in sources]
        goals = [tuple(ring.coerce(x) for x in t) for t in targets]
        rng = np.random.RandomState(self._next_seed())
        app: List[Shear] = []

        def held(skip: Sequence[int], j: int) -> Constraints:
            placed = [goals[i] for i in range(j)]
            waiting = [cur[l] for l in range(j, len(cur)) if l not in skip]
            if hold_order is None:
                return Constraints(list(cons.fix), list(cons.zeros) + placed, cons.box)
            return Constraints(list(cons.fix) + [(a, hold_order) for a in placed + waiting],
                               list(cons.zeros), cons.box)

        def advance(factors: List[Shear], moved: int, destination, j: int) -> None:
            word = AutoWord(len(destination), ring, list(reversed(factors)), {})
            for l in range(j, len(cur)):
                if l == moved:
                    cur[l] = destination
                elif hold_order is None:
                    cur[l] = word_eval(word, cur[l])

        for j in range(len(cur)):
            if _same_point(cur[j], goals[j], ring):
                continue
            for l in range(j + 1, len(cur)):
                if _same_point(cur[l], goals[j], ring):
                    spot = self._free_point(rng, cons, cur + goals)
                    factors = self._move(cur[l], spot, held((l,), j))
                    app.extend(factors)
                    advance(factors, l, spot, j)
            factors = self._move(cur[j], goals[j], held((j,), j))
            app.extend(factors)
            advance(factors, j, goals[j], j)
        return app

    def move_point_word(self, p, q, fix: Sequence[Tuple[Sequence[Any], int]] = (),
                        zeros: Sequence[Sequence[Any]] = (), box: Optional[ProductBox] = None,
                        eps: Optional[float] = None) -> AutoWord:
        """
        At most two shears with W(p) = q, identity to order N at each
        (a, N) in `fix` and fixing every point of `zeros` exactly.

        Raises:
            ValueError: p or q on a constrained point, or an unresolvable collision
        """
        self._reset()
        cons = Constraints([(tuple(a), int(order)) for a, order in fix], [tuple(z) for z in zeros], box)
        factors = self._move(p, q, cons, eps)
        builder = _WordBuilder(len(p), self.ring)
        builder.add_stage("move", factors)
        return builder.word(self._meta())

    def tame_normalization_word(self, points: Sequence[Sequence[Any]],
                                fix: Sequence[Tuple[Sequence[Any], int]] = (),
                                zeros: Sequence[Sequence[Any]] = ()) -> AutoWord:
        """Shear word T with T(points[j]) = (j + 1, 0, ..., 0)."""
        self._reset()
        cons = Constraints([(tuple(a), int(order)) for a, order in fix], [tuple(z) for z in zeros], None)
        builder = _WordBuilder(len(points[0]), self.ring)
        builder.add_stage("normalize", self._tame(points, cons))
        return builder.word(self._meta())

    def _tame(self, points: Sequence[Sequence[Any]], cons: Constraints) -> List[Shear]:
        ring = self.ring
        n = len(points[0])
        slots = [tuple(ring.coerce(j + 1 if i == 0 else 0) for i in range(n)) for j in range(len(points))]
        for slot in slots:
            if any(_same_point(slot, z, ring) for z in cons.zeros):
                raise ValueError("tame normalization: a slot (j, 0, ..., 0) coincides with an axis point")
        return self._route(points, slots, cons, hold_order=None)

    # ------------------------------------------------------------------
    # Local stages
    # ------------------------------------------------------------------

    def _residual(self, P: JetMap, builder: _WordBuilder, start: int, order: int) -> JetMap:
        """P o H^-1 at the anchor, H the factors built since `start`."""
        h_jet = word_jet(builder.partial_word(start), P.anchor, order)
        return jet_compose(P, jet_inverse(h_jet, order), order)

    def _check_telescoping(self, residual: JetMap, through: int) -> None:
        ring, n = self.ring, residual.n
        for i in range(n):
            if not ring.close(residual.coefficient(i, unit_exponent(i, n)), ring.one()):
                raise RuntimeError(f"stage telescoping violated: linear part, component {i}")
            for e, c in residual.coeffs[i].items():
                if sum(e) > through or e == unit_exponent(i, n):
                    continue
                if not ring.is_zero(c):
                    raise RuntimeError(f"stage telescoping violated: degree {sum(e)} term "
                                       f"{e} of component {i} survives")

    def _factorizer(self, q: Sequence[Sequence[Any]]) -> Callable:
        ring = self.ring
        if ring.is_field:
            return sln_to_transvections
        if all(x.degree() <= 0 for row in q for x in row):
            def constant_factor(m, _ring):
                return sln_to_transvections([[constant_value(x, ring) for x in row] for row in m], ring.base)
            return constant_factor
        if len(q) == 2:
            return sl2_polyring_to_transvections
        raise ValueError("parametric linear part must be constant in x unless n = 2")

    def _linear_stages(self, P: JetMap, builder: _WordBuilder, cons: Constraints,
                       eps_stage: Optional[float], volume: bool) -> None:
        """S0 (determinant) and S1 (transvection shears) at the anchor of P."""
        ring, n, p = self.ring, P.n, P.anchor
        q_mat = P.linear_matrix()
        det = mat_det(q_mat, ring)
        if volume and not ring.close(det, ring.one()):
            raise ValueError("volume mode: det of the linear part is not 1")
        if _is_identity_matrix(q_mat, ring):
            builder.add_stage("S0", [])
            builder.add_stage("S1", [])
            return
        dual = sample_dual_basis(n, ring, self._admissible(p, cons), rng_seed=self._next_seed(),
                                 max_rounds=self.basis_options["max_rounds"],
                                 coefficient_range=self.basis_options["coefficient_range"],
                                 coefficient_denominator=self.basis_options["coefficient_denominator"],
                                 axis_margin=self.basis_options["axis_margin"])
        self._records["dual_bases"].append(dual.to_dict(ring))
        eps = eps_stage if cons.box is not None else None
        s0, q_fixed = det_fix_overshear(q_mat, dual, cons.fix, cons.zeros, cons.box, eps, ring,
                                        anchor=p, **self._onevar())
        builder.add_stage("S0", [] if s0 is None else [s0])
        if _is_identity_matrix(q_fixed, ring):
            builder.add_stage("S1", [])
            return
        shears, ts = shears_for_linear_part(q_fixed, dual, ring, self._factorizer(q_fixed), eps=eps,
                                            fix=cons.fix, zeros=cons.zeros, box=cons.box, anchor=p,
                                            **self._onevar())
        self._records["transvections"].append({
            "list": [t.to_dict(ring) for t in ts],
            "blocks": group_blocks(ts),
        })
        builder.add_stage("S1", list(reversed(shears)))
        logger.info("S1: %d transvection shear(s)", len(shears))

    def _degree_stages(self, P: JetMap, order: int, builder: _WordBuilder, start: int,
                       cons: Constraints, eps_stage: Optional[float], volume: bool) -> None:
        """S2..Sk: A-type shears then B-type overshears per degree."""
        ring, n, p = self.ring, P.n, P.anchor
        admissible = self._admissible(p, cons)
        center = None if _is_origin(p, ring) else p
        for r in range(2, order + 1):
            residual = self._residual(P, builder, start, order)
            self._check_telescoping(residual, r - 1)
            field_r = HomogField(n, r, residual.homogeneous_part(r), ring)
            if field_r.is_zero():
                builder.add_stage(f"S{r}", [])
                continue
            basis = sample_shear_basis(n, r, ring, rng_seed=self._next_seed(), form_filter=admissible,
                                       **self.basis_options)
            self._records["bases"].append(basis.to_dict())
            c, d = decompose_homog(field_r, basis)
            if volume and any(not ring.is_zero(x) for x in d):
                raise ValueError(f"volume mode: degree-{r} residual has nonzero divergence")
            active_c = [(j, x) for j, x in enumerate(c) if not ring.is_zero(x)]
            active_d = [] if volume else [(j, x) for j, x in enumerate(d) if not ring.is_zero(x)]
            per_factor = None
            if eps_stage is not None and cons.box is not None:
                per_factor = eps_stage / max(1, len(active_c) + len(active_d))
            factors: List[Any] = []
            for j, coeff in active_c:
                form, direction = basis.shear_pairs[j]
                f_eps = None if per_factor is None else per_factor / self._vector_size(direction)
                f = interp_along_form(form, p, coeff, r, cons.fix, cons.zeros, cons.box, f_eps, ring,
                                      **self._onevar())
                factors.append(Shear.build(form, direction, f, ring))
            for j, coeff in active_d:
                form, direction = basis.overshear_pairs[j]
                h_eps = None
                if per_factor is not None:
                    radius = max(cons.box.corner_radius([constant_value(x, ring) for x in p]), 1e-300)
                    h_eps = float(np.log1p(per_factor / (radius * self._vector_size(direction) ** 2)))
                h = interp_along_form(form, p, coeff, r - 1, cons.fix, cons.zeros, cons.box, h_eps, ring,
                                      **self._onevar())
                factors.append(Overshear.build(form, direction, h, ring, center))
            builder.add_stage(f"S{r}", factors)
            logger.info("S%d: %d shear(s), %d overshear(s)", r, len(active_c), len(active_d))
        self._check_telescoping(self._residual(P, builder, start, order), order)

    def _build_jet_at_point(self, P: JetMap, order: int, cons: Constraints, eps: Optional[float],
                            volume: bool) -> _WordBuilder:
        """W = G o H with G the move p -> q and H local at p."""
        ring, n = self.ring, P.n
        p, q = P.anchor, P.value
        eps_stage = None if eps is None or cons.box is None else eps / (order + 2)
        move = self._move(p, q, cons, eps_stage)
        local = P
        if move:
            g_inv = AutoWord(n, ring, list(reversed(move)), {}).inverse()
            local = jet_compose(word_jet(g_inv, q, order), P, order)
            local = jet_rebase(local, p, p)
        builder = _WordBuilder(n, ring)
        self._linear_stages(local, builder, cons, eps_stage, volume)
        self._degree_stages(local, order, builder, 0, cons, eps_stage, volume)
        builder.add_stage("move", move)
        return builder

    # ------------------------------------------------------------------
    # Public constructions
    # ------------------------------------------------------------------

    def interpolate_one_point(self, P: JetMap, order: Optional[int] = None, volume: bool = False) -> AutoWord:
        """
        Word whose jet at the anchor equals P through `order` (default P.order).

        The linear part is a single Linear factor; anchor and value are
        reduced to 0 by translations.
        """
        self._reset()
        ring, n = self.ring, P.n
        order = P.order if order is None else order
        P = P.truncate(order)
        if not P.is_nondegenerate():
            raise ValueError("interpolate_one_point: degenerate linear part")
        origin = tuple(ring.zero() for _ in range(n))
        local = jet_rebase(P, origin, origin)
        builder = _WordBuilder(n, ring)
        if not _is_origin(P.anchor, ring):
            builder.add_stage("translate", [Translation(tuple(-x for x in P.anchor), ring)])
        start = len(builder.app)
        q_mat = local.linear_matrix()
        if not _is_identity_matrix(q_mat, ring):
            linear = Linear.build(q_mat, ring)
            if volume and not linear.volume_preserving:
                raise ValueError("volume mode: det of the linear part is not 1")
            builder.add_stage("linear", [linear])
        self._degree_stages(local, order, builder, start, Constraints(), None, volume)
        if not _is_origin(P.value, ring):
            builder.add_stage("translate_back", [Translation(tuple(P.value), ring)])
        return builder.word(self._meta())

    def interpolate_jet_at_point(self, spec: ProblemSpec) -> AutoWord:
        """
        Word W with jet P at p, identity to order N at the fix points,
        fixing each axis point exactly, eps-close to the identity on K when
        an approximation is requested, and volume preserving on request.

        Raises:
            ValueError: contract violations (see ProblemSpec.check)
            RuntimeError: basis sampling, smallness or budget failure
        """
        if len(spec.targets) != 1:
            raise ValueError(f"interpolate_jet_at_point needs exactly one target, got {len(spec.targets)}")
        spec.check()
        self._reset(spec)
        target = spec.targets[0]
        box = spec.approx.box if spec.approx else None
        eps = spec.approx.eps if spec.approx else None
        cons = self._constraints(spec, box)
        jet = target.jet.truncate(target.order)
        logger.info("jet at point: n=%d order=%d fix=%d axis=%d approx=%s volume=%s",
                    spec.n, target.order, len(cons.fix), len(cons.zeros), eps, spec.volume_preserving)
        builder, budget = self._with_budget(
            lambda e: self._build_jet_at_point(jet, target.order, cons, e, spec.volume_preserving),
            eps, box, "jet at point")
        return builder.word(self._meta(spec, budget=budget))

    def _schedule(self, spec: ProblemSpec, eps_schedule: Optional[Sequence[float]], m: int) -> List[Optional[float]]:
        if spec.approx is None:
            return [None] * m
        schedule = eps_schedule if eps_schedule is not None else spec.eps_schedule
        eps = spec.approx.eps
        if schedule is None:
            return [eps * (1 - self.eps_ratio) * self.eps_ratio ** j for j in range(m)]
        schedule = [float(x) for x in schedule]
        if len(schedule) != m:
            raise ValueError(f"eps_schedule has {len(schedule)} entries for {m} targets")
        if any(x <= 0 for x in schedule):
            raise ValueError("eps_schedule entries must be positive")
        if sum(schedule) > eps * (1 + 1e-12):
            raise ValueError(f"eps_schedule sums to {sum(schedule):.3e} > eps {eps:.3e}")
        return schedule

    def _check_family_points(self, targets: Sequence[JetTarget]) -> None:
        ring = self.ring
        for l, later in enumerate(targets):
            for i in range(l):
                if _same_point(targets[i].value, later.value, ring):
                    raise ValueError(f"targets {i} and {l} share a value")
                if _same_point(targets[i].value, later.anchor, ring):
                    raise ValueError(f"value of target {i} coincides with the anchor of later target {l}; "
                                     f"reorder the targets")

    def _build_family(self, spec: ProblemSpec, eps_schedule: Optional[Sequence[float]],
                      box_growth: float) -> Tuple[_WordBuilder, Dict]:
        ring, n = self.ring, spec.n
        targets = list(spec.targets)
        self._check_family_points(targets)
        schedule = self._schedule(spec, eps_schedule, len(targets))
        cons_base = self._constraints(spec)
        order_n = self._fix_order(spec)
        box = spec.approx.box if spec.approx else None

        builder = _WordBuilder(n, ring)
        info: Dict[str, Any] = {"eps_schedule": schedule, "box_growth": box_growth,
                                "fix_order": order_n, "boxes": [], "budgets": []}
        quiet = not logger.isEnabledFor(logging.INFO)
        for j in tqdm(range(len(targets)), desc="psi stages", disable=quiet):
            t = targets[j]
            jet = t.jet.truncate(t.order)
            accumulated = builder.partial_word()
            if accumulated.factors:
                f_inv = jet_inverse(word_jet(accumulated, t.anchor, t.order), t.order)
                jet = jet_rebase(jet_compose(jet, f_inv, t.order), t.anchor, t.value)
            cons = Constraints(
                fix=list(cons_base.fix) + [(tuple(targets[i].value), order_n) for i in range(j)],
                zeros=list(cons_base.zeros) + [tuple(targets[l].anchor) for l in range(j + 1, len(targets))],
                box=box,
            )
            psi, budget = self._with_budget(
                lambda e: self._build_jet_at_point(jet, t.order, cons, e, spec.volume_preserving),
                schedule[j], box, f"psi{j + 1}")
            builder.absorb(psi, f"psi{j + 1}")
            info["boxes"].append(None if box is None else box.to_dict())
            info["budgets"].append(budget)
            logger.info("psi%d: %d factor(s)", j + 1, len(psi.app))

            if box is not None and j + 1 < len(targets):
                pts = box.grid(self.check_grid_resolution, self.check_max_points, self.seed)
                image = self._image_points(builder.partial_word(), pts)
                margin = max(box_growth * float(box.width()), 2 * schedule[j + 1])
                box = ProductBox.bounding(image).grow(margin)
                upcoming = targets[j + 1]
                for label, point in (("anchor", upcoming.anchor), ("value", upcoming.value)):
                    values = [constant_value(x, ring) for x in point]
                    if box.contains(values):
                        raise RuntimeError(f"schedule infeasible: K_{j + 2} contains the {label} "
                                           f"of target {j + 1}")
        if spec.approx is not None:
            info["measured_deviation"] = self.grid_deviation(builder.partial_word(), spec.approx.box)
            if info["measured_deviation"] > spec.approx.eps:
                raise RuntimeError(f"family deviation {info['measured_deviation']:.3e} exceeds "
                                   f"eps {spec.approx.eps:.3e} on K")
        return builder, info

    def interpolate_finite_family(self, spec: ProblemSpec, eps_schedule: Optional[Sequence[float]] = None,
                                  box_growth: Optional[float] = None) -> AutoWord:
        """
        W = psi_k o ... o psi_1. Target j is conjugated by the accumulated
        word, earlier values are held to order N, later anchors are fixed
        exactly and psi_j is eps_j-close to the identity on K_j.

        With spec.normalize the anchors are first sent to (j, 0, ..., 0)
        by a tame shear word T and the result is W o T.
        """
        spec.check()
        self._reset(spec)
        box_growth = self.box_growth if box_growth is None else float(box_growth)
        if not spec.normalize:
            builder, info = self._build_family(spec, eps_schedule, box_growth)
            return builder.word(self._meta(spec, family=info))

        if spec.approx is not None:
            raise ValueError("normalize cannot be combined with an approximation box")
        ring = self.ring
        cons = self._constraints(spec)
        tame = self._tame([t.anchor for t in spec.targets], cons)
        t_word = AutoWord(spec.n, ring, list(reversed(tame)), {})
        t_inv = t_word.inverse()
        normalized = []
        for j, t in enumerate(spec.targets):
            slot = tuple(ring.coerce(j + 1 if i == 0 else 0) for i in range(spec.n))
            jet = t.jet.truncate(t.order)
            if tame:
                jet = jet_rebase(jet_compose(jet, word_jet(t_inv, slot, t.order), t.order), slot, t.value)
            normalized.append(JetTarget(jet, t.order))
        inner = ProblemSpec(spec.n, ring, normalized, list(spec.fix_points), spec.fix_order,
                            list(spec.axis_points), None, spec.volume_preserving, list(spec.param_grid),
                            spec.nullhomotopy_asserted)
        family, info = self._build_family(inner, eps_schedule, box_growth)
        builder = _WordBuilder(spec.n, ring)
        builder.add_stage("normalize", tame)
        builder.absorb(family, "family")
        return builder.word(self._meta(spec, family=info))

    def moving_points_with_jets(self, points: Sequence[Sequence[Any]], targets: Sequence[Sequence[Any]],
                                jets: Sequence[JetMap], orders: Sequence[int]) -> AutoWord:
        """
        W = G o H: G sends points[j] to targets[j] holding the other points
        to order max(orders) + 1; H realizes the pulled-back jets at the points.
        """
        ring = self.ring
        if not (len(points) == len(targets) == len(jets) == len(orders)):
            raise ValueError("moving_points_with_jets: points, targets, jets and orders differ in length")
        if not points:
            raise ValueError("moving_points_with_jets: no points given")
        self._reset()
        n = len(points[0])
        for j, (p, a, jet) in enumerate(zip(points, targets, jets)):
            if not _same_point(jet.anchor, [ring.coerce(x) for x in p], ring):
                raise ValueError(f"jet {j}: anchor differs from point {j}")
            if not _same_point(jet.value, [ring.coerce(x) for x in a], ring):
                raise ValueError(f"jet {j}: value differs from target {j}")
        for i in range(len(targets)):
            for l in range(i):
                if _same_point([ring.coerce(x) for x in targets[i]], [ring.coerce(x) for x in targets[l]], ring):
                    raise ValueError(f"targets {l} and {i} coincide")
        hold = max(int(k) for k in orders) + 1

        g_app = self._route(points, targets, Constraints(), hold_order=hold)
        g_word = AutoWord(n, ring, list(reversed(g_app)), {})
        g_inv = g_word.inverse()
        pulled = []
        for p, a, jet, k in zip(points, targets, jets, orders):
            local = jet.truncate(int(k))
            if g_app:
                anchor = tuple(ring.coerce(x) for x in p)
                local = jet_compose(word_jet(g_inv, a, int(k)), local, int(k))
                local = jet_rebase(local, anchor, anchor)
            pulled.append(JetTarget(local, int(k)))
        inner = ProblemSpec(n, ring, pulled, fix_order=hold)
        family, info = self._build_family(inner, None, self.box_growth)
        builder = _WordBuilder(n, ring)
        builder.absorb(family, "H")
        builder.add_stage("G", g_app)
        return builder.word(self._meta(family=info))


# ----------------------------------------------------------------------
# Module-level entry points
# ----------------------------------------------------------------------


def move_point_word(p, q, fix=(), zeros=(), ring=None, box=None, eps=None,
                    config: Optional[Dict] = None, seed: int = 0) -> AutoWord:
    if ring is None:
        raise ValueError("move_point_word: ring is required")
    return InterpolationEngine(ring, config, seed).move_point_word(p, q, fix, zeros, box, eps)


def interpolate_one_point(P: JetMap, config: Optional[Dict] = None, seed: int = 0,
                          volume: bool = False) -> AutoWord:
    return InterpolationEngine(P.ring, config, seed).interpolate_one_point(P, volume=volume)


def interpolate_jet_at_point(spec: ProblemSpec, config: Optional[Dict] = None, seed: int = 0) -> AutoWord:
    return InterpolationEngine(spec.ring, config, seed).interpolate_jet_at_point(spec)


def interpolate_finite_family(spec: ProblemSpec, eps_schedule=None, box_growth=None,
                              config: Optional[Dict] = None, seed: int = 0) -> AutoWord:
    return InterpolationEngine(spec.ring, config, seed).interpolate_finite_family(spec, eps_schedule, box_growth)


def moving_points_with_jets(points, targets, jets, orders, ring, config: Optional[Dict] = None,
                            seed: int = 0) -> AutoWord:
    return InterpolationEngine(ring, config, seed).moving_points_with_jets(points, targets, jets, orders)


def tame_normalization_word(points, ring, fix=(), zeros=(), config: Optional[Dict] = None,
                            seed: int = 0) -> AutoWord:
    return InterpolationEngine(ring, config, seed).tame_normalization_word(points, fix, zeros)


def solve_problem(spec: ProblemSpec, config: Optional[Dict] = None, seed: int = 0) -> AutoWord:
    """Dispatch: a single target goes through interpolate_jet_at_point, several through the family."""
    engine = InterpolationEngine(spec.ring, config, seed)
    if len(spec.targets) == 1 and not spec.normalize:
        return engine.interpolate_jet_at_point(spec)
    return engine.interpolate_finite_family(spec)
