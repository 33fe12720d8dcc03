"""
shearForge Problems
===================
Parsing, schema validation and invariant checks of interpolation problems.

Responsibilities:
- JetTarget / ApproxSpec / ProblemSpec value types
- jsonschema validation returning a list of error strings
- invariant checks (distinct anchors, K misses anchors and values,
  axis points on the z1-axis, unimodular jets in volume mode)
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import jsonschema

from src.jets.jet import JetMap, jet_jacobian_det
from src.jets.linalg import mat_det
from src.onevar.boxes import ProductBox
from src.onevar.interp_function import constant_value

logger = logging.getLogger("shearForge.engine")

SCHEMA_VERSION = "1.0"
DEFAULT_SCHEMA = Path(__file__).resolve().parents[2] / "templates" / "problem_spec.schema.json"

# Reading of the malformed set expression in the axis-point condition
AXIS_POINT_READING = ("axis points c_j lie on the z1-axis and avoid every anchor, "
                      "every value and the box K")


@dataclass
class JetTarget:
    """Jet P with P(anchor) = value to be matched through `order`."""
    jet: JetMap
    order: int

    @property
    def anchor(self):
        return self.jet.anchor

    @property
    def value(self):
        return self.jet.value

    def to_dict(self) -> Dict:
        data = self.jet.truncate(self.order).to_dict()
        data.pop("n", None)
        return data


@dataclass
class ApproxSpec:
    box: ProductBox
    eps: float


@dataclass
class ProblemSpec:
    n: int
    ring: Any
    targets: List[JetTarget]
    fix_points: List[tuple] = field(default_factory=list)
    fix_order: Optional[int] = None
    axis_points: List[tuple] = field(default_factory=list)
    approx: Optional[ApproxSpec] = None
    volume_preserving: bool = False
    param_grid: List[Any] = field(default_factory=list)
    nullhomotopy_asserted: bool = False
    eps_schedule: Optional[List[float]] = None
    normalize: bool = False

    @property
    def parametric(self) -> bool:
        return not self.ring.is_field

    def effective_fix_order(self) -> int:
        if self.fix_order is not None:
            return self.fix_order
        return max((t.order for t in self.targets), default=0) + 1

    # ------------------------------------------------------------------
    # Invariants
    # ------------------------------------------------------------------

    def check(self) -> None:
        """
        Raises:
            ValueError: the first violated invariant
        """
        ring = self.ring
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if self.parametric and not self.param_grid:
            raise ValueError("poly1 problems need a nonempty parameter grid")
        for i, t in enumerate(self.targets):
            if t.jet.n != self.n:
                raise ValueError(f"target {i}: jet dimension {t.jet.n} != n={self.n}")
            if t.order > t.jet.order:
                raise ValueError(f"target {i}: order {t.order} exceeds jet order {t.jet.order}")
            if not t.jet.is_nondegenerate():
                raise ValueError(f"target {i}: degenerate linear part")
            for j, other in enumerate(self.targets[:i]):
                if _points_close(t.anchor, other.anchor, ring):
                    raise ValueError(f"targets {j} and {i} share an anchor")
        for c in self.axis_points:
            if any(not ring.is_zero(x) for x in c[1:]):
                raise ValueError("axis points must lie on the z1-axis")
            for i, t in enumerate(self.targets):
                if _points_close(c, t.anchor, ring) or _points_close(c, t.value, ring):
                    raise ValueError(f"axis point coincides with anchor or value of target {i}")
        if self.approx is not None:
            if self.approx.eps <= 0:
                raise ValueError("approx eps must be positive")
            if self.approx.box.n != self.n:
                raise ValueError("approx box dimension mismatch")
            for i, t in enumerate(self.targets):
                for label, point in (("anchor", t.anchor), ("value", t.value)):
                    values = _constant_point(point, ring)
                    if values is not None and self.approx.box.contains(values):
                        raise ValueError(f"box K contains the {label} of target {i}")
            for c in self.axis_points:
                if self.approx.box.contains(_constant_point(c, ring)):
                    raise ValueError("box K contains an axis point")
        if self.volume_preserving:
            for i, t in enumerate(self.targets):
                det = jet_jacobian_det(t.jet, t.order - 1) if t.order > 1 else None
                if det is not None and not det.is_constant_one():
                    raise ValueError(f"target {i}: Jacobian determinant jet is not 1 (volume mode)")
                if det is None:
                    if not ring.close(mat_det(t.jet.linear_matrix(), ring), ring.one()):
                        raise ValueError(f"target {i}: det of linear part is not 1 (volume mode)")

    def specialize(self, x0) -> "ProblemSpec":
        """The nonparametric problem at parameter value x0 (poly1 only)."""
        ring = self.ring
        spec = lambda point: tuple(ring.specialize(ring.coerce(c), x0) for c in point)
        return ProblemSpec(
            n=self.n,
            ring=ring.base,
            targets=[JetTarget(t.jet.specialize(x0), t.order) for t in self.targets],
            fix_points=[spec(p) for p in self.fix_points],
            fix_order=self.fix_order,
            axis_points=[spec(c) for c in self.axis_points],
            approx=self.approx,
            volume_preserving=self.volume_preserving,
            nullhomotopy_asserted=self.nullhomotopy_asserted,
            eps_schedule=self.eps_schedule,
            normalize=self.normalize,
        )

    # ------------------------------------------------------------------
    # Serialization
    # ------------------------------------------------------------------

    def to_dict(self) -> Dict:
        ring = self.ring
        data: Dict[str, Any] = {
            "schema_version": SCHEMA_VERSION,
            "n": self.n,
            "targets": [t.to_dict() for t in self.targets],
            "fix_points": [ring.vec_to_json(p) for p in self.fix_points],
            "axis_points": [ring.vec_to_json(p) for p in self.axis_points],
            "volume_preserving": self.volume_preserving,
            "nullhomotopy_asserted": self.nullhomotopy_asserted,
            "normalize": self.normalize,
        }
        if self.fix_order is not None:
            data["fix_order"] = self.fix_order
        if self.approx is not None:
            data["approx"] = {"box": self.approx.box.to_dict(), "eps": self.approx.eps}
        if self.parametric:
            data["param"] = "poly1"
            data["param_grid"] = ring.base.vec_to_json(self.param_grid)
        if self.eps_schedule is not None:
            data["eps_schedule"] = list(self.eps_schedule)
        return data

    @classmethod
    def from_dict(cls, data: Dict, ring) -> "ProblemSpec":
        n = int(data["n"])
        targets = []
        for entry in data.get("targets", []):
            jet = JetMap.from_dict(dict(entry, n=n), ring)
            targets.append(JetTarget(jet, jet.order))
        approx = None
        if data.get("approx"):
            approx = ApproxSpec(ProductBox.from_dict(data["approx"]["box"]), float(data["approx"]["eps"]))
        param_grid = []
        if data.get("param") == "poly1":
            param_grid = list(ring.base.vec_from_json(data.get("param_grid", [])))
        spec = cls(
            n=n,
            ring=ring,
            targets=targets,
            fix_points=[ring.vec_from_json(p) for p in data.get("fix_points", [])],
            fix_order=data.get("fix_order"),
            axis_points=[ring.vec_from_json(p) for p in data.get("axis_points", [])],
            approx=approx,
            volume_preserving=bool(data.get("volume_preserving", False)),
            param_grid=param_grid,
            nullhomotopy_asserted=bool(data.get("nullhomotopy_asserted", False)),
            eps_schedule=data.get("eps_schedule"),
            normalize=bool(data.get("normalize", False)),
        )
        return spec


def _constant_point(point: Sequence[Any], ring):
    try:
        return [constant_value(x, ring) for x in point]
    except ValueError:
        return None


def _points_close(a: Sequence[Any], b: Sequence[Any], ring) -> bool:
    return all(ring.close(x, y) for x, y in zip(a, b))


# ----------------------------------------------------------------------
# Schema validation
# ----------------------------------------------------------------------


def load_schema(schema_path: Optional[str] = None) -> Dict:
    path = Path(schema_path) if schema_path else DEFAULT_SCHEMA
    if not path.exists():
        raise FileNotFoundError(f"Schema not found: {path}")
    with open(path, "r") as f:
        return json.load(f)


def validate_against_schema(data: Dict, schema: Dict) -> List[str]:
    """
    Validate a JSON document against a draft-07 schema.

    Returns a list of error strings (empty = valid), each prefixed with the
    JSON path of the offending field.
    """
    validator = jsonschema.Draft7Validator(schema)
    errors: List[str] = []
    for err in sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path)):
        path = "/".join(str(p) for p in err.absolute_path) or "<root>"
        errors.append(f"{path}: {err.message}")
    return errors


def validate_problem(data: Dict, schema_path: Optional[str] = None) -> List[str]:
    errors = validate_against_schema(data, load_schema(schema_path))
    if errors:
        return errors
    n = data["n"]
    for i, t in enumerate(data.get("targets", [])):
        for key in ("anchor", "value"):
            if len(t[key]) != n:
                errors.append(f"targets/{i}/{key}: expected {n} entries, got {len(t[key])}")
    for key in ("fix_points", "axis_points"):
        for i, p in enumerate(data.get(key, [])):
            if len(p) != n:
                errors.append(f"{key}/{i}: expected {n} entries, got {len(p)}")
    return errors
