"""
shearForge Composition Words
============================
AutoWord: an ordered composition of primitives, factors[0] applied last.

Responsibilities:
- word_eval / word_eval_numpy (right-to-left fold)
- word_jet by chaining primitive jets through jet_compose
- certificate JSON (arithmetic descriptor, factors, meta)
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence

import numpy as np

from src.jets.jet import JetMap, jet_compose
from src.jets.unipoly import describe_ring, ring_from_descriptor
from src.shears.primitives import Primitive, primitive_from_dict

logger = logging.getLogger("shearForge.shears")

COMPOSITION_ORDER = "factors[0] is applied last (F = factors[0] o ... o factors[-1])"


@dataclass
class AutoWord:
    """Composition S_k o ... o S_0 stored as [S_k, ..., S_0]."""
    n: int
    ring: Any
    factors: List[Primitive] = field(default_factory=list)
    meta: Dict = field(default_factory=dict)

    def __post_init__(self):
        for g in self.factors:
            if g.n != self.n:
                raise ValueError(f"word factor {g.variant} has dimension {g.n}, expected {self.n}")

    def __len__(self) -> int:
        return len(self.factors)

    def then(self, other: "AutoWord") -> "AutoWord":
        """other o self: apply self first, then other."""
        return AutoWord(self.n, self.ring, list(other.factors) + list(self.factors), dict(self.meta))

    def inverse(self) -> "AutoWord":
        return AutoWord(self.n, self.ring, [g.inverse() for g in reversed(self.factors)], {})

    def specialize(self, x0) -> "AutoWord":
        return AutoWord(self.n, self.ring.base, [g.specialize(x0) for g in self.factors], dict(self.meta))

    def variants(self) -> List[str]:
        return [g.variant for g in self.factors]

    # ------------------------------------------------------------------
    # Serialization
    # ------------------------------------------------------------------

    def to_dict(self) -> Dict:
        return {
            "n": self.n,
            "arithmetic": describe_ring(self.ring),
            "composition": COMPOSITION_ORDER,
            "factors": [g.to_dict() for g in self.factors],
            "meta": self.meta,
        }

    @classmethod
    def from_dict(cls, data: Dict, ring=None) -> "AutoWord":
        if ring is None:
            ring = ring_from_descriptor(data.get("arithmetic", {}))
        factors = [primitive_from_dict(entry, ring) for entry in data.get("factors", [])]
        return cls(int(data["n"]), ring, factors, dict(data.get("meta", {})))


def word_eval(w: AutoWord, z: Sequence[Any]):
    point = tuple(w.ring.coerce(x) for x in z)
    for g in reversed(w.factors):
        point = g.eval(point)
    return point


def word_eval_numpy(w: AutoWord, points: np.ndarray) -> np.ndarray:
    """complex128 image of an (m, n) array of points."""
    out = np.asarray(points, dtype=np.complex128)
    for g in reversed(w.factors):
        out = g.eval_numpy(out)
    return out


def word_jet(w: AutoWord, anchor: Sequence[Any], order: int) -> JetMap:
    """Jet of the full composition at `anchor`, truncated to `order`."""
    if order < 1:
        raise ValueError(f"word_jet: order must be >= 1, got {order}")
    jet = JetMap.identity(w.n, anchor, order, w.ring)
    for g in reversed(w.factors):
        jet = jet_compose(g.jet(jet.value, order), jet, order)
    return jet

