"""
shearForge Boxes
================
Axis-aligned rectangles in C and their products in C^n.

Responsibilities:
- PlaneBox: exact (Fraction) bounds, corners, nearest point to 0, grids
- ProductBox: compact convex K in C^n as a product of PlaneBoxes
- bounding rectangle of a linear form's image of K
- deterministic sampling lattices for grid checks
"""

import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.jets.scalar import GaussianRational

logger = logging.getLogger("shearForge.onevar")


def scalar_parts(value: Any) -> Tuple[Fraction, Fraction]:
    """Real and imaginary parts as Fractions (exact for Gaussian rationals)."""
    if isinstance(value, GaussianRational):
        return value.re, value.im
    if isinstance(value, (int, Fraction)):
        return Fraction(value), Fraction(0)
    c = complex(value)
    return Fraction(c.real), Fraction(c.imag)


def _clamp(x: Fraction, lo: Fraction, hi: Fraction) -> Fraction:
    return min(max(x, lo), hi)


@dataclass(frozen=True)
class PlaneBox:
    """[re_lo, re_hi] x [im_lo, im_hi] in C."""
    re_lo: Fraction
    re_hi: Fraction
    im_lo: Fraction
    im_hi: Fraction

    def __post_init__(self):
        if self.re_lo > self.re_hi or self.im_lo > self.im_hi:
            raise ValueError(f"empty PlaneBox: {self}")

    @classmethod
    def build(cls, re_lo, re_hi, im_lo=0, im_hi=0) -> "PlaneBox":
        return cls(Fraction(re_lo), Fraction(re_hi), Fraction(im_lo), Fraction(im_hi))

    @classmethod
    def point(cls, value) -> "PlaneBox":
        re, im = scalar_parts(value)
        return cls(re, re, im, im)

    @classmethod
    def bounding(cls, points: np.ndarray) -> "PlaneBox":
        pts = np.asarray(points, dtype=np.complex128)
        return cls(Fraction(float(pts.real.min())), Fraction(float(pts.real.max())),
                   Fraction(float(pts.imag.min())), Fraction(float(pts.imag.max())))

    # ------------------------------------------------------------------
    # Geometry
    # ------------------------------------------------------------------

    def corners(self) -> List[Tuple[Fraction, Fraction]]:
        return [(self.re_lo, self.im_lo), (self.re_hi, self.im_lo),
                (self.re_lo, self.im_hi), (self.re_hi, self.im_hi)]

    def corners_complex(self) -> np.ndarray:
        return np.array([complex(float(a), float(b)) for a, b in self.corners()], dtype=np.complex128)

    def nearest_to_origin(self) -> Tuple[Fraction, Fraction]:
        return (_clamp(Fraction(0), self.re_lo, self.re_hi),
                _clamp(Fraction(0), self.im_lo, self.im_hi))

    def contains_zero(self) -> bool:
        re, im = self.nearest_to_origin()
        return re == 0 and im == 0

    def contains(self, value, slack: float = 0.0) -> bool:
        re, im = scalar_parts(value)
        s = Fraction(slack)
        return (self.re_lo - s <= re <= self.re_hi + s) and (self.im_lo - s <= im <= self.im_hi + s)

    def translate(self, value) -> "PlaneBox":
        re, im = scalar_parts(value)
        return PlaneBox(self.re_lo + re, self.re_hi + re, self.im_lo + im, self.im_hi + im)

    def grow(self, margin) -> "PlaneBox":
        m = Fraction(margin)
        return PlaneBox(self.re_lo - m, self.re_hi + m, self.im_lo - m, self.im_hi + m)

    def width(self) -> Fraction:
        return max(self.re_hi - self.re_lo, self.im_hi - self.im_lo)

    def max_abs(self) -> float:
        return float(max(abs(complex(float(a), float(b))) for a, b in self.corners()))

    def grid(self, resolution: int) -> np.ndarray:
        """resolution x resolution lattice plus the four corners, complex128."""
        re = np.linspace(float(self.re_lo), float(self.re_hi), resolution)
        im = np.linspace(float(self.im_lo), float(self.im_hi), resolution)
        lattice = (re[:, None] + 1j * im[None, :]).ravel()
        return np.concatenate([lattice, self.corners_complex()])

    def to_dict(self) -> Dict:
        return {"re": [str(self.re_lo), str(self.re_hi)], "im": [str(self.im_lo), str(self.im_hi)]}

    @classmethod
    def from_dict(cls, data: Dict) -> "PlaneBox":
        re = data.get("re", [0, 0])
        im = data.get("im", [0, 0])
        return cls(Fraction(str(re[0])), Fraction(str(re[1])), Fraction(str(im[0])), Fraction(str(im[1])))


@dataclass(frozen=True)
class ProductBox:
    """K = box_1 x ... x box_n in C^n (compact, convex)."""
    boxes: Tuple[PlaneBox, ...]

    @property
    def n(self) -> int:
        return len(self.boxes)

    def image_under_form(self, form: Sequence[Any]) -> PlaneBox:
        """Bounding rectangle of form(K); exact for Gaussian-rational forms."""
        re_lo = re_hi = im_lo = im_hi = Fraction(0)
        for c, box in zip(form, self.boxes):
            cr, ci = scalar_parts(c)
            res, ims = [], []
            for a, b in box.corners():
                res.append(cr * a - ci * b)
                ims.append(cr * b + ci * a)
            re_lo += min(res)
            re_hi += max(res)
            im_lo += min(ims)
            im_hi += max(ims)
        return PlaneBox(re_lo, re_hi, im_lo, im_hi)

    def translate(self, point: Sequence[Any]) -> "ProductBox":
        return ProductBox(tuple(b.translate(p) for b, p in zip(self.boxes, point)))

    def grow(self, margin) -> "ProductBox":
        return ProductBox(tuple(b.grow(margin) for b in self.boxes))

    def width(self) -> Fraction:
        return max(b.width() for b in self.boxes)

    def contains(self, point: Sequence[Any], slack: float = 0.0) -> bool:
        return all(b.contains(p, slack) for b, p in zip(self.boxes, point))

    def corner_radius(self, center: Optional[Sequence[Any]] = None) -> float:
        """max |z - center| over the corners of K."""
        c = np.zeros(self.n, dtype=np.complex128) if center is None else \
            np.array([complex(*map(float, scalar_parts(x))) for x in center], dtype=np.complex128)
        return float(np.max(np.linalg.norm(self.corners() - c[None, :], axis=1)))

    def corners(self) -> np.ndarray:
        per_axis = [b.corners_complex() for b in self.boxes]
        return np.array(list(itertools.product(*per_axis)), dtype=np.complex128)

    def lattice_size(self, resolution: int) -> int:
        per_axis = [(resolution if b.re_lo < b.re_hi else 1) * (resolution if b.im_lo < b.im_hi else 1)
                    for b in self.boxes]
        return int(np.prod(per_axis))

    def grid(self, resolution: int, max_points: Optional[int] = None, seed: int = 0) -> np.ndarray:
        """
        Lattice with `resolution` points per nondegenerate real dimension.

        Above `max_points` the lattice is subsampled with a seeded
        RandomState; all corners are always kept.
        """
        axes = []
        for b in self.boxes:
            re = np.linspace(float(b.re_lo), float(b.re_hi), resolution if b.re_lo < b.re_hi else 1)
            im = np.linspace(float(b.im_lo), float(b.im_hi), resolution if b.im_lo < b.im_hi else 1)
            axes.append((re[:, None] + 1j * im[None, :]).ravel())
        sizes = [len(a) for a in axes]
        total = int(np.prod(sizes))
        corners = self.corners()
        if max_points is None or total <= max_points:
            mesh = np.array(np.meshgrid(*axes, indexing="ij")).reshape(self.n, -1).T
            return np.concatenate([mesh, corners])
        logger.warning("K lattice has %d points, subsampling %d (seed=%d)", total, max_points, seed)
        rng = np.random.RandomState(seed)
        flat = rng.choice(total, size=max_points, replace=False)
        idx = np.array(np.unravel_index(np.sort(flat), sizes)).T
        sample = np.array([[axes[j][row[j]] for j in range(self.n)] for row in idx], dtype=np.complex128)
        return np.concatenate([sample, corners])

    def to_dict(self) -> Dict:
        return {"boxes": [b.to_dict() for b in self.boxes]}

    @classmethod
    def from_dict(cls, data: Dict) -> "ProductBox":
        return cls(tuple(PlaneBox.from_dict(b) for b in data["boxes"]))

    @classmethod
    def bounding(cls, points: np.ndarray) -> "ProductBox":
        pts = np.asarray(points, dtype=np.complex128)
        return cls(tuple(PlaneBox.bounding(pts[:, j]) for j in range(pts.shape[1])))
