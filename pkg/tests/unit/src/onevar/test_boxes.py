import unittest
from fractions import Fraction

import numpy as np

from src.jets.scalar import GaussianRational
from src.onevar.boxes import PlaneBox, ProductBox


class TestPlaneBox(unittest.TestCase):
    def test_empty_rejected(self):
        with self.assertRaises(ValueError):
            PlaneBox.build(2, 1)

    def test_nearest_to_origin(self):
        self.assertEqual(PlaneBox.build(1, 3, -1, 1).nearest_to_origin(), (1, 0))
        self.assertTrue(PlaneBox.build(-1, 1, -1, 1).contains_zero())
        self.assertFalse(PlaneBox.point(3).contains_zero())

    def test_grid_includes_corners(self):
        box = PlaneBox.build(0, 1, 0, 2)
        grid = box.grid(5)
        self.assertEqual(len(grid), 25 + 4)
        self.assertIn(complex(1, 2), set(grid.tolist()))

    def test_round_trip(self):
        box = PlaneBox.build(Fraction(1, 3), 2, -1, Fraction(5, 7))
        self.assertEqual(PlaneBox.from_dict(box.to_dict()), box)


class TestProductBox(unittest.TestCase):
    def setUp(self):
        self.box = ProductBox((PlaneBox.build(1, 2, 0, 1), PlaneBox.build(-1, 1)))

    def test_image_under_form_is_exact(self):
        image = self.box.image_under_form([GaussianRational(1), GaussianRational(0, 1)])
        # z1 + i z2 with z2 real in [-1, 1]
        self.assertEqual((image.re_lo, image.re_hi), (1, 2))
        self.assertEqual((image.im_lo, image.im_hi), (-1, 2))

    def test_contains_and_translate(self):
        self.assertTrue(self.box.contains([GaussianRational(Fraction(3, 2)), GaussianRational(0)]))
        moved = self.box.translate([GaussianRational(-1), GaussianRational(0)])
        self.assertTrue(moved.contains([GaussianRational(0), GaussianRational(1)]))

    def test_degenerate_axes_collapse_in_lattice(self):
        self.assertEqual(self.box.lattice_size(17), 17 * 17 * 17)
        grid = self.box.grid(17)
        self.assertEqual(grid.shape, (17 ** 3 + 16, 2))

    def test_subsampling_keeps_corners_and_is_seeded(self):
        a = self.box.grid(17, max_points=100, seed=3)
        b = self.box.grid(17, max_points=100, seed=3)
        self.assertEqual(a.shape, (116, 2))
        self.assertTrue(np.array_equal(a, b))
        corners = {tuple(c) for c in self.box.corners().tolist()}
        self.assertTrue(corners <= {tuple(p) for p in a.tolist()})

    def test_corner_radius(self):
        r = self.box.corner_radius()
        self.assertAlmostEqual(r, float(np.sqrt(abs(complex(2, 1)) ** 2 + 1)))

    def test_bounding(self):
        pts = np.array([[0.5 + 1j, 2.0], [1.5 - 1j, -3.0]])
        box = ProductBox.bounding(pts)
        self.assertTrue(box.contains([complex(1.0, 0.0), complex(0.0, 0.0)]))


if __name__ == '__main__':
    unittest.main()
