import math
import unittest

import numpy as np
from mpmath.ctx_mp import MPContext

from src.homog.basis import draw_gaussian
from src.jets.scalar import ExactField, FloatField
from src.jets.unipoly import PolyRing, UniPoly
from src.onevar.boxes import PlaneBox, ProductBox
from src.onevar.interp_function import (
    build_interp_function,
    constant_value,
    form_constraints,
    interp_along_form,
    separating_direction,
)


class TestSeparatingDirection(unittest.TestCase):
    def test_rectangle(self):
        theta, margin = separating_direction(PlaneBox.build(1, 3, -1, 1))
        self.assertAlmostEqual(theta, 0.0)
        self.assertAlmostEqual(margin, 1.0)

    def test_point(self):
        theta, margin = separating_direction(PlaneBox.point(3))
        self.assertAlmostEqual(theta, 0.0)
        self.assertAlmostEqual(margin, 3.0)

    def test_off_axis(self):
        theta, margin = separating_direction(PlaneBox.build(-2, -1, 1, 2))
        self.assertAlmostEqual(theta, 3 * math.pi / 4)
        self.assertAlmostEqual(margin, math.sqrt(2))

    def test_contains_zero(self):
        with self.assertRaises(ValueError):
            separating_direction(PlaneBox.build(-1, 1, -1, 1))


class TestBuildInterpFunction(unittest.TestCase):
    def setUp(self):
        self.field = ExactField()

    def test_pure_monomial(self):
        f = build_interp_function(1, 2, [], [], None, None, self.field)
        self.assertEqual(f, UniPoly([0, 0, 1], self.field))

    def test_single_vanishing_point(self):
        f = build_interp_function(1, 2, [(1, 1)], [], None, None, self.field)
        self.assertEqual(f, UniPoly([0, 0, 1, -1], self.field))

    def test_vanishing_orders_and_zeros(self):
        f = build_interp_function(3, 1, [(2, 3)], [-1], None, None, self.field)
        self.assertEqual(f.coefficient(0), 0)
        self.assertEqual(f.coefficient(1), 3)
        self.assertEqual(f.vanishing_order(2, 10), 3)
        self.assertEqual(f(self.field.coerce(-1)), 0)

    def test_scaling_covariance(self):
        f = build_interp_function(1, 2, [(1, 2)], [3], None, None, self.field)
        g = build_interp_function(5, 2, [(1, 2)], [3], None, None, self.field)
        self.assertEqual(g, f.scale(5))

    def test_smallness_on_box(self):
        field = FloatField(128)
        box = PlaneBox.build(2, 4, -1, 1)
        f = build_interp_function(1, 1, [(1, 2)], [], box, 1e-3, field)
        self.assertTrue(field.is_zero(f.coefficient(0)))
        self.assertTrue(field.close(f.coefficient(1), field.one()))
        self.assertGreaterEqual(f.vanishing_order(1, 5), 2)
        coarse = f.max_abs_on(box.grid(65))
        fine = f.max_abs_on(box.grid(129))
        self.assertLessEqual(coarse, 1e-3)
        self.assertLess(abs(fine - coarse), 0.1 * coarse)

    def test_smallness_exact_mode_keeps_leading_jet(self):
        box = PlaneBox.build(2, 3, -1, 1)
        f = build_interp_function(1, 2, [], [], box, 1e-2, self.field)
        self.assertEqual(f.coefficient(0), 0)
        self.assertEqual(f.coefficient(1), 0)
        self.assertEqual(f.coefficient(2), 1)
        self.assertLessEqual(f.max_abs_on(box.grid(65)), 1e-2)

    def test_point_at_origin(self):
        with self.assertRaises(ValueError):
            build_interp_function(1, 1, [(0, 1)], [], None, None, self.field)

    def test_coincident_points(self):
        with self.assertRaises(ValueError):
            build_interp_function(1, 1, [(1, 1)], [1], None, None, self.field)

    def test_parametric_leading_coefficient(self):
        ring = PolyRing(self.field)
        x = ring.variable()
        f = build_interp_function(x + 1, 1, [(1, 1)], [], None, None, ring)
        self.assertEqual(f.coefficient(1), x + 1)
        self.assertEqual(ring.specialize(f(ring.one()), 4), 0)


class TestFormConstraints(unittest.TestCase):
    def setUp(self):
        self.field = ExactField()

    def test_fix_order_becomes_vanishing_order_plus_one(self):
        vanish, zeros, box = form_constraints([1, 0], [0, 0], [((2, 5), 3)], [(-1, 0)], None, self.field)
        self.assertEqual(vanish, [(2, 4)])
        self.assertEqual(zeros, [-1])
        self.assertIsNone(box)

    def test_collision_with_anchor(self):
        with self.assertRaises(ValueError):
            form_constraints([1, 0], [0, 0], [((0, 5), 1)], [], None, self.field)

    def test_box_containing_anchor_image(self):
        K = ProductBox((PlaneBox.build(-1, 1), PlaneBox.build(3, 4)))
        with self.assertRaises(ValueError):
            form_constraints([1, 0], [0, 0], [], [], K, self.field)

    def test_merged_images(self):
        vanish, zeros, _ = form_constraints([1, 0], [0, 0], [((2, 0), 1), ((2, 1), 3)], [(2, 7)],
                                            None, self.field)
        self.assertEqual(vanish, [(2, 4)])
        self.assertEqual(zeros, [])


class TestInterpAlongForm(unittest.TestCase):
    def test_leading_jet_at_anchor_image(self):
        field = ExactField()
        f = interp_along_form([1, 1], [1, 0], 2, 2, [((3, 0), 1)], [], None, None, field)
        local = f.shift(1)
        self.assertEqual(local.coefficient(0), 0)
        self.assertEqual(local.coefficient(1), 0)
        self.assertEqual(local.coefficient(2), 2)
        self.assertEqual(f.vanishing_order(3, 5), 2)

    def test_constant_value_rejects_parametric_points(self):
        ring = PolyRing(ExactField())
        with self.assertRaises(ValueError):
            constant_value(ring.variable(), ring)
        self.assertEqual(constant_value(ring.coerce(4), ring), 4)

class TestSmallnessCertification(unittest.TestCase):
    BOX = PlaneBox.build(1, 3, -2, 2)

    def test_cancellation_beyond_field_precision(self):
        with self.assertRaises(RuntimeError) as ctx:
            build_interp_function(1, 2, [], [], self.BOX, 1e-6, FloatField(128), max_retries=4)
        self.assertIn("precision_bits", str(ctx.exception))

    def test_cancellation_at_higher_precision(self):
        field = FloatField(256)
        f = build_interp_function(1, 2, [], [], self.BOX, 1e-6, field, max_retries=4)
        self.assertTrue(field.close(f.coefficient(2), field.one()))
        self.assertGreater(f.degree(), 100)
        self.assertLessEqual(f.max_abs_on(self.BOX.grid(65)), 1e-6)
        ctx = MPContext()
        ctx.prec = 640
        coeffs = [ctx.mpc(ctx.mpf(c.real), ctx.mpf(c.imag)) for c in f.coeffs]
        for z in self.BOX.grid(9):
            acc = ctx.mpc(0)
            for c in reversed(coeffs):
                acc = acc * ctx.mpc(complex(z)) + c
            self.assertLessEqual(float(abs(acc)), 1e-6)

    def test_power_cap(self):
        with self.assertRaises(RuntimeError) as ctx:
            build_interp_function(1, 2, [], [], self.BOX, 1e-6, FloatField(256), max_power=50)
        self.assertIn("max_power", str(ctx.exception))


class TestSeededConstraintSets(unittest.TestCase):
    def _distinct_points(self, rng, field, count, used):
        points = []
        while len(points) < count:
            p = field.coerce(draw_gaussian(rng, 4, 2, nonzero=True))
            if p not in used:
                used.append(p)
                points.append(p)
        return points

    def test_exact_constraint_sets(self):
        field = ExactField()
        rng = np.random.RandomState(7)
        for trial in range(100):
            r = int(rng.randint(0, 4))
            beta = field.coerce(draw_gaussian(rng, 3, 2, nonzero=True))
            used = []
            vanish = [(p, int(rng.randint(1, 4))) for p in self._distinct_points(rng, field, rng.randint(0, 3), used)]
            zeros = self._distinct_points(rng, field, rng.randint(0, 3), used)
            f = build_interp_function(beta, r, vanish, zeros, None, None, field)
            for k in range(r):
                self.assertEqual(f.coefficient(k), 0, f"trial {trial}")
            self.assertEqual(f.coefficient(r), beta, f"trial {trial}")
            for p, order in vanish:
                self.assertGreaterEqual(f.vanishing_order(p, order + 2), order, f"trial {trial}")
            for z in zeros:
                self.assertEqual(f(z), 0, f"trial {trial}")

    def test_float_constraint_sets_with_bound(self):
        field = FloatField(128)
        rng = np.random.RandomState(11)
        candidates = [0.5, -0.5, 0.5j, -0.5j, 0.75 + 0.25j, -0.75 - 0.5j, 1, -1j]
        eps = 1e-3
        for trial in range(20):
            re_lo = int(rng.randint(2, 4))
            box = PlaneBox.build(re_lo, re_lo + 1, -1, 1)
            r = int(rng.randint(0, 3))
            beta = field.coerce(draw_gaussian(rng, 3, 1, nonzero=True))
            picks = rng.choice(len(candidates), size=int(rng.randint(0, 3)), replace=False)
            vanish = [(candidates[i], int(rng.randint(1, 3))) for i in picks]
            f = build_interp_function(beta, r, vanish, [], box, eps, field, grid_resolution=33)
            for k in range(r):
                self.assertTrue(field.is_zero(f.coefficient(k)), f"trial {trial}")
            self.assertTrue(field.close(f.coefficient(r), beta), f"trial {trial}")
            self.assertLessEqual(f.max_abs_on(box.grid(33)), eps, f"trial {trial}")


class TestParametricAlongForm(unittest.TestCase):
    def test_exact_anchor_off_origin(self):
        ring = PolyRing(ExactField())
        x = ring.variable()
        f = interp_along_form([1, 0], [1, 0], x + 1, 1, [((3, 0), 1)], [], None, None, ring)
        local = f.shift(ring.one())
        self.assertTrue(local.coefficient(0).is_zero())
        self.assertEqual(local.coefficient(1), x + 1)
        self.assertEqual(ring.specialize(f(ring.coerce(3)), 2), 0)

    def test_bounded_per_parameter_sample(self):
        field = FloatField(128)
        ring = PolyRing(field)
        x = ring.variable()
        K = ProductBox((PlaneBox.build(3, 4, -1, 1), PlaneBox.build(-1, 1, -1, 1)))
        samples = [0, 0.5, 1]
        f = interp_along_form([1, 0], [1, 0], x + 1, 1, [], [], K, 1e-2, ring, param_grid=samples)
        for x0 in samples:
            g = f.map_coeffs(lambda c: ring.specialize(c, x0), field)
            local = g.shift(field.one())
            self.assertTrue(field.is_zero(local.coefficient(0)))
            self.assertTrue(field.close(local.coefficient(1), field.coerce(x0 + 1)))
            self.assertLessEqual(g.max_abs_on(K.boxes[0].grid(33)), 1e-2)


if __name__ == '__main__':
    unittest.main()
