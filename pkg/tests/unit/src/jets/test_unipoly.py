import unittest
from fractions import Fraction

import numpy as np

from src.jets.scalar import ExactField, FloatField
from src.jets.unipoly import PolyRing, UniPoly, describe_ring, make_ring, ring_from_descriptor


class TestUniPoly(unittest.TestCase):
    def setUp(self):
        self.field = ExactField()

    def poly(self, *coeffs):
        return UniPoly(coeffs, self.field)

    def test_trailing_zeros_dropped(self):
        p = self.poly(1, 2, 0, 0)
        self.assertEqual(p.degree(), 1)
        self.assertTrue(self.poly(0, 0).is_zero())

    def test_evaluation_and_shift(self):
        p = self.poly(1, -3, 2)  # 2t^2 - 3t + 1
        self.assertEqual(p(self.field.coerce(2)), 3)
        shifted = p.shift(1)
        for t in range(-2, 3):
            self.assertEqual(shifted(self.field.coerce(t)), p(self.field.coerce(t + 1)))

    def test_divmod(self):
        a = self.poly(-1, 0, 0, 1)  # t^3 - 1
        b = self.poly(-1, 1)        # t - 1
        q, r = a.divmod(b)
        self.assertEqual(q, self.poly(1, 1, 1))
        self.assertTrue(r.is_zero())
        q2, r2 = self.poly(1, 0, 1).divmod(self.poly(0, 2))
        self.assertEqual(q2 * self.poly(0, 2) + r2, self.poly(1, 0, 1))

    def test_vanishing_order(self):
        p = self.poly(-1, 1) ** 3 * self.poly(2, 1)
        self.assertEqual(p.vanishing_order(1, 10), 3)
        self.assertEqual(p.vanishing_order(-2, 10), 1)
        self.assertEqual(p.vanishing_order(0, 10), 0)

    def test_derivative(self):
        self.assertEqual(self.poly(5, 3, 0, 4).derivative(), self.poly(3, 0, 12))


class TestBatchedValues(unittest.TestCase):
    def test_cancelling_power(self):
        field = FloatField(384)
        p = UniPoly((1, field.coerce(Fraction(-1, 5))), field) ** 147
        points = np.array([0, 10, 5 + 5j, 5 - 5j, -1])
        expected = np.array([1, -1, 1j, -1j, 1.2 ** 147])
        values = p.values(points)
        for got, want in zip(values, expected):
            self.assertLess(abs(got - want), 1e-9 * max(1.0, abs(want)))
        self.assertAlmostEqual(p.max_abs_on(points[:4]), 1.0, places=9)

    def test_exact_coefficients(self):
        field = ExactField()
        p = UniPoly((1, -1), field) ** 60
        values = p.values(np.array([2, 0, 1 + 1j]))
        self.assertAlmostEqual(values[0].real, 1.0)
        self.assertAlmostEqual(values[1].real, 1.0)
        self.assertLess(abs(values[2] - (-1j) ** 60), 1e-9)

    def test_envelope_bounds_values(self):
        field = ExactField()
        p = UniPoly((3, -2, 1), field)
        points = np.array([0.5, 2j, -4])
        self.assertTrue(np.all(np.log(np.abs(p.values(points))) <= p.log_envelope(points) + 1e-12))

    def test_empty(self):
        self.assertEqual(UniPoly.zero(ExactField()).values(np.array([1, 2])).tolist(), [0, 0])


class TestPolyRing(unittest.TestCase):
    def setUp(self):
        self.ring = PolyRing(ExactField())

    def test_units_are_nonzero_constants(self):
        x = self.ring.variable()
        self.assertTrue(self.ring.is_unit(self.ring.coerce(3)))
        self.assertFalse(self.ring.is_unit(x))
        with self.assertRaises(ValueError):
            self.ring.inv(x + 1)

    def test_specialize(self):
        x = self.ring.variable()
        p = x * x + 1
        self.assertEqual(self.ring.specialize(p, 2), 5)

    def test_exp_of_nonconstant_rejected(self):
        with self.assertRaises(ValueError):
            self.ring.exp(self.ring.variable())

    def test_json(self):
        x = self.ring.variable()
        data = self.ring.to_json(x + 2)
        self.assertIn("poly", data)
        self.assertEqual(self.ring.from_json(data), x + 2)


class TestRingDescriptor(unittest.TestCase):
    def test_round_trip(self):
        for ring in (make_ring("exact"), make_ring("float", 96), make_ring("exact", param="poly1")):
            again = ring_from_descriptor(describe_ring(ring))
            self.assertEqual(again, ring)

    def test_unknown_param(self):
        with self.assertRaises(ValueError):
            make_ring("exact", param="poly2")


if __name__ == '__main__':
    unittest.main()
