import unittest
from fractions import Fraction

from src.jets.scalar import ExactField, FloatField, GaussianRational, make_field


class TestGaussianRational(unittest.TestCase):
    def test_arithmetic_is_exact(self):
        a = GaussianRational(Fraction(1, 3), 2)
        b = GaussianRational(-1, Fraction(1, 2))
        self.assertEqual(a * b / b, a)
        self.assertEqual(a + b - b, a)
        self.assertEqual((a * a.reciprocal()), 1)

    def test_conjugate_and_abs2(self):
        a = GaussianRational(3, 4)
        self.assertEqual(a.conjugate(), GaussianRational(3, -4))
        self.assertEqual(a.abs2(), 25)
        self.assertAlmostEqual(abs(a), 5.0)

    def test_division_by_zero(self):
        with self.assertRaises(ZeroDivisionError):
            GaussianRational(1) / GaussianRational(0)

    def test_integer_power(self):
        i = GaussianRational(0, 1)
        self.assertEqual(i ** 2, -1)
        self.assertEqual(i ** -1, GaussianRational(0, -1))


class TestExactField(unittest.TestCase):
    def setUp(self):
        self.field = ExactField()

    def test_exp_only_at_zero(self):
        self.assertEqual(self.field.exp(self.field.zero()), 1)
        with self.assertRaises(ValueError):
            self.field.exp(self.field.coerce(1))

    def test_json_round_trip(self):
        v = GaussianRational(Fraction(-3, 7), Fraction(5, 2))
        data = self.field.to_json(v)
        self.assertEqual(data, {"re": "-3/7", "im": "5/2"})
        self.assertEqual(self.field.from_json(data), v)

    def test_parametric_scalar_rejected(self):
        with self.assertRaises(ValueError):
            self.field.from_json({"poly": [1]})


class TestFloatField(unittest.TestCase):
    def test_default_tolerance_scales_with_precision(self):
        f128 = FloatField(128)
        f256 = FloatField(256)
        self.assertAlmostEqual(float(f128.tol), 2.0 ** -68)
        self.assertLess(float(f256.tol), float(f128.tol))

    def test_private_precision(self):
        f128 = FloatField(128)
        f256 = FloatField(256)
        third_256 = f256.coerce(1) / 3
        third_128 = f128.coerce(1) / 3
        self.assertEqual(f128.ctx.prec, 128)
        self.assertEqual(f256.ctx.prec, 256)
        self.assertTrue(f128.close(f128.coerce(third_256), third_128))

    def test_rejects_low_precision(self):
        with self.assertRaises(ValueError):
            FloatField(32)

    def test_json_round_trip_is_close(self):
        field = FloatField(128)
        v = field.coerce(2) ** field.coerce(0.5) + field.coerce(1j) / 3
        back = field.from_json(field.to_json(v))
        self.assertTrue(field.close(back, v))

    def test_fraction_strings(self):
        field = FloatField(128)
        self.assertTrue(field.close(field.from_json({"re": "1/4", "im": "0"}), field.coerce(0.25)))


class TestMakeField(unittest.TestCase):
    def test_modes(self):
        self.assertTrue(make_field("exact").exact)
        self.assertFalse(make_field("float", 96).exact)
        with self.assertRaises(ValueError):
            make_field("interval")


if __name__ == '__main__':
    unittest.main()
