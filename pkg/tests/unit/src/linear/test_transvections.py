import unittest
from fractions import Fraction

import numpy as np

from src.homog.basis import draw_gaussian
from src.jets.linalg import mat_det, mat_equal
from src.jets.scalar import ExactField, FloatField, GaussianRational
from src.jets.unipoly import PolyRing, UniPoly
from src.linear.transvections import (
    Transvection,
    group_blocks,
    multiply_transvections,
    sl2_polyring_to_transvections,
    sln_to_transvections,
)


class TestTransvection(unittest.TestCase):
    def test_diagonal_rejected(self):
        with self.assertRaises(ValueError):
            Transvection(1, 1, 2)

    def test_matrix_and_inverse(self):
        field = ExactField()
        t = Transvection(1, 0, 3)
        self.assertTrue(t.lower)
        product = multiply_transvections([t, t.inverse()], 2, field)
        self.assertTrue(mat_equal(product, [[1, 0], [0, 1]], field))
        self.assertEqual(t.matrix(2, field), [[1, 0], [3, 1]])

    def test_dict_round_trip(self):
        field = ExactField()
        t = Transvection(0, 2, field.coerce(Fraction(-5, 3)))
        self.assertEqual(Transvection.from_dict(t.to_dict(field), field), t)

    def test_group_blocks(self):
        ts = [Transvection(1, 0, 1), Transvection(0, 1, 2), Transvection(0, 1, 3), Transvection(1, 0, 1)]
        self.assertEqual(group_blocks(ts), [
            {"triangle": "lower", "start": 0, "stop": 1},
            {"triangle": "upper", "start": 1, "stop": 3},
            {"triangle": "lower", "start": 3, "stop": 4},
        ])


class TestSLnFactorization(unittest.TestCase):
    def setUp(self):
        self.field = ExactField()

    def check_product(self, Q, ring):
        ts = sln_to_transvections(Q, ring)
        self.assertTrue(all(t.row != t.col for t in ts))
        self.assertTrue(mat_equal(multiply_transvections(ts, len(Q), ring),
                                  [[ring.coerce(x) for x in row] for row in Q], ring))
        return ts

    def test_two_by_two(self):
        self.check_product([[2, 1], [3, 2]], self.field)

    def test_identity_needs_nothing(self):
        self.assertEqual(sln_to_transvections([[1, 0], [0, 1]], self.field), [])

    def test_zero_pivot(self):
        self.check_product([[0, 1], [-1, 0]], self.field)

    def test_pivot_repair_without_rows_below(self):
        self.check_product([[2, 0, 0], [0, Fraction(1, 2), 0], [0, 0, 1]], self.field)

    def test_gaussian_entries(self):
        i = GaussianRational(0, 1)
        self.check_product([[1, i], [i, 0]], self.field)

    def test_float_mode(self):
        self.check_product([[2, 1], [3, 2]], FloatField(128))

    def test_bad_determinant(self):
        with self.assertRaises(ValueError):
            sln_to_transvections([[2, 0], [0, 1]], self.field)


class TestSL2PolyRing(unittest.TestCase):
    def setUp(self):
        self.ring = PolyRing(ExactField())
        self.x = self.ring.variable()

    def test_example_matrix(self):
        x, ring = self.x, self.ring
        M = [[x + 1, ring.one()], [x * x + x * 2, x + 1]]
        ts = sl2_polyring_to_transvections(M, ring)
        self.assertTrue(mat_equal(multiply_transvections(ts, 2, ring), M, ring))

    def test_constant_matrix(self):
        ring = self.ring
        M = [[ring.from_int(2), ring.one()], [ring.from_int(3), ring.from_int(2)]]
        ts = sl2_polyring_to_transvections(M, ring)
        self.assertTrue(mat_equal(multiply_transvections(ts, 2, ring), M, ring))

    def test_rejects_non_unimodular(self):
        x, ring = self.x, self.ring
        with self.assertRaises(ValueError):
            sl2_polyring_to_transvections([[x + 1, ring.zero()], [ring.zero(), ring.one()]], ring)

    def test_rejects_wrong_shape(self):
        ring = self.ring
        with self.assertRaises(ValueError):
            sl2_polyring_to_transvections([[ring.one()] * 3] * 3, ring)

class TestSeededFactorizations(unittest.TestCase):
    def random_unimodular(self, rng, n, ring):
        while True:
            Q = [[ring.coerce(draw_gaussian(rng, 3, 2)) for _ in range(n)] for _ in range(n)]
            det = mat_det(Q, ring)
            if not ring.is_zero(det):
                break
        Q[0] = [x * ring.inv(det) for x in Q[0]]
        return Q

    def test_sln_multiply_back(self):
        field = ExactField()
        rng = np.random.RandomState(5)
        for trial in range(30):
            n = 2 + trial % 3
            Q = self.random_unimodular(rng, n, field)
            ts = sln_to_transvections(Q, field)
            self.assertTrue(all(t.row != t.col for t in ts), f"trial {trial}")
            self.assertTrue(mat_equal(multiply_transvections(ts, n, field), Q, field), f"trial {trial}")

    def test_sln_multiply_back_float(self):
        field = FloatField(128)
        rng = np.random.RandomState(6)
        for trial in range(10):
            Q = self.random_unimodular(rng, 3, field)
            ts = sln_to_transvections(Q, field)
            self.assertTrue(mat_equal(multiply_transvections(ts, 3, field), Q, field), f"trial {trial}")

    def test_sl2_polyring_multiply_back(self):
        field = ExactField()
        ring = PolyRing(field)
        rng = np.random.RandomState(8)
        for trial in range(20):
            seeds = []
            for k in range(2 + trial % 3):
                amount = UniPoly([field.coerce(draw_gaussian(rng, 3, 1)) for _ in range(3)], field)
                seeds.append(Transvection(k % 2, 1 - k % 2, ring.coerce(amount)))
            M = multiply_transvections(seeds, 2, ring)
            ts = sl2_polyring_to_transvections(M, ring)
            self.assertTrue(mat_equal(multiply_transvections(ts, 2, ring), M, ring), f"trial {trial}")


if __name__ == '__main__':
    unittest.main()
