import unittest

import numpy as np

from src.jets.linalg import (
    LUFactorization,
    bareiss_determinant,
    identity_matrix,
    mat_det,
    mat_equal,
    mat_inverse,
    mat_mul,
    mat_vec,
    matrix_from_json,
    matrix_to_json,
    null_space,
)
from src.jets.scalar import ExactField, FloatField
from src.jets.unipoly import PolyRing


def _random_exact(rng, n, field):
    return [[field.coerce(int(rng.randint(-4, 5))) for _ in range(n)] for _ in range(n)]


class TestExactLinearAlgebra(unittest.TestCase):
    def setUp(self):
        self.field = ExactField()
        self.rng = np.random.RandomState(3)

    def test_bareiss_matches_cofactor_values(self):
        f = self.field
        a = [[f.coerce(v) for v in row] for row in [[2, 1, 0], [1, 3, 1], [0, 1, 4]]]
        self.assertEqual(bareiss_determinant(a, f), 18)

    def test_bareiss_with_zero_pivot(self):
        f = self.field
        a = [[f.coerce(v) for v in row] for row in [[0, 1], [1, 0]]]
        self.assertEqual(mat_det(a, f), -1)

    def test_inverse_is_exact(self):
        f = self.field
        for _ in range(10):
            a = _random_exact(self.rng, 3, f)
            if mat_det(a, f) == 0:
                continue
            self.assertTrue(mat_equal(mat_mul(a, mat_inverse(a, f), f), identity_matrix(3, f), f))

    def test_singular_inverse_raises(self):
        f = self.field
        a = [[f.coerce(v) for v in row] for row in [[1, 2], [2, 4]]]
        with self.assertRaises(ValueError):
            mat_inverse(a, f)

    def test_null_space(self):
        f = self.field
        rows = [[f.coerce(v) for v in row] for row in [[1, 1, 0], [0, 1, 1]]]
        basis = null_space(rows, 3, f)
        self.assertEqual(len(basis), 1)
        self.assertTrue(all(v == 0 for v in mat_vec(rows, basis[0], f)))

    def test_json(self):
        f = self.field
        a = _random_exact(self.rng, 2, f)
        self.assertTrue(mat_equal(matrix_from_json(matrix_to_json(a, f), f), a, f))


class TestFloatLinearAlgebra(unittest.TestCase):
    def test_lu_solve(self):
        f = FloatField(128)
        a = [[f.coerce(v) for v in row] for row in [[1e-30, 1], [1, 1]]]
        lu = LUFactorization(a, f)
        x = lu.solve([f.coerce(1), f.coerce(2)])
        b = mat_vec(a, x, f)
        self.assertTrue(f.close(b[0], f.coerce(1)))
        self.assertTrue(f.close(b[1], f.coerce(2)))


class TestParameterRing(unittest.TestCase):
    def test_adjugate_inverse(self):
        ring = PolyRing(ExactField())
        x = ring.variable()
        one = ring.one()
        a = [[one, x], [ring.zero(), one]]
        inv = mat_inverse(a, ring)
        self.assertTrue(mat_equal(mat_mul(a, inv, ring), identity_matrix(2, ring), ring))
        self.assertEqual(inv[0][1], -x)

    def test_non_unit_determinant(self):
        ring = PolyRing(ExactField())
        x = ring.variable()
        with self.assertRaises(ValueError):
            mat_inverse([[x, ring.zero()], [ring.zero(), ring.one()]], ring)


if __name__ == '__main__':
    unittest.main()
