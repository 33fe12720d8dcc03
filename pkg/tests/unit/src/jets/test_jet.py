import unittest
from fractions import Fraction

import numpy as np

from src.jets.jet import (
    JetMap,
    identity_jet,
    jet_compose,
    jet_difference,
    jet_inverse,
    jet_jacobian_det,
    jet_rebase,
    monomials,
    multinomial,
    tp_exp,
    tp_linear,
)
from src.jets.scalar import ExactField, FloatField


def jet(ring, n, order, comps, anchor=None, value=None):
    """Jet from {component: {exponent: coefficient}} with plain numbers."""
    anchor = anchor or [0] * n
    value = value or anchor
    tables = [{e: ring.coerce(c) for e, c in comps.get(i, {}).items()} for i in range(n)]
    return JetMap.build(n, anchor, value, order, tables, ring)


def random_jet(rng, ring, n, order):
    comps = {}
    for i in range(n):
        table = {}
        for d in range(1, order + 1):
            for e in monomials(n, d):
                table[e] = Fraction(int(rng.randint(-3, 4)), int(rng.randint(1, 4)))
        comps[i] = table
    # keep the linear part invertible
    for i in range(n):
        comps[i][tuple(1 if j == i else 0 for j in range(n))] = Fraction(2)
    return jet(ring, n, order, comps)


class TestMonomials(unittest.TestCase):
    def test_graded_counts(self):
        self.assertEqual(len(monomials(2, 3)), 4)
        self.assertEqual(len(monomials(3, 2)), 6)
        self.assertEqual(multinomial((2, 1)), 3)


class TestJetCompose(unittest.TestCase):
    def setUp(self):
        self.ring = ExactField()

    def test_identity_is_neutral(self):
        b = random_jet(np.random.RandomState(0), self.ring, 2, 3)
        self.assertEqual(jet_difference(jet_compose(identity_jet(2, [0, 0], 3, self.ring), b, 3), b), 0.0)

    def test_quadratic_example(self):
        a = jet(self.ring, 2, 2, {0: {(1, 0): 1}, 1: {(0, 1): 1, (2, 0): 1}})
        b = jet(self.ring, 2, 2, {0: {(1, 0): 1, (0, 2): 1}, 1: {(0, 1): 1}})
        expected = jet(self.ring, 2, 2, {0: {(1, 0): 1, (0, 2): 1}, 1: {(0, 1): 1, (2, 0): 1}})
        self.assertEqual(jet_difference(jet_compose(a, b, 2), expected), 0.0)

    def test_linear_parts_multiply(self):
        a = jet(self.ring, 2, 1, {0: {(1, 0): 1, (0, 1): 2}, 1: {(0, 1): 1}})
        b = jet(self.ring, 2, 1, {0: {(1, 0): 3}, 1: {(1, 0): 1, (0, 1): 1}})
        c = jet_compose(a, b, 1)
        self.assertEqual(c.linear_matrix(), [[5, 2], [1, 1]])

    def test_associativity(self):
        rng = np.random.RandomState(11)
        a, b, c = (random_jet(rng, self.ring, 2, 3) for _ in range(3))
        left = jet_compose(a, jet_compose(b, c, 3), 3)
        right = jet_compose(jet_compose(a, b, 3), c, 3)
        self.assertEqual(jet_difference(left, right), 0.0)

    def test_anchor_mismatch(self):
        a = identity_jet(2, [1, 0], 2, self.ring)
        b = identity_jet(2, [0, 0], 2, self.ring)
        with self.assertRaises(ValueError):
            jet_compose(a, b, 2)

    def test_truncation_monotone(self):
        rng = np.random.RandomState(5)
        a, b = random_jet(rng, self.ring, 2, 4), random_jet(rng, self.ring, 2, 4)
        high = jet_compose(a, b, 4).truncate(2)
        low = jet_compose(a.truncate(2), b.truncate(2), 2)
        self.assertEqual(jet_difference(high, low), 0.0)


class TestJetInverse(unittest.TestCase):
    def setUp(self):
        self.ring = ExactField()

    def test_quadratic_example(self):
        a = jet(self.ring, 2, 2, {0: {(1, 0): 1}, 1: {(0, 1): 1, (2, 0): 1}})
        expected = jet(self.ring, 2, 2, {0: {(1, 0): 1}, 1: {(0, 1): 1, (2, 0): -1}})
        self.assertEqual(jet_difference(jet_inverse(a, 2), expected), 0.0)

    def test_inverse_law_both_sides(self):
        a = random_jet(np.random.RandomState(2), self.ring, 3, 3)
        inv = jet_inverse(a, 3)
        ident = identity_jet(3, [0, 0, 0], 3, self.ring)
        self.assertEqual(jet_difference(jet_compose(a, inv, 3), ident), 0.0)
        self.assertEqual(jet_difference(jet_compose(inv, a, 3), ident), 0.0)

    def test_degenerate(self):
        a = jet(self.ring, 2, 2, {0: {(1, 0): 1}, 1: {(1, 0): 1}})
        with self.assertRaises(ValueError):
            jet_inverse(a, 2)


class TestJacobianDet(unittest.TestCase):
    def test_identity(self):
        ring = ExactField()
        det = jet_jacobian_det(identity_jet(2, [0, 0], 3, ring), 2)
        self.assertTrue(det.is_constant_one())

    def test_exponential_example(self):
        ring = ExactField()
        # (z1, z2 * e^{z1}) through order 3
        a = jet(ring, 2, 3, {0: {(1, 0): 1}, 1: {(0, 1): 1, (1, 1): 1, (2, 1): Fraction(1, 2)}})
        det = jet_jacobian_det(a, 2)
        self.assertEqual(det.coefficient((0, 0)), 1)
        self.assertEqual(det.coefficient((1, 0)), 1)
        self.assertEqual(det.coefficient((2, 0)), Fraction(1, 2))
        self.assertEqual(det.coefficient((0, 1)), 0)

    def test_order_limit(self):
        ring = ExactField()
        with self.assertRaises(ValueError):
            jet_jacobian_det(identity_jet(2, [0, 0], 2, ring), 2)


class TestRebase(unittest.TestCase):
    def test_rebase_example(self):
        ring = ExactField()
        a = jet(ring, 2, 2, {0: {(1, 0): 1}, 1: {(0, 1): 1, (2, 0): 1}})
        moved = jet_rebase(a, [1, 0], [1, 0])
        t, s = ring.coerce(Fraction(1, 3)), ring.coerce(Fraction(-2, 5))
        image = moved.evaluate([1 + t, s])
        self.assertEqual(image, (1 + t, s + t * t))
        back = jet_rebase(moved, [0, 0], [0, 0])
        self.assertEqual(jet_difference(back, a), 0.0)


class TestTruncatedExp(unittest.TestCase):
    def test_exact_constant_rejected(self):
        ring = ExactField()
        p = tp_linear([ring.one(), ring.zero()], ring, constant=ring.one())
        with self.assertRaises(ValueError):
            tp_exp(p, 2, 2, ring)

    def test_float_constant_factor(self):
        ring = FloatField(128)
        p = tp_linear([ring.one(), ring.zero()], ring, constant=ring.one())
        out = tp_exp(p, 2, 2, ring)
        e = ring.exp(ring.one())
        self.assertTrue(ring.close(out[(0, 0)], e))
        self.assertTrue(ring.close(out[(2, 0)], e / 2))


class TestSerialization(unittest.TestCase):
    def test_round_trip_float(self):
        ring = FloatField(128)
        a = random_jet(np.random.RandomState(9), ring, 2, 2)
        again = JetMap.from_dict(a.to_dict(), ring)
        self.assertLess(jet_difference(a, again), 1e-30)

    def test_constant_entry_rejected(self):
        ring = ExactField()
        data = identity_jet(2, [0, 0], 1, ring).to_dict()
        data["coeffs"].append({"component": 0, "exponents": [0, 0], "re": "1", "im": "0"})
        with self.assertRaises(ValueError):
            JetMap.from_dict(data, ring)


if __name__ == '__main__':
    unittest.main()
