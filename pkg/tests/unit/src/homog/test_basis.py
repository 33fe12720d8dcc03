import unittest

import numpy as np

from src.jets.scalar import ExactField, FloatField
from src.jets.unipoly import PolyRing
from src.homog.basis import (
    HomogField,
    decompose_homog,
    divergence,
    draw_gaussian,
    field_dimension,
    overshear_count,
    overshear_generator,
    reconstruct,
    sample_shear_basis,
    shear_generator,
)
from src.shears.primitives import apply_form


def random_field(n, r, ring, seed):
    rng = np.random.RandomState(seed)
    vec = [ring.coerce(draw_gaussian(rng, 4, 3)) for _ in range(field_dimension(n, r))]
    return HomogField.from_vector(n, r, vec, ring)


class TestDimensions(unittest.TestCase):
    def test_counts(self):
        self.assertEqual(field_dimension(2, 2), 6)
        self.assertEqual(overshear_count(2, 2), 2)
        self.assertEqual(field_dimension(3, 2), 18)
        self.assertEqual(overshear_count(3, 2), 3)

    def test_degree_mismatch_rejected(self):
        field = ExactField()
        with self.assertRaises(ValueError):
            HomogField(2, 2, ({(1, 0): field.one()}, {}), field)


class TestGenerators(unittest.TestCase):
    def setUp(self):
        self.field = ExactField()
        f = self.field
        self.form = (f.coerce(2), f.coerce(1))
        self.kernel = (f.coerce(1), f.coerce(-2))

    def test_shear_generator_is_divergence_free(self):
        gen = shear_generator(self.form, self.kernel, 3, self.field)
        self.assertTrue(all(self.field.is_zero(c) for c in divergence(gen).values()))

    def test_overshear_generator_divergence(self):
        gen = overshear_generator(self.form, self.kernel, 2, self.field)
        div = divergence(gen)
        # (form z) * |w|^2 since form(w) == 0
        self.assertEqual(div.get((1, 0)), 10)
        self.assertEqual(div.get((0, 1)), 5)


class TestSampleShearBasis(unittest.TestCase):
    def setUp(self):
        self.field = ExactField()

    def test_shape_and_kernel_directions(self):
        basis = sample_shear_basis(2, 2, self.field, rng_seed=0)
        self.assertEqual(basis.size, field_dimension(2, 2))
        self.assertEqual(len(basis.overshear_pairs), overshear_count(2, 2))
        for form, direction in basis.shear_pairs + basis.overshear_pairs:
            self.assertEqual(apply_form(form, direction, self.field), 0)
            norm = sum(abs(c) ** 2 for c in form) ** 0.5
            self.assertGreaterEqual(abs(form[0]), 0.9 * norm)

    def test_avoid_points(self):
        avoid = [(1, 2), (3, -1)]
        basis = sample_shear_basis(2, 3, self.field, avoid=avoid, rng_seed=5)
        for form in basis.forms():
            for a in avoid:
                self.assertNotEqual(apply_form(form, [self.field.coerce(x) for x in a], self.field), 0)

    def test_deterministic(self):
        a = sample_shear_basis(3, 2, self.field, rng_seed=11)
        b = sample_shear_basis(3, 2, self.field, rng_seed=11)
        self.assertEqual(a.to_dict(), b.to_dict())

    def test_invalid_arguments(self):
        with self.assertRaises(ValueError):
            sample_shear_basis(2, 0, self.field)
        with self.assertRaises(ValueError):
            sample_shear_basis(2, 2, self.field, avoid=[(0, 0)])

    def test_impossible_margin(self):
        with self.assertRaises(RuntimeError):
            sample_shear_basis(2, 2, self.field, axis_margin=1.5, max_rounds=2)

    def test_float_basis_has_condition(self):
        basis = sample_shear_basis(2, 3, FloatField(128), rng_seed=2)
        self.assertIsNotNone(basis.condition)
        self.assertTrue(np.isfinite(basis.condition))


class TestDecompose(unittest.TestCase):
    def test_exact_round_trip(self):
        field = ExactField()
        basis = sample_shear_basis(2, 3, field, rng_seed=1)
        F = random_field(2, 3, field, seed=4)
        c, d = decompose_homog(F, basis)
        self.assertEqual(len(c), len(basis.shear_pairs))
        self.assertEqual(len(d), len(basis.overshear_pairs))
        self.assertEqual(reconstruct(c, d, basis, field).to_vector(), F.to_vector())

    def test_divergence_free_needs_no_overshears(self):
        field = ExactField()
        basis = sample_shear_basis(2, 2, field, rng_seed=3)
        one = field.one()
        # (z2^2, z1^2)
        F = HomogField(2, 2, ({(0, 2): one}, {(2, 0): one}), field)
        _, d = decompose_homog(F, basis)
        self.assertTrue(all(x == 0 for x in d))

    def test_float_round_trip(self):
        field = FloatField(128)
        basis = sample_shear_basis(3, 2, field, rng_seed=0)
        F = random_field(3, 2, field, seed=9)
        c, d = decompose_homog(F, basis)
        rebuilt = reconstruct(c, d, basis, field)
        for a, b in zip(rebuilt.to_vector(), F.to_vector()):
            self.assertTrue(field.close(a, b))

    def test_parametric_coefficients(self):
        field = ExactField()
        ring = PolyRing(field)
        x = ring.variable()
        basis = sample_shear_basis(2, 2, ring, rng_seed=0)
        vec = [x, ring.one(), ring.zero(), x * x, ring.from_int(2), x + 1]
        F = HomogField.from_vector(2, 2, vec, ring)
        c, d = decompose_homog(F, basis)
        self.assertLessEqual(max(p.degree() for p in c + d), 2)
        rebuilt = reconstruct(c, d, basis, ring)
        for a, b in zip(rebuilt.to_vector(), F.to_vector()):
            self.assertTrue(ring.close(a, b))

    def test_seeded_round_trips(self):
        field = ExactField()
        for seed in range(16):
            n, r = 2 + seed % 2, 2 + (seed // 2) % 2
            basis = sample_shear_basis(n, r, field, rng_seed=seed)
            F = random_field(n, r, field, seed=100 + seed)
            c, d = decompose_homog(F, basis)
            self.assertEqual(reconstruct(c, d, basis, field).to_vector(), F.to_vector(), f"seed {seed}")

    def test_seeded_shear_fields_have_no_overshear_part(self):
        field = ExactField()
        for seed in range(8):
            basis = sample_shear_basis(2, 2 + seed % 3, field, rng_seed=seed)
            rng = np.random.RandomState(seed)
            c = [field.coerce(draw_gaussian(rng, 4, 3)) for _ in basis.shear_pairs]
            zeros = [field.zero()] * len(basis.overshear_pairs)
            c_back, d_back = decompose_homog(reconstruct(c, zeros, basis, field), basis)
            self.assertEqual(list(c_back), c, f"seed {seed}")
            self.assertTrue(all(x == 0 for x in d_back), f"seed {seed}")

    def test_mismatched_degree(self):
        field = ExactField()
        basis = sample_shear_basis(2, 2, field, rng_seed=0)
        with self.assertRaises(ValueError):
            decompose_homog(random_field(2, 3, field, seed=0), basis)


if __name__ == '__main__':
    unittest.main()
