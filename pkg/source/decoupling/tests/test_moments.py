import io

import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings as hypothesis_settings, strategies as st

from decoupling.engine.decoupled import tangent_decouple
from decoupling.engine.exceptions import ValidationError
from decoupling.engine.gallery import GALLERY, comonotone_bernoulli, gallery, remark_equality, unit_vector
from decoupling.engine.moments import (
    ESTIMATED, MomentSummary, check_decomposition, check_distance_equality, exact_moments, max_cross_term,
    project_on_G, projection_to_csv, space_moments,
)
from decoupling.engine.outcome_space import DiscreteLaw, product_tree, random_tree

GALLERY_MODELS = {
    'comonotone_bernoulli': {'n': 3, 'p': 0.3},
    'unit_vector': {'n': 4},
    'remark_equality': {},
    'quadratic_form': {'a': [[0, 1, -2], [0, 0, 0.5], [0, 0, 0]], 'law': DiscreteLaw.rademacher()},
    'u_statistic': {'n': 3, 'kernel': 'abs_difference', 'law': DiscreteLaw.bernoulli(0.4)},
}


def gallery_spaces():
    for name in sorted(GALLERY):
        yield name, tangent_decouple(gallery(name, **GALLERY_MODELS[name]))


class MomentSummaryTest(SimpleTestCase):
    def test_point_mass(self):
        summary = exact_moments(DiscreteLaw.point_mass(1.0))
        self.assertEqual((summary.mean, summary.second_moment, summary.variance), (1.0, 1.0, 0.0))

    def test_unit_vector_independent_sum(self):
        summary = space_moments(tangent_decouple(unit_vector(5)))['z_sum']
        self.assertAlmostEqual(summary.second_moment, 2 - 1 / 5)
        self.assertAlmostEqual(summary.variance, 1 - 1 / 5)

    def test_comonotone_dependent_sum(self):
        summary = space_moments(tangent_decouple(comonotone_bernoulli(4, 0.2)))['d_sum']
        self.assertAlmostEqual(summary.second_moment, 16 * 0.2)

    def test_inconsistent_exact_summary(self):
        with self.assertRaises(ValidationError) as caught:
            MomentSummary(1.0, 2.0, 0.5)
        self.assertEqual(caught.exception.code, 'inconsistent_moments')

    def test_estimated_summary_is_not_checked_for_consistency(self):
        summary = MomentSummary(1.0, 2.0, 1.01, kind=ESTIMATED, std_error=0.01, n_samples=100)
        self.assertEqual(MomentSummary.from_dict(summary.to_dict()), summary)

    def test_empty_atoms(self):
        with self.assertRaises(ValidationError):
            exact_moments(np.empty(0), np.empty(0))


class ProjectionTest(SimpleTestCase):
    def test_remark_equality_projection_is_the_first_step(self):
        table = project_on_G(tangent_decouple(remark_equality()))
        np.testing.assert_allclose(table.values, table.path_values[:, 0])

    def test_independent_steps_project_to_the_mean(self):
        laws = [DiscreteLaw.bernoulli(0.3), DiscreteLaw.from_pairs([(2.0, 0.5), (4.0, 0.5)])]
        table = project_on_G(tangent_decouple(product_tree(laws)))
        np.testing.assert_allclose(table.values, 3.3)

    def test_one_step_projection_is_constant(self):
        table = project_on_G(tangent_decouple(product_tree([DiscreteLaw.bernoulli(0.6)])))
        np.testing.assert_allclose(table.values, 0.6)
        self.assertAlmostEqual(table.expectation(), 0.6)

    def test_csv_export(self):
        stream = io.StringIO()
        projection_to_csv(project_on_G(tangent_decouple(remark_equality())), stream)
        self.assertEqual(stream.getvalue().splitlines()[0], 'd_1,d_2,prob,projection')


class IdentityTest(SimpleTestCase):
    def test_gallery_decomposition_and_cross_terms(self):
        for name, space in gallery_spaces():
            with self.subTest(model=name):
                self.assertLessEqual(check_decomposition(space), 1e-9)
                self.assertLessEqual(max_cross_term(space), 1e-9)
                lhs, rhs = check_distance_equality(space)
                self.assertAlmostEqual(lhs, rhs, delta=1e-9)

    def test_remark_equality_distances(self):
        lhs, rhs = check_distance_equality(tangent_decouple(remark_equality()))
        self.assertAlmostEqual(lhs, 1.0)
        self.assertAlmostEqual(rhs, 1.0)

    def test_independence_distances_equal_the_variance(self):
        lhs, rhs = check_distance_equality(tangent_decouple(product_tree([DiscreteLaw.rademacher()] * 2)))
        self.assertAlmostEqual(lhs, 2.0)
        self.assertAlmostEqual(rhs, 2.0)

    def test_deterministic_tree(self):
        space = tangent_decouple(product_tree([DiscreteLaw.point_mass(1.5)] * 2))
        self.assertEqual(check_decomposition(space), 0.0)
        self.assertEqual(check_distance_equality(space), (0.0, 0.0))

    def test_one_step_has_no_cross_terms(self):
        self.assertEqual(max_cross_term(tangent_decouple(product_tree([DiscreteLaw.rademacher()]))), 0.0)

    @hypothesis_settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2 ** 31), n=st.integers(1, 4), branching=st.integers(1, 3))
    def test_random_trees(self, seed, n, branching):
        space = tangent_decouple(random_tree(n, branching, seed=seed))
        self.assertLessEqual(check_decomposition(space), 1e-9)
        self.assertLessEqual(max_cross_term(space), 1e-9)
        lhs, rhs = check_distance_equality(space)
        self.assertLessEqual(abs(lhs - rhs), 1e-9)
