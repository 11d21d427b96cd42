import math

import numpy as np
from django.test import SimpleTestCase

from decoupling.engine.bounds import Inequality
from decoupling.engine.decoupled import tangent_decouple
from decoupling.engine.exceptions import ValidationError
from decoupling.engine.moments import space_moments
from decoupling.engine.montecarlo import EstimatorConfig, estimate_moments, stream_generator
from decoupling.engine.outcome_space import DiscreteLaw, sum_law
from decoupling.engine.stopped_sums import (
    FirstHit, FirstPassage, FixedTime, IndependentCoin, StoppedSumSpec, alternate_series_form, check_tail,
    decoupled_stopped_moments, estimate_tail_vector, exact_stopped_moments, make_rule, rule_tail,
    sample_stopped_sum, stopped_sum_sampler, stopped_sum_tree, stopped_sum_upper_bound, tau_moments,
    wald_second_moment,
)


def first_success_spec():
    return StoppedSumSpec.from_support(DiscreteLaw.bernoulli(0.5), 2, FirstHit(1.0))


def fixed_spec(law, m):
    return StoppedSumSpec.from_support(law, m, FixedTime(m))


class TauMomentsTest(SimpleTestCase):
    def test_fixed_time(self):
        self.assertEqual(tau_moments(StoppedSumSpec(0.0, 1.0, (1.0,) * 4)), (4.0, 16.0))

    def test_two_point_time(self):
        self.assertEqual(tau_moments(StoppedSumSpec(0.0, 1.0, (1.0, 0.5))), (1.5, 2.5))

    def test_single_step(self):
        self.assertEqual(tau_moments(StoppedSumSpec(0.0, 1.0, (1.0,))), (1.0, 1.0))


class DecoupledMomentsTest(SimpleTestCase):
    def test_bernoulli_increments(self):
        mean, second = decoupled_stopped_moments(StoppedSumSpec(0.5, 0.25, (1.0, 0.5)))
        self.assertAlmostEqual(mean, 0.75)
        self.assertAlmostEqual(second, 1.0)

    def test_centered_increments(self):
        self.assertEqual(decoupled_stopped_moments(StoppedSumSpec(0.0, 2.0, (1.0, 0.5, 0.25))), (0.0, 3.5))

    def test_fixed_time_matches_an_iid_sum(self):
        mu, sigma2, m = 0.7, 0.3, 5
        mean, second = decoupled_stopped_moments(StoppedSumSpec(mu, sigma2, (1.0,) * m))
        self.assertAlmostEqual(mean, mu * m)
        self.assertAlmostEqual(second, m * sigma2 + m * m * mu * mu)

    def test_alternate_series_form(self):
        self.assertAlmostEqual(alternate_series_form(StoppedSumSpec(2.0, 0.0, (1.0, 1.0))), 20.0)

    def test_wald(self):
        self.assertEqual(wald_second_moment(1.0, 2.0), 2.0)
        self.assertAlmostEqual(wald_second_moment(0.25, 1.5), 0.375)


class SpecValidationTest(SimpleTestCase):
    def test_tail_must_not_increase(self):
        with self.assertRaises(ValidationError) as caught:
            StoppedSumSpec(0.0, 1.0, (0.5, 1.0))
        self.assertEqual(caught.exception.code, 'non_monotone_tail')

    def test_tail_is_a_probability(self):
        with self.assertRaises(ValidationError) as caught:
            StoppedSumSpec(0.0, 1.0, (1.2,))
        self.assertEqual(caught.exception.code, 'non_monotone_tail')

    def test_negative_variance(self):
        with self.assertRaises(ValidationError) as caught:
            StoppedSumSpec(0.0, -1.0, (1.0,))
        self.assertEqual(caught.exception.code, 'negative_variance')

    def test_support_must_match_the_moments(self):
        with self.assertRaises(ValidationError) as caught:
            StoppedSumSpec(0.3, 0.25, (1.0,), DiscreteLaw.bernoulli(0.5), FixedTime(1))
        self.assertEqual(caught.exception.code, 'support_mismatch')

    def test_sampling_needs_a_rule(self):
        with self.assertRaises(ValidationError) as caught:
            sample_stopped_sum(StoppedSumSpec(0.0, 1.0, (1.0,)), stream_generator(0, 0))
        self.assertEqual(caught.exception.code, 'missing_rule')

    def test_unknown_rule(self):
        with self.assertRaises(ValidationError) as caught:
            make_rule('last_exit')
        self.assertEqual(caught.exception.code, 'unknown_rule')


class StoppingRuleTest(SimpleTestCase):
    def test_first_success_tail(self):
        self.assertEqual(first_success_spec().tail, (1.0, 0.5))

    def test_independent_coin_tail(self):
        tail = rule_tail(DiscreteLaw.rademacher(), IndependentCoin(0.4), 4)
        np.testing.assert_allclose(tail, [1.0, 0.6, 0.36, 0.216])

    def test_first_passage_tail(self):
        tail = rule_tail(DiscreteLaw.rademacher(), FirstPassage(1.0), 3)
        np.testing.assert_allclose(tail, [1.0, 0.5, 0.5])

    def test_declared_tail_is_checked(self):
        spec = StoppedSumSpec.from_support(DiscreteLaw.bernoulli(0.5), 2, FirstHit(1.0), tail=(1.0, 0.25))
        self.assertAlmostEqual(check_tail(spec), 0.25)

    def test_rule_config(self):
        self.assertEqual(make_rule('independent_coin', p=0.4).to_config(), {'name': 'independent_coin', 'p': 0.4})


class ExactStoppedSumTest(SimpleTestCase):
    def test_first_success(self):
        exact = exact_stopped_moments(first_success_spec())
        self.assertAlmostEqual(exact.mean, 0.75)
        self.assertAlmostEqual(exact.second_moment, 0.75)
        self.assertAlmostEqual(exact.capped_mass, 0.25)

    def test_wald_identity(self):
        spec = StoppedSumSpec.from_support(DiscreteLaw.rademacher(), 5, IndependentCoin(0.3))
        exact = exact_stopped_moments(spec)
        self.assertAlmostEqual(exact.second_moment, wald_second_moment(1.0, tau_moments(spec)[0]))


class StoppedSumBoundTest(SimpleTestCase):
    def test_first_success(self):
        report = stopped_sum_upper_bound(first_success_spec(), tol=1e-9)
        self.assertEqual(report.inequality_id, Inequality.STOPPED_SUM_UPPER.value)
        self.assertAlmostEqual(report.rhs, 1.4375)
        self.assertAlmostEqual(report.lhs, 0.75)
        self.assertTrue(report.holds)
        self.assertEqual(report.params['lhs_source'], 'exact')

    def test_centered_fixed_time_has_a_factor_two_gap(self):
        report = stopped_sum_upper_bound(fixed_spec(DiscreteLaw.rademacher(), 3), tol=1e-9)
        self.assertAlmostEqual(report.rhs, 6.0)
        self.assertAlmostEqual(report.lhs, 3.0)

    def test_degenerate_increments_are_sharp(self):
        report = stopped_sum_upper_bound(fixed_spec(DiscreteLaw.point_mass(2.0), 4), tol=1e-9)
        self.assertAlmostEqual(report.lhs, 64.0)
        self.assertAlmostEqual(report.rhs, 64.0)
        self.assertTrue(report.holds)

    def test_tail_only_spec_has_no_verdict(self):
        report = stopped_sum_upper_bound(StoppedSumSpec(0.5, 0.25, (1.0, 0.5)))
        self.assertIsNone(report.lhs)
        self.assertIsNone(report.holds)
        self.assertEqual(report.params['lhs_source'], 'none')

    def test_monte_carlo_tolerance_is_three_standard_errors(self):
        report = stopped_sum_upper_bound(first_success_spec(), lhs=1.5, std_error=0.1, tol=1e-9)
        self.assertEqual(report.tol, 0.30000000000000004)
        self.assertTrue(report.holds)


class StoppedSumSamplingTest(SimpleTestCase):
    def test_degenerate_draws(self):
        draw = sample_stopped_sum(fixed_spec(DiscreteLaw.point_mass(2.0), 4), stream_generator(3, 0))
        self.assertEqual(draw.tau, 4)
        self.assertEqual(draw.value, 8.0)
        self.assertFalse(draw.capped)

    def test_same_seed_same_draws(self):
        spec = first_success_spec()
        first = [sample_stopped_sum(spec, stream_generator(7, 0)) for _ in range(3)]
        second = [sample_stopped_sum(spec, stream_generator(7, 0)) for _ in range(3)]
        self.assertEqual(first, second)

    def test_second_moment_estimate(self):
        cfg = EstimatorConfig(n_samples=1_000_000, seed=31, n_streams=4)
        estimate = estimate_moments(stopped_sum_sampler(first_success_spec()), cfg)
        self.assertLessEqual(abs(estimate.second_moment - 0.75), 3 * estimate.second_moment_std_error)

    def test_independent_coin_against_wald(self):
        spec = StoppedSumSpec.from_support(DiscreteLaw.rademacher(), 6, IndependentCoin(0.5))
        cfg = EstimatorConfig(n_samples=200_000, seed=11, n_streams=2)
        estimate = estimate_moments(stopped_sum_sampler(spec), cfg)
        wald = wald_second_moment(1.0, tau_moments(spec)[0])
        self.assertLessEqual(abs(estimate.second_moment - wald), 3 * estimate.second_moment_std_error)

    def test_empirical_tail(self):
        spec = StoppedSumSpec.from_support(DiscreteLaw.rademacher(), 4, IndependentCoin(0.4))
        p_hat, std_errors = estimate_tail_vector(spec, EstimatorConfig(n_samples=100_000, seed=5))
        self.assertEqual(p_hat[0], 1.0)
        for j in range(1, 4):
            self.assertLessEqual(abs(p_hat[j] - spec.tail[j]), 3 * std_errors[j])


class StoppedSumTreeTest(SimpleTestCase):
    def test_tree_carries_the_stopped_sum(self):
        tree = stopped_sum_tree(first_success_spec())
        law = dict(sum_law(tree).atoms)
        self.assertAlmostEqual(law[1.0], 0.75)
        self.assertAlmostEqual(law[0.0], 0.25)

    def test_tangent_copy_is_the_decoupled_sum(self):
        spec = first_success_spec()
        moments = space_moments(tangent_decouple(stopped_sum_tree(spec)))['e_sum']
        mean, second = decoupled_stopped_moments(spec)
        self.assertAlmostEqual(moments.mean, mean)
        self.assertAlmostEqual(moments.second_moment, second)

    def test_randomized_start(self):
        class CoinAtZero(IndependentCoin):
            def stop_probabilities(self, prefixes):
                return np.full(len(prefixes), self.p)

        spec = StoppedSumSpec.from_support(DiscreteLaw.rademacher(), 2, CoinAtZero(0.5), tail=(0.5, 0.25))
        with self.assertRaises(ValidationError) as caught:
            stopped_sum_tree(spec)
        self.assertEqual(caught.exception.code, 'randomized_start')

    def test_stop_at_zero(self):
        tree = stopped_sum_tree(StoppedSumSpec.from_support(DiscreteLaw.rademacher(), 3, FixedTime(0), tail=(0.0,) * 3))
        self.assertEqual(sum_law(tree).atoms, ((0.0, 1.0),))
        self.assertTrue(math.isclose(space_moments(tangent_decouple(tree))['e_sum'].second_moment, 0.0))
