import json
import os
import tempfile

from django.conf import settings
from django.test import SimpleTestCase

from decoupling.engine.configs import (
    build_stopped_spec, build_tree, law_from_config, load_description, node_from_config,
)
from decoupling.engine.exceptions import ValidationError
from decoupling.engine.outcome_space import enumerate_paths, sum_law
from decoupling.engine.stopped_sums import FirstHit
from decoupling.forms import BoundsForm, ModelDescriptionForm, RandomModelsForm, StoppedSumSpecForm

FIXTURES = os.path.join(settings.BASE_DIR, 'fixtures')


def fixture(name):
    return load_description(os.path.join(FIXTURES, name))


def error_codes(form):
    return {error.code for errors in form.errors.as_data().values() for error in errors}


class FormTest(SimpleTestCase):
    def test_explicit_tree_needs_a_root(self):
        form = ModelDescriptionForm(data={'kind': 'explicit_tree', 'n': 2})
        self.assertFalse(form.is_valid())
        self.assertIn('explicit_tree_incomplete', error_codes(form))

    def test_product_steps_must_match_n(self):
        form = ModelDescriptionForm(data={'kind': 'product', 'n': 3, 'steps': [[[0, 1]], [[1, 1]]]})
        self.assertFalse(form.is_valid())
        self.assertIn('depth_mismatch', error_codes(form))

    def test_unknown_kind(self):
        form = ModelDescriptionForm(data={'kind': 'markov_chain'})
        self.assertFalse(form.is_valid())
        self.assertIn('kind', form.errors)

    def test_stopped_spec_needs_moments(self):
        form = StoppedSumSpecForm(data={'tail': [1, 0.5]})
        self.assertFalse(form.is_valid())
        self.assertIn('increments_incomplete', error_codes(form))

    def test_stopped_spec_needs_a_tail_or_a_rule(self):
        form = StoppedSumSpecForm(data={'mu': 0, 'sigma2': 1})
        self.assertFalse(form.is_valid())
        self.assertIn('missing_tail', error_codes(form))

    def test_random_models_range(self):
        form = RandomModelsForm(data={
            'count': 3, 'n': 2, 'branching': 2, 'seed': 0, 'low': -2, 'high': -1, 'nonnegative': True,
        })
        self.assertFalse(form.is_valid())
        self.assertIn('empty_range', error_codes(form))

    def test_random_models_depth(self):
        form = RandomModelsForm(data={'count': 3, 'n': 9, 'branching': 2, 'seed': 0, 'low': -2, 'high': 2})
        self.assertFalse(form.is_valid())
        self.assertIn('n', form.errors)

    def test_bounds(self):
        self.assertTrue(BoundsForm(data={'var_decoupled': 0.5, 't': 1}).is_valid())
        for data, code in (
            ({}, 'bounds_empty'),
            ({'t': 1}, 'chebyshev_incomplete'),
            ({'var_decoupled': 0.5, 't': -1}, 'nonpositive_t'),
            ({'mean': 1, 'theta': 0.5}, 'paley_zygmund_incomplete'),
            ({'mean': 1, 'm2_decoupled': 1.5, 'theta': 1.5}, 'theta_out_of_range'),
        ):
            with self.subTest(data=data):
                form = BoundsForm(data=data)
                self.assertFalse(form.is_valid())
                self.assertIn(code, error_codes(form))


class BuildTreeTest(SimpleTestCase):
    def test_fixtures(self):
        expected = {
            'remark_equality.json': {-2.0: 0.5, 2.0: 0.5},
            'unit_vector_4.json': {1.0: 1.0},
            'comonotone.json': {0.0: 0.5, 2.0: 0.5},
            'independent_rademacher.json': {-2.0: 0.25, 0.0: 0.5, 2.0: 0.25},
        }
        for name, law in expected.items():
            with self.subTest(fixture=name):
                atoms = dict(sum_law(build_tree(fixture(name))).atoms)
                self.assertEqual(set(atoms), set(law))
                for value, prob in law.items():
                    self.assertAlmostEqual(atoms[value], prob)

    def test_negative_probability_fixture(self):
        with self.assertRaises(ValidationError) as caught:
            build_tree(fixture('negative_probability.json'))
        self.assertEqual(caught.exception.code, 'negative_probability')

    def test_form_errors_keep_their_codes(self):
        with self.assertRaises(ValidationError) as caught:
            build_tree({'kind': 'gallery'})
        codes = {error.code for errors in caught.exception.error_dict.values() for error in errors}
        self.assertIn('gallery_incomplete', codes)

    def test_product_of_named_laws(self):
        tree = build_tree({'kind': 'product', 'steps': [{'name': 'bernoulli', 'p': 0.2}, [[3, 1]]]})
        self.assertEqual(tree.n, 2)
        self.assertEqual(len(enumerate_paths(tree)), 2)

    def test_gallery_with_law(self):
        tree = build_tree({'kind': 'gallery', 'name': 'remark_equality', 'params': {'law': [[0, 0.5], [3, 0.5]]}})
        self.assertEqual(dict(sum_law(tree).atoms), {0.0: 0.5, 6.0: 0.5})

    def test_gallery_depth_is_checked(self):
        with self.assertRaises(ValidationError) as caught:
            build_tree({'kind': 'gallery', 'name': 'unit_vector', 'n': 3, 'params': {'n': 4}})
        self.assertEqual(caught.exception.code, 'depth_mismatch')

    def test_missing_child_is_a_leaf(self):
        self.assertTrue(node_from_config({'branches': [{'value': 1, 'prob': 1}]}).branches[0].child.is_leaf)

    def test_malformed_law(self):
        with self.assertRaises(ValidationError) as caught:
            law_from_config([[1, 2, 3]])
        self.assertEqual(caught.exception.code, 'malformed_law')


class LoadDescriptionTest(SimpleTestCase):
    def test_invalid_json(self):
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, 'broken.json')
            with open(path, 'w') as stream:
                stream.write('{"kind": ')
            with self.assertRaises(ValidationError) as caught:
                load_description(path)
        self.assertEqual(caught.exception.code, 'malformed_file')

    def test_top_level_must_be_an_object(self):
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, 'list.json')
            with open(path, 'w') as stream:
                json.dump([1, 2], stream)
            with self.assertRaises(ValidationError):
                load_description(path)


class BuildStoppedSpecTest(SimpleTestCase):
    def test_first_success_fixture(self):
        spec = build_stopped_spec(fixture('ber_first_success.json'))
        self.assertEqual(spec.tail, (1.0, 0.5))
        self.assertIsInstance(spec.stopping_rule, FirstHit)
        self.assertAlmostEqual(spec.mu, 0.5)

    def test_tail_only_fixture(self):
        spec = build_stopped_spec(fixture('tail_only.json'))
        self.assertIsNone(spec.increment_support)
        self.assertEqual(spec.horizon, 2)

    def test_moments_must_match_the_increments(self):
        with self.assertRaises(ValidationError) as caught:
            build_stopped_spec({'increments': {'name': 'rademacher'}, 'mu': 1, 'tail': [1]})
        self.assertEqual(caught.exception.code, 'support_mismatch')

    def test_rule_needs_increments(self):
        with self.assertRaises(ValidationError) as caught:
            build_stopped_spec({'mu': 0, 'sigma2': 1, 'horizon': 2, 'rule': {'name': 'fixed', 'm': 2}})
        self.assertEqual(caught.exception.code, 'missing_support')

    def test_non_monotone_tail(self):
        with self.assertRaises(ValidationError) as caught:
            build_stopped_spec({'mu': 0, 'sigma2': 1, 'tail': [0.5, 1]})
        self.assertEqual(caught.exception.code, 'non_monotone_tail')
