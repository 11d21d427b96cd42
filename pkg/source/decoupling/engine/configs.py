"""Model and stopped-sum description files (JSON) turned into engine objects.

The field-level schema is enforced by the forms in ``decoupling.forms``;
this module builds the objects and checks what the forms cannot see.
"""
import json

from ..forms import ModelDescriptionForm, StoppedSumSpecForm
from .exceptions import ValidationError
from .gallery import gallery
from .outcome_space import LEAF, Branch, DiscreteLaw, Node, OutcomeTree, product_tree
from .stopped_sums import StoppedSumSpec, make_rule

INFINITE_SUPPORT = {'normal', 'gaussian', 'poisson', 'exponential', 'geometric', 'uniform'}


def _form_errors(form):
    return ValidationError(form.errors.as_data())


def law_from_config(data):
    """A law given as ``[[value, prob], ...]``, ``{"atoms": [...]}`` or a named law."""
    if isinstance(data, dict) and 'atoms' in data:
        data = data['atoms']
    if isinstance(data, list):
        try:
            pairs = [(float(value), float(prob)) for value, prob in data]
        except (TypeError, ValueError):
            raise ValidationError('A law is a list of [value, prob] pairs.', code='malformed_law')
        return DiscreteLaw(tuple(pairs))
    if isinstance(data, dict) and 'name' in data:
        name = data['name']
        try:
            if name == 'bernoulli':
                return DiscreteLaw.bernoulli(float(data.get('p', 0.5)))
            if name == 'rademacher':
                return DiscreteLaw.rademacher()
            if name == 'point_mass':
                return DiscreteLaw.point_mass(float(data['value']))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f'Bad parameters for the law {name!r}: {exc!r}', code='malformed_law')
        if name in INFINITE_SUPPORT:
            raise ValidationError(f'The law {name!r} does not have finite support.', code='infinite_support')
        raise ValidationError(f'Unknown law {name!r}.', code='unknown_law')
    raise ValidationError('Cannot read a law from this value.', code='malformed_law')


def node_from_config(data):
    if data is None:
        return LEAF
    if not isinstance(data, dict):
        raise ValidationError('A node is an object with a branches list.', code='malformed_tree')
    if not isinstance(data.get('branches', []), list):
        raise ValidationError('branches must be a list.', code='malformed_tree')
    branches = []
    for branch in data.get('branches', []):
        try:
            value, prob = float(branch['value']), float(branch['prob'])
        except (KeyError, TypeError, ValueError):
            raise ValidationError('Every branch needs a numeric value and prob.', code='malformed_tree')
        branches.append(Branch(value, prob, node_from_config(branch.get('child'))))
    return Node(tuple(branches)) if branches else LEAF


def _gallery_params(params):
    params = dict(params or {})
    if 'law' in params:
        params['law'] = law_from_config(params['law'])
    return params


def build_tree(description):
    """Validate a model description and build its tree."""
    form = ModelDescriptionForm(data=dict(description))
    if not form.is_valid():
        raise _form_errors(form)
    data = form.cleaned_data
    kind = data['kind']
    if kind == 'explicit_tree':
        tree = OutcomeTree(data['n'], node_from_config(data['root']))
    elif kind == 'product':
        laws = data['steps'] if data.get('steps') is not None else [data['step']] * data['n']
        tree = product_tree(law_from_config(law) for law in laws)
    else:
        tree = gallery(data['name'], **_gallery_params(data.get('params')))
    if data.get('n') is not None and tree.n != data['n']:
        raise ValidationError(f'The model has {tree.n} steps, not {data["n"]}.', code='depth_mismatch')
    return tree


def load_description(path):
    try:
        with open(path, encoding='utf-8') as stream:
            data = json.load(stream)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ValidationError(f'{path} is not valid UTF-8 JSON: {exc}', code='malformed_file')
    if not isinstance(data, dict):
        raise ValidationError(f'{path} must hold a JSON object.', code='malformed_file')
    return data


def build_stopped_spec(description, cap=None):
    """Validate a stopped-sum description and build its spec."""
    form = StoppedSumSpecForm(data=dict(description))
    if not form.is_valid():
        raise _form_errors(form)
    data = form.cleaned_data
    rule = None
    if data.get('rule') is not None:
        rule_params = dict(data['rule'])
        rule = make_rule(rule_params.pop('name'), **rule_params)
    if data.get('increments') is None:
        if rule is not None:
            raise ValidationError('A stopping rule needs the increment law.', code='missing_support')
        return StoppedSumSpec(data['mu'], data['sigma2'], tuple(data['tail']))
    support = law_from_config(data['increments'])
    for key, value in (('mu', support.mean()), ('sigma2', support.variance())):
        if data.get(key) is not None and abs(data[key] - value) > 1e-9:
            raise ValidationError(f'{key} disagrees with the increment law.', code='support_mismatch')
    return StoppedSumSpec.from_support(support, data['horizon'], rule, data.get('tail'), cap)
