import json

from decoupling.engine.configs import law_from_config
from decoupling.engine.exceptions import ValidationError
from decoupling.engine.experiments import tree_experiment
from decoupling.engine.gallery import GALLERY, comonotone_second_moments, gallery
from decoupling.engine.montecarlo import (
    EstimatorConfig, complete_sum_sampler, decoupled_sum_sampler, estimate_moments, sum_sampler, zscore,
)
from decoupling.engine.report import Residual
from decoupling.management.base import ExperimentCommand

RADEMACHER = [[-1.0, 0.5], [1.0, 0.5]]

DEFAULT_PARAMS = {
    'comonotone_bernoulli': {'n': 2, 'p': 0.5},
    'unit_vector': {'n': 4},
    'remark_equality': {},
    'quadratic_form': {'a': [[0.0, 1.0], [0.0, 0.0]], 'law': RADEMACHER},
    'u_statistic': {'n': 3, 'kernel': 'half_squared_difference', 'law': RADEMACHER},
}

# Standardized Monte Carlo discrepancies above this are reported as failures.
MC_Z_LIMIT = 4.0

SAMPLERS = {
    'd_sum': sum_sampler,
    'e_sum': decoupled_sum_sampler,
    'z_sum': complete_sum_sampler,
}


def _json_option(raw, name):
    try:
        return json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ValidationError(f'--{name} is not valid JSON: {exc}', code='malformed_option')


class Command(ExperimentCommand):
    help = 'Run every decoupling check on a named gallery model.'
    echo_options = ('name', 'params', 'mc', 'seed', 'streams')

    def add_command_arguments(self, parser):
        parser.add_argument('name', help=f'One of: {", ".join(sorted(GALLERY))}.')
        parser.add_argument('--n', type=int, help='Number of steps.')
        parser.add_argument('--p', type=float, help='Success probability (comonotone_bernoulli).')
        parser.add_argument('--kernel', help='Kernel name (u_statistic).')
        parser.add_argument('--law', help='Step law as JSON, e.g. [[-1, 0.5], [1, 0.5]].')
        parser.add_argument('--a', help='Coefficient matrix as JSON (quadratic_form).')
        parser.add_argument('--params', help='Any further parameters as a JSON object.')
        parser.add_argument('--mc', type=int, default=0, help='Cross-check the exact moments with this many draws.')
        parser.add_argument('--seed', type=int)
        parser.add_argument('--streams', type=int)

    def model_params(self, options):
        name = options['name']
        params = dict(DEFAULT_PARAMS.get(name, {}))
        if options.get('params'):
            extra = _json_option(options['params'], 'params')
            if not isinstance(extra, dict):
                raise ValidationError('--params must be a JSON object.', code='malformed_option')
            params.update(extra)
        for key in ('n', 'p', 'kernel'):
            if options.get(key) is not None:
                params[key] = options[key]
        for key in ('law', 'a'):
            if options.get(key):
                params[key] = _json_option(options[key], key)
        return params

    def build_report(self, **options):
        name = options['name']
        if name not in GALLERY:
            gallery(name)
        params = self.model_params(options)
        built = dict(params)
        if 'law' in built:
            built['law'] = law_from_config(built['law'])
        tree = gallery(name, **built)

        description = {'kind': 'gallery', 'name': name, 'params': params}
        report = tree_experiment(tree, f'gallery-{name}', description, options['tol'], options['cap'])
        if name == 'comonotone_bernoulli':
            closed = comonotone_second_moments(tree.n, params['p'])
            report.quantities.update({f'closed_form_{key}': value for key, value in closed.items()})
        if options['mc']:
            self.cross_check(tree, report, options)
        return report

    def cross_check(self, tree, report, options):
        cfg = EstimatorConfig.from_settings(n_samples=options['mc'], seed=options['seed'], n_streams=options['streams'])
        report.seeds = {'seed': cfg.seed, 'n_streams': cfg.n_streams, 'n_samples': cfg.n_samples}
        for label, make_sampler in SAMPLERS.items():
            estimate = estimate_moments(make_sampler(tree), cfg)
            report.moments[f'{label}_mc'] = estimate
            worst = max(abs(z) for z in zscore(estimate, report.moments[label]).values())
            report.add(Residual.evaluate(f'mc_zscore_{label}', worst, MC_Z_LIMIT))
