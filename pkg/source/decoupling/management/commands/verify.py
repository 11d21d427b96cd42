import logging

from decoupling.engine.configs import build_tree, load_description
from decoupling.engine.exceptions import ValidationError
from decoupling.engine.experiments import random_suite, tree_experiment, tree_results, worst_results
from decoupling.engine.report import ExperimentReport
from decoupling.forms import RandomModelsForm
from decoupling.management.base import ExperimentCommand

logger = logging.getLogger(__name__)


class Command(ExperimentCommand):
    help = 'Check the decoupling identities and bounds on model files and random trees.'
    echo_options = ('model_files', 'random', 'n', 'branching', 'seed', 'low', 'high', 'nonnegative')

    def add_command_arguments(self, parser):
        parser.add_argument('model_files', nargs='*', help='JSON model descriptions.')
        parser.add_argument('--random', type=int, default=0, help='Also check this many random trees.')
        parser.add_argument('--n', type=int, default=4, help='Depth of the random trees.')
        parser.add_argument('--branching', type=int, default=3, help='Largest branching of the random trees.')
        parser.add_argument('--seed', type=int, default=0, help='Seed of the first random tree.')
        parser.add_argument('--low', type=float, default=-2.0)
        parser.add_argument('--high', type=float, default=2.0)
        parser.add_argument('--nonnegative', action='store_true')

    def random_settings(self, options):
        form = RandomModelsForm(data={
            'count': options['random'],
            'n': options['n'],
            'branching': options['branching'],
            'seed': options['seed'],
            'low': options['low'],
            'high': options['high'],
            'nonnegative': options['nonnegative'],
        })
        if not form.is_valid():
            raise ValidationError(form.errors.as_data())
        return form.cleaned_data

    def build_report(self, **options):
        files = options['model_files']
        if not files and not options['random']:
            raise ValidationError('Give model files, --random, or both.', code='nothing_to_verify')
        tol, cap = options['tol'], options['cap']

        if len(files) == 1 and not options['random']:
            description = load_description(files[0])
            return tree_experiment(build_tree(description), f'verify-{files[0]}', description, tol, cap)

        labelled = []
        for path in files:
            results, _ = tree_results(build_tree(load_description(path)), tol, cap)
            labelled += [(path, result) for result in results]
        if options['random']:
            data = self.random_settings(options)
            suite = random_suite(
                data['count'], data['n'], data['branching'], data['seed'],
                (data['low'], data['high']), data['nonnegative'], tol, cap,
            )
            labelled += [(result.params['origin'], result) for result in suite]
            logger.info('Checked %d random trees', data['count'])

        report = ExperimentReport('verify', {'files': list(files)}, worst_results(labelled))
        report.quantities['models_checked'] = len(files) + options['random']
        return report
