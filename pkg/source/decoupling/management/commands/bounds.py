from decoupling.engine.bounds import chebyshev_bound, paley_zygmund_bound
from decoupling.engine.exceptions import ValidationError
from decoupling.engine.report import TEXT, ExperimentReport
from decoupling.forms import BoundsForm
from decoupling.management.base import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Tail bounds from decoupled moments: Chebyshev above, Paley-Zygmund below.'
    default_format = TEXT
    echo_options = ('mean', 'var_decoupled', 'm2_decoupled', 't', 'theta')

    def add_command_arguments(self, parser):
        parser.add_argument('--mean', type=float, help='E S.')
        parser.add_argument('--var-decoupled', type=float, help="Var S'.")
        parser.add_argument('--m2-decoupled', type=float, help="E S'^2.")
        parser.add_argument('--t', type=float, help='Deviation for P(|S - ES| > t).')
        parser.add_argument('--theta', type=float, help='Fraction of the mean for P(S > theta ES).')

    def build_report(self, **options):
        form = BoundsForm(data={key: options[key] for key in self.echo_options if options[key] is not None})
        if not form.is_valid():
            raise ValidationError(form.errors.as_data())
        data = form.cleaned_data
        report = ExperimentReport('bounds', {})
        if data.get('t') is not None:
            report.quantities['chebyshev_upper'] = chebyshev_bound(data['var_decoupled'], data['t'])
        if data.get('theta') is not None:
            report.quantities['paley_zygmund_lower'] = paley_zygmund_bound(
                data['mean'], data['m2_decoupled'], data['theta']
            )
        return report
