from django.core.management.base import BaseCommand, CommandError

from decoupling.engine.exceptions import EnumerationCapExceeded, ValidationError
from decoupling.engine.report import FORMATS, JSON, render
from decoupling.models import ExperimentRecord

CHECK_FAILED = 1
INPUT_ERROR = 2
RESOURCE_CAP = 3


def describe_error(exc):
    if hasattr(exc, 'error_dict'):
        return '; '.join(
            f'{field}: {message}' if field != '__all__' else message
            for field, errors in exc.message_dict.items() for message in errors
        )
    return '; '.join(exc.messages)


class ExperimentCommand(BaseCommand):
    """Shared flags, error translation, rendering and recording for the experiment commands.

    Subclasses implement ``build_report`` and list the options echoed into the
    report in ``echo_options``.
    """
    default_format = JSON
    echo_options = ()

    def add_arguments(self, parser):
        self.add_command_arguments(parser)
        parser.add_argument('--out', help='Write the report to this file instead of stdout.')
        parser.add_argument('--format', choices=FORMATS, default=self.default_format, dest='fmt')
        parser.add_argument('--tol', type=float, help='Tolerance for every check (default: DECOUPLE_TOL).')
        parser.add_argument('--cap', type=int, help='Enumeration cap (default: DECOUPLE_CAP).')
        parser.add_argument('--record', action='store_true', help='Store the report in the database.')
        parser.add_argument('--timestamps', action='store_true', help='Stamp the report with the run time.')

    def add_command_arguments(self, parser):
        pass

    def build_report(self, **options):
        raise NotImplementedError

    def handle(self, *args, **options):
        for key in ('tol', 'cap'):
            if options.get(key) is not None and options[key] <= 0:
                raise CommandError(f'--{key} must be positive', returncode=INPUT_ERROR)
        try:
            report = self.build_report(**options)
        except ValidationError as exc:
            raise CommandError(describe_error(exc), returncode=INPUT_ERROR)
        except EnumerationCapExceeded as exc:
            raise CommandError(str(exc), returncode=RESOURCE_CAP)
        except OSError as exc:
            raise CommandError(str(exc), returncode=INPUT_ERROR)

        report.model_description.setdefault('command', self.command_name())
        report.model_description.setdefault(
            'options', {key: options.get(key) for key in self.echo_options + ('tol', 'cap')}
        )
        if options['timestamps']:
            report.stamp('finished')
        self.write(render(report, options['fmt']), options.get('out'))
        if options['record']:
            ExperimentRecord.objects.create(
                experiment_id=report.experiment_id,
                command=self.command_name(),
                all_hold=report.all_hold(),
                payload=render(report, JSON).decode('utf-8'),
            )
        failures = report.failures()
        if failures:
            raise CommandError(f'Failed checks: {", ".join(failures)}', returncode=CHECK_FAILED)

    def command_name(self):
        return self.__module__.rsplit('.', 1)[-1]

    def write(self, payload, out=None):
        if out:
            try:
                with open(out, 'wb') as stream:
                    stream.write(payload)
            except OSError as exc:
                raise CommandError(str(exc), returncode=INPUT_ERROR)
        else:
            self.stdout.write(payload.decode('utf-8'), ending='')
