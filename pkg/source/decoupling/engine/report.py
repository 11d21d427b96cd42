"""Experiment reports and their JSON, CSV and terminal renderings."""
import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

from django.utils import timezone

from .bounds import BoundReport
from .conf import tolerance
from .exceptions import ValidationError
from .moments import MomentSummary

JSON = 'json'
CSV = 'csv'
TEXT = 'text_table'
FORMATS = (JSON, CSV, TEXT)

SIGNIFICANT_DIGITS = 12
CSV_HEADER = ['kind', 'name', 'lhs', 'rhs', 'slack', 'holds', 'tol']
NON_FINITE = {'inf': math.inf, '-inf': -math.inf, 'nan': math.nan}


@dataclass(frozen=True)
class Residual:
    """A named quantity that must not exceed ``tol``."""

    name: str
    value: float
    tol: float
    passed: bool
    params: dict = field(default_factory=dict)

    @classmethod
    def evaluate(cls, name, value, tol=None, **params):
        tol = tolerance(tol)
        value = float(value)
        return cls(name, value, tol, bool(value <= tol), params)

    def to_dict(self):
        return asdict(self)


@dataclass
class ExperimentReport:
    experiment_id: str
    model_description: dict
    results: list = field(default_factory=list)
    moments: dict = field(default_factory=dict)
    quantities: dict = field(default_factory=dict)
    seeds: dict = field(default_factory=dict)
    timestamps: dict = field(default_factory=dict)

    def add(self, *results):
        self.results.extend(results)

    def stamp(self, label):
        self.timestamps[label] = timezone.now().isoformat()

    def failures(self):
        failed = []
        for result in self.results:
            if isinstance(result, Residual) and not result.passed:
                failed.append(result.name)
            elif isinstance(result, BoundReport) and result.holds is False:
                failed.append(result.inequality_id)
        return failed

    def all_hold(self):
        return not self.failures()

    def to_dict(self):
        results = []
        for result in self.results:
            kind = 'bound' if isinstance(result, BoundReport) else 'residual'
            results.append({'type': kind, **result.to_dict()})
        return {
            'experiment_id': self.experiment_id,
            'model_description': self.model_description,
            'results': results,
            'moments': {name: summary.to_dict() for name, summary in self.moments.items()},
            'quantities': self.quantities,
            'seeds': self.seeds,
            'timestamps': self.timestamps,
        }

    @classmethod
    def from_dict(cls, data):
        results = []
        for item in data.get('results', []):
            item = dict(item)
            kind = item.pop('type')
            results.append(BoundReport.from_dict(item) if kind == 'bound' else Residual(**item))
        return cls(
            experiment_id=data['experiment_id'],
            model_description=data.get('model_description', {}),
            results=results,
            moments={name: MomentSummary.from_dict(m) for name, m in data.get('moments', {}).items()},
            quantities=data.get('quantities', {}),
            seeds=data.get('seeds', {}),
            timestamps=data.get('timestamps', {}),
        )


def _canonical(value):
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, dict):
        return {str(key): _canonical(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_canonical(item) for item in value]
    if hasattr(value, 'item'):
        value = value.item()
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            return 'nan' if math.isnan(value) else ('inf' if value > 0 else '-inf')
        return float(f'{value:.{SIGNIFICANT_DIGITS}g}')
    return str(value)


def _restore(value):
    if isinstance(value, str) and value in NON_FINITE:
        return NON_FINITE[value]
    if isinstance(value, dict):
        return {key: _restore(item) for key, item in value.items()}
    if isinstance(value, list):
        return [_restore(item) for item in value]
    return value


def _number(value):
    if value is None:
        return ''
    if isinstance(value, bool):
        return str(value).lower()
    return f'{value:.{SIGNIFICANT_DIGITS}g}'


def _csv_rows(report):
    for result in report.results:
        if isinstance(result, BoundReport):
            yield ['bound', result.inequality_id, result.lhs, result.rhs, result.slack, result.holds, result.tol]
        else:
            yield ['residual', result.name, result.value, None, result.tol - result.value, result.passed, result.tol]


def _render_csv(report):
    stream = io.StringIO()
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(CSV_HEADER)
    for row in _csv_rows(report):
        writer.writerow(row[:2] + [_number(value) for value in row[2:]])
    return stream.getvalue()


def _render_text(report):
    lines = [f'Experiment {report.experiment_id}', '']
    widths = (22, 16, 16, 16, 6)
    header = ('check', 'lhs', 'rhs', 'slack', 'holds')
    lines.append('  '.join(title.ljust(width) for title, width in zip(header, widths)))
    lines.append('  '.join('-' * width for width in widths))
    for row in _csv_rows(report):
        cells = [row[1]] + [_number(value) for value in row[2:6]]
        lines.append('  '.join(str(cell).ljust(width) for cell, width in zip(cells, widths)))
    if report.moments:
        lines += ['', '  '.join(title.ljust(16) for title in ('sum', 'mean', 'second moment', 'variance'))]
        for name, summary in sorted(report.moments.items()):
            cells = (name, summary.mean, summary.second_moment, summary.variance)
            lines.append('  '.join((cell if isinstance(cell, str) else _number(cell)).ljust(16) for cell in cells))
    if report.quantities:
        lines.append('')
        for name, value in sorted(report.quantities.items()):
            shown = _number(value) if isinstance(value, (int, float)) else value
            lines.append(f'{name}: {shown}')
    verdict = 'all checks hold' if report.all_hold() else 'FAILED: ' + ', '.join(report.failures())
    lines += ['', verdict]
    return '\n'.join(lines) + '\n'


def render(report, fmt=JSON):
    if fmt == JSON:
        text = json.dumps(_canonical(report.to_dict()), sort_keys=True, indent=2) + '\n'
    elif fmt == CSV:
        text = _render_csv(report)
    elif fmt == TEXT:
        text = _render_text(report)
    else:
        raise ValidationError(f'Unknown format {fmt!r}; expected one of {FORMATS}.', code='unknown_format')
    return text.encode('utf-8')


def parse(data):
    """Inverse of the JSON rendering."""
    if isinstance(data, bytes):
        data = data.decode('utf-8')
    return ExperimentReport.from_dict(_restore(json.loads(data)))
