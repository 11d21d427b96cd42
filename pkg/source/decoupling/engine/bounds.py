"""Decoupling inequalities evaluated as reports, and the tail-bound calculators."""
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from .conf import tolerance
from .decoupled import complete_decouple
from .exceptions import ValidationError
from .moments import row_sums
from .outcome_space import enumerate_paths

# Values within this distance of a threshold count as equal to it.
TIE_TOL = 1e-12

LE = 'le'
GE = 'ge'


class Inequality(str, Enum):
    COMPLETE_LOWER = 'complete_lower'
    SECOND_MOMENT_UPPER = 'second_moment_upper'
    VARIANCE_UPPER = 'variance_upper'
    REFINED_UPPER = 'refined_upper'
    CHEBYSHEV = 'chebyshev'
    PALEY_ZYGMUND = 'paley_zygmund'
    STOPPED_SUM_UPPER = 'stopped_sum_upper'


@dataclass(frozen=True)
class BoundReport:
    """One inequality evaluation.

    ``direction`` is ``le`` when the inequality reads ``lhs <= rhs`` (slack is
    ``rhs - lhs``) and ``ge`` when it reads ``lhs >= rhs`` (slack is
    ``lhs - rhs``). A report without ``lhs`` has no slack and no verdict.
    """

    inequality_id: str
    lhs: Optional[float]
    rhs: float
    slack: Optional[float]
    holds: Optional[bool]
    tol: float
    direction: str = LE
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, 'inequality_id', Inequality(self.inequality_id).value)
        if self.direction not in (LE, GE):
            raise ValidationError(f'Unknown direction {self.direction!r}.', code='invalid_direction')
        if self.lhs is None:
            if self.slack is not None or self.holds is not None:
                raise ValidationError('A report without lhs has no verdict.', code='inconsistent_report')
            return
        if self.slack is None or not math.isfinite(self.slack):
            raise ValidationError('Slack must be finite.', code='non_finite')
        if self.holds != (self.slack >= -self.tol):
            raise ValidationError('holds must equal slack >= -tol.', code='inconsistent_report')

    @classmethod
    def evaluate(cls, inequality_id, lhs, rhs, tol=None, direction=LE, **params):
        tol = tolerance(tol)
        if lhs is None:
            return cls(inequality_id, None, float(rhs), None, None, tol, direction, params)
        lhs, rhs = float(lhs), float(rhs)
        slack = rhs - lhs if direction == LE else lhs - rhs
        return cls(inequality_id, lhs, rhs, slack, slack >= -tol, tol, direction, params)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        return cls(**data)


def _expect(prob, values):
    return math.fsum(prob * values)


def complete_lower_bound(tree, tol=None, cap=None):
    """``(1/2) E(sum z)^2 <= E(sum d)^2`` for nonnegative summands."""
    if not tree.is_nonnegative():
        raise ValidationError(
            'The complete decoupling lower bound requires nonnegative summands; '
            f'the tree has the value {tree.min_value()}.',
            code='negative_value',
        )
    _, z_second = complete_decouple(tree).sum_moments()
    atoms = enumerate_paths(tree, cap)
    probs = np.array([atom.prob for atom in atoms])
    sums = np.array([math.fsum(atom.values) for atom in atoms])
    return BoundReport.evaluate(Inequality.COMPLETE_LOWER, 0.5 * z_second, _expect(probs, sums ** 2), tol)


def second_moment_upper(space, tol=None):
    """``E(sum d)^2 <= 2 E(sum e)^2``."""
    lhs = _expect(space.prob, row_sums(space.d) ** 2)
    rhs = 2.0 * _expect(space.prob, row_sums(space.e) ** 2)
    return BoundReport.evaluate(Inequality.SECOND_MOMENT_UPPER, lhs, rhs, tol)


def _centered_second_moment(values, prob):
    step_means = np.array([_expect(prob, column) for column in values.T])
    return _expect(prob, row_sums(values - step_means) ** 2)


def variance_upper(space, tol=None):
    """``Var(sum d) <= 2 Var(sum e)``, each step centered by its mean."""
    lhs = _centered_second_moment(space.d, space.prob)
    rhs = 2.0 * _centered_second_moment(space.e, space.prob)
    return BoundReport.evaluate(Inequality.VARIANCE_UPPER, lhs, rhs, tol)


def refined_upper(space, tol=None):
    """``E(sum d)^2 <= 2 E(sum e)^2 - [E(sum e)]^2``."""
    e_sum = row_sums(space.e)
    lhs = _expect(space.prob, row_sums(space.d) ** 2)
    rhs = 2.0 * _expect(space.prob, e_sum ** 2) - _expect(space.prob, e_sum) ** 2
    return BoundReport.evaluate(Inequality.REFINED_UPPER, lhs, rhs, tol)


def tangent_reports(space, tol=None):
    return [second_moment_upper(space, tol), variance_upper(space, tol), refined_upper(space, tol)]


def chebyshev_bound(var_decoupled, t):
    """Upper bound on ``P(|S - ES| > t)`` from the decoupled variance."""
    if not t > 0:
        raise ValidationError(f't must be positive, got {t}.', code='nonpositive_t')
    if var_decoupled < 0:
        raise ValidationError(
            f'The decoupled variance must be nonnegative, got {var_decoupled}.', code='negative_variance'
        )
    return min(1.0, 2.0 * var_decoupled / (t * t))


def paley_zygmund_bound(mean_S, second_moment_decoupled, theta):
    """Lower bound on ``P(S > theta ES)`` for nonnegative ``S``."""
    if not 0.0 < theta < 1.0:
        raise ValidationError(f'theta must lie in (0, 1), got {theta}.', code='theta_out_of_range')
    if not mean_S > 0:
        raise ValidationError(f'The mean of S must be positive, got {mean_S}.', code='nonpositive_mean')
    denominator = 2.0 * second_moment_decoupled - mean_S ** 2
    if not denominator > 0:
        raise ValidationError(
            '2 E(S\')^2 - (E S)^2 must be positive; the moments cannot come from a tangent pair.',
            code='nonpositive_denominator',
        )
    return min(1.0, max(0.0, (1.0 - theta) ** 2 * mean_S ** 2 / denominator))


def deviation_probability(values, probs, center, t):
    """``P(|X - center| > t)`` with ties at the threshold counted as not exceeding."""
    values = np.asarray(values, dtype=float)
    exceed = np.abs(values - center) > t + TIE_TOL * max(1.0, abs(t))
    return math.fsum(np.asarray(probs)[exceed])


def exceedance_probability(values, probs, level):
    """``P(X > level)`` with ties at the threshold counted as not exceeding."""
    values = np.asarray(values, dtype=float)
    exceed = values > level + TIE_TOL * max(1.0, abs(level))
    return math.fsum(np.asarray(probs)[exceed])


def chebyshev_report(space, t, tol=None):
    d_sum, e_sum = row_sums(space.d), row_sums(space.e)
    mean = _expect(space.prob, d_sum)
    e_mean = _expect(space.prob, e_sum)
    var_decoupled = max(_expect(space.prob, (e_sum - e_mean) ** 2), 0.0)
    lhs = deviation_probability(d_sum, space.prob, mean, t)
    return BoundReport.evaluate(
        Inequality.CHEBYSHEV, lhs, chebyshev_bound(var_decoupled, t), tol, LE, t=t
    )


def has_nonnegative_sum(space):
    live = space.prob > 0.0
    return bool(np.all(row_sums(space.d)[live] >= -TIE_TOL))


def paley_zygmund_report(space, theta, tol=None):
    if not has_nonnegative_sum(space):
        raise ValidationError(
            'The Paley-Zygmund bound requires a nonnegative sum.', code='negative_value'
        )
    d_sum = row_sums(space.d)
    mean = _expect(space.prob, d_sum)
    e_second = _expect(space.prob, row_sums(space.e) ** 2)
    lhs = exceedance_probability(d_sum, space.prob, theta * mean)
    return BoundReport.evaluate(
        Inequality.PALEY_ZYGMUND, lhs, paley_zygmund_bound(mean, e_second, theta), tol, GE, theta=theta
    )
