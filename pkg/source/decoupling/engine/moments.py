"""Exact moments, the L2-projection onto G, and the identities behind the tangent bounds.

Every check returns a residual or a pair of sides; tolerances are applied by
the caller.
"""
import csv
import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .conf import MASS_TOL
from .decoupled import complete_decouple
from .exceptions import ValidationError
from .outcome_space import DiscreteLaw

EXACT = 'exact'
ESTIMATED = 'estimated'


@dataclass(frozen=True)
class MomentSummary:
    mean: float
    second_moment: float
    variance: float
    kind: str = EXACT
    std_error: Optional[float] = None
    second_moment_std_error: Optional[float] = None
    n_samples: Optional[int] = None
    seed: Optional[int] = None

    def __post_init__(self):
        if self.kind not in (EXACT, ESTIMATED):
            raise ValidationError(f'Unknown moment kind {self.kind!r}.', code='invalid_kind')
        if self.second_moment < -MASS_TOL or self.variance < -MASS_TOL:
            raise ValidationError('Second moment and variance must be nonnegative.', code='negative_moment')
        if self.kind == EXACT:
            scale = max(1.0, abs(self.second_moment))
            if abs(self.variance - (self.second_moment - self.mean ** 2)) > MASS_TOL * scale:
                raise ValidationError(
                    'Variance is inconsistent with the first two moments.', code='inconsistent_moments'
                )

    @classmethod
    def from_moments(cls, mean, second_moment):
        return cls(mean, second_moment, max(second_moment - mean * mean, 0.0))

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        return cls(**data)


def exact_moments(law, probs=None, functional=None):
    """Moments of a discrete law, or of ``functional`` applied to weighted atoms."""
    if isinstance(law, DiscreteLaw):
        values, probs = law.values, law.probs
    else:
        if probs is None:
            raise ValidationError('Weighted atoms need their probabilities.', code='missing_probabilities')
        values, probs = np.asarray(law, dtype=float), np.asarray(probs, dtype=float)
    if functional is not None:
        values = np.asarray(functional(values), dtype=float)
    if values.size == 0:
        raise ValidationError('Cannot take moments of an empty atom list.', code='empty_law')
    mean = math.fsum(probs * values)
    second = math.fsum(probs * values * values)
    variance = math.fsum(probs * (values - mean) ** 2)
    return MomentSummary(mean, second, variance)


def row_sums(values):
    return np.asarray(values).sum(axis=1)


@dataclass(frozen=True, eq=False)
class ProjectionTable:
    """``E(e_1 + ... + e_n | G)`` on every d-path."""

    path_values: np.ndarray
    path_probs: np.ndarray
    values: np.ndarray

    def expectation(self):
        return math.fsum(self.path_probs * self.values)

    def rows(self):
        for path, prob, value in zip(self.path_values, self.path_probs, self.values):
            yield tuple(path), float(prob), float(value)


def project_on_G(space):
    return ProjectionTable(space.path_values, space.path_probs, space.cond_means.sum(axis=1))


def projection_to_csv(table, stream):
    writer = csv.writer(stream)
    n = table.path_values.shape[1]
    writer.writerow([f'd_{i}' for i in range(1, n + 1)] + ['prob', 'projection'])
    for path, prob, value in table.rows():
        writer.writerow([f'{v:.17g}' for v in path] + [f'{prob:.17g}', f'{value:.17g}'])


def _expect(prob, values):
    return math.fsum(prob * values)


def check_decomposition(space):
    """Residual of ``E(S')^2 = E[S' - E(S'|G)]^2 + E[E(S'|G)]^2``."""
    e_sum = row_sums(space.e)
    projection = space.projections.sum(axis=1)
    lhs = _expect(space.prob, e_sum ** 2)
    rhs = _expect(space.prob, (e_sum - projection) ** 2) + _expect(space.prob, projection ** 2)
    return abs(lhs - rhs)


def check_distance_equality(space):
    """``E[S - E(S'|G)]^2`` and ``E[S' - E(S'|G)]^2``; equal for tangent pairs."""
    projection = space.projections.sum(axis=1)
    lhs = _expect(space.prob, (row_sums(space.d) - projection) ** 2)
    rhs = _expect(space.prob, (row_sums(space.e) - projection) ** 2)
    return lhs, rhs


def _largest_off_diagonal(deviations, prob):
    covariance = (deviations * prob[:, None]).T @ deviations
    upper = np.triu_indices(covariance.shape[0], k=1)
    return float(np.abs(covariance[upper]).max()) if upper[0].size else 0.0


def max_cross_term(space):
    """Largest ``|E[(x_i - E(e_i|G))(x_j - E(e_j|G))]|`` over ``i < j`` and ``x`` in ``{d, e}``."""
    projections = space.projections
    return max(
        _largest_off_diagonal(space.d - projections, space.prob),
        _largest_off_diagonal(space.e - projections, space.prob),
    )


def space_moments(space):
    """Exact moments of the d-sum, the tangent e-sum and the completely decoupled z-sum."""
    mean, second = complete_decouple(space.source).sum_moments()
    return {
        'd_sum': exact_moments(space.d, space.prob, row_sums),
        'e_sum': exact_moments(space.e, space.prob, row_sums),
        'z_sum': MomentSummary.from_moments(mean, second),
    }
