"""Randomly stopped sums of i.i.d. increments.

``S_tau = sum_i X_i 1{tau >= i}``. Because ``1{tau >= i}`` is known before
``X_i`` is drawn, replacing each ``X_i`` by an independent copy decouples the
sum, and the decoupled sum has the law of ``S_tau'`` with ``tau'`` an
independent copy of ``tau``. Everything here works on a finite horizon ``J``:
the tail vector ``q_j = P(tau >= j)``, ``j = 1..J``, is the ground truth.
"""
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .bounds import BoundReport, Inequality
from .conf import MASS_TOL, NODE_TOL, tolerance
from .exceptions import EnumerationCapExceeded, ValidationError
from .montecarlo import draw
from .outcome_space import LEAF, DiscreteLaw, OutcomeTree, check_cap, node

logger = logging.getLogger(__name__)


class StoppingRule(ABC):
    """Decides ``{tau = k}`` from the first ``k`` increments only.

    ``stop_probabilities`` receives a ``(size, k)`` array of increment
    prefixes and returns, per row, the probability of stopping right after
    them: 0 or 1 for an ordinary stopping time, something in between for a
    rule randomized independently of the future.
    """

    name = None

    @abstractmethod
    def stop_probabilities(self, prefixes):
        ...

    @abstractmethod
    def params(self):
        ...

    def stop_probability(self, prefix):
        prefixes = np.asarray(prefix, dtype=float).reshape(1, -1)
        return float(self.stop_probabilities(prefixes)[0])

    def to_config(self):
        return {'name': self.name, **self.params()}


class FixedTime(StoppingRule):
    name = 'fixed'

    def __init__(self, m):
        if int(m) != m or m < 0:
            raise ValidationError(f'A fixed time must be a nonnegative integer, got {m}.', code='invalid_parameter')
        self.m = int(m)

    def stop_probabilities(self, prefixes):
        return np.full(len(prefixes), 1.0 if prefixes.shape[1] >= self.m else 0.0)

    def params(self):
        return {'m': self.m}


class FirstHit(StoppingRule):
    """Stop at the first increment equal to ``value``."""

    name = 'first_hit'

    def __init__(self, value):
        self.value = float(value)

    def stop_probabilities(self, prefixes):
        if prefixes.shape[1] == 0:
            return np.zeros(len(prefixes))
        return (np.abs(prefixes[:, -1] - self.value) <= NODE_TOL).astype(float)

    def params(self):
        return {'value': self.value}


class FirstPassage(StoppingRule):
    """Stop once the partial sum reaches ``level``."""

    name = 'first_passage'

    def __init__(self, level):
        self.level = float(level)

    def stop_probabilities(self, prefixes):
        if prefixes.shape[1] == 0:
            return np.zeros(len(prefixes))
        return (prefixes.sum(axis=1) >= self.level - NODE_TOL).astype(float)

    def params(self):
        return {'level': self.level}


class IndependentCoin(StoppingRule):
    """After every increment, stop with probability ``p`` regardless of the increments."""

    name = 'independent_coin'

    def __init__(self, p):
        if not 0.0 <= p <= 1.0:
            raise ValidationError(f'p must lie in [0, 1], got {p}.', code='invalid_parameter')
        self.p = float(p)

    def stop_probabilities(self, prefixes):
        return np.full(len(prefixes), self.p if prefixes.shape[1] else 0.0)

    def params(self):
        return {'p': self.p}


RULES = {rule.name: rule for rule in (FixedTime, FirstHit, FirstPassage, IndependentCoin)}


def make_rule(name, **params):
    try:
        rule = RULES[name]
    except KeyError:
        raise ValidationError(
            f'Unknown stopping rule {name!r}; expected one of {sorted(RULES)}.', code='unknown_rule'
        )
    try:
        return rule(**params)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f'Bad parameters for rule {name}: {exc}', code='invalid_parameter')


@dataclass(frozen=True, eq=False)
class StoppedSumSpec:
    mu: float
    sigma2: float
    tail: tuple
    increment_support: Optional[DiscreteLaw] = None
    stopping_rule: Optional[StoppingRule] = None

    def __post_init__(self):
        tail = tuple(float(q) for q in self.tail)
        object.__setattr__(self, 'tail', tail)
        if not tail:
            raise ValidationError('The tail vector needs at least one entry.', code='empty_tail')
        if any(not math.isfinite(q) for q in tail) or not (-NODE_TOL <= min(tail) and max(tail) <= 1 + NODE_TOL):
            raise ValidationError('Tail probabilities must lie in [0, 1].', code='non_monotone_tail')
        if any(later > earlier + NODE_TOL for earlier, later in zip(tail, tail[1:])):
            raise ValidationError('The tail P(tau >= j) must be non-increasing.', code='non_monotone_tail')
        if not self.sigma2 >= 0:
            raise ValidationError(f'sigma2 must be nonnegative, got {self.sigma2}.', code='negative_variance')
        if self.increment_support is not None:
            support = self.increment_support
            if abs(support.mean() - self.mu) > MASS_TOL or abs(support.variance() - self.sigma2) > MASS_TOL:
                raise ValidationError(
                    'mu and sigma2 disagree with the increment support.', code='support_mismatch'
                )

    @property
    def horizon(self):
        return len(self.tail)

    @classmethod
    def from_support(cls, support, horizon, rule=None, tail=None, cap=None):
        """Spec with moments read off the support; the tail is derived from the rule when omitted."""
        if tail is None:
            if rule is None:
                raise ValidationError('Give a tail vector or a stopping rule.', code='missing_tail')
            tail = rule_tail(support, rule, horizon, cap)
        elif len(tail) != horizon:
            raise ValidationError(
                f'The tail has {len(tail)} entries for a horizon of {horizon}.', code='horizon_mismatch'
            )
        return cls(support.mean(), support.variance(), tuple(tail), support, rule)

    def require_sampling(self):
        if self.increment_support is None or self.stopping_rule is None:
            raise ValidationError(
                'Sampling and enumeration need an increment support and a stopping rule.',
                code='missing_rule',
            )


def tau_moments(spec):
    """``E tau = sum_j q_j`` and ``E tau^2 = sum_j (2j - 1) q_j``."""
    tail = spec.tail
    return math.fsum(tail), math.fsum((2 * j - 1) * q for j, q in enumerate(tail, start=1))


def _series(spec):
    return math.fsum((j - 1) * q for j, q in enumerate(spec.tail, start=1))


def decoupled_stopped_moments(spec):
    """Mean and second moment of ``S_tau'``."""
    e_tau, _ = tau_moments(spec)
    mu2 = spec.mu * spec.mu
    return spec.mu * e_tau, (mu2 + spec.sigma2) * e_tau + 2.0 * mu2 * _series(spec)


def alternate_series_form(spec):
    """``2 mu^2 sum (j-1) q_j + (2 mu^2 + 2 sigma^2 - mu) E tau``.

    Kept for comparison with the decoupled bound; the two agree only in
    special cases.
    """
    e_tau, _ = tau_moments(spec)
    mu2 = spec.mu * spec.mu
    return 2.0 * mu2 * _series(spec) + (2.0 * mu2 + 2.0 * spec.sigma2 - spec.mu) * e_tau


def wald_second_moment(sigma2, E_tau):
    """``E S_tau^2 = sigma^2 E tau`` for centered increments."""
    return sigma2 * E_tau


class ExactStoppedSum(NamedTuple):
    mean: float
    second_moment: float
    tail: tuple
    capped_mass: float


def exact_stopped_moments(spec, cap=None, capped_level=logging.WARNING):
    """Enumerate increment prefixes up to the horizon, level by level.

    Mass still running at the horizon stops there and is logged at ``capped_level``.
    """
    spec.require_sampling()
    support, rule, horizon = spec.increment_support, spec.stopping_rule, spec.horizon
    check_cap(len(support.atoms) ** horizon, cap, 'increment paths')

    prefixes = np.zeros((1, 0))
    mass = np.ones(1)
    stopped_at = np.zeros(horizon + 1)
    first, second = [], []
    capped = 0.0
    for k in range(horizon + 1):
        stop = rule.stop_probabilities(prefixes)
        if k == horizon:
            capped = math.fsum(mass * (1.0 - stop))
            stop = np.ones(len(mass))
        sums = prefixes.sum(axis=1)
        stopping = mass * stop
        stopped_at[k] = math.fsum(stopping)
        first.append(math.fsum(stopping * sums))
        second.append(math.fsum(stopping * sums ** 2))
        if k == horizon:
            break
        keep = mass * (1.0 - stop) > 0.0
        prefixes, mass = prefixes[keep], (mass * (1.0 - stop))[keep]
        values, probs = support.values, support.probs
        prefixes = np.concatenate(
            [np.repeat(prefixes, len(values), axis=0), np.tile(values, len(prefixes))[:, None]], axis=1
        )
        mass = np.repeat(mass, len(values)) * np.tile(probs, len(mass))
    tail = tuple(math.fsum(stopped_at[j:]) for j in range(1, horizon + 1))
    if capped > 0.0:
        logger.log(capped_level, 'Stopping rule did not stop by the horizon on mass %.3g; capped there', capped)
    return ExactStoppedSum(math.fsum(first), math.fsum(second), tail, capped)


def rule_tail(support, rule, horizon, cap=None):
    unit_tail = StoppedSumSpec(support.mean(), support.variance(), (1.0,) * horizon, support, rule)
    return exact_stopped_moments(unit_tail, cap, capped_level=logging.DEBUG).tail


def check_tail(spec, cap=None):
    """Largest gap between the declared tail and the tail the rule actually produces."""
    exact = exact_stopped_moments(spec, cap)
    return max(abs(a - b) for a, b in zip(exact.tail, spec.tail))


class StoppedDraw(NamedTuple):
    tau: int
    value: float
    capped: bool


def sample_stopped_sums(spec, rng, size):
    """Vectorized draws of ``(tau, S_tau, capped)`` as three arrays."""
    spec.require_sampling()
    support, rule, horizon = spec.increment_support, spec.stopping_rule, spec.horizon
    increments = rng.choice(support.values, size=(size, horizon), p=support.probs)
    coins = rng.random((size, horizon + 1))
    tau = np.full(size, -1)
    for k in range(horizon + 1):
        alive = np.flatnonzero(tau < 0)
        if not alive.size:
            break
        stop = rule.stop_probabilities(increments[alive, :k])
        stops = coins[alive, k] < stop
        tau[alive[stops]] = k
    capped = tau < 0
    tau[capped] = horizon
    steps = np.arange(1, horizon + 1)
    values = (increments * (steps[None, :] <= tau[:, None])).sum(axis=1)
    return tau, values, capped


def sample_stopped_sum(spec, rng):
    tau, values, capped = sample_stopped_sums(spec, rng, 1)
    if capped[0]:
        logger.warning('Stopping rule did not stop by the horizon %d; capped there', spec.horizon)
    return StoppedDraw(int(tau[0]), float(values[0]), bool(capped[0]))


def stopped_sum_sampler(spec):
    def sampler(rng, size):
        return sample_stopped_sums(spec, rng, size)[1]
    return sampler


def stopping_time_sampler(spec):
    def sampler(rng, size):
        return sample_stopped_sums(spec, rng, size)[0].astype(float)
    return sampler


def stopped_sum_tree(spec):
    """``d_i = X_i 1{tau >= i}`` as an outcome tree of depth ``J``.

    The stop decision taken after ``X_i`` splits the branch for ``X_i`` in
    two, so ``1{tau >= i + 1}`` is known at depth ``i``.
    """
    spec.require_sampling()
    support, rule, horizon = spec.increment_support, spec.stopping_rule, spec.horizon
    zeros = [LEAF]
    for _ in range(horizon):
        zeros.append(node((0.0, 1.0, zeros[-1])))

    start = rule.stop_probability(())
    if start not in (0.0, 1.0):
        raise ValidationError(
            'A randomized decision at time 0 cannot be placed on the tree.', code='randomized_start'
        )
    if start == 1.0:
        return OutcomeTree(horizon, zeros[horizon])

    def grow(prefix):
        depth = len(prefix)
        branches = []
        for x, p in support.atoms:
            extended = prefix + (x,)
            if depth + 1 == horizon:
                branches.append((x, p, LEAF))
                continue
            stop = rule.stop_probability(extended)
            if stop < 1.0:
                branches.append((x, p * (1.0 - stop), grow(extended)))
            if stop > 0.0:
                branches.append((x, p * stop, zeros[horizon - depth - 1]))
        return node(*branches)

    return OutcomeTree(horizon, grow(()))


def stopped_sum_upper_bound(spec, lhs=None, std_error=None, tol=None, cap=None):
    """``E S_tau^2 <= 2 E S_tau'^2 - (E S_tau')^2``.

    Without an ``lhs`` the exact value is enumerated when the increment law and rule are known.
    A Monte Carlo ``lhs`` comes with its ``std_error`` and is judged with a
    tolerance of three standard errors.
    """
    mean, second = decoupled_stopped_moments(spec)
    rhs = 2.0 * second - mean * mean
    tol = tolerance(tol)
    source = 'monte_carlo' if std_error is not None else 'given'
    if lhs is None:
        source = 'none'
        if spec.increment_support is not None and spec.stopping_rule is not None:
            try:
                lhs = exact_stopped_moments(spec, cap).second_moment
                source = 'exact'
            except EnumerationCapExceeded as exc:
                logger.info('No exact left-hand side: %s', exc)
    if std_error is not None:
        tol = max(tol, 3.0 * std_error)
    return BoundReport.evaluate(
        Inequality.STOPPED_SUM_UPPER, lhs, rhs, tol,
        lhs_source=source,
        decoupled_mean=mean,
        decoupled_second_moment=second,
        alternate_series_form=alternate_series_form(spec),
    )


def estimate_tail_vector(spec, cfg):
    """Empirical ``P(tau >= j)`` for ``j = 1..J`` with binomial standard errors, from one set of draws."""
    taus = draw(stopping_time_sampler(spec), cfg)
    steps = np.arange(1, spec.horizon + 1)
    p_hat = (taus[:, None] >= steps[None, :]).mean(axis=0)
    return p_hat, np.sqrt(p_hat * (1.0 - p_hat) / len(taus))
