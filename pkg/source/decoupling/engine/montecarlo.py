"""Seeded Monte Carlo estimation on independent counter-based substreams.

Stream ``i`` of a run is a Philox generator keyed by ``SeedSequence([seed, i])``,
so results depend on ``(n_samples, seed, n_streams)`` only and never on how
many workers drew the streams.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from django.conf import settings

from ..forms import EstimatorConfigForm
from .conf import NODE_TOL
from .decoupled import complete_decouple
from .exceptions import ValidationError
from .moments import ESTIMATED, EXACT, MomentSummary

logger = logging.getLogger(__name__)

MIN_SAMPLES = 100
ABOVE = 'above'
TWO_SIDED_CENTERED = 'two_sided_centered'


@dataclass(frozen=True)
class EstimatorConfig:
    n_samples: int
    seed: int = 0
    n_streams: int = 1
    batch: int = 100_000
    workers: int = 1

    def __post_init__(self):
        if self.n_samples < MIN_SAMPLES:
            raise ValidationError(
                f'n_samples must be at least {MIN_SAMPLES}, got {self.n_samples}.', code='too_few_samples'
            )
        if self.n_streams < 1 or self.batch < 1 or self.workers < 1:
            raise ValidationError('n_streams, batch and workers must be positive.', code='invalid_parameter')
        if self.seed < 0:
            raise ValidationError(f'The seed must be nonnegative, got {self.seed}.', code='invalid_seed')

    @classmethod
    def from_settings(cls, **overrides):
        values = {
            'n_samples': settings.DECOUPLE_MC_SAMPLES,
            'seed': settings.DECOUPLE_SEED,
            'n_streams': settings.DECOUPLE_STREAMS,
            'workers': settings.DECOUPLE_WORKERS,
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        form = EstimatorConfigForm(data=values)
        if not form.is_valid():
            raise ValidationError(form.errors.as_data())
        return cls(**{key: value for key, value in form.cleaned_data.items() if value is not None})

    def stream_sizes(self):
        share, extra = divmod(self.n_samples, self.n_streams)
        return [share + (1 if stream < extra else 0) for stream in range(self.n_streams)]


def stream_generator(seed, stream):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, stream])))


def draw(sampler, cfg):
    """All ``cfg.n_samples`` realizations, concatenated in stream order.

    ``sampler(rng, size)`` must return ``size`` realizations and depend only
    on the generator it is handed.
    """
    def run(stream, size):
        rng = stream_generator(cfg.seed, stream)
        chunks = []
        while size > 0:
            step = min(size, cfg.batch)
            chunks.append(np.asarray(sampler(rng, step), dtype=float))
            size -= step
        return np.concatenate(chunks) if chunks else np.empty(0)

    sizes = cfg.stream_sizes()
    logger.debug('Drawing %d samples on %d streams (seed %d)', cfg.n_samples, cfg.n_streams, cfg.seed)
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        parts = list(pool.map(run, range(cfg.n_streams), sizes))
    return np.concatenate(parts)


def estimate_moments(sampler, cfg):
    x = draw(sampler, cfg)
    n = len(x)
    squares = x * x
    return MomentSummary(
        mean=float(x.mean()),
        second_moment=float(squares.mean()),
        variance=float(x.var(ddof=1)),
        kind=ESTIMATED,
        std_error=float(x.std(ddof=1) / math.sqrt(n)),
        second_moment_std_error=float(squares.std(ddof=1) / math.sqrt(n)),
        n_samples=n,
        seed=cfg.seed,
    )


class TailEstimate(NamedTuple):
    p_hat: float
    std_error: float


def estimate_tail(sampler, threshold, side, cfg, center=None):
    """Proportion of draws above ``threshold``, or farther than it from ``center``.

    Without a ``center`` the two-sided estimate centers on the sample mean.
    """
    x = draw(sampler, cfg)
    if side == ABOVE:
        hits = x > threshold
    elif side == TWO_SIDED_CENTERED:
        hits = np.abs(x - (x.mean() if center is None else center)) > threshold
    else:
        raise ValidationError(f'Unknown tail side {side!r}.', code='invalid_side')
    p_hat = float(hits.mean())
    return TailEstimate(p_hat, math.sqrt(p_hat * (1.0 - p_hat) / len(x)))


def standardized(estimate, exact, std_error):
    """``(estimate - exact) / std_error``, infinite when a zero error meets a real discrepancy."""
    discrepancy = estimate - exact
    if std_error > 0:
        return discrepancy / std_error
    # rounding noise of an exact enumeration is not a discrepancy
    if abs(discrepancy) <= NODE_TOL * max(1.0, abs(exact)):
        return 0.0
    logger.warning('Estimate %r differs from %r with a zero standard error', estimate, exact)
    return math.copysign(math.inf, discrepancy)


def zscore(estimate, exact):
    """Standardized discrepancy of the estimated mean and second moment."""
    if estimate.kind != ESTIMATED or exact.kind != EXACT:
        raise ValidationError('zscore compares an estimated summary with an exact one.', code='invalid_kind')
    return {
        'mean': standardized(estimate.mean, exact.mean, estimate.std_error),
        'second_moment': standardized(estimate.second_moment, exact.second_moment, estimate.second_moment_std_error),
    }


def walk(tree, rng, size, tangent=False):
    """Sequential draws of ``d`` (and of the tangent copy ``e``) down the tree, level by level."""
    d = np.empty((size, tree.n))
    e = np.empty((size, tree.n)) if tangent else None
    current = np.zeros(size, dtype=np.int64)
    for depth in range(tree.n):
        nodes = [parent for parent, _ in tree.levels[depth]]
        position = {id(child): index for index, (child, _) in enumerate(tree.levels[depth + 1])}
        u = rng.random(size)
        v = rng.random(size) if tangent else None
        following = np.empty(size, dtype=np.int64)
        for index, parent in enumerate(nodes):
            rows = np.flatnonzero(current == index)
            if not rows.size:
                continue
            live = [b for b in parent.branches if b.prob > 0.0]
            cumulative = np.cumsum([b.prob for b in live])
            values = np.array([b.value for b in live])
            children = np.array([position[id(b.child)] for b in live])
            pick = np.minimum(np.searchsorted(cumulative, u[rows] * cumulative[-1], side='right'), len(live) - 1)
            d[rows, depth] = values[pick]
            following[rows] = children[pick]
            if tangent:
                copy = np.minimum(np.searchsorted(cumulative, v[rows] * cumulative[-1], side='right'), len(live) - 1)
                e[rows, depth] = values[copy]
        current = following
    return d, e


def sum_sampler(tree):
    def sampler(rng, size):
        return walk(tree, rng, size)[0].sum(axis=1)
    return sampler


def decoupled_sum_sampler(tree):
    def sampler(rng, size):
        return walk(tree, rng, size, tangent=True)[1].sum(axis=1)
    return sampler


def complete_sum_sampler(tree):
    product = complete_decouple(tree)

    def sampler(rng, size):
        return product.sample(rng, size).sum(axis=1)
    return sampler
