"""Complete and tangent decoupling of outcome trees.

The tangent construction follows the two-copies recipe: along every path the
original step ``d_i`` and its copy ``e_i`` are drawn independently from the
same node law, so ``e_i`` has the conditional law of ``d_i`` given the past
and the ``e_i`` are conditionally independent given the whole d-path. The
conditioning sigma-algebra ``G`` is the full d-path.
"""
import csv
import itertools
import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from .conf import MASS_TOL
from .exceptions import ValidationError
from .outcome_space import DiscreteLaw, check_cap, product_tree

logger = logging.getLogger(__name__)

VALUE_DECIMALS = 12


def _frozen(array, dtype=float):
    array = np.array(array, dtype=dtype)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class MarginalProduct:
    """Independent ``z_1..z_n`` with the marginals of ``d_1..d_n``."""

    laws: tuple

    @property
    def n(self):
        return len(self.laws)

    def sum_moments(self):
        """Mean and second moment of ``z_1 + ... + z_n``."""
        mean = math.fsum(law.mean() for law in self.laws)
        return mean, math.fsum(law.variance() for law in self.laws) + mean * mean

    def sum_law(self, cap=None):
        total = self.laws[0]
        for law in self.laws[1:]:
            check_cap(len(total.atoms) * len(law.atoms), cap)
            total = total.convolve(law)
        return total

    def as_tree(self):
        return product_tree(self.laws)

    def sample(self, rng, size):
        columns = [rng.choice(law.values, size=size, p=law.probs) for law in self.laws]
        return np.stack(columns, axis=1)


def complete_decouple(tree):
    """Product of the step marginals, computed by a sweep over the tree levels."""
    return MarginalProduct(tuple(tree.step_marginals()))


@dataclass(frozen=True, eq=False)
class JointDecoupledSpace:
    """Enumerated joint law of ``(d_1..d_n, e_1..e_n)``.

    ``path_*`` arrays describe the source paths (one row per d-path);
    ``path_id``, ``e`` and ``prob`` describe the joint atoms. ``cond_means``
    holds ``E(e_i | G)`` on every path, read from the source node laws.
    """

    source: object
    path_values: np.ndarray
    path_branches: np.ndarray
    path_probs: np.ndarray
    cond_means: np.ndarray
    path_id: np.ndarray
    e: np.ndarray
    prob: np.ndarray

    def __post_init__(self):
        for name, dtype in (
            ('path_values', float), ('path_branches', np.int64), ('path_probs', float),
            ('cond_means', float), ('path_id', np.int64), ('e', float), ('prob', float),
        ):
            object.__setattr__(self, name, _frozen(getattr(self, name), dtype))
        n, paths = self.n, len(self.path_probs)
        if self.path_values.shape != (paths, n) or self.cond_means.shape != (paths, n):
            raise ValidationError('Path arrays do not match the step count.', code='shape_mismatch')
        if self.e.shape != (len(self.prob), n) or self.path_id.shape != self.prob.shape:
            raise ValidationError('Atom arrays do not match the step count.', code='shape_mismatch')
        if np.any(self.prob < 0.0):
            raise ValidationError('Negative atom probability.', code='negative_probability')
        total = math.fsum(self.prob)
        if abs(total - 1.0) > MASS_TOL:
            raise ValidationError(f'Total mass is {total!r}, not 1.', code='probabilities_not_normalized')
        marginal = np.bincount(self.path_id, weights=self.prob, minlength=paths)
        if np.max(np.abs(marginal - self.path_probs)) > MASS_TOL:
            raise ValidationError(
                'The d-marginal of the atoms differs from the source paths.', code='marginal_mismatch'
            )

    @property
    def n(self):
        return self.source.n

    @property
    def d(self):
        return self.path_values[self.path_id]

    @property
    def branches(self):
        return self.path_branches[self.path_id]

    @property
    def projections(self):
        """``E(e_i | G)`` for every atom and step."""
        return self.cond_means[self.path_id]

    def __len__(self):
        return len(self.prob)

    def atoms(self):
        for d, e, p in zip(self.d, self.e, self.prob):
            yield tuple(d), tuple(e), float(p)

    def with_atoms(self, path_id, e, prob):
        return replace(self, path_id=path_id, e=e, prob=prob)

    def marginal_law(self, which, step):
        column = (self.d if which == 'd' else self.e)[:, step]
        return DiscreteLaw.from_pairs(zip(column, self.prob))


def tangent_decouple(tree, cap=None):
    size = tree.path_count(tangent=True)
    check_cap(size, cap)
    logger.debug('Building a tangent space of %d atoms for a depth-%d tree', size, tree.n)

    path_values, path_branches, path_probs, cond_means = [], [], [], []
    path_id, e_rows, probs = [], [], []
    for index, path in enumerate(tree.iter_paths()):
        path_values.append(path.values)
        path_branches.append(path.branches)
        path_probs.append(path.prob)
        cond_means.append([parent.conditional_mean for parent in path.nodes])
        laws = [[(b.value, b.prob) for b in parent.branches if b.prob > 0.0] for parent in path.nodes]
        for combo in itertools.product(*laws):
            path_id.append(index)
            e_rows.append([value for value, _ in combo])
            probs.append(path.prob * math.prod(q for _, q in combo))

    return JointDecoupledSpace(
        source=tree,
        path_values=path_values,
        path_branches=path_branches,
        path_probs=path_probs,
        cond_means=cond_means,
        path_id=path_id,
        e=e_rows,
        prob=probs,
    )


def _codes(*columns):
    keys = np.round(np.concatenate(columns), VALUE_DECIMALS)
    _, inverse = np.unique(keys, return_inverse=True)
    inverse = inverse.reshape(-1)
    return np.split(inverse, np.cumsum([len(c) for c in columns])[:-1]), inverse.max() + 1


def verify_tangency(space):
    """Largest gap between ``L(d_i | prefix)`` and ``L(e_i | prefix)`` over live prefixes."""
    d, e, prob, branches = space.d, space.e, space.prob, space.branches
    group = np.zeros(len(prob), dtype=np.int64)
    worst = 0.0
    for step in range(space.n):
        if step:
            pairs = np.stack([group, branches[:, step - 1]], axis=1)
            group = np.unique(pairs, axis=0, return_inverse=True)[1].reshape(-1)
        (d_code, e_code), width = _codes(d[:, step], e[:, step])
        height = group.max() + 1
        d_table = np.zeros((height, width))
        e_table = np.zeros((height, width))
        np.add.at(d_table, (group, d_code), prob)
        np.add.at(e_table, (group, e_code), prob)
        mass = d_table.sum(axis=1)
        live = mass > 0.0
        if np.any(live):
            gap = np.abs(d_table[live] - e_table[live]) / mass[live, None]
            worst = max(worst, float(gap.max()))
    return worst


def verify_conditional_independence(space):
    """Largest gap between ``P(e | d-path)`` and the product of its conditional marginals."""
    order = np.argsort(space.path_id, kind='stable')
    ids = space.path_id[order]
    bounds = np.flatnonzero(np.diff(ids)) + 1
    keys = np.round(space.e, VALUE_DECIMALS)
    worst = 0.0
    for rows in np.split(order, bounds):
        probs = space.prob[rows]
        mass = math.fsum(probs)
        if mass <= 0.0:
            continue
        joint = {}
        marginals = [{} for _ in range(space.n)]
        for row, p in zip(rows, probs):
            key = tuple(keys[row])
            joint[key] = joint.get(key, 0.0) + p / mass
            for step, value in enumerate(key):
                marginals[step][value] = marginals[step].get(value, 0.0) + p / mass
        for key in itertools.product(*(sorted(m) for m in marginals)):
            product = math.prod(marginals[step][value] for step, value in enumerate(key))
            worst = max(worst, abs(joint.get(key, 0.0) - product))
    return worst


def space_to_csv(space, stream):
    """One row per atom: d-values, e-values, probability."""
    writer = csv.writer(stream)
    n = space.n
    writer.writerow(
        [f'd_{i}' for i in range(1, n + 1)] + [f'e_{i}' for i in range(1, n + 1)] + ['prob']
    )
    for d, e, p in space.atoms():
        writer.writerow([f'{v:.17g}' for v in d + e] + [f'{p:.17g}'])
