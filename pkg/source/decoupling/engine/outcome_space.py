"""Finite adapted sequences as probability trees.

A tree of depth ``n`` holds one realization ``d_1..d_n`` per root-to-leaf
path; the node reached after ``i - 1`` steps carries the conditional law of
``d_i`` given the past, so tree depth is the filtration. Nodes may be shared
between parents (product models do this), which is why every traversal here
works level by level or on an explicit stack instead of recursing.
"""
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .conf import MASS_TOL, MERGE_TOL, NODE_TOL, enumeration_cap
from .exceptions import EnumerationCapExceeded, ValidationError

logger = logging.getLogger(__name__)

MAX_RANDOM_DEPTH = 6
MAX_RANDOM_BRANCHING = 4


def merge_atoms(pairs, tol=MERGE_TOL):
    """Sort ``(value, prob)`` pairs by value and merge values within ``tol``."""
    merged = []
    for value, prob in sorted((float(v), float(p)) for v, p in pairs):
        if prob <= 0.0:
            continue
        if merged and abs(value - merged[-1][0]) <= tol:
            merged[-1][1] += prob
        else:
            merged.append([value, prob])
    return [(value, prob) for value, prob in merged]


@dataclass(frozen=True)
class DiscreteLaw:
    atoms: tuple

    def __post_init__(self):
        atoms = tuple((float(v), float(p)) for v, p in self.atoms)
        object.__setattr__(self, 'atoms', atoms)
        if not atoms:
            raise ValidationError('A discrete law needs at least one atom.', code='empty_law')
        for value, prob in atoms:
            if not math.isfinite(value) or not math.isfinite(prob):
                raise ValidationError('Atom values and probabilities must be finite.', code='non_finite')
            if prob < 0.0:
                raise ValidationError(f'Negative probability {prob}.', code='negative_probability')
        total = math.fsum(p for _, p in atoms)
        if abs(total - 1.0) > NODE_TOL:
            raise ValidationError(
                f'Probabilities sum to {total!r}, not 1.', code='probabilities_not_normalized'
            )

    @classmethod
    def from_pairs(cls, pairs, tol=MASS_TOL):
        """Merge equal values and renormalize mass that is within ``tol`` of 1."""
        merged = merge_atoms(pairs)
        total = math.fsum(p for _, p in merged)
        if abs(total - 1.0) > tol:
            raise ValidationError(
                f'Probabilities sum to {total!r}, not 1.', code='probabilities_not_normalized'
            )
        return cls(tuple((v, p / total) for v, p in merged))

    @classmethod
    def point_mass(cls, value):
        return cls(((value, 1.0),))

    @classmethod
    def bernoulli(cls, p):
        if not 0.0 <= p <= 1.0:
            raise ValidationError(f'Bernoulli parameter {p} outside [0, 1].', code='invalid_parameter')
        return cls.from_pairs([(1.0, p), (0.0, 1.0 - p)])

    @classmethod
    def rademacher(cls):
        return cls(((-1.0, 0.5), (1.0, 0.5)))

    @property
    def values(self):
        return np.array([v for v, _ in self.atoms])

    @property
    def probs(self):
        return np.array([p for _, p in self.atoms])

    def mean(self):
        return math.fsum(v * p for v, p in self.atoms)

    def second_moment(self):
        return math.fsum(v * v * p for v, p in self.atoms)

    def variance(self):
        mean = self.mean()
        return math.fsum((v - mean) ** 2 * p for v, p in self.atoms)

    def probability(self, predicate):
        """Mass of the atoms whose value satisfies ``predicate``."""
        return math.fsum(p for v, p in self.atoms if predicate(v))

    def convolve(self, other):
        """Law of the sum of independent draws from both laws."""
        return DiscreteLaw.from_pairs(
            (v + w, p * q) for v, p in self.atoms for w, q in other.atoms
        )


@dataclass(frozen=True, eq=False)
class Node:
    branches: tuple = ()

    @property
    def is_leaf(self):
        return not self.branches

    @cached_property
    def law(self):
        return DiscreteLaw.from_pairs((b.value, b.prob) for b in self.branches)

    @cached_property
    def conditional_mean(self):
        return math.fsum(b.value * b.prob for b in self.branches)


@dataclass(frozen=True, eq=False)
class Branch:
    value: float
    prob: float
    child: Node


LEAF = Node()


def node(*branches):
    """Build a node from ``(value, prob, child)`` triples."""
    return Node(tuple(Branch(float(v), float(p), child) for v, p, child in branches))


@dataclass(frozen=True)
class PathAtom:
    values: tuple
    prob: float
    branches: tuple = field(default=(), compare=False)


@dataclass(frozen=True)
class TreePath:
    """One positive-probability path with the nodes it passes through."""

    values: tuple
    branches: tuple
    prob: float
    nodes: tuple


@dataclass(frozen=True, eq=False)
class OutcomeTree:
    n: int
    root: Node

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise ValidationError(f'Step count must be an integer >= 1, got {self.n!r}.', code='invalid_depth')
        self._validate_nodes()
        total = math.fsum(mass for _, mass in self.levels[self.n])
        if abs(total - 1.0) > MASS_TOL:
            raise ValidationError(
                f'Total path mass is {total!r}, not 1.', code='probabilities_not_normalized'
            )

    def _validate_nodes(self):
        seen = set()
        stack = [(self.root, 0)]
        while stack:
            current, depth = stack.pop()
            key = (id(current), depth)
            if key in seen:
                continue
            seen.add(key)
            if depth == self.n:
                if not current.is_leaf:
                    raise ValidationError(
                        f'Path longer than {self.n} steps.', code='depth_mismatch'
                    )
                continue
            if current.is_leaf:
                raise ValidationError(
                    f'Path ends after {depth} of {self.n} steps.', code='depth_mismatch'
                )
            for branch in current.branches:
                if not math.isfinite(branch.value) or not math.isfinite(branch.prob):
                    raise ValidationError('Branch values and probabilities must be finite.', code='non_finite')
                if branch.prob < 0.0:
                    raise ValidationError(
                        f'Negative branch probability {branch.prob} at depth {depth}.',
                        code='negative_probability',
                    )
            total = math.fsum(b.prob for b in current.branches)
            if abs(total - 1.0) > NODE_TOL:
                raise ValidationError(
                    f'Branch probabilities at depth {depth} sum to {total!r}, not 1.',
                    code='probabilities_not_normalized',
                )
            stack.extend((b.child, depth + 1) for b in current.branches)

    @cached_property
    def levels(self):
        """Distinct nodes at each depth with the probability of reaching them."""
        levels = [[(self.root, 1.0)]]
        for _ in range(self.n):
            reach = {}
            for parent, mass in levels[-1]:
                for branch in parent.branches:
                    if branch.prob <= 0.0:
                        continue
                    key = id(branch.child)
                    child, acc = reach.get(key, (branch.child, 0.0))
                    reach[key] = (child, acc + mass * branch.prob)
            levels.append(list(reach.values()))
        return levels

    def path_count(self, tangent=False):
        """Number of paths, or of (d, e) atoms of the tangent space when ``tangent`` is set."""
        counts = {id(leaf): 1 for leaf, _ in self.levels[self.n]}
        for depth in range(self.n - 1, -1, -1):
            for parent, _ in self.levels[depth]:
                live = [b for b in parent.branches if b.prob > 0.0]
                width = len(live) if tangent else 1
                counts[id(parent)] = width * sum(counts[id(b.child)] for b in live)
        return counts[id(self.root)]

    def step_marginals(self):
        """Unconditional law of each ``d_i``, from a sweep over the levels."""
        marginals = []
        for depth in range(self.n):
            pairs = [
                (b.value, mass * b.prob)
                for parent, mass in self.levels[depth]
                for b in parent.branches
            ]
            marginals.append(DiscreteLaw.from_pairs(pairs))
        return marginals

    def step_means(self):
        return [law.mean() for law in self.step_marginals()]

    def min_value(self):
        return min(b.value for depth in range(self.n) for parent, _ in self.levels[depth] for b in parent.branches)

    def is_nonnegative(self):
        return self.min_value() >= 0.0

    def iter_paths(self):
        """Walk positive-probability paths in branch order."""
        stack = [(self.root, (), (), 1.0, ())]
        while stack:
            current, values, branches, prob, nodes = stack.pop()
            if current.is_leaf:
                yield TreePath(values, branches, prob, nodes)
                continue
            for index in range(len(current.branches) - 1, -1, -1):
                branch = current.branches[index]
                if branch.prob <= 0.0:
                    continue
                stack.append((
                    branch.child,
                    values + (branch.value,),
                    branches + (index,),
                    prob * branch.prob,
                    nodes + (current,),
                ))


def check_cap(size, cap=None, what='atoms'):
    cap = enumeration_cap(cap)
    if size > cap:
        raise EnumerationCapExceeded(size, cap, what)


def enumerate_paths(tree, cap=None):
    size = tree.path_count()
    check_cap(size, cap, 'paths')
    logger.debug('Enumerating %d paths of a depth-%d tree', size, tree.n)
    atoms = [PathAtom(path.values, path.prob, path.branches) for path in tree.iter_paths()]
    mass = math.fsum(atom.prob for atom in atoms)
    if abs(mass - 1.0) > MASS_TOL:
        raise ValidationError(f'Enumerated mass is {mass!r}, not 1.', code='probabilities_not_normalized')
    return atoms


def sum_law(tree, cap=None):
    """Law of ``d_1 + ... + d_n``."""
    return DiscreteLaw.from_pairs(
        (math.fsum(atom.values), atom.prob) for atom in enumerate_paths(tree, cap)
    )


def product_tree(laws):
    """Tree of independent steps; every node of a level is shared."""
    laws = list(laws)
    if not laws:
        raise ValidationError('A product model needs at least one step law.', code='invalid_depth')
    child = LEAF
    for law in reversed(laws):
        child = node(*((v, p, child) for v, p in law.atoms))
    return OutcomeTree(len(laws), child)


def random_tree(n, max_branching, value_range=(-2.0, 2.0), nonnegative=False, seed=0):
    """Random tree for property tests; a pure function of its arguments.

    Each internal node gets between 2 and ``max_branching`` branches (one when
    ``max_branching`` is 1) with uniform values and strictly positive
    probabilities.
    """
    if not 1 <= n <= MAX_RANDOM_DEPTH:
        raise ValidationError(f'n must be in 1..{MAX_RANDOM_DEPTH}, got {n}.', code='invalid_parameter')
    if not 1 <= max_branching <= MAX_RANDOM_BRANCHING:
        raise ValidationError(
            f'max_branching must be in 1..{MAX_RANDOM_BRANCHING}, got {max_branching}.',
            code='invalid_parameter',
        )
    low, high = (float(v) for v in value_range)
    if nonnegative:
        low = max(low, 0.0)
    if not (math.isfinite(low) and math.isfinite(high)) or high <= low:
        raise ValidationError(f'Empty value range [{low}, {high}].', code='invalid_parameter')

    rng = np.random.default_rng(seed)
    fewest = min(2, max_branching)

    def grow(depth):
        if depth == n:
            return LEAF
        width = int(rng.integers(fewest, max_branching + 1))
        values = rng.uniform(low, high, size=width)
        weights = rng.uniform(0.1, 1.0, size=width)
        probs = weights / weights.sum()
        children = [grow(depth + 1) for _ in range(width)]
        return node(*zip(values, probs, children))

    return OutcomeTree(n, grow(0))
