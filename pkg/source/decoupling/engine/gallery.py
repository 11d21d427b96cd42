"""Named models with known moments, used as sharpness witnesses."""
import numpy as np

from .exceptions import ValidationError
from .outcome_space import LEAF, DiscreteLaw, OutcomeTree, node


def _constant_chain(value, length):
    chain = LEAF
    for _ in range(length):
        chain = node((value, 1.0, chain))
    return chain


def _require_steps(n, least=1):
    if not isinstance(n, (int, np.integer)) or n < least:
        raise ValidationError(f'n must be an integer >= {least}, got {n!r}.', code='invalid_parameter')
    return int(n)


def _require_law(law):
    if not isinstance(law, DiscreteLaw):
        raise ValidationError(
            'The step law must have finite support.', code='infinite_support'
        )
    return law


def comonotone_bernoulli(n, p):
    """``d_1 = ... = d_n ~ Ber(p)``."""
    n = _require_steps(n)
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f'p must lie in [0, 1], got {p}.', code='invalid_parameter')
    root = node(
        (1.0, p, _constant_chain(1.0, n - 1)),
        (0.0, 1.0 - p, _constant_chain(0.0, n - 1)),
    )
    return OutcomeTree(n, root)


def comonotone_second_moments(n, p):
    """Closed forms ``E(sum d)^2 = n^2 p`` and ``E(sum z)^2 = np(np + 1 - p)``."""
    dependent = n * n * p
    independent = n * p * (n * p + 1.0 - p)
    return {
        'dependent': dependent,
        'independent': independent,
        'ratio': dependent / independent if independent > 0 else float('nan'),
    }


def unit_vector(n):
    """``(d_1, ..., d_n)`` is the k-th unit vector with probability 1/n."""
    n = _require_steps(n)
    current = node((1.0, 1.0, LEAF))
    for depth in range(n - 2, -1, -1):
        remaining = n - depth
        hit = 1.0 / remaining
        current = node(
            (1.0, hit, _constant_chain(0.0, n - depth - 1)),
            (0.0, 1.0 - hit, current),
        )
    return OutcomeTree(n, current)


def remark_equality(law=None):
    """``d_1`` drawn from ``law`` (Rademacher by default) and ``d_2 = d_1``."""
    law = _require_law(law if law is not None else DiscreteLaw.rademacher())
    root = node(*((v, p, node((v, 1.0, LEAF))) for v, p in law.atoms))
    return OutcomeTree(2, root)


def _pairwise_tree(n, law, pair_term):
    """``d_j = sum_{i<j} pair_term(i, j, X_i, X_j)`` on the natural filtration of the X's."""

    def grow(prefix):
        depth = len(prefix)
        if depth == n:
            return LEAF
        branches = []
        for x, p in law.atoms:
            value = sum(pair_term(i, depth, prefix[i], x) for i in range(depth))
            branches.append((value, p, grow(prefix + (x,))))
        return node(*branches)

    return OutcomeTree(n, grow(()))


def quadratic_form(a, law):
    """``Q_n = sum_{i<j} a_ij X_i X_j`` with i.i.d. X's; only the upper triangle of ``a`` is read."""
    law = _require_law(law)
    matrix = np.asarray(a, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] < 1:
        raise ValidationError('The coefficient matrix must be square.', code='invalid_parameter')
    if not np.all(np.isfinite(matrix)):
        raise ValidationError('Coefficients must be finite.', code='non_finite')
    return _pairwise_tree(matrix.shape[0], law, lambda i, j, xi, xj: matrix[i, j] * xi * xj)


KERNELS = {
    'product': lambda x, y: x * y,
    'abs_difference': lambda x, y: abs(x - y),
    'half_squared_difference': lambda x, y: 0.5 * (x - y) ** 2,
}


def u_statistic(n, kernel, law):
    """U-statistic with symmetric kernel ``h``: ``U_n = 2/(n(n-1)) sum_{i<j} h(X_i, X_j)``."""
    n = _require_steps(n, least=2)
    law = _require_law(law)
    try:
        h = KERNELS[kernel]
    except KeyError:
        raise ValidationError(
            f'Unknown kernel {kernel!r}; expected one of {sorted(KERNELS)}.', code='unknown_kernel'
        )
    scale = 2.0 / (n * (n - 1))
    return _pairwise_tree(n, law, lambda i, j, xi, xj: scale * h(xi, xj))


GALLERY = {
    'comonotone_bernoulli': comonotone_bernoulli,
    'unit_vector': unit_vector,
    'remark_equality': remark_equality,
    'quadratic_form': quadratic_form,
    'u_statistic': u_statistic,
}


def gallery(name, **params):
    try:
        factory = GALLERY[name]
    except KeyError:
        raise ValidationError(
            f'Unknown gallery model {name!r}; expected one of {sorted(GALLERY)}.', code='unknown_model'
        )
    try:
        return factory(**params)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f'Bad parameters for {name}: {exc}', code='invalid_parameter')
