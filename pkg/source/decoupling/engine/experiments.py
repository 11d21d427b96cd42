"""Runs every applicable check on a model and collects the outcome in a report."""
import logging
import math
from dataclasses import replace

from .bounds import (
    chebyshev_report, complete_lower_bound, has_nonnegative_sum,
    paley_zygmund_report, tangent_reports,
)
from .conf import tolerance
from .decoupled import tangent_decouple, verify_conditional_independence, verify_tangency
from .moments import (
    check_decomposition, check_distance_equality, max_cross_term, project_on_G, space_moments,
)
from .outcome_space import random_tree
from .report import ExperimentReport, Residual

logger = logging.getLogger(__name__)

DEVIATIONS = (0.5, 1.0, 2.0)
THETAS = (0.1, 0.5, 0.9)


def tree_results(tree, tol=None, cap=None, deviations=DEVIATIONS, thetas=THETAS):
    """Residuals and bound reports for one tree, plus the moments of the three sums."""
    tol = tolerance(tol)
    space = tangent_decouple(tree, cap)
    moments = space_moments(space)
    lhs, rhs = check_distance_equality(space)
    tower = abs(project_on_G(space).expectation() - moments['e_sum'].mean)
    results = [
        Residual.evaluate('tangency', verify_tangency(space), tol),
        Residual.evaluate('conditional_independence', verify_conditional_independence(space), tol),
        Residual.evaluate('tower_property', tower, tol),
        Residual.evaluate('decomposition', check_decomposition(space), tol),
        Residual.evaluate('distance_equality', abs(lhs - rhs), tol, lhs=lhs, rhs=rhs),
        Residual.evaluate('cross_terms', max_cross_term(space), tol),
    ]
    results += tangent_reports(space, tol)
    if tree.is_nonnegative():
        results.append(complete_lower_bound(tree, tol, cap))
    results += [chebyshev_report(space, t, tol) for t in deviations]
    if has_nonnegative_sum(space) and moments['d_sum'].mean > 0:
        results += [paley_zygmund_report(space, theta, tol) for theta in thetas]
    return results, moments


def tree_experiment(tree, experiment_id, description, tol=None, cap=None):
    results, moments = tree_results(tree, tol, cap)
    report = ExperimentReport(experiment_id, dict(description), results, moments)
    d_second, z_second = moments['d_sum'].second_moment, moments['z_sum'].second_moment
    report.quantities['second_moment_ratio_d_over_z'] = d_second / z_second if z_second > 0 else math.nan
    logger.info('Experiment %s: %d checks, all hold: %s', experiment_id, len(results), report.all_hold())
    return report


def _badness(result):
    if isinstance(result, Residual):
        return result.value
    return -result.slack if result.slack is not None else -math.inf


def _label(result):
    return result.name if isinstance(result, Residual) else (
        result.inequality_id + ''.join(f'[{k}={v}]' for k, v in sorted(result.params.items()))
    )


def worst_results(labelled_results):
    """Keep, per check, the result farthest from holding, tagged with where it came from."""
    worst = {}
    for origin, result in labelled_results:
        label = _label(result)
        if label not in worst or _badness(result) > _badness(worst[label]):
            worst[label] = replace(result, params={**result.params, 'origin': origin})
    return [worst[label] for label in sorted(worst)]


def random_suite(count, n, branching, seed, value_range=(-2.0, 2.0), nonnegative=False, tol=None, cap=None):
    """Checks over ``count`` random trees with seeds ``seed .. seed + count - 1``."""
    collected = []
    for offset in range(count):
        tree = random_tree(n, branching, value_range, nonnegative, seed + offset)
        results, _ = tree_results(tree, tol, cap)
        collected += [(seed + offset, result) for result in results]
    return worst_results(collected)
