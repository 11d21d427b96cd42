import logging

import numpy as np

from decoupling.engine.configs import build_stopped_spec, load_description
from decoupling.engine.exceptions import EnumerationCapExceeded
from decoupling.engine.moments import MomentSummary
from decoupling.engine.montecarlo import EstimatorConfig, estimate_moments, standardized
from decoupling.engine.report import ExperimentReport, Residual
from decoupling.engine.stopped_sums import (
    alternate_series_form, decoupled_stopped_moments, estimate_tail_vector, exact_stopped_moments,
    stopped_sum_sampler, stopped_sum_upper_bound, tau_moments, wald_second_moment,
)
from decoupling.management.base import ExperimentCommand

logger = logging.getLogger(__name__)

# Monte Carlo checks pass within this many standard errors.
SE_LIMIT = 3.0
CENTERED = 1e-12


class Command(ExperimentCommand):
    help = 'Compare a randomly stopped sum with its decoupled version.'
    echo_options = ('spec_file', 'mc', 'seed', 'streams')

    def add_command_arguments(self, parser):
        parser.add_argument('spec_file', help='JSON stopped-sum description.')
        parser.add_argument('--mc', type=int, default=0, help='Also estimate E S_tau^2 from this many draws.')
        parser.add_argument('--seed', type=int)
        parser.add_argument('--streams', type=int)

    def build_report(self, **options):
        tol, cap = options['tol'], options['cap']
        description = load_description(options['spec_file'])
        spec = build_stopped_spec(description, cap)
        report = ExperimentReport(f'stopped-{options["spec_file"]}', description)

        e_tau, e_tau2 = tau_moments(spec)
        mean, second = decoupled_stopped_moments(spec)
        report.moments['decoupled'] = MomentSummary.from_moments(mean, second)
        report.quantities.update({
            'E_tau': e_tau,
            'E_tau_squared': e_tau2,
            'alternate_series_form': alternate_series_form(spec),
        })
        centered = abs(spec.mu) <= CENTERED
        wald = wald_second_moment(spec.sigma2, e_tau) if centered else None
        if centered:
            report.quantities['wald_second_moment'] = wald

        samplable = spec.increment_support is not None and spec.stopping_rule is not None
        exact = None
        if samplable:
            try:
                exact = exact_stopped_moments(spec, cap)
            except EnumerationCapExceeded:
                if not options['mc']:
                    raise
                logger.info('Exact enumeration over the cap; relying on Monte Carlo')
        if exact is not None:
            report.moments['stopped'] = MomentSummary.from_moments(exact.mean, exact.second_moment)
            report.quantities['capped_mass'] = exact.capped_mass
            report.add(
                stopped_sum_upper_bound(spec, exact.second_moment, tol=tol),
                Residual.evaluate('tail_consistency', max(abs(a - b) for a, b in zip(exact.tail, spec.tail)), tol),
            )
            if centered:
                report.add(Residual.evaluate('wald_identity', abs(exact.second_moment - wald), tol))
        elif not samplable:
            report.add(stopped_sum_upper_bound(spec, tol=tol))

        if samplable and options['mc']:
            self.monte_carlo(spec, report, exact, wald, options)
        return report

    def monte_carlo(self, spec, report, exact, wald, options):
        cfg = EstimatorConfig.from_settings(n_samples=options['mc'], seed=options['seed'], n_streams=options['streams'])
        report.seeds = {'seed': cfg.seed, 'n_streams': cfg.n_streams, 'n_samples': cfg.n_samples}
        estimate = estimate_moments(stopped_sum_sampler(spec), cfg)
        report.moments['stopped_mc'] = estimate
        se = estimate.second_moment_std_error
        report.add(stopped_sum_upper_bound(spec, estimate.second_moment, se, options['tol']))
        if exact is not None:
            report.add(Residual.evaluate(
                'mc_second_moment_zscore', abs(standardized(estimate.second_moment, exact.second_moment, se)), SE_LIMIT
            ))
        if wald is not None:
            report.add(Residual.evaluate(
                'wald_mc_zscore', abs(standardized(estimate.second_moment, wald, se)), SE_LIMIT
            ))
        p_hat, std_errors = estimate_tail_vector(spec, cfg)
        tail = np.asarray(spec.tail)
        # a draw that never reaches a rare step has a zero empirical error
        std_errors = np.maximum(std_errors, np.sqrt(tail * (1.0 - tail) / cfg.n_samples))
        worst = max(abs(standardized(p, q, s)) for p, q, s in zip(p_hat, tail, std_errors))
        report.add(Residual.evaluate('tail_mc_zscore', worst, SE_LIMIT))
