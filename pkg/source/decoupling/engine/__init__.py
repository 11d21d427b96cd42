from .bounds import BoundReport, Inequality, chebyshev_bound, chebyshev_report, complete_lower_bound, \
    paley_zygmund_bound, paley_zygmund_report, refined_upper, second_moment_upper, variance_upper
from .configs import build_stopped_spec, build_tree, law_from_config, load_description
from .decoupled import JointDecoupledSpace, MarginalProduct, complete_decouple, space_to_csv, \
    tangent_decouple, verify_conditional_independence, verify_tangency
from .exceptions import EnumerationCapExceeded, ValidationError
from .gallery import gallery
from .moments import MomentSummary, ProjectionTable, check_decomposition, check_distance_equality, \
    exact_moments, max_cross_term, project_on_G, projection_to_csv
from .montecarlo import EstimatorConfig, estimate_moments, estimate_tail, zscore
from .outcome_space import DiscreteLaw, OutcomeTree, PathAtom, enumerate_paths, random_tree, sum_law
from .report import ExperimentReport, Residual, parse, render
from .stopped_sums import StoppedSumSpec, decoupled_stopped_moments, sample_stopped_sum, \
    stopped_sum_upper_bound, tau_moments, wald_second_moment
