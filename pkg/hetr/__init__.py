"""
Epidemic trajectories under a random reproductive number: simulation,
Bayesian renewal fitting, and tail vs mean interventions.
"""
from hetr.tools.shaping import (
    CumulativeSeries,
    IncidenceSeries,
    parse_cumulative_csv,
    to_incidence,
    rolling_average,
)
from hetr.tools.window_functions import split_windows
from hetr.models import (
    RLawParams,
    InfectivityWeights,
    infectivity_weights,
    TrajectoryEnsemble,
    quantile_envelope,
    stopping_time,
    ConstantR,
    AdditiveGamma,
    MultiplicativeGamma,
    FittedRenewal,
    step_incidence,
    simulate,
    LatentState,
    log_joint,
    grad_log_joint,
    ml_constant_r,
    SamplerConfig,
    PosteriorDraws,
    sample_posterior,
    InterventionSpec,
    draw_intervened_r,
    simulate_scenario,
    scenario_grid,
)
from hetr.evaluator import (
    diagnose,
    predictive_ordinates,
    envelope_coverage,
    r_law_summary,
)
from hetr.datasets import load_synthetic

__version__ = '0.1.0'

__all__ = [
    'CumulativeSeries',
    'IncidenceSeries',
    'parse_cumulative_csv',
    'to_incidence',
    'rolling_average',
    'split_windows',
    'RLawParams',
    'InfectivityWeights',
    'infectivity_weights',
    'TrajectoryEnsemble',
    'quantile_envelope',
    'stopping_time',
    'ConstantR',
    'AdditiveGamma',
    'MultiplicativeGamma',
    'FittedRenewal',
    'step_incidence',
    'simulate',
    'LatentState',
    'log_joint',
    'grad_log_joint',
    'ml_constant_r',
    'SamplerConfig',
    'PosteriorDraws',
    'sample_posterior',
    'InterventionSpec',
    'draw_intervened_r',
    'simulate_scenario',
    'scenario_grid',
    'diagnose',
    'predictive_ordinates',
    'envelope_coverage',
    'r_law_summary',
    'load_synthetic',
]
