"""
Generative models, inference and interventions
"""
from hetr.models.base import (
    RLawParams,
    InfectivityWeights,
    infectivity_weights,
    Trajectory,
    TrajectoryEnsemble,
    quantile_envelope,
    stopping_time,
)
from hetr.models.basics import ConstantR, AdditiveGamma, MultiplicativeGamma
from hetr.models.renewal import FittedRenewal, step_incidence, simulate
from hetr.models.likelihood import (
    LatentState,
    RenewalPosterior,
    log_joint,
    grad_log_joint,
    ml_constant_r,
)
from hetr.models.hmc import SamplerConfig, PosteriorDraws, sample_posterior
from hetr.models.interventions import (
    InterventionSpec,
    ScenarioResult,
    draw_intervened_r,
    simulate_scenario,
    scenario_grid,
)
