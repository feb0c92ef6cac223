"""Goodness of fit of posterior draws, and coverage of trajectory envelopes."""
import warnings
from dataclasses import dataclass
import numpy as np
import pandas as pd
from scipy.special import logsumexp
from hetr.models.likelihood import RenewalPosterior
from hetr.tools.exceptions import DimensionMismatchError, HorizonMismatchError


@dataclass
class FitMetrics:
    """Per-observation predictive ordinates (days 2..T) and their summaries."""

    log_ppo: np.ndarray
    log_cpo: np.ndarray
    lppd: float
    lpml: float
    avg_loglik: float

    @property
    def ppo(self):
        return np.exp(self.log_ppo)

    @property
    def cpo(self):
        return np.exp(self.log_cpo)

    def to_dict(self):
        return {
            'lppd': self.lppd,
            'lpml': self.lpml,
            'avg_loglik': self.avg_loglik,
            'log_ppo': self.log_ppo.tolist(),
            'log_cpo': self.log_cpo.tolist(),
        }


def pointwise_loglik(draws, data, weights=None):
    """log f(y_t | draw) for every retained draw, shape (n_draws, T - 1)."""
    if not draws.has_latent:
        raise ValueError("predictive ordinates need the latent draws")
    target = RenewalPosterior(data, weights, draws.variant)
    if not np.array_equal(target.latent_days, draws.latent_days):
        raise DimensionMismatchError("draws were fitted to a different window")
    return np.vstack([target.pointwise_loglik(theta) for theta in draws.flat_samples()])


def predictive_ordinates(draws, data, weights=None):
    """PPO (arithmetic mean of the likelihood over draws) and CPO (harmonic mean),
    both in log space.

    An observation no draw can produce gets -inf.

    Args:
        draws (PosteriorDraws): fitted draws with latents
        data (IncidenceSeries): the window the draws were fitted to
        weights (InfectivityWeights): renewal weights used for the fit

    Returns:
        FitMetrics
    """
    logf = pointwise_loglik(draws, data, weights)
    log_s = np.log(logf.shape[0])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", category=RuntimeWarning)
        log_ppo = logsumexp(logf, axis=0) - log_s
        log_cpo = -(logsumexp(-logf, axis=0) - log_s)
        avg_loglik = float(np.mean(np.sum(logf, axis=1)))
    return FitMetrics(
        log_ppo=log_ppo,
        log_cpo=log_cpo,
        lppd=float(np.sum(log_ppo)),
        lpml=float(np.mean(log_cpo)) if log_cpo.size else 0.0,
        avg_loglik=avg_loglik,
    )


def containment(lower_forecast, upper_forecast, actual):
    """Share of days where actual lies within [lower, upper], per series (column)."""
    return (
        np.count_nonzero((upper_forecast >= actual) & (lower_forecast <= actual), axis=0)
        / actual.shape[0]
    )


def envelope_bounds(ensemble, band: float = None):
    """Min-max envelope, or the central quantile band of width `band`."""
    paths = ensemble.incidence
    if band is None:
        return paths.min(axis=0), paths.max(axis=0)
    tail = (1 - band) / 2
    lower, upper = np.quantile(paths, [tail, 1 - tail], axis=0, method='linear')
    return lower, upper


def envelope_coverage(ensembles, observed, band: float = None):
    """Whether each observed trajectory lies entirely inside its ensemble's envelope.

    Args:
        ensembles (dict or list of TrajectoryEnsemble): keyed like observed
        observed (dict or list of IncidenceSeries or arrays): what followed
        band (float): None for min-max, else central quantile band (e.g. 0.95)

    Returns:
        (pd.Series of bool per key, overall covered fraction)
    """
    if not isinstance(ensembles, dict):
        ensembles = dict(enumerate(ensembles))
    if not isinstance(observed, dict):
        observed = dict(enumerate(observed))
    if set(ensembles) != set(observed):
        raise ValueError("ensembles and observed must share keys")
    covered = {}
    for key, ens in ensembles.items():
        obs = observed[key]
        values = obs.values if hasattr(obs, 'values') and not isinstance(obs, np.ndarray) else obs
        values = np.asarray(values, dtype=float).reshape(-1)
        if values.size != ens.horizon:
            raise HorizonMismatchError(
                f"{key}: observed {values.size} days, ensemble horizon {ens.horizon}"
            )
        lower, upper = envelope_bounds(ens, band)
        share = containment(lower[:, None], upper[:, None], values[:, None])[0]
        covered[key] = bool(share == 1.0)
    result = pd.Series(covered, dtype=bool)
    return result, float(result.mean()) if len(result) else 0.0
