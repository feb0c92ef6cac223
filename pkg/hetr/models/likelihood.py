"""
Joint log density of the Gamma-Poisson renewal model, its gradient, and the
constant-R maximum-likelihood baseline.

Unconstrained coordinates are (alpha, beta, z_1..z_n) with a = 1 + e^alpha,
b = 1 + e^beta and z = log I for every day t = 1..T-1 with X_t > 0.
"""
from dataclasses import dataclass, field
import numpy as np
from scipy import special
from hetr.models.base import InfectivityWeights, infectivity_weights
from hetr.tools.exceptions import (
    DimensionMismatchError,
    NonFiniteStateError,
    DegenerateWindowError,
    SeriesTooShortError,
)
from hetr.tools.shaping import IncidenceSeries
from hetr.tools.special import norm_logpdf, gamma_logpdf, poisson_logpmf

variants = ('multiplicative', 'additive')


@dataclass
class LatentState:
    """One point of the sampler's state.

    Args:
        alpha (float): unconstrained shape parameter
        beta (float): unconstrained rate parameter
        log_I (np.ndarray): log latent secondary cases, one per positive day before the last
        days (np.ndarray): optional day positions of log_I, for any storage order
    """

    alpha: float
    beta: float
    log_I: np.ndarray = field(default_factory=lambda: np.zeros(0))
    days: np.ndarray = None

    def to_vector(self):
        return np.concatenate([[self.alpha, self.beta], np.asarray(self.log_I, dtype=float)])

    @classmethod
    def from_vector(cls, theta, days=None):
        theta = np.asarray(theta, dtype=float)
        return cls(float(theta[0]), float(theta[1]), theta[2:].copy(), days)


def _values(data):
    if isinstance(data, IncidenceSeries):
        return data.values
    return np.asarray(data, dtype=float).reshape(-1)


class RenewalPosterior(object):
    """Log joint density of one fitting window, with analytic gradient.

    Args:
        data (IncidenceSeries or array): window incidence X_1..X_T
        weights (InfectivityWeights): renewal weights
        variant (str): 'multiplicative' I_t ~ Gamma(a, b / X_t) or
            'additive' I_t ~ Gamma(a X_t, b)
    """

    def __init__(self, data, weights: InfectivityWeights = None, variant: str = 'multiplicative'):
        if variant not in variants:
            raise ValueError(f"variant must be one of {variants}, got {variant}")
        self.variant = variant
        self.weights = infectivity_weights(7) if weights is None else weights
        self.X = _values(data)
        if (self.X < 0).any() or not np.isfinite(self.X).all():
            raise ValueError("incidence must be finite and non-negative")
        self.T = self.X.size
        self.y = np.round(self.X)
        self.latent_days = np.flatnonzero(self.X[: max(self.T - 1, 0)] > 0)
        self.x_latent = self.X[self.latent_days]
        if self.T >= 2:
            self.W = self.weights.matrix(self.T)[1:, :][:, self.latent_days]
            self.y_eval = self.y[1:]
        else:
            self.W = np.zeros((0, self.latent_days.size))
            self.y_eval = np.zeros(0)
        self.gammaln_y = special.gammaln(self.y_eval + 1)

    @property
    def n_latent(self):
        return self.latent_days.size

    @property
    def dim(self):
        return 2 + self.n_latent

    @property
    def n_obs(self):
        return self.y_eval.size

    @property
    def unreachable_days(self):
        """Window positions (0-based) with cases but no positive day among their K lags.

        No latent state gives these days positive mass, so the joint is -inf everywhere.
        """
        orphan = (self.W.sum(axis=1) == 0) & (self.y_eval > 0)
        return np.flatnonzero(orphan) + 1

    def _unpack(self, theta):
        if isinstance(theta, LatentState):
            theta = self._ordered_vector(theta)
        theta = np.asarray(theta, dtype=float).reshape(-1)
        if theta.size != self.dim:
            raise DimensionMismatchError(
                f"state has {theta.size} coordinates, window needs {self.dim}"
            )
        if not np.isfinite(theta).all():
            raise NonFiniteStateError("state has non-finite coordinates")
        return theta

    def _ordered_vector(self, state: LatentState):
        log_I = np.asarray(state.log_I, dtype=float).reshape(-1)
        if state.days is not None:
            days = np.asarray(state.days).reshape(-1)
            if days.size != log_I.size or set(days.tolist()) != set(self.latent_days.tolist()):
                raise DimensionMismatchError("latent days do not match the window's positive days")
            order = np.argsort(days, kind='stable')
            log_I = log_I[order]
        return np.concatenate([[state.alpha, state.beta], log_I])

    def rates(self, theta):
        """Poisson rates for days 2..T."""
        theta = self._unpack(theta)
        return self.W @ np.exp(theta[2:])

    def pointwise_loglik(self, theta):
        """log f(y_t | theta) for days 2..T."""
        lam = self.rates(theta)
        with np.errstate(divide='ignore', invalid='ignore'):
            out = special.xlogy(self.y_eval, lam) - lam - self.gammaln_y
        return np.where((lam <= 0) & (self.y_eval > 0), -np.inf, out)

    def log_joint(self, theta):
        theta = self._unpack(theta)
        alpha, beta, z = theta[0], theta[1], theta[2:]
        with np.errstate(over='ignore'):
            a = 1.0 + np.exp(alpha)
            b = 1.0 + np.exp(beta)
        if not (np.isfinite(a) and np.isfinite(b)):
            return -np.inf
        lp = norm_logpdf(alpha) + norm_logpdf(beta)
        if self.n_latent:
            with np.errstate(over='ignore'):
                latent = np.exp(z)
            if self.variant == 'multiplicative':
                lp += np.sum(gamma_logpdf(latent, a, b / self.x_latent))
            else:
                lp += np.sum(gamma_logpdf(latent, a * self.x_latent, b))
            lp += np.sum(z)
        if self.n_obs:
            lp += np.sum(poisson_logpmf(self.y_eval, self.W @ np.exp(z)))
        return float(lp) if np.isfinite(lp) or lp == -np.inf else -np.inf

    def grad_log_joint(self, theta):
        theta = self._unpack(theta)
        alpha, beta, z = theta[0], theta[1], theta[2:]
        ea, eb = np.exp(alpha), np.exp(beta)
        a, b = 1.0 + ea, 1.0 + eb
        grad = np.zeros(self.dim)
        d_a, d_b = 0.0, 0.0
        if self.n_latent:
            latent = np.exp(z)
            x = self.x_latent
            if self.variant == 'multiplicative':
                r = b / x
                d_a = np.sum(np.log(r) - special.digamma(a) + z)
                d_b = np.sum(a / b - latent / x)
                grad[2:] = a - r * latent
            else:
                d_a = np.sum(x * (np.log(b) - special.digamma(a * x) + z))
                d_b = np.sum(a * x / b - latent)
                grad[2:] = a * x - b * latent
            if self.n_obs:
                lam = self.W @ latent
                with np.errstate(divide='ignore', invalid='ignore'):
                    ratio = np.where(lam > 0, self.y_eval / lam, 0.0)
                grad[2:] += latent * (self.W.T @ (ratio - 1.0))
        grad[0] = -alpha + ea * d_a
        grad[1] = -beta + eb * d_b
        return grad

    def value_and_grad(self, theta):
        return self.log_joint(theta), self.grad_log_joint(theta)

    def initial_point(self, rng):
        """alpha, beta ~ U(-1, 1), log I jittered around log X."""
        theta = np.empty(self.dim)
        theta[:2] = rng.uniform(-1.0, 1.0, size=2)
        theta[2:] = np.log(self.x_latent) + rng.uniform(-0.5, 0.5, size=self.n_latent)
        return theta


def log_joint(state, data, weights: InfectivityWeights = None, variant: str = 'multiplicative'):
    """Prior + Gamma latent densities + Poisson masses (days 2..T) + log Jacobian."""
    return RenewalPosterior(data, weights, variant).log_joint(state)


def grad_log_joint(state, data, weights: InfectivityWeights = None, variant: str = 'multiplicative'):
    """Analytic gradient of log_joint in (alpha, beta, log I) coordinates."""
    return RenewalPosterior(data, weights, variant).grad_log_joint(state)


def ml_constant_r(data, weights: InfectivityWeights = None):
    """Constant-R Poisson renewal MLE with a Wald interval.

    R_hat = sum_t X_t / sum_t L_t over days 2..T, L_t = sum_k w_k X_{t-k} with the
    same lag truncation as the Bayesian likelihood.

    Returns:
        (r_hat, (lower, upper))
    """
    weights = infectivity_weights(7) if weights is None else weights
    X = _values(data)
    if X.size < 2:
        raise SeriesTooShortError("need at least 2 days for the ML estimate")
    big_lambda = weights.matrix(X.size)[1:] @ X
    denominator = float(np.sum(big_lambda))
    if denominator <= 0:
        raise DegenerateWindowError("no positive incidence to renew from in this window")
    r_hat = float(np.sum(X[1:])) / denominator
    half = 1.96 * np.sqrt(r_hat / denominator)
    return r_hat, (r_hat - half, r_hat + half)
