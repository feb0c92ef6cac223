"""
Single-lag branching models: fixed R and the two Gamma-noise variants.
"""
import numpy as np
from hetr.models.base import GenerativeModel


def _last(history):
    history = np.asarray(history, dtype=float)
    if history.size < 1:
        raise ValueError("empty history")
    return float(history.reshape(-1)[-1])


class ConstantR(GenerativeModel):
    """Rate R0 * X_t, no noise beyond the Poisson draw.

    Args:
        r0 (float): reproductive number, >= 0 (0 gives the trivially extinct process)
    """

    def __init__(self, r0: float = 1.0, **kwargs):
        super().__init__(name="ConstantR")
        if r0 < 0 or not np.isfinite(r0):
            raise ValueError("r0 must be a non-negative real")
        self.r0 = float(r0)

    @property
    def mean_r(self):
        return self.r0

    def sample_rate(self, history, rng, size=None):
        x = _last(history)
        if size is None:
            return self.r0 * x
        return np.full(size, self.r0 * x)

    def rate_cv(self, x):
        return 0.0

    def get_params(self):
        return {'r0': self.r0}


class AdditiveGamma(GenerativeModel):
    """Rate ~ Gamma(alpha * R0 * X_t, rate alpha): each case draws its own emission,
    so the noise averages out as X_t grows.

    Args:
        r0 (float): mean reproductive number
        alpha (float): Gamma rate per case
    """

    def __init__(self, r0: float = 1.0, alpha: float = 1.2, **kwargs):
        super().__init__(name="AdditiveGamma")
        if r0 <= 0 or alpha <= 0:
            raise ValueError("r0 and alpha must be positive")
        self.r0 = float(r0)
        self.alpha = float(alpha)

    @property
    def mean_r(self):
        return self.r0

    def sample_rate(self, history, rng, size=None):
        x = _last(history)
        if x <= 0:
            return 0.0 if size is None else np.zeros(size)
        return rng.gamma(self.alpha * self.r0 * x, 1.0 / self.alpha, size=size)

    def rate_cv(self, x):
        return (self.alpha * self.r0 * x) ** -0.5 if x > 0 else 0.0

    def get_params(self):
        return {'r0': self.r0, 'alpha': self.alpha}


class MultiplicativeGamma(GenerativeModel):
    """Rate ~ Gamma(alpha * R0, rate alpha / X_t): one shared draw scales the whole
    day's cohort, so the relative noise does not shrink with X_t.

    Args:
        r0 (float): mean reproductive number
        alpha (float): Gamma rate
    """

    def __init__(self, r0: float = 1.0, alpha: float = 1.2, **kwargs):
        super().__init__(name="MultiplicativeGamma")
        if r0 <= 0 or alpha <= 0:
            raise ValueError("r0 and alpha must be positive")
        self.r0 = float(r0)
        self.alpha = float(alpha)

    @property
    def mean_r(self):
        return self.r0

    def sample_rate(self, history, rng, size=None):
        x = _last(history)
        if x <= 0:
            return 0.0 if size is None else np.zeros(size)
        return rng.gamma(self.alpha * self.r0, x / self.alpha, size=size)

    def rate_cv(self, x):
        return (self.alpha * self.r0) ** -0.5

    def get_params(self):
        return {'r0': self.r0, 'alpha': self.alpha}


model_classes = {
    'm0': ConstantR,
    'm1': AdditiveGamma,
    'm2': MultiplicativeGamma,
}


def model_from_name(name: str, r0: float = 1.0, alpha: float = 1.2):
    """'m0' | 'm1' | 'm2' (or the class names) to a model instance."""
    key = str(name).lower()
    aliases = {cls.__name__.lower(): k for k, cls in model_classes.items()}
    key = aliases.get(key, key)
    if key not in model_classes:
        raise ValueError(f"unknown model '{name}', use one of {list(model_classes)}")
    return model_classes[key](r0=r0, alpha=alpha)
