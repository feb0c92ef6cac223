"""Gamma and Poisson densities, the Gamma quantile, and Gamma draws by inversion."""
import numpy as np
from scipy import special
from scipy.optimize import brentq

LOG_2PI = np.log(2 * np.pi)


def norm_logpdf(x):
    return -0.5 * np.square(x) - 0.5 * LOG_2PI


def gamma_logpdf(x, shape, rate):
    """Log density of Gamma(shape, rate) at x > 0."""
    return (
        shape * np.log(rate)
        - special.gammaln(shape)
        + (shape - 1) * np.log(x)
        - rate * x
    )


def poisson_logpmf(k, lam):
    """Log mass of Poisson(lam) at integer k; -inf when lam is 0 and k > 0."""
    k = np.asarray(k, dtype=float)
    lam = np.asarray(lam, dtype=float)
    with np.errstate(divide='ignore', invalid='ignore'):
        out = special.xlogy(k, lam) - lam - special.gammaln(k + 1)
    return np.where((lam <= 0) & (k > 0), -np.inf, out)


def gamma_quantile(shape: float, rate: float, level: float, xtol: float = 1e-10):
    """Quantile of Gamma(shape, rate) by bracketed root finding on the regularized
    lower incomplete gamma function.

    Returns 0 at level 0 and inf at level 1.
    """
    if shape <= 0 or rate <= 0:
        raise ValueError("shape and rate must be positive")
    if level < 0 or level > 1:
        raise ValueError("level must be in [0, 1]")
    if level == 0:
        return 0.0
    if level == 1:
        return np.inf
    hi = max(shape, 1.0)
    while special.gammainc(shape, hi) < level:
        hi *= 2.0
        if not np.isfinite(hi):
            return np.inf
    z = brentq(lambda x: special.gammainc(shape, x) - level, 0.0, hi, xtol=xtol)
    return z / rate


def gamma_from_uniform(shape, rate, u):
    """Gamma(shape, rate) draws from uniforms by inversion, vectorized."""
    return special.gammaincinv(shape, u) / rate


def gamma_median(shape: float, rate: float):
    return gamma_quantile(shape, rate, 0.5)
