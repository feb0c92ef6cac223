"""Convergence diagnostics: split R-hat and effective sample size."""
from dataclasses import dataclass
import numpy as np
import pandas as pd
from statsmodels.tsa.stattools import acovf
from hetr.tools.exceptions import TooFewDrawsError


def split_chains(arr):
    """Split each chain into two halves (drop the middle point if odd length).

    Args:
        arr (np.ndarray): (n_chains, n_samples)

    Returns:
        np.ndarray of shape (2 * n_chains, n_samples // 2)
    """
    arr = np.asarray(arr, dtype=float)
    half = arr.shape[1] // 2
    return np.vstack([arr[:, :half], arr[:, arr.shape[1] - half :]])


def rhat_classic(arr):
    """Gelman-Rubin potential scale reduction of (n_chains, n_samples)."""
    arr = np.asarray(arr, dtype=float)
    n = arr.shape[1]
    chain_means = arr.mean(axis=1)
    W = arr.var(axis=1, ddof=1).mean()
    B = n * np.var(chain_means, ddof=1)
    if W <= 0:
        return 1.0 if B <= 0 else np.inf
    var_hat = ((n - 1) / n) * W + B / n
    return float(np.sqrt(var_hat / W))


def split_rhat(arr):
    return rhat_classic(split_chains(arr))


def effective_sample_size(arr):
    """Multi-chain ESS from split chains, Geyer initial monotone sequence.

    Args:
        arr (np.ndarray): (n_chains, n_samples)
    """
    x = split_chains(arr)
    m, n = x.shape
    total = m * n
    if n < 4:
        return float(total)
    acov = np.vstack([acovf(chain, fft=True) for chain in x])
    chain_means = x.mean(axis=1)
    mean_var = acov[:, 0].mean() * n / (n - 1.0)
    var_plus = mean_var * (n - 1.0) / n
    if m > 1:
        var_plus += np.var(chain_means, ddof=1)
    if var_plus <= 0:
        return float(total)

    rho = np.zeros(n)
    rho_even = 1.0
    rho[0] = rho_even
    rho_odd = 1.0 - (mean_var - acov[:, 1].mean()) / var_plus
    rho[1] = rho_odd
    t = 1
    while t < n - 3 and rho_even + rho_odd > 0:
        rho_even = 1.0 - (mean_var - acov[:, t + 1].mean()) / var_plus
        rho_odd = 1.0 - (mean_var - acov[:, t + 2].mean()) / var_plus
        if rho_even + rho_odd >= 0:
            rho[t + 1] = rho_even
            rho[t + 2] = rho_odd
        t += 2
    max_t = t - 2
    if rho_even > 0:
        rho[max_t + 1] = rho_even
    # pairwise sums must not increase
    t = 1
    while t <= max_t - 2:
        if rho[t + 1] + rho[t + 2] > rho[t - 1] + rho[t]:
            rho[t + 1] = (rho[t - 1] + rho[t]) / 2.0
            rho[t + 2] = rho[t + 1]
        t += 2
    tau = -1.0 + 2.0 * np.sum(rho[: max_t + 1]) + np.sum(rho[max_t + 1 : max_t + 2])
    tau = max(tau, 1.0 / np.log10(total))
    return float(total / tau)


@dataclass
class Diagnostics:
    """Per-parameter R-hat and effective sample size.

    converged holds when every rhat <= rhat_threshold and every n_eff is at least
    ess_fraction of the retained draws.
    """

    rhat: pd.Series
    n_eff: pd.Series
    converged: bool
    n_draws: int
    rhat_threshold: float = 1.1
    ess_fraction: float = 0.2

    def table(self):
        return pd.DataFrame({'rhat': self.rhat, 'n_eff': self.n_eff})

    def failing(self):
        """Parameters breaking either threshold."""
        bad = (self.rhat > self.rhat_threshold) | (self.n_eff < self.ess_fraction * self.n_draws)
        return list(self.rhat.index[bad.to_numpy()])

    def to_dict(self):
        return {
            'converged': bool(self.converged),
            'n_draws': int(self.n_draws),
            'max_rhat': float(self.rhat.max()),
            'min_n_eff': float(self.n_eff.min()),
            'rhat': {k: float(v) for k, v in self.rhat.items()},
            'n_eff': {k: float(v) for k, v in self.n_eff.items()},
            'failing': self.failing(),
        }


def diagnose(draws, rhat_threshold: float = 1.1, ess_fraction: float = 0.2):
    """Split R-hat and ESS for every scalar parameter.

    Args:
        draws (PosteriorDraws or np.ndarray): draws, or an array shaped
            (n_chains, n_samples) or (n_chains, n_samples, n_params)

    Returns:
        Diagnostics
    """
    if hasattr(draws, 'samples'):
        samples = draws.samples
        names = draws.parameter_names()
        samples = samples[:, :, : len(names)]
    else:
        samples = np.asarray(draws, dtype=float)
        if samples.ndim == 2:
            samples = samples[:, :, None]
        if samples.ndim != 3:
            raise ValueError("draws must be (n_chains, n_samples[, n_params])")
        names = [f"param_{i}" for i in range(samples.shape[2])]
    n_chains, n_samples = samples.shape[:2]
    if n_chains < 2 or n_samples < 10:
        raise TooFewDrawsError(
            f"need at least 2 chains of 10 draws, got {n_chains} x {n_samples}"
        )
    rhat = pd.Series([split_rhat(samples[:, :, i]) for i in range(len(names))], index=names)
    n_eff = pd.Series(
        [effective_sample_size(samples[:, :, i]) for i in range(len(names))], index=names
    )
    total = n_chains * n_samples
    converged = bool(
        np.all(rhat.to_numpy() <= rhat_threshold)
        and np.all(n_eff.to_numpy() >= ess_fraction * total)
    )
    return Diagnostics(rhat, n_eff, converged, total, rhat_threshold, ess_fraction)
