# -*- coding: utf-8 -*-
"""
Base objects shared by the generative models: the law of R, infectivity weights,
and trajectory ensembles.
"""
from dataclasses import dataclass
import numpy as np
import pandas as pd
from hetr.tools.shaping import IncidenceSeries


@dataclass(frozen=True)
class RLawParams:
    """Shape/rate of the Gamma law of the reproductive number.

    Args:
        a (float): shape, > 0
        b (float): rate, > 0
    """

    a: float
    b: float

    def __post_init__(self):
        if not (np.isfinite(self.a) and np.isfinite(self.b)) or self.a <= 0 or self.b <= 0:
            raise ValueError(f"RLawParams needs a > 0 and b > 0, got a={self.a}, b={self.b}")

    @classmethod
    def from_unconstrained(cls, alpha: float, beta: float):
        """a = 1 + e^alpha, b = 1 + e^beta"""
        return cls(1.0 + float(np.exp(alpha)), 1.0 + float(np.exp(beta)))

    @property
    def mean(self):
        return self.a / self.b

    @property
    def cv(self):
        return self.a ** -0.5

    def to_dict(self):
        return {'a': float(self.a), 'b': float(self.b)}


class InfectivityWeights(object):
    """Weights w_1..w_K of the last K days in the renewal rate, summing to 1.

    Args:
        w (array): positive weights, w[0] applies to yesterday
    """

    def __init__(self, w):
        w = np.asarray(w, dtype=float)
        if w.ndim != 1 or w.size < 1 or (w <= 0).any():
            raise ValueError("weights must be a non-empty vector of positive values")
        self.w = w

    def __repr__(self):
        return f"InfectivityWeights(K={self.K})"

    def __len__(self):
        return self.w.size

    @property
    def K(self):
        return self.w.size

    def truncated(self, n: int):
        """First min(n, K) weights renormalized to sum 1."""
        w = self.w[: max(min(int(n), self.K), 0)]
        total = w.sum()
        return w / total if total > 0 else w

    def rate(self, history):
        """Weighted sum of the most recent values (last element is yesterday).

        Uses lag-truncated, renormalized weights when history is shorter than K.
        """
        history = np.asarray(history, dtype=float)
        if history.shape[-1] < 1:
            raise ValueError("empty history")
        w = self.truncated(history.shape[-1])
        recent = history[..., ::-1][..., : w.size]
        return recent @ w

    def matrix(self, T: int):
        """(T, T) matrix W with rate_t = W[t] @ I, row t uses days before t only."""
        W = np.zeros((T, T))
        for t in range(1, T):
            w = self.truncated(t)
            W[t, t - w.size : t] = w[::-1]
        return W

    def to_dict(self):
        return {'K': self.K, 'w': self.w.tolist()}


def infectivity_weights(K: int = 7):
    """Linearly decreasing weights w_s = (K - s + 1) / (K (K + 1) / 2), s = 1..K.

    K=3 gives [1/2, 1/3, 1/6].
    """
    if int(K) != K or K < 1:
        raise ValueError(f"K must be a positive integer, got {K}")
    K = int(K)
    s = np.arange(1, K + 1, dtype=float)
    return InfectivityWeights((K - s + 1) / (K * (K + 1) / 2.0))


class GenerativeModel(object):
    """Base of the forward models.

    Subclasses implement sample_rate(history, rng, size) returning the (possibly random)
    Poisson rate of the next day given recent history, most recent last.

    Args:
        name (str): model name
    """

    history_length = 1

    def __init__(self, name: str = "Uninitiated Model Name"):
        self.name = name

    def __repr__(self):
        params = ", ".join(f"{k}={v}" for k, v in self.get_params().items())
        return f"{self.name}({params})"

    def sample_rate(self, history, rng, size=None):
        raise NotImplementedError

    def rate_cv(self, x):
        """Coefficient of variation of the rate given last incidence x."""
        raise NotImplementedError

    @property
    def mean_r(self):
        raise NotImplementedError

    def get_params(self):
        """Return dict of current parameters."""
        return {}


@dataclass(frozen=True)
class Trajectory:
    incidence: np.ndarray
    truncated_flag: bool = False


class TrajectoryEnsemble(object):
    """Simulated forward paths, days 1..horizon after the seed window.

    Args:
        incidence (np.ndarray): (n_draws, horizon) non-negative integers
        truncated (np.ndarray): (n_draws,) bool, population cap or rate clamp hit
        seed_window (IncidenceSeries): observed days used to start the paths
        rng_seed (int): seed the ensemble was drawn from
        model_name (str): generating model
    """

    def __init__(
        self,
        incidence,
        truncated=None,
        seed_window: IncidenceSeries = None,
        rng_seed: int = None,
        model_name: str = None,
    ):
        incidence = np.asarray(incidence)
        if incidence.ndim != 2 or incidence.shape[0] < 1 or incidence.shape[1] < 1:
            raise ValueError("an ensemble needs at least one trajectory of at least one day")
        if (incidence < 0).any():
            raise ValueError("trajectory values must be non-negative")
        self.incidence = incidence
        self.truncated = (
            np.zeros(incidence.shape[0], dtype=bool)
            if truncated is None
            else np.asarray(truncated, dtype=bool)
        )
        self.seed_window = seed_window
        self.rng_seed = rng_seed
        self.model_name = model_name

    def __repr__(self):
        return (
            f"TrajectoryEnsemble({self.model_name}, {self.n_draws} draws x "
            f"{self.horizon} days, seed={self.rng_seed})"
        )

    @property
    def n_draws(self):
        return self.incidence.shape[0]

    @property
    def horizon(self):
        return self.incidence.shape[1]

    @property
    def trajectories(self):
        return [
            Trajectory(row, bool(flag)) for row, flag in zip(self.incidence, self.truncated)
        ]

    @property
    def fraction_truncated(self):
        return float(self.truncated.mean())

    @property
    def days(self):
        return pd.RangeIndex(1, self.horizon + 1, name='day')

    def forecast_index(self):
        """Calendar dates of the projected days, when the seed window is dated."""
        if self.seed_window is None or len(self.seed_window) == 0:
            return self.days
        return pd.date_range(
            self.seed_window.dates[-1] + pd.Timedelta(days=1), periods=self.horizon, freq='D'
        )

    def mean(self):
        return pd.Series(self.incidence.mean(axis=0), index=self.days)

    def cumulative(self):
        return np.cumsum(self.incidence, axis=1)

    def to_frame(self):
        """Rows are draws, columns are days."""
        return pd.DataFrame(
            self.incidence,
            index=pd.RangeIndex(self.n_draws, name='draw'),
            columns=[str(d) for d in self.days],
        )

    @classmethod
    def from_frame(cls, df: pd.DataFrame, **kwargs):
        return cls(df.to_numpy(dtype=np.int64), **kwargs)

    def summary(self, probs=(0.005, 0.025, 0.5, 0.975, 0.995)):
        env = quantile_envelope(self, list(probs))
        return {
            'model': self.model_name,
            'rng_seed': self.rng_seed,
            'n_draws': self.n_draws,
            'horizon': self.horizon,
            'mean': self.mean().tolist(),
            'quantiles': {str(p): env[p].tolist() for p in env.columns},
            'fraction_truncated': self.fraction_truncated,
        }


def quantile_envelope(e: TrajectoryEnsemble, probs):
    """Per-day empirical quantiles across trajectories, linear interpolation.

    Returns:
        pd.DataFrame indexed by day with one column per probability
    """
    probs = list(probs)
    if not probs:
        raise ValueError("probs must not be empty")
    if any(p < 0 or p > 1 for p in probs):
        raise ValueError("probs must lie in [0, 1]")
    q = np.quantile(e.incidence.astype(float), probs, axis=0, method='linear')
    return pd.DataFrame(q.T, index=e.days, columns=probs)


def stopping_time(e: TrajectoryEnsemble, threshold: int = 50000, horizon: int = 100):
    """Fraction of paths whose cumulative cases reach threshold within horizon days.

    Returns:
        (fraction_reached, hit_times) where hit_times holds the first day (1-based)
        each reaching path got there
    """
    if e.horizon < horizon:
        raise ValueError(f"ensemble horizon {e.horizon} shorter than {horizon}")
    cum = np.cumsum(e.incidence[:, :horizon], axis=1)
    reached = cum >= threshold
    hit = reached.any(axis=1)
    hit_times = (np.argmax(reached, axis=1) + 1)[hit]
    return float(hit.mean()), hit_times.astype(int).tolist()
