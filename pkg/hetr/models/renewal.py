"""
Renewal model with a Gamma law of R, and the Monte Carlo trajectory simulator.
"""
import warnings
import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from hetr.models.base import (
    GenerativeModel,
    RLawParams,
    InfectivityWeights,
    TrajectoryEnsemble,
    infectivity_weights,
)
from hetr.tools.exceptions import MissingPopulationError
from hetr.tools.random import stream, R_LAYER, POISSON_LAYER
from hetr.tools.shaping import IncidenceSeries
from hetr.tools.special import gamma_from_uniform
from hetr.tools.cpu_count import set_n_jobs

# numpy's Poisson sampler refuses rates near 1e19
MAX_RATE = 1e15


class FittedRenewal(GenerativeModel):
    """X_t ~ Poisson(sum_k w_k I_{t-k}) with a Gamma(a, b) law of R behind I_t.

    multiplicative: I_t = X_t * R_t, R_t ~ Gamma(a, b).
    additive: I_t is the sum of X_t independent Gamma(a, b) draws, so I_t = X_t * Rbar_t
    with the day's mean Rbar_t ~ Gamma(a X_t, b X_t).

    Holds one (a, b) or a whole posterior sample of them; every simulated
    trajectory picks one pair and keeps it for its whole path.

    Args:
        params (RLawParams or list of RLawParams): law(s) of R
        weights (InfectivityWeights): renewal weights, default K=7 linear
        intervention: optional object with r_from_uniform(a, b, u) replacing plain
            inversion of Gamma(a, b), see hetr.models.interventions.InterventionSpec
        variant (str): 'multiplicative' or 'additive'
    """

    def __init__(self, params, weights: InfectivityWeights = None, intervention=None, variant: str = 'multiplicative'):
        super().__init__(name="FittedRenewal")
        if isinstance(params, RLawParams):
            params = [params]
        params = list(params)
        if not params:
            raise ValueError("FittedRenewal needs at least one RLawParams")
        self.a = np.array([p.a for p in params], dtype=float)
        self.b = np.array([p.b for p in params], dtype=float)
        self.weights = infectivity_weights(7) if weights is None else weights
        self.intervention = intervention
        self.variant = _check_variant(variant)

    @classmethod
    def from_arrays(cls, a, b, weights=None, intervention=None, variant='multiplicative'):
        obj = cls.__new__(cls)
        GenerativeModel.__init__(obj, name="FittedRenewal")
        obj.a = np.asarray(a, dtype=float).reshape(-1)
        obj.b = np.asarray(b, dtype=float).reshape(-1)
        if obj.a.size < 1 or obj.a.size != obj.b.size:
            raise ValueError("a and b must be non-empty and of equal length")
        if (obj.a <= 0).any() or (obj.b <= 0).any():
            raise ValueError("a and b must be positive")
        obj.weights = infectivity_weights(7) if weights is None else weights
        obj.intervention = intervention
        obj.variant = _check_variant(variant)
        return obj

    @classmethod
    def from_posterior(cls, draws, weights=None, intervention=None):
        """Mixture over every retained posterior draw of (alpha, beta), in the fit's variant."""
        alpha, beta = draws.flat_alpha_beta()
        return cls.from_arrays(
            1.0 + np.exp(alpha),
            1.0 + np.exp(beta),
            weights=weights,
            intervention=intervention,
            variant=getattr(draws, 'variant', 'multiplicative'),
        )

    def with_intervention(self, intervention):
        return FittedRenewal.from_arrays(self.a, self.b, self.weights, intervention, self.variant)

    @property
    def history_length(self):
        return self.weights.K

    @property
    def n_params(self):
        return self.a.size

    @property
    def mean_r(self):
        return float(np.mean(self.a / self.b))

    def rate_cv(self, x):
        """CV of I_t / X_t over the mixture of R laws, given X_t = x."""
        m = np.mean(self.a / self.b)
        if self.variant == 'additive':
            second = np.mean(self.a * (self.a + 1.0 / x) / self.b**2)
        else:
            second = np.mean(self.a * (self.a + 1) / self.b**2)
        return float(np.sqrt(max(second - m**2, 0.0)) / m)

    def sample_rate(self, history, rng=None, size=None):
        """Renewal rate from latent secondary-case history (most recent last)."""
        lam = float(self.weights.rate(history))
        return lam if size is None else np.full(size, lam)

    def r_from_uniform(self, index, u, x=None):
        """Per-case R for param rows `index` from uniforms u, shape (len(index), days).

        The additive variant needs the day's counts x (same shape as u); days with
        x = 0 get the plain Gamma(a, b) draw, which multiplies to I_t = 0.
        """
        a = self.a[index][:, None]
        b = self.b[index][:, None]
        if self.variant == 'additive':
            if x is None:
                raise ValueError("the additive variant needs the day's counts")
            x = np.asarray(x, dtype=float)
            scale = np.where(x > 0, x, 1.0)
            a, b = a * scale, b * scale
        if self.intervention is None:
            return gamma_from_uniform(a, b, u)
        return self.intervention.r_from_uniform(a, b, u)

    def get_params(self):
        params = {
            'n_params': int(self.n_params),
            'mean_r': self.mean_r,
            'K': self.weights.K,
            'variant': self.variant,
        }
        if self.intervention is not None:
            params['intervention'] = self.intervention.to_dict()
        return params


def _check_variant(variant):
    if variant not in ('multiplicative', 'additive'):
        raise ValueError(f"variant must be multiplicative or additive, got {variant}")
    return variant


def step_incidence(model: GenerativeModel, history, rng, size=None):
    """One Poisson draw with the model's (possibly random) rate.

    Args:
        model (GenerativeModel): any model
        history (array): recent values, most recent last; incidence for the single-lag
            models, latent I values for FittedRenewal
        rng (np.random.Generator): random stream
        size (int): number of independent draws, None for a scalar

    Returns:
        int or np.ndarray of int
    """
    history = np.asarray(history, dtype=float)
    if history.size == 0:
        raise ValueError("empty history")
    lam = model.sample_rate(history, rng, size=size)
    return rng.poisson(np.minimum(lam, MAX_RATE))


def _draw_count(lam, rng, cap, max_rejections):
    truncated = False
    if lam > MAX_RATE:
        lam = MAX_RATE
        truncated = True
    if lam <= 0:
        return 0, truncated
    x = rng.poisson(lam)
    if cap is not None and x > cap:
        redraws = rng.poisson(lam, size=max_rejections)
        accepted = redraws[redraws <= cap]
        if accepted.size:
            x = accepted[0]
        else:
            x = cap
            truncated = True
    return int(x), truncated


def _simulate_branching_block(model, x0, horizon, indices, rng_seed, cap, max_rejections):
    out = np.zeros((len(indices), horizon), dtype=np.int64)
    flags = np.zeros(len(indices), dtype=bool)
    for row, i in enumerate(indices):
        rng_r = stream(rng_seed, int(i), R_LAYER)
        rng_p = stream(rng_seed, int(i), POISSON_LAYER)
        x = x0
        for t in range(horizon):
            lam = model.sample_rate([x], rng_r)
            x, clipped = _draw_count(lam, rng_p, cap, max_rejections)
            flags[row] |= clipped
            out[row, t] = x
    return out, flags


def _simulate_renewal_block(model, seed, horizon, indices, rng_seed, cap, max_rejections):
    S = seed.size
    days = S + horizon
    K = model.weights.K
    U = np.empty((len(indices), days))
    J = np.zeros(len(indices), dtype=int)
    for row, i in enumerate(indices):
        rng_r = stream(rng_seed, int(i), R_LAYER)
        if model.n_params > 1:
            J[row] = rng_r.integers(model.n_params)
        U[row] = rng_r.random(days)
    additive = model.variant == 'additive'
    if additive:
        # the additive law depends on each day's count, so R is drawn as counts arrive
        R = np.zeros((len(indices), days))
        R[:, :S] = model.r_from_uniform(J, U[:, :S], np.broadcast_to(seed, (len(indices), S)))
    else:
        R = model.r_from_uniform(J, U)

    w_full = model.weights.truncated(K)[::-1]
    out = np.zeros((len(indices), horizon), dtype=np.int64)
    flags = np.zeros(len(indices), dtype=bool)
    for row, i in enumerate(indices):
        rng_p = stream(rng_seed, int(i), POISSON_LAYER)
        latent = np.zeros(days)
        latent[:S] = seed * R[row, :S]
        for t in range(horizon):
            pos = S + t
            if pos >= K:
                lam = float(latent[pos - K : pos] @ w_full)
            else:
                lam = float(model.weights.rate(latent[:pos]))
            x, clipped = _draw_count(lam, rng_p, cap, max_rejections)
            flags[row] |= clipped
            out[row, t] = x
            if additive and x > 0:
                R[row, pos] = model.r_from_uniform(J[row : row + 1], U[row : row + 1, pos : pos + 1], [[x]])[0, 0]
            latent[pos] = x * R[row, pos]
    return out, flags


def as_seed_window(seed_window, population=None):
    """Accept an IncidenceSeries or bare values for a synthetic start."""
    if isinstance(seed_window, IncidenceSeries):
        return seed_window
    values = np.atleast_1d(np.asarray(seed_window, dtype=float))
    return IncidenceSeries(
        region='synthetic',
        incidence=pd.Series(values, index=pd.date_range('2020-01-01', periods=values.size)),
        population=population,
    )


def simulate(
    model: GenerativeModel,
    seed_window,
    horizon: int,
    n_draws: int,
    population_cap_fraction: float = 0.01,
    rng_seed: int = None,
    max_rejections: int = 100,
    block_size: int = 250,
    n_jobs=1,
    verbose: int = 0,
):
    """Draw n_draws independent forward paths of horizon days.

    Args:
        model (GenerativeModel): ConstantR, AdditiveGamma, MultiplicativeGamma or FittedRenewal
        seed_window (IncidenceSeries or array): observed days the paths continue from
        horizon (int): days to project
        n_draws (int): number of trajectories
        population_cap_fraction (float): reject daily counts above this share of the
            population, None to disable
        rng_seed (int): seed of the per-trajectory streams
        max_rejections (int): redraws before clamping to the cap and flagging the path
        block_size (int): trajectories per parallel job, does not change results
        n_jobs (int or 'auto'): parallel jobs
        verbose (int): > 0 prints a summary, > 1 passes verbosity to joblib

    Returns:
        TrajectoryEnsemble
    """
    if int(horizon) < 1:
        raise ValueError("horizon must be >= 1")
    if int(n_draws) < 1:
        raise ValueError("n_draws must be >= 1")
    if rng_seed is None:
        raise ValueError("rng_seed is required")
    horizon, n_draws = int(horizon), int(n_draws)
    seed_window = as_seed_window(seed_window)
    if len(seed_window) == 0:
        raise ValueError("seed_window must not be empty")
    cap = None
    if population_cap_fraction is not None:
        if seed_window.population is None:
            raise MissingPopulationError(
                f"population of {seed_window.region} needed for a population cap"
            )
        cap = int(np.floor(population_cap_fraction * seed_window.population))

    seed = seed_window.values
    if isinstance(model, FittedRenewal):
        worker = _simulate_renewal_block
        start = seed
    else:
        worker = _simulate_branching_block
        start = float(seed[-1])
    n_blocks = max(1, int(np.ceil(n_draws / max(int(block_size), 1))))
    blocks = np.array_split(np.arange(n_draws), n_blocks)
    n_jobs = min(set_n_jobs(n_jobs, verbose=verbose), n_blocks)
    if n_jobs > 1:
        results = Parallel(n_jobs=n_jobs, verbose=verbose > 1)(
            delayed(worker)(model, start, horizon, idx, rng_seed, cap, max_rejections)
            for idx in blocks
        )
    else:
        results = [
            worker(model, start, horizon, idx, rng_seed, cap, max_rejections)
            for idx in blocks
        ]
    ensemble = TrajectoryEnsemble(
        np.concatenate([r[0] for r in results], axis=0),
        np.concatenate([r[1] for r in results]),
        seed_window=seed_window,
        rng_seed=rng_seed,
        model_name=model.name,
    )
    if ensemble.fraction_truncated > 0.05:
        warnings.warn(
            f"{ensemble.fraction_truncated:.1%} of {model.name} trajectories hit the "
            "population cap or rate limit",
            RuntimeWarning,
        )
    if verbose > 0:
        print(
            f"Simulated {n_draws} {model.name} trajectories over {horizon} days, "
            f"{ensemble.fraction_truncated:.1%} truncated"
        )
    return ensemble
