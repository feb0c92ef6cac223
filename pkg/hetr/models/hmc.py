"""
Gradient-based MCMC for the renewal posterior.

No-U-Turn sampling (slice variant) or static HMC, both with dual-averaging step
size adaptation and a diagonal metric estimated in windows during warmup.
"""
import json
import hashlib
import warnings
from dataclasses import dataclass, asdict
import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from hetr.models.base import InfectivityWeights, infectivity_weights
from hetr.models.likelihood import RenewalPosterior, LatentState, variants
from hetr.tools.exceptions import (
    DegenerateWindowError,
    NonFiniteStateError,
    SeriesTooShortError,
    ConfigError,
)
from hetr.tools.random import stream
from hetr.tools.shaping import IncidenceSeries
from hetr.tools.cpu_count import set_n_jobs


@dataclass
class SamplerConfig:
    """Settings of sample_posterior.

    Args:
        n_chains (int): independent chains, >= 2
        n_warmup (int): adaptation iterations per chain, discarded
        n_samples (int): retained draws per chain
        target_accept (float): dual averaging target in (0, 1)
        max_tree_depth (int): NUTS doubling limit (2^depth leapfrog steps)
        rng_seed (int): seed of the per-chain streams
        algorithm (str): 'nuts' or 'hmc'
        n_leapfrog (int): steps per iteration for static 'hmc'
        adapt_metric (bool): estimate a diagonal metric during warmup
        n_jobs (int or 'auto'): parallel chains
    """

    n_chains: int = 10
    n_warmup: int = 5000
    n_samples: int = 1000
    target_accept: float = 0.8
    max_tree_depth: int = 10
    rng_seed: int = None
    algorithm: str = 'nuts'
    n_leapfrog: int = 32
    adapt_metric: bool = True
    n_jobs: object = 1

    def __post_init__(self):
        if int(self.n_chains) < 2:
            raise ConfigError("n_chains must be >= 2 for convergence diagnostics")
        if int(self.n_warmup) < 0 or int(self.n_samples) < 1:
            raise ConfigError("n_warmup must be >= 0 and n_samples >= 1")
        if not 0 < float(self.target_accept) < 1:
            raise ConfigError("target_accept must lie in (0, 1)")
        if int(self.max_tree_depth) < 1 or int(self.n_leapfrog) < 1:
            raise ConfigError("max_tree_depth and n_leapfrog must be >= 1")
        if self.algorithm not in ('nuts', 'hmc'):
            raise ConfigError(f"algorithm must be 'nuts' or 'hmc', got {self.algorithm}")

    def get_params(self):
        return asdict(self)

    to_dict = get_params

    @classmethod
    def from_dict(cls, params: dict):
        known = {k: v for k, v in params.items() if k in cls.__dataclass_fields__}
        return cls(**known)


class PosteriorDraws(object):
    """Retained draws of (alpha, beta, log I) for one window.

    Args:
        samples (np.ndarray): (n_chains, n_samples, dim) unconstrained coordinates,
            dim may be 2 when latents were not kept
        config (SamplerConfig): sampler settings
        data_digest (str): sha256 of the fitted window
        variant (str): likelihood variant
        latent_days (array): 0-based window days of the latent coordinates
        stats (dict): per-draw sampler statistics, arrays (n_chains, n_samples)
        region (str): label of the window's region
        window_start (str): first date of the window
    """

    def __init__(
        self,
        samples,
        config: SamplerConfig = None,
        data_digest: str = None,
        variant: str = 'multiplicative',
        latent_days=None,
        stats: dict = None,
        region: str = None,
        window_start: str = None,
    ):
        samples = np.asarray(samples, dtype=float)
        if samples.ndim != 3 or samples.shape[0] < 1 or samples.shape[1] < 1 or samples.shape[2] < 2:
            raise ValueError("samples must be (n_chains, n_samples, >= 2) with at least one draw")
        self.samples = samples
        self.config = config
        self.data_digest = data_digest
        self.variant = variant
        self.latent_days = (
            np.zeros(0, dtype=int) if latent_days is None else np.asarray(latent_days, dtype=int)
        )
        self.stats = {} if stats is None else stats
        self.region = region
        self.window_start = window_start

    def __repr__(self):
        return (
            f"PosteriorDraws({self.region}, {self.variant}, {self.n_chains} chains x "
            f"{self.n_samples} draws)"
        )

    @classmethod
    def from_states(cls, chains, **kwargs):
        """Build from a list of chains, each a list of LatentState."""
        samples = np.array([[s.to_vector() for s in chain] for chain in chains], dtype=float)
        return cls(samples, **kwargs)

    @property
    def n_chains(self):
        return self.samples.shape[0]

    @property
    def n_samples(self):
        return self.samples.shape[1]

    @property
    def n_draws(self):
        return self.n_chains * self.n_samples

    @property
    def has_latent(self):
        return self.samples.shape[2] == 2 + self.latent_days.size

    @property
    def alpha(self):
        return self.samples[:, :, 0]

    @property
    def beta(self):
        return self.samples[:, :, 1]

    @property
    def a(self):
        return 1.0 + np.exp(self.alpha)

    @property
    def b(self):
        return 1.0 + np.exp(self.beta)

    @property
    def mean_r(self):
        """Draws of E[R] = a / b, (n_chains, n_samples)."""
        return self.a / self.b

    @property
    def chains(self):
        return [
            [LatentState.from_vector(row, self.latent_days) for row in chain]
            for chain in self.samples
        ]

    def flat_alpha_beta(self):
        return self.alpha.reshape(-1), self.beta.reshape(-1)

    def flat_samples(self):
        return self.samples.reshape(-1, self.samples.shape[2])

    def parameter_names(self):
        names = ['alpha', 'beta']
        if self.has_latent:
            names += [f"log_I_{d + 1}" for d in self.latent_days]
        return names

    @property
    def divergence_rate(self):
        div = self.stats.get('divergent')
        return float(np.mean(div)) if div is not None and np.size(div) else 0.0

    def to_dict(self):
        out = {
            'region': self.region,
            'window_start': self.window_start,
            'variant': self.variant,
            'data_digest': self.data_digest,
            'config': None if self.config is None else self.config.to_dict(),
            'latent_days': self.latent_days.tolist(),
            'chains': [
                {'alpha': chain[:, 0].tolist(), 'beta': chain[:, 1].tolist()}
                for chain in self.samples
            ],
            'divergence_rate': self.divergence_rate,
            'sampler_stats': {
                k: np.asarray(v).tolist() for k, v in self.stats.items()
            },
        }
        return out

    def latent_frame(self):
        """Latent log I draws, one row per (chain, draw), for the CSV sidecar."""
        if not self.has_latent:
            raise ValueError("these draws carry no latent coordinates")
        index = pd.MultiIndex.from_product(
            [range(self.n_chains), range(self.n_samples)], names=['chain', 'draw']
        )
        return pd.DataFrame(
            self.samples[:, :, 2:].reshape(self.n_draws, -1),
            index=index,
            columns=[f"log_I_{d + 1}" for d in self.latent_days],
        )

    @classmethod
    def from_dict(cls, record: dict, latent: pd.DataFrame = None):
        alpha = np.array([c['alpha'] for c in record['chains']], dtype=float)
        beta = np.array([c['beta'] for c in record['chains']], dtype=float)
        parts = [alpha[:, :, None], beta[:, :, None]]
        latent_days = record.get('latent_days', [])
        if latent is not None and len(latent_days):
            values = latent.to_numpy(dtype=float).reshape(alpha.shape[0], alpha.shape[1], -1)
            parts.append(values)
        config = record.get('config')
        return cls(
            np.concatenate(parts, axis=2),
            config=None if config is None else SamplerConfig.from_dict(config),
            data_digest=record.get('data_digest'),
            variant=record.get('variant', 'multiplicative'),
            latent_days=latent_days,
            stats={k: np.asarray(v) for k, v in record.get('sampler_stats', {}).items()},
            region=record.get('region'),
            window_start=record.get('window_start'),
        )


def adaptation_windows(n_warmup: int, init_buffer: int = 75, term_buffer: int = 50, base_window: int = 25):
    """Warmup iterations [start, end) over which the diagonal metric is estimated.

    Window sizes double; the last window is stretched to the terminal buffer.
    """
    if n_warmup < 20:
        return []
    if init_buffer + term_buffer + base_window > n_warmup:
        init_buffer = int(0.15 * n_warmup)
        term_buffer = int(0.1 * n_warmup)
        base_window = n_warmup - init_buffer - term_buffer
    end_adapt = n_warmup - term_buffer
    windows = []
    start, size = init_buffer, base_window
    while start < end_adapt:
        end = start + size
        if end + 2 * size > end_adapt:
            end = end_adapt
        windows.append((start, end))
        start, size = end, size * 2
    return windows


class DualAveraging(object):
    """Step size adaptation towards a target acceptance statistic."""

    def __init__(self, step_size: float, target: float = 0.8, gamma: float = 0.05, t0: float = 10.0, kappa: float = 0.75):
        self.target = target
        self.gamma = gamma
        self.t0 = t0
        self.kappa = kappa
        self.restart(step_size)

    def restart(self, step_size):
        self.mu = np.log(10 * step_size)
        self.h_bar = 0.0
        self.log_eps_bar = 0.0
        self.m = 0

    def update(self, accept_stat):
        self.m += 1
        m = self.m
        self.h_bar = (1 - 1 / (m + self.t0)) * self.h_bar + (self.target - accept_stat) / (m + self.t0)
        log_eps = self.mu - np.sqrt(m) / self.gamma * self.h_bar
        eta = m ** -self.kappa
        self.log_eps_bar = eta * log_eps + (1 - eta) * self.log_eps_bar
        return float(np.exp(log_eps))

    @property
    def final_step_size(self):
        return float(np.exp(self.log_eps_bar))


class _Tree(object):
    __slots__ = (
        'theta_minus', 'r_minus', 'grad_minus',
        'theta_plus', 'r_plus', 'grad_plus',
        'theta_prop', 'grad_prop', 'logp_prop',
        'n', 's', 'alpha', 'n_alpha', 'divergent',
    )


class HamiltonianSampler(object):
    """One chain of NUTS or static HMC on a target exposing value_and_grad.

    Args:
        target: object with value_and_grad(theta) -> (logp, grad)
        config (SamplerConfig): settings
        rng (np.random.Generator): chain stream
    """

    def __init__(self, target, config: SamplerConfig, rng):
        self.target = target
        self.config = config
        self.rng = rng
        self.inv_metric = None

    def _value_and_grad(self, theta):
        with np.errstate(all='ignore'):
            logp, grad = self.target.value_and_grad(theta)
        if not np.isfinite(logp) or not np.isfinite(grad).all():
            return -np.inf, np.zeros_like(theta)
        return logp, grad

    def kinetic(self, r):
        return 0.5 * np.dot(self.inv_metric * r, r)

    def leapfrog(self, theta, r, grad, eps):
        r = r + 0.5 * eps * grad
        theta = theta + eps * self.inv_metric * r
        logp, grad = self._value_and_grad(theta)
        r = r + 0.5 * eps * grad
        return theta, r, grad, logp

    def momentum(self):
        return self.rng.standard_normal(self.inv_metric.size) / np.sqrt(self.inv_metric)

    def find_reasonable_epsilon(self, theta, grad, logp):
        eps = 1.0
        r = self.momentum()
        joint0 = logp - self.kinetic(r)
        _, r1, _, logp1 = self.leapfrog(theta, r, grad, eps)
        log_ratio = logp1 - self.kinetic(r1) - joint0
        if not np.isfinite(log_ratio):
            log_ratio = -np.inf
        direction = 1 if log_ratio > np.log(0.5) else -1
        for _ in range(100):
            if direction * log_ratio <= -direction * np.log(2):
                break
            eps = eps * 2.0**direction
            _, r1, _, logp1 = self.leapfrog(theta, r, grad, eps)
            log_ratio = logp1 - self.kinetic(r1) - joint0
            if not np.isfinite(log_ratio):
                log_ratio = -np.inf
            if eps < 1e-8 or eps > 1e4:
                break
        return float(np.clip(eps, 1e-8, 1e4))

    def _no_uturn(self, theta_minus, theta_plus, r_minus, r_plus):
        delta = theta_plus - theta_minus
        return (
            np.dot(delta, self.inv_metric * r_minus) >= 0
            and np.dot(delta, self.inv_metric * r_plus) >= 0
        )

    def build_tree(self, theta, r, grad, log_u, v, j, eps, joint0):
        if j == 0:
            theta1, r1, grad1, logp1 = self.leapfrog(theta, r, grad, v * eps)
            joint = logp1 - self.kinetic(r1)
            if not np.isfinite(joint):
                joint = -np.inf
            tree = _Tree()
            tree.theta_minus = tree.theta_plus = tree.theta_prop = theta1
            tree.r_minus = tree.r_plus = r1
            tree.grad_minus = tree.grad_plus = tree.grad_prop = grad1
            tree.logp_prop = logp1
            tree.n = int(log_u <= joint)
            tree.s = joint > log_u - 1000
            tree.divergent = not tree.s
            tree.alpha = float(np.exp(min(0.0, joint - joint0))) if np.isfinite(joint) else 0.0
            tree.n_alpha = 1
            return tree
        tree = self.build_tree(theta, r, grad, log_u, v, j - 1, eps, joint0)
        if tree.s:
            if v == -1:
                other = self.build_tree(
                    tree.theta_minus, tree.r_minus, tree.grad_minus, log_u, v, j - 1, eps, joint0
                )
                tree.theta_minus, tree.r_minus, tree.grad_minus = (
                    other.theta_minus, other.r_minus, other.grad_minus
                )
            else:
                other = self.build_tree(
                    tree.theta_plus, tree.r_plus, tree.grad_plus, log_u, v, j - 1, eps, joint0
                )
                tree.theta_plus, tree.r_plus, tree.grad_plus = (
                    other.theta_plus, other.r_plus, other.grad_plus
                )
            total = tree.n + other.n
            if other.n > 0 and self.rng.random() < other.n / total:
                tree.theta_prop, tree.grad_prop, tree.logp_prop = (
                    other.theta_prop, other.grad_prop, other.logp_prop
                )
            tree.s = other.s and self._no_uturn(
                tree.theta_minus, tree.theta_plus, tree.r_minus, tree.r_plus
            )
            tree.n = total
            tree.alpha += other.alpha
            tree.n_alpha += other.n_alpha
            tree.divergent = tree.divergent or other.divergent
        return tree

    def nuts_transition(self, theta, grad, logp, eps):
        r0 = self.momentum()
        joint0 = logp - self.kinetic(r0)
        log_u = joint0 - self.rng.exponential()
        theta_minus = theta_plus = theta
        r_minus = r_plus = r0
        grad_minus = grad_plus = grad
        n, s, depth = 1, True, 0
        alpha_sum, n_alpha, divergent = 0.0, 0, False
        while s and depth < self.config.max_tree_depth:
            v = 1 if self.rng.random() < 0.5 else -1
            if v == -1:
                tree = self.build_tree(theta_minus, r_minus, grad_minus, log_u, v, depth, eps, joint0)
                theta_minus, r_minus, grad_minus = tree.theta_minus, tree.r_minus, tree.grad_minus
            else:
                tree = self.build_tree(theta_plus, r_plus, grad_plus, log_u, v, depth, eps, joint0)
                theta_plus, r_plus, grad_plus = tree.theta_plus, tree.r_plus, tree.grad_plus
            if tree.s and self.rng.random() < min(1.0, tree.n / n):
                theta, grad, logp = tree.theta_prop, tree.grad_prop, tree.logp_prop
            n += tree.n
            alpha_sum += tree.alpha
            n_alpha += tree.n_alpha
            divergent = divergent or tree.divergent
            s = tree.s and self._no_uturn(theta_minus, theta_plus, r_minus, r_plus)
            depth += 1
        return theta, grad, logp, {
            'accept_stat': alpha_sum / max(n_alpha, 1),
            'divergent': divergent,
            'tree_depth': depth,
            'n_leapfrog': n_alpha,
        }

    def hmc_transition(self, theta, grad, logp, eps):
        r0 = self.momentum()
        joint0 = logp - self.kinetic(r0)
        theta1, r1, grad1, logp1 = theta, r0, grad, logp
        for _ in range(self.config.n_leapfrog):
            theta1, r1, grad1, logp1 = self.leapfrog(theta1, r1, grad1, eps)
            if not np.isfinite(logp1):
                break
        joint = logp1 - self.kinetic(r1)
        if not np.isfinite(joint):
            joint = -np.inf
        accept_stat = float(np.exp(min(0.0, joint - joint0))) if np.isfinite(joint) else 0.0
        divergent = joint < joint0 - 1000
        if self.rng.random() < accept_stat:
            theta, grad, logp = theta1, grad1, logp1
        return theta, grad, logp, {
            'accept_stat': accept_stat,
            'divergent': divergent,
            'tree_depth': 0,
            'n_leapfrog': self.config.n_leapfrog,
        }

    def run(self, theta0):
        cfg = self.config
        dim = theta0.size
        self.inv_metric = np.ones(dim)
        transition = self.nuts_transition if cfg.algorithm == 'nuts' else self.hmc_transition
        theta = np.asarray(theta0, dtype=float)
        logp, grad = self._value_and_grad(theta)
        eps = self.find_reasonable_epsilon(theta, grad, logp)
        adapter = DualAveraging(eps, target=cfg.target_accept)
        windows = adaptation_windows(cfg.n_warmup) if cfg.adapt_metric else []
        window_ends = {end: start for start, end in windows}
        window_draws = []

        for m in range(cfg.n_warmup):
            theta, grad, logp, info = transition(theta, grad, logp, eps)
            eps = adapter.update(info['accept_stat'])
            if any(start <= m < end for start, end in windows):
                window_draws.append(theta)
            if (m + 1) in window_ends and len(window_draws) > 2:
                n = len(window_draws)
                var = np.var(np.asarray(window_draws), axis=0, ddof=1)
                self.inv_metric = (n / (n + 5.0)) * var + 1e-3 * (5.0 / (n + 5.0))
                window_draws = []
                eps = self.find_reasonable_epsilon(theta, grad, logp)
                adapter.restart(eps)
        if cfg.n_warmup > 0:
            eps = adapter.final_step_size

        samples = np.empty((cfg.n_samples, dim))
        stats = {k: np.empty(cfg.n_samples) for k in ('accept_stat', 'divergent', 'tree_depth', 'n_leapfrog')}
        for m in range(cfg.n_samples):
            theta, grad, logp, info = transition(theta, grad, logp, eps)
            samples[m] = theta
            for k in stats:
                stats[k][m] = info[k]
        stats['step_size'] = np.full(cfg.n_samples, eps)
        return samples, stats


def _run_chain(values, weights, variant, config, chain):
    target = RenewalPosterior(values, weights, variant)
    rng = stream(config.rng_seed, chain)
    for _ in range(100):
        theta0 = target.initial_point(rng)
        if np.isfinite(target.log_joint(theta0)):
            break
    else:
        raise NonFiniteStateError(
            f"chain {chain}: no finite starting point in 100 tries, log density is -inf"
        )
    sampler = HamiltonianSampler(target, config, rng)
    return sampler.run(theta0)


def _digest(data):
    if isinstance(data, IncidenceSeries):
        return data.digest()
    values = [float(x) for x in np.asarray(data, dtype=float).reshape(-1)]
    return hashlib.sha256(json.dumps(values).encode('utf-8')).hexdigest()


def sample_posterior(
    data,
    weights: InfectivityWeights = None,
    config: SamplerConfig = None,
    variant: str = 'multiplicative',
    verbose: int = 0,
):
    """Fit the renewal model to one window.

    Args:
        data (IncidenceSeries or array): window incidence, at least 2 days
        weights (InfectivityWeights): renewal weights, default K=7
        config (SamplerConfig): sampler settings, rng_seed required
        variant (str): 'multiplicative' or 'additive'
        verbose (int): > 0 prints a line per fit, > 1 joblib progress

    Returns:
        PosteriorDraws
    """
    if variant not in variants:
        raise ValueError(f"variant must be one of {variants}")
    config = SamplerConfig() if config is None else config
    if config.rng_seed is None:
        raise ConfigError("SamplerConfig.rng_seed is required")
    weights = infectivity_weights(7) if weights is None else weights
    values = data.values if isinstance(data, IncidenceSeries) else np.asarray(data, dtype=float)
    if values.size < 2:
        raise SeriesTooShortError("need at least 2 days to fit")
    target = RenewalPosterior(values, weights, variant)
    if target.n_latent == 0:
        raise DegenerateWindowError("window has no positive incidence before its last day")
    unreachable = target.unreachable_days
    if unreachable.size:
        raise DegenerateWindowError(
            f"window days {(unreachable + 1).tolist()} have cases but none in the {weights.K} days before; "
            "start the window later"
        )

    n_jobs = min(set_n_jobs(config.n_jobs, verbose=verbose), config.n_chains)
    if n_jobs > 1:
        results = Parallel(n_jobs=n_jobs, verbose=verbose > 1)(
            delayed(_run_chain)(values, weights, variant, config, chain)
            for chain in range(config.n_chains)
        )
    else:
        results = [
            _run_chain(values, weights, variant, config, chain)
            for chain in range(config.n_chains)
        ]
    samples = np.stack([r[0] for r in results])
    stats = {k: np.stack([r[1][k] for r in results]) for k in results[0][1]}
    stats['divergent'] = stats['divergent'].astype(bool)
    draws = PosteriorDraws(
        samples,
        config=config,
        data_digest=_digest(data),
        variant=variant,
        latent_days=target.latent_days,
        stats=stats,
        region=getattr(data, 'region', None),
        window_start=(
            data.start_date.strftime('%Y-%m-%d')
            if isinstance(data, IncidenceSeries) and len(data)
            else None
        ),
    )
    if draws.divergence_rate > 0.2:
        warnings.warn(
            f"{draws.divergence_rate:.1%} of post-warmup transitions diverged",
            RuntimeWarning,
        )
    if verbose > 0:
        print(
            f"Fit {draws.region} {variant}: {config.n_chains} chains x {config.n_samples} draws, "
            f"mean E[R] {draws.mean_r.mean():.3f}, divergences {draws.divergence_rate:.1%}"
        )
    return draws
