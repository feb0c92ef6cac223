"""
Policy scenarios acting on the law of R: capping its upper tail or shrinking its mean.
"""
from dataclasses import dataclass
import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from hetr.models.base import RLawParams, TrajectoryEnsemble, quantile_envelope
from hetr.models.renewal import FittedRenewal, simulate
from hetr.tools.special import gamma_quantile, gamma_from_uniform
from hetr.tools.cpu_count import set_n_jobs

kind_aliases = {
    'tail_cap': 'tail_cap',
    'cap': 'tail_cap',
    'mean_shrink': 'mean_shrink',
    'shrink': 'mean_shrink',
}


@dataclass(frozen=True)
class InterventionSpec:
    """An intervention on R ~ Gamma(a, b).

    tail_cap clamps R at its level-quantile, mean_shrink draws from Gamma(level * a, b).
    level = 1 leaves the law unchanged for both kinds.

    Args:
        kind (str): 'tail_cap' or 'mean_shrink' ('cap' and 'shrink' accepted)
        level (float): stringency in (0, 1], lower is stricter
    """

    kind: str = 'tail_cap'
    level: float = 1.0

    def __post_init__(self):
        kind = kind_aliases.get(str(self.kind).lower())
        if kind is None:
            raise ValueError(f"kind must be tail_cap or mean_shrink, got {self.kind}")
        object.__setattr__(self, 'kind', kind)
        if not 0 < float(self.level) <= 1:
            raise ValueError(f"level must lie in (0, 1], got {self.level}")
        object.__setattr__(self, 'level', float(self.level))

    @classmethod
    def identity(cls, kind: str = 'tail_cap'):
        return cls(kind, 1.0)

    @property
    def is_identity(self):
        return self.level == 1.0

    @property
    def label(self):
        return f"{self.kind}_{self.level:.2f}"

    def cap(self, params: RLawParams):
        """Q_level of Gamma(a, b), the most R can be under tail_cap."""
        return gamma_quantile(params.a, params.b, self.level)

    def r_from_uniform(self, a, b, u):
        """Intervened R from uniforms by inversion, so every intervention shares random numbers."""
        if self.is_identity:
            return gamma_from_uniform(a, b, u)
        if self.kind == 'tail_cap':
            return gamma_from_uniform(a, b, np.minimum(u, self.level))
        return gamma_from_uniform(self.level * np.asarray(a), b, u)

    def to_dict(self):
        return {'kind': self.kind, 'level': self.level}


def draw_intervened_r(params: RLawParams, spec: InterventionSpec, rng, size=None):
    """One (or size) R draws from the intervened law."""
    u = rng.random(size)
    return spec.r_from_uniform(params.a, params.b, u)


@dataclass
class ScenarioResult:
    baseline: TrajectoryEnsemble
    intervened: TrajectoryEnsemble
    spec: InterventionSpec
    reduction: float
    reduction_median: float

    def to_row(self):
        day = self.baseline.horizon
        return {
            'kind': self.spec.kind,
            'level': self.spec.level,
            'reduction': self.reduction,
            'reduction_median': self.reduction_median,
            'baseline_mean_final': float(self.baseline.incidence[:, day - 1].mean()),
            'intervened_mean_final': float(self.intervened.incidence[:, day - 1].mean()),
            'intervened_q95_final': float(
                np.quantile(self.intervened.incidence[:, day - 1], 0.95)
            ),
        }


def _ratio_reduction(intervened, baseline):
    if baseline == 0:
        return 0.0 if intervened == 0 else np.nan
    return float(1.0 - intervened / baseline)


def reduction(baseline: TrajectoryEnsemble, intervened: TrajectoryEnsemble, day: int = None, statistic: str = 'mean'):
    """1 - P / P0 with P the ensemble mean (or median) incidence at `day` (default last)."""
    day = baseline.horizon if day is None else int(day)
    if day < 1 or day > min(baseline.horizon, intervened.horizon):
        raise ValueError(f"day {day} outside the simulated horizon")
    agg = np.median if statistic == 'median' else np.mean
    return _ratio_reduction(
        float(agg(intervened.incidence[:, day - 1])), float(agg(baseline.incidence[:, day - 1]))
    )


def _as_renewal(draws, weights=None):
    if isinstance(draws, FittedRenewal):
        return draws
    if isinstance(draws, RLawParams):
        return FittedRenewal(draws, weights)
    return FittedRenewal.from_posterior(draws, weights)


def simulate_scenario(
    draws,
    spec: InterventionSpec,
    seed_window,
    horizon: int = 30,
    n_draws: int = 1000,
    rng_seed: int = None,
    weights=None,
    population_cap_fraction: float = 0.01,
    baseline: TrajectoryEnsemble = None,
    n_jobs=1,
    verbose: int = 0,
):
    """Paired baseline and intervened projections with common random numbers.

    Args:
        draws (PosteriorDraws, FittedRenewal or RLawParams): law(s) of R to project with
        spec (InterventionSpec): intervention
        seed_window (IncidenceSeries): observed days to continue from
        horizon (int): days to project, reductions are read at the last day
        n_draws (int): trajectories per ensemble
        rng_seed (int): shared by baseline and intervened ensembles
        baseline (TrajectoryEnsemble): reuse an already simulated baseline

    Returns:
        ScenarioResult
    """
    model = _as_renewal(draws, weights)
    kwargs = dict(
        horizon=horizon,
        n_draws=n_draws,
        population_cap_fraction=population_cap_fraction,
        rng_seed=rng_seed,
        n_jobs=n_jobs,
        verbose=verbose,
    )
    if baseline is None:
        baseline = simulate(model, seed_window, **kwargs)
    if spec.is_identity:
        intervened = baseline
    else:
        intervened = simulate(model.with_intervention(spec), seed_window, **kwargs)
    return ScenarioResult(
        baseline=baseline,
        intervened=intervened,
        spec=spec,
        reduction=reduction(baseline, intervened),
        reduction_median=reduction(baseline, intervened, statistic='median'),
    )


class ScenarioGrid(object):
    """Results of a kinds x levels grid sharing one baseline."""

    def __init__(self, results):
        self.results = list(results)

    def __len__(self):
        return len(self.results)

    def __iter__(self):
        return iter(self.results)

    def get(self, kind, level):
        spec = InterventionSpec(kind, level)
        for res in self.results:
            if res.spec == spec:
                return res
        raise KeyError(f"{spec.label} not in grid")

    def table(self):
        return pd.DataFrame([r.to_row() for r in self.results])

    def trajectories(self):
        """Mean and 95th-quantile (worst case) trajectory per cell, plus the baseline."""
        frames = {}
        base = self.results[0].baseline
        frames[('baseline', 'mean')] = base.mean()
        frames[('baseline', 'q95')] = quantile_envelope(base, [0.95])[0.95]
        for res in self.results:
            frames[(res.spec.label, 'mean')] = res.intervened.mean()
            frames[(res.spec.label, 'q95')] = quantile_envelope(res.intervened, [0.95])[0.95]
        df = pd.DataFrame(frames)
        df.columns = [f"{a}_{b}" for a, b in df.columns]
        return df


def scenario_grid(
    draws,
    kinds,
    levels,
    seed_window,
    horizon: int = 30,
    n_draws: int = 1000,
    rng_seed: int = None,
    weights=None,
    population_cap_fraction: float = 0.01,
    n_jobs=1,
    verbose: int = 0,
):
    """Full factorial kinds x levels, one shared baseline, parallel over cells."""
    kinds, levels = list(kinds), list(levels)
    if not kinds or not levels:
        raise ValueError("kinds and levels must not be empty")
    specs = [InterventionSpec(k, lv) for k in kinds for lv in levels]
    model = _as_renewal(draws, weights)
    n_jobs = set_n_jobs(n_jobs, verbose=verbose)
    baseline = simulate(
        model,
        seed_window,
        horizon=horizon,
        n_draws=n_draws,
        population_cap_fraction=population_cap_fraction,
        rng_seed=rng_seed,
        n_jobs=n_jobs,
        verbose=verbose,
    )
    cell_args = dict(
        seed_window=seed_window,
        horizon=horizon,
        n_draws=n_draws,
        rng_seed=rng_seed,
        population_cap_fraction=population_cap_fraction,
        baseline=baseline,
        n_jobs=1,
    )
    if n_jobs > 1 and len(specs) > 1:
        results = Parallel(n_jobs=min(n_jobs, len(specs)), verbose=verbose > 1)(
            delayed(simulate_scenario)(model, spec, **cell_args) for spec in specs
        )
    else:
        results = [simulate_scenario(model, spec, **cell_args) for spec in specs]
    if verbose > 0:
        for res in results:
            print(f"{res.spec.label}: reduction {res.reduction:.3f}")
    return ScenarioGrid(results)
