"""Summaries of the fitted law of R and the comparison tables built from them."""
import numpy as np
import pandas as pd
from scipy import special
from scipy.optimize import brentq
from hetr.models.likelihood import ml_constant_r
from hetr.tools.random import stream


def r_law_draws(draws, n_per_draw: int = 1, rng_seed: int = 0):
    """R ~ Gamma(a, b) for every posterior draw of (a, b), n_per_draw each."""
    a = draws.a.reshape(-1)
    b = draws.b.reshape(-1)
    rng = stream(rng_seed, 'r_law')
    return rng.gamma(np.repeat(a, n_per_draw), 1.0 / np.repeat(b, n_per_draw))


def mixture_quantile(a, b, level: float):
    """Quantile of the equal-weight mixture of Gamma(a_i, b_i) laws."""
    a = np.asarray(a, dtype=float).reshape(-1)
    b = np.asarray(b, dtype=float).reshape(-1)
    if level <= 0:
        return 0.0
    if level >= 1:
        return np.inf

    def cdf(x):
        return np.mean(special.gammainc(a, b * x)) - level

    hi = max(float(np.max(a / b)), 1.0)
    while cdf(hi) < 0:
        hi *= 2.0
    return brentq(cdf, 0.0, hi, xtol=1e-10)


def r_law_summary(draws, probs=(0.05, 0.95), n_per_draw: int = 1, rng_seed: int = 0, method: str = 'monte_carlo'):
    """Mean, median and quantiles of R mixed over the posterior.

    Args:
        draws (PosteriorDraws): fitted draws
        probs (list): quantile levels to report
        n_per_draw (int): R draws per posterior draw for the Monte Carlo summary
        rng_seed (int): seed of the R draws
        method (str): 'monte_carlo' or 'exact' (root finding on the mixture CDF)

    Returns:
        pd.Series with mean, median and one q<level> entry per prob
    """
    probs = list(probs)
    if method == 'exact':
        out = {'mean': float(np.mean(draws.a / draws.b))}
        out['median'] = mixture_quantile(draws.a, draws.b, 0.5)
        for p in probs:
            out[f"q{p:g}"] = mixture_quantile(draws.a, draws.b, p)
        return pd.Series(out)
    r = r_law_draws(draws, n_per_draw=n_per_draw, rng_seed=rng_seed)
    out = {'mean': float(r.mean()), 'median': float(np.median(r))}
    if probs:
        for p, q in zip(probs, np.quantile(r, probs, method='linear')):
            out[f"q{p:g}"] = float(q)
    return pd.Series(out)


def table_bayes_vs_ml(fits, weights=None, rng_seed: int = 0):
    """Bayesian R law against the constant-R ML estimate, one row per fit.

    Args:
        fits (list of dict): each with 'region', 'window_start', 'draws' (PosteriorDraws)
            and 'data' (IncidenceSeries)

    Returns:
        pd.DataFrame
    """
    rows = []
    for fit in fits:
        r = r_law_draws(fit['draws'], n_per_draw=10, rng_seed=rng_seed)
        low, high = np.quantile(r, [0.025, 0.975])
        ml, (ml_low, ml_high) = ml_constant_r(fit['data'], weights)
        ml_width = ml_high - ml_low
        rows.append(
            {
                'region': fit['region'],
                'window_start': fit['window_start'],
                'bayes_mean': float(r.mean()),
                'bayes_sd': float(r.std(ddof=1)),
                'cri_low': float(low),
                'cri_high': float(high),
                'ml_estimate': ml,
                'ml_low': ml_low,
                'ml_high': ml_high,
                'width_ratio': float((high - low) / ml_width) if ml_width > 0 else np.inf,
            }
        )
    return pd.DataFrame(rows)


def table_r_law(fits, rng_seed: int = 0, threshold: float = 0.2):
    """Mean and 95th quantile of R per region and window, with window-to-window changes.

    A change larger than threshold in either direction is flagged 'up' or 'down'.
    """
    rows = []
    for fit in fits:
        s = r_law_summary(fit['draws'], probs=[0.95], n_per_draw=10, rng_seed=rng_seed)
        rows.append(
            {
                'region': fit['region'],
                'window_start': fit['window_start'],
                'mean': s['mean'],
                'q95': s['q0.95'],
            }
        )
    df = pd.DataFrame(rows, columns=['region', 'window_start', 'mean', 'q95'])
    if df.empty:
        return df
    df = df.sort_values(['region', 'window_start']).reset_index(drop=True)
    for col in ['mean', 'q95']:
        change = df.groupby('region')[col].diff()
        df[f"{col}_change"] = change
        df[f"{col}_trend"] = np.select(
            [change > threshold, change < -threshold], ['up', 'down'], default='flat'
        )
        df.loc[change.isna(), f"{col}_trend"] = ''
    df['cell'] = [f"{m:.1f} ({q:.1f})" for m, q in zip(df['mean'], df['q95'])]
    return df


def table_reductions(grids):
    """Reduction per region (rows) and intervention (columns).

    Args:
        grids (dict): region -> ScenarioGrid
    """
    rows = {}
    for region, grid in grids.items():
        rows[region] = {res.spec.label: res.reduction for res in grid}
    df = pd.DataFrame.from_dict(rows, orient='index')
    df.index.name = 'region'
    return df
