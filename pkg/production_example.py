# -*- coding: utf-8 -*-
"""
Recommended installs: pip install matplotlib psutil
Fits every study region window by window, checks convergence, and projects the
effect of tail capping vs mean shrinkage from the latest window.

Point data_dir at a folder holding time_series_covid19_confirmed_global.csv
(JHU CSSE layout). Without one, a synthetic snapshot with known laws of R is used.

This is an opinionated setup, the sampler settings favour speed over the
careful defaults of `hetr fit`.
"""
import os
import numpy as np
import pandas as pd
from hetr import (
    load_synthetic,
    infectivity_weights,
    split_windows,
    SamplerConfig,
    sample_posterior,
    diagnose,
    predictive_ordinates,
    scenario_grid,
)
from hetr.datasets import snapshot_path, load_cumulative_csv
from hetr.evaluator.summary import table_r_law, table_reductions
from hetr.templates import region_populations
from hetr.tools.random import child_seed
from hetr.tools.shaping import preprocess
from hetr.tools.window_functions import seed_window

data_dir = None  # folder with the JHU snapshot, None falls back to $HETR_DATA then synthetic data
regions = ["France", "Italy", "Germany"]
seed = 2020  # every random number in the run derives from this
window_start = "2020-03-15"
window_length = 30
n_windows = 7
K = 7  # days of infectiousness in the renewal weights
n_jobs = "auto"  # "auto" or set to number of CPU cores
sampler = dict(n_chains=4, n_warmup=1000, n_samples=500)
kinds = ["tail_cap", "mean_shrink"]
levels = [0.95, 0.9, 0.6]
horizon = 30  # days to project ahead of the last window
n_draws = 1000  # trajectories per projection
save_location = "hetr_production"
graph = True  # whether to plot graphs

if data_dir is not None:
    os.environ['HETR_DATA'] = data_dir
path = snapshot_path('global')
if path is None:
    print("No snapshot found, using synthetic data.")
    regions = ["Atlantis", "Lemuria"]
    csv_text, true_laws = load_synthetic(regions=regions, n_days=270, random_seed=seed)
    populations = {r: 10000000 for r in regions}
else:
    csv_text = load_cumulative_csv(path)
    populations = region_populations
os.makedirs(save_location, exist_ok=True)
weights = infectivity_weights(K)

"""
Fit each window
"""
fits = []
metrics = []
for region in regions:
    series = preprocess(csv_text, region, population=populations.get(region))
    for k, window in enumerate(split_windows(series, window_start, window_length, n_windows)):
        config = SamplerConfig(rng_seed=child_seed(seed, region, k), n_jobs=n_jobs, **sampler)
        draws = sample_posterior(window, weights, config)
        diag = diagnose(draws)
        if not diag.converged:
            print(f"{region} window {k} not converged: {diag.failing()}")
        fit = predictive_ordinates(draws, window, weights)
        metrics.append(
            {
                'region': region,
                'window': k,
                'window_start': draws.window_start,
                'lppd': fit.lppd,
                'lpml': fit.lpml,
                'mean_r': float(np.mean(draws.mean_r)),
                'max_rhat': float(diag.rhat.max()),
            }
        )
        fits.append({'region': region, 'window_start': draws.window_start, 'draws': draws, 'data': window})

metrics = pd.DataFrame(metrics)
metrics.to_csv(os.path.join(save_location, "metrics.csv"), index=False)
table = table_r_law(fits, rng_seed=child_seed(seed, 'report', 2))
table.to_csv(os.path.join(save_location, "r_law.csv"), index=False)
print(table.pivot(index='region', columns='window_start', values='cell'))

"""
Interventions from the latest window of each region
"""
grids = {}
for region in regions:
    last = [f for f in fits if f['region'] == region][-1]
    grid = scenario_grid(
        last['draws'],
        kinds,
        levels,
        seed_window(last['data'], 7),
        horizon=horizon,
        n_draws=n_draws,
        rng_seed=child_seed(seed, region, n_windows - 1, 'intervene'),
        weights=weights,
        n_jobs=n_jobs,
    )
    grids[region] = grid
    if graph:
        try:
            import matplotlib.pyplot as plt

            ax = grid.trajectories().filter(like='_mean').plot(
                title=f"{region}: mean projected incidence", logy=True
            )
            ax.set_xlabel("day")
            plt.savefig(os.path.join(save_location, f"{region.lower()}_interventions.png"), dpi=150)
            plt.close()
        except ImportError:
            print("matplotlib not installed, skipping graphs")
            graph = False

reductions = table_reductions(grids)
reductions.to_csv(os.path.join(save_location, "reductions.csv"))
print((100 * reductions).round(1))
