"""Locating case-count snapshots and generating synthetic ones."""
import os
from os.path import dirname, join
import numpy as np
import pandas as pd
from hetr.models.base import RLawParams, infectivity_weights
from hetr.models.renewal import FittedRenewal, simulate
from hetr.tools.shaping import IncidenceSeries

snapshot_names = {
    'global': 'time_series_covid19_confirmed_global.csv',
    'us': 'time_series_covid19_confirmed_US.csv',
}


def snapshot_path(source: str = 'global'):
    """Path of a local JHU-style confirmed-cases snapshot, or None.

    Looks in the $HETR_DATA directory, then in the package data folder.
    """
    name = snapshot_names[source]
    env = os.environ.get('HETR_DATA')
    candidates = []
    if env:
        candidates.append(join(env, name))
    candidates.append(join(dirname(__file__), 'data', name))
    for path in candidates:
        if os.path.isfile(path):
            return path
    return None


def load_cumulative_csv(path: str):
    """Raw UTF-8 text of a cumulative case-count CSV."""
    with open(path, 'r', encoding='utf-8-sig') as f:
        return f.read()


def load_synthetic(
    regions=None,
    start_date: str = "2020-01-22",
    n_days: int = 250,
    r_laws: dict = None,
    x0: int = 20,
    populations: dict = None,
    K: int = 7,
    random_seed: int = 2020,
):
    """Create a wide cumulative CSV, JHU global layout, from known renewal laws of R.

    Args:
        regions (list): region names, default ['Atlantis', 'Lemuria']
        start_date (str): first date column
        n_days (int): number of date columns
        r_laws (dict): region -> RLawParams, default mean 1.03 with CV 0.5
        x0 (int): daily cases over the first week
        populations (dict): region -> population, caps daily cases at 1%
        K (int): renewal weights
        random_seed (int): seed for the simulated paths

    Returns:
        (csv text, dict region -> RLawParams used)
    """
    regions = ['Atlantis', 'Lemuria'] if regions is None else list(regions)
    r_laws = {} if r_laws is None else dict(r_laws)
    populations = {} if populations is None else dict(populations)
    dates = pd.date_range(start_date, periods=n_days, freq='D')
    n_seed = 7
    rows, used = [], {}
    for i, region in enumerate(regions):
        law = r_laws.get(region, RLawParams(4.0, 4.0 / 1.03))
        used[region] = law
        population = populations.get(region, 10000000)
        seed = pd.Series(np.full(n_seed, float(x0)), index=dates[:n_seed])
        ens = simulate(
            FittedRenewal(law, infectivity_weights(K)),
            IncidenceSeries(region, seed, population),
            horizon=n_days - n_seed,
            n_draws=1,
            population_cap_fraction=0.01,
            rng_seed=random_seed + i,
        )
        daily = np.concatenate([seed.to_numpy(), ens.incidence[0]])
        rows.append([''] + [region, 0.0, 0.0] + np.cumsum(daily).astype(np.int64).tolist())
    columns = ['Province/State', 'Country/Region', 'Lat', 'Long'] + [
        f"{d.month}/{d.day}/{d.strftime('%y')}" for d in dates
    ]
    df = pd.DataFrame(rows, columns=columns)
    return df.to_csv(index=False, lineterminator='\n'), used
