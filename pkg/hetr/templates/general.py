"""Starting configuration of a full study run."""
import pandas as pd

region_populations = {
    "France": 67000000,
    "Germany": 83000000,
    "Italy": 60360000,
    "Spain": 47100000,
    "Sweden": 10350000,
    "Estonia": 1330000,
    "United Kingdom": 66650000,
    "California": 39510000,
    "Florida": 21480000,
    "Texas": 29000000,
    "Mexico": 127600000,
    "Colombia": 50340000,
    "Korea, South": 51700000,
    "Russia": 144400000,
}

region_aliases = {
    "UK": "United Kingdom",
    "South Korea": "Korea, South",
    "Korea": "Korea, South",
}

# US states come from the US-level confirmed file, everything else from the global file
study_template_dict = {
    region: {
        "Population": population,
        "Source": "us" if region in ("California", "Florida", "Texas") else "global",
    }
    for region, population in region_populations.items()
}

study_template = pd.DataFrame.from_dict(study_template_dict, orient='index')

default_run_config = {
    "data": {
        "global_csv": None,
        "us_csv": None,
    },
    "regions": list(region_populations),
    "populations": dict(region_populations),
    "smoothing_window": 7,
    "windows": {
        "start": "2020-03-15",
        "length": 30,
        "count": 7,
    },
    "K": 7,
    "sampler": {
        "n_chains": 10,
        "n_warmup": 5000,
        "n_samples": 1000,
        "target_accept": 0.8,
        "max_tree_depth": 10,
        "algorithm": "nuts",
        "n_leapfrog": 32,
        "adapt_metric": True,
    },
    "simulation": {
        "n_seed": 7,
        "horizon": 30,
        "n_draws": 1000,
        "population_cap_fraction": 0.01,
    },
    "interventions": {
        "kinds": ["tail_cap", "mean_shrink"],
        "levels": [0.6, 0.9, 0.95],
    },
    "synthetic": {
        "r0": 1.0,
        "alpha": 1.2,
        "x0": 100,
        "horizon": 100,
        "n_draws": 5000,
        "threshold": 50000,
    },
    "out_dir": "hetr_output",
    "seed": None,
    "n_jobs": 1,
}
