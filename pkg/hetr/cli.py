"""Command line: ingest, fit, diagnose, evaluate, synth, intervene, report.

Every file goes under --out-dir:

    series/<region>.json                    smoothed daily incidence
    posteriors/<region>_w<k>_<variant>.json draws of (alpha, beta) plus the fitted window
    posteriors/<...>_latent.csv             latent draws, with --store-latent
    diagnostics/<...>.json                  R-hat / ESS per parameter
    metrics/<region>.csv                    LPPD, LPML per window and variant
    ensembles/<region>_w<k>.csv/.json       projected trajectories behind envelope figures
    scenarios/<region>_w<k>_table.csv       reductions per intervention
    synth/...                               fixed vs random R experiments
    report/...                              summary tables and envelope figures

Random streams derive from one seed: seed -> region -> window -> chain or trajectory.
"""
import argparse
import copy
import glob
import json
import os
import sys
import warnings
from dataclasses import dataclass, field, fields
import numpy as np
import pandas as pd
from hetr.datasets import load_cumulative_csv, snapshot_path
from hetr.evaluator.diagnostics import diagnose
from hetr.evaluator.metrics import predictive_ordinates, envelope_coverage
from hetr.evaluator.plotting import envelope_frame, plot_envelope
from hetr.evaluator.summary import table_bayes_vs_ml, table_r_law
from hetr.evaluator.synthetic import branching_experiment, ml_recovery_experiment
from hetr.models.base import TrajectoryEnsemble, infectivity_weights
from hetr.models.hmc import SamplerConfig, PosteriorDraws, sample_posterior
from hetr.models.interventions import kind_aliases, scenario_grid
from hetr.models.likelihood import variants
from hetr.models.renewal import FittedRenewal, simulate
from hetr.templates.general import default_run_config, region_aliases, study_template
from hetr.tools.exceptions import (
    ConfigError,
    NonConvergenceError,
    TooFewDrawsError,
    EXIT_OK,
    EXIT_VALIDATION,
    EXIT_NON_CONVERGENCE,
)
from hetr.tools.io import OutputDir, read_json, slugify
from hetr.tools.random import child_seed
from hetr.tools.shaping import IncidenceSeries, preprocess
from hetr.tools.window_functions import split_windows, seed_window, following_window


def _merge(base: dict, update: dict):
    out = copy.deepcopy(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


@dataclass
class RunConfig:
    """Everything a run depends on. Identical RunConfig gives identical files."""

    data: dict = field(default_factory=lambda: dict(default_run_config['data']))
    regions: list = field(default_factory=lambda: list(default_run_config['regions']))
    populations: dict = field(default_factory=lambda: dict(default_run_config['populations']))
    smoothing_window: int = 7
    windows: dict = field(default_factory=lambda: dict(default_run_config['windows']))
    K: int = 7
    sampler: dict = field(default_factory=lambda: dict(default_run_config['sampler']))
    simulation: dict = field(default_factory=lambda: dict(default_run_config['simulation']))
    interventions: dict = field(
        default_factory=lambda: copy.deepcopy(default_run_config['interventions'])
    )
    synthetic: dict = field(default_factory=lambda: dict(default_run_config['synthetic']))
    out_dir: str = 'hetr_output'
    seed: int = None
    n_jobs: object = 1

    def __post_init__(self):
        for name, path in self.data.items():
            if path is not None and not os.path.isfile(path):
                raise FileNotFoundError(f"data.{name}: {path} not found")
        if int(self.K) < 1:
            raise ConfigError("K must be >= 1")
        if int(self.smoothing_window) < 1:
            raise ConfigError("smoothing_window must be >= 1")
        if self.seed is not None:
            self.seed = int(self.seed)
            if self.seed < 0:
                raise ConfigError("seed must be a non-negative integer")

    @classmethod
    def from_dict(cls, params: dict):
        known = {f.name for f in fields(cls)}
        unknown = set(params) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**_merge(default_run_config, params))

    @classmethod
    def load(cls, path: str = None, overrides: dict = None, environ=None):
        """Template defaults, then the JSON file, then $HETR_SEED for the seed, then flags."""
        params = {}
        if path is not None:
            try:
                params = read_json(path)
            except json.JSONDecodeError as e:
                raise ConfigError(f"{path} is not valid JSON: {e}")
        environ = os.environ if environ is None else environ
        env_seed = environ.get('HETR_SEED')
        if env_seed not in (None, ''):
            try:
                params['seed'] = int(env_seed)
            except ValueError:
                raise ConfigError(f"HETR_SEED must be an integer, got {env_seed!r}")
        params = _merge(params, {k: v for k, v in (overrides or {}).items() if v is not None})
        return cls.from_dict(params)

    def get_params(self):
        return {f.name: copy.deepcopy(getattr(self, f.name)) for f in fields(self)}

    def require_seed(self):
        if self.seed is None:
            raise ConfigError("a seed is required: pass --seed, set HETR_SEED or 'seed' in --config")
        return self.seed

    @property
    def weights(self):
        return infectivity_weights(int(self.K))

    def sampler_config(self, rng_seed: int, **overrides):
        params = _merge(self.sampler, {k: v for k, v in overrides.items() if v is not None})
        params['rng_seed'] = rng_seed
        params['n_jobs'] = self.n_jobs
        return SamplerConfig.from_dict(params)

    def population(self, region: str):
        return self.populations.get(canonical_region(region))


def canonical_region(region: str):
    return region_aliases.get(region, region)


def _common_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help="JSON run configuration")
    common.add_argument('--seed', type=int, help="global seed, takes precedence over $HETR_SEED")
    common.add_argument('--out-dir', dest='out_dir', help="directory for every output file")
    common.add_argument('--n-jobs', dest='n_jobs', help="parallel jobs, int or 'auto'")
    common.add_argument('--force', action='store_true', help="overwrite existing outputs")
    common.add_argument('-v', '--verbose', action='count', default=0)
    return common


def _int_list(text):
    return [int(x) for x in str(text).split(',') if x.strip()]


def _float_list(text):
    try:
        return [float(x) for x in str(text).split(',') if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}")


report_tables = {'1': 'bayes-vs-ml', '2': 'r-law', '3': 'reductions'}


def _table_arg(text):
    """Table name, or its number in the usual report order."""
    return report_tables.get(str(text).strip(), str(text).strip().lower())


def _window_arg(text):
    if text == 'all':
        return text
    try:
        return _int_list(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must be 'all' or indexes like 0,1,2, got {text!r}")


def _add_sampler_flags(parser):
    parser.add_argument('--chains', type=int, dest='n_chains')
    parser.add_argument('--warmup', type=int, dest='n_warmup')
    parser.add_argument('--samples', type=int, dest='n_samples')
    parser.add_argument('--algorithm', choices=['nuts', 'hmc'])
    parser.add_argument('--max-tree-depth', type=int, dest='max_tree_depth')


def build_parser():
    common = _common_parser()
    parser = argparse.ArgumentParser(
        prog='hetr',
        description="Epidemic trajectories under a random reproductive number",
    )
    subparsers = parser.add_subparsers(dest='command', metavar='command')

    p = subparsers.add_parser('ingest', parents=[common], help="cumulative CSV to smoothed series JSON")
    p.add_argument('--csv', help="JHU-style cumulative CSV, default from config data paths")
    p.add_argument('--region', action='append', help="repeatable, default: config regions")
    p.add_argument('--population', type=int, help="population of a single --region")
    p.add_argument('--smoothing-window', type=int, dest='smoothing_window')
    p.set_defaults(handler=cmd_ingest)

    p = subparsers.add_parser('fit', parents=[common], help="posterior draws for one series window")
    p.add_argument('--series', required=True, help="series JSON written by ingest")
    p.add_argument('--window', type=_window_arg, default=[0], help="index, list or 'all'")
    p.add_argument('--variant', choices=variants, default='multiplicative')
    p.add_argument('--store-latent', action='store_true', dest='store_latent')
    _add_sampler_flags(p)
    p.set_defaults(handler=cmd_fit)

    p = subparsers.add_parser('diagnose', parents=[common], help="R-hat and ESS, exit 3 if not converged")
    p.add_argument('--posterior', required=True, action='append')
    p.add_argument('--rhat-threshold', type=float, default=1.1, dest='rhat_threshold')
    p.add_argument('--ess-fraction', type=float, default=0.2, dest='ess_fraction')
    p.set_defaults(handler=cmd_diagnose)

    p = subparsers.add_parser('evaluate', parents=[common], help="LPPD/LPML per variant, envelope coverage")
    p.add_argument('--series', required=True, action='append')
    p.add_argument('--window', type=_window_arg, default=[0])
    p.add_argument('--variant', action='append', choices=variants)
    p.add_argument('--coverage', action='store_true', help="score the following days against projections")
    p.add_argument('--band', type=float, help="central quantile band, default min-max envelope")
    _add_sampler_flags(p)
    p.set_defaults(handler=cmd_evaluate)

    p = subparsers.add_parser('synth', parents=[common], help="fixed vs random R experiments")
    p.add_argument('--experiment', choices=['branching', 'ml-recovery'], default='branching')
    p.add_argument('--model', action='append', choices=['m0', 'm1', 'm2'])
    p.add_argument('--r0', type=float)
    p.add_argument('--alpha', type=float)
    p.add_argument('--x0', type=float)
    p.add_argument('--horizon', type=int)
    p.add_argument('--draws', type=int, dest='n_draws')
    p.add_argument('--threshold', type=int)
    p.add_argument('--n', type=int, default=1000, help="datasets in the ml-recovery study")
    p.add_argument('--days', type=int, default=20, help="days per ml-recovery dataset")
    p.add_argument('--save-ensembles', action='store_true', dest='save_ensembles')
    p.set_defaults(handler=cmd_synth)

    p = subparsers.add_parser('intervene', parents=[common], help="tail cap vs mean shrink projections")
    p.add_argument('--posterior', required=True, action='append')
    p.add_argument('--kind', action='append', choices=sorted(kind_aliases))
    p.add_argument('--levels', type=_float_list)
    p.add_argument('--horizon', type=int)
    p.add_argument('--draws', type=int, dest='n_draws')
    p.set_defaults(handler=cmd_intervene)

    p = subparsers.add_parser('report', parents=[common], help="summary tables and envelope figures")
    p.add_argument(
        '--table', action='append', type=_table_arg, choices=sorted(set(report_tables.values())),
        help="bayes-vs-ml (1), r-law (2) or reductions (3)",
    )
    p.add_argument('--figure', choices=['envelope'])
    p.add_argument('--region', action='append')
    p.add_argument('--posterior', action='append', help="default: every stored posterior")
    p.add_argument('--variant', choices=variants, default='multiplicative')
    p.add_argument('--probs', type=_float_list, default=[0.025, 0.975])
    p.set_defaults(handler=cmd_report)
    return parser


def _config_from_args(args):
    overrides = {'seed': args.seed, 'out_dir': args.out_dir}
    if args.n_jobs is not None:
        overrides['n_jobs'] = args.n_jobs if args.n_jobs == 'auto' else int(args.n_jobs)
    if getattr(args, 'smoothing_window', None) is not None:
        overrides['smoothing_window'] = args.smoothing_window
    return RunConfig.load(args.config, overrides)


def _sampler_overrides(args):
    return {
        k: getattr(args, k, None)
        for k in ['n_chains', 'n_warmup', 'n_samples', 'algorithm', 'max_tree_depth']
    }


def _windows(series: IncidenceSeries, config: RunConfig, selection):
    """(index, window) pairs; a window index k starts k * length days after the first."""
    w = config.windows
    count = int(w['count'])
    indexes = list(range(count)) if selection == 'all' else list(selection)
    out = []
    for k in indexes:
        if k < 0 or k >= count:
            raise ConfigError(f"window {k} outside 0..{count - 1}")
        start = pd.Timestamp(w['start']) + pd.Timedelta(days=k * int(w['length']))
        out.append((k, split_windows(series, start, int(w['length']), 1)[0]))
    return out


def _stem(region, k, variant=None):
    stem = f"{slugify(region)}_w{k}"
    return stem if variant is None else f"{stem}_{variant}"


def _posterior_record(draws: PosteriorDraws, window: IncidenceSeries, k: int, config: RunConfig):
    record = draws.to_dict()
    record['window'] = {
        'index': int(k),
        'K': int(config.K),
        'series': window.to_dict(),
    }
    try:
        record['diagnostics'] = diagnose(draws).to_dict()
    except TooFewDrawsError:
        record['diagnostics'] = None
    return record


def load_posterior(path: str):
    """(PosteriorDraws, fitted window, window index, K) from a posterior JSON and its sidecar."""
    record = read_json(path)
    latent_path = os.path.splitext(path)[0] + '_latent.csv'
    latent = None
    if os.path.isfile(latent_path):
        latent = pd.read_csv(latent_path, index_col=['chain', 'draw'])
    if 'window' not in record:
        raise ConfigError(f"{path} carries no fitted window")
    window = IncidenceSeries.from_dict(record['window']['series'])
    draws = PosteriorDraws.from_dict(record, latent=latent)
    return draws, window, int(record['window']['index']), int(record['window']['K'])


def _fit_window(window, config, args, k, variant, verbose):
    rng_seed = child_seed(config.require_seed(), canonical_region(window.region), k)
    sampler = config.sampler_config(rng_seed, **_sampler_overrides(args))
    return sample_posterior(window, config.weights, sampler, variant=variant, verbose=verbose)


def cmd_ingest(args, config: RunConfig, out: OutputDir):
    regions = args.region or list(config.regions)
    if args.population is not None and len(regions) != 1:
        raise ConfigError("--population applies to a single --region")
    texts = {}
    written = []
    for region in regions:
        name = canonical_region(region)
        if args.csv is not None:
            path = args.csv
        else:
            source = study_template['Source'].get(name, 'global')
            path = config.data.get(f"{source}_csv") or snapshot_path(source)
            if path is None:
                raise FileNotFoundError(
                    f"no case-count CSV for {name}: pass --csv or set data.{source}_csv"
                )
        if path not in texts:
            texts[path] = load_cumulative_csv(path)
        population = args.population if args.population is not None else config.population(name)
        series = preprocess(texts[path], name, population, int(config.smoothing_window))
        written.append(out.write_text(f"series/{slugify(name)}.json", series.to_json() + "\n"))
        if args.verbose > 0:
            print(f"{name}: {len(series)} days from {series.start_date.date()}")
    return written


def cmd_fit(args, config: RunConfig, out: OutputDir):
    series = IncidenceSeries.read_json(args.series)
    written = []
    for k, window in _windows(series, config, args.window):
        stem = _stem(window.region, k, args.variant)
        # refuse before spending time on sampling
        if not out.force and os.path.exists(out.path(f"posteriors/{stem}.json")):
            raise FileExistsError(f"{out.path(f'posteriors/{stem}.json')} exists, pass --force to overwrite")
        draws = _fit_window(window, config, args, k, args.variant, args.verbose)
        record = _posterior_record(draws, window, k, config)
        written.append(out.write_json(f"posteriors/{stem}.json", record))
        if args.store_latent:
            written.append(out.write_csv(f"posteriors/{stem}_latent.csv", draws.latent_frame()))
        if record['diagnostics'] is not None:
            out.write_json(f"diagnostics/{stem}.json", record["diagnostics"], force=True)
    return written


def cmd_diagnose(args, config: RunConfig, out: OutputDir):
    failed = []
    for path in args.posterior:
        draws, window, k, _ = load_posterior(path)
        diag = diagnose(draws, rhat_threshold=args.rhat_threshold, ess_fraction=args.ess_fraction)
        stem = os.path.splitext(os.path.basename(path))[0]
        out.write_json(f"diagnostics/{stem}.json", diag.to_dict())
        out.write_csv(f"diagnostics/{stem}.csv", diag.table())
        print(
            f"{stem}: converged={diag.converged} max R-hat {diag.rhat.max():.3f} "
            f"min n_eff {diag.n_eff.min():.0f} of {diag.n_draws}"
        )
        if not diag.converged:
            failed.append((stem, diag))
    if failed:
        raise NonConvergenceError(
            f"not converged: {', '.join(s for s, _ in failed)}", diagnostics=failed[0][1]
        )
    return EXIT_OK


def _project(draws, window, config: RunConfig, rng_seed, horizon=None, n_draws=None, verbose=0):
    sim = config.simulation
    return simulate(
        FittedRenewal.from_posterior(draws, config.weights),
        seed_window(window, int(sim['n_seed'])),
        horizon=int(sim['horizon'] if horizon is None else horizon),
        n_draws=int(sim['n_draws'] if n_draws is None else n_draws),
        population_cap_fraction=sim['population_cap_fraction'],
        rng_seed=rng_seed,
        n_jobs=config.n_jobs,
        verbose=verbose,
    )


def _write_ensemble(out: OutputDir, stem, ens: TrajectoryEnsemble, region, k, observed=None, covered=None):
    out.write_csv(f"ensembles/{stem}.csv", ens.to_frame())
    meta = ens.summary()
    meta.update(
        {
            'region': region,
            'window_index': int(k),
            'forecast_start': str(ens.forecast_index()[0].date())
            if isinstance(ens.forecast_index(), pd.DatetimeIndex)
            else None,
            'observed': None if observed is None else observed.values.tolist(),
            'covered': covered,
        }
    )
    out.write_json(f"ensembles/{stem}.json", meta)


def cmd_evaluate(args, config: RunConfig, out: OutputDir):
    selected = args.variant or list(variants)
    seed = config.require_seed()
    rows, ensembles, observed = [], {}, {}
    for series_path in args.series:
        series = IncidenceSeries.read_json(series_path)
        series_rows = []
        for k, window in _windows(series, config, args.window):
            fitted = {}
            for variant in selected:
                draws = _fit_window(window, config, args, k, variant, args.verbose)
                fitted[variant] = draws
                metrics = predictive_ordinates(draws, window, config.weights)
                try:
                    converged = diagnose(draws).converged
                except TooFewDrawsError:
                    converged = False
                series_rows.append(
                    {
                        'region': window.region,
                        'window': k,
                        'window_start': str(window.start_date.date()),
                        'variant': variant,
                        'lppd': metrics.lppd,
                        'lpml': metrics.lpml,
                        'avg_loglik': metrics.avg_loglik,
                        'divergence_rate': draws.divergence_rate,
                        'converged': converged,
                    }
                )
            if args.coverage:
                horizon = int(config.simulation['horizon'])
                after = following_window(series, window, horizon)
                if after is None:
                    warnings.warn(f"{window.region} window {k}: fewer than {horizon} days follow, no coverage")
                    continue
                draws = fitted.get('multiplicative', fitted[selected[0]])
                key = _stem(window.region, k)
                ens = _project(
                    draws, window, config,
                    child_seed(seed, canonical_region(window.region), k, 'project'),
                    verbose=args.verbose,
                )
                ensembles[key], observed[key] = ens, after
                covered, _ = envelope_coverage({key: ens}, {key: after}, band=args.band)
                _write_ensemble(out, key, ens, window.region, k, after, bool(covered[key]))
        frame = pd.DataFrame(series_rows)
        if not frame.empty:
            out.write_csv(f"metrics/{slugify(frame['region'].iloc[0])}.csv", frame, index=False)
        rows.extend(series_rows)
    summary = {'metrics': rows}
    if args.coverage:
        covered, fraction = envelope_coverage(ensembles, observed, band=args.band)
        table = covered.rename('covered').rename_axis('window').reset_index()
        out.write_csv("coverage/coverage.csv", table, index=False)
        summary['coverage'] = {'band': args.band, 'fraction': fraction, 'n': int(len(covered))}
        print(f"coverage {fraction:.1%} of {len(covered)} windows")
    for variant in selected:
        lpml = [r['lpml'] for r in rows if r['variant'] == variant]
        if lpml:
            print(f"{variant}: mean LPML {np.mean(lpml):.3f} over {len(lpml)} windows")
    out.write_json("metrics/summary.json", summary)
    return EXIT_OK


def cmd_synth(args, config: RunConfig, out: OutputDir):
    syn = _merge(
        config.synthetic,
        {
            k: getattr(args, k)
            for k in ['r0', 'alpha', 'x0', 'horizon', 'n_draws', 'threshold']
            if getattr(args, k) is not None
        },
    )
    seed = config.require_seed()
    if args.experiment == 'ml-recovery':
        summary, df = ml_recovery_experiment(
            n=args.n,
            n_days=args.days,
            shape=float(syn['alpha']),
            rate=1.0,
            x0=syn['x0'],
            rng_seed=child_seed(seed, 'synth', 'ml-recovery'),
            n_jobs=config.n_jobs,
            verbose=args.verbose,
        )
        out.write_json("synth/ml_recovery.json", summary)
        out.write_csv("synth/ml_recovery.csv", df, index=False)
        print(
            f"ML recovery of R={summary['true_r']:g}: bias {summary['mean_bias']:.3f}, "
            f"coverage {summary['coverage']:.1%}"
        )
        return EXIT_OK
    result = branching_experiment(
        models=tuple(args.model or ['m0', 'm1', 'm2']),
        r0=syn['r0'],
        alpha=syn['alpha'],
        x0=syn['x0'],
        horizon=int(syn['horizon']),
        n_draws=int(syn['n_draws']),
        rng_seed=child_seed(seed, 'synth', 'branching'),
        threshold=int(syn['threshold']),
        n_jobs=config.n_jobs,
        verbose=args.verbose,
    )
    out.write_csv("synth/envelope.csv", result['envelope'])
    out.write_csv("synth/cumulative_envelope.csv", result['cumulative_envelope'])
    out.write_csv("synth/stopping.csv", result['stopping'], index=False)
    out.write_csv("synth/hit_times.csv", result['hit_times'], index=False)
    if args.save_ensembles:
        for name, ens in result['ensembles'].items():
            out.write_csv(f"synth/ensemble_{name}.csv", ens.to_frame())
    for row in result['stopping'].itertuples():
        print(f"{row.model}: stopping fraction {row.fraction_reached:.4f}")
    return EXIT_OK


def cmd_intervene(args, config: RunConfig, out: OutputDir):
    seed = config.require_seed()
    kinds = args.kind or list(config.interventions['kinds'])
    levels = args.levels or list(config.interventions['levels'])
    sim = config.simulation
    for path in args.posterior:
        draws, window, k, K = load_posterior(path)
        region = canonical_region(window.region)
        grid = scenario_grid(
            draws,
            kinds,
            levels,
            seed_window(window, int(sim['n_seed'])),
            horizon=int(sim['horizon'] if args.horizon is None else args.horizon),
            n_draws=int(sim['n_draws'] if args.n_draws is None else args.n_draws),
            rng_seed=child_seed(seed, region, k, 'intervene'),
            weights=infectivity_weights(K),
            population_cap_fraction=sim['population_cap_fraction'],
            n_jobs=config.n_jobs,
            verbose=args.verbose,
        )
        stem = _stem(region, k)
        table = grid.table()
        table.insert(0, 'region', region)
        table.insert(1, 'window', k)
        table.insert(2, 'label', [r.spec.label for r in grid])
        out.write_csv(f"scenarios/{stem}_table.csv", table, index=False)
        out.write_csv(f"scenarios/{stem}_trajectories.csv", grid.trajectories())
        wide = table.pivot(index='level', columns='kind', values='reduction')
        out.write_csv(f"scenarios/{stem}_reductions.csv", wide)
        _write_ensemble(out, f"{stem}_baseline", grid.results[0].baseline, region, k)
        if args.verbose > 0:
            print(wide.round(3).to_string())
    return EXIT_OK


def _stored_posteriors(args, out: OutputDir):
    if args.posterior:
        return list(args.posterior)
    paths = sorted(glob.glob(os.path.join(out.root, 'posteriors', f"*_{args.variant}.json")))
    if not paths:
        raise FileNotFoundError(f"no posterior files in {out.root}/posteriors, run fit first")
    return paths


def _wanted(region, regions):
    if not regions:
        return True
    return slugify(canonical_region(region)) in {slugify(canonical_region(r)) for r in regions}


def cmd_report(args, config: RunConfig, out: OutputDir):
    tables = args.table or []
    if not tables and args.figure is None:
        raise ConfigError("report needs --table and/or --figure")
    if {'bayes-vs-ml', 'r-law'} & set(tables):
        seed = config.require_seed()
        fits = []
        for path in _stored_posteriors(args, out):
            draws, window, k, K = load_posterior(path)
            if _wanted(window.region, args.region):
                fits.append(
                    {'region': window.region, 'window_start': draws.window_start,
                     'draws': draws, 'data': window, 'K': K}
                )
        if 'bayes-vs-ml' in tables:
            weights = infectivity_weights(fits[0]['K']) if fits else config.weights
            compared = table_bayes_vs_ml(fits, weights, rng_seed=child_seed(seed, 'report', 'bayes-vs-ml'))
            out.write_csv("report/bayes_vs_ml.csv", compared, index=False)
        if 'r-law' in tables:
            r_law = table_r_law(fits, rng_seed=child_seed(seed, 'report', 'r-law'))
            out.write_csv("report/r_law.csv", r_law, index=False)
            if not r_law.empty:
                wide = r_law.pivot(index='region', columns='window_start', values='cell')
                out.write_csv("report/r_law_wide.csv", wide)
    if 'reductions' in tables:
        paths = sorted(glob.glob(os.path.join(out.root, 'scenarios', '*_table.csv')))
        if not paths:
            raise FileNotFoundError(f"no scenario tables in {out.root}/scenarios, run intervene first")
        frames = [pd.read_csv(p) for p in paths]
        frames = [f for f in frames if _wanted(f['region'].iloc[0], args.region)]
        long = pd.concat(frames, ignore_index=True)
        # percent reduction of mean incidence on the last projected day
        wide = long.pivot_table(index=['region', 'window'], columns='label', values='reduction')
        out.write_csv("report/reductions.csv", (100 * wide).round(1))
    if args.figure == 'envelope':
        if not args.region:
            raise ConfigError("--figure envelope needs --region")
        metas = sorted(glob.glob(os.path.join(out.root, 'ensembles', '*.json')))
        written = 0
        for meta_path in metas:
            meta = read_json(meta_path)
            if not _wanted(meta['region'], args.region):
                continue
            stem = os.path.splitext(os.path.basename(meta_path))[0]
            frame = pd.read_csv(os.path.join(out.root, 'ensembles', f"{stem}.csv"), index_col='draw')
            ens = TrajectoryEnsemble.from_frame(frame)
            plot_df = envelope_frame(ens, probs=args.probs, observed=meta.get('observed'))
            if meta.get('forecast_start'):
                plot_df.index = pd.date_range(meta['forecast_start'], periods=len(plot_df), freq='D')
                plot_df.index.name = 'date'
            out.write_csv(f"report/envelope_{stem}.csv", plot_df)
            out.write_bytes_via(
                f"report/envelope_{stem}.svg",
                lambda p, df=plot_df, t=f"{meta['region']} window {meta['window_index']}": plot_envelope(df, p, t),
            )
            written += 1
        if written == 0:
            raise FileNotFoundError(
                f"no stored ensembles for {args.region} in {out.root}/ensembles, "
                "run evaluate --coverage or intervene first"
            )
    return EXIT_OK


def main(argv=None):
    """Entry point, returns the process exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, 'handler', None) is None:
        parser.print_help()
        return EXIT_OK
    try:
        config = _config_from_args(args)
        # only fit refuses to replace earlier results
        out = OutputDir(config.out_dir, force=args.force or args.command != 'fit')
        with warnings.catch_warnings():
            if args.verbose == 0:
                warnings.simplefilter("ignore", category=RuntimeWarning)
            args.handler(args, config, out)
    except NonConvergenceError as e:
        print(f"hetr {args.command}: {e}", file=sys.stderr)
        return EXIT_NON_CONVERGENCE
    except (ValueError, FileNotFoundError, FileExistsError, ImportError) as e:
        print(f"hetr {args.command}: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
