# -*- coding: utf-8 -*-
"""Posterior sampling, stored draws and summaries of the law of R."""
import os
import unittest
import numpy as np
import pandas as pd
from hetr.models.base import RLawParams, infectivity_weights
from hetr.models.hmc import (
    SamplerConfig,
    PosteriorDraws,
    DualAveraging,
    adaptation_windows,
    sample_posterior,
    _run_chain,
)
from hetr.models.likelihood import LatentState
from hetr.models.renewal import FittedRenewal, simulate
from hetr.evaluator.diagnostics import diagnose
from hetr.evaluator.metrics import predictive_ordinates
from hetr.evaluator.summary import r_law_summary, table_bayes_vs_ml, table_r_law
from hetr.datasets import snapshot_path, load_cumulative_csv
from hetr.tools.exceptions import (
    ConfigError,
    SeriesTooShortError,
    DegenerateWindowError,
    NonFiniteStateError,
)
from hetr.tools.shaping import IncidenceSeries, preprocess
from hetr.tools.window_functions import split_windows
from hetr.tools.special import gamma_median

long_tests = os.environ.get('HETR_LONG_TESTS') == '1'
true_alpha, true_beta = 0.5, 0.2


def synthetic_window(rng_seed, n_days=30, x0=100, alpha=true_alpha, beta=true_beta):
    law = RLawParams.from_unconstrained(alpha, beta)
    ens = simulate(FittedRenewal(law, infectivity_weights(7)), [x0], horizon=n_days - 1,
                   n_draws=1, population_cap_fraction=None, rng_seed=rng_seed)
    values = np.concatenate([[x0], ens.incidence[0]]).astype(float)
    index = pd.date_range("2020-03-15", periods=n_days, freq='D')
    return IncidenceSeries("Synthland", pd.Series(values, index=index), 10000000)


class TestSamplerConfig(unittest.TestCase):
    def test_defaults(self):
        params = SamplerConfig().get_params()
        self.assertEqual(params['n_chains'], 10)
        self.assertEqual(params['n_warmup'], 5000)
        self.assertEqual(params['n_samples'], 1000)

    def test_validation(self):
        with self.assertRaises(ConfigError):
            SamplerConfig(n_chains=1)
        with self.assertRaises(ConfigError):
            SamplerConfig(target_accept=1.0)
        with self.assertRaises(ConfigError):
            SamplerConfig(algorithm='gibbs')

    def test_round_trip(self):
        config = SamplerConfig(n_chains=3, rng_seed=5, algorithm='hmc')
        self.assertEqual(SamplerConfig.from_dict(config.to_dict()), config)

    def test_adaptation_windows(self):
        windows = adaptation_windows(1000)
        self.assertEqual(windows[0][0], 75)
        self.assertEqual(windows[-1][1], 950)
        for (_, end), (start, _) in zip(windows[:-1], windows[1:]):
            self.assertEqual(end, start)
        self.assertEqual(adaptation_windows(10), [])

    def test_dual_averaging_direction(self):
        da = DualAveraging(0.1, target=0.8)
        for _ in range(20):
            da.update(1.0)
        self.assertGreater(da.final_step_size, 0.1)
        da = DualAveraging(0.1, target=0.8)
        for _ in range(20):
            da.update(0.0)
        self.assertLess(da.final_step_size, 0.1)


class TestSamplePosterior(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.window = synthetic_window(7)
        cls.small = SamplerConfig(n_chains=2, n_warmup=60, n_samples=20, rng_seed=21)

    def test_deterministic(self):
        a = sample_posterior(self.window, infectivity_weights(7), self.small)
        b = sample_posterior(self.window, infectivity_weights(7), self.small)
        self.assertTrue(np.array_equal(a.samples, b.samples))
        other = SamplerConfig(n_chains=2, n_warmup=60, n_samples=20, rng_seed=22)
        c = sample_posterior(self.window, infectivity_weights(7), other)
        self.assertFalse(np.array_equal(a.samples, c.samples))

    def test_parallel_chains_match(self):
        a = sample_posterior(self.window, infectivity_weights(7), self.small)
        parallel = SamplerConfig(n_chains=2, n_warmup=60, n_samples=20, rng_seed=21, n_jobs=2)
        b = sample_posterior(self.window, infectivity_weights(7), parallel)
        self.assertTrue(np.array_equal(a.samples, b.samples))

    def test_shapes_and_stats(self):
        draws = sample_posterior(self.window, infectivity_weights(7), self.small)
        self.assertEqual(draws.samples.shape, (2, 20, 2 + int(np.sum(self.window.values[:-1] > 0))))
        self.assertEqual(draws.region, "Synthland")
        self.assertEqual(draws.window_start, "2020-03-15")
        self.assertEqual(draws.data_digest, self.window.digest())
        for key in ['accept_stat', 'divergent', 'tree_depth', 'n_leapfrog', 'step_size']:
            self.assertEqual(draws.stats[key].shape, (2, 20))
        self.assertTrue(((draws.stats['accept_stat'] >= 0) & (draws.stats['accept_stat'] <= 1)).all())
        self.assertTrue((draws.stats['step_size'] > 0).all())

    def test_static_hmc(self):
        config = SamplerConfig(n_chains=2, n_warmup=40, n_samples=15, rng_seed=3,
                               algorithm='hmc', n_leapfrog=8)
        draws = sample_posterior(self.window, infectivity_weights(7), config)
        self.assertEqual(draws.samples.shape[:2], (2, 15))
        self.assertTrue((draws.stats['n_leapfrog'] == 8).all())

    def test_recovers_mean_r(self):
        config = SamplerConfig(n_chains=4, n_warmup=300, n_samples=300, rng_seed=8)
        draws = sample_posterior(self.window, infectivity_weights(7), config)
        diag = diagnose(draws)
        self.assertLessEqual(diag.rhat['alpha'], 1.1)
        self.assertLessEqual(diag.rhat['beta'], 1.1)
        self.assertLess(draws.divergence_rate, 0.2)
        mean_r = draws.mean_r.mean()
        self.assertGreater(mean_r, 0.8)
        self.assertLess(mean_r, 1.7)

    def test_errors(self):
        with self.assertRaises(ConfigError):
            sample_posterior(self.window, config=SamplerConfig(n_chains=2))
        with self.assertRaises(SeriesTooShortError):
            sample_posterior(np.array([5.0]), config=self.small)
        with self.assertRaises(DegenerateWindowError):
            sample_posterior(np.zeros(10), config=self.small)
        with self.assertRaises(ValueError):
            sample_posterior(self.window, config=self.small, variant='logistic')

    def test_posterior_rate_cv_by_variant(self):
        """With large counts the additive fit's per-day CV vanishes, the multiplicative one's does not."""
        window = synthetic_window(11, x0=1000)
        config = SamplerConfig(n_chains=2, n_warmup=150, n_samples=100, rng_seed=31, max_tree_depth=6)
        x = float(window.values.mean())
        cv = {
            variant: FittedRenewal.from_posterior(
                sample_posterior(window, infectivity_weights(7), config, variant=variant)
            ).rate_cv(x)
            for variant in ['multiplicative', 'additive']
        }
        self.assertLess(cv['additive'], 0.15)
        self.assertGreater(cv['multiplicative'], 0.25)

    def test_window_without_history_is_refused(self):
        leading_zero = np.concatenate([[0.0], np.arange(5.0, 14.0)])
        with self.assertRaises(DegenerateWindowError):
            sample_posterior(leading_zero, infectivity_weights(7), self.small)
        # a chain with no finite starting point stops instead of sampling
        with self.assertRaises(NonFiniteStateError):
            _run_chain(leading_zero, infectivity_weights(7), 'multiplicative', self.small, 0)

    def test_store_and_load(self):
        draws = sample_posterior(self.window, infectivity_weights(7), self.small)
        back = PosteriorDraws.from_dict(draws.to_dict(), latent=draws.latent_frame())
        self.assertTrue(np.array_equal(back.samples, draws.samples))
        self.assertEqual(back.config, draws.config)
        self.assertEqual(back.latent_days.tolist(), draws.latent_days.tolist())
        alpha_only = PosteriorDraws.from_dict(draws.to_dict())
        self.assertFalse(alpha_only.has_latent)
        self.assertTrue(np.array_equal(alpha_only.mean_r, draws.mean_r))

    def test_from_states(self):
        chains = [[LatentState(0.1 * i, -0.1 * i, np.array([1.0, 2.0])) for i in range(4)]] * 2
        draws = PosteriorDraws.from_states(chains, latent_days=[0, 1])
        self.assertEqual(draws.samples.shape, (2, 4, 4))
        self.assertTrue(np.allclose(draws.samples[1, 3, :2], [0.3, -0.3]))
        self.assertEqual(draws.parameter_names(), ['alpha', 'beta', 'log_I_1', 'log_I_2'])

    def test_predictive_ordinates_on_fit(self):
        draws = sample_posterior(self.window, infectivity_weights(7), self.small)
        fm = predictive_ordinates(draws, self.window, infectivity_weights(7))
        self.assertEqual(fm.log_ppo.size, len(self.window) - 1)
        self.assertTrue((fm.log_cpo <= fm.log_ppo + 1e-12).all())


class TestRLawSummary(unittest.TestCase):
    degenerate = PosteriorDraws(np.zeros((2, 500, 2)))

    def test_exact_gamma_2_2(self):
        s = r_law_summary(self.degenerate, probs=[0.95], method='exact')
        self.assertAlmostEqual(s['mean'], 1.0)
        self.assertAlmostEqual(s['median'], 0.8391, delta=1e-4)
        self.assertAlmostEqual(s['median'], gamma_median(2.0, 2.0), places=8)

    def test_monte_carlo(self):
        s = r_law_summary(self.degenerate, probs=[0.05, 0.95], n_per_draw=100, rng_seed=1)
        self.assertLess(abs(s['mean'] - 1.0), 0.01)
        self.assertLess(abs(s['median'] - 0.8391), 0.01)
        self.assertEqual(list(s.index), ['mean', 'median', 'q0.05', 'q0.95'])

    def test_empty_probs(self):
        s = r_law_summary(self.degenerate, probs=[])
        self.assertEqual(list(s.index), ['mean', 'median'])

    def test_tables(self):
        low = PosteriorDraws(np.zeros((2, 200, 2)))
        high = PosteriorDraws(np.stack([np.full((200,), 1.5), np.zeros(200)], axis=-1)[None].repeat(2, axis=0))
        window = synthetic_window(3, n_days=10)
        fits = [
            {'region': 'A', 'window_start': '2020-03-15', 'draws': low, 'data': window},
            {'region': 'A', 'window_start': '2020-04-14', 'draws': high, 'data': window},
        ]
        t2 = table_r_law(fits, rng_seed=0)
        self.assertEqual(t2['mean_trend'].tolist(), ['', 'up'])
        self.assertTrue(t2['cell'].iloc[0].startswith('1.0 ('))
        t1 = table_bayes_vs_ml(fits, infectivity_weights(7), rng_seed=0)
        self.assertEqual(len(t1), 2)
        self.assertTrue((t1['cri_high'] > t1['cri_low']).all())
        self.assertTrue((t1['width_ratio'] > 1).all())


@unittest.skipUnless(long_tests, "set HETR_LONG_TESTS=1 for the calibration study")
class TestCalibration(unittest.TestCase):
    def test_interval_coverage(self):
        true_mean = (1 + np.exp(true_alpha)) / (1 + np.exp(true_beta))
        covered = 0
        for rep in range(20):
            window = synthetic_window(100 + rep)
            config = SamplerConfig(n_chains=4, n_warmup=500, n_samples=500, rng_seed=200 + rep)
            draws = sample_posterior(window, infectivity_weights(7), config)
            diag = diagnose(draws)
            self.assertTrue(diag.converged, msg=f"repetition {rep}: {diag.failing()}")
            low, high = np.quantile(draws.mean_r, [0.05, 0.95])
            covered += int(low <= true_mean <= high)
        self.assertGreaterEqual(covered, 16)


@unittest.skipUnless(snapshot_path('global') is not None, "no JHU snapshot, set HETR_DATA")
class TestRealData(unittest.TestCase):
    def test_france_first_window(self):
        text = load_cumulative_csv(snapshot_path('global'))
        series = preprocess(text, "France", population=67000000)
        (window,) = split_windows(series, "2020-03-15", 30, 1)
        config = SamplerConfig(n_chains=4, n_warmup=1000, n_samples=500, rng_seed=2020)
        fits = {
            variant: sample_posterior(window, infectivity_weights(7), config, variant=variant)
            for variant in ['multiplicative', 'additive']
        }
        mean_r = fits['multiplicative'].mean_r.mean()
        self.assertGreaterEqual(mean_r, 1.1)
        self.assertLessEqual(mean_r, 1.7)
        lpml = {
            variant: predictive_ordinates(draws, window, infectivity_weights(7)).lpml
            for variant, draws in fits.items()
        }
        self.assertGreater(lpml['multiplicative'], lpml['additive'])


if __name__ == '__main__':
    unittest.main()
