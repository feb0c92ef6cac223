# -*- coding: utf-8 -*-
"""Branching experiments, ML recovery and the synthetic snapshot."""
import unittest
import numpy as np
from hetr.models.base import RLawParams
from hetr.datasets import load_synthetic
from hetr.evaluator.synthetic import branching_experiment, ml_recovery_experiment
from hetr.tools.shaping import preprocess


class TestBranchingExperiment(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.result = branching_experiment(
            models=['m0', 'm1', 'm2'], r0=1.0, alpha=1.2, x0=100,
            horizon=100, n_draws=5000, rng_seed=7,
        )

    def _cumulative_quantile(self, name, q):
        return np.quantile(self.result['ensembles'][name].cumulative()[:, -1], q)

    def test_outputs(self):
        env = self.result['envelope']
        self.assertEqual(env.shape, (100, 9))
        self.assertIn('m2_0.995', env.columns)
        self.assertEqual(list(self.result['stopping']['model']), ['m0', 'm1', 'm2'])
        self.assertEqual(self.result['cumulative_envelope'].shape, (100, 9))

    def test_constant_r_never_stops(self):
        stopping = self.result['stopping'].set_index('model')
        self.assertEqual(stopping.loc['m0', 'fraction_reached'], 0.0)
        self.assertTrue(np.isnan(stopping.loc['m0', 'median_hit_day']))

    def test_multiplicative_sometimes_stops(self):
        fraction = self.result['stopping'].set_index('model').loc['m2', 'fraction_reached']
        self.assertGreaterEqual(fraction, 0.005)
        self.assertLessEqual(fraction, 0.10)
        # golden value for seed 7: 27 of 5000 paths reach 50,000 daily cases
        self.assertEqual(round(fraction * 5000), 27)
        hits = self.result['hit_times']
        self.assertEqual((hits['model'] == 'm2').sum(), round(fraction * 5000))
        self.assertTrue((hits['hit_day'] <= 100).all())

    def test_tail_divergence(self):
        m0 = self._cumulative_quantile('m0', 0.999)
        m2 = self._cumulative_quantile('m2', 0.999)
        self.assertGreaterEqual(m2, 10 * m0)

    def test_additive_stays_close(self):
        m0 = self._cumulative_quantile('m0', 0.99)
        m1 = self._cumulative_quantile('m1', 0.99)
        self.assertLess(abs(m1 / m0 - 1), 0.5)

    def test_shared_streams(self):
        again = branching_experiment(models=['m2'], horizon=10, n_draws=20, rng_seed=7)
        first = self.result['ensembles']['m2'].incidence[:20, :10]
        self.assertTrue(np.array_equal(again['ensembles']['m2'].incidence, first))


class TestMLRecovery(unittest.TestCase):
    def test_bias_and_coverage(self):
        summary, df = ml_recovery_experiment(n=200, n_days=20, shape=1.2, rate=1.0, rng_seed=11)
        self.assertEqual(len(df), 200)
        self.assertAlmostEqual(summary['true_r'], 1.2)
        self.assertGreater(summary['mean_bias'], 0.0)
        self.assertLess(summary['coverage'], 0.5)
        self.assertTrue((df['low'] <= df['r_hat']).all())

    def test_short_series(self):
        with self.assertRaises(ValueError):
            ml_recovery_experiment(n=2, n_days=1, rng_seed=1)


class TestSyntheticSnapshot(unittest.TestCase):
    def test_parse_back(self):
        text, laws = load_synthetic(n_days=60, random_seed=3)
        self.assertEqual(set(laws), {'Atlantis', 'Lemuria'})
        series = preprocess(text, 'Atlantis', population=10000000, window=1)
        self.assertEqual(len(series), 60)
        self.assertEqual(series.values[:7].tolist(), [20.0] * 7)
        self.assertTrue((series.values >= 0).all())

    def test_custom_law(self):
        law = RLawParams(2.0, 4.0)
        text, laws = load_synthetic(regions=['Mu'], n_days=40, r_laws={'Mu': law})
        self.assertEqual(laws['Mu'], law)
        series = preprocess(text, 'Mu', window=1)
        # mean R of 0.5 dies down
        self.assertLess(series.values[-5:].mean(), 20.0)

    def test_deterministic(self):
        self.assertEqual(load_synthetic(n_days=30)[0], load_synthetic(n_days=30)[0])


if __name__ == '__main__':
    unittest.main()
