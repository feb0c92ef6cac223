# -*- coding: utf-8 -*-
"""Generative models, weights, the simulator and ensemble summaries."""
import unittest
import numpy as np
import pandas as pd
from hetr.models.base import (
    RLawParams,
    infectivity_weights,
    TrajectoryEnsemble,
    quantile_envelope,
    stopping_time,
)
from hetr.models.basics import ConstantR, AdditiveGamma, MultiplicativeGamma, model_from_name
from hetr.models.renewal import FittedRenewal, step_incidence, simulate
from hetr.tools.exceptions import MissingPopulationError
from hetr.tools.shaping import IncidenceSeries


def _seed(values, population=None):
    index = pd.date_range("2020-04-01", periods=len(values), freq='D')
    return IncidenceSeries("Testland", pd.Series(np.asarray(values, dtype=float), index=index), population)


class TestWeights(unittest.TestCase):
    def test_sum_to_one(self):
        for K in range(1, 101):
            self.assertLess(abs(infectivity_weights(K).w.sum() - 1.0), 1e-12)

    def test_known_values(self):
        self.assertEqual(infectivity_weights(1).w.tolist(), [1.0])
        w3 = infectivity_weights(3).w
        self.assertTrue(np.allclose(w3, [1 / 2, 1 / 3, 1 / 6], rtol=0, atol=1e-15))
        self.assertEqual(infectivity_weights(7).w[0], 0.25)

    def test_bad_K(self):
        with self.assertRaises(ValueError):
            infectivity_weights(0)

    def test_truncated_rate(self):
        w = infectivity_weights(3)
        # only yesterday and the day before are known: weights 1/2, 1/3 renormalized
        self.assertAlmostEqual(w.rate([6.0, 12.0]), (12 * 0.5 + 6 / 3) / (5 / 6))
        self.assertAlmostEqual(w.rate([1.0, 6.0, 12.0, 24.0]), 24 / 2 + 12 / 3 + 6 / 6)

    def test_matrix_rows(self):
        W = infectivity_weights(2).matrix(4)
        self.assertEqual(W[0].tolist(), [0, 0, 0, 0])
        self.assertEqual(W[1].tolist(), [1, 0, 0, 0])
        self.assertTrue(np.allclose(W[3], [0, 1 / 3, 2 / 3, 0]))


class TestRLaw(unittest.TestCase):
    def test_unconstrained(self):
        p = RLawParams.from_unconstrained(0.0, 0.0)
        self.assertEqual((p.a, p.b), (2.0, 2.0))
        self.assertEqual(p.mean, 1.0)
        self.assertAlmostEqual(RLawParams(4.0, 2.0).cv, 0.5)

    def test_invalid(self):
        with self.assertRaises(ValueError):
            RLawParams(0.0, 1.0)


class TestBasics(unittest.TestCase):
    def test_mean_preservation(self):
        """M0, M1 and M2 share the next-day mean R0 * X_t."""
        for name in ['m0', 'm1', 'm2']:
            model = model_from_name(name, r0=1.2, alpha=1.2)
            rng = np.random.default_rng(11)
            draws = step_incidence(model, [100.0], rng, size=1000000)
            self.assertLess(abs(draws.mean() / 120.0 - 1), 0.01, msg=name)

    def test_cv_laws(self):
        rng = np.random.default_rng(5)
        m1 = AdditiveGamma(r0=1.0, alpha=1.2)
        m2 = MultiplicativeGamma(r0=1.0, alpha=1.2)
        for x in [10.0, 100.0, 1000.0]:
            lam1 = m1.sample_rate([x], rng, size=200000)
            lam2 = m2.sample_rate([x], rng, size=200000)
            self.assertLess(abs(lam1.std() / lam1.mean() / m1.rate_cv(x) - 1), 0.05)
            self.assertLess(abs(lam2.std() / lam2.mean() / m2.rate_cv(x) - 1), 0.05)
        self.assertAlmostEqual(m1.rate_cv(100.0), (1.2 * 100) ** -0.5)
        self.assertAlmostEqual(m2.rate_cv(100.0), m2.rate_cv(1.0))

    def test_examples(self):
        rng = np.random.default_rng(0)
        self.assertEqual(step_incidence(ConstantR(2.0), [0.0], rng), 0)
        draws = step_incidence(ConstantR(2.0), [100.0], rng, size=100000)
        self.assertLess(abs(draws.mean() - 200.0), 1.0)
        lam = MultiplicativeGamma(r0=1.0, alpha=1.0).sample_rate([100.0], rng, size=200000)
        self.assertLess(abs(lam.mean() - 100.0), 1.5)
        self.assertLess(abs(lam.std() / lam.mean() - 1.0), 0.02)

    def test_empty_history(self):
        with self.assertRaises(ValueError):
            step_incidence(ConstantR(1.0), [], np.random.default_rng(0))

    def test_model_names(self):
        self.assertIsInstance(model_from_name('M2'), MultiplicativeGamma)
        self.assertIsInstance(model_from_name('additivegamma'), AdditiveGamma)
        self.assertEqual(model_from_name('m0', r0=1.5).get_params(), {'r0': 1.5})
        with self.assertRaises(ValueError):
            model_from_name('m3')


class TestSimulate(unittest.TestCase):
    def test_extinct(self):
        ens = simulate(ConstantR(0.0), [100], horizon=10, n_draws=50,
                       population_cap_fraction=None, rng_seed=1)
        self.assertEqual(ens.incidence.shape, (50, 10))
        self.assertEqual(ens.incidence.sum(), 0)

    def test_critical_mean(self):
        ens = simulate(ConstantR(1.0), [100], horizon=100, n_draws=5000,
                       population_cap_fraction=None, rng_seed=2)
        final = ens.incidence[:, -1]
        se = final.std(ddof=1) / np.sqrt(final.size)
        self.assertLess(abs(final.mean() - 100.0), 3 * se)

    def test_deterministic_and_block_invariant(self):
        model = MultiplicativeGamma(r0=1.1, alpha=2.0)
        kwargs = dict(horizon=15, n_draws=40, population_cap_fraction=None, rng_seed=9)
        a = simulate(model, [50], block_size=7, **kwargs)
        b = simulate(model, [50], block_size=250, **kwargs)
        c = simulate(model, [50], block_size=5, n_jobs=2, **kwargs)
        self.assertTrue((a.incidence == b.incidence).all())
        self.assertTrue((a.incidence == c.incidence).all())
        d = simulate(model, [50], **dict(kwargs, rng_seed=10))
        self.assertFalse((a.incidence == d.incidence).all())

    def test_fitted_renewal_mean(self):
        law = RLawParams(4.0, 2.0)
        ens = simulate(FittedRenewal(law, infectivity_weights(1)), [100], horizon=1,
                       n_draws=20000, population_cap_fraction=None, rng_seed=4)
        self.assertLess(abs(ens.incidence[:, 0].mean() / 200.0 - 1), 0.03)

    def test_zero_seed_days_have_zero_latent(self):
        model = FittedRenewal(RLawParams(3.0, 1.0), infectivity_weights(1))
        ens = simulate(model, [40, 0], horizon=3, n_draws=30,
                       population_cap_fraction=None, rng_seed=3)
        self.assertEqual(ens.incidence.sum(), 0)

    def test_zero_is_absorbing(self):
        for model in [AdditiveGamma(r0=1.0, alpha=1.2), MultiplicativeGamma(r0=1.0, alpha=1.2)]:
            ens = simulate(model, [0], horizon=20, n_draws=50,
                           population_cap_fraction=None, rng_seed=6)
            self.assertEqual(ens.incidence.sum(), 0, msg=model.name)
            # paths that die out stay at zero
            ens = simulate(model, [5], horizon=60, n_draws=300,
                           population_cap_fraction=None, rng_seed=6)
            for path in ens.incidence:
                dead = np.flatnonzero(path == 0)
                if dead.size:
                    self.assertEqual(path[dead[0]:].sum(), 0, msg=model.name)
        additive = FittedRenewal(RLawParams(3.0, 1.0), infectivity_weights(7), variant='additive')
        ens = simulate(additive, [0] * 7, horizon=10, n_draws=20,
                       population_cap_fraction=None, rng_seed=6)
        self.assertEqual(ens.incidence.sum(), 0)

    def test_additive_fit_projection(self):
        """Additive fits project with I = sum of X Gamma(a, b) draws, not X times one draw."""
        law = RLawParams(2.0, 2.0)
        kwargs = dict(horizon=1, n_draws=4000, population_cap_fraction=None, rng_seed=12)
        mult = simulate(FittedRenewal(law, infectivity_weights(1)), [100], **kwargs).incidence[:, 0]
        add = simulate(
            FittedRenewal(law, infectivity_weights(1), variant='additive'), [100], **kwargs
        ).incidence[:, 0]
        self.assertLess(abs(mult.mean() / 100.0 - 1), 0.05)
        self.assertLess(abs(add.mean() / 100.0 - 1), 0.02)
        # Var X = E I + Var I: 100 + 100^2 / 2 against 100 + 100 / 2
        self.assertLess(abs(mult.var(ddof=1) / 5100.0 - 1), 0.2)
        self.assertLess(abs(add.var(ddof=1) / 150.0 - 1), 0.2)
        model = FittedRenewal(law, variant='additive')
        self.assertAlmostEqual(model.rate_cv(100.0), 200.0 ** -0.5)
        self.assertEqual(model.get_params()['variant'], 'additive')
        self.assertEqual(model.with_intervention(None).variant, 'additive')
        with self.assertRaises(ValueError):
            FittedRenewal(law, variant='logistic')

    def test_from_posterior_keeps_variant(self):
        from hetr.models.hmc import PosteriorDraws

        for variant in ['multiplicative', 'additive']:
            draws = PosteriorDraws(np.zeros((2, 5, 2)), variant=variant)
            model = FittedRenewal.from_posterior(draws, infectivity_weights(1))
            self.assertEqual(model.variant, variant)
            self.assertEqual(model.n_params, 10)

    def test_population_cap(self):
        model = FittedRenewal(RLawParams(50.0, 10.0), infectivity_weights(7))
        with self.assertWarns(RuntimeWarning):
            ens = simulate(model, _seed([1000] * 7, population=10000), horizon=5,
                           n_draws=20, rng_seed=5, max_rejections=10)
        self.assertLessEqual(ens.incidence.max(), 100)
        self.assertEqual(ens.fraction_truncated, 1.0)

    def test_cap_needs_population(self):
        with self.assertRaises(MissingPopulationError):
            simulate(ConstantR(1.0), [10], horizon=2, n_draws=2, rng_seed=1)

    def test_bad_arguments(self):
        with self.assertRaises(ValueError):
            simulate(ConstantR(1.0), [10], horizon=0, n_draws=2,
                     population_cap_fraction=None, rng_seed=1)
        with self.assertRaises(ValueError):
            simulate(ConstantR(1.0), [10], horizon=2, n_draws=2, population_cap_fraction=None)

    def test_forecast_index(self):
        ens = simulate(ConstantR(1.0), _seed([5] * 7), horizon=3, n_draws=2,
                       population_cap_fraction=None, rng_seed=1)
        self.assertEqual(ens.forecast_index()[0], pd.Timestamp("2020-04-08"))


class TestEnsembleSummaries(unittest.TestCase):
    def test_identical_trajectories(self):
        ens = TrajectoryEnsemble(np.tile([3, 1, 4], (5, 1)))
        env = quantile_envelope(ens, [0.005, 0.5, 0.995])
        for col in env.columns:
            self.assertEqual(env[col].tolist(), [3.0, 1.0, 4.0])

    def test_two_point_median(self):
        ens = TrajectoryEnsemble(np.array([[0], [2]]))
        self.assertEqual(quantile_envelope(ens, [0.5]).iloc[0, 0], 1.0)

    def test_envelope_monotone_in_prob(self):
        rng = np.random.default_rng(1)
        ens = TrajectoryEnsemble(rng.poisson(20, size=(200, 10)))
        env = quantile_envelope(ens, [0.1, 0.5, 0.9]).to_numpy()
        self.assertTrue((np.diff(env, axis=1) >= 0).all())

    def test_envelope_bad_probs(self):
        ens = TrajectoryEnsemble(np.array([[1]]))
        with self.assertRaises(ValueError):
            quantile_envelope(ens, [])
        with self.assertRaises(ValueError):
            quantile_envelope(ens, [1.5])

    def test_stopping_time(self):
        ens = TrajectoryEnsemble(np.array([[10, 10, 10], [1, 1, 1], [30, 0, 0]]))
        fraction, hits = stopping_time(ens, threshold=25, horizon=3)
        self.assertAlmostEqual(fraction, 2 / 3)
        self.assertEqual(hits, [3, 1])
        fraction, hits = stopping_time(ens, threshold=0, horizon=3)
        self.assertEqual(fraction, 1.0)
        self.assertEqual(hits, [1, 1, 1])
        with self.assertRaises(ValueError):
            stopping_time(ens, horizon=4)

    def test_frame_round_trip(self):
        ens = TrajectoryEnsemble(np.array([[1, 2], [3, 4]]))
        back = TrajectoryEnsemble.from_frame(ens.to_frame())
        self.assertTrue((back.incidence == ens.incidence).all())
        self.assertEqual(list(ens.to_frame().columns), ['1', '2'])


if __name__ == '__main__':
    unittest.main()
