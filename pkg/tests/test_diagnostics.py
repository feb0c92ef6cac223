# -*- coding: utf-8 -*-
"""Split R-hat and effective sample size."""
import unittest
import numpy as np
from hetr.evaluator.diagnostics import (
    split_chains,
    split_rhat,
    effective_sample_size,
    diagnose,
)
from hetr.models.hmc import PosteriorDraws
from hetr.tools.exceptions import TooFewDrawsError


def _ar1(rng, n_chains, n, rho):
    out = np.zeros((n_chains, n))
    out[:, 0] = rng.standard_normal(n_chains)
    noise = rng.standard_normal((n_chains, n)) * np.sqrt(1 - rho**2)
    for t in range(1, n):
        out[:, t] = rho * out[:, t - 1] + noise[:, t]
    return out


class TestDiagnostics(unittest.TestCase):
    def test_split_chains(self):
        arr = np.arange(10).reshape(2, 5)
        self.assertEqual(split_chains(arr).tolist(), [[0, 1], [5, 6], [3, 4], [8, 9]])

    def test_iid_noise(self):
        rng = np.random.default_rng(0)
        arr = rng.standard_normal((4, 1000, 3))
        diag = diagnose(arr)
        self.assertTrue(((diag.rhat >= 0.99) & (diag.rhat <= 1.02)).all())
        self.assertTrue((diag.n_eff > 3000).all())
        self.assertTrue(diag.converged)
        self.assertEqual(diag.failing(), [])

    def test_separated_chains(self):
        rng = np.random.default_rng(1)
        arr = rng.standard_normal((2, 500))
        arr[1] += 5.0
        self.assertGreater(split_rhat(arr), 1.1)
        diag = diagnose(arr)
        self.assertFalse(diag.converged)
        self.assertEqual(diag.failing(), ['param_0'])

    def test_drifting_chain(self):
        """Split chains catch a trend inside each chain."""
        rng = np.random.default_rng(2)
        arr = rng.standard_normal((4, 400)) * 0.1 + np.linspace(0, 3, 400)
        self.assertGreater(split_rhat(arr), 1.1)

    def test_autocorrelated_ess(self):
        rng = np.random.default_rng(3)
        arr = _ar1(rng, 4, 2000, 0.9)
        # theoretical n (1 - rho) / (1 + rho)
        expected = 8000 * 0.1 / 1.9
        ess = effective_sample_size(arr)
        self.assertGreater(ess, 0.6 * expected)
        self.assertLess(ess, 1.5 * expected)
        diag = diagnose(arr)
        self.assertFalse(diag.converged)
        self.assertLess(diag.n_eff['param_0'], 0.2 * diag.n_draws)

    def test_too_few(self):
        with self.assertRaises(TooFewDrawsError):
            diagnose(np.zeros((1, 100)))
        with self.assertRaises(TooFewDrawsError):
            diagnose(np.zeros((4, 9)))

    def test_posterior_draws_names(self):
        rng = np.random.default_rng(4)
        samples = rng.standard_normal((3, 50, 4))
        draws = PosteriorDraws(samples, latent_days=[0, 2])
        diag = diagnose(draws)
        self.assertEqual(list(diag.rhat.index), ['alpha', 'beta', 'log_I_1', 'log_I_3'])
        record = diag.to_dict()
        self.assertEqual(record['n_draws'], 150)
        self.assertEqual(set(record['rhat']), set(diag.rhat.index))

    def test_constant_chains(self):
        self.assertEqual(split_rhat(np.ones((2, 20))), 1.0)


if __name__ == '__main__':
    unittest.main()
