# -*- coding: utf-8 -*-
"""Random streams, special functions, output files and job counts."""
import os
import tempfile
import unittest
import numpy as np
import pandas as pd
from scipy import special, stats
from hetr.tools.random import stream, child_seed
from hetr.tools.special import gamma_quantile, gamma_logpdf, poisson_logpmf, gamma_from_uniform
from hetr.tools.io import OutputDir, read_json, slugify, dumps
from hetr.tools.cpu_count import cpu_count, set_n_jobs


class TestRandom(unittest.TestCase):
    def test_streams_repeat(self):
        a = stream(5, 'France', 0, 3).random(10)
        b = stream(5, 'France', 0, 3).random(10)
        self.assertTrue(np.array_equal(a, b))

    def test_paths_are_independent(self):
        base = stream(5, 'France', 0).random(10)
        self.assertFalse(np.array_equal(base, stream(5, 'France', 1).random(10)))
        self.assertFalse(np.array_equal(base, stream(5, 'Italy', 0).random(10)))
        self.assertFalse(np.array_equal(base, stream(6, 'France', 0).random(10)))

    def test_child_seed(self):
        seed = child_seed(5, 'synth', 'branching')
        self.assertEqual(seed, child_seed(5, 'synth', 'branching'))
        self.assertNotEqual(seed, child_seed(5, 'synth', 'ml-recovery'))
        self.assertGreaterEqual(seed, 0)
        self.assertLess(seed, 2**63)

    def test_invalid(self):
        with self.assertRaises(ValueError):
            stream(None)
        with self.assertRaises(ValueError):
            stream(1, -1)


class TestSpecial(unittest.TestCase):
    def test_gamma_quantile(self):
        for shape, rate, level in [(2.0, 2.0, 0.5), (1.2, 1.0, 0.99), (0.3, 5.0, 0.6), (50.0, 0.1, 0.95)]:
            want = special.gammaincinv(shape, level) / rate
            self.assertAlmostEqual(gamma_quantile(shape, rate, level) / want, 1.0, places=8)
        self.assertEqual(gamma_quantile(2.0, 1.0, 0.0), 0.0)
        self.assertEqual(gamma_quantile(2.0, 1.0, 1.0), np.inf)
        with self.assertRaises(ValueError):
            gamma_quantile(2.0, 1.0, 1.5)
        with self.assertRaises(ValueError):
            gamma_quantile(-1.0, 1.0, 0.5)

    def test_gamma_from_uniform(self):
        u = np.array([0.1, 0.5, 0.9])
        self.assertTrue(np.allclose(gamma_from_uniform(3.0, 2.0, u), stats.gamma.ppf(u, 3.0, scale=0.5)))

    def test_densities(self):
        self.assertAlmostEqual(gamma_logpdf(1.5, 3.0, 2.0), stats.gamma.logpdf(1.5, 3.0, scale=0.5))
        self.assertAlmostEqual(float(poisson_logpmf(4, 2.5)), stats.poisson.logpmf(4, 2.5))

    def test_poisson_edges(self):
        self.assertEqual(float(poisson_logpmf(0, 0.0)), 0.0)
        self.assertEqual(float(poisson_logpmf(3, 0.0)), -np.inf)
        self.assertAlmostEqual(float(poisson_logpmf(0, 2.0)), -2.0)


class TestOutputDir(unittest.TestCase):
    def test_write_and_guard(self):
        with tempfile.TemporaryDirectory() as tmp:
            out = OutputDir(os.path.join(tmp, 'run'), force=False)
            path = out.write_json('a/b.json', {'x': np.float64(1.5), 'n': np.int64(2)})
            self.assertEqual(read_json(path), {'n': 2, 'x': 1.5})
            with self.assertRaises(FileExistsError):
                out.write_text('a/b.json', 'again')
            out.write_text('a/b.json', 'again', force=True)
            with open(path) as f:
                self.assertEqual(f.read(), 'again')
            with self.assertRaises(ValueError):
                out.write_text('../escape.txt', 'no')
            self.assertEqual([f for f in os.listdir(os.path.dirname(path)) if f.startswith('.tmp_')], [])

    def test_csv_bytes(self):
        with tempfile.TemporaryDirectory() as tmp:
            out = OutputDir(os.path.join(tmp, 'run'), force=False)
            path = out.write_csv('t.csv', pd.DataFrame({'a': [1, 2], 'b': [0.5, 1 / 3]}), index=False)
            with open(path, 'rb') as f:
                self.assertEqual(f.read(), b'a,b\n1,0.5\n2,0.3333333333\n')

    def test_stable_json(self):
        self.assertEqual(dumps({'b': 1, 'a': 2}), dumps({'a': 2, 'b': 1}))

    def test_missing(self):
        with self.assertRaises(FileNotFoundError):
            read_json('/nonexistent/hetr.json')

    def test_slugify(self):
        self.assertEqual(slugify('Korea, South'), 'korea_south')
        self.assertEqual(slugify('United Kingdom'), 'united_kingdom')


class TestJobs(unittest.TestCase):
    def test_set_n_jobs(self):
        self.assertEqual(set_n_jobs(None), 1)
        self.assertEqual(set_n_jobs(3), 3)
        self.assertEqual(set_n_jobs('2'), 2)
        self.assertGreaterEqual(set_n_jobs('auto'), 1)
        self.assertGreaterEqual(set_n_jobs(-1), 1)
        self.assertGreaterEqual(cpu_count(), 1)
        with self.assertRaises(ValueError):
            set_n_jobs('many')


if __name__ == '__main__':
    unittest.main()
