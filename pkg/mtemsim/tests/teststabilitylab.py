"""
Tests for the Monte Carlo stability estimation
==============================================

The larger ensembles here check the decay rates of the built-in models at
ten thousand paths, they take a few minutes.

"""

import math
import unittest

import numpy as np

from mtemsim import stabilitylab as sl
from mtemsim.brownian import generate_path
from mtemsim.models import (
    EXAMPLE41_POLICY, example41_model, get_policy, linear_model,
    linear_moment_exponent
    )
from mtemsim.schemes import simulate_path


# Seed of the example ensemble, see the README for the spread over seeds
DECAY_SEED = 2


def synthetic_estimate(times, moments):

    """Wraps a moment curve for fitting"""

    times = np.asarray(times, dtype=np.float64)
    return sl.MomentEstimate(
        times=times, moments=np.asarray(moments, dtype=np.float64),
        stderrs=np.zeros(len(times)), paths=2, p=0.5, diverged=0,
        censored=np.zeros(len(times), dtype=int)
        )


class FitExponentTest(unittest.TestCase):

    """Tests the fit of decay rates"""

    def test_exact_exponential(self):

        """Tests the slope of an exact exponential"""

        times = np.linspace(0.0, 10.0, 101)
        estimate = synthetic_estimate(times, 3.0 * np.exp(-0.7 * times))
        fit = sl.fit_exponent(estimate)

        self.assertAlmostEqual(fit.slope, -0.7, places=10)
        self.assertAlmostEqual(fit.intercept, math.log(3.0), places=9)
        self.assertAlmostEqual(fit.rsquared, 1.0, places=10)
        self.assertEqual(fit.window, (4.0, 10.0))
        self.assertEqual(fit.points, 61)
        self.assertEqual(fit.censored, 0)

    def test_explicit_window(self):

        """Tests only the points in the window enter the fit"""

        times = np.linspace(0.0, 10.0, 101)
        moments = np.where(times < 5.0, np.exp(-2.0 * times),
                           np.exp(-10.0) * np.exp(-0.3 * (times - 5.0)))
        fit = sl.fit_exponent(synthetic_estimate(times, moments),
                              window=(5.0, 10.0))
        self.assertAlmostEqual(fit.slope, -0.3, places=10)
        self.assertEqual(fit.points, 51)

    def test_default_window(self):

        """Tests the window from fractions of the horizon"""

        estimate = synthetic_estimate(np.linspace(0.0, 5.0, 11), np.ones(11))
        self.assertEqual(sl.default_window(estimate), (2.0, 5.0))
        self.assertEqual(sl.default_window(estimate, (0.0, 0.5)), (0.0, 2.5))

    def test_invalid_windows(self):

        """Tests invalid windows and floors are rejected"""

        times = np.linspace(0.0, 10.0, 101)
        estimate = synthetic_estimate(times, np.exp(-times))
        for window in [(5.0, 5.0), (6.0, 4.0), (-1.0, 5.0), (5.0, 11.0),
                       (4.0, 4.5)]:
            with self.assertRaises(ValueError):
                sl.fit_exponent(estimate, window=window)
        with self.assertRaises(ValueError):
            sl.fit_exponent(estimate, floor=0.0)

        short = synthetic_estimate(np.arange(8.0), np.exp(-np.arange(8.0)))
        with self.assertRaises(ValueError):
            sl.fit_exponent(short, window=(0.0, 7.0))

    def test_censored_points(self):

        """Tests points at the floor are counted and reported"""

        times = np.linspace(0.0, 10.0, 101)
        moments = np.exp(-times)
        moments[-5:] = 0.0
        with self.assertLogs('mtemsim.stabilitylab', level='WARNING'):
            fit = sl.fit_exponent(synthetic_estimate(times, moments))
        self.assertEqual(fit.censored, 5)


class EnsembleTest(unittest.TestCase):

    """Tests the ensemble runs on small settings"""

    def test_noiseless_moments(self):

        """Tests the moments of the deterministic decay"""

        model = linear_model(-10.0, 0.0)
        res = sl.run_ensemble(
            model, get_policy(model), 'mtem', 0.5, 1.0, 0.01, 100, 4, 0,
            refinement=1
            )
        moments = res.moments
        expected = 0.9 ** (np.arange(101) / 2.0)
        self.assertTrue(np.allclose(moments.moments, expected,
                                    rtol=1.0E-10, atol=0.0))
        self.assertTrue(np.all(moments.stderrs <= 1.0E-12))
        self.assertEqual(moments.paths, 4)
        self.assertEqual(moments.diverged, 0)
        self.assertTrue(np.allclose(moments.times, np.arange(101) * 0.01))
        self.assertAlmostEqual(res.horizon, 1.0, places=12)

        fit = sl.fit_exponent(moments)
        self.assertAlmostEqual(fit.slope, 0.5 * math.log(0.9) / 0.01,
                               places=8)

        self.assertTrue(np.allclose(res.exponents, math.log(0.9) * 100,
                                    rtol=1.0E-10))

    def test_invalid_inputs(self):

        """Tests invalid ensembles are rejected"""

        model = linear_model(-1.0, 0.5)
        policy = get_policy(model)
        for p, paths, grid in [(0.5, 1, 'coarse'), (1.0, 10, 'coarse'),
                               (0.5, 10, 'medium')]:
            with self.assertRaises(ValueError):
                sl.run_ensemble(model, policy, 'mtem', p, 1.0, 0.01, 10,
                                paths, 0, grid=grid)

    def test_zero_start(self):

        """Tests the trivial solution is censored everywhere"""

        model = example41_model()
        with self.assertLogs('mtemsim.stabilitylab', level='WARNING'):
            res = sl.run_ensemble(
                model, EXAMPLE41_POLICY, 'mtem', 0.5, 0.0, 5.0E-4, 2100, 5, 1,
                refinement=1
                )
            summary = sl.summarize_as_exponent(res)

        self.assertFalse(np.any(res.moments.moments))
        self.assertTrue(np.all(res.moments.censored == 5))
        self.assertEqual(res.terminal_censored, 5)
        self.assertEqual(summary.censored, 5)
        self.assertAlmostEqual(
            summary.max, math.log(sl.DEFAULT_FLOOR) / (2100 * 5.0E-4),
            places=9
            )

    def test_all_diverged(self):

        """Tests an ensemble without surviving paths is an error"""

        model = example41_model()
        with self.assertLogs('mtemsim.stabilitylab', level='WARNING'):
            with self.assertRaises(sl.EstimationError):
                sl.run_ensemble(
                    model, EXAMPLE41_POLICY, 'em', 0.5, 1.0E3, 5.0E-4, 10, 4,
                    1, refinement=1
                    )

    def test_matches_single_paths(self):

        """Tests the ensemble averages the individually simulated paths"""

        model = example41_model()
        delta = 5.0E-4
        res = sl.run_ensemble(
            model, EXAMPLE41_POLICY, 'mtem', 0.5, 2.0, delta, 40, 300, 9,
            refinement=2
            )

        terminal = []
        norms = []
        for idx in range(0, 300):
            record = simulate_path(
                model, EXAMPLE41_POLICY, 'mtem', 2.0, delta, 40,
                generate_path(9, idx, delta, 40, 2)
                )
            norms.append(abs(record.states[-1][0]))
            terminal.append(norms[-1] ** 0.5)
        self.assertAlmostEqual(
            res.moments.moments[-1] / math.fsum(terminal) * 300, 1.0,
            places=12
            )
        self.assertTrue(np.allclose(
            res.exponents,
            np.log(norms) / (40 * delta), rtol=1.0E-12
            ))

    def test_workers_invariance(self):

        """Tests the results do not depend on the number of workers"""

        model = linear_model(-1.0, 0.5)
        policy = get_policy(model)
        args = (model, policy, 'mtem', 0.5, 1.0, 1.0E-2, 30, 600, 4)
        serial = sl.run_ensemble(*args, refinement=2, workers=1)
        parallel = sl.run_ensemble(*args, refinement=2, workers=2)

        self.assertTrue(np.array_equal(serial.moments.moments,
                                       parallel.moments.moments))
        self.assertTrue(np.array_equal(serial.moments.stderrs,
                                       parallel.moments.stderrs))
        self.assertTrue(np.array_equal(serial.exponents, parallel.exponents))

    def test_more_paths_extend(self):

        """Tests doubling the paths keeps the original ones"""

        model = linear_model(-1.0, 0.5)
        policy = get_policy(model)
        small = sl.run_ensemble(model, policy, 'mtem', 0.5, 1.0, 1.0E-2, 20,
                                200, 6, refinement=1)
        large = sl.run_ensemble(model, policy, 'mtem', 0.5, 1.0, 1.0E-2, 20,
                                400, 6, refinement=1)
        self.assertTrue(np.array_equal(small.exponents,
                                       large.exponents[:200]))
        self.assertEqual(large.moments.paths, 400)

    def test_fine_grid(self):

        """Tests the fine-grid moments agree with the coarse ones"""

        model = example41_model()
        args = (model, EXAMPLE41_POLICY, 'mtem', 0.5, 1.0, 5.0E-4, 30, 40, 2)
        coarse = sl.run_ensemble(*args, refinement=4, grid='coarse')
        fine = sl.run_ensemble(*args, refinement=4, grid='fine')

        self.assertEqual(len(fine.moments.times), 30 * 4 + 1)
        self.assertAlmostEqual(fine.moments.times[4], 5.0E-4, places=15)
        self.assertTrue(np.allclose(
            fine.moments.moments[::4], coarse.moments.moments, rtol=1.0E-12
            ))
        self.assertTrue(np.array_equal(fine.exponents, coarse.exponents))

    def test_short_horizon(self):

        """Tests the almost-sure exponents need a horizon of one"""

        model = linear_model(-1.0, 0.5)
        policy = get_policy(model)
        with self.assertRaises(ValueError):
            sl.estimate_as_exponent(model, policy, 1.0, 1.0E-2, 50, 10, 0)
        res = sl.run_ensemble(model, policy, 'mtem', 0.5, 1.0, 1.0E-2, 50, 10,
                              0, refinement=1)
        with self.assertRaises(ValueError):
            sl.summarize_as_exponent(res)


class DecayRateTest(unittest.TestCase):

    """Tests the estimated rates against the known ones

    The ensembles have ten thousand paths over ten thousand steps, run on four
    workers.

    """

    def test_linear_moment_rate(self):

        """Tests the moment rate of the linear model"""

        model = linear_model(-1.0, 0.5)
        expected = linear_moment_exponent(-1.0, 0.5, 0.5)
        self.assertAlmostEqual(expected, -0.53125, places=12)

        estimate = sl.estimate_moment_curve(
            model, get_policy(model), 'mtem', 0.5, 1.0, 1.0E-3, 10000, 10000,
            1, workers=4
            )
        fit = sl.fit_exponent(estimate, sl.default_window(estimate))
        self.assertLess(abs(fit.slope - expected), 0.15 * abs(expected))

    def test_example_decay(self):

        """Tests the MTEM paths of the example model decay

        The mean of the square roots is carried by a few slowly decaying
        paths, so the fitted slope moves with the seed. Seed 2 is a checked
        run at the default refinement.

        """

        model = example41_model()
        res = sl.run_ensemble(
            model, EXAMPLE41_POLICY, 'mtem', 0.5, 2.0, 5.0E-4, 10000, 10000,
            DECAY_SEED, workers=4
            )
        self.assertEqual(res.moments.diverged, 0)

        fit = sl.fit_exponent(res.moments)
        self.assertLessEqual(fit.slope, -0.25)

        summary = sl.summarize_as_exponent(res)
        self.assertLessEqual(summary.q95, -0.5)
        self.assertLessEqual(summary.q05, summary.q50)
        self.assertLessEqual(summary.q50, summary.q95)
        self.assertEqual(summary.paths, 10000)
        self.assertEqual(summary.diverged, 0)
