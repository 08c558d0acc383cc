"""
Executable checks of the truncation properties
==============================================

Three properties of the modified truncation make the stability of the MTEM
scheme work, and each can be checked on samples here:

global Lipschitz continuity
    For a fixed radius h, both truncated coefficients are globally Lipschitz
    with constant :math:`3 L_h`. A single violating pair is a failure, the
    property is a theorem rather than a statistic.

preservation of lambda
    The stability functional built from the truncated coefficients is
    bounded by the same :math:`-\\lambda` as the original one. Outside the
    ball it equals the original functional on the sphere of radius h.

one-step contraction
    For a small step, :math:`\\mathbb{E}|X_1|^p \\le (1 - p(\\lambda -
    \\varepsilon)\\Delta)|x|^p` from any start x. The expectation over the
    scalar Brownian increment is evaluated by Gauss-Hermite quadrature.

"""

import collections
import math

import numpy as np
from numpy.polynomial import hermite_e

from .sdecore import (
    SamplingPlan, sup_or_fail, as_states, difference_ratios, sample_points,
    sample_shell
    )
from .truncation import (
    eval_f_delta, eval_g_delta, truncate, truncated_functional
    )


SLACK = 1.0E-9


#
# Global Lipschitz continuity
# ---------------------------
#

GlobalLipschitzReport = collections.namedtuple('GlobalLipschitzReport', [
    'radius',
    'bound',
    'max_ratio_drift',
    'max_ratio_diffusion',
    'cases',
    'verdict',
    ])


def _lipschitz_pairs(rng, trials, dimension, radius, spread):

    """Draws pairs for the three cases, both inside, both outside, straddling

    The trials are split evenly among the cases.

    """

    n_in = trials // 3
    n_out = trials // 3
    n_str = trials - n_in - n_out
    outer = spread * radius

    x = np.concatenate([
        sample_shell(rng, n_in, dimension, 0.0, radius),
        sample_shell(rng, n_out, dimension, radius, outer),
        sample_shell(rng, n_str, dimension, 0.0, radius),
        ])
    x_bar = np.concatenate([
        sample_shell(rng, n_in, dimension, 0.0, radius),
        sample_shell(rng, n_out, dimension, radius, outer),
        sample_shell(rng, n_str, dimension, radius, outer),
        ])
    keep = np.any(x != x_bar, axis=-1)
    return x[keep], x_bar[keep]


def verify_lemma_global_lipschitz(model, radius, trials=100000, spread=10.0,
                                  seed=0):

    """Checks the global Lipschitz bound 3 L_h of the truncated coefficients

    :param model: The SDE model
    :param radius: The truncation radius h
    :param trials: The number of random pairs, at least one
    :param spread: The outer sampling radius as a multiple of h
    :param seed: The seed for drawing the pairs
    :returns: A :py:class:`GlobalLipschitzReport`, with the number of pairs
        in each case as a dictionary

    """

    if trials < 1:
        raise ValueError('number of trials %r is not positive' % trials)

    rng = np.random.default_rng([seed, trials])
    x, x_bar = _lipschitz_pairs(rng, trials, model.dimension, radius, spread)

    inside = np.linalg.norm(x, axis=-1) <= radius
    inside_bar = np.linalg.norm(x_bar, axis=-1) <= radius
    cases = {
        'inside': int(np.count_nonzero(inside & inside_bar)),
        'outside': int(np.count_nonzero(~inside & ~inside_bar)),
        'straddling': int(np.count_nonzero(inside != inside_bar)),
        }

    def trunc_f(arr):
        return truncate(model.drift, radius, arr)

    def trunc_g(arr):
        return truncate(model.diffusion, radius, arr)

    ratio_f = float(np.max(difference_ratios(trunc_f, x, x_bar)))
    ratio_g = float(np.max(difference_ratios(trunc_g, x, x_bar)))
    bound = 3.0 * float(model.lipschitz_bound(radius))

    return GlobalLipschitzReport(
        radius=radius, bound=bound,
        max_ratio_drift=ratio_f, max_ratio_diffusion=ratio_g, cases=cases,
        verdict=max(ratio_f, ratio_g) <= bound * (1.0 + SLACK)
        )


#
# Preservation of lambda
# ----------------------
#

LambdaPreservedReport = collections.namedtuple('LambdaPreservedReport', [
    'radius',
    'sup',
    'inf',
    'bound',
    'verdict',
    ])


def verify_lemma_lambda_preserved(model, radius, p, lam, plan=None):

    """Checks the truncated functional stays below minus lambda

    The functional of the truncated pair is sampled over radii from h / 100
    to 100 h, with the counts and the seed of the plan.

    :returns: A :py:class:`LambdaPreservedReport`, passing iff the sampled
        supremum is at most -lambda + 1e-6

    """

    plan = SamplingPlan() if plan is None else plan
    plan = plan._replace(r_min=radius / 100.0, r_max=radius * 100.0)
    points = sample_points(plan, model.dimension)
    values = truncated_functional(model, radius, p, points)
    sup = sup_or_fail(values, points)

    return LambdaPreservedReport(
        radius=radius, sup=sup, inf=float(np.min(values)), bound=-lam,
        verdict=sup <= -lam + 1.0E-6
        )


#
# One-step contraction
# --------------------
#

DEFAULT_NODES = 120


def one_step_moment_ratio(model, radius, x, delta, p, nodes=DEFAULT_NODES):

    """Evaluates E|X_1|^p / |x|^p for one MTEM step from x by quadrature

    The increment is :math:`\\sqrt{\\Delta} Z` with a standard normal Z, and
    the expectation is the probabilists' Gauss-Hermite rule with the given
    number of nodes.

    """

    x = as_states(model, x)
    norm = float(np.linalg.norm(x))
    if norm == 0.0:
        raise ValueError('the ratio is undefined at the origin')

    z, weights = hermite_e.hermegauss(nodes)
    weights = weights / math.sqrt(2.0 * math.pi)

    f_val = eval_f_delta(model, radius, x)
    g_val = eval_g_delta(model, radius, x)
    ends = (
        x[None, :] + f_val[None, :] * delta +
        g_val[None, :] * (math.sqrt(delta) * z)[:, None]
        )
    moment = math.fsum(weights * np.linalg.norm(ends, axis=-1) ** p)
    return moment / norm ** p


ContractionReport = collections.namedtuple('ContractionReport', [
    'rows',
    'bound',
    'verdict',
    ])


def verify_one_step_contraction(model, radius, states, delta, p, lam,
                                epsilon, nodes=DEFAULT_NODES):

    """Checks the one-step contraction at several starting states

    :returns: A :py:class:`ContractionReport`, with rows of (state, ratio),
        passing iff every ratio is at most 1 - p (lam - epsilon) delta

    """

    bound = 1.0 - p * (lam - epsilon) * delta
    rows = [
        (state, one_step_moment_ratio(model, radius, state, delta, p, nodes))
        for state in states
        ]
    return ContractionReport(
        rows=rows, bound=bound,
        verdict=all(ratio <= bound for _, ratio in rows)
        )
