"""
SDE models and the stability functional
=======================================

This module contains the representation of the stochastic differential
equations that the package simulates,

.. math::

    dx(t) = f(x(t)) dt + g(x(t)) dB_t

with a state in :math:`\\mathbb{R}^d` and a **scalar** driving Brownian motion,
so that both the drift :math:`f` and the diffusion :math:`g` map states to
states.

Besides the model itself, the functional

.. math::

    \\Phi_p(x) = \\frac{\\langle x, f(x) \\rangle + |g(x)|^2 / 2}{|x|^2}
        + \\frac{p - 2}{2} \\frac{\\langle x, g(x) \\rangle^2}{|x|^4}

whose supremum over non-zero states is :math:`-\\lambda` is defined here,
together with a sampling estimator of :math:`\\lambda`.

All evaluators operate on the **last** axis of numpy arrays, so that a batch
of states with shape ``(n, d)`` can be evaluated in one call. This is what
makes the Monte Carlo part of the package fast enough.

"""

import collections
import fractions
import logging
import math

import numpy as np


logger = logging.getLogger(__name__)


#
# The exception classes
# ---------------------
#

class DimensionError(ValueError):

    """Raised when a state vector does not match the model dimension"""

    pass


class DomainError(ValueError):

    """Raised when a quantity is evaluated outside of its domain

    The stability functional, for instance, is undefined at the origin.

    """

    pass


class EvaluationError(ArithmeticError):

    """Raised when a functional evaluates to a non-finite value

    The first argument is the offending state, so that the error message can
    point to where the model misbehaves.

    """

    pass


#
# The model class
# ---------------
#
# Models are immutable named tuples. The drift and diffusion evaluators take a
# numpy array whose last axis has length ``dimension`` and return an array of
# the same shape. ``lipschitz_bound`` maps a radius R to the local Lipschitz
# constant L_R on the ball of radius R, and ``functional``, when not None, is
# a closed form ``functional(p, x)`` of the stability functional that avoids
# the cancellation of large terms in the raw quotient.
#

SdeModel = collections.namedtuple('SdeModel', [
    'name',
    'dimension',
    'drift',
    'diffusion',
    'lipschitz_bound',
    'functional',
    ])
SdeModel.__new__.__defaults__ = (None, )


StabilityParams = collections.namedtuple('StabilityParams', [
    'p',
    'lam',
    'epsilon',
    ])


def make_stability_params(p, lam, epsilon=None):

    """Makes a validated set of stability parameters

    :param p: The moment order, in the open interval (0, 1)
    :param lam: The decay rate lambda, positive
    :param epsilon: The slack, in (0, lam), default to half of lam
    :raises ValueError: if any of the constraints is violated

    """

    if not 0.0 < p < 1.0:
        raise ValueError('moment order p = %r is not in (0, 1)' % p)
    if not lam > 0.0:
        raise ValueError('lambda = %r is not positive' % lam)
    if epsilon is None:
        epsilon = lam / 2.0
    if not 0.0 < epsilon < lam:
        raise ValueError(
            'epsilon = %r is not in (0, lambda = %r)' % (epsilon, lam)
            )

    return StabilityParams(p=float(p), lam=float(lam), epsilon=float(epsilon))


def as_states(model, x):

    """Converts the input into a float array of states of the model

    Scalars are accepted for one-dimensional models.

    :raises DimensionError: if the last axis does not match the dimension

    """

    arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if arr.shape[-1] != model.dimension:
        raise DimensionError(
            'state of shape %s given for model %s of dimension %d' % (
                arr.shape, model.name, model.dimension
                )
            )
    return arr


def evaluate_drift(model, x):

    """Evaluates the drift f of the model at the state(s) x"""

    return model.drift(as_states(model, x))


def evaluate_diffusion(model, x):

    """Evaluates the diffusion g of the model at the state(s) x"""

    return model.diffusion(as_states(model, x))


def check_trivial_solution(model):

    """Tests if zero is the trivial solution, f(0) = 0 and g(0) = 0 exactly"""

    zero = np.zeros(model.dimension)
    return bool(
        np.all(model.drift(zero) == 0.0) and
        np.all(model.diffusion(zero) == 0.0)
        )


#
# The stability functional
# ------------------------
#


def functional_quotient(x, f_val, g_val, p):

    """Evaluates the raw stability quotient from coefficient values

    This is the plain formula, vectorized over the leading axes. It is shared
    by the untruncated and the truncated functional.

    """

    r2 = np.sum(x * x, axis=-1)
    xf = np.sum(x * f_val, axis=-1)
    gg = np.sum(g_val * g_val, axis=-1)
    xg = np.sum(x * g_val, axis=-1)

    return (xf + 0.5 * gg) / r2 + 0.5 * (p - 2.0) * xg * xg / (r2 * r2)


def _check_order(p):
    if not 0.0 < p < 1.0:
        raise ValueError('moment order p = %r is not in (0, 1)' % p)


def functional_values(model, p, points):

    """Evaluates the stability functional on an array of non-zero states

    The closed form of the model is used when it is available.

    """

    if model.functional is not None:
        return np.asarray(model.functional(p, points), dtype=np.float64)
    return functional_quotient(
        points, model.drift(points), model.diffusion(points), p
        )


def stability_functional(model, p, x):

    """Evaluates the stability functional at a single non-zero state

    :param model: The SDE model
    :param p: The moment order, in (0, 1)
    :param x: The state, a vector of the model dimension
    :raises DomainError: if x is the origin
    :returns: The value as a float

    """

    _check_order(p)
    x = as_states(model, x)
    if not np.any(x != 0.0):
        raise DomainError(
            'the stability functional is undefined at the origin'
            )
    return float(functional_values(model, p, x))


#
# Sampling plans
# --------------
#
# The sample points are log-spaced radii times random unit directions. The
# radii are r_min * 10 ** (j / n) for the integer j, and the directions for
# the radius are drawn from a stream keyed by the reduced fraction j / n.
# Hence refining the plan, by multiplying the radii per decade or by asking
# for more directions, gives a superset of the original points, which is what
# makes the estimate of lambda monotone under refinement.
#

SamplingPlan = collections.namedtuple('SamplingPlan', [
    'r_min',
    'r_max',
    'radii_per_decade',
    'directions',
    'seed',
    ])
SamplingPlan.__new__.__defaults__ = (1.0E-3, 1.0E3, 10, 8, 0)


def sample_radii(plan):

    """Gets the list of (numerator, denominator, radius) of the plan"""

    if not 0.0 < plan.r_min < plan.r_max:
        raise ValueError(
            'invalid radius range [%r, %r]' % (plan.r_min, plan.r_max)
            )
    if plan.radii_per_decade < 1 or plan.directions < 1:
        raise ValueError('sampling plan needs positive counts')

    n_dec = int(plan.radii_per_decade)
    top = int(math.floor(
        n_dec * math.log10(plan.r_max / plan.r_min) + 1.0E-9
        ))

    radii = []
    for j in range(0, top + 1):
        frac = fractions.Fraction(j, n_dec)
        radii.append((
            frac.numerator, frac.denominator,
            plan.r_min * 10.0 ** (j / n_dec)
            ))
    return radii


def sample_directions(seed, key, count, dimension):

    """Draws unit directions from the stream keyed by the seed and the key"""

    rng = np.random.default_rng([seed] + list(key))
    raw = rng.standard_normal((count, dimension))
    return raw / np.linalg.norm(raw, axis=-1, keepdims=True)


def sample_points(plan, dimension):

    """Gets all the sample points of a plan as an array of shape (n, d)"""

    points = [
        radius * sample_directions(
            plan.seed, (num, den), plan.directions, dimension
            )
        for num, den, radius in sample_radii(plan)
        ]
    return np.concatenate(points, axis=0)


def sample_shell(rng, count, dimension, r_lo, r_hi):

    """Draws points with uniform radius in [r_lo, r_hi] and random direction"""

    raw = rng.standard_normal((count, dimension))
    dirs = raw / np.linalg.norm(raw, axis=-1, keepdims=True)
    radii = rng.uniform(r_lo, r_hi, size=(count, 1))
    return radii * dirs


def sup_or_fail(values, points):

    """Gets the maximum of the values, failing on any non-finite value"""

    bad = np.flatnonzero(~np.isfinite(values))
    if len(bad) != 0:
        point = points[bad[0]]
        raise EvaluationError(
            point,
            'non-finite functional value %r at state %s' % (
                values[bad[0]], np.array2string(point)
                )
            )
    return float(np.max(values))


def estimate_lambda(model, p, plan=None):

    """Estimates lambda as minus the sampled supremum of the functional

    :param model: The SDE model
    :param p: The moment order
    :param plan: The :py:class:`SamplingPlan`, default one if not given
    :raises EvaluationError: if the functional is not finite at a sample
    :returns: The estimate, deterministic given the seed of the plan

    """

    _check_order(p)
    plan = SamplingPlan() if plan is None else plan
    points = sample_points(plan, model.dimension)
    values = functional_values(model, p, points)
    return 0.0 - sup_or_fail(values, points)


def cross_check_lambda(model, params, plan=None):

    """Checks an asserted lambda against the sampled supremum

    A warning is logged when the sampled supremum exceeds minus the asserted
    lambda by more than 1e-6. The sampled estimate is returned.

    """

    estimate = estimate_lambda(model, params.p, plan)
    if -estimate > -params.lam + 1.0E-6:
        logger.warning(
            'Asserted lambda %g for model %s is not supported by sampling, '
            'the sampled supremum of the functional is %g',
            params.lam, model.name, -estimate
            )
    else:
        logger.debug(
            'Sampled lambda %.17g supports asserted %g', estimate, params.lam
            )
    return estimate


def khasminskii_constant(model, p, plan=None):

    """Estimates the constant K of the Khasminskii-type growth bound

    The bound reads

    .. math::

        \\langle x, f(x) \\rangle + \\frac{p-1}{2} |g(x)|^2 \\le K (1 + |x|^2)

    and the smallest K consistent with the sample points of the plan is
    returned, never below zero.

    """

    _check_order(p)
    plan = SamplingPlan() if plan is None else plan
    points = sample_points(plan, model.dimension)
    f_val = model.drift(points)
    g_val = model.diffusion(points)

    r2 = np.sum(points * points, axis=-1)
    lhs = (
        np.sum(points * f_val, axis=-1) +
        0.5 * (p - 1.0) * np.sum(g_val * g_val, axis=-1)
        )
    return max(0.0, sup_or_fail(lhs / (1.0 + r2), points))


#
# Local Lipschitz audit
# ---------------------
#

LipschitzAudit = collections.namedtuple('LipschitzAudit', [
    'radius',
    'bound',
    'max_ratio_drift',
    'max_ratio_diffusion',
    'verdict',
    ])


def difference_ratios(coeff, x, x_bar):

    """Computes |c(x) - c(x_bar)| / |x - x_bar| for arrays of pairs"""

    num = np.linalg.norm(coeff(x) - coeff(x_bar), axis=-1)
    den = np.linalg.norm(x - x_bar, axis=-1)
    return num / den


def audit_local_lipschitz(model, radius, pairs=10000, seed=0):

    """Audits the local Lipschitz bound of the model on a ball

    Random pairs within the ball of the given radius are drawn and the
    largest difference ratios of the drift and the diffusion are compared
    with the bound L_R of the model, with a relative slack of 1e-9 for
    floating-point.

    """

    rng = np.random.default_rng([seed, pairs])
    x = sample_shell(rng, pairs, model.dimension, 0.0, radius)
    x_bar = sample_shell(rng, pairs, model.dimension, 0.0, radius)
    keep = np.any(x != x_bar, axis=-1)
    x, x_bar = x[keep], x_bar[keep]

    bound = float(model.lipschitz_bound(radius))
    ratio_f = float(np.max(difference_ratios(model.drift, x, x_bar)))
    ratio_g = float(np.max(difference_ratios(model.diffusion, x, x_bar)))

    return LipschitzAudit(
        radius=radius, bound=bound,
        max_ratio_drift=ratio_f, max_ratio_diffusion=ratio_g,
        verdict=max(ratio_f, ratio_g) <= bound * (1.0 + 1.0E-9)
        )
