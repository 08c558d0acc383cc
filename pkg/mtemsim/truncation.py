"""
Modified truncation of the coefficients
=======================================

For a step size :math:`\\Delta`, the modified truncated drift is

.. math::

    f_\\Delta(x) = f(x) \\text{ for } |x| \\le h(\\Delta), \\quad
    f_\\Delta(x) = \\frac{|x|}{h(\\Delta)} f\\left(h(\\Delta)
        \\frac{x}{|x|}\\right) \\text{ otherwise},

and the diffusion is truncated in the same way. Different from the bounded
truncation, the truncated coefficients still grow linearly outside the ball,
which is what keeps the stability functional unchanged.

The truncation radius :math:`h(\\Delta)` is given by a
:py:class:`TruncationPolicy`. It can be an analytic formula together with its
validity bound :math:`\\Delta^*`, or derived from the local Lipschitz bound
:math:`L_R` of the model by inverting :math:`l(R) = 1 / (R L_R^4)`, which
guarantees :math:`L_{h(\\Delta)}^4 \\Delta = 1 / h(\\Delta)`.

"""

import collections
import logging

import numpy as np
from scipy import optimize

from .sdecore import as_states, functional_quotient


logger = logging.getLogger(__name__)


class BracketError(ValueError):

    """Raised when a bracket does not straddle the target step size"""

    pass


#
# Truncation policies
# -------------------
#
# ``radius`` is a callable from the step size to h, ``delta_star`` the upper
# bound of its validity, or None when no bound is declared, and
# ``provenance`` is either ``analytic`` or ``derived``.
#

TruncationPolicy = collections.namedtuple('TruncationPolicy', [
    'radius',
    'delta_star',
    'provenance',
    ])


def truncation_radius(policy, delta):

    """Evaluates the truncation radius of a policy at a step size

    :param policy: The truncation policy
    :param delta: The step size, in (0, delta_star]
    :raises ValueError: if the step size is out of the validity range
    :returns: The radius h as a float

    """

    if not delta > 0.0:
        raise ValueError('step size %r is not positive' % delta)
    if policy.delta_star is not None and delta > policy.delta_star:
        raise ValueError(
            'step size %r exceeds the validity bound %r of the policy' % (
                delta, policy.delta_star
                )
            )

    radius = float(policy.radius(delta))
    if not radius > 0.0:
        raise ValueError(
            'policy gives non-positive radius %r at step %r' % (radius, delta)
            )
    return radius


#
# Deriving h from the Lipschitz bound
# -----------------------------------
#

DEFAULT_BRACKET = (1.0E-6, 1.0E9)
BRACKET_EXPANSIONS = 4
BRACKET_FACTOR = 1.0E3


def inverse_step(bound, radius):

    """Evaluates l(R) = 1 / (R L_R^4), infinite for a vanishing bound"""

    with np.errstate(over='ignore', divide='ignore'):
        return float(
            np.float64(1.0) / (radius * np.float64(bound(radius)) ** 4)
            )


def derive_h_from_lipschitz(bound, delta, bracket=None, tol=1.0E-12):

    """Derives the truncation radius from the local Lipschitz bound

    The root of :math:`l(R) = \\Delta` is found by bisection. Since the bound
    is nondecreasing, :math:`l` is strictly decreasing and the root is
    unique.

    :param bound: The local Lipschitz bound, a callable of the radius
    :param delta: The step size
    :param bracket: The pair of radii to bisect between. When not given, a
        wide default bracket is used and expanded geometrically when needed.
        An explicitly given bracket is never expanded.
    :param tol: The absolute tolerance on the radius, a relative tolerance of
        1e-12 is always added
    :raises BracketError: if the bracket does not straddle the step size
    :raises ValueError: if the tolerance or the step size is not positive

    """

    if not tol > 0.0:
        raise ValueError('bisection tolerance %r is not positive' % tol)
    if not delta > 0.0:
        raise ValueError('step size %r is not positive' % delta)

    if bracket is None:
        r_lo, r_hi = DEFAULT_BRACKET
        expansions = BRACKET_EXPANSIONS
    else:
        r_lo, r_hi = bracket
        expansions = 0

    for _ in range(0, expansions + 1):
        lo_ok = inverse_step(bound, r_lo) > delta
        hi_ok = inverse_step(bound, r_hi) < delta
        if lo_ok and hi_ok:
            break
        if not lo_ok:
            r_lo /= BRACKET_FACTOR
        if not hi_ok:
            r_hi *= BRACKET_FACTOR
    else:
        raise BracketError(
            'l(R) = 1 / (R L_R^4) does not cross %r within the bracket' % delta
            )

    radius = optimize.bisect(
        lambda r: inverse_step(bound, r) - delta, r_lo, r_hi,
        xtol=tol, rtol=1.0E-12
        )
    logger.debug('Derived h(%g) = %.17g', delta, radius)
    return radius


def derived_policy(bound):

    """Makes a policy with h derived from the Lipschitz bound on demand

    A bound vanishing identically, like the one of the zero linear model,
    never needs truncating, so the radius is infinite then.

    """

    if bound(DEFAULT_BRACKET[1]) == 0.0:
        return TruncationPolicy(
            radius=_infinite_radius, delta_star=None, provenance='derived'
            )
    return TruncationPolicy(
        radius=lambda delta: derive_h_from_lipschitz(bound, delta),
        delta_star=None, provenance='derived'
        )


def _infinite_radius(delta):
    return np.inf


#
# Truncated coefficients
# ----------------------
#


def truncate(coeff, radius, x):

    """Evaluates the modified truncation of a coefficient

    The evaluation is vectorized over the leading axes of x. The closed ball
    belongs to the untruncated branch, and inside the ball the result is
    bitwise identical to the untruncated coefficient.

    :param coeff: The coefficient, drift or diffusion of a model
    :param radius: The truncation radius h
    :param x: The array of states

    """

    norm = np.linalg.norm(x, axis=-1, keepdims=True)
    outside = norm > radius
    if not np.any(outside):
        return coeff(x)

    safe = np.where(outside, norm, radius)
    y = np.where(outside, x * (radius / safe), x)
    scale = np.where(outside, safe / radius, 1.0)
    return scale * coeff(y)


def _resolve_radius(radius, delta):
    if isinstance(radius, TruncationPolicy):
        return truncation_radius(radius, delta)
    return float(radius)


def eval_f_delta(model, radius, x, delta=None):

    """Evaluates the truncated drift

    :param radius: Either the radius h, or a truncation policy together with
        the step size given in ``delta``

    """

    return truncate(
        model.drift, _resolve_radius(radius, delta), as_states(model, x)
        )


def eval_g_delta(model, radius, x, delta=None):

    """Evaluates the truncated diffusion, see :py:func:`eval_f_delta`"""

    return truncate(
        model.diffusion, _resolve_radius(radius, delta), as_states(model, x)
        )


def truncated_functional(model, radius, p, x):

    """Evaluates the stability functional built from the truncated pair

    The raw quotient is used, vectorized over the leading axes of x, which
    must not contain the origin.

    """

    x = as_states(model, x)
    return functional_quotient(
        x, truncate(model.drift, radius, x),
        truncate(model.diffusion, radius, x), p
        )


#
# The step-size condition
# -----------------------
#

StepConditionRow = collections.namedtuple('StepConditionRow', [
    'delta',
    'radius',
    'lipschitz',
    'product',
    ])

StepConditionReport = collections.namedtuple('StepConditionReport', [
    'rows',
    'verdict',
    ])


def verify_step_condition(policy, bound, deltas):

    """Tabulates L_h^4 Delta along step sizes and checks it decreases

    The rows are sorted with decreasing step size, and the verdict is true if
    the product never increases along them, up to a relative 1e-12.

    :raises ValueError: if a step size is outside (0, delta_star]

    """

    rows = []
    for delta in sorted(deltas, reverse=True):
        radius = truncation_radius(policy, delta)
        lipschitz = float(bound(radius))
        rows.append(StepConditionRow(
            delta=delta, radius=radius, lipschitz=lipschitz,
            product=lipschitz ** 4 * delta
            ))

    verdict = all(
        nxt.product <= prev.product * (1.0 + 1.0E-12)
        for prev, nxt in zip(rows, rows[1:])
        )
    if not verdict:
        logger.warning('L_h^4 Delta is not decreasing along the step sizes')
    return StepConditionReport(rows=rows, verdict=verdict)
