"""
Built-in models
===============

This module contains the registry of models that can be selected by a string
key from the command line. Currently the models are

example41
    The scalar equation :math:`dx = (x + x^3) dt + 2 \\sqrt{x^4 + 2 x^2} dB`,
    with superlinear drift and diffusion. Its stability functional is
    identically -1 for the moment order 1/2. It comes with the analytic
    truncation radius :math:`h(\\Delta) = \\sqrt{(\\Delta^{-1/5} - 1) / 3}`,
    valid for :math:`\\Delta \\le 4^{-5}`.

linear
    The linear equation :math:`dx = \\mu x dt + \\sigma x dB`, with parameters
    ``mu`` and ``sigma``, in any dimension. Its functional is the constant
    :math:`\\mu + (p - 1) \\sigma^2 / 2`. Its truncation radius is derived from
    the Lipschitz bound.

The evaluators are module-level functions, bound to their parameters by
``functools.partial``, so that the models can be sent to worker processes.

"""

import functools
import math

import numpy as np

from .sdecore import SdeModel
from .truncation import TruncationPolicy, derived_policy


#
# The example model
# -----------------
#

EXAMPLE41_DELTA_STAR = 4.0 ** -5


def _example41_drift(x):
    return x + x * x * x


def _example41_diffusion(x):
    x2 = x * x
    return 2.0 * np.sqrt(x2 * x2 + 2.0 * x2)


def example41_bound(radius):

    """The local Lipschitz bound of the example model

    It is :math:`(1 + 3R^2) \\vee (2 + 2R)`, maxed with the exact slope bound
    :math:`4(R^2 + 1) / \\sqrt{R^2 + 2}` of the diffusion, which is the larger
    one only for radii below about 1.19.

    """

    r2 = radius * radius
    return max(
        1.0 + 3.0 * r2, 2.0 + 2.0 * radius,
        4.0 * (r2 + 1.0) / math.sqrt(r2 + 2.0)
        )


def _example41_functional(p, x):
    # (4p - 3) + (2p - 1) |x|^2, free of the cancellation in the raw quotient
    return (4.0 * p - 3.0) + (2.0 * p - 1.0) * np.sum(x * x, axis=-1)


def example41_radius(delta):

    """The analytic truncation radius of the example model"""

    return math.sqrt((delta ** -0.2 - 1.0) / 3.0)


EXAMPLE41_POLICY = TruncationPolicy(
    radius=example41_radius, delta_star=EXAMPLE41_DELTA_STAR,
    provenance='analytic'
    )


def example41_model():

    """Makes the example model"""

    return SdeModel(
        name='example41', dimension=1,
        drift=_example41_drift, diffusion=_example41_diffusion,
        lipschitz_bound=example41_bound, functional=_example41_functional
        )


#
# The linear model
# ----------------
#


def _scaled(coeff, x):
    return coeff * x


def _constant(value, radius):
    return value


def _linear_functional(mu, sigma, p, x):
    value = mu + (p - 1.0) * sigma * sigma / 2.0
    return np.full(np.shape(x)[:-1], value)


def linear_model(mu, sigma, dimension=1):

    """Makes the linear model with drift mu x and diffusion sigma x"""

    mu = float(mu)
    sigma = float(sigma)
    if dimension < 1:
        raise ValueError('dimension %r is not positive' % dimension)

    return SdeModel(
        name='linear', dimension=int(dimension),
        drift=functools.partial(_scaled, mu),
        diffusion=functools.partial(_scaled, sigma),
        lipschitz_bound=functools.partial(_constant, max(abs(mu), abs(sigma))),
        functional=functools.partial(_linear_functional, mu, sigma)
        )


def linear_moment_exponent(mu, sigma, p):

    """The exact p-th moment exponent of the linear equation"""

    return p * (mu + (p - 1.0) * sigma * sigma / 2.0)


#
# The registry
# ------------
#

MODELS = ('example41', 'linear')


def get_model(key, mu=None, sigma=None, dimension=1):

    """Gets a built-in model from its key

    :param key: The registry key
    :param mu, sigma: The parameters of the linear model
    :raises ValueError: if the key is unknown or parameters are missing

    """

    if key == 'example41':
        return example41_model()
    elif key == 'linear':
        if mu is None or sigma is None:
            raise ValueError('the linear model needs both mu and sigma')
        return linear_model(mu, sigma, dimension)
    else:
        raise ValueError('unknown model %r' % key)


def get_policy(model):

    """Gets the truncation policy for a model

    The analytic policy of the example model takes precedence, all other
    models get the policy derived from their Lipschitz bound.

    """

    if model.name == 'example41':
        return EXAMPLE41_POLICY
    return derived_policy(model.lipschitz_bound)
