"""
Numerical schemes
=================

The modified truncated Euler-Maruyama scheme (MTEM) advances a state by

.. math::

    X_{k+1} = X_k + f_\\Delta(X_k) \\Delta + g_\\Delta(X_k) \\Delta B_k

and the classical Euler-Maruyama scheme (EM), kept as a divergence baseline,
uses the untruncated coefficients instead. Two continuous-time extensions of
the discrete solution are provided: the step process, constant on each
:math:`[k\\Delta, (k+1)\\Delta)`, and the interpolant with coefficients frozen
at the left grid point, which is evaluated on the fine grid of the Brownian
path.

Paths blowing up are not errors. When the norm of a state exceeds the
overflow guard, or becomes non-finite, the path is flagged as diverged and is
no longer advanced.

"""

import collections
import logging

import numpy as np

from .sdecore import as_states
from .truncation import truncate, truncation_radius


logger = logging.getLogger(__name__)


SCHEMES = ('mtem', 'em')

DEFAULT_GUARD = 1.0E10


#
# Trajectory records
# ------------------
#
# ``states`` has shape ``(n + 1, d)``, where n is the number of steps taken.
# It equals ``steps`` unless the path diverged, in which case the last state
# is the first one beyond the guard, at index ``divergence_step``.
#

TrajectoryRecord = collections.namedtuple('TrajectoryRecord', [
    'scheme',
    'x0',
    'delta',
    'steps',
    'states',
    'diverged',
    'divergence_step',
    ])


BatchResult = collections.namedtuple('BatchResult', [
    'states',
    'diverged',
    'divergence_step',
    ])


#
# Single steps
# ------------
#


def _coefficients(model, radius, x):
    if radius is None:
        return model.drift(x), model.diffusion(x)
    return (
        truncate(model.drift, radius, x), truncate(model.diffusion, radius, x)
        )


def step_mtem(model, radius, x, delta, d_b):

    """Advances one MTEM step

    A non-finite result is returned as it is, it is for the caller to flag
    the divergence.

    :param model: The SDE model
    :param radius: The truncation radius h
    :param x: The current state
    :param delta: The step size
    :param d_b: The Brownian increment over the step

    """

    if not delta > 0.0:
        raise ValueError('step size %r is not positive' % delta)
    x = as_states(model, x)
    f_val, g_val = _coefficients(model, radius, x)
    return x + f_val * delta + g_val * d_b


def step_em(model, x, delta, d_b):

    """Advances one classical Euler-Maruyama step"""

    if not delta > 0.0:
        raise ValueError('step size %r is not positive' % delta)
    x = as_states(model, x)
    return x + model.drift(x) * delta + model.diffusion(x) * d_b


#
# Batch simulation
# ----------------
#


def simulate_batch(model, radius, x0, delta, increments,
                   guard=DEFAULT_GUARD):

    """Simulates a batch of paths at once

    The arithmetic for each path is elementwise the same as in
    :py:func:`step_mtem`, so a trajectory does not depend on the batch it is
    computed in.

    :param model: The SDE model
    :param radius: The truncation radius, or None for the EM scheme
    :param x0: The initial state, common to all paths
    :param delta: The step size
    :param increments: The coarse Brownian increments, shape ``(steps, n)``
    :param guard: The overflow guard on the norm of the states
    :returns: A :py:class:`BatchResult`, with states of shape
        ``(steps + 1, n, d)``, NaN after the divergence of a path, and a
        divergence step of -1 for paths that did not diverge.

    """

    increments = np.asarray(increments, dtype=np.float64)
    steps, n_paths = increments.shape
    x = np.array(
        np.broadcast_to(as_states(model, x0), (n_paths, model.dimension))
        )

    states = np.full((steps + 1, n_paths, model.dimension), np.nan)
    states[0] = x
    active = np.ones(n_paths, dtype=bool)
    div_step = np.full(n_paths, -1, dtype=np.int64)

    with np.errstate(over='ignore', invalid='ignore'):
        for k in range(0, steps):
            f_val, g_val = _coefficients(model, radius, x)
            new = x + f_val * delta + g_val * increments[k][:, None]
            new[~active] = np.nan

            norm = np.linalg.norm(new, axis=-1)
            escaped = active & ~(norm <= guard)
            if np.any(escaped):
                div_step[escaped] = k + 1
                active &= ~escaped
                logger.debug(
                    '%d path(s) escaped the guard at step %d',
                    np.count_nonzero(escaped), k + 1
                    )

            states[k + 1] = new
            x = new
            if not np.any(active):
                break

    return BatchResult(
        states=states, diverged=div_step >= 0, divergence_step=div_step
        )


def scheme_radius(policy, scheme, delta):

    """Gets the truncation radius for a scheme, None for the EM scheme"""

    if scheme == 'mtem':
        return truncation_radius(policy, delta)
    elif scheme == 'em':
        return None
    else:
        raise ValueError('unknown scheme %r' % scheme)


def simulate_path(model, policy, scheme, x0, delta, steps, path,
                  guard=DEFAULT_GUARD):

    """Simulates a single path

    :param model: The SDE model
    :param policy: The truncation policy, unused for the EM scheme
    :param scheme: ``mtem`` or ``em``
    :param x0: The initial state
    :param delta: The step size, within the validity of the policy for MTEM
    :param steps: The number of steps K
    :param path: The :py:class:`BrownianPath` driving the simulation
    :returns: The :py:class:`TrajectoryRecord`

    """

    if steps < 1:
        raise ValueError('number of steps %r is not positive' % steps)
    if path.steps < steps:
        raise ValueError(
            'Brownian path covers %d steps, %d needed' % (path.steps, steps)
            )
    if path.delta != delta:
        raise ValueError(
            'Brownian path has step %r, not %r' % (path.delta, delta)
            )

    radius = scheme_radius(policy, scheme, delta)
    x0 = as_states(model, x0)
    res = simulate_batch(
        model, radius, x0, delta,
        path.coarse_increments()[:steps, None], guard
        )

    diverged = bool(res.diverged[0])
    if diverged:
        div_step = int(res.divergence_step[0])
        states = res.states[:div_step + 1, 0]
    else:
        div_step = None
        states = res.states[:, 0]

    return TrajectoryRecord(
        scheme=scheme, x0=x0, delta=delta, steps=steps, states=states,
        diverged=diverged, divergence_step=div_step
        )


#
# Continuous-time extensions
# --------------------------
#


def _grid_position(t, spacing):

    """Gets the grid index of t and if t lies on the grid"""

    pos = t / spacing
    idx = int(round(pos))
    return idx, abs(pos - idx) <= 1.0E-9 * max(1.0, abs(pos))


def _check_time(record, t):
    horizon = record.steps * record.delta
    if t < 0.0 or t > horizon * (1.0 + 1.0E-12):
        raise ValueError(
            'time %r is outside of the simulated horizon [0, %r]' % (
                t, horizon
                )
            )


def _recorded_state(record, k):
    if k >= len(record.states):
        raise ValueError(
            'step %d is beyond the divergence of the path at step %d' % (
                k, record.divergence_step
                )
            )
    return record.states[k]


def interpolate_step_process(record, t):

    """Evaluates the piecewise-constant extension at time t

    The value on :math:`[k\\Delta, (k+1)\\Delta)` is :math:`X_k`, and the
    right end of the horizon maps to the last state.

    :raises ValueError: if t is outside of the simulated horizon

    """

    _check_time(record, t)
    idx, on_grid = _grid_position(t, record.delta)
    if not on_grid:
        idx = int(np.floor(t / record.delta))
    return _recorded_state(record, min(idx, record.steps))


def frozen_value(model, radius, x_k, tau, d_b):

    """Evaluates the frozen-coefficient extension a time tau into a step

    :param x_k: The state at the left grid point
    :param tau: The time elapsed since the grid point
    :param d_b: The Brownian increment since the grid point

    """

    x_k = as_states(model, x_k)
    f_val, g_val = _coefficients(model, radius, x_k)
    return x_k + f_val * tau + g_val * d_b


def interpolate_continuous_mtem(model, radius, record, path, t):

    """Evaluates the frozen-coefficient extension at a fine-grid time

    :param model: The SDE model
    :param radius: The truncation radius used for the record
    :param record: The trajectory record
    :param path: The Brownian path the record was simulated with
    :param t: The time, on the fine grid of the path
    :raises ValueError: if t is off the fine grid or outside the horizon

    """

    _check_time(record, t)
    m = path.refinement
    idx, on_grid = _grid_position(t, record.delta / m)
    if not on_grid:
        raise ValueError(
            'time %r is not on the fine grid of spacing %r' % (
                t, record.delta / m
                )
            )

    k, j = divmod(idx, m)
    x_k = _recorded_state(record, k)
    if j == 0:
        return x_k
    d_b = np.cumsum(path.fine_increments[k, :j])[-1]
    return frozen_value(model, radius, x_k, (j / m) * record.delta, d_b)


def interpolate_path(model, radius, record, path):

    """Evaluates the frozen-coefficient extension on the whole fine grid

    :returns: An array of shape ``(steps * refinement + 1, d)``, NaN beyond
        the divergence of the path

    """

    m = path.refinement
    steps = record.steps
    n_left = min(len(record.states) - 1, steps)
    res = np.full((steps * m + 1, record.states.shape[-1]), np.nan)

    if n_left > 0:
        x_k = record.states[:n_left]
        f_val, g_val = _coefficients(model, radius, x_k)

        partial = np.zeros((n_left, m))
        partial[:, 1:] = np.cumsum(path.fine_increments[:n_left, :-1], axis=1)
        tau = (np.arange(m) / m) * record.delta

        vals = (
            x_k[:, None, :] + f_val[:, None, :] * tau[None, :, None] +
            g_val[:, None, :] * partial[:, :, None]
            )
        res[:n_left * m] = vals.reshape(n_left * m, -1)

    if len(record.states) == steps + 1:
        res[-1] = record.states[-1]
    return res
