"""
Monte Carlo stability estimation
================================

This module estimates the decay of :math:`\\mathbb{E}|X_k|^p` and of the
individual paths :math:`|X_k|` for the numerical schemes, and fits the
exponential rates.

Work is organized in chunks of consecutive path indices. The chunk size does
not depend on the number of workers, and the per-chunk sums are formed with
``math.fsum`` and combined in chunk order, so the results are the same for
any number of workers. Diverged paths, which only the EM baseline produces
at sensible settings, are excluded from all averages and reported as a
tally.

"""

import collections
import concurrent.futures
import logging
import math

import numpy as np
from scipy import stats

from .brownian import generate_path
from .schemes import (
    DEFAULT_GUARD, TrajectoryRecord, interpolate_path, scheme_radius,
    simulate_batch
    )
from .sdecore import as_states


logger = logging.getLogger(__name__)


class EstimationError(RuntimeError):

    """Raised when no meaningful estimate can be formed from the paths"""

    pass


DEFAULT_FLOOR = 1.0E-300

CHUNK_SIZES = {'coarse': 256, 'fine': 16}


#
# Result data structures
# ----------------------
#

MomentEstimate = collections.namedtuple('MomentEstimate', [
    'times',
    'moments',
    'stderrs',
    'paths',
    'p',
    'diverged',
    'censored',
    ])

ExponentFit = collections.namedtuple('ExponentFit', [
    'slope',
    'intercept',
    'window',
    'rsquared',
    'censored',
    'points',
    ])

AsExponentSummary = collections.namedtuple('AsExponentSummary', [
    'q05',
    'q50',
    'q95',
    'max',
    'censored',
    'diverged',
    'paths',
    'exponents',
    ])

EnsembleResult = collections.namedtuple('EnsembleResult', [
    'moments',
    'exponents',
    'terminal_censored',
    'horizon',
    ])


#
# Chunked execution
# -----------------
#


def map_chunks(func, tasks, workers=1):

    """Maps a function over chunk tasks, in a process pool if asked for

    The results are returned in the order of the tasks.

    """

    tasks = list(tasks)
    if workers > 1 and len(tasks) > 1:
        logger.info(
            'Dispatching %d chunks to %d worker processes',
            len(tasks), workers
            )
        with concurrent.futures.ProcessPoolExecutor(
                max_workers=workers) as executor:
            return list(executor.map(func, tasks))
    return [func(i) for i in tasks]


def chunk_bounds(n_paths, chunk_size):

    """Splits path indices into consecutive (start, stop) chunks"""

    return [
        (start, min(start + chunk_size, n_paths))
        for start in range(0, n_paths, chunk_size)
        ]


ChunkTask = collections.namedtuple('ChunkTask', [
    'model',
    'radius',
    'x0',
    'delta',
    'steps',
    'refinement',
    'seed',
    'start',
    'stop',
    'p',
    'guard',
    'floor',
    'grid',
    ])


def coarse_increments(seed, start, stop, delta, steps, refinement):

    """Gets the coarse increments of consecutive paths, one column each"""

    incr = np.empty((steps, stop - start))
    for col, idx in enumerate(range(start, stop)):
        path = generate_path(seed, idx, delta, steps, refinement)
        incr[:, col] = path.coarse_increments()
    return incr


def _simulate_chunk(task):

    """Simulates a chunk of paths and reduces it to exact partial sums"""

    res = simulate_batch(
        task.model, task.radius, task.x0, task.delta,
        coarse_increments(
            task.seed, task.start, task.stop, task.delta, task.steps,
            task.refinement
            ),
        task.guard
        )
    live = ~res.diverged

    if task.grid == 'coarse':
        norms = np.linalg.norm(res.states[:, live], axis=-1)
    else:
        columns = []
        for col in np.flatnonzero(live):
            idx = task.start + int(col)
            path = generate_path(
                task.seed, idx, task.delta, task.steps, task.refinement
                )
            record = TrajectoryRecord(
                scheme=None, x0=task.x0, delta=task.delta, steps=task.steps,
                states=res.states[:, col], diverged=False,
                divergence_step=None
                )
            columns.append(np.linalg.norm(
                interpolate_path(task.model, task.radius, record, path),
                axis=-1
                ))
        n_points = task.steps * task.refinement + 1
        norms = (
            np.stack(columns, axis=1) if columns
            else np.empty((n_points, 0))
            )

    vals = norms ** task.p
    sums = [math.fsum(row) for row in vals.tolist()]
    sumsq = [math.fsum(row) for row in (vals * vals).tolist()]
    censored = np.count_nonzero(norms <= task.floor, axis=1)

    terminal = np.linalg.norm(res.states[-1], axis=-1)
    exponents = np.full(task.stop - task.start, np.nan)
    horizon = task.steps * task.delta
    exponents[live] = (
        np.log(np.maximum(terminal[live], task.floor)) / horizon
        )

    return {
        'sums': sums,
        'sumsq': sumsq,
        'censored': censored,
        'live': int(np.count_nonzero(live)),
        'exponents': exponents,
        'terminal_censored': int(np.count_nonzero(
            terminal[live] <= task.floor
            )),
        }


#
# The ensemble run
# ----------------
#


def _check_inputs(p, paths, steps):
    if not 0.0 < p < 1.0:
        raise ValueError('moment order p = %r is not in (0, 1)' % p)
    if paths < 2:
        raise ValueError('at least two paths are needed, %r given' % paths)
    if steps < 1:
        raise ValueError('number of steps %r is not positive' % steps)


def run_ensemble(model, policy, scheme, p, x0, delta, steps, paths, seed,
                 refinement=16, guard=DEFAULT_GUARD, floor=DEFAULT_FLOOR,
                 grid='coarse', workers=1):

    """Runs a Monte Carlo ensemble of paths

    Both the moment curve and the per-path terminal exponents
    :math:`\\log|X_K| / (K\\Delta)` are formed from the same run.

    :param model: The SDE model
    :param policy: The truncation policy, unused for the EM scheme
    :param scheme: ``mtem`` or ``em``
    :param p: The moment order
    :param x0: The initial state
    :param delta: The step size
    :param steps: The number of steps K
    :param paths: The number of paths N
    :param seed: The master seed
    :param refinement: The number of fine substeps per step
    :param guard: The overflow guard
    :param floor: The underflow floor applied inside logarithms
    :param grid: ``coarse`` for the moments of the discrete scheme, ``fine``
        for the moments of the frozen-coefficient interpolant on the fine
        grid
    :param workers: The number of worker processes
    :raises EstimationError: if fewer than two paths survive
    :returns: An :py:class:`EnsembleResult`

    """

    _check_inputs(p, paths, steps)
    if grid not in CHUNK_SIZES:
        raise ValueError('unknown moment grid %r' % grid)

    radius = scheme_radius(policy, scheme, delta)
    x0 = as_states(model, x0)

    tasks = [
        ChunkTask(
            model=model, radius=radius, x0=x0, delta=delta, steps=steps,
            refinement=refinement, seed=seed, start=start, stop=stop, p=p,
            guard=guard, floor=floor, grid=grid
            )
        for start, stop in chunk_bounds(paths, CHUNK_SIZES[grid])
        ]
    logger.info(
        'Simulating %d %s paths of %d steps in %d chunks',
        paths, scheme, steps, len(tasks)
        )
    results = map_chunks(_simulate_chunk, tasks, workers)

    n_live = sum(i['live'] for i in results)
    n_div = paths - n_live
    if n_div > 0:
        logger.warning(
            '%d of %d paths diverged and are excluded from the averages',
            n_div, paths
            )
    if n_live < 2:
        raise EstimationError(
            'only %d of %d paths survived, no estimate possible' % (
                n_live, paths
                )
            )

    n_points = len(results[0]['sums'])
    moments = np.empty(n_points)
    stderrs = np.empty(n_points)
    for k in range(0, n_points):
        mean = math.fsum(i['sums'][k] for i in results) / n_live
        mean_sq = math.fsum(i['sumsq'][k] for i in results) / n_live
        var = max(mean_sq - mean * mean, 0.0) * n_live / (n_live - 1)
        moments[k] = mean
        stderrs[k] = math.sqrt(var / n_live)

    spacing = delta if grid == 'coarse' else delta / refinement
    estimate = MomentEstimate(
        times=np.arange(n_points) * spacing, moments=moments, stderrs=stderrs,
        paths=n_live, p=p, diverged=n_div,
        censored=np.sum([i['censored'] for i in results], axis=0)
        )

    return EnsembleResult(
        moments=estimate,
        exponents=np.concatenate([i['exponents'] for i in results]),
        terminal_censored=sum(i['terminal_censored'] for i in results),
        horizon=steps * delta
        )


def estimate_moment_curve(model, policy, scheme, p, x0, delta, steps, paths,
                          seed, **kwargs):

    """Estimates the p-th moment curve, see :py:func:`run_ensemble`"""

    return run_ensemble(
        model, policy, scheme, p, x0, delta, steps, paths, seed, **kwargs
        ).moments


def summarize_as_exponent(ensemble):

    """Summarizes the per-path exponents of an ensemble

    :raises ValueError: if the horizon of the ensemble is shorter than one
    :raises EstimationError: if no path survived

    """

    if ensemble.horizon < 1.0:
        raise ValueError(
            'horizon %r is shorter than one unit of time' % ensemble.horizon
            )
    exponents = ensemble.exponents
    live = exponents[np.isfinite(exponents)]
    if len(live) == 0:
        raise EstimationError('all paths diverged')

    q05, q50, q95 = np.quantile(live, [0.05, 0.5, 0.95])
    if ensemble.terminal_censored > 0:
        logger.warning(
            '%d paths ended at the underflow floor',
            ensemble.terminal_censored
            )
    return AsExponentSummary(
        q05=float(q05), q50=float(q50), q95=float(q95),
        max=float(np.max(live)), censored=ensemble.terminal_censored,
        diverged=len(exponents) - len(live), paths=len(exponents),
        exponents=exponents
        )


def estimate_as_exponent(model, policy, x0, delta, steps, paths, seed,
                         scheme='mtem', p=0.5, **kwargs):

    """Estimates the almost-sure exponents log|X_K| / (K Delta) of paths

    The moment order only enters the moment curve, which is formed alongside
    but dropped here.

    """

    if steps * delta < 1.0:
        raise ValueError(
            'terminal time %r is shorter than one unit' % (steps * delta)
            )
    return summarize_as_exponent(run_ensemble(
        model, policy, scheme, p, x0, delta, steps, paths, seed, **kwargs
        ))


#
# Exponent fitting
# ----------------
#

MIN_FIT_POINTS = 10


def default_window(estimate, fractions=(0.4, 1.0)):

    """Gets the fit window from fractions of the simulated horizon"""

    t_end = float(estimate.times[-1])
    return (fractions[0] * t_end, fractions[1] * t_end)


def fit_exponent(estimate, window=None, floor=DEFAULT_FLOOR):

    """Fits the exponential decay rate of a moment curve

    The slope is the least-squares slope of the logarithm of the moments,
    raised to the floor, against time over the window.

    :param estimate: The :py:class:`MomentEstimate`
    :param window: The pair (t_lo, t_hi), default to the last 60% of the
        horizon
    :param floor: The floor for the logarithms, points at the floor are
        counted as censored
    :raises ValueError: for an invalid window or fewer than 10 points in it

    """

    if not floor > 0.0:
        raise ValueError('floor %r is not positive' % floor)
    if window is None:
        window = default_window(estimate)

    t_lo, t_hi = window
    times = np.asarray(estimate.times, dtype=np.float64)
    slack = 1.0E-9 * max(1.0, abs(times[-1]))
    if not t_lo < t_hi:
        raise ValueError('empty fit window [%r, %r]' % (t_lo, t_hi))
    if t_lo < times[0] - slack or t_hi > times[-1] + slack:
        raise ValueError(
            'fit window [%r, %r] is outside the horizon [%r, %r]' % (
                t_lo, t_hi, times[0], times[-1]
                )
            )

    moments = np.asarray(estimate.moments, dtype=np.float64)
    mask = (
        (times >= t_lo - slack) & (times <= t_hi + slack) &
        np.isfinite(moments)
        )
    n_points = int(np.count_nonzero(mask))
    if n_points < MIN_FIT_POINTS:
        raise ValueError(
            'only %d usable points in the fit window, %d needed' % (
                n_points, MIN_FIT_POINTS
                )
            )

    sel = moments[mask]
    censored = int(np.count_nonzero(sel <= floor))
    if censored > 0:
        logger.warning('%d points of the moment curve are at the floor',
                       censored)

    reg = stats.linregress(times[mask], np.log(np.maximum(sel, floor)))
    return ExponentFit(
        slope=float(reg.slope), intercept=float(reg.intercept),
        window=(t_lo, t_hi), rsquared=float(reg.rvalue ** 2),
        censored=censored, points=n_points
        )
