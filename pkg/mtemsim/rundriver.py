"""
The driver functions for the subcommands
========================================

This module runs a subcommand for a validated run configuration, from the
simulation down to the writing of the output files, which are

``simulate``
    ``trajectories.csv``, the states of the paths under the chosen scheme.

``exponent``
    ``moments.csv``, the moment curve, and ``exponent.csv``, the fitted
    moment exponent together with the summary of the per-path exponents and
    the verdicts against the claimed bounds.

``verify``
    ``step_condition.csv``, ``lemmas.csv`` and ``verify_report.txt``.

``compare``
    ``compare.csv``, MTEM and EM states side by side on the same Brownian
    paths, and ``divergence.csv``, the divergence tallies of both schemes.

All of them write ``manifest.json`` as well. Library errors are propagated to
the caller, only the outcome of the verification is returned as an exit
status.

"""

import collections
import logging
import os

import numpy as np

from . import __version__
from .csvout import (
    csv_writer, state_header, write_divergence, write_exponent, write_lemmas,
    write_manifest, write_moments, write_step_condition
    )
from .getoptions import ConfigError, check_subcommand, config_options
from .lemmacheck import (
    verify_lemma_global_lipschitz, verify_lemma_lambda_preserved,
    verify_one_step_contraction
    )
from .models import get_model, get_policy
from .renderreport import render_report
from .schemes import BatchResult, scheme_radius, simulate_batch
from .sdecore import (
    audit_local_lipschitz, cross_check_lambda, estimate_lambda,
    khasminskii_constant, make_stability_params
    )
from .stabilitylab import (
    CHUNK_SIZES, EstimationError, chunk_bounds, coarse_increments,
    default_window, fit_exponent, map_chunks, run_ensemble,
    summarize_as_exponent
    )
from .truncation import truncation_radius, verify_step_condition
from .util import EXIT_OK, EXIT_VERIFICATION


logger = logging.getLogger(__name__)


SUBCOMMANDS = ('simulate', 'exponent', 'verify', 'compare')

CONTRACTION_STATES = (0.5, 1.0, 2.0)


#
# Stability parameters
# --------------------
#


def stability_params(model, config):

    """Gets the stability parameters of a run

    A positive lambda in the configuration is asserted and cross-checked
    against sampling, otherwise lambda is estimated by sampling.

    :returns: The parameters and the source of lambda, ``asserted`` or
        ``estimated``
    :raises EstimationError: if the estimated lambda is not positive
    :raises ConfigError: if epsilon is not below lambda

    """

    epsilon = config.epsilon if config.epsilon > 0.0 else None

    if config.lam > 0.0:
        lam, source = config.lam, 'asserted'
    else:
        lam, source = estimate_lambda(model, config.p), 'estimated'
        if not lam > 0.0:
            raise EstimationError(
                'sampled lambda %g of model %s is not positive, no stability '
                'of order p = %g can be claimed' % (lam, model.name, config.p)
                )
        logger.info('Estimated lambda = %.17g for p = %g', lam, config.p)

    try:
        params = make_stability_params(config.p, lam, epsilon)
    except ValueError as err:
        raise ConfigError('epsilon', str(err))

    if source == 'asserted':
        cross_check_lambda(model, params)
    return params, source


#
# Trajectory chunks
# -----------------
#
# ``radii`` holds the truncation radius of every scheme to run, None for EM,
# and only the states of the paths with index below ``record`` are kept.
#

TrajectoryTask = collections.namedtuple('TrajectoryTask', [
    'model',
    'radii',
    'x0',
    'delta',
    'steps',
    'refinement',
    'seed',
    'start',
    'stop',
    'guard',
    'record',
    ])


def _trajectory_chunk(task):

    """Simulates a chunk of paths under all the schemes of the task"""

    incr = coarse_increments(
        task.seed, task.start, task.stop, task.delta, task.steps,
        task.refinement
        )
    n_rec = max(0, min(task.record, task.stop) - task.start)

    results = []
    for radius in task.radii:
        res = simulate_batch(
            task.model, radius, task.x0, task.delta, incr, task.guard
            )
        results.append(BatchResult(
            states=res.states[:, :n_rec], diverged=res.diverged,
            divergence_step=res.divergence_step
            ))
    return results


def simulate_trajectories(model, radii, config):

    """Simulates all the paths of a run under the given schemes

    :returns: The list of the tasks and the list of the per-chunk results,
        each a list of :py:class:`BatchResult` in the order of the radii

    """

    record = config.paths if config.record_paths == 0 else min(
        config.record_paths, config.paths
        )
    tasks = [
        TrajectoryTask(
            model=model, radii=radii, x0=np.array([config.x0]),
            delta=config.delta, steps=config.steps,
            refinement=config.refinement, seed=config.seed, start=start,
            stop=stop, guard=config.overflow_guard, record=record
            )
        for start, stop in chunk_bounds(config.paths, CHUNK_SIZES['coarse'])
        ]
    logger.info(
        'Simulating %d paths of %d steps in %d chunks',
        config.paths, config.steps, len(tasks)
        )
    return tasks, map_chunks(_trajectory_chunk, tasks, config.workers)


def _recorded_length(res, col, steps):
    if res.diverged[col]:
        return int(res.divergence_step[col]) + 1
    return steps + 1


#
# The subcommands
# ---------------
#


def run_simulate(model, policy, config):

    """Writes the trajectories of the chosen scheme"""

    radius = scheme_radius(policy, config.scheme, config.delta)
    tasks, results = simulate_trajectories(model, [radius], config)

    header = (
        ['path_index', 'k', 't'] + state_header('state', model.dimension) +
        ['diverged']
        )
    n_div = 0
    with csv_writer(os.path.join(config.out, 'trajectories.csv'),
                    header) as write_row:
        for task, (res, ) in zip(tasks, results):
            n_div += int(np.count_nonzero(res.diverged))
            for col in range(0, res.states.shape[1]):
                diverged = bool(res.diverged[col])
                for k in range(0, _recorded_length(res, col, config.steps)):
                    write_row(
                        [task.start + col, k, k * config.delta] +
                        res.states[k, col].tolist() + [diverged]
                        )

    if n_div > 0:
        logger.warning(
            '%d of %d %s paths diverged', n_div, config.paths, config.scheme
            )
    return EXIT_OK


def run_compare(model, policy, config):

    """Writes MTEM and EM side by side on the same Brownian paths"""

    radius = truncation_radius(policy, config.delta)
    tasks, results = simulate_trajectories(model, [radius, None], config)

    header = (
        ['path_index', 'k', 't'] + state_header('mtem', model.dimension) +
        state_header('em', model.dimension)
        )
    with csv_writer(os.path.join(config.out, 'compare.csv'),
                    header) as write_row:
        for task, (mtem, em) in zip(tasks, results):
            for col in range(0, mtem.states.shape[1]):
                for k in range(0, config.steps + 1):
                    write_row(
                        [task.start + col, k, k * config.delta] +
                        mtem.states[k, col].tolist() +
                        em.states[k, col].tolist()
                        )

    tallies = [
        (scheme, np.concatenate([i[pos].diverged for i in results]))
        for pos, scheme in enumerate(['mtem', 'em'])
        ]
    for scheme, flags in tallies:
        logger.info(
            '%s: %d of %d paths diverged',
            scheme, np.count_nonzero(flags), len(flags)
            )
    write_divergence(os.path.join(config.out, 'divergence.csv'), tallies)
    return EXIT_OK


def run_exponent(model, policy, config):

    """Writes the moment curve and the fitted exponents"""

    params, _ = stability_params(model, config)

    ensemble = run_ensemble(
        model, policy, config.scheme, config.p, np.array([config.x0]),
        config.delta, config.steps, config.paths, config.seed,
        refinement=config.refinement, guard=config.overflow_guard,
        floor=config.underflow_floor, grid=config.moment_grid,
        workers=config.workers
        )
    estimate = ensemble.moments
    write_moments(os.path.join(config.out, 'moments.csv'), estimate)

    fit = fit_exponent(
        estimate, default_window(estimate, config.fit_window),
        config.underflow_floor
        )
    claimed = -params.p * (params.lam - params.epsilon)
    as_claimed = -(params.lam - params.epsilon)

    summary = {
        'slope': fit.slope, 'intercept': fit.intercept,
        't_lo': fit.window[0], 't_hi': fit.window[1],
        'rsquared': fit.rsquared, 'censored': fit.censored,
        'points': fit.points, 'claimed_bound': claimed,
        'as_claimed_bound': as_claimed,
        'diverged': estimate.diverged, 'paths': config.paths,
        'lambda': params.lam, 'epsilon': params.epsilon,
        'moment_verdict': fit.slope <= claimed,
        }
    logger.info('Fitted moment exponent %.6g, claimed bound %.6g',
                fit.slope, claimed)

    if ensemble.horizon >= 1.0:
        as_summary = summarize_as_exponent(ensemble)
        summary.update({
            'as_q05': as_summary.q05, 'as_q50': as_summary.q50,
            'as_q95': as_summary.q95, 'as_max': as_summary.max,
            'as_censored': as_summary.censored,
            'as_verdict': as_summary.q95 <= as_claimed,
            })
        logger.info('95%% quantile of the path exponents %.6g, claimed '
                    'bound %.6g', as_summary.q95, as_claimed)
    else:
        logger.warning('Horizon %g is shorter than one, no path exponents',
                       ensemble.horizon)

    for key in ['moment_verdict', 'as_verdict']:
        if summary.get(key) is False:
            logger.warning('The %s is not supported by the run', key)

    write_exponent(os.path.join(config.out, 'exponent.csv'), summary)
    return EXIT_OK


def verify_rows(model, policy, params, config):

    """Runs the property checks and gets their rows

    :returns: The rows of lemma, radius, state, value, bound and verdict

    """

    rows = []
    for radius in config.lemma_radii:
        audit = audit_local_lipschitz(
            model, radius, pairs=config.lemma_trials, seed=config.seed
            )
        rows.append((
            'local_lipschitz', radius, None,
            max(audit.max_ratio_drift, audit.max_ratio_diffusion),
            audit.bound, audit.verdict
            ))

        lipschitz = verify_lemma_global_lipschitz(
            model, radius, trials=config.lemma_trials, seed=config.seed
            )
        rows.append((
            'global_lipschitz', radius, None,
            max(lipschitz.max_ratio_drift, lipschitz.max_ratio_diffusion),
            lipschitz.bound, lipschitz.verdict
            ))

        kept = verify_lemma_lambda_preserved(
            model, radius, params.p, params.lam
            )
        rows.append((
            'lambda_preserved', radius, None, kept.sup, kept.bound,
            kept.verdict
            ))

    radius = truncation_radius(policy, config.delta)
    if model.dimension == 1:
        contraction = verify_one_step_contraction(
            model, radius, [np.array([i]) for i in CONTRACTION_STATES],
            config.delta, params.p, params.lam, params.epsilon
            )
        for state, ratio in contraction.rows:
            rows.append((
                'one_step_contraction', radius, float(state[0]), ratio,
                contraction.bound, ratio <= contraction.bound
                ))

    return rows


def run_verify(model, policy, config):

    """Runs all the checks and writes the report

    :returns: The exit status for verification failure if any check fails

    """

    params, source = stability_params(model, config)

    step_report = verify_step_condition(
        policy, model.lipschitz_bound, config.check_deltas
        )
    write_step_condition(
        os.path.join(config.out, 'step_condition.csv'), step_report
        )

    rows = verify_rows(model, policy, params, config)
    write_lemmas(os.path.join(config.out, 'lemmas.csv'), rows)

    passed = render_report(os.path.join(config.out, 'verify_report.txt'), {
        'version': __version__,
        'model': model.name,
        'p': params.p,
        'delta': config.delta,
        'radius': truncation_radius(policy, config.delta),
        'provenance': policy.provenance,
        'lambda': params.lam,
        'lambda-source': source,
        'epsilon': params.epsilon,
        'khasminskii': khasminskii_constant(model, params.p),
        'step-condition': step_report,
        'lemma-rows': rows,
        })

    if passed:
        logger.info('All checks passed')
        return EXIT_OK
    logger.warning('Some checks failed, see the report')
    return EXIT_VERIFICATION


_RUNNERS = {
    'simulate': run_simulate,
    'exponent': run_exponent,
    'verify': run_verify,
    'compare': run_compare,
    }


def run_command(subcommand, config):

    """Runs a subcommand and writes its output files and the manifest

    :param subcommand: One of ``simulate``, ``exponent``, ``verify`` and
        ``compare``
    :param config: The validated :py:class:`RunConfig`
    :returns: The exit status, success or verification failure
    :raises ValueError: for an unknown subcommand, and the errors of the
        library
    :raises ConfigError: if the step size is beyond the validity range of
        the truncation radius a subcommand needs

    """

    if subcommand not in _RUNNERS:
        raise ValueError('unknown subcommand %r' % subcommand)
    check_subcommand(subcommand, config)

    model = get_model(config.model, config.mu, config.sigma)
    policy = get_policy(model)

    os.makedirs(config.out, exist_ok=True)
    ret_code = _RUNNERS[subcommand](model, policy, config)

    write_manifest(
        os.path.join(config.out, 'manifest.json'), config_options(config),
        subcommand, __version__
        )
    return ret_code
