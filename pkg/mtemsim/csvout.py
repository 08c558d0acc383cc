"""
Writing the output files
========================

All tables are written as CSV with a header row and ``\\n`` line endings,
with the values formatted by :py:func:`mtemsim.util.format_value`, so that
the same results always give the same bytes. The run manifest is a JSON
file holding all the options needed for reproducing the run, and it can be
given back to the program as a configuration file.

"""

import contextlib
import csv
import json
import logging

from .util import format_value


logger = logging.getLogger(__name__)


@contextlib.contextmanager
def csv_writer(file_name, header):

    """Opens a CSV file and gives a function writing one row into it"""

    with open(file_name, 'w', newline='') as file_obj:
        writer = csv.writer(file_obj, lineterminator='\n')
        writer.writerow(header)
        yield lambda row: writer.writerow([format_value(i) for i in row])
    logger.info('Written %s', file_name)


def state_header(prefix, dimension):

    """Gets the column names of the components of a state"""

    return ['%s_%d' % (prefix, i) for i in range(0, dimension)]


def write_table(file_name, header, rows):

    """Writes a whole table at once"""

    with csv_writer(file_name, header) as write_row:
        for row in rows:
            write_row(row)


def write_moments(file_name, estimate):

    """Writes a moment curve, one row per time"""

    write_table(
        file_name, ['t', 'moment', 'stderr', 'censored'],
        zip(
            estimate.times.tolist(), estimate.moments.tolist(),
            estimate.stderrs.tolist(), estimate.censored.tolist()
            )
        )


EXPONENT_COLUMNS = [
    'slope', 'intercept', 't_lo', 't_hi', 'rsquared', 'censored', 'points',
    'claimed_bound', 'as_q05', 'as_q50', 'as_q95', 'as_max',
    'as_claimed_bound', 'as_censored', 'diverged', 'paths', 'lambda',
    'epsilon', 'moment_verdict', 'as_verdict',
    ]


def write_exponent(file_name, summary):

    """Writes the one-row exponent summary from a dictionary"""

    write_table(
        file_name, EXPONENT_COLUMNS,
        [[summary.get(i) for i in EXPONENT_COLUMNS]]
        )


def write_step_condition(file_name, report):

    """Writes the step-size condition table

    The verdict of a row tells if its product is not larger than the one of
    the previous row, the first row always passes.

    """

    rows = []
    prev = None
    for row in report.rows:
        verdict = prev is None or row.product <= prev * (1.0 + 1.0E-12)
        rows.append(
            [row.delta, row.radius, row.lipschitz, row.product, verdict]
            )
        prev = row.product

    write_table(
        file_name, ['delta', 'h', 'L_h', 'product', 'verdict'], rows
        )


LEMMA_COLUMNS = ['lemma', 'radius', 'state', 'value', 'bound', 'verdict']


def write_lemmas(file_name, rows):

    """Writes the rows of the property checks"""

    write_table(file_name, LEMMA_COLUMNS, rows)


def write_divergence(file_name, tallies):

    """Writes the divergence tallies, pairs of the scheme and its flags"""

    rows = []
    for scheme, diverged in tallies:
        n_paths = len(diverged)
        n_div = int(sum(bool(i) for i in diverged))
        rows.append([scheme, n_paths, n_div, n_div / n_paths])
    write_table(file_name, ['scheme', 'paths', 'diverged', 'fraction'], rows)


def write_manifest(file_name, options, subcommand, version):

    """Writes the run manifest

    The number of workers never changes the results and is left out. No time
    stamps are written, the manifest of a run is reproducible as well.

    """

    content = {k: v for k, v in options.items() if k != 'workers'}
    content['manifest'] = {
        'subcommand': subcommand,
        'version': version,
        }

    with open(file_name, 'w', newline='') as file_obj:
        file_obj.write(json.dumps(content, indent=4, sort_keys=True))
        file_obj.write('\n')
    logger.info('Written %s', file_name)
