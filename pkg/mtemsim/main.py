"""
The main driver module for the code
===================================

This module contains the main driver function for the code, which should be
called by the executable of the program.

"""


import argparse
import logging
import sys

from .getoptions import ConfigError, parse_config
from .rundriver import SUBCOMMANDS, run_command
from .stabilitylab import EstimationError
from .util import (
    EXIT_CONFIG, EXIT_ESTIMATION, EXIT_FAILURE, terminate_program
    )


#
# Pairs of the flag destination and the option key
#

_FLAG_KEYS = [
    ('model', 'model'),
    ('mu', 'mu'),
    ('sigma', 'sigma'),
    ('scheme', 'scheme'),
    ('delta', 'delta'),
    ('steps', 'steps'),
    ('paths', 'paths'),
    ('seed', 'seed'),
    ('refinement', 'refinement'),
    ('x0', 'x0'),
    ('p', 'p'),
    ('out', 'out'),
    ('window', 'fit-window'),
    ('workers', 'workers'),
    ('lam', 'lambda'),
    ('epsilon', 'epsilon'),
    ('grid', 'moment-grid'),
    ('record_paths', 'record-paths'),
    ]


def build_parser():

    """Builds the command-line argument parser"""

    parser = argparse.ArgumentParser(
        description='Simulating SDEs with the modified truncated '
        'Euler-Maruyama scheme and checking its stability',
        )
    parser.add_argument('COMMAND', choices=SUBCOMMANDS,
                        help='The subcommand to run')
    parser.add_argument('-c', '--config', type=str,
                        help='The configuration file, key = value lines, '
                        'JSON or YAML, a run manifest works as well')
    parser.add_argument('--model', type=str,
                        help='The built-in model, example41 or linear')
    parser.add_argument('--mu', type=float,
                        help='The drift coefficient of the linear model')
    parser.add_argument('--sigma', type=float,
                        help='The diffusion coefficient of the linear model')
    parser.add_argument('--scheme', type=str,
                        help='The scheme, mtem or em')
    parser.add_argument('--delta', type=float, help='The step size')
    parser.add_argument('--steps', type=int, help='The number of steps')
    parser.add_argument('--paths', type=int, help='The number of paths')
    parser.add_argument('--seed', type=int, help='The master seed')
    parser.add_argument('--refinement', type=int,
                        help='The number of Brownian substeps per step')
    parser.add_argument('--x0', type=float, help='The initial state')
    parser.add_argument('--p', type=float, help='The moment order')
    parser.add_argument('-o', '--out', type=str,
                        help='The output directory')
    parser.add_argument('--window', type=float, nargs=2,
                        metavar=('LO', 'HI'),
                        help='The fit window as fractions of the horizon')
    parser.add_argument('-j', '--workers', type=int,
                        help='The number of worker processes')
    parser.add_argument('--lambda', dest='lam', type=float,
                        help='The asserted lambda, 0 for estimation')
    parser.add_argument('--epsilon', type=float,
                        help='The slack epsilon, 0 for half of lambda')
    parser.add_argument('--grid', type=str,
                        help='The grid of the moment curve, coarse or fine')
    parser.add_argument('--record-paths', type=int,
                        help='The number of paths to write out, 0 for all')
    parser.add_argument('-v', '--verbose', action='store_true',
                        help='Print debugging messages')
    parser.add_argument('-q', '--quiet', action='store_true',
                        help='Print only warnings and errors')
    return parser


def get_flags(args):

    """Gets the options given on the command line, keyed by option key"""

    flags = {}
    for dest, key in _FLAG_KEYS:
        value = getattr(args, dest)
        if value is not None:
            flags[key] = value
    return flags


def main(argv=None):

    """The main driver function"""

    args = build_parser().parse_args(argv)

    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    else:
        level = logging.INFO
    logging.basicConfig(
        level=level, stream=sys.stderr,
        format='%(levelname)s %(name)s: %(message)s'
        )

    try:
        config = parse_config(flags=get_flags(args), config_file=args.config)
        return run_command(args.COMMAND, config)
    except ConfigError as err:
        terminate_program(
            'Invalid configuration: \n   %s: %s' % err.args, EXIT_CONFIG
            )
    except (EstimationError, ArithmeticError) as err:
        terminate_program('Estimation failed: \n%s' % err, EXIT_ESTIMATION)
    except ValueError as err:
        terminate_program('Invalid input: \n%s' % err, EXIT_CONFIG)
    except OSError as err:
        terminate_program('%s' % err, EXIT_FAILURE)
