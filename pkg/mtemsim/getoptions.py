"""
Getting the options for a run
=============================

This module contains the functions that get the validated options of a run
from the packaged defaults, an optional configuration file or text, and the
command-line flags, in the order of increasing precedence.

Configuration files can be in three formats, decided by the file name,

``.json``
    A JSON object of options, run manifests are files of this kind.

``.yml`` or ``.yaml``
    A YAML mapping of options.

anything else
    Lines of ``key = value``, where everything after a ``#`` is a comment.
    For list options, the entries are separated by commas.

The keys are the hyphenated option names of the packaged defaults. A
``manifest`` entry, as written into run manifests, is ignored.

"""

import collections
import json
import logging
import math

import pkg_resources
import yaml

from .chainoptions import ChainOptions, UpdateError
from .models import MODELS, get_model, get_policy
from .schemes import SCHEMES
from .stabilitylab import CHUNK_SIZES


logger = logging.getLogger(__name__)


class ConfigError(ValueError):

    """Raised for invalid run options

    The first argument is the key of the offending option, or the location
    in the configuration file, and the second one the reason.

    """

    pass


#
# The validated options
# ---------------------
#
# Pairs of the field of the run configuration and the key of the option.
#

OPTION_KEYS = [
    ('model', 'model'),
    ('mu', 'mu'),
    ('sigma', 'sigma'),
    ('scheme', 'scheme'),
    ('p', 'p'),
    ('delta', 'delta'),
    ('steps', 'steps'),
    ('paths', 'paths'),
    ('seed', 'seed'),
    ('refinement', 'refinement'),
    ('x0', 'x0'),
    ('record_paths', 'record-paths'),
    ('fit_window', 'fit-window'),
    ('moment_grid', 'moment-grid'),
    ('underflow_floor', 'underflow-floor'),
    ('overflow_guard', 'overflow-guard'),
    ('lam', 'lambda'),
    ('epsilon', 'epsilon'),
    ('lemma_trials', 'lemma-trials'),
    ('lemma_radii', 'lemma-radii'),
    ('check_deltas', 'check-deltas'),
    ('out', 'out'),
    ('workers', 'workers'),
    ]

RunConfig = collections.namedtuple(
    'RunConfig', [field for field, _ in OPTION_KEYS]
    )


def load_defaults():

    """Loads the packaged default options"""

    return json.loads(pkg_resources.resource_string(
        __name__, 'data/defaultoptions.json'
        ).decode('utf-8'))


def config_options(config):

    """Converts a run configuration back into the dictionary of options"""

    res = {}
    for field, key in OPTION_KEYS:
        value = getattr(config, field)
        res[key] = list(value) if isinstance(value, tuple) else value
    return res


#
# Readers
# -------
#


def parse_key_values(text, source='<text>'):

    """Parses the lines of ``key = value`` pairs into a dictionary

    The values are kept as strings, to be converted to the types of the
    defaults when chaining.

    :raises ConfigError: for lines without an equal sign or duplicate keys

    """

    res = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split('#', 1)[0].strip()
        if line == '':
            continue

        key, sep, value = line.partition('=')
        key = key.strip()
        if sep == '' or key == '':
            raise ConfigError(
                '%s line %d' % (source, lineno),
                'expected a line of the form key = value'
                )
        if key in res:
            raise ConfigError(key, 'given more than once in %s' % source)

        value = value.strip()
        if value.find(',') != -1:
            res[key] = [i.strip() for i in value.split(',')]
        else:
            res[key] = value

    return res


def read_config_file(file_name):

    """Reads the options from a configuration file

    :raises OSError: if the file cannot be opened
    :raises ConfigError: if the content cannot be parsed

    """

    with open(file_name, 'r') as file_obj:
        content = file_obj.read()

    if file_name.endswith('.json'):
        try:
            options = json.loads(content)
        except ValueError as err:
            raise ConfigError(
                file_name, 'cannot be parsed as JSON, %s' % err
                )
    elif file_name.endswith(('.yml', '.yaml')):
        try:
            options = yaml.safe_load(content)
        except yaml.YAMLError as err:
            raise ConfigError(
                file_name, 'cannot be parsed as YAML, %s' % err
                )
        options = {} if options is None else options
    else:
        options = parse_key_values(content, source=file_name)

    if not isinstance(options, dict):
        raise ConfigError(file_name, 'does not contain a mapping of options')
    options.pop('manifest', None)

    logger.debug('Read %d options from %s', len(options), file_name)
    return options


#
# Validation
# ----------
#


def _require(cond, key, reason):
    if not cond:
        raise ConfigError(key, reason)


def _finite(ops, key):
    _require(math.isfinite(ops[key]), key, 'has to be finite')


def _positive(ops, key, minimum=0):
    _require(ops[key] > minimum, key, 'has to be greater than %r' % minimum)


def _validate(ops):

    """Checks the constraints on the chained options"""

    # pylint: disable=too-many-branches

    _require(ops['model'] in MODELS, 'model',
             'has to be one of %s' % ', '.join(MODELS))
    _require(ops['scheme'] in SCHEMES, 'scheme',
             'has to be one of %s' % ', '.join(SCHEMES))
    _require(ops['moment-grid'] in CHUNK_SIZES, 'moment-grid',
             'has to be one of %s' % ', '.join(sorted(CHUNK_SIZES)))

    for key in ['mu', 'sigma', 'x0', 'delta', 'p', 'lambda', 'epsilon',
                'underflow-floor', 'overflow-guard']:
        _finite(ops, key)

    _require(0.0 < ops['p'] < 1.0, 'p', 'has to be in (0, 1)')
    for key in ['delta', 'underflow-floor', 'overflow-guard']:
        _positive(ops, key, 0.0)
    for key in ['steps', 'paths', 'refinement', 'workers', 'lemma-trials']:
        _positive(ops, key, 0)
    _require(ops['seed'] >= 0, 'seed', 'has to be non-negative')
    _require(ops['record-paths'] >= 0, 'record-paths',
             'has to be non-negative')

    window = ops['fit-window']
    _require(len(window) == 2, 'fit-window', 'needs exactly two fractions')
    _require(0.0 <= window[0] < window[1] <= 1.0, 'fit-window',
             'needs fractions 0 <= lo < hi <= 1')

    _require(ops['lambda'] >= 0.0, 'lambda',
             'has to be non-negative, zero for estimation')
    _require(ops['epsilon'] >= 0.0, 'epsilon',
             'has to be non-negative, zero for half of lambda')
    if ops['lambda'] > 0.0:
        _require(ops['epsilon'] < ops['lambda'], 'epsilon',
                 'has to be smaller than lambda')

    for key in ['lemma-radii', 'check-deltas']:
        _require(len(ops[key]) > 0, key, 'cannot be empty')
        _require(
            all(math.isfinite(i) and i > 0.0 for i in ops[key]), key,
            'needs positive finite entries'
            )
    _require(ops['out'] != '', 'out', 'cannot be empty')

    if ops['scheme'] == 'mtem':
        _check_radius_delta(ops['model'], ops['mu'], ops['sigma'],
                            [ops['delta']], 'delta')
    _check_radius_delta(ops['model'], ops['mu'], ops['sigma'],
                        ops['check-deltas'], 'check-deltas')


def _check_radius_delta(model_name, mu, sigma, deltas, key):

    """Checks the step sizes are in the range of the truncation radius"""

    delta_star = get_policy(get_model(model_name, mu, sigma)).delta_star
    if delta_star is not None:
        _require(
            all(i <= delta_star for i in deltas), key,
            'exceeds the validity bound %r of the truncation radius of '
            'model %s' % (delta_star, model_name)
            )


# Subcommands evaluating the truncation radius at delta for either scheme
RADIUS_SUBCOMMANDS = ('compare', 'verify')


def check_subcommand(subcommand, config):

    """Checks the options a subcommand needs beyond the common validation

    :param subcommand: The name of the subcommand
    :param config: The validated :py:class:`RunConfig`
    :raises ConfigError: if the step size is beyond the validity bound of
        the truncation radius of a subcommand needing the radius

    """

    if subcommand in RADIUS_SUBCOMMANDS:
        _check_radius_delta(config.model, config.mu, config.sigma,
                            [config.delta], 'delta')


def parse_config(text=None, flags=None, config_file=None):

    """Parses and validates the options of a run

    :param text: The text of ``key = value`` lines, used in place of the
        configuration file
    :param flags: The dictionary of options from the command line, with the
        hyphenated keys, they take the highest precedence
    :param config_file: The name of the configuration file
    :raises ConfigError: for unknown keys, type mismatches and constraint
        violations
    :raises OSError: if the configuration file cannot be read
    :returns: The validated :py:class:`RunConfig`

    """

    config_dicts = []
    if flags:
        config_dicts.append(flags)
    if config_file is not None:
        config_dicts.append(read_config_file(config_file))
    if text is not None:
        config_dicts.append(parse_key_values(text))
    config_dicts.append(load_defaults())

    chainer = ChainOptions(default_coercion=True)
    try:
        ops = chainer.chain_options(*config_dicts)
    except UpdateError as err:
        tag = chainer.remove_proto(err.args[0])
        key = str(tag[1]) if len(tag) > 1 else '<root>'
        raise ConfigError(key, err.args[1])

    _validate(ops)
    return RunConfig(**{
        field: tuple(ops[key]) if isinstance(ops[key], list) else ops[key]
        for field, key in OPTION_KEYS
        })
