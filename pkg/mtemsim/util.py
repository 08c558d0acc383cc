"""
Utility functions
=================

This module defines some utility functions that can be used in multiple
unrelated part of the code, such as error reporting and number formatting.

"""

import functools
import sys


EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_VERIFICATION = 3
EXIT_ESTIMATION = 4


def terminate_program(err_msg, ret_code=EXIT_FAILURE):

    """Terminates the current program

    :param err_msg: The error message to be printed out
    :param ret_code: The return code for the termination of the program

    """

    p = functools.partial(  # pylint: disable=invalid-name
        print, file=sys.stderr
        )

    p('')
    p('*' * 80)
    p('FATAL ERROR!')
    p('*' * 80)
    p('')
    p(err_msg)
    p('')

    sys.exit(ret_code)


def format_value(value, float_format='%.17g'):

    """Formats a value for the output files

    Floats get 17 significant digits, which is enough to read back the very
    same double, booleans are written as 0 or 1, and None as an empty field.

    """

    if value is None:
        return ''
    elif isinstance(value, bool):
        return '1' if value else '0'
    elif isinstance(value, int):
        return '%d' % value
    elif isinstance(value, float):
        return float_format % value
    elif hasattr(value, 'dtype'):
        return format_value(value.item(), float_format)
    else:
        return str(value)
