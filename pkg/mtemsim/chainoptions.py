"""
Chaining run options together
=============================

The options of a run come from several places, the packaged defaults, an
optional configuration file and the command line, and later sources take
precedence over earlier ones. This module patches the default options with the
later sources one after another, while checking each value against the
default.

The configuration model is the one of JSON,

Atom
    A string, a number or a boolean. ``null`` is not accepted, an option is
    set to its default simply by omitting it.

List
    A **uniform** list of atoms, all entries sharing the type of the first
    entry of the default list, which cannot be empty. A new list replaces
    the default one.

Map
    Mapping from strings to values. The root of the options is a map, and
    the keys of a later map must all be present in the default one.

The default value of an option serves both as its value and as the
declaration of its type. Strings, like the ones read from ``key=value``
files, can be converted to numbers and booleans, and a single atom given for
a list option becomes a list of one entry. The conversion is switched on for
all options by the ``default_coercion`` of the chainer, and for a single
option by a **sibling** boolean meta-option in the default map, whose key is
the option key followed by the separator ``...`` and ``coercion``.

Errors in the user input are reported as :py:exc:`UpdateError` with the
location of the problem, a tuple of keys from the root, so that they can be
formatted into a useful message.

"""

import functools


#
# The exception classes for error reporting
# -----------------------------------------
#

class UpdateError(Exception):

    """The class for reporting errors occurred during the update process

    This exception indicates that some user input is not compatible with the
    default. Its first argument is the tuple of keys locating the problem,
    and the second one a string describing the problem at that location.

    """

    pass


class DefaultError(Exception):

    """The class for reporting errors in the default settings

    Different from :py:exc:`UpdateError`, this one results from a programmer
    error in the packaged defaults rather than from the user input.

    """

    pass


#
# Type determination
# ------------------
#

_NUMBER = 1
_BOOL = 2
_STRING = 3
_ATOMS = (1, 2, 3)
_LIST = 4
_MAP = 5

_TYPE_NAMES = {
    _NUMBER: 'number',
    _BOOL: 'boolean',
    _STRING: 'string',
    _LIST: 'list',
    _MAP: 'map',
    }

_TRUE_STRINGS = ('true', 'yes', 'on', '1')
_FALSE_STRINGS = ('false', 'no', 'off', '0')


def _find_type(node, tag=('', ), user=False):

    """Finds the type of a node

    :param node: The node to test
    :param tag: The tag for the node to test
    :param user: If this is a user input, False for default nodes
    :returns: One of the module constants for the node types
    :raises UpdateError, DefaultError: if the node is of none of the types,
        depending on if it is a user input

    """

    if isinstance(node, bool):
        return _BOOL
    elif isinstance(node, (int, float)):
        return _NUMBER
    elif isinstance(node, str):
        return _STRING
    elif isinstance(node, list):
        return _LIST
    elif isinstance(node, dict):
        return _MAP
    else:
        exception = UpdateError if user else DefaultError
        raise exception(
            tag,
            'type %s of value %r is not accepted' % (type(node).__name__, node)
            )


def _report_type_error(tag, default):

    """Raises the update error for a value of the wrong type"""

    expectation = _TYPE_NAMES[_find_type(default, tag=tag, user=False)]
    if isinstance(default, int) and not isinstance(default, bool):
        expectation = 'integer'
    raise UpdateError(
        tag,
        'a value of type %s is expected' % expectation
        )


def _coerce_atom(existing, new):

    """Converts an atom to the type of the existing one

    :raises ValueError: if the conversion is not possible

    """

    if isinstance(existing, bool):
        if isinstance(new, str):
            lowered = new.strip().lower()
            if lowered in _TRUE_STRINGS:
                return True
            elif lowered in _FALSE_STRINGS:
                return False
        raise ValueError(new)
    elif isinstance(new, bool) and not isinstance(existing, str):
        raise ValueError(new)
    elif isinstance(existing, int):
        if isinstance(new, str):
            new = float(new.strip())
        if isinstance(new, float) and not new.is_integer():
            raise ValueError(new)
        return int(new)
    elif isinstance(existing, float):
        if isinstance(new, str):
            return float(new.strip())
        return float(new)
    else:
        if isinstance(new, bool):
            raise ValueError(new)
        return str(new)


#
# The main class
# --------------
#


class ChainOptions(object):

    """Option settings chainer

    The default values of the meta-options are set in the initializer, then
    :py:meth:`chain_options` chains the option sets together.

    .. py:attribute:: separator

        The separator of the option key and the meta-option tag, default to
        ``...``.

    .. py:attribute:: proto_tag

       The tag marking list entries in the error locations, default to
       ``prototype``.

    .. py:attribute:: default_coercion

        If type coercion is attempted for atoms by default, false.

    """

    __slots__ = [
        'separator',
        'proto_tag',
        'default_coercion',
        ]

    def __init__(self, separator='...', proto_tag='prototype',
                 default_coercion=False):

        """Initializes the options chainer according to the default values"""

        self.separator = separator
        self.proto_tag = proto_tag
        self.default_coercion = default_coercion

    def _coercion(self, context, tag):
        return context.get(
            tag[-1] + self.separator + 'coercion', self.default_coercion
            )

    @staticmethod
    def _get_proto(tag, existing):

        """Gets the prototype of the entries of a list, its first entry

        :raises DefaultError: if the default list is empty

        """

        if len(existing) > 0:
            return existing[0]
        else:
            raise DefaultError(
                'No prototype for the empty default list %s' % tag
                )

    #
    # ### Node update methods ###
    #
    # All of them take the ``existing`` node, the ``new`` value, the ``tag``
    # locating the new node from the root, and the ``context``, the map where
    # the meta-options of the existing node are found. The last entry of the
    # tag is the key of the node in the context.
    #

    def _update_atom(self, existing, new, tag, context):

        """Updates an atom node"""

        new_type = _find_type(new, tag=tag, user=True)
        existing_type = _find_type(existing, tag=tag, user=False)
        coercion = self._coercion(context, tag)

        try:
            if new_type == existing_type and new_type != _NUMBER:
                return new
            elif new_type == _NUMBER == existing_type:
                return _coerce_atom(existing, new)
            elif coercion and new_type in _ATOMS:
                return _coerce_atom(existing, new)
            else:
                raise ValueError(new)
        except ValueError:
            _report_type_error(tag, existing)

    def _update_list(self, existing, new, tag, context):

        """Updates a list node, the new entries replace the existing ones"""

        new_type = _find_type(new, tag=tag, user=True)
        coercion = self._coercion(context, tag)

        if new_type in _ATOMS and coercion:
            new = [new]
        elif new_type != _LIST:
            _report_type_error(tag, existing)

        proto = self._get_proto(tag[-1], existing)
        proto_context = {
            self.proto_tag + self.separator + 'coercion': coercion
            }

        return [
            self._update_node(
                proto, i, tag + (n, self.proto_tag), proto_context
                )
            for n, i in enumerate(new)
            ]

    def _update_map(self, existing, new, tag, context):

        """Updates a map node, new keys are rejected"""

        new_type = _find_type(new, tag=tag, user=True)
        if new_type != _MAP:
            _report_type_error(tag, existing)

        new_map = dict(existing)
        for k, v in new.items():  # pylint: disable=invalid-name

            if k.find(self.separator) != -1:
                raise UpdateError(
                    tag + (k, ),
                    'users are not supposed to taint meta-options'
                    )

            if k in existing:
                new_map[k] = self._update_node(
                    existing[k], v, tag + (k, ), existing
                    )
            else:
                raise UpdateError(
                    tag + (k, ),
                    'invalid option'
                    )
        return new_map

    def _update_node(self, existing, new, tag, context):

        """Updates an existing node according to the new node

        This function is called recursively and forms the core of the class.

        :param existing: The existing node to update
        :param new: The new node to be patched onto the existing one
        :param tag: The tuple of keys locating the node from the root
        :param context: The map holding the meta-options of the node
        :returns: The new node after the update, of the type of the existing
        :raises UpdateError: if the new value is not compatible

        """

        existing_type = _find_type(existing, tag=tag, user=False)

        if existing_type in _ATOMS:
            return self._update_atom(existing, new, tag, context)
        elif existing_type == _LIST:
            return self._update_list(existing, new, tag, context)
        else:
            return self._update_map(existing, new, tag, context)

    def chain_options(self, *ops):

        """Chains multiple sets of options together

        The last argument is the default options, and earlier ones take
        higher precedence. The meta-options of the defaults are dropped from
        the result.

        """

        result = functools.reduce(
            lambda d, u: self._update_node(d, u, ('', ), d),
            reversed(ops[:-1]), ops[-1]
            )
        return {
            k: v for k, v in result.items() if k.find(self.separator) == -1
            }

    def remove_proto(self, tag):

        """Removes the prototype layers from the tag path"""

        return tuple(i for i in tag if i != self.proto_tag)
