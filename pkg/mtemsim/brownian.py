"""
Reproducible Brownian paths
===========================

Each Brownian path is generated on a fine grid with ``refinement`` substeps
of length :math:`\\Delta / m` per coarse step, and the coarse increments are
the sums of the fine ones. So the discrete scheme and its continuous-time
interpolant are driven by the very same realization.

Random streams
--------------

The stream for a path is the counter-based Philox generator of numpy, keyed
by the seed sequence with the master seed as entropy and the path index as
its spawn key, that is, the ``path_index``-th child of
``SeedSequence(master_seed)``. Hence a path depends on nothing but the pair
(master seed, path index), whatever the order in which paths are generated
or the process generating them. The normal variates are the ziggurat normals
of ``numpy.random.Generator.standard_normal``, drawn row by row, one row of
``refinement`` values per coarse step.

"""

import collections
import math

import numpy as np


def path_stream(master_seed, path_index):

    """Gets the random generator for a given path"""

    seq = np.random.SeedSequence(master_seed, spawn_key=(path_index, ))
    return np.random.Generator(np.random.Philox(seq))


class BrownianPath(collections.namedtuple('BrownianPath', [
        'master_seed',
        'path_index',
        'delta',
        'refinement',
        'fine_increments',
        ])):

    """A realization of the Brownian increments of one path

    .. py:attribute:: fine_increments

        The array of shape ``(steps, refinement)`` holding the increments of
        the fine grid, row ``k`` covering the coarse step from ``k delta`` to
        ``(k + 1) delta``.

    """

    __slots__ = ()

    @property
    def steps(self):
        """The number of coarse steps covered"""
        return self.fine_increments.shape[0]

    def coarse_increments(self):

        """Gets the coarse increments, the row sums of the fine ones"""

        return self.fine_increments.sum(axis=1)

    def motion(self):

        """Gets B on the whole fine grid, starting from B(0) = 0"""

        return np.concatenate(([0.0], np.cumsum(self.fine_increments)))


def generate_path(master_seed, path_index, delta, steps, refinement=16):

    """Generates the Brownian path for a given path index

    :param master_seed: The master seed of the run, a non-negative integer
    :param path_index: The zero-based index of the path
    :param delta: The coarse step size
    :param steps: The number of coarse steps
    :param refinement: The number of fine substeps per coarse step
    :raises ValueError: for non-positive sizes

    """

    if not delta > 0.0:
        raise ValueError('step size %r is not positive' % delta)
    if steps < 1 or refinement < 1:
        raise ValueError('steps and refinement have to be positive')

    gen = path_stream(master_seed, path_index)
    normals = gen.standard_normal((steps, refinement))
    return BrownianPath(
        master_seed=master_seed, path_index=path_index, delta=delta,
        refinement=refinement,
        fine_increments=normals * math.sqrt(delta / refinement)
        )


def path_from_increments(fine_increments, delta, path_index=0):

    """Wraps given fine increments, one row per coarse step, as a path

    This is mostly useful for degenerate or hand-made paths, the master seed
    is set to None for them.

    """

    fine = np.atleast_2d(np.asarray(fine_increments, dtype=np.float64))
    return BrownianPath(
        master_seed=None, path_index=path_index, delta=delta,
        refinement=fine.shape[1], fine_increments=fine
        )


def zero_path(delta, steps, refinement=1):

    """Makes the degenerate path with all increments zero"""

    return path_from_increments(np.zeros((steps, refinement)), delta)
