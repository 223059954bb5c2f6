# Copyright (C) 2026 East Asian Observatory.
#
# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <http://www.gnu.org/licenses/>.

"""
Solution of the discounted linear systems (I - gamma P) x = b.
"""

from __future__ import absolute_import, division, print_function

from collections import namedtuple

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from mv_mdp.error import ContractError
from mv_mdp.role import ValueRole, ValueVector

# Row sums of P may carry round-off from mixing several actions.
ROW_SUM_SLACK = 1e-9

DiscountedSystem = namedtuple('DiscountedSystem', 'P gamma b')


def _factor(P, gamma):
    """Check a discounted transition matrix and LU-factorize I - gamma P.
    """

    P = np.asarray(P, dtype=float)

    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise ContractError(
            'Transition matrix must be square, got shape {0}'.format(
                P.shape))

    if not (0.0 < gamma < 1.0):
        raise ContractError(
            'Discount must lie in (0,1), got {0!r}'.format(gamma))

    if (np.any(P < 0.0) or
            np.any(np.abs(P.sum(axis=1) - 1.0) > ROW_SUM_SLACK)):
        raise ContractError('Transition matrix is not row-stochastic')

    return lu_factor(np.eye(P.shape[0]) - gamma * P)


def solve_discounted(system, role=ValueRole.MEAN, scale=1.0):
    """Solve (I - gamma P) x = b.

    The solution is the unique fixed point of x = b + gamma P x,
    i.e. the discounted total of the reward b.  It is returned
    as a ValueVector with the given role (and round-off scale).
    """

    b = np.asarray(system.b, dtype=float)
    P = np.asarray(system.P, dtype=float)

    if b.ndim != 1 or b.shape[0] != P.shape[0]:
        raise ContractError(
            'Right-hand side has shape {0} for a {1}-state chain'.format(
                b.shape, P.shape[0]))

    factor = _factor(P, system.gamma)

    return ValueVector(lu_solve(factor, b), role, scale=scale)


def discounted_inverse(P, gamma):
    """Compute (I - gamma P)^-1 column by column."""

    factor = _factor(P, gamma)

    return lu_solve(factor, np.eye(factor[0].shape[0]))


def positive_inverse_check(P, gamma):
    """Check whether every entry of (I - gamma P)^-1 is positive.

    This holds when the chain with matrix P is irreducible.
    """

    return bool(np.all(discounted_inverse(P, gamma) > 0.0))
