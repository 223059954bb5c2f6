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

from collections import namedtuple, OrderedDict

import numpy as np

from mv_mdp.error import ContractError, MVMDPError

# Information about each role:
#     name: Human-readable name of the role.
#     symbol: Short symbol used in reports.
#     nonnegative: True if entries must not be (materially) negative.
RoleInfo = namedtuple('RoleInfo', 'name symbol nonnegative')

# Round-off allowance for roles which must be nonnegative.
NONNEGATIVE_SLACK = 1e-9

# Multiple of machine epsilon, relative to the magnitude of the terms
# from which a nonnegative vector was computed, treated as round-off.
ROUND_OFF_FACTOR = 64.0


class ValueRole:
    """Class for handling the roles of state-indexed value vectors.
    """

    MEAN = 'J'
    TARGET = 'L'
    VARIANCE = 'V'
    REWARD_H = 'H'
    REWARD_F = 'F'
    POTENTIAL_G = 'G'
    DIFFERENCE = 'D'

    _info = OrderedDict((
        (MEAN,        RoleInfo('Mean performance',        'J',      False)),
        (TARGET,      RoleInfo('Target mean',             'lambda', False)),
        (VARIANCE,    RoleInfo('Variance',                'sigma2', True)),
        (REWARD_H,    RoleInfo('Variance reward',         'h',      False)),
        (REWARD_F,    RoleInfo('Second moment reward',    'f',      False)),
        (POTENTIAL_G, RoleInfo('Second moment potential', 'g',      False)),
        (DIFFERENCE,  RoleInfo('Difference',              'delta',  False)),
    ))

    ROLE_ALL = tuple(_info.keys())

    @classmethod
    def get_name(cls, role):
        """Return the human-readable name of the role.

        Raises MVMDPError if the role does not exist.
        """

        try:
            return cls._info[role].name
        except KeyError:
            raise MVMDPError('Unknown value role {0}'.format(role))

    @classmethod
    def get_info(cls, role):
        """Return a RoleInfo object describing the role.

        Raises MVMDPError if the role does not exist.
        """

        try:
            return cls._info[role]
        except KeyError:
            raise MVMDPError('Unknown value role {0}'.format(role))

    @classmethod
    def is_valid(cls, role):
        """Check whether a role is valid."""

        return role in cls._info

    @classmethod
    def lookup_symbol(cls, symbol):
        """Return the role code corresponding to the given report symbol.

        Raises MVMDPError if the symbol is not recognised.
        """

        for (role, info) in cls._info.items():
            if symbol == info.symbol:
                return role

        raise MVMDPError('Unknown value symbol {0}'.format(symbol))


def round_off_slack(scale=1.0):
    """Allowance below zero for a nonnegative vector computed from terms
    of the given magnitude."""

    return max(NONNEGATIVE_SLACK,
               ROUND_OFF_FACTOR * np.finfo(float).eps * scale)


class ValueVector(namedtuple('ValueVector', 'values role')):
    """State-indexed vector of reals tagged with its role.

    The values are held in a read-only numpy array.  For roles which
    must be nonnegative, negative entries within the round-off slack
    for the given scale are set to zero.
    """

    __slots__ = ()

    def __new__(cls, values, role, num_states=None, scale=1.0):
        if not ValueRole.is_valid(role):
            raise ContractError('Unknown value role {0}'.format(role))

        values = np.array(values, dtype=float)

        if values.ndim != 1:
            raise ContractError('Value vector must be one-dimensional')

        if num_states is not None and values.shape[0] != num_states:
            raise ContractError(
                'Value vector has length {0}, expected {1}'.format(
                    values.shape[0], num_states))

        if not np.all(np.isfinite(values)):
            raise ContractError('Value vector has non-finite entries')

        if ValueRole.get_info(role).nonnegative and values.size:
            if values.min() < - round_off_slack(scale):
                raise ContractError(
                    'Negative entry {0!r} in {1} vector'.format(
                        values.min(), ValueRole.get_name(role).lower()))

            values[values < 0.0] = 0.0

        values.flags.writeable = False

        return super(ValueVector, cls).__new__(cls, values, role)

    @property
    def size(self):
        return self.values.shape[0]

    def __eq__(self, other):
        return (isinstance(other, ValueVector) and self.role == other.role
                and np.array_equal(self.values, other.values))

    def __ne__(self, other):
        return not self.__eq__(other)

    __hash__ = None

    def as_role(self, role):
        """Return a copy of this vector with a different role."""

        return ValueVector(self.values, role)
