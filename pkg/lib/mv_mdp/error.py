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
Errors defined for the mean-variance MDP solver.

"""


class MVMDPError(Exception):
    """
    Base Class to handle errors in this module.
    """
    pass


class ContractError(MVMDPError):
    """
    Error indicating that a numerical routine was given arguments of
    the wrong shape or outside their allowed range.
    """
    pass


class InvalidPolicyError(MVMDPError):
    """
    Error indicating that a policy does not fit the model.
    """
    pass


class InfeasiblePolicyError(MVMDPError):
    """
    Error indicating that a policy does not reach the target mean.

    """

    def __init__(self, policy, deviation, tolerance, *args):
        """
        Takes the offending policy, the largest deviation of its mean
        performance from the target and the tolerance which was used.
        """

        message = 'Policy {0} is not in the constrained policy set: ' \
                  'mean differs from target by {1:.3g} ' \
                  '(tolerance {2:.3g})'.format(policy, deviation, tolerance)

        self.policy = policy
        self.deviation = deviation

        Exception.__init__(self, message, *args)


class EmptyFeasibleSetError(MVMDPError):
    """
    Error indicating that the constrained policy set is empty.

    Must be given the (0-based) index of the first state which has
    no feasible action.  The message uses 1-based state numbers.
    """

    def __init__(self, state, *args):
        message = 'No feasible action at state {0}: ' \
                  'the constrained policy set is empty'.format(state + 1)

        self.state = state

        Exception.__init__(self, message, *args)


class EnumerationTooLargeError(MVMDPError):
    """
    Error indicating that more policies would have to be enumerated
    than the configured cap allows.
    """

    def __init__(self, count, cap, *args):
        message = 'Enumeration of {0} policies exceeds the cap ' \
                  'of {1}'.format(count, cap)

        self.count = count
        self.cap = cap

        Exception.__init__(self, message, *args)


class ModelFormatError(MVMDPError):
    """
    Error indicating that a model document could not be read.

    The line and column are included in the message when known.
    """

    def __init__(self, message, line=None, column=None, *args):
        if line is not None:
            if column is not None:
                message = 'line {0} column {1}: {2}'.format(
                    line, column, message)
            else:
                message = 'line {0}: {1}'.format(line, message)

        self.line = line
        self.column = column

        Exception.__init__(self, message, *args)


class ModelValidationError(MVMDPError):
    """
    Error indicating that a model failed validation.
    """

    def __init__(self, violations, *args):
        message = 'Model failed validation: ' + '; '.join(violations)

        self.violations = list(violations)

        Exception.__init__(self, message, *args)


class ConvergenceError(MVMDPError):
    """Class for iterative methods exceeding their iteration guard."""
    pass
