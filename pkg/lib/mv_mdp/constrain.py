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
The set of policies with a given mean performance.

A policy has mean performance lambda exactly when every action it
chooses satisfies the one-step equation

    r(i,a) + beta sum_j p(j|i,a) lambda(j) = lambda(i)

so the constrained policy set is the Cartesian product of the
per-state sets of actions which satisfy it.
"""

from __future__ import absolute_import, division, print_function

from collections import namedtuple
from functools import reduce
import itertools
import logging
import operator

import numpy as np

from mv_mdp.error import ContractError, EmptyFeasibleSetError
from mv_mdp.evaluate import FEASIBILITY_TOLERANCE, mean_performance
from mv_mdp.model import DeterministicPolicy
from mv_mdp.role import ValueRole, ValueVector

logger = logging.getLogger(__name__)


class FeasibleSets(namedtuple('FeasibleSets',
                              'per_state target tolerance residuals')):
    """Per-state feasible action sets for a target mean.

    Fields:
        per_state: tuple (per state) of feasible action labels,
            in increasing order.
        target: ValueVector of the target mean lambda.
        tolerance: absolute tolerance applied to the one-step residual.
        residuals: tuple (per state) of (label, residual) pairs for
            every action of the model, for diagnostics.
    """

    __slots__ = ()

    def first_empty_state(self):
        """Return the first state with no feasible action, or None."""

        for (i, labels) in enumerate(self.per_state):
            if not labels:
                return i

        return None

    def is_empty(self):
        return self.first_empty_state() is not None

    @property
    def size(self):
        """Number of policies in the constrained set."""

        return reduce(operator.mul, (len(x) for x in self.per_state), 1)

    def contains(self, policy):
        """Check whether every action of the policy is feasible."""

        return (len(policy.choice) == len(self.per_state) and all(
            label in labels
            for (label, labels) in zip(policy.choice, self.per_state)))


def _target_vector(model, lambda_):
    """Convert a target to a ValueVector, checking its length."""

    if not isinstance(lambda_, ValueVector):
        return ValueVector(lambda_, ValueRole.TARGET, model.num_states)

    if lambda_.size != model.num_states:
        raise ContractError(
            'Target has length {0} for a {1}-state model'.format(
                lambda_.size, model.num_states))

    return lambda_.as_role(ValueRole.TARGET)


def feasible_sets(model, lambda_, tolerance=FEASIBILITY_TOLERANCE):
    """Compute the feasible action set at each state.

    An action is feasible at state i when the one-step residual
    |r(i,a) + beta sum_j p(j|i,a) lambda(j) - lambda(i)| does not
    exceed the tolerance.  Empty sets are a legal result.
    """

    if not tolerance > 0.0:
        raise ContractError('Feasibility tolerance must be positive')

    target = _target_vector(model, lambda_)
    lam = target.values

    per_state = []
    residuals = []

    for i in range(model.num_states):
        residual = np.abs(
            model.rewards[i] + model.beta * model.transitions[i].dot(lam)
            - lam[i])

        residuals.append(tuple(
            (label, float(x)) for (label, x) in zip(
                model.actions[i], residual)))

        per_state.append(tuple(sorted(
            label for (label, x) in zip(model.actions[i], residual)
            if x <= tolerance)))

        logger.debug('Feasible actions at state %i: %s',
                     i + 1, per_state[-1])

    return FeasibleSets(
        tuple(per_state), target, tolerance, tuple(residuals))


def enumerate_feasible_policies(sets):
    """Generate every policy in the constrained set.

    Policies are generated lazily in lexicographic order.

    Raises EmptyFeasibleSetError (immediately, not on iteration)
    if any state has no feasible action.
    """

    empty = sets.first_empty_state()
    if empty is not None:
        raise EmptyFeasibleSetError(empty)

    return (DeterministicPolicy(choice)
            for choice in itertools.product(*sets.per_state))


def verify_membership(model, policy, lambda_,
                      tolerance=FEASIBILITY_TOLERANCE):
    """Check whether a policy's mean performance equals lambda
    within the tolerance (maximum norm)."""

    target = _target_vector(model, lambda_)
    J = mean_performance(model, policy)

    return bool(np.abs(J.values - target.values).max() <= tolerance)
