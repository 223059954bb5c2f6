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
Tabular discounted Markov decision process model and policies.

States are dense 0-based indices.  Actions at each state carry
opaque integer labels which are preserved for reporting; internally
the actions of a state are addressed by their position in the
model's action list for that state.
"""

from __future__ import absolute_import, division, print_function

from collections import namedtuple
from functools import reduce
import itertools
import logging
import operator

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from mv_mdp.error import ContractError, InvalidPolicyError

logger = logging.getLogger(__name__)

# Absolute tolerance on probability row sums.
STOCHASTIC_TOLERANCE = 1e-12

ValidationReport = namedtuple('ValidationReport', 'violations warnings')


class MdpModel(namedtuple('MdpModel', 'beta actions rewards transitions')):
    """Finite discounted MDP.

    Fields:
        beta: discount factor.
        actions: tuple (per state) of tuples of action labels.
        rewards: tuple (per state) of reward arrays, one entry per action.
        transitions: tuple (per state) of arrays of shape
            (number of actions, number of states).

    The model is not validated on construction beyond the array
    shapes: use validate_model to check the probabilistic assumptions.
    """

    __slots__ = ()

    def __new__(cls, beta, actions, rewards, transitions):
        actions = tuple(tuple(int(x) for x in labels) for labels in actions)
        num_states = len(actions)

        if len(rewards) != num_states or len(transitions) != num_states:
            raise ContractError(
                'Rewards and transitions must be given for all {0} '
                'states'.format(num_states))

        reward_arrays = []
        transition_arrays = []

        for (i, labels) in enumerate(actions):
            reward = np.array(rewards[i], dtype=float).reshape(-1)
            transition = np.array(transitions[i], dtype=float)

            if transition.ndim != 2 and len(labels) == 0:
                transition = transition.reshape((0, num_states))

            if reward.shape[0] != len(labels):
                raise ContractError(
                    'State {0} has {1} actions but {2} rewards'.format(
                        i + 1, len(labels), reward.shape[0]))

            if transition.ndim != 2 or transition.shape[0] != len(labels):
                raise ContractError(
                    'State {0} transition table does not match its '
                    'actions'.format(i + 1))

            reward.flags.writeable = False
            transition.flags.writeable = False
            reward_arrays.append(reward)
            transition_arrays.append(transition)

        return super(MdpModel, cls).__new__(
            cls, float(beta), actions,
            tuple(reward_arrays), tuple(transition_arrays))

    @property
    def num_states(self):
        return len(self.actions)

    @property
    def num_policies(self):
        """Number of deterministic stationary policies."""

        return reduce(operator.mul, (len(x) for x in self.actions), 1)

    def action_index(self, state, label):
        """Return the position of an action label within a state.

        Raises InvalidPolicyError if the state does not offer
        the action.
        """

        try:
            return self.actions[state].index(label)
        except ValueError:
            raise InvalidPolicyError(
                'Action {0} is not available at state {1}'.format(
                    label, state + 1))

    def sorted_actions(self, state):
        """Return the action labels of a state in increasing order."""

        return tuple(sorted(self.actions[state]))

    def all_policies(self):
        """Iterate over every deterministic policy.

        Policies are generated in lexicographic order of their action
        labels, the first state varying slowest.
        """

        for choice in itertools.product(
                *[self.sorted_actions(i) for i in range(self.num_states)]):
            yield DeterministicPolicy(choice)


class DeterministicPolicy(namedtuple('DeterministicPolicy', 'choice')):
    """Stationary deterministic policy: one action label per state."""

    __slots__ = ()

    def __new__(cls, choice):
        return super(DeterministicPolicy, cls).__new__(
            cls, tuple(int(x) for x in choice))

    def __str__(self):
        return '({0})'.format(','.join(str(x) for x in self.choice))

    def replace_action(self, state, label):
        """Return a copy of the policy with one state's action changed."""

        choice = list(self.choice)
        choice[state] = label
        return DeterministicPolicy(choice)


class RandomizedPolicy(namedtuple('RandomizedPolicy', 'weights')):
    """Stationary randomized policy.

    The weights are given per state as a sequence of (label, weight)
    pairs, the labels forming the support of that state's action
    distribution.
    """

    __slots__ = ()

    def __new__(cls, weights):
        normalized = []

        for state_weights in weights:
            if hasattr(state_weights, 'items'):
                state_weights = state_weights.items()

            normalized.append(tuple(
                (int(label), float(weight))
                for (label, weight) in state_weights))

        return super(RandomizedPolicy, cls).__new__(cls, tuple(normalized))

    @classmethod
    def point_mass(cls, policy):
        """Construct the randomized policy equivalent to a deterministic
        policy."""

        return cls([((label, 1.0),) for label in policy.choice])

    def support(self, state):
        """Return the action labels available to the given state."""

        return tuple(label for (label, _) in self.weights[state])

    def is_deterministic(self):
        """Check whether every state puts all its weight on one action."""

        return all(
            sum(1 for (_, weight) in state_weights if weight > 0.0) == 1
            for state_weights in self.weights)


def policy_indices(model, policy):
    """Convert a deterministic policy to an array of action positions.

    Raises InvalidPolicyError if the policy does not define exactly
    one available action for every state.
    """

    if len(policy.choice) != model.num_states:
        raise InvalidPolicyError(
            'Policy {0} defines {1} actions for {2} states'.format(
                policy, len(policy.choice), model.num_states))

    return np.array([
        model.action_index(i, label) for (i, label) in enumerate(policy.choice)
    ], dtype=int)


def policy_weights(model, policy):
    """Convert a randomized policy to per-state weight arrays.

    Returns a list which gives, for each state, an array of weights
    aligned with that state's model actions (zero outside the support).

    Raises InvalidPolicyError if the weights do not form a probability
    distribution over available actions at every state.
    """

    if len(policy.weights) != model.num_states:
        raise InvalidPolicyError(
            'Randomized policy defines {0} states for a model with '
            '{1}'.format(len(policy.weights), model.num_states))

    result = []

    for (i, state_weights) in enumerate(policy.weights):
        theta = np.zeros(len(model.actions[i]))

        for (label, weight) in state_weights:
            if not np.isfinite(weight) or weight < 0.0 or weight > 1.0:
                raise InvalidPolicyError(
                    'Weight {0!r} for action {1} at state {2} is not a '
                    'probability'.format(weight, label, i + 1))

            theta[model.action_index(i, label)] += weight

        if abs(theta.sum() - 1.0) > STOCHASTIC_TOLERANCE:
            raise InvalidPolicyError(
                'Weights at state {0} sum to {1!r}'.format(
                    i + 1, theta.sum()))

        result.append(theta)

    return result


def induced_chain(model, policy):
    """Compute the Markov chain induced by a deterministic policy.

    Returns a tuple (P, r) of the transition matrix and the
    reward vector.
    """

    indices = policy_indices(model, policy)

    P = np.array([
        model.transitions[i][a] for (i, a) in enumerate(indices)])
    r = np.array([
        model.rewards[i][a] for (i, a) in enumerate(indices)])

    return (P, r)


def induced_chain_randomized(model, policy):
    """Compute the Markov chain induced by a randomized policy.

    The transition probabilities and rewards are the weighted mixtures
    of those of the individual actions.
    """

    weights = policy_weights(model, policy)

    P = np.array([
        theta.dot(model.transitions[i]) for (i, theta) in enumerate(weights)])
    r = np.array([
        theta.dot(model.rewards[i]) for (i, theta) in enumerate(weights)])

    return (P, r)


def check_irreducible(P):
    """Check whether the transition matrix P is irreducible.

    This is the case when the graph of its nonzero entries is
    strongly connected.
    """

    P = np.asarray(P)

    if P.shape[0] <= 1:
        return True

    (n_components, _) = connected_components(
        csr_matrix(P > 0.0), directed=True, connection='strong')

    return n_components == 1


def validate_model(model, policies=()):
    """Check a model against the assumptions of the solver.

    Any deterministic policies given are also checked: their induced
    chains should be irreducible.

    Returns a ValidationReport.  Problems which invalidate the model
    are listed as violations.  Reducible chains only give warnings since
    the closed-form evaluation only needs (I - beta P) to be invertible.
    """

    violations = []
    warnings = []

    beta = model.beta
    if not (np.isfinite(beta) and 0.0 < beta < 1.0):
        violations.append(
            'discount factor must lie in (0,1), got {0!r}'.format(beta))

    S = model.num_states
    if S < 1:
        violations.append('model must have at least one state')

    for i in range(S):
        labels = model.actions[i]

        if not labels:
            violations.append('state {0} has no actions'.format(i + 1))
            continue

        if len(set(labels)) != len(labels):
            violations.append(
                'state {0} has duplicate action labels'.format(i + 1))

        for (a, label) in enumerate(labels):
            if label < 1:
                violations.append(
                    'state {0} action {1}: labels must be positive '
                    'integers'.format(i + 1, label))

            reward = model.rewards[i][a]
            if not np.isfinite(reward):
                violations.append(
                    'state {0} action {1}: reward is not finite'.format(
                        i + 1, label))

            row = model.transitions[i][a]
            if row.shape[0] != S:
                violations.append(
                    'state {0} action {1}: transition has {2} entries, '
                    'expected {3}'.format(i + 1, label, row.shape[0], S))
                continue

            if not np.all(np.isfinite(row)):
                violations.append(
                    'state {0} action {1}: transition probabilities are '
                    'not finite'.format(i + 1, label))
                continue

            if np.any(row < 0.0) or np.any(row > 1.0):
                violations.append(
                    'state {0} action {1}: transition probabilities must '
                    'lie in [0,1]'.format(i + 1, label))

            total = row.sum()
            if abs(total - 1.0) > STOCHASTIC_TOLERANCE:
                violations.append(
                    'state {0} action {1}: transition probabilities sum to '
                    '{2!r}, not 1'.format(i + 1, label, total))

    if violations:
        return ValidationReport(violations, warnings)

    # Union of all action supports: if this is reducible then so is
    # every policy's chain.
    union = np.array([
        model.transitions[i].max(axis=0) for i in range(S)])
    if not check_irreducible(union):
        warnings.append('no policy induces an irreducible chain')

    for policy in policies:
        (P, _) = induced_chain(model, policy)

        if not check_irreducible(P):
            warnings.append(
                'chain induced by policy {0} is not irreducible'.format(
                    policy))

    for warning in warnings:
        logger.warning('Model warning: %s', warning)

    return ValidationReport(violations, warnings)
