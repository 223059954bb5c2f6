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
Closed-form evaluation of the mean and variance of the total
discounted reward.

The variance of a beta-discounted chain is the discounted total, at
discount beta squared, of the reward function h computed from the
mean performance.  Adding the squared mean gives the second moment,
which is the discounted total of the simpler reward f.
"""

from __future__ import absolute_import, division, print_function

import logging

import numpy as np

from mv_mdp.error import ContractError, InfeasiblePolicyError
from mv_mdp.linsolve import DiscountedSystem, solve_discounted
from mv_mdp.model import (
    induced_chain, induced_chain_randomized, policy_weights)
from mv_mdp.role import ValueRole, ValueVector

logger = logging.getLogger(__name__)

# Largest permitted deviation of a policy's mean from the target.
FEASIBILITY_TOLERANCE = 1e-7


def _as_array(vector, num_states, name):
    """Extract a numpy array from a ValueVector or plain sequence."""

    if isinstance(vector, ValueVector):
        vector = vector.values

    vector = np.asarray(vector, dtype=float)

    if vector.shape != (num_states,):
        raise ContractError(
            '{0} has shape {1} for a {2}-state model'.format(
                name, vector.shape, num_states))

    return vector


def _h_vector(P, r, J, beta):
    # Centred about J(i): equal to the expanded form when J is the mean,
    # and nonnegative.
    centred = r[:, np.newaxis] + beta * J[np.newaxis, :] - J[:, np.newaxis]
    return (P * centred ** 2).sum(axis=1)


def _variance_scale(J, beta):
    """Magnitude of the terms a variance is computed from."""

    return max(1.0, float(np.abs(J).max()) ** 2) / (1.0 - beta ** 2)


def _f_vector(P, r, J, beta):
    return r ** 2 + 2 * beta * r * P.dot(J)


def mean_performance(model, policy):
    """Compute the mean discounted performance J of a policy."""

    (P, r) = induced_chain(model, policy)

    return solve_discounted(
        DiscountedSystem(P, model.beta, r), ValueRole.MEAN)


def new_reward_h(model, policy, J):
    """Compute the variance reward function h.

    h(i) = r(i)^2 + 2 beta r(i) sum_j p(j|i) J(j)
           + beta^2 sum_j p(j|i) J(j)^2 - J(i)^2

    where J should be the mean performance of the policy (or a target
    known to be equal to it).  It is evaluated in the equivalent form

    h(i) = sum_j p(j|i) (r(i) + beta J(j) - J(i))^2
    """

    J = _as_array(J, model.num_states, 'Mean vector')
    (P, r) = induced_chain(model, policy)

    return ValueVector(_h_vector(P, r, J, model.beta), ValueRole.REWARD_H)


def reward_f(model, policy, J):
    """Compute the second moment reward function f.

    f(i) = r(i)^2 + 2 beta r(i) sum_j p(j|i) J(j)
    """

    J = _as_array(J, model.num_states, 'Mean vector')
    (P, r) = induced_chain(model, policy)

    return ValueVector(_f_vector(P, r, J, model.beta), ValueRole.REWARD_F)


def variance(model, policy):
    """Compute the variance of the total discounted reward.

    Solves sigma^2 = h + beta^2 P sigma^2.
    """

    (P, r) = induced_chain(model, policy)
    J = solve_discounted(DiscountedSystem(P, model.beta, r)).values
    h = _h_vector(P, r, J, model.beta)

    return solve_discounted(
        DiscountedSystem(P, model.beta ** 2, h), ValueRole.VARIANCE,
        scale=_variance_scale(J, model.beta))


def variance_via_f(model, policy):
    """Compute the variance as the beta^2-discounted total of f
    less the squared mean.
    """

    (P, r) = induced_chain(model, policy)
    J = solve_discounted(DiscountedSystem(P, model.beta, r)).values
    f = _f_vector(P, r, J, model.beta)

    second_moment = solve_discounted(
        DiscountedSystem(P, model.beta ** 2, f), ValueRole.POTENTIAL_G)

    return ValueVector(second_moment.values - J ** 2, ValueRole.VARIANCE,
                       scale=_variance_scale(J, model.beta))


def check_feasible(model, policy, lambda_, tolerance=FEASIBILITY_TOLERANCE):
    """Check that a policy's mean performance equals the target.

    Returns the mean performance.  Raises InfeasiblePolicyError if
    any component differs from the target by more than the tolerance.
    """

    target = _as_array(lambda_, model.num_states, 'Target vector')
    J = mean_performance(model, policy)
    deviation = np.abs(J.values - target).max()

    if deviation > tolerance:
        raise InfeasiblePolicyError(policy, deviation, tolerance)

    return J


def potential_g(model, policy, lambda_, tolerance=FEASIBILITY_TOLERANCE):
    """Compute the second moment potential g = sigma^2 + lambda^2.

    The policy must have mean performance lambda (within the tolerance):
    otherwise InfeasiblePolicyError is raised.
    """

    check_feasible(model, policy, lambda_, tolerance)

    target = _as_array(lambda_, model.num_states, 'Target vector')
    sigma2 = variance(model, policy)

    return ValueVector(sigma2.values + target ** 2, ValueRole.POTENTIAL_G)


def evaluate_randomized(model, policy):
    """Evaluate the mean and variance under a randomized policy.

    Returns a tuple (J, sigma^2) of ValueVector objects.

    The variance reward mixes the terms which are linear in the
    action's reward, but the squared mean terms use the mixed chain:

    h(i) = sum_a theta(i,a) {r(i,a)^2 + 2 beta r(i,a) sum_j p(j|i,a) J(j)}
           + beta^2 sum_j p_theta(j|i) J(j)^2 - J(i)^2

    evaluated, as for a deterministic policy, centred about J(i):

    h(i) = sum_a theta(i,a) sum_j p(j|i,a) (r(i,a) + beta J(j) - J(i))^2
    """

    weights = policy_weights(model, policy)
    (P, r) = induced_chain_randomized(model, policy)
    beta = model.beta

    J = solve_discounted(DiscountedSystem(P, beta, r)).values

    h = np.empty(model.num_states)
    for (i, theta) in enumerate(weights):
        centred = (np.asarray(model.rewards[i])[:, np.newaxis]
                   + beta * J[np.newaxis, :] - J[i])
        h[i] = theta.dot((model.transitions[i] * centred ** 2).sum(axis=1))

    sigma2 = solve_discounted(
        DiscountedSystem(P, beta ** 2, h), ValueRole.VARIANCE,
        scale=_variance_scale(J, beta))

    return (ValueVector(J, ValueRole.MEAN), sigma2)


def mean_difference(model, policy, other):
    """Compute J(other) - J(policy) by the mean difference formula.

    J' - J = (I - beta P')^-1 [beta (P' - P) J + r' - r]
    """

    (P, r) = induced_chain(model, policy)
    (P_other, r_other) = induced_chain(model, other)
    J = solve_discounted(DiscountedSystem(P, model.beta, r)).values

    rhs = model.beta * (P_other - P).dot(J) + r_other - r

    return solve_discounted(
        DiscountedSystem(P_other, model.beta, rhs), ValueRole.DIFFERENCE)


def variance_difference(model, policy, other, lambda_,
                        tolerance=FEASIBILITY_TOLERANCE):
    """Compute sigma^2(other) - sigma^2(policy) for two policies which
    both have mean performance lambda.

    sigma^2' - sigma^2 = (I - beta^2 P')^-1 [beta^2 (P' - P) g + f' - f]

    where g is the second moment potential of the first policy and f, f'
    are the second moment rewards evaluated at lambda.
    """

    target = _as_array(lambda_, model.num_states, 'Target vector')
    check_feasible(model, other, target, tolerance)
    g = potential_g(model, policy, target, tolerance).values

    (P, r) = induced_chain(model, policy)
    (P_other, r_other) = induced_chain(model, other)
    beta = model.beta

    rhs = (beta ** 2 * (P_other - P).dot(g)
           + _f_vector(P_other, r_other, target, beta)
           - _f_vector(P, r, target, beta))

    return solve_discounted(
        DiscountedSystem(P_other, beta ** 2, rhs), ValueRole.DIFFERENCE)
