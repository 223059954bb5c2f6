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
Variance minimization over the policies with a given mean.

Within the constrained set every policy has the same mean lambda, so
the second moment g = sigma^2 + lambda^2 is the beta^2-discounted total
of the reward

    f(i,a) = r(i,a)^2 + 2 beta r(i,a) sum_j p(j|i,a) lambda(j)

which does not depend on the rest of the policy.  Minimizing the
variance is therefore an ordinary discounted MDP restricted to the
feasible actions, solved here by policy iteration, by value
iteration and by exhaustive enumeration.
"""

from __future__ import absolute_import, division, print_function

from collections import namedtuple
import logging

import numpy as np

from mv_mdp.config import get_enumeration_cap
from mv_mdp.constrain import enumerate_feasible_policies
from mv_mdp.error import (
    ContractError, ConvergenceError, EmptyFeasibleSetError,
    EnumerationTooLargeError, InfeasiblePolicyError)
from mv_mdp.evaluate import (
    FEASIBILITY_TOLERANCE, evaluate_randomized, mean_performance,
    potential_g, variance)
from mv_mdp.model import DeterministicPolicy, RandomizedPolicy
from mv_mdp.role import ValueRole, ValueVector

logger = logging.getLogger(__name__)

# Scores within this distance of the minimum are treated as tied.
TIE_TOLERANCE = 1e-10

VALUE_ITERATION_STOPPING_RULE = \
    'sup-norm change <= epsilon (1 - beta^2) / (2 beta^2)'

SolveResult = namedtuple(
    'SolveResult',
    'method optimal_policy optimal_variance target iterations trace '
    'co_optimal pareto_set notes')

# One step of a solver: the policy considered, the value vector
# computed for it and, for policy iteration, the improvement scores.
IterationRecord = namedtuple('IterationRecord', 'policy values scores')

RandomizedCheck = namedtuple(
    'RandomizedCheck',
    'num_samples seed violations max_mean_error min_variance_margin')

RandomizedViolation = namedtuple(
    'RandomizedViolation', 'sample kind state value')

MeanOptimum = namedtuple('MeanOptimum', 'policy mean iterations')


def _check_nonempty(sets):
    empty = sets.first_empty_state()
    if empty is not None:
        raise EmptyFeasibleSetError(empty)


def membership_tolerance(model, sets):
    """Largest mean deviation implied by the feasible set tolerance.

    If every chosen action has one-step residual at most t then the
    mean differs from the target by at most t / (1 - beta).
    """

    return max(FEASIBILITY_TOLERANCE, sets.tolerance / (1.0 - model.beta))


def _choose(scored, incumbent, tie_tolerance, maximize=False):
    """Pick an action from (label, score) pairs.

    The incumbent is kept if it attains the optimum within the
    tie tolerance, otherwise the smallest tied label is chosen.
    """

    sign = -1.0 if maximize else 1.0
    best = min(sign * score for (_, score) in scored)

    tied = [label for (label, score) in scored
            if sign * score <= best + tie_tolerance]

    if incumbent in tied:
        return incumbent

    return min(tied)


def improvement_scores(model, sets, g):
    """Compute the policy improvement objective.

    For each state i and feasible action a:

        beta^2 sum_j p(j|i,a) g(j) + r(i,a)^2
            + 2 beta r(i,a) sum_j p(j|i,a) lambda(j)

    Returns a tuple (per state) of (label, score) pairs.
    """

    if isinstance(g, ValueVector):
        g = g.values

    lam = sets.target.values
    beta = model.beta
    result = []

    for (i, labels) in enumerate(sets.per_state):
        scored = []
        for label in labels:
            a = model.action_index(i, label)
            p = model.transitions[i][a]
            r = model.rewards[i][a]
            scored.append((label, float(
                beta ** 2 * p.dot(g) + r ** 2 + 2 * beta * r * p.dot(lam))))

        result.append(tuple(scored))

    return tuple(result)


def policy_iteration(model, sets, initial=None, tie_tolerance=TIE_TOLERANCE):
    """Find the minimum variance policy with mean lambda by policy iteration.

    Starting from the initial policy (by default the lexicographically
    smallest feasible policy), alternately compute the second moment
    potential g of the current policy and choose at each state the
    feasible action minimizing the improvement score, keeping the
    current action where it is among the minimizers.  Stops when the
    policy no longer changes.

    Raises EmptyFeasibleSetError if there is no feasible policy and
    InfeasiblePolicyError if the initial policy is not feasible.
    """

    _check_nonempty(sets)

    tolerance = membership_tolerance(model, sets)
    target = sets.target

    if initial is None:
        policy = DeterministicPolicy(labels[0] for labels in sets.per_state)

    else:
        policy = DeterministicPolicy(initial.choice)
        if not sets.contains(policy):
            J = mean_performance(model, policy)
            raise InfeasiblePolicyError(
                policy, np.abs(J.values - target.values).max(),
                sets.tolerance)

    trace = []

    for iteration in range(sets.size + 1):
        g = potential_g(model, policy, target, tolerance)
        scores = improvement_scores(model, sets, g)

        improved = DeterministicPolicy(
            _choose(scored, label, tie_tolerance)
            for (scored, label) in zip(scores, policy.choice))

        trace.append(IterationRecord(policy, g, scores))

        logger.debug('Policy iteration %i: %s -> %s, g = %s',
                     iteration + 1, policy, improved, g.values)

        if improved == policy:
            break

        policy = improved

    else:
        raise ConvergenceError(
            'Policy iteration did not converge within {0} '
            'iterations'.format(len(trace)))

    logger.info('Policy iteration converged to %s after %i iterations',
                policy, len(trace))

    return SolveResult(
        method='policy-iteration',
        optimal_policy=policy,
        optimal_variance=variance(model, policy),
        target=target,
        iterations=len(trace),
        trace=tuple(trace),
        co_optimal=(policy,),
        pareto_set=(),
        notes=())


def variance_bellman_sweep(model, sets, values, tie_tolerance=TIE_TOLERANCE):
    """Apply the variance optimality operator once.

    For each state i, computes

        min over feasible a of {h(i,a) + beta^2 sum_j p(j|i,a) V(j)}

    where h(i,a) = r(i,a)^2 + 2 beta r(i,a) sum_j p(j|i,a) lambda(j)
                   + beta^2 sum_j p(j|i,a) lambda(j)^2 - lambda(i)^2.

    Returns a tuple of the new values (numpy array) and the
    minimizing policy (smallest label on ties).
    """

    if isinstance(values, ValueVector):
        values = values.values

    values = np.asarray(values, dtype=float)
    if values.shape != (model.num_states,):
        raise ContractError('Value vector has the wrong length')

    lam = sets.target.values
    beta = model.beta
    result = np.empty(model.num_states)
    choice = []

    for (i, labels) in enumerate(sets.per_state):
        scored = []
        for label in labels:
            a = model.action_index(i, label)
            p = model.transitions[i][a]
            r = model.rewards[i][a]
            h = (r ** 2 + 2 * beta * r * p.dot(lam)
                 + beta ** 2 * p.dot(lam ** 2) - lam[i] ** 2)
            scored.append((label, float(h + beta ** 2 * p.dot(values))))

        label = _choose(scored, None, tie_tolerance)
        choice.append(label)
        result[i] = min(score for (_, score) in scored)

    return (result, DeterministicPolicy(choice))


def value_iteration(model, sets, epsilon=1e-10, initial_values=None,
                    tie_tolerance=TIE_TOLERANCE, max_iterations=1000000):
    """Find the minimum variance policy with mean lambda by value iteration.

    Iterates the variance optimality operator from the initial values
    (zero by default) until the change in maximum norm is at most
    epsilon (1 - beta^2) / (2 beta^2), so that the greedy policy is
    epsilon-optimal.  The greedy policy's variance is then
    re-evaluated exactly.
    """

    _check_nonempty(sets)

    if not epsilon > 0.0:
        raise ContractError('Value iteration epsilon must be positive')

    gamma = model.beta ** 2
    threshold = epsilon * (1.0 - gamma) / (2.0 * gamma)

    if initial_values is None:
        values = np.zeros(model.num_states)
    elif isinstance(initial_values, ValueVector):
        values = initial_values.values
    else:
        values = np.asarray(initial_values, dtype=float)

    trace = []

    while True:
        (updated, greedy) = variance_bellman_sweep(
            model, sets, values, tie_tolerance)
        change = np.abs(updated - values).max()
        values = updated

        trace.append(IterationRecord(greedy, values, None))

        logger.debug('Value iteration sweep %i: change %g',
                     len(trace), change)

        if change <= threshold:
            break

        if len(trace) >= max_iterations:
            raise ConvergenceError(
                'Value iteration did not converge within {0} '
                'sweeps'.format(max_iterations))

    (_, policy) = variance_bellman_sweep(model, sets, values, tie_tolerance)

    logger.info('Value iteration stopped after %i sweeps at policy %s',
                len(trace), policy)

    return SolveResult(
        method='value-iteration',
        optimal_policy=policy,
        optimal_variance=variance(model, policy),
        target=sets.target,
        iterations=len(trace),
        trace=tuple(trace),
        co_optimal=(policy,),
        pareto_set=(),
        notes=('stopping rule: ' + VALUE_ITERATION_STOPPING_RULE,))


def _undominated(records, tolerance):
    """Select the records whose variance no other record dominates."""

    result = []

    for (k, (_, sigma2)) in enumerate(records):
        dominated = False

        for (m, (_, other)) in enumerate(records):
            if m == k:
                continue

            if (np.all(other <= sigma2 + tolerance) and
                    np.any(other < sigma2 - tolerance)):
                dominated = True
                break

        if not dominated:
            result.append(records[k][0])

    return tuple(result)


def brute_force(model, sets, cap=None, tie_tolerance=TIE_TOLERANCE):
    """Evaluate every policy in the constrained set.

    Returns the first (lexicographic) policy whose variance is entrywise
    no larger than every other's, together with all policies sharing
    that variance.  If no single policy is minimal at every state, the
    optimal policy is None and the result lists the undominated
    policies instead.

    Raises EnumerationTooLargeError if the set has more policies
    than the cap.
    """

    _check_nonempty(sets)

    if cap is None:
        cap = get_enumeration_cap()

    count = sets.size
    if count > cap:
        raise EnumerationTooLargeError(count, cap)

    records = []
    for policy in enumerate_feasible_policies(sets):
        records.append((policy, variance(model, policy).values))

    lowest = np.min([sigma2 for (_, sigma2) in records], axis=0)

    optimal = None
    for (policy, sigma2) in records:
        if np.all(sigma2 <= lowest + tie_tolerance):
            optimal = (policy, sigma2)
            break

    pareto_set = _undominated(records, tie_tolerance)
    trace = tuple(
        IterationRecord(policy, ValueVector(sigma2, ValueRole.VARIANCE),
                        None)
        for (policy, sigma2) in records)

    if optimal is None:
        logger.info('No policy of %i minimizes the variance at every state',
                    count)

        return SolveResult(
            method='brute-force',
            optimal_policy=None,
            optimal_variance=None,
            target=sets.target,
            iterations=count,
            trace=trace,
            co_optimal=(),
            pareto_set=pareto_set,
            notes=('no policy minimizes the variance at every state',))

    co_optimal = tuple(
        policy for (policy, sigma2) in records
        if np.all(np.abs(sigma2 - optimal[1]) <= tie_tolerance))

    return SolveResult(
        method='brute-force',
        optimal_policy=optimal[0],
        optimal_variance=ValueVector(optimal[1], ValueRole.VARIANCE),
        target=sets.target,
        iterations=count,
        trace=trace,
        co_optimal=co_optimal,
        pareto_set=pareto_set,
        notes=())


def sample_randomized_policy(sets, rng, point_mass=False):
    """Draw a randomized policy over the feasible sets.

    Each state's weights are uniform on the simplex (Dirichlet with
    unit parameters), or a randomly chosen vertex if point_mass is set.
    """

    weights = []

    for labels in sets.per_state:
        n = len(labels)

        if point_mass:
            theta = np.zeros(n)
            theta[rng.integers(n)] = 1.0
        else:
            theta = rng.dirichlet(np.ones(n))

        weights.append(tuple(zip(labels, theta)))

    return RandomizedPolicy(weights)


def check_randomized_dominance(model, sets, result, num_samples=200, seed=0,
                               point_mass=False, mean_tolerance=None,
                               variance_slack=1e-8):
    """Check that randomizing over feasible actions does not help.

    Samples randomized policies over the feasible sets and checks that
    each has mean lambda and a variance no smaller than the optimal
    variance of the given solver result.  Violations are returned as
    data in a RandomizedCheck.  At least one sample is required.
    """

    if num_samples < 1:
        raise ContractError('At least 1 sample is needed')

    _check_nonempty(sets)

    if mean_tolerance is None:
        mean_tolerance = membership_tolerance(model, sets)

    if result.optimal_variance is not None:
        bound = result.optimal_variance.values
    else:
        # Entrywise minimum over the undominated policies.
        bound = np.min([variance(model, policy).values
                        for policy in result.pareto_set], axis=0)

    lam = sets.target.values
    rng = np.random.Generator(np.random.Philox(seed))

    violations = []
    max_mean_error = 0.0
    min_margin = np.inf

    for sample in range(num_samples):
        policy = sample_randomized_policy(sets, rng, point_mass)
        (J, sigma2) = evaluate_randomized(model, policy)

        errors = np.abs(J.values - lam)
        margins = sigma2.values - bound
        max_mean_error = max(max_mean_error, errors.max())
        min_margin = min(min_margin, margins.min())

        for i in np.flatnonzero(errors > mean_tolerance):
            violations.append(RandomizedViolation(
                sample, 'mean', int(i), float(errors[i])))

        for i in np.flatnonzero(margins < - variance_slack):
            violations.append(RandomizedViolation(
                sample, 'variance', int(i), float(margins[i])))

    if violations:
        logger.warning('%i randomized dominance violations in %i samples',
                       len(violations), num_samples)

    return RandomizedCheck(
        num_samples, seed, tuple(violations),
        float(max_mean_error), float(min_margin))


def mean_policy_iteration(model, initial=None, tie_tolerance=TIE_TOLERANCE):
    """Find a policy maximizing the mean discounted performance.

    Classical policy iteration: at each state choose the action
    maximizing r(i,a) + beta sum_j p(j|i,a) J(j), keeping the current
    action where it is among the maximizers.

    Returns a MeanOptimum with the policy, its mean performance
    and the number of iterations.
    """

    if initial is None:
        policy = DeterministicPolicy(
            model.sorted_actions(i)[0] for i in range(model.num_states))
    else:
        policy = DeterministicPolicy(initial.choice)

    for iteration in range(model.num_policies + 1):
        J = mean_performance(model, policy)

        choice = []
        for i in range(model.num_states):
            scored = [
                (label, float(model.rewards[i][a] +
                              model.beta * model.transitions[i][a].dot(
                                  J.values)))
                for (a, label) in enumerate(model.actions[i])]

            choice.append(_choose(
                scored, policy.choice[i], tie_tolerance, maximize=True))

        improved = DeterministicPolicy(choice)

        if improved == policy:
            logger.debug('Mean policy iteration converged to %s', policy)
            return MeanOptimum(policy, J, iteration + 1)

        policy = improved

    raise ConvergenceError('Mean policy iteration did not converge')
