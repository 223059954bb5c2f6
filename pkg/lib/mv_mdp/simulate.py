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
Monte Carlo estimation of the mean and variance of the discounted
reward, for cross-checking the closed-form evaluation.

Random numbers come from numpy's counter-based Philox generator.  Paths
are simulated in blocks and each block has its own stream, keyed by
the seed, the start state and the block number, so the results do not
depend on how the blocks are scheduled.
"""

from __future__ import absolute_import, division, print_function

from collections import namedtuple
import logging
import math

import numpy as np

from mv_mdp.error import ContractError
from mv_mdp.evaluate import mean_performance, new_reward_h
from mv_mdp.model import (
    RandomizedPolicy, induced_chain, policy_indices, policy_weights)

logger = logging.getLogger(__name__)

GENERATOR = 'numpy.random.Philox (4x64-10) keyed by ' \
            'SeedSequence(seed, spawn_key=(start state, block))'

TRUNCATION_TOLERANCE = 1e-6
BLOCK_SIZE = 65536

SimulationEstimate = namedtuple(
    'SimulationEstimate',
    'start_states mean_estimate variance_estimate '
    'std_error_mean std_error_variance '
    'num_paths horizon truncation_bound seed generator')

HCheckReport = namedtuple(
    'HCheckReport',
    'estimates std_errors analytic z_scores num_samples seed generator')


def _generator(seed, *key):
    return np.random.Generator(np.random.Philox(
        np.random.SeedSequence(seed, spawn_key=key)))


def truncation_bound(r_max, beta, horizon):
    """Bound on the discounted reward beyond the horizon."""

    return r_max * beta ** (horizon + 1) / (1.0 - beta)


def default_horizon(r_max, beta, tolerance=TRUNCATION_TOLERANCE):
    """Find the smallest horizon (at least 1) whose truncation bound
    does not exceed the tolerance."""

    if r_max <= 0.0:
        return 1

    horizon = max(1, int(math.ceil(
        math.log(tolerance * (1.0 - beta) / r_max) / math.log(beta))) - 1)

    while truncation_bound(r_max, beta, horizon) > tolerance:
        horizon += 1

    while (horizon > 1 and
            truncation_bound(r_max, beta, horizon - 1) <= tolerance):
        horizon -= 1

    return horizon


def _cumulative(p):
    """Cumulative probabilities along the last axis.

    Entries from the last positive probability onward are set to
    infinity so that round-off in the sum can never select an index
    of zero probability.
    """

    p = np.asarray(p, dtype=float)
    result = np.cumsum(p, axis=-1)

    n = p.shape[-1]
    last = n - 1 - np.argmax(p[..., ::-1] > 0.0, axis=-1)
    result[np.arange(n) >= last[..., np.newaxis]] = np.inf

    return result


def _sample_index(rng, cumulative):
    """Sample one index per row of a cumulative probability table."""

    u = rng.random(cumulative.shape[0])

    return (u[:, np.newaxis] >= cumulative).sum(axis=1)


def _policy_tables(model, policy):
    """Prepare padded per-state action tables for simulation.

    Returns (policy table, rewards, cumulative transitions, r_max)
    where the policy table is the vector of action indices for a
    deterministic policy, otherwise the state by action table of
    cumulative action probabilities.
    """

    S = model.num_states
    width = max(len(x) for x in model.actions)

    rewards = np.zeros((S, width))
    cumulative = np.ones((S, width, S))

    for i in range(S):
        n = len(model.actions[i])
        rewards[i, :n] = model.rewards[i]
        cumulative[i, :n] = _cumulative(model.transitions[i])

    if isinstance(policy, RandomizedPolicy):
        theta = np.zeros((S, width))
        for (i, weights) in enumerate(policy_weights(model, policy)):
            theta[i, :len(weights)] = weights

        used = theta > 0.0
        r_max = float(np.abs(rewards[used]).max())

        return (_cumulative(theta), rewards, cumulative, r_max)

    indices = policy_indices(model, policy)
    r_max = float(np.abs(rewards[np.arange(S), indices]).max())

    return (indices, rewards, cumulative, r_max)


def _simulate_block(rng, start, n, horizon, beta, tables):
    (policy, rewards, cumulative, _) = tables
    deterministic = policy.ndim == 1

    states = np.full(n, start, dtype=int)
    totals = np.zeros(n)
    discount = 1.0

    for t in range(horizon + 1):
        if deterministic:
            actions = policy[states]
        else:
            actions = _sample_index(rng, policy[states])

        totals += discount * rewards[states, actions]

        if t < horizon:
            states = _sample_index(rng, cumulative[states, actions])

        discount *= beta

    return totals


def _moments(samples):
    """Sample mean, unbiased variance and their standard errors.

    Values are shifted by the first sample before summing so that
    identical samples give exactly zero variance.
    """

    n = samples.shape[0]
    shifted = samples - samples[0]
    shift_mean = shifted.mean()
    centred = shifted - shift_mean

    mean = samples[0] + shift_mean
    var = (centred ** 2).sum() / (n - 1)
    fourth = (centred ** 4).mean()

    std_error_mean = math.sqrt(var / n)
    std_error_var = math.sqrt(
        max(fourth - var ** 2 * (n - 3) / (n - 1), 0.0) / n)

    return (mean, var, std_error_mean, std_error_var)


def simulate_policy(model, policy, start_state=None, num_paths=100000,
                    horizon=None, seed=0,
                    truncation_tolerance=TRUNCATION_TOLERANCE,
                    block_size=BLOCK_SIZE):
    """Estimate the mean and variance of the discounted reward.

    Simulates num_paths paths of horizon + 1 steps from the start
    state (or from every state if it is None) under a deterministic or
    randomized policy.  A randomized policy samples its action at
    every visit.

    By default the horizon is the smallest for which the truncation
    bound r_max beta^(horizon + 1) / (1 - beta) does not exceed the
    truncation tolerance.

    Returns a SimulationEstimate whose arrays are aligned with its
    start_states field.
    """

    if num_paths < 2:
        raise ContractError('At least 2 paths are needed')

    if start_state is None:
        start_states = tuple(range(model.num_states))
    elif 0 <= start_state < model.num_states:
        start_states = (int(start_state),)
    else:
        raise ContractError('Invalid start state {0}'.format(start_state))

    tables = _policy_tables(model, policy)
    r_max = tables[3]
    beta = model.beta

    if horizon is None:
        horizon = default_horizon(r_max, beta, truncation_tolerance)
    elif horizon < 1:
        raise ContractError('Horizon must be at least 1')

    estimates = []

    for start in start_states:
        blocks = []
        for (block, offset) in enumerate(range(0, num_paths, block_size)):
            n = min(block_size, num_paths - offset)
            rng = _generator(seed, start, block)
            blocks.append(_simulate_block(rng, start, n, horizon, beta, tables))

        estimates.append(_moments(np.concatenate(blocks)))

        logger.debug('Simulated %i paths from state %i', num_paths, start + 1)

    (mean, var, se_mean, se_var) = (
        np.array(x) for x in zip(*estimates))

    return SimulationEstimate(
        start_states=start_states,
        mean_estimate=mean,
        variance_estimate=var,
        std_error_mean=se_mean,
        std_error_variance=se_var,
        num_paths=num_paths,
        horizon=horizon,
        truncation_bound=truncation_bound(r_max, beta, horizon),
        seed=seed,
        generator=GENERATOR)


def sample_path_h_check(model, policy, num_samples=1000000, seed=0):
    """Check the variance reward h by one-step sampling.

    For each state i, samples the next state j and averages
    (r(i) + beta J(j))^2 - J(i)^2, whose expectation is h(i).
    Returns an HCheckReport with the z-score of each state's estimate.
    """

    if num_samples < 2:
        raise ContractError('At least 2 samples are needed')

    J = mean_performance(model, policy).values
    h = new_reward_h(model, policy, J).values
    (P, r) = induced_chain(model, policy)
    cumulative = _cumulative(P)

    estimates = np.empty(model.num_states)
    std_errors = np.empty(model.num_states)
    z_scores = np.empty(model.num_states)

    for i in range(model.num_states):
        rng = _generator(seed, i)
        rows = np.repeat(cumulative[i][np.newaxis, :], num_samples, axis=0)
        following = _sample_index(rng, rows)

        samples = (r[i] + model.beta * J[following]) ** 2 - J[i] ** 2
        (estimate, _, std_error, _) = _moments(samples)

        estimates[i] = estimate
        std_errors[i] = std_error

        if std_error > 0.0:
            z_scores[i] = (estimate - h[i]) / std_error
        elif abs(estimate - h[i]) <= 1e-12 * max(1.0, abs(h[i])):
            z_scores[i] = 0.0
        else:
            z_scores[i] = np.inf

    return HCheckReport(
        estimates, std_errors, h, z_scores, num_samples, seed, GENERATOR)
