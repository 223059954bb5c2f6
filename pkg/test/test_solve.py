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

from unittest import TestCase

import numpy as np

from mv_mdp.constrain import enumerate_feasible_policies, feasible_sets
from mv_mdp.error import (
    ContractError, EmptyFeasibleSetError, EnumerationTooLargeError,
    InfeasiblePolicyError)
from mv_mdp.evaluate import mean_performance, variance
from mv_mdp.role import ValueRole
from mv_mdp.solve import (
    brute_force, check_randomized_dominance, improvement_scores,
    mean_policy_iteration, policy_iteration, sample_randomized_policy,
    value_iteration, variance_bellman_sweep)

from .instances import (
    get_two_state_model, policies, policy, published, published_tolerance,
    random_instances)


def close(values, expected, tolerance=published_tolerance):
    return bool(np.abs(np.asarray(values) - expected).max() <= tolerance)


class TwoStateSolveTestCase(TestCase):
    def setUp(self):
        self.model = get_two_state_model()
        self.sets = feasible_sets(
            self.model, mean_performance(self.model, policy(1)))

    def test_policy_iteration_trace(self):
        """Follow policy iteration from d_5."""

        result = policy_iteration(self.model, self.sets, initial=policy(5))

        self.assertEqual(result.method, 'policy-iteration')
        self.assertEqual(result.optimal_policy, policy(4))
        self.assertEqual(result.iterations, 2)
        self.assertEqual(len(result.trace), 2)
        self.assertEqual(result.optimal_variance.role, ValueRole.VARIANCE)
        self.assertTrue(close(result.optimal_variance.values, [.2353, .0588]))

        (first, second) = result.trace

        self.assertEqual(first.policy, policy(5))
        self.assertEqual(first.values.role, ValueRole.POTENTIAL_G)
        self.assertTrue(close(first.values.values, [6.5722, 20.5056]))
        self.assertEqual([x[0] for x in first.scores[0]], [1, 2])
        self.assertEqual([x[0] for x in first.scores[1]], [1, 3, 4])
        self.assertTrue(close(
            [x[1] for x in first.scores[0]], [6.5139, 6.5722]))
        self.assertTrue(close(
            [x[1] for x in first.scores[1]], [20.5056, 20.5139, 20.3306]))

        self.assertEqual(second.policy, policy(4))
        self.assertTrue(close(second.values.values, [6.4853, 20.3088]))
        self.assertTrue(close(
            [x[1] for x in second.scores[0]], [6.4853, 6.5368]))
        self.assertTrue(close(
            [x[1] for x in second.scores[1]], [20.4632, 20.4853, 20.3088]))

    def test_policy_iteration_default_start(self):
        result = policy_iteration(self.model, self.sets)

        self.assertEqual(result.trace[0].policy, policy(1))
        self.assertEqual(result.optimal_policy, policy(4))

    def test_policy_iteration_every_start(self):
        """Policy iteration reaches d_4 from every policy with mean
        (2.5, 4.5)."""

        starts = list(enumerate_feasible_policies(self.sets))
        self.assertEqual(
            starts, [policy(n) for n in (1, 3, 4, 5, 7, 8)])

        for initial in starts:
            result = policy_iteration(self.model, self.sets, initial=initial)

            self.assertEqual(result.optimal_policy, policy(4), str(initial))
            self.assertEqual(result.trace[0].policy, initial)

    def test_policy_iteration_rounded_target(self):
        sets = feasible_sets(self.model, [2.5, 4.5], tolerance=1e-3)

        result = policy_iteration(self.model, sets, initial=policy(5))
        self.assertEqual(result.optimal_policy, policy(4))
        self.assertEqual(result.iterations, 2)

    def test_policy_iteration_errors(self):
        with self.assertRaises(InfeasiblePolicyError):
            policy_iteration(self.model, self.sets, initial=policy(2))

        empty = feasible_sets(self.model, [1.0, 1.0])

        with self.assertRaises(EmptyFeasibleSetError):
            policy_iteration(self.model, empty)

        with self.assertRaises(EmptyFeasibleSetError):
            value_iteration(self.model, empty)

        with self.assertRaises(EmptyFeasibleSetError):
            brute_force(self.model, empty)

    def test_single_policy_class(self):
        sets = feasible_sets(self.model, [2.125, 3.375])

        self.assertEqual(
            policy_iteration(self.model, sets).optimal_policy, policy(10))
        self.assertEqual(
            brute_force(self.model, sets).optimal_policy, policy(10))

    def test_value_iteration(self):
        result = value_iteration(self.model, self.sets)

        self.assertEqual(result.method, 'value-iteration')
        self.assertEqual(result.optimal_policy, policy(4))
        self.assertTrue(close(result.optimal_variance.values, [.2353, .0588]))
        self.assertTrue(any('stopping rule' in x for x in result.notes))

        # The final values are close to the optimal variance.
        self.assertTrue(close(
            result.trace[-1].values, result.optimal_variance.values, 1e-9))

    def test_brute_force(self):
        result = brute_force(self.model, self.sets)

        self.assertEqual(result.method, 'brute-force')
        self.assertEqual(result.optimal_policy, policy(4))
        self.assertEqual(result.co_optimal, (policy(4),))
        self.assertEqual(result.pareto_set, (policy(4),))
        self.assertEqual(result.iterations, 6)
        self.assertEqual(
            [x.policy for x in result.trace],
            list(enumerate_feasible_policies(self.sets)))

        with self.assertRaises(EnumerationTooLargeError):
            brute_force(self.model, self.sets, cap=5)

    def test_co_optimal(self):
        """Policies d_1 and d_3 share their variance."""

        sets = feasible_sets(self.model, [2.5, 4.5])
        restricted = sets._replace(per_state=((1,), (1, 3)))

        result = brute_force(self.model, restricted)

        self.assertEqual(result.optimal_policy, policy(1))
        self.assertEqual(result.co_optimal, (policy(1), policy(3)))

        # Policy iteration keeps its incumbent on a tie.
        result = policy_iteration(self.model, restricted, initial=policy(3))
        self.assertEqual(result.optimal_policy, policy(3))
        self.assertEqual(result.iterations, 1)

    def test_randomized_dominance(self):
        result = policy_iteration(self.model, self.sets)

        check = check_randomized_dominance(
            self.model, self.sets, result, num_samples=200, seed=1)

        self.assertEqual(check.num_samples, 200)
        self.assertEqual(check.violations, ())
        self.assertLessEqual(check.max_mean_error, 1e-7)
        self.assertGreaterEqual(check.min_variance_margin, -1e-8)

        check = check_randomized_dominance(
            self.model, self.sets, result, num_samples=50, seed=2,
            point_mass=True)

        self.assertEqual(check.violations, ())

    def test_randomized_violation_reported(self):
        """Checking against a variance which is too large reports
        violations rather than raising."""

        result = policy_iteration(self.model, self.sets)
        result = result._replace(optimal_variance=variance(
            self.model, policy(7)))

        check = check_randomized_dominance(
            self.model, self.sets, result, num_samples=10, seed=0)

        self.assertTrue(check.violations)
        self.assertTrue(all(x.kind == 'variance' for x in check.violations))

    def test_randomized_no_samples(self):
        result = policy_iteration(self.model, self.sets)

        with self.assertRaises(ContractError):
            check_randomized_dominance(
                self.model, self.sets, result, num_samples=0)

    def test_sample_randomized_policy(self):
        rng = np.random.Generator(np.random.Philox(0))

        for n in range(20):
            randomized = sample_randomized_policy(self.sets, rng)

            for (state, labels) in enumerate(self.sets.per_state):
                self.assertEqual(randomized.support(state), labels)
                self.assertAlmostEqual(
                    sum(x[1] for x in randomized.weights[state]), 1.0)

            self.assertTrue(sample_randomized_policy(
                self.sets, rng, point_mass=True).is_deterministic())

    def test_mean_policy_iteration(self):
        optimum = mean_policy_iteration(self.model)

        self.assertEqual(optimum.policy, policy(12))
        self.assertTrue(close(optimum.mean.values, published[11][0]))

        best = np.max([mean_performance(self.model, d).values
                       for d in policies], axis=0)
        self.assertTrue(close(optimum.mean.values, best, 1e-12))

        # The mean-optimal class contains only d_12.
        sets = feasible_sets(self.model, optimum.mean)
        self.assertEqual(sets.per_state, ((3,), (4,)))


class RandomSolveTestCase(TestCase):
    def test_solvers_agree(self):
        """Compare the three solvers on random instances."""

        nontrivial = 0

        for (n, instance) in enumerate(random_instances(100, seed=2)):
            model = instance.model
            sets = feasible_sets(model, instance.target)

            if sets.size > 1:
                nontrivial += 1

            pi = policy_iteration(model, sets)
            vi = value_iteration(model, sets, epsilon=1e-10)
            brute = brute_force(model, sets)

            message = 'instance {0}'.format(n)

            self.assertIsNotNone(brute.optimal_policy, message)
            self.assertTrue(close(
                pi.optimal_variance.values,
                brute.optimal_variance.values, 1e-8), message)
            self.assertTrue(close(
                vi.optimal_variance.values,
                brute.optimal_variance.values, 1e-8), message)

            # Policy iteration visits each policy at most once.  Each
            # change of policy leaves no component of g larger and
            # makes some component strictly smaller.
            self.assertLessEqual(pi.iterations, sets.size, message)

            for (previous, record) in zip(pi.trace, pi.trace[1:]):
                self.assertNotEqual(record.policy, previous.policy, message)
                self.assertTrue(np.all(
                    record.values.values <= previous.values.values + 1e-9),
                    message)
                self.assertTrue(np.any(
                    record.values.values < previous.values.values - 1e-11),
                    message)

        self.assertGreater(nontrivial, 50)

    def test_any_start(self):
        """Policy iteration finds the optimum from every start."""

        for instance in random_instances(30, seed=3):
            model = instance.model
            sets = feasible_sets(model, instance.target)
            best = brute_force(model, sets).optimal_variance.values

            for initial in enumerate_feasible_policies(sets):
                result = policy_iteration(model, sets, initial=initial)

                self.assertTrue(close(
                    result.optimal_variance.values, best, 1e-8))

    def test_optimality_conditions(self):
        """The optimum is greedy with respect to its own potential and
        is a fixed point of the variance optimality operator."""

        for instance in random_instances(50, seed=4):
            model = instance.model
            sets = feasible_sets(model, instance.target)
            result = policy_iteration(model, sets)

            g = result.trace[-1].values
            scores = improvement_scores(model, sets, g)

            for (label, scored) in zip(result.optimal_policy.choice, scores):
                lowest = min(x[1] for x in scored)
                self.assertLessEqual(dict(scored)[label], lowest + 1e-9)

            (values, greedy) = variance_bellman_sweep(
                model, sets, result.optimal_variance)

            self.assertTrue(close(
                values, result.optimal_variance.values, 1e-9))

    def test_randomized_dominance(self):
        for (n, instance) in enumerate(random_instances(100, seed=6)):
            model = instance.model
            sets = feasible_sets(model, instance.target)
            result = policy_iteration(model, sets)

            check = check_randomized_dominance(
                model, sets, result, num_samples=50, seed=n)

            self.assertEqual(check.violations, (), 'instance {0}'.format(n))
