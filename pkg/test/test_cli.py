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

import json
import os
from unittest import TestCase

import numpy as np

import mv_mdp.config
from mv_mdp.cli import parse_policy, parse_vector, run_command
from mv_mdp.error import InvalidPolicyError, MVMDPError
from mv_mdp.model import DeterministicPolicy, RandomizedPolicy
from mv_mdp.report import render, to_json, to_table

from .instances import two_state_file


def close(values, expected, tolerance=5e-5):
    return bool(np.abs(np.asarray(values) - expected).max() <= tolerance)


class CommandTestCase(TestCase):
    def setUp(self):
        mv_mdp.config.config = None

        for var in ('MVMDP_DIR', 'MVMDP_CAP'):
            if var in os.environ:
                del os.environ[var]

    def run_ok(self, *args):
        (code, report) = run_command(
            list(args) + ['--model', two_state_file, '--quiet'])

        self.assertEqual(code, 0)
        self.assertIsNotNone(report)

        return report.result

    def test_solve(self):
        result = self.run_ok('solve', '--lambda', '2.5,4.5', '--method', 'pi')

        self.assertEqual(result['optimal_policy'], [1, 4])
        self.assertTrue(close(result['optimal_variance'], [.2353, .0588]))
        self.assertEqual(result['iterations'], 2)

        for method in ('vi', 'brute'):
            result = self.run_ok(
                'solve', '--lambda', '2.5,4.5', '--method', method)

            self.assertEqual(result['optimal_policy'], [1, 4])

    def test_solve_initial(self):
        result = self.run_ok(
            'solve', '--lambda', '2.5,4.5', '--initial', '2,1')

        self.assertEqual(result['trace'][0]['policy'], [2, 1])
        self.assertTrue(close(result['trace'][0]['values'], [6.5722, 20.5056]))
        self.assertEqual(result['optimal_policy'], [1, 4])

    def test_solve_lambda_optimal(self):
        result = self.run_ok('solve', '--lambda-optimal')

        self.assertEqual(result['optimal_policy'], [3, 4])
        self.assertTrue(close(result['optimal_variance'], [.1964, .0491]))

    def test_feasible(self):
        result = self.run_ok('feasible', '--lambda', '2.125,3.375')

        self.assertEqual(
            [x['actions'] for x in result['sets']], [[2, 3], [2]])
        self.assertIsNone(result['empty_state'])

        result = self.run_ok('feasible', '--lambda-from-policy', '1,1')
        self.assertEqual(
            [x['actions'] for x in result['sets']], [[1, 2], [1, 3, 4]])

        result = self.run_ok(
            'feasible', '--lambda', '2.5,4.5', '--tolerance', '1e-3')
        self.assertEqual(
            [x['actions'] for x in result['sets']], [[1, 2], [1, 3, 4]])

    def test_empty(self):
        for command in ('feasible', 'solve', 'check-randomized'):
            (code, report) = run_command([
                command, '--model', two_state_file, '--lambda', '1,1',
                '--quiet'])

            self.assertEqual(code, 1)
            self.assertEqual(report.result['empty_state'], 1)

        self.assertIn('state 1', report.result['error'])
        self.assertIn('state 1', to_table(report))

    def test_frontier(self):
        result = self.run_ok('frontier')

        self.assertEqual(result['efficient_set'], [[1, 2], [3, 4]])
        self.assertEqual(len(result['entries']), 12)
        self.assertEqual(len(result['mean_classes']), 6)

    def test_evaluate(self):
        result = self.run_ok('evaluate', '--policy', '1,4')

        self.assertTrue(close(result['mean'], [2.5, 4.5]))
        self.assertTrue(close(result['variance'], [.2353, .0588]))
        self.assertTrue(result['irreducible'])

        result = self.run_ok('evaluate', '--policy', '1:0.5+2:0.5,4')
        self.assertTrue(close(result['mean'], [2.5, 4.5], 1e-12))
        self.assertEqual(result['policy'], [[[1, 0.5], [2, 0.5]], [[4, 1.0]]])

    def test_simulate(self):
        result = self.run_ok(
            'simulate', '--policy', '1,4', '--start', '1', '--paths', '1000',
            '--seed', '5')

        self.assertEqual(result['start_states'], [1])
        self.assertEqual(result['num_paths'], 1000)
        self.assertEqual(result['seed'], 5)
        self.assertTrue(close(result['analytic_mean'], [2.5]))

        result = self.run_ok(
            'simulate', '--policy', '1,4', '--paths', '100', '--horizon', '5')

        self.assertEqual(result['start_states'], [1, 2])
        self.assertEqual(result['horizon'], 5)

    def test_check_randomized(self):
        result = self.run_ok(
            'check-randomized', '--lambda-from-policy', '1,1',
            '--samples', '20')

        self.assertEqual(result['num_samples'], 20)
        self.assertEqual(result['violations'], [])
        self.assertEqual(result['optimal_policy'], [1, 4])

    def test_validate(self):
        result = self.run_ok('validate')

        self.assertEqual(result['num_states'], 2)
        self.assertEqual(result['num_policies'], 12)
        self.assertEqual(result['violations'], [])
        self.assertEqual(result['warnings'], [])

    def test_input_errors(self):
        for args in (
                [],
                ['solve'],
                ['validate', '--model', two_state_file, '--bogus'],
                ['validate', '--model', 'no_such_model.json'],
                ['solve', '--model', two_state_file, '--lambda', '1,2,3'],
                ['solve', '--model', two_state_file, '--lambda', 'x,y'],
                ['solve', '--model', two_state_file, '--lambda', '2.5,4.5',
                 '--method', 'newton'],
                ['solve', '--model', two_state_file, '--lambda', '2.5,4.5',
                 '--initial', '1,2'],
                ['evaluate', '--model', two_state_file, '--policy', '1,9'],
                ['frontier', '--model', two_state_file, '--cap', '5'],
                ['frontier', '--model', two_state_file, '--output', 'xml'],
                ['check-randomized', '--model', two_state_file,
                 '--lambda', '2.5,4.5', '--samples', '0'],
                ):
            (code, report) = run_command(args + ['--quiet'])

            self.assertEqual(code, 2, args)
            self.assertIsNone(report)

    def test_cap_environment(self):
        os.environ['MVMDP_CAP'] = '5'

        (code, report) = run_command(
            ['frontier', '--model', two_state_file, '--quiet'])

        self.assertEqual(code, 2)

    def test_json(self):
        args = ['solve', '--model', two_state_file, '--lambda', '2.5,4.5',
                '--output', 'json', '--quiet']

        (code, first) = run_command(args)
        (code, second) = run_command(args)

        first = json.loads(render(first))
        second = json.loads(render(second))

        self.assertEqual(first['schema'], 1)
        self.assertEqual(first['command'], 'solve')
        self.assertEqual(first['parameters']['tolerance'], 1e-7)
        self.assertEqual(first['parameters']['target'], [2.5, 4.5])

        del first['timing']
        del second['timing']
        self.assertEqual(first, second)

    def test_table(self):
        for (args, text) in (
                (['validate'], 'Policies:   12'),
                (['evaluate', '--policy', '1,4'], 'sigma^2'),
                (['feasible', '--lambda', '2.125,3.375'],
                 'State 2 feasible actions: 2'),
                (['solve', '--lambda', '2.5,4.5'], 'Optimal policy:   (1,4)'),
                (['frontier'], 'Efficient set: (1,2) (3,4)'),
                (['simulate', '--policy', '1,4', '--paths', '10'], 'Horizon'),
                (['check-randomized', '--lambda', '2.5,4.5',
                  '--samples', '5'], 'Violations:          0'),
                ):
            (code, report) = run_command(
                args + ['--model', two_state_file, '--quiet'])

            self.assertIn(text, render(report))
            self.assertEqual(render(report), to_table(report))


class ParseTestCase(TestCase):
    def test_vector(self):
        self.assertEqual(parse_vector('2.5, 4.5', 2), [2.5, 4.5])
        self.assertEqual(parse_vector('19/32,1', 2), [0.59375, 1.0])

        with self.assertRaises(MVMDPError):
            parse_vector('1,2', 3)

        with self.assertRaises(MVMDPError):
            parse_vector('1,two', 2)

    def test_policy(self):
        self.assertEqual(parse_policy('1,4'), DeterministicPolicy((1, 4)))

        randomized = parse_policy('1:0.25+2:3/4,4')
        self.assertIsInstance(randomized, RandomizedPolicy)
        self.assertEqual(randomized.weights, (
            ((1, 0.25), (2, 0.75)), ((4, 1.0),)))

        for text in ('1,x', '1:a,2', '1:0.5:0.5,2'):
            with self.assertRaises(InvalidPolicyError):
                parse_policy(text)
