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
Run reports: conversion of solver results to plain data, and
rendering as JSON or as a text table.

States are numbered from 1 in reports.
"""

from __future__ import absolute_import, division, print_function

from collections import namedtuple
import json

import numpy as np

from mv_mdp.role import ValueVector

SCHEMA_VERSION = 1

RunReport = namedtuple('RunReport', 'command parameters result timing')


def _vector(vector):
    if vector is None:
        return None

    if isinstance(vector, ValueVector):
        vector = vector.values

    return [float(x) for x in np.asarray(vector)]


def _policy(policy):
    if policy is None:
        return None

    if hasattr(policy, 'choice'):
        return list(policy.choice)

    return [[[label, weight] for (label, weight) in state_weights]
            for state_weights in policy.weights]


def build_report(command, parameters, result, elapsed=None):
    """Construct a RunReport.

    The result should already be plain data, as returned by one
    of the *_payload functions of this module.
    """

    return RunReport(command, dict(parameters), result,
                     {'elapsed': elapsed})


def validation_payload(model, validation):
    return {
        'num_states': model.num_states,
        'beta': model.beta,
        'actions': [list(x) for x in model.actions],
        'num_policies': model.num_policies,
        'violations': list(validation.violations),
        'warnings': list(validation.warnings),
    }


def evaluation_payload(policy, mean, variance, h=None, irreducible=None):
    return {
        'policy': _policy(policy),
        'mean': _vector(mean),
        'variance': _vector(variance),
        'h': _vector(h),
        'irreducible': irreducible,
    }


def feasible_payload(sets):
    empty = sets.first_empty_state()

    return {
        'target': _vector(sets.target),
        'tolerance': sets.tolerance,
        'sets': [
            {'state': i + 1, 'actions': list(labels)}
            for (i, labels) in enumerate(sets.per_state)],
        'residuals': [
            [[label, residual] for (label, residual) in state_residuals]
            for state_residuals in sets.residuals],
        'size': sets.size,
        'empty_state': None if empty is None else empty + 1,
    }


def _record(record):
    return {
        'policy': _policy(record.policy),
        'values': _vector(record.values),
        'scores': None if record.scores is None else [
            [[label, score] for (label, score) in state_scores]
            for state_scores in record.scores],
    }


def solve_payload(result, sets=None):
    payload = {
        'method': result.method,
        'target': _vector(result.target),
        'optimal_policy': _policy(result.optimal_policy),
        'optimal_variance': _vector(result.optimal_variance),
        'iterations': result.iterations,
        'co_optimal': [_policy(x) for x in result.co_optimal],
        'pareto_set': [_policy(x) for x in result.pareto_set],
        'trace': [_record(x) for x in result.trace],
        'notes': list(result.notes),
    }

    if sets is not None:
        payload['feasible'] = feasible_payload(sets)

    return payload


def error_payload(error, sets=None):
    payload = {'error': str(error)}

    state = getattr(error, 'state', None)
    if state is not None:
        payload['empty_state'] = state + 1

    if sets is not None:
        payload['feasible'] = feasible_payload(sets)

    return payload


def frontier_payload(frontier):
    efficient = set(id(x) for x in frontier.efficient_set)

    return {
        'entries': [
            {
                'policy': _policy(entry.policy),
                'mean': _vector(entry.mean),
                'variance': _vector(entry.variance),
                'efficient': id(entry) in efficient,
            }
            for entry in frontier.entries],
        'mean_classes': [
            {
                'mean': _vector(cls.mean),
                'members': [_policy(x.policy) for x in cls.members],
            }
            for cls in frontier.mean_classes],
        'efficient_set': [_policy(x.policy) for x in frontier.efficient_set],
    }


def simulation_payload(estimate, policy, mean=None, variance=None):
    return {
        'policy': _policy(policy),
        'start_states': [i + 1 for i in estimate.start_states],
        'mean_estimate': _vector(estimate.mean_estimate),
        'variance_estimate': _vector(estimate.variance_estimate),
        'std_error_mean': _vector(estimate.std_error_mean),
        'std_error_variance': _vector(estimate.std_error_variance),
        'analytic_mean': None if mean is None else [
            float(mean.values[i]) for i in estimate.start_states],
        'analytic_variance': None if variance is None else [
            float(variance.values[i]) for i in estimate.start_states],
        'num_paths': estimate.num_paths,
        'horizon': estimate.horizon,
        'truncation_bound': estimate.truncation_bound,
        'seed': estimate.seed,
        'generator': estimate.generator,
    }


def randomized_payload(check, result):
    return {
        'optimal_policy': _policy(result.optimal_policy),
        'optimal_variance': _vector(result.optimal_variance),
        'num_samples': check.num_samples,
        'seed': check.seed,
        'max_mean_error': check.max_mean_error,
        'min_variance_margin': check.min_variance_margin,
        'violations': [
            {'sample': x.sample, 'kind': x.kind, 'state': x.state + 1,
             'value': x.value}
            for x in check.violations],
    }


def to_json(report):
    """Render a report as JSON.

    Keys are sorted so that identical runs give identical output
    apart from the timing.
    """

    return json.dumps({
        'schema': SCHEMA_VERSION,
        'command': report.command,
        'parameters': report.parameters,
        'result': report.result,
        'timing': report.timing,
    }, indent=2, sort_keys=True)


def _format_policy(policy):
    if policy is None:
        return 'none'

    if policy and isinstance(policy[0], list):
        return '({0})'.format(','.join(
            '+'.join('{0}:{1:.4g}'.format(*x) for x in state)
            for state in policy))

    return '({0})'.format(','.join(str(x) for x in policy))


def _format_vector(vector):
    if vector is None:
        return 'none'

    return '({0})'.format(', '.join('{0:.4f}'.format(x) for x in vector))


def _table_validate(result):
    lines = [
        'States:     {0}'.format(result['num_states']),
        'Discount:   {0}'.format(result['beta']),
        'Policies:   {0}'.format(result['num_policies']),
    ]

    for (i, labels) in enumerate(result['actions'], 1):
        lines.append('State {0} actions: {1}'.format(
            i, ', '.join(str(x) for x in labels)))

    for warning in result['warnings']:
        lines.append('Warning: {0}'.format(warning))

    return lines


def _table_evaluate(result):
    lines = [
        'Policy: {0}'.format(_format_policy(result['policy'])),
        '{0:>5} {1:>14} {2:>14}'.format('State', 'J', 'sigma^2'),
    ]

    for (i, (mean, var)) in enumerate(
            zip(result['mean'], result['variance']), 1):
        lines.append('{0:>5} {1:>14.6f} {2:>14.6f}'.format(i, mean, var))

    if result['irreducible'] is False:
        lines.append('Warning: the induced chain is not irreducible')

    return lines


def _table_feasible(result):
    lines = [
        'Target:    {0}'.format(_format_vector(result['target'])),
        'Tolerance: {0:g}'.format(result['tolerance']),
    ]

    for entry in result['sets']:
        lines.append('State {0} feasible actions: {1}'.format(
            entry['state'],
            ', '.join(str(x) for x in entry['actions']) or '(none)'))

    lines.append('Policies:  {0}'.format(result['size']))

    return lines


def _table_solve(result):
    lines = []

    if 'feasible' in result:
        lines.extend(_table_feasible(result['feasible']))

    lines.extend([
        'Method:           {0}'.format(result['method']),
        'Iterations:       {0}'.format(result['iterations']),
        'Optimal policy:   {0}'.format(
            _format_policy(result['optimal_policy'])),
        'Optimal variance: {0}'.format(
            _format_vector(result['optimal_variance'])),
    ])

    if len(result['co_optimal']) > 1:
        lines.append('Co-optimal:       {0}'.format(' '.join(
            _format_policy(x) for x in result['co_optimal'])))

    if result['optimal_policy'] is None:
        lines.append('Undominated:      {0}'.format(' '.join(
            _format_policy(x) for x in result['pareto_set'])))

    if result['method'] == 'policy-iteration':
        for (n, record) in enumerate(result['trace'], 1):
            lines.append('Iteration {0}: policy {1} g = {2}'.format(
                n, _format_policy(record['policy']),
                _format_vector(record['values'])))

            for (i, scores) in enumerate(record['scores'], 1):
                lines.append('    state {0}: {1}'.format(i, ', '.join(
                    '{0} -> {1:.4f}'.format(*x) for x in scores)))

    for note in result['notes']:
        lines.append('Note: {0}'.format(note))

    return lines


def _table_frontier(result):
    lines = ['{0:<12} {1:<24} {2:<24} {3}'.format(
        'Policy', 'J', 'sigma^2', 'Efficient')]

    for entry in result['entries']:
        lines.append('{0:<12} {1:<24} {2:<24} {3}'.format(
            _format_policy(entry['policy']),
            _format_vector(entry['mean']),
            _format_vector(entry['variance']),
            'yes' if entry['efficient'] else ''))

    for cls in result['mean_classes']:
        lines.append('Mean class {0}: {1}'.format(
            _format_vector(cls['mean']),
            ' '.join(_format_policy(x) for x in cls['members'])))

    lines.append('Efficient set: {0}'.format(' '.join(
        _format_policy(x) for x in result['efficient_set'])))

    return lines


def _table_simulate(result):
    lines = [
        'Policy:  {0}'.format(_format_policy(result['policy'])),
        'Paths:   {0}'.format(result['num_paths']),
        'Horizon: {0} (truncation bound {1:.3g})'.format(
            result['horizon'], result['truncation_bound']),
        'Seed:    {0}'.format(result['seed']),
        '{0:>5} {1:>12} {2:>10} {3:>12} {4:>12} {5:>10} {6:>12}'.format(
            'State', 'Mean', 'SE', 'Analytic', 'Variance', 'SE',
            'Analytic'),
    ]

    analytic_mean = result['analytic_mean'] or (
        [float('nan')] * len(result['start_states']))
    analytic_var = result['analytic_variance'] or (
        [float('nan')] * len(result['start_states']))

    for row in zip(result['start_states'],
                   result['mean_estimate'], result['std_error_mean'],
                   analytic_mean,
                   result['variance_estimate'], result['std_error_variance'],
                   analytic_var):
        lines.append(
            '{0:>5} {1:>12.6f} {2:>10.2e} {3:>12.6f} '
            '{4:>12.6f} {5:>10.2e} {6:>12.6f}'.format(*row))

    return lines


def _table_randomized(result):
    lines = [
        'Optimal policy:      {0}'.format(
            _format_policy(result['optimal_policy'])),
        'Optimal variance:    {0}'.format(
            _format_vector(result['optimal_variance'])),
        'Samples:             {0} (seed {1})'.format(
            result['num_samples'], result['seed']),
        'Max mean error:      {0:.3g}'.format(result['max_mean_error']),
        'Min variance margin: {0:.3g}'.format(
            result['min_variance_margin']),
        'Violations:          {0}'.format(len(result['violations'])),
    ]

    for violation in result['violations']:
        lines.append('    sample {sample} state {state}: {kind} '
                     '{value:.3g}'.format(**violation))

    return lines


_table_renderers = {
    'validate': _table_validate,
    'evaluate': _table_evaluate,
    'feasible': _table_feasible,
    'solve': _table_solve,
    'frontier': _table_frontier,
    'simulate': _table_simulate,
    'check-randomized': _table_randomized,
}


def to_table(report):
    """Render a report as a human-readable text table."""

    result = report.result

    if 'error' in result:
        lines = ['Error: {0}'.format(result['error'])]

        if 'feasible' in result:
            lines.extend(_table_feasible(result['feasible']))

    else:
        lines = _table_renderers[report.command](result)

    return '\n'.join(lines)


def render(report):
    """Render a report in the output format given by its parameters."""

    if report.parameters.get('output') == 'json':
        return to_json(report)

    return to_table(report)
