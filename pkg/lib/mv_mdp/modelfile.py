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
Reading and writing model documents.

A model document is a JSON object of the form:

    {"num_states": 2, "beta": 0.5,
     "states": [{"actions": [{"label": 1, "reward": "3/4",
                              "transition": [0.25, 0.75]}]},
                ...]}

Rewards and probabilities may be given as numbers or as rational
strings "p/q", which are converted to the nearest double.
"""

from __future__ import absolute_import, division, print_function

from fractions import Fraction
import io
import json
import logging

from mv_mdp.error import ModelFormatError, ModelValidationError
from mv_mdp.model import MdpModel, validate_model

logger = logging.getLogger(__name__)


def _number(value, where):
    """Interpret a number or rational string."""

    if isinstance(value, bool):
        raise ModelFormatError('{0}: expected a number, got {1!r}'.format(
            where, value))

    if isinstance(value, (int, float)):
        return float(value)

    if isinstance(value, str):
        try:
            return float(Fraction(value.strip()))
        except (ValueError, ZeroDivisionError):
            pass

    raise ModelFormatError('{0}: expected a number or "p/q", got {1!r}'.format(
        where, value))


def _member(obj, key, where):
    if not isinstance(obj, dict):
        raise ModelFormatError('{0}: expected an object'.format(where))

    try:
        return obj[key]
    except KeyError:
        raise ModelFormatError('{0}: missing "{1}"'.format(where, key))


def parse_model(document):
    """Parse a model document.

    Returns an MdpModel.  Raises ModelFormatError for syntax errors
    (with the line and column where known) or structural problems, and
    ModelValidationError if the model fails validate_model.  Validation
    warnings are logged.
    """

    try:
        data = json.loads(document)
    except ValueError as e:
        raise ModelFormatError(
            getattr(e, 'msg', str(e)),
            line=getattr(e, 'lineno', None),
            column=getattr(e, 'colno', None))

    num_states = _member(data, 'num_states', 'model')
    if isinstance(num_states, bool) or not isinstance(num_states, int):
        raise ModelFormatError('model: "num_states" must be an integer')

    beta = _number(_member(data, 'beta', 'model'), 'beta')

    states = _member(data, 'states', 'model')
    if not isinstance(states, list):
        raise ModelFormatError('model: "states" must be a list')

    if len(states) != num_states:
        raise ModelFormatError(
            'model: "num_states" is {0} but {1} states are given'.format(
                num_states, len(states)))

    actions = []
    rewards = []
    transitions = []

    for (i, state) in enumerate(states, 1):
        where = 'state {0}'.format(i)
        state_actions = _member(state, 'actions', where)

        if not isinstance(state_actions, list):
            raise ModelFormatError('{0}: "actions" must be a list'.format(
                where))

        labels = []
        state_rewards = []
        state_transitions = []

        for (n, action) in enumerate(state_actions, 1):
            where = 'state {0} action entry {1}'.format(i, n)

            label = _member(action, 'label', where)
            if isinstance(label, bool) or not isinstance(label, int):
                raise ModelFormatError(
                    '{0}: "label" must be an integer'.format(where))

            row = _member(action, 'transition', where)
            if not isinstance(row, list):
                raise ModelFormatError(
                    '{0}: "transition" must be a list'.format(where))

            if len(row) != num_states:
                raise ModelFormatError(
                    '{0}: "transition" has {1} entries, expected {2}'.format(
                        where, len(row), num_states))

            labels.append(label)
            state_rewards.append(
                _number(_member(action, 'reward', where), where + ' reward'))
            state_transitions.append(
                [_number(x, where + ' transition') for x in row])

        actions.append(labels)
        rewards.append(state_rewards)
        transitions.append(state_transitions)

    model = MdpModel(beta, actions, rewards, transitions)

    report = validate_model(model)
    if report.violations:
        raise ModelValidationError(report.violations)

    logger.debug('Parsed model with %i states and %i policies',
                 model.num_states, model.num_policies)

    return model


def load_model(filename):
    """Read and parse a model document from a file."""

    logger.debug('Reading model file %s', filename)

    with io.open(filename, 'r', encoding='utf-8') as f:
        return parse_model(f.read())


def serialize_model(model):
    """Write a model as a JSON document.

    Numbers are written with the shortest representation which
    reads back to the same double, so parsing the result gives
    an identical model.
    """

    states = []

    for i in range(model.num_states):
        states.append({'actions': [
            {
                'label': label,
                'reward': float(model.rewards[i][a]),
                'transition': [float(x) for x in model.transitions[i][a]],
            }
            for (a, label) in enumerate(model.actions[i])]})

    return json.dumps({
        'num_states': model.num_states,
        'beta': model.beta,
        'states': states,
    }, indent=2, sort_keys=True)
