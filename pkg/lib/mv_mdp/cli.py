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

from __future__ import absolute_import, division, print_function

from fractions import Fraction
import logging
import sys
import time

from docopt import docopt, DocoptExit

from mv_mdp.config import get_config, get_enumeration_cap
from mv_mdp.constrain import feasible_sets
from mv_mdp.error import (
    EmptyFeasibleSetError, MVMDPError, InvalidPolicyError)
from mv_mdp.evaluate import (
    evaluate_randomized, mean_performance, new_reward_h, variance)
from mv_mdp.frontier import enumerate_all, efficient_frontier
from mv_mdp.model import (
    DeterministicPolicy, RandomizedPolicy, check_irreducible,
    induced_chain, validate_model)
from mv_mdp.modelfile import load_model
from mv_mdp.report import (
    build_report, error_payload, evaluation_payload, feasible_payload,
    frontier_payload, randomized_payload, render, simulation_payload,
    solve_payload, validation_payload)
from mv_mdp.simulate import simulate_policy
from mv_mdp.solve import (
    brute_force, check_randomized_dominance, mean_policy_iteration,
    policy_iteration, value_iteration)

logger = logging.getLogger(__name__)

EXIT_SUCCESS = 0
EXIT_INFEASIBLE = 1
EXIT_INPUT_ERROR = 2

program_usage = """
{0} - Mean-variance solver for discounted Markov decision processes

Usage:
    {0} validate --model <file> [options]
    {0} evaluate --model <file> --policy <policy> [options]
    {0} feasible --model <file> (--lambda <values> | --lambda-from-policy <policy> | --lambda-optimal) [options]
    {0} solve --model <file> (--lambda <values> | --lambda-from-policy <policy> | --lambda-optimal) [--method <method>] [--initial <policy>] [options]
    {0} frontier --model <file> [options]
    {0} simulate --model <file> --policy <policy> [--start <state>] [options]
    {0} check-randomized --model <file> (--lambda <values> | --lambda-from-policy <policy> | --lambda-optimal) [--samples <n>] [options]

Options:
    --help, -h                     Show usage information.
    --verbose, -v                  Show debugging information.
    --quiet, -q                    Do not show general logging information.
    --model <file>                 Model document (JSON).
    --policy <policy>              Policy: one action label per state,
                                   separated by commas, e.g. 1,4.  A state
                                   may be randomized as label:weight terms
                                   joined by +, e.g. 1:0.25+2:0.75,4.
    --start <state>                Start state (from 1) [default: all].
    --lambda <values>              Target mean, comma separated.
    --lambda-from-policy <policy>  Use the mean of a policy as the target.
    --lambda-optimal               Use the maximal mean as the target.
    --method <method>              Solver: pi, vi or brute [default: pi].
    --initial <policy>             Initial policy for policy iteration.
    --samples <n>                  Number of randomized policies to test.
    --tolerance <tol>              Feasibility tolerance.
    --tie-tol <tol>                Tie tolerance for action selection.
    --epsilon <eps>                Value iteration accuracy.
    --seed <seed>                  Random number seed.
    --paths <n>                    Number of simulated paths.
    --horizon <n>                  Simulation horizon.
    --cap <n>                      Maximum number of policies to enumerate.
    --output <format>              Output format: json or table
                                   [default: table].
"""

commands = (
    'validate', 'evaluate', 'feasible', 'solve', 'frontier', 'simulate',
    'check-randomized',
)

methods = ('pi', 'vi', 'brute')


def parse_vector(text, num_states):
    """Parse a comma-separated vector of numbers (or "p/q" ratios)."""

    try:
        values = [float(Fraction(x.strip())) for x in text.split(',')]
    except (ValueError, ZeroDivisionError):
        raise MVMDPError('Could not parse vector "{0}"'.format(text))

    if len(values) != num_states:
        raise MVMDPError('Vector "{0}" has {1} values for {2} states'.format(
            text, len(values), num_states))

    return values


def parse_policy(text):
    """Parse a policy given on the command line.

    Returns a DeterministicPolicy unless any state is given as a
    mixture, in which case a RandomizedPolicy is returned.
    """

    states = [x.strip() for x in text.split(',')]

    try:
        if not any(('+' in x or ':' in x) for x in states):
            return DeterministicPolicy(int(x) for x in states)

        weights = []
        for state in states:
            if ':' not in state:
                weights.append(((int(state), 1.0),))
                continue

            terms = []
            for term in state.split('+'):
                (label, weight) = term.split(':')
                terms.append((int(label), float(Fraction(weight.strip()))))

            weights.append(tuple(terms))

    except (ValueError, ZeroDivisionError):
        raise InvalidPolicyError('Could not parse policy "{0}"'.format(text))

    return RandomizedPolicy(weights)


def _deterministic(text):
    policy = parse_policy(text)

    if isinstance(policy, RandomizedPolicy):
        raise InvalidPolicyError(
            'A deterministic policy is required, got "{0}"'.format(text))

    return policy


def _option(args, name, section, key, type_=float):
    """Take a value from the command line, else from the configuration."""

    value = args[name]

    if value is None:
        value = get_config().get(section, key)

    try:
        return type_(value)
    except ValueError:
        raise MVMDPError('Invalid value for {0}: {1}'.format(name, value))


def _resolve_parameters(args):
    command = [x for x in commands if args[x]][0]

    method = args['--method']
    if method not in methods:
        raise MVMDPError('Unknown method "{0}"'.format(method))

    output = args['--output']
    if output not in ('json', 'table'):
        raise MVMDPError('Unknown output format "{0}"'.format(output))

    if args['--cap'] is None:
        cap = get_enumeration_cap()
    else:
        cap = _option(args, '--cap', 'enumeration', 'cap', int)

    seed_section = 'randomized' if command == 'check-randomized' \
        else 'simulation'

    parameters = {
        'command': command,
        'model': args['--model'],
        'method': method,
        'output': output,
        'tolerance': _option(
            args, '--tolerance', 'tolerance', 'feasibility'),
        'tie_tolerance': _option(args, '--tie-tol', 'tolerance', 'tie'),
        'epsilon': _option(args, '--epsilon', 'tolerance', 'epsilon'),
        'cap': cap,
        'seed': _option(args, '--seed', seed_section, 'seed', int),
        'paths': _option(args, '--paths', 'simulation', 'paths', int),
        'horizon': (None if args['--horizon'] is None
                    else _option(args, '--horizon', None, None, int)),
        'samples': _option(args, '--samples', 'randomized', 'samples', int),
        'policy': args['--policy'],
        'initial': args['--initial'],
        'start': args['--start'],
        'lambda': args['--lambda'],
        'lambda_from_policy': args['--lambda-from-policy'],
        'lambda_optimal': args['--lambda-optimal'],
    }

    if parameters['start'] != 'all':
        parameters['start'] = _option(args, '--start', None, None, int)

    return parameters


def _target(model, parameters):
    """Determine the target mean, recording it in the parameters."""

    if parameters['lambda'] is not None:
        target = parse_vector(parameters['lambda'], model.num_states)

    elif parameters['lambda_from_policy'] is not None:
        policy = _deterministic(parameters['lambda_from_policy'])
        target = list(mean_performance(model, policy).values)

    else:
        optimum = mean_policy_iteration(
            model, tie_tolerance=parameters['tie_tolerance'])
        logger.info('Maximal mean attained by policy %s', optimum.policy)
        target = list(optimum.mean.values)

    parameters['target'] = [float(x) for x in target]

    return target


def _solve(model, sets, parameters):
    method = parameters['method']
    tie = parameters['tie_tolerance']

    if method == 'pi':
        initial = parameters['initial']
        return policy_iteration(
            model, sets,
            initial=(None if initial is None else _deterministic(initial)),
            tie_tolerance=tie)

    elif method == 'vi':
        return value_iteration(
            model, sets, epsilon=parameters['epsilon'], tie_tolerance=tie,
            max_iterations=get_config().getint(
                'iteration', 'max_value_iterations'))

    return brute_force(model, sets, cap=parameters['cap'], tie_tolerance=tie)


def _command_validate(model, parameters):
    policies = ()
    if model.num_policies <= parameters['cap']:
        policies = model.all_policies()

    validation = validate_model(model, policies)

    return (EXIT_SUCCESS, validation_payload(model, validation))


def _command_evaluate(model, parameters):
    policy = parse_policy(parameters['policy'])

    if isinstance(policy, RandomizedPolicy):
        (J, sigma2) = evaluate_randomized(model, policy)
        return (EXIT_SUCCESS, evaluation_payload(policy, J, sigma2))

    J = mean_performance(model, policy)
    (P, _) = induced_chain(model, policy)

    return (EXIT_SUCCESS, evaluation_payload(
        policy, J, variance(model, policy), new_reward_h(model, policy, J),
        check_irreducible(P)))


def _command_feasible(model, parameters):
    sets = feasible_sets(
        model, _target(model, parameters), parameters['tolerance'])

    empty = sets.first_empty_state()
    if empty is not None:
        logger.error('%s', EmptyFeasibleSetError(empty))
        return (EXIT_INFEASIBLE, feasible_payload(sets))

    return (EXIT_SUCCESS, feasible_payload(sets))


def _command_solve(model, parameters):
    sets = feasible_sets(
        model, _target(model, parameters), parameters['tolerance'])

    try:
        result = _solve(model, sets, parameters)

    except EmptyFeasibleSetError as e:
        logger.error('%s', e)
        return (EXIT_INFEASIBLE, error_payload(e, sets))

    if result.optimal_policy is None:
        logger.error('No policy minimizes the variance at every state')
        return (EXIT_INFEASIBLE, solve_payload(result, sets))

    return (EXIT_SUCCESS, solve_payload(result, sets))


def _command_frontier(model, parameters):
    config = get_config()

    frontier = efficient_frontier(
        enumerate_all(model, cap=parameters['cap']),
        class_tolerance=config.getfloat('tolerance', 'mean_class'),
        tolerance=config.getfloat('tolerance', 'dominance'))

    return (EXIT_SUCCESS, frontier_payload(frontier))


def _command_simulate(model, parameters):
    config = get_config()
    policy = parse_policy(parameters['policy'])

    start = parameters['start']
    if start != 'all':
        start -= 1

    estimate = simulate_policy(
        model, policy, start_state=(None if start == 'all' else start),
        num_paths=parameters['paths'], horizon=parameters['horizon'],
        seed=parameters['seed'],
        truncation_tolerance=config.getfloat('simulation', 'truncation'),
        block_size=config.getint('simulation', 'block_size'))

    if isinstance(policy, RandomizedPolicy):
        (J, sigma2) = evaluate_randomized(model, policy)
    else:
        (J, sigma2) = (mean_performance(model, policy),
                       variance(model, policy))

    return (EXIT_SUCCESS, simulation_payload(estimate, policy, J, sigma2))


def _command_check_randomized(model, parameters):
    sets = feasible_sets(
        model, _target(model, parameters), parameters['tolerance'])

    try:
        result = _solve(model, sets, parameters)

    except EmptyFeasibleSetError as e:
        logger.error('%s', e)
        return (EXIT_INFEASIBLE, error_payload(e, sets))

    check = check_randomized_dominance(
        model, sets, result, num_samples=parameters['samples'],
        seed=parameters['seed'])

    if check.violations:
        return (EXIT_INFEASIBLE, randomized_payload(check, result))

    return (EXIT_SUCCESS, randomized_payload(check, result))


_command_functions = {
    'validate': _command_validate,
    'evaluate': _command_evaluate,
    'feasible': _command_feasible,
    'solve': _command_solve,
    'frontier': _command_frontier,
    'simulate': _command_simulate,
    'check-randomized': _command_check_randomized,
}


def run_command(argv, program_name='mvmdp'):
    """Run a command given its arguments.

    Returns a tuple of the exit code and the RunReport (which is None
    if the command could not be run at all).
    """

    try:
        args = docopt(program_usage.format(program_name), argv=argv)
    except DocoptExit as e:
        print(str(e), file=sys.stderr)
        return (EXIT_INPUT_ERROR, None)
    except SystemExit:
        # Help was requested and has been shown.
        return (EXIT_SUCCESS, None)

    # Configure logging.
    logging.basicConfig(
        level=logging.DEBUG if args['--verbose'] else (
            logging.WARNING if args['--quiet'] else logging.INFO))

    start_time = time.time()

    try:
        parameters = _resolve_parameters(args)
        command = parameters.pop('command')

        logger.debug('Reading model %s', parameters['model'])
        model = load_model(parameters['model'])

        (code, payload) = _command_functions[command](model, parameters)

    except MVMDPError as e:
        logger.error('%s', e)
        return (EXIT_INPUT_ERROR, None)

    except (IOError, OSError) as e:
        logger.error('Could not read model: %s', e)
        return (EXIT_INPUT_ERROR, None)

    return (code, build_report(
        command, parameters, payload, elapsed=time.time() - start_time))


def main():
    """Main routine for the mvmdp command."""

    (code, report) = run_command(sys.argv[1:])

    if report is not None:
        print(render(report))

    sys.exit(code)
