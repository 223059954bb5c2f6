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
Mean-variance efficient frontier over all deterministic policies.
"""

from __future__ import absolute_import, division, print_function

from collections import namedtuple
import logging

import numpy as np

from mv_mdp.config import get_enumeration_cap
from mv_mdp.error import ContractError, EnumerationTooLargeError
from mv_mdp.evaluate import mean_performance, variance

logger = logging.getLogger(__name__)

MEAN_CLASS_TOLERANCE = 1e-6
DOMINANCE_TOLERANCE = 1e-9

FrontierEntry = namedtuple('FrontierEntry', 'policy mean variance')
MeanClass = namedtuple('MeanClass', 'mean members')
FrontierReport = namedtuple(
    'FrontierReport', 'entries mean_classes efficient_set')


def enumerate_all(model, cap=None):
    """Evaluate the mean and variance of every deterministic policy.

    Entries are returned in lexicographic policy order.

    Raises EnumerationTooLargeError if the model has more policies
    than the cap.
    """

    if cap is None:
        cap = get_enumeration_cap()

    count = model.num_policies
    if count > cap:
        raise EnumerationTooLargeError(count, cap)

    logger.debug('Evaluating %i policies', count)

    return [
        FrontierEntry(policy, mean_performance(model, policy),
                      variance(model, policy))
        for policy in model.all_policies()]


def dominates(entry, other, tolerance=DOMINANCE_TOLERANCE):
    """Check whether one entry dominates another.

    The entry must have a mean at least as large and a variance at least
    as small at every state, and be strictly better somewhere.
    Differences within the tolerance count as equal.
    """

    mean = entry.mean.values
    mean_other = other.mean.values
    var = entry.variance.values
    var_other = other.variance.values

    if np.any(mean < mean_other - tolerance):
        return False

    if np.any(var > var_other + tolerance):
        return False

    return bool(np.any(mean > mean_other + tolerance) or
                np.any(var < var_other - tolerance))


def mean_classes(entries, tolerance=MEAN_CLASS_TOLERANCE):
    """Group entries by mean performance.

    Each entry joins the first class whose (first member's) mean is
    within the tolerance at every state.  Returns a list of MeanClass
    tuples in order of first appearance.
    """

    if not tolerance > 0.0:
        raise ContractError('Mean class tolerance must be positive')

    classes = []

    for entry in entries:
        for (k, cls) in enumerate(classes):
            if np.abs(entry.mean.values - cls.mean.values).max() <= tolerance:
                classes[k] = MeanClass(cls.mean, cls.members + (entry,))
                break
        else:
            classes.append(MeanClass(entry.mean, (entry,)))

    return classes


def efficient_frontier(entries, class_tolerance=MEAN_CLASS_TOLERANCE,
                       tolerance=DOMINANCE_TOLERANCE):
    """Find the entries not dominated by any other entry.

    Returns a FrontierReport which also groups the entries by mean.
    """

    entries = list(entries)

    if not entries:
        raise ContractError('Cannot compute the frontier of no policies')

    efficient = []

    for entry in entries:
        if not any(dominates(other, entry, tolerance)
                   for other in entries if other is not entry):
            efficient.append(entry)

    logger.debug('%i of %i policies are efficient',
                 len(efficient), len(entries))

    return FrontierReport(
        entries, mean_classes(entries, class_tolerance), efficient)
