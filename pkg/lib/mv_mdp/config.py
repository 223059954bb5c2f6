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

from configparser import ConfigParser
import os

from mv_mdp.error import MVMDPError

config_file = 'etc/mvmdp.ini'
config = None

# Values used when no configuration file overrides them.
defaults = {
    'tolerance': {
        'feasibility': '1e-7',
        'tie': '1e-10',
        'epsilon': '1e-10',
        'mean_class': '1e-6',
        'dominance': '1e-9',
    },
    'enumeration': {
        'cap': '1000000',
    },
    'simulation': {
        'paths': '100000',
        'seed': '0',
        'truncation': '1e-6',
        'block_size': '65536',
    },
    'randomized': {
        'samples': '200',
        'seed': '0',
    },
    'iteration': {
        'max_value_iterations': '1000000',
    },
}


def get_config():
    """Read the configuration file.

    Returns a ConfigParser object, populated with the built-in
    defaults and then any values from the configuration file.

    Raises MVMDPError if the $MVMDP_DIR environment variable is set
    but the configuration file does not exist there.
    """

    global config

    if config is None:
        dir = get_home()
        file = os.path.join(dir, config_file)

        if not os.path.exists(file) and 'MVMDP_DIR' in os.environ:
            raise MVMDPError('Config file {0} doesn\'t exist'.format(file))

        config = ConfigParser()
        config.read_dict(defaults)
        config.read(file)

    return config


def get_enumeration_cap():
    """Determine the maximum number of policies to enumerate.

    The environment variable $MVMDP_CAP takes precedence over the
    configuration file.
    """

    env = os.environ

    if 'MVMDP_CAP' in env:
        try:
            cap = int(env['MVMDP_CAP'])
        except ValueError:
            raise MVMDPError('MVMDP_CAP is not an integer: {0}'.format(
                env['MVMDP_CAP']))
    else:
        cap = get_config().getint('enumeration', 'cap')

    if cap < 1:
        raise MVMDPError('Enumeration cap must be positive')

    return cap


def get_home():
    """Determine the solver home directory.

    Assumed to be the current directory unless
    an environment variable $MVMDP_DIR exists.
    """

    env = os.environ
    return env.get('MVMDP_DIR', os.getcwd())
