"""
This module supplies a single class, the Container. The command-line
front end creates one Container per invocation and passes it to the
subcommands, so configuration and the logger travel together instead
of living in module-level globals.
"""
from __future__ import print_function, division, unicode_literals, absolute_import


class Container:
    """
    A simple class to hold common attributes shared by the subcommands.

    Those in CAPITALS are meant to be immutable; lowercase ones get
    updated.

    The meaning of the globals is as follows (uppercase)::

    DEVICE  : device and protocol parameters of the reference simulation
    SWEEP    : default attenuation sweep
    COVERAGE : default suite of concentration-bound coverage experiments
    SIM      : default Monte Carlo run
    EXIT     : process exit codes

    and lowercase (all set = None to start with)::

    clog    : command log, a fcs_qkd.logs.Logger
    cpars   : dictionary of configuration parameters, keyed by section
    cfile   : name of the configuration file cpars was read from
    output  : file name for results, None for stdout
    """

    def __init__(self):
        # Parameters of the reference simulation
        self.DEVICE = {
            'dark':     1e-10,     # dark count probability per detector per round
            'e_mis':    0.01,      # misalignment error probability
            'f_ec':     1.1,       # error correction efficiency
            'eps_tot':  1e-10,     # total security parameter
            'n_rounds': 10**14,    # number of protocol rounds
        }

        self.SWEEP = {
            'attenuation_start': 0.,
            'attenuation_stop':  60.,
            'attenuation_step':  2.,
            'range_list': (0, 10, 100, 500),
        }

        self.COVERAGE = {
            'bounds': ('U_e', 'L_e', 'U_m', 'L_m', 'C_U'),
            'sequences': ('iid', 'martingale'),
            'n': 10**4,
            'eps': (0.05, 0.01),
            'p': 0.3,
            'base': 0.2,
            'slope': 0.3,
            'trials': 2000,
        }

        self.SIM = {
            'n_rounds': 10**6,
            'attenuation_db': 10.,
            'mu': 0.1,
            'p_est': 0.1,
            'chunk_size': 2**20,
        }

        self.EXIT = {'ok': 0, 'config': 2, 'numeric': 3}

        # Command log
        self.clog = None

        # Configuration parameter dictionary
        self.cpars = None

        # Configuration file name
        self.cfile = None

        # Output file name
        self.output = None
