"""
Command-line front end.

Subcommands::

  sweep     optimised key rate against attenuation for several correlation
            ranges, as CSV
  point     the full bound pipeline at one operating point, as JSON
  simulate  a seeded Monte Carlo run, as a one-line JSON summary
  coverage  empirical failure rates of the concentration bounds, as CSV

Exit codes are 0 on success (a protocol abort included), 2 for
configuration and usage errors and 3 for numerical failures.
"""
from __future__ import print_function, unicode_literals, absolute_import, division
import argparse
import sys
from concurrent.futures import ProcessPoolExecutor

from . import ConfigError, DomainError, FcsError, __version__
from . import config as cfgmod
from .globals import Container
from .logs import Logger
from .misc import writeCSV, writeJSON
from .optimizer import optimize
from .security import ProtocolParams, key_rate
from .simulator import (BOUND_KINDS, SequenceSpec, SimConfig, coverage_experiment,
                        coverage_tolerance, run_protocol)

SWEEP_COLUMNS = ('r_total', 'attenuation_db', 'mu_opt', 'p_est_opt', 'n_ph_bar', 'key_length', 'rate')
COVERAGE_COLUMNS = ('bound', 'sequence', 'n', 'eps', 'trials', 'violation_fraction', 'allowed', 'result')


class UsageError(ConfigError):
    pass


class SweepSpec(object):
    """
    Grid of a key-rate sweep.

    Parameters
    ----------
    attenuation_start, attenuation_stop, attenuation_step : float
        total attenuation grid in dB, start <= stop and step > 0
    range_list : sequence of int
        values of r1 + r2 to sweep
    channel : fcs_qkd.channel.ChannelParams
        device parameters; the attenuation is replaced point by point
    n_rounds : int
    eps_tot : float
    jobs : int
        worker processes, one curve per process
    """

    def __init__(self, attenuation_start, attenuation_stop, attenuation_step, range_list,
                 channel, n_rounds, eps_tot, jobs=1):
        if not attenuation_step > 0.:
            raise DomainError('SweepSpec: attenuation step {} must be positive'.format(attenuation_step))
        if not attenuation_start <= attenuation_stop:
            raise DomainError('SweepSpec: attenuation start {} exceeds stop {}'.format(
                attenuation_start, attenuation_stop))
        if attenuation_start < 0.:
            raise DomainError('SweepSpec: attenuation start {} is negative'.format(attenuation_start))
        if any(r < 0 for r in range_list):
            raise DomainError('SweepSpec: correlation ranges must be nonnegative')
        self.attenuation_start = float(attenuation_start)
        self.attenuation_stop = float(attenuation_stop)
        self.attenuation_step = float(attenuation_step)
        self.range_list = sorted(set(int(r) for r in range_list))
        self.channel = channel
        self.n_rounds = n_rounds
        self.eps_tot = eps_tot
        self.jobs = max(1, int(jobs))

    def attenuations(self):
        span = self.attenuation_stop - self.attenuation_start
        count = int(span / self.attenuation_step + 1e-9) + 1
        return [self.attenuation_start + k * self.attenuation_step for k in range(count)]


def split_range(r_total):
    """(r1, r2) with r1 + r2 = r_total"""
    return r_total // 2, r_total - r_total // 2


def sweep_curve(spec, r_total):
    """
    Rows of one curve. The curve stops at the first zero rate that
    follows a positive one.
    """
    r1, r2 = split_range(r_total)
    rows = []
    seen_key = False
    for attenuation in spec.attenuations():
        channel = spec.channel.replace(attenuation_db=attenuation)
        opt = optimize(channel, spec.n_rounds, r1, r2, spec.eps_tot)
        res = opt.result
        rows.append((r_total, attenuation, opt.mu_opt, opt.p_est_opt, res.n_ph_bar,
                     res.key_length, res.rate))
        if res.rate > 0.:
            seen_key = True
        elif seen_key:
            break
    return rows


def _curve_job(args):
    return sweep_curve(*args)


def cmd_sweep(spec, fd):
    """
    Key rate against attenuation, ordered by r_total and then attenuation.
    Returns the rows written.
    """
    jobs = [(spec, r_total) for r_total in spec.range_list]
    if spec.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            curves = list(pool.map(_curve_job, jobs))
    else:
        curves = [_curve_job(job) for job in jobs]
    rows = [row for curve in curves for row in curve]
    writeCSV(fd, SWEEP_COLUMNS, rows)
    return rows


def sweep_spec(g):
    cfg = g.cpars
    defaults = g.SWEEP
    if cfg.overridden('protocol', 'r_total'):
        range_list = [cfg.get('protocol', 'r_total')]
    else:
        range_list = cfg.get('sweep', 'range_list', defaults['range_list'])
    try:
        return SweepSpec(cfg.get('sweep', 'attenuation_start', defaults['attenuation_start']),
                         cfg.get('sweep', 'attenuation_stop', defaults['attenuation_stop']),
                         cfg.get('sweep', 'attenuation_step', defaults['attenuation_step']),
                         range_list, cfgmod.channel_params(g, attenuation_db=0.),
                         cfgmod.check(cfg, 'protocol', 'n_rounds',
                                      cfg.get('protocol', 'n_rounds', g.DEVICE['n_rounds']), lo=1),
                         cfgmod.check(cfg, 'protocol', 'eps_tot',
                                      cfg.get('protocol', 'eps_tot', g.DEVICE['eps_tot']),
                                      0., 1., True, True),
                         cfgmod.check(cfg, 'sweep', 'jobs', cfg.get('sweep', 'jobs', 1), lo=1))
    except DomainError as err:
        raise ConfigError('{}: [sweep]: {}'.format(cfg.fname, err))


def cmd_point(g, fd):
    """
    Evaluate the pipeline at one operating point, optimising (µ, P_est)
    if asked to, and write every intermediate quantity as JSON.
    """
    cfg = g.cpars
    params = cfgmod.protocol_params(g)
    channel = cfgmod.channel_params(g)
    optimized = cfg.get('protocol', 'optimize', False)
    if optimized:
        explicit = [key for key in ('p0a_floor', 'p0b_floor') if cfg.has('protocol', key)]
        if explicit:
            g.clog.warn('--optimize uses the floors exp(-mu); ignoring [protocol] {}'.format(
                ', '.join(explicit)))
        opt = optimize(channel, params.n_rounds, params.r1, params.r2, params.eps_tot)
        params = ProtocolParams.ideal(params.n_rounds, opt.mu_opt, opt.p_est_opt, params.r1,
                                      params.r2, params.eps_tot)
        result = opt.result
    else:
        result = key_rate(params, channel)

    record = dict(r_total=params.r_total, r1=params.r1, r2=params.r2, n_rounds=params.n_rounds,
                  attenuation_db=channel.attenuation_db, dark=channel.dark, e_mis=channel.e_mis,
                  f_ec=channel.f_ec, mu=params.mu, p_est=params.p_est, p0a_floor=params.p0a_floor,
                  p0b_floor=params.p0b_floor, optimized=bool(optimized))
    record.update(result.as_dict())
    writeJSON(fd, record, pretty=True)
    g.clog.info('rate {:.6g} at {} dB, r = {}'.format(result.rate, channel.attenuation_db, params.r_total))
    return record


def sim_config(g):
    cfg = g.cpars
    defaults = g.SIM
    n_rounds = cfgmod.check(cfg, 'sim', 'n_rounds', cfg.get('sim', 'n_rounds', defaults['n_rounds']), lo=1)
    mu = cfgmod.check(cfg, 'sim', 'mu', cfg.get('sim', 'mu', defaults['mu']), lo=0.)
    p_est = cfgmod.check(cfg, 'sim', 'p_est', cfg.get('sim', 'p_est', defaults['p_est']),
                          0., 1., True, True)
    attenuation = cfgmod.check(cfg, 'sim', 'attenuation_db',
                                cfg.get('sim', 'attenuation_db', defaults['attenuation_db']), lo=0.)
    seed = cfgmod.check(cfg, 'sim', 'seed', cfg.get('sim', 'seed', 0), 0, 2**64 - 1)
    chunk = cfgmod.check(cfg, 'sim', 'chunk_size', cfg.get('sim', 'chunk_size', defaults['chunk_size']), lo=1)
    for key in ('n_sig_tol', 'n_est_tol'):
        if cfg.has('sim', key):
            cfgmod.check(cfg, 'sim', key, cfg.get('sim', key), lo=0)
    protocol = cfgmod.protocol_params(g, n_rounds=n_rounds, mu=mu, p_est=p_est)
    return SimConfig(seed, n_rounds, cfgmod.kernel(g, 'kernel_a', mu), cfgmod.kernel(g, 'kernel_b', mu),
                     cfgmod.channel_params(g, attenuation_db=attenuation), protocol,
                     cfg.get('sim', 'n_sig_tol'), cfg.get('sim', 'n_est_tol'), chunk)


def cmd_simulate(g, fd):
    """
    Run the Monte Carlo simulation and write a one-line summary. An
    aborted run is a valid outcome.
    """
    config = sim_config(g)
    result = run_protocol(config)
    summary = dict(seed=config.seed, n_rounds=config.n_rounds, mu=config.protocol.mu,
                   p_est=config.protocol.p_est, attenuation_db=config.channel.attenuation_db)
    summary.update(result.summary())
    writeJSON(fd, summary, pretty=False)
    g.clog.info('simulated {} rounds: n_sig = {}, aborted = {}'.format(
        config.n_rounds, result.tallies.n_sig, result.aborted))
    return summary


def coverage_suite(g):
    """The configured experiments as (bound, SequenceSpec, n, eps, trials, seed) tuples"""
    cfg = g.cpars
    defaults = g.COVERAGE
    trials = cfg.get('coverage', 'trials', defaults['trials'])
    if trials < 100:
        raise cfg.error('coverage', 'trials', 'at least 100 trials are needed')
    n = cfgmod.check(cfg, 'coverage', 'n', cfg.get('coverage', 'n', defaults['n']), lo=1)
    seed = cfgmod.check(cfg, 'coverage', 'seed', cfg.get('coverage', 'seed', 0), 0, 2**64 - 1)
    bounds = cfg.get('coverage', 'bounds', defaults['bounds'])
    for bound in bounds:
        if bound not in BOUND_KINDS:
            raise cfg.error('coverage', 'bounds', 'unknown bound {!r}'.format(bound))
    epsilons = cfg.get('coverage', 'eps', defaults['eps'])
    for eps in epsilons:
        if not 0. < eps <= 1.:
            raise cfg.error('coverage', 'eps', 'values must lie in (0, 1]')

    sequences = []
    for kind in cfg.get('coverage', 'sequences', defaults['sequences']):
        try:
            sequences.append(SequenceSpec(kind, p=cfg.get('coverage', 'p', defaults['p']),
                                          base=cfg.get('coverage', 'base', defaults['base']),
                                          slope=cfg.get('coverage', 'slope', defaults['slope'])))
        except DomainError as err:
            raise cfg.error('coverage', 'sequences', str(err))

    suite = []
    for bound in bounds:
        for sequence in sequences:
            if bound == 'C_U' and sequence.kind != 'iid':
                continue
            for eps in epsilons:
                suite.append((bound, sequence, n, eps, trials, seed + len(suite)))
    return suite


def cmd_coverage(g, fd):
    """
    Run the coverage experiments and write one row per experiment. A
    bound passes when its violation fraction is at most
    ε + 3√(ε(1 - ε)/trials).
    """
    rows = []
    for bound, sequence, n, eps, trials, seed in coverage_suite(g):
        fraction = coverage_experiment(bound, sequence, n, eps, trials, seed)
        allowed = coverage_tolerance(eps, trials)
        verdict = 'pass' if fraction <= allowed else 'fail'
        if verdict == 'fail':
            g.clog.warn('{} on {} at eps = {:g}: violation fraction {:.4g} exceeds {:.4g}'.format(
                bound, sequence, eps, fraction, allowed))
        rows.append((bound, repr(sequence), n, eps, trials, fraction, allowed, verdict))
    writeCSV(fd, COVERAGE_COLUMNS, rows)
    return rows


COMMANDS = {
    'sweep': lambda g, fd: cmd_sweep(sweep_spec(g), fd),
    'point': cmd_point,
    'simulate': cmd_simulate,
    'coverage': cmd_coverage,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError('{}: {}'.format(self.prog, message))


def build_parser():
    parser = _Parser(prog='fcsqkd', description='Finite-key bounds and simulation for '
                     'finite-correlation-secure QKD')
    parser.add_argument('--version', action='version', version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', metavar='PATH',
                        help='configuration file, default: the reference parameters')
    common.add_argument('--output', metavar='PATH', help='write results here instead of stdout')
    common.add_argument('--seed', type=int, help='random seed for simulate and coverage')
    common.add_argument('--r-total', type=int, dest='r_total', help='correlation range r1 + r2')
    common.add_argument('--attenuation-db', type=float, dest='attenuation_db', help='total attenuation in dB')
    common.add_argument('--optimize', action='store_true', help='optimise mu and P_est for point')
    common.add_argument('--log', metavar='PATH', help='also log to this file, including debug messages')
    common.add_argument('-v', '--verbose', action='store_true', help='show debug messages')
    sub = parser.add_subparsers(dest='command', metavar='command')
    sub.required = True
    for name, text in (('sweep', 'key rate against attenuation (CSV)'),
                       ('point', 'bound pipeline at one operating point (JSON)'),
                       ('simulate', 'Monte Carlo run of the protocol (JSON)'),
                       ('coverage', 'coverage of the concentration bounds (CSV)')):
        sub.add_parser(name, parents=[common], help=text)
    return parser


def apply_overrides(g, args):
    """Command-line flags replace configuration file values"""
    cfg = g.cpars
    if args.seed is not None:
        cfg.set('sim', 'seed', args.seed)
        cfg.set('coverage', 'seed', args.seed)
    if args.r_total is not None:
        cfg.set('protocol', 'r_total', args.r_total)
        cfg.remove('protocol', 'r1')
        cfg.remove('protocol', 'r2')
    if args.attenuation_db is not None:
        cfg.set('channel', 'attenuation_db', args.attenuation_db)
        cfg.set('sim', 'attenuation_db', args.attenuation_db)
    if args.optimize:
        cfg.set('protocol', 'optimize', True)


def main(argv=None):
    g = Container()
    try:
        args = build_parser().parse_args(argv)
    except UsageError as err:
        sys.stderr.write('{}\n'.format(err))
        return g.EXIT['config']

    g.clog = Logger('fcs_qkd', verbose=args.verbose)
    try:
        if args.log:
            g.clog.to_file(args.log)
        g.cpars = cfgmod.ConfigFile.from_file(args.config) if args.config else cfgmod.ConfigFile.default()
        g.cfile = g.cpars.fname
        g.output = args.output
        apply_overrides(g, args)
        g.clog.debug('running {} with {}'.format(args.command, g.cfile))

        if g.output:
            with open(g.output, 'w') as fd:
                COMMANDS[args.command](g, fd)
        else:
            COMMANDS[args.command](g, sys.stdout)
    except ConfigError as err:
        g.clog.error(str(err))
        return g.EXIT['config']
    except (IOError, OSError) as err:
        g.clog.error('cannot open file: {}'.format(err))
        return g.EXIT['config']
    except (FcsError, ArithmeticError, ValueError) as err:
        g.clog.error('{}: {}'.format(err.__class__.__name__, err))
        return g.EXIT['numeric']
    finally:
        g.clog.close()
    return g.EXIT['ok']


if __name__ == '__main__':
    sys.exit(main())
