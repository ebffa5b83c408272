"""
Seeded Monte Carlo runs of the protocol with an honest middle node, and
empirical checks of the concentration bounds.

Random numbers come from counter-mode Philox generators. Every quantity
drawn per round has its own stream, and each stream is cut into blocks
of BLOCK rounds whose generator is keyed by the seed and positioned by
(stream, block). A round's random numbers therefore depend only on the
seed and the round index, and a run processed in chunks of any size
reproduces the sequential run bit for bit.
"""
from __future__ import print_function, unicode_literals, absolute_import, division
import math
import logging

import numpy as np

from . import DomainError, DegenerateChannelError
from .channel import ExpectedTallies, expected_statistics
from .concentration import (ConfidenceLevel, TallyFrame, chernoff_upper, expectation_lower,
                            expectation_upper, observation_lower, observation_upper)
from .security import Tallies, minus_minus_bound
from .statemodel import context_codes, p_minus_table

logger = logging.getLogger(__name__)

BLOCK = 2**16

# stream identifiers
STREAM_BITS_A = 0
STREAM_BITS_B = 1
STREAM_ESTIMATION = 2
STREAM_LEFT = 3
STREAM_RIGHT = 4
STREAM_COVERAGE = 16
STREAM_MINUS_MINUS = 17

MAX_EXACT_RANGE = 8

BOUND_KINDS = ('U_e', 'L_e', 'U_m', 'L_m', 'C_U')


def block_generator(seed, stream, block):
    """
    Generator for one block of one stream. The 256-bit Philox counter
    starts at stream * 2**192 + block * 2**128, so blocks and streams
    never overlap.
    """
    if seed < 0 or seed >= 2**64:
        raise DomainError('block_generator: seed {} is not a 64-bit unsigned integer'.format(seed))
    counter = (int(stream) << 192) | (int(block) << 128)
    return np.random.Generator(np.random.Philox(key=int(seed), counter=counter))


def _bits(gen, size):
    return gen.integers(0, 2, size=size, dtype=np.int8)


def _uniforms(gen, size):
    return gen.random(size)


def draw_rounds(seed, stream, start, stop, draw):
    """
    Values of ``stream`` for rounds start ... stop - 1.

    ``draw(generator, size)`` produces the values of a whole block.
    """
    if stop <= start:
        return draw(block_generator(seed, stream, 0), 0)
    first = start // BLOCK
    last = (stop - 1) // BLOCK
    parts = [draw(block_generator(seed, stream, block), BLOCK) for block in range(first, last + 1)]
    values = np.concatenate(parts) if len(parts) > 1 else parts[0]
    offset = first * BLOCK
    return values[start - offset:stop - offset]


class SimConfig(object):
    """
    Everything that determines a Monte Carlo run.

    Parameters
    ----------
    seed : int
        64-bit unsigned seed
    n_rounds : int
        rounds to simulate
    kernel_a, kernel_b : fcs_qkd.statemodel.CorrelationKernel
        Alice's and Bob's sources
    channel : fcs_qkd.channel.ChannelParams
    protocol : fcs_qkd.security.ProtocolParams
        supplies P_est and the intensity of the expected tallies
    n_sig_tol, n_est_tol : int, optional
        abort thresholds, default to the expected tallies
    chunk_size : int
        rounds processed at a time; does not change the result
    """

    def __init__(self, seed, n_rounds, kernel_a, kernel_b, channel, protocol,
                 n_sig_tol=None, n_est_tol=None, chunk_size=2**20):
        if int(n_rounds) != n_rounds or n_rounds < 1:
            raise DomainError('SimConfig: round count {} must be a positive integer'.format(n_rounds))
        if chunk_size < 1:
            raise DomainError('SimConfig: chunk size {} must be positive'.format(chunk_size))
        if not 0 <= seed < 2**64:
            raise DomainError('SimConfig: seed {} is not a 64-bit unsigned integer'.format(seed))
        self.seed = int(seed)
        self.n_rounds = int(n_rounds)
        self.kernel_a = kernel_a
        self.kernel_b = kernel_b
        self.channel = channel
        self.protocol = protocol
        self.n_sig_tol = n_sig_tol
        self.n_est_tol = n_est_tol
        self.chunk_size = int(chunk_size)


class SimResult(object):
    """
    Outcome of :func:`run_protocol`.

    Attributes
    ----------
    tallies : fcs_qkd.security.Tallies
    sifted_alice, sifted_bob : numpy.ndarray of uint8
        sifted keys of the clicked signal rounds, packed with numpy.packbits
    n_sifted : int
        length of the sifted keys in bits, equal to n_sig
    n_est : int
        clicked estimation rounds
    n_single, n_double : int
        rounds with exactly one click and with both detectors clicking
    aborted : bool
    z_scores : dict
        standardised deviation of n_sig, n_est and n_est_bit from the
        expected tallies
    expected : fcs_qkd.channel.ExpectedTallies
    """

    def __init__(self, tallies, sifted_alice, sifted_bob, n_sifted, n_est, z_scores, expected,
                 n_single=0, n_double=0):
        self.tallies = tallies
        self.sifted_alice = sifted_alice
        self.sifted_bob = sifted_bob
        self.n_sifted = n_sifted
        self.n_est = n_est
        self.z_scores = z_scores
        self.expected = expected
        self.n_single = n_single
        self.n_double = n_double

    @property
    def aborted(self):
        return self.tallies.aborted

    def sifted_bits(self):
        """The unpacked sifted keys (alice, bob)"""
        return (np.unpackbits(self.sifted_alice, count=self.n_sifted),
                np.unpackbits(self.sifted_bob, count=self.n_sifted))

    @property
    def sifted_errors(self):
        alice, bob = self.sifted_bits()
        return int(np.count_nonzero(alice != bob))

    def summary(self):
        data = self.tallies._asdict()
        data.update(n_est=self.n_est, n_single=self.n_single, n_double=self.n_double,
                    n_sifted=self.n_sifted, sifted_errors=self.sifted_errors, aborted=self.aborted,
                    z_scores=dict(self.z_scores))
        return data


def _click_probability(intensity, dark):
    if dark >= 1.:
        return np.ones_like(intensity)
    return -np.expm1(math.log1p(-dark) - intensity)


def _z_score(count, n_rounds, p):
    mean = n_rounds * p
    var = n_rounds * p * (1. - p)
    if var > 0.:
        return (count - mean) / math.sqrt(var)
    if count == mean:
        return 0.
    return math.copysign(math.inf, count - mean)


def _expected(config):
    protocol = config.protocol.replace(n_rounds=config.n_rounds)
    try:
        return expected_statistics(protocol, config.channel)
    except DegenerateChannelError:
        return ExpectedTallies(0., 0., 0., 0., 0.)


def run_protocol(config):
    """
    Simulate protocol steps 1 to 4.

    Per round, Alice and Bob draw their bits and emit the amplitudes of
    their kernels. After the arm loss the pulses interfere: the left
    (constructive) port receives η|α + β|²/2 and the right port
    η|α - β|²/2, and a fraction e_mis of each port's light goes to the
    other. Detectors click independently with probability
    1 - (1 - d)exp(-I). Single clicks are kept; Bob flips his bit on a
    right click. Each round is an estimation round with probability P_est.

    Correlated kernels shift the phases, and so the split between the
    ports, of neighbouring rounds.

    Returns
    -------
    result : SimResult
    """
    n = config.n_rounds
    seed = config.seed
    kernel_a, kernel_b = config.kernel_a, config.kernel_b
    channel = config.channel
    p_est = config.protocol.p_est
    eta = channel.eta_arm
    pad = max(kernel_a.r_total, kernel_b.r_total)

    n_sig = n_est = n_est_bit = 0
    n_single = n_double = 0
    sifted_a = []
    sifted_b = []
    for start in range(0, n, config.chunk_size):
        stop = min(n, start + config.chunk_size)
        lo, hi = max(0, start - pad), min(n, stop + pad)
        core = slice(start - lo, stop - lo)

        bits_a = draw_rounds(seed, STREAM_BITS_A, lo, hi, _bits)
        bits_b = draw_rounds(seed, STREAM_BITS_B, lo, hi, _bits)
        alpha = kernel_a.amplitudes(bits_a)[core]
        beta = kernel_b.amplitudes(bits_b)[core]
        s_a = bits_a[core]
        s_b = bits_b[core]

        left0 = eta * np.abs(alpha + beta)**2 / 2.
        right0 = eta * np.abs(alpha - beta)**2 / 2.
        left_i = (1. - channel.e_mis) * left0 + channel.e_mis * right0
        right_i = (1. - channel.e_mis) * right0 + channel.e_mis * left0

        left = draw_rounds(seed, STREAM_LEFT, start, stop, _uniforms) < \
            _click_probability(left_i, channel.dark)
        right = draw_rounds(seed, STREAM_RIGHT, start, stop, _uniforms) < \
            _click_probability(right_i, channel.dark)
        estimation = draw_rounds(seed, STREAM_ESTIMATION, start, stop, _uniforms) < p_est

        single = left ^ right
        bob = s_b ^ right.astype(np.int8)
        error = single & (s_a != bob)
        signal = single & ~estimation

        n_sig += int(np.count_nonzero(signal))
        n_est += int(np.count_nonzero(single & estimation))
        n_est_bit += int(np.count_nonzero(error & estimation))
        n_single += int(np.count_nonzero(single))
        n_double += int(np.count_nonzero(left & right))
        sifted_a.append(s_a[signal])
        sifted_b.append(bob[signal])
        logger.debug('rounds {} to {}: {} signal clicks so far'.format(start, stop, n_sig))

    expected = _expected(config)
    n_sig_tol = config.n_sig_tol
    if n_sig_tol is None:
        n_sig_tol = max(1, int(math.floor(expected.exp_n_sig)))
    n_est_tol = config.n_est_tol
    if n_est_tol is None:
        n_est_tol = int(math.ceil(expected.exp_n_est_bit))
    tallies = Tallies(n_sig, n_est_bit, n_sig_tol, n_est_tol)

    p_succ = expected.p_succ
    z_scores = {
        'n_sig': _z_score(n_sig, n, (1. - p_est) * p_succ),
        'n_est': _z_score(n_est, n, p_est * p_succ),
        'n_est_bit': _z_score(n_est_bit, n, p_est * p_succ * expected.e_bit),
    }

    key_a = np.concatenate(sifted_a).astype(np.uint8)
    key_b = np.concatenate(sifted_b).astype(np.uint8)
    result = SimResult(tallies, np.packbits(key_a), np.packbits(key_b), int(key_a.size),
                       n_est, z_scores, expected, n_single, n_double)
    if result.aborted:
        logger.info('run aborted: n_sig = {} (threshold {}), n_est_bit = {} (threshold {})'.format(
            n_sig, n_sig_tol, n_est_bit, n_est_tol))
    return result


class SequenceSpec(object):
    """
    Distribution of a sequence X_1 ... X_n of {0, 1} variables.

    kind = 'iid' draws Bernoulli(p) variables. kind = 'martingale' draws
    X_m with probability base + slope * (mean of X_1 ... X_{m-1}), and
    base for the first variable, so the conditional expectations depend
    on the realised prefix.
    """
    KINDS = ('iid', 'martingale')

    def __init__(self, kind='iid', p=0.3, base=0.2, slope=0.3):
        if kind not in self.KINDS:
            raise DomainError('SequenceSpec: unknown kind {!r}'.format(kind))
        if kind == 'iid' and not 0. <= p <= 1.:
            raise DomainError('SequenceSpec: probability {} outside [0, 1]'.format(p))
        if kind == 'martingale' and not (0. <= base <= 1. and 0. <= base + slope <= 1.):
            raise DomainError('SequenceSpec: base {} and slope {} leave [0, 1]'.format(base, slope))
        self.kind = kind
        self.p = float(p)
        self.base = float(base)
        self.slope = float(slope)

    def sample(self, n, trials, gen):
        """
        Returns (observed sums, conditional expectation sums), one of each per trial.
        """
        if self.kind == 'iid':
            lams = gen.binomial(n, self.p, size=trials).astype(float)
            return lams, np.full(trials, n * self.p)

        ones = np.zeros(trials)
        expect = np.zeros(trials)
        for m in range(n):
            p_m = self.base + self.slope * (ones / m if m else 0.)
            ones += gen.random(trials) < p_m
            expect += p_m
        return ones, expect

    def __repr__(self):
        if self.kind == 'iid':
            return 'iid(p={:g})'.format(self.p)
        return 'martingale(base={:g}, slope={:g})'.format(self.base, self.slope)


def coverage_tolerance(eps, trials):
    """Largest acceptable violation fraction, ε + 3√(ε(1 - ε)/trials)"""
    return eps + 3. * math.sqrt(eps * (1. - eps) / trials)


def _violations(bound_kind, lams, expects, n, conf):
    cache = {}

    def bound(fn, value):
        if value not in cache:
            cache[value] = fn(value)
        return cache[value]

    flags = np.zeros(lams.size, dtype=bool)
    for t, (lam, expect) in enumerate(zip(lams, expects)):
        if bound_kind == 'U_e':
            flags[t] = expect > bound(lambda v: expectation_upper(TallyFrame(n, v), conf), lam)
        elif bound_kind == 'L_e':
            flags[t] = expect < bound(lambda v: expectation_lower(TallyFrame(n, v), conf), lam)
        elif bound_kind == 'U_m':
            flags[t] = lam > bound(lambda v: observation_upper(v, n, conf), expect)
        elif bound_kind == 'L_m':
            flags[t] = lam < bound(lambda v: observation_lower(v, n, conf), expect)
        else:
            flags[t] = lam >= bound(lambda v: chernoff_upper(v, conf), expect)
    return flags


def coverage_experiment(bound_kind, distribution_spec, n, eps, trials, seed):
    """
    Fraction of simulated sequences for which a concentration bound fails.

    Parameters
    ----------
    bound_kind : str
        one of 'U_e', 'L_e', 'U_m', 'L_m', 'C_U'
    distribution_spec : SequenceSpec
        C_U needs independent variables, i.e. kind 'iid'
    n : int
        sequence length
    eps : float
        failure probability of the bound
    trials : int
        number of sequences, at least 100
    seed : int

    Returns
    -------
    violation_fraction : float
    """
    if bound_kind not in BOUND_KINDS:
        raise DomainError('coverage_experiment: unknown bound {!r}'.format(bound_kind))
    if trials < 100:
        raise DomainError('coverage_experiment: need at least 100 trials, got {}'.format(trials))
    if bound_kind == 'C_U' and distribution_spec.kind != 'iid':
        raise DomainError('coverage_experiment: the Chernoff bound needs independent variables')
    conf = ConfidenceLevel.from_epsilon(eps)
    gen = block_generator(seed, STREAM_COVERAGE, 0)
    lams, expects = distribution_spec.sample(n, trials, gen)
    flags = _violations(bound_kind, lams, expects, n, conf)
    fraction = float(np.count_nonzero(flags)) / trials
    logger.debug('{} on {} with n = {}, eps = {:g}: {} of {} trials violate'.format(
        bound_kind, distribution_spec, n, eps, int(np.count_nonzero(flags)), trials))
    return fraction


class MinusMinusResult(object):
    """
    Outcome of :func:`minus_minus_experiment`.

    Attributes
    ----------
    counts : numpy.ndarray
        N_sig⁻⁻ of every trial
    bound : float
        the Chernoff bound N̄_sig⁻⁻ at confidence ε
    exceedance : float
        fraction of trials with N_sig⁻⁻ >= N̄_sig⁻⁻
    allowed : float
        (r1 + r2 + 1)ε² plus three standard errors
    """

    def __init__(self, counts, bound, exceedance, allowed):
        self.counts = counts
        self.bound = bound
        self.exceedance = exceedance
        self.allowed = allowed

    @property
    def passed(self):
        return self.exceedance <= self.allowed

    @property
    def mean(self):
        return float(np.mean(self.counts))


def minus_minus_experiment(kernel_a, kernel_b, protocol, trials, seed, eps=0.1):
    """
    Sample the number of clicked signal rounds whose ancillas both
    project on |->, using the exact projection probabilities of the
    kernels, and compare with the grouped Chernoff bound.

    Each trial draws both users' bits, looks up P⁻_A and P⁻_B of every
    round from its context and counts rounds that are signal rounds and
    project on |-> for both users.

    Parameters
    ----------
    kernel_a, kernel_b : fcs_qkd.statemodel.CorrelationKernel
        ranges must not exceed those of ``protocol``
    protocol : fcs_qkd.security.ProtocolParams
        N, P_est and the correlation ranges; the vacuum floors are taken
        from the kernels
    trials : int
    seed : int
    eps : float
        confidence of the bound, chosen large so exceedances are observable

    Raises
    ------
    DomainError
        if r1 + r2 > 8 or a kernel's range exceeds the protocol's
    """
    reach = protocol.r_total
    if reach > MAX_EXACT_RANGE:
        raise DomainError('minus_minus_experiment: r1 + r2 = {} exceeds {}'.format(reach, MAX_EXACT_RANGE))
    for kernel in (kernel_a, kernel_b):
        if kernel.r1 > protocol.r1 or kernel.r2 > protocol.r2:
            raise DomainError('minus_minus_experiment: {!r} exceeds the protocol ranges ({}, {})'.format(
                kernel, protocol.r1, protocol.r2))
    if trials < 1:
        raise DomainError('minus_minus_experiment: need at least one trial')

    n = protocol.n_rounds
    table_a = p_minus_table(kernel_a)
    table_b = p_minus_table(kernel_b)
    keep = 1. - protocol.p_est

    def probabilities(bits, kernel, table):
        trim = reach - kernel.r_total
        return table[context_codes(bits[trim:bits.size - trim], kernel.r_total)]

    counts = np.zeros(trials, dtype=np.int64)
    for t in range(trials):
        gen = block_generator(seed, STREAM_MINUS_MINUS, t)
        bits_a = gen.integers(0, 2, size=n + 2 * reach, dtype=np.int8)
        bits_b = gen.integers(0, 2, size=n + 2 * reach, dtype=np.int8)
        p_round = keep * probabilities(bits_a, kernel_a, table_a) * probabilities(bits_b, kernel_b, table_b)
        counts[t] = np.count_nonzero(gen.random(n) < p_round)

    floors = protocol.replace(p0a_floor=kernel_a.vacuum_floor, p0b_floor=kernel_b.vacuum_floor)
    bound = minus_minus_bound(floors, ConfidenceLevel.from_epsilon(eps))
    exceedance = float(np.count_nonzero(counts >= bound)) / trials
    failure = min(1., (reach + 1) * eps * eps)
    allowed = failure + 3. * math.sqrt(failure * (1. - failure) / trials)

    result = MinusMinusResult(counts, bound, exceedance, allowed)
    if not result.passed:
        logger.warning('N-- bound exceeded in {:.4g} of trials, allowed {:.4g}'.format(exceedance, allowed))
    return result
