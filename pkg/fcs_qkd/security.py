"""
Finite-key security bounds.

The pipeline turns protocol parameters and the tallies of a run into a
secure key length:

1. split ε_tot into the security parameters (:func:`epsilon_budget`);
2. bound the number of clicked signal rounds in which both users'
   ancillas would be found in |-->, by splitting the rounds into
   r1 + r2 + 1 groups of independent rounds and applying the Chernoff
   bound to each (:func:`minus_minus_bound`);
3. bound the phase errors with Kato's inequality
   (:func:`phase_error_upper`);
4. subtract error-correction leakage and the hashing costs
   (:func:`key_length`).

:func:`key_rate` chains these with the expected tallies of an honest
channel.
"""
from __future__ import print_function, unicode_literals, absolute_import, division
import math
import logging
from collections import namedtuple, Counter

import numpy as np

from . import DomainError, DegenerateChannelError
from .concentration import (ConfidenceLevel, TallyFrame, chernoff_upper,
                            expectation_upper, observation_upper)
from .channel import expected_statistics

logger = logging.getLogger(__name__)

LN2 = math.log(2.)


class ProtocolParams(object):
    """
    Parameters of one run of the protocol.

    Parameters
    ----------
    n_rounds : int
        number of rounds N
    mu : float
        signal intensity
    p_est : float
        probability that a round is a parameter-estimation round, in (0, 1)
    r1, r2 : int
        backward and forward correlation ranges
    p0a_floor, p0b_floor : float
        lower bounds on the vacuum probability of each of Alice's and
        Bob's pulses, in (0, 1]
    eps_tot : float
        total security parameter
    """

    def __init__(self, n_rounds, mu, p_est, r1, r2, p0a_floor, p0b_floor, eps_tot=1e-10):
        if int(n_rounds) != n_rounds or n_rounds < 1:
            raise DomainError('ProtocolParams: round count {} must be a positive integer'.format(n_rounds))
        if not mu >= 0.:
            raise DomainError('ProtocolParams: intensity {} is negative'.format(mu))
        if not 0. < p_est < 1.:
            raise DomainError('ProtocolParams: estimation probability {} outside (0, 1)'.format(p_est))
        if int(r1) != r1 or int(r2) != r2 or r1 < 0 or r2 < 0:
            raise DomainError('ProtocolParams: correlation ranges ({}, {}) must be '
                              'nonnegative integers'.format(r1, r2))
        for name, floor in (('p0a_floor', p0a_floor), ('p0b_floor', p0b_floor)):
            if not 0. < floor <= 1.:
                raise DomainError('ProtocolParams: {} = {} outside (0, 1]'.format(name, floor))
        if not 0. < eps_tot < 1.:
            raise DomainError('ProtocolParams: eps_tot = {} outside (0, 1)'.format(eps_tot))
        self.n_rounds = int(n_rounds)
        self.mu = float(mu)
        self.p_est = float(p_est)
        self.r1 = int(r1)
        self.r2 = int(r2)
        self.p0a_floor = float(p0a_floor)
        self.p0b_floor = float(p0b_floor)
        self.eps_tot = float(eps_tot)

    @classmethod
    def ideal(cls, n_rounds, mu, p_est, r1=0, r2=0, eps_tot=1e-10):
        """
        Parameters for ideal weak coherent sources, whose vacuum floor is
        exp(-µ) for both users.
        """
        floor = math.exp(-mu)
        return cls(n_rounds, mu, p_est, r1, r2, floor, floor, eps_tot)

    @property
    def r_total(self):
        return self.r1 + self.r2

    def replace(self, **kwargs):
        fields = dict(n_rounds=self.n_rounds, mu=self.mu, p_est=self.p_est, r1=self.r1,
                      r2=self.r2, p0a_floor=self.p0a_floor, p0b_floor=self.p0b_floor,
                      eps_tot=self.eps_tot)
        fields.update(kwargs)
        return ProtocolParams(**fields)

    def __repr__(self):
        return ('ProtocolParams(n_rounds={}, mu={!r}, p_est={!r}, r1={}, r2={}, '
                'p0a_floor={!r}, p0b_floor={!r}, eps_tot={!r})').format(
                    self.n_rounds, self.mu, self.p_est, self.r1, self.r2,
                    self.p0a_floor, self.p0b_floor, self.eps_tot)


def _budget_root(r_total):
    # √(r1 + r2 + 4), exact when r1 + r2 + 4 is a perfect square
    value = r_total + 4
    root = math.isqrt(value)
    if root * root == value:
        return float(root)
    return math.sqrt(value)


class EpsilonBudget(namedtuple('EpsilonBudget', ['eps', 'eps_cor', 'eps_tilde', 'eps_prime',
                                                 'eps_sec', 'eps_tot', 'log_eps', 'r_total'])):
    """
    The security parameters of a run, with ε = ε_cor = ε̃,
    ε' = √(r1 + r2 + 4) ε and ε_sec = 2ε' + ε̃.

    ε_sec is stored as ε_tot - ε_cor so that ε_cor + ε_sec reproduces
    ε_tot to rounding; ``log_eps`` keeps ln ε at full precision.
    """
    __slots__ = ()

    @classmethod
    def from_epsilon(cls, eps, r_total=0):
        """Budget built from ε rather than from ε_tot"""
        if not 0. < eps <= 1.:
            raise DomainError('EpsilonBudget: epsilon {} outside (0, 1]'.format(eps))
        root = _budget_root(r_total)
        eps_tot = eps * (2. + 2. * root)
        return cls(eps, eps, eps, root * eps, eps_tot - eps, eps_tot, math.log(eps), r_total)

    def confidence(self):
        """ε as a ConfidenceLevel"""
        return ConfidenceLevel(self.log_eps)


def epsilon_budget(eps_tot, r1, r2):
    """
    Split ε_tot as ε = ε_cor = ε̃ = ε_tot/(2 + 2√(r1 + r2 + 4)).
    """
    if not 0. < eps_tot < 1.:
        raise DomainError('epsilon_budget: eps_tot = {} outside (0, 1)'.format(eps_tot))
    if r1 < 0 or r2 < 0:
        raise DomainError('epsilon_budget: correlation ranges ({}, {}) must be nonnegative'.format(r1, r2))
    r_total = int(r1) + int(r2)
    root = _budget_root(r_total)
    divisor = 2. + 2. * root
    eps = eps_tot / divisor
    log_eps = math.log(eps_tot) - math.log(divisor)
    return EpsilonBudget(eps, eps, eps, root * eps, eps_tot - eps, eps_tot, log_eps, r_total)


class Tallies(namedtuple('Tallies', ['n_sig', 'n_est_bit', 'n_sig_tol', 'n_est_tol'])):
    """
    Counts announced in a run and the abort thresholds they are held to.
    """
    __slots__ = ()

    @property
    def aborted(self):
        """The protocol aborts on too many estimation errors or too few signal clicks"""
        return self.n_est_bit > self.n_est_tol or self.n_sig < self.n_sig_tol


class KeyRateResult(object):
    """
    Outcome of the bound pipeline at one operating point.

    Attributes
    ----------
    n_ph_bar : float
        upper bound on the phase errors
    leak_ec : float
        bits revealed by error correction
    key_length : float
        secure key length l >= 0
    rate : float
        l / N
    n_mm_bar : float
        upper bound on the clicked signal rounds in |-->
    budget : EpsilonBudget
    expected : fcs_qkd.channel.ExpectedTallies or None
    n_sig_tol, n_est_tol : int
        the thresholds the key length is computed for
    degenerate : str or None
        why the pipeline stopped early with a zero key, if it did
    """

    def __init__(self, n_rounds, n_ph_bar=0., leak_ec=0., key_length=0., n_mm_bar=0.,
                 budget=None, expected=None, n_sig_tol=0, n_est_tol=0, degenerate=None):
        self.n_ph_bar = float(n_ph_bar)
        self.leak_ec = float(leak_ec)
        self.key_length = max(0., float(key_length))
        self.rate = self.key_length / n_rounds
        self.n_mm_bar = float(n_mm_bar)
        self.budget = budget
        self.expected = expected
        self.n_sig_tol = n_sig_tol
        self.n_est_tol = n_est_tol
        self.degenerate = degenerate

    def as_dict(self):
        data = dict(n_ph_bar=self.n_ph_bar, leak_ec=self.leak_ec, key_length=self.key_length,
                    rate=self.rate, n_mm_bar=self.n_mm_bar, n_sig_tol=self.n_sig_tol,
                    n_est_tol=self.n_est_tol, degenerate=self.degenerate)
        if self.budget is not None:
            budget = self.budget._asdict()
            budget.pop('log_eps')
            data['budget'] = budget
        if self.expected is not None:
            data.update(self.expected._asdict())
        return data

    def __repr__(self):
        return 'KeyRateResult(key_length={:.6g}, rate={:.6g}, n_ph_bar={:.6g})'.format(
            self.key_length, self.rate, self.n_ph_bar)


def group_sizes(n_rounds, r1, r2):
    """
    Sizes of the r1 + r2 + 1 groups of rounds; group g = 1 ... r1 + r2 + 1
    holds rounds g, g + (r1 + r2 + 1), g + 2(r1 + r2 + 1) ...

    >>> group_sizes(10, 1, 1)
    [4, 3, 3]
    """
    stride = r1 + r2 + 1
    return [(n_rounds - g) // stride + 1 for g in range(1, stride + 1)]


def _minus_probability(floor, stride):
    # 1 - floor**stride without cancellation for floors close to 1
    return -math.expm1(stride * math.log(floor))


def minus_minus_bound(params, eps):
    """
    Upper bound N̄⁻⁻ on the clicked signal rounds whose ancillas both
    project on |->, failing with probability at most (r1 + r2 + 1)ε².

    Within a group the rounds are independent given the bits outside the
    group, each with probability at most
    (1 - P_est)(1 - P₀A^(r1+r2+1))(1 - P₀B^(r1+r2+1)), so the Chernoff
    bound applies group by group.

    Parameters
    ----------
    params : ProtocolParams
    eps : fcs_qkd.concentration.ConfidenceLevel
        the budget's ε; each group is bounded at ε²
    """
    stride = params.r_total + 1
    p_round = ((1. - params.p_est) * _minus_probability(params.p0a_floor, stride)
               * _minus_probability(params.p0b_floor, stride))
    conf = eps.squared()
    sizes = Counter(group_sizes(params.n_rounds, params.r1, params.r2))
    return sum(count * chernoff_upper(size * p_round, conf) for size, count in sorted(sizes.items()))


def phase_error_upper(n_est_bit, params, eps):
    """
    Upper bound n̄_ph on the phase errors among the clicked signal rounds.

    With P = P_est, U_bit = U_e(n_est_bit) and U_mm = U_e(N̄⁻⁻), all
    Kato bounds taken over the N rounds at confidence ε²::

        n̄_ph = U_m[2(1 - P)/P U_bit + 2 U_mm + 2√2 √((1 - P)/P) √(U_bit U_mm)]

    The result never exceeds N.
    """
    if n_est_bit < 0:
        raise DomainError('phase_error_upper: bit error count {} is negative'.format(n_est_bit))
    n = params.n_rounds
    conf = eps.squared()
    p = params.p_est

    n_mm = min(float(n), minus_minus_bound(params, eps))
    u_bit = expectation_upper(TallyFrame(n, min(float(n_est_bit), n)), conf)
    u_mm = expectation_upper(TallyFrame(n, n_mm), conf)
    odds = (1. - p) / p
    inner = (2. * odds * u_bit + 2. * u_mm
             + 2. * math.sqrt(2.) * math.sqrt(odds) * math.sqrt(u_bit) * math.sqrt(u_mm))
    if inner >= n:
        return float(n)
    return min(float(n), observation_upper(inner, n, conf))


def binary_entropy(p):
    """
    H₂(p) = -p log₂ p - (1 - p) log₂(1 - p), with 0 log₂ 0 = 0.
    Accepts scalars or arrays.
    """
    arr = np.asarray(p, dtype=float)
    if np.any(~((arr >= 0.) & (arr <= 1.))):
        raise DomainError('binary_entropy: argument outside [0, 1]')
    interior = (arr > 0.) & (arr < 1.)
    q = np.where(interior, arr, 0.5)
    h = np.where(interior, -q * np.log2(q) - (1. - q) * np.log1p(-q) / LN2, 0.)
    if h.ndim == 0:
        return float(h)
    return h


def ec_leak(n_sig, e_bit, f_ec):
    """Bits revealed by error correction, f n_sig H₂(e_bit)"""
    return f_ec * n_sig * binary_entropy(e_bit)


def key_length(n_sig_tol, n_ph_bar, leak_ec, budget):
    """
    Secure key length

        l = n_sig,tol (1 - H₂(n̄_ph/n_sig,tol)) - leak_ec
            - log₂(2/ε_cor) - 2 log₂(1/(2ε̃))

    with the phase-error ratio capped at 1/2, clamped at zero.
    """
    if not n_sig_tol > 0:
        raise DomainError('key_length: signal threshold {} must be positive'.format(n_sig_tol))
    ratio = min(0.5, max(0., n_ph_bar / n_sig_tol))
    log2_eps = budget.log_eps / LN2
    # log2(2/eps_cor) and 2 log2(1/(2 eps_tilde)) with eps_cor = eps_tilde = eps
    hashing = (1. - log2_eps) + 2. * (-1. - log2_eps)
    length = n_sig_tol * (1. - binary_entropy(ratio)) - leak_ec - hashing
    return max(0., length)


def key_rate(params, channel, n_sig_tol=None, n_est_tol=None):
    """
    Key rate per round at an operating point, from the expected tallies
    of an honest channel.

    The thresholds default to floor(E[n_sig]) and ceil(E[n_est,bit]);
    the phase-error bound is taken at n_est,bit = n_est,tol and the key
    length at n_sig,tol.

    Parameters
    ----------
    params : ProtocolParams
    channel : fcs_qkd.channel.ChannelParams
    n_sig_tol, n_est_tol : int, optional
        threshold overrides

    Returns
    -------
    result : KeyRateResult
        zero key with ``degenerate`` set when a stage has no meaningful value
    """
    n = params.n_rounds
    budget = epsilon_budget(params.eps_tot, params.r1, params.r2)
    try:
        expected = expected_statistics(params, channel)
    except DegenerateChannelError as err:
        logger.debug(str(err))
        return KeyRateResult(n, budget=budget, degenerate='no successful clicks')

    if n_sig_tol is None:
        n_sig_tol = int(math.floor(expected.exp_n_sig))
    if n_est_tol is None:
        n_est_tol = int(math.ceil(expected.exp_n_est_bit))
    if n_sig_tol <= 0:
        return KeyRateResult(n, budget=budget, expected=expected, n_sig_tol=n_sig_tol,
                             n_est_tol=n_est_tol, degenerate='signal threshold is zero')

    eps = budget.confidence()
    try:
        n_mm = minus_minus_bound(params, eps)
        n_ph = phase_error_upper(n_est_tol, params, eps)
    except (DomainError, FloatingPointError, OverflowError) as err:
        logger.debug('phase error bound failed: {}'.format(err))
        return KeyRateResult(n, budget=budget, expected=expected, n_sig_tol=n_sig_tol,
                             n_est_tol=n_est_tol, degenerate='phase error bound undefined')

    leak = ec_leak(expected.exp_n_sig, expected.e_bit, channel.f_ec)
    length = key_length(n_sig_tol, n_ph, leak, budget)
    result = KeyRateResult(n, n_ph_bar=n_ph, leak_ec=leak, key_length=length, n_mm_bar=n_mm,
                           budget=budget, expected=expected, n_sig_tol=n_sig_tol,
                           n_est_tol=n_est_tol)
    logger.debug('mu = {:.4g}, p_est = {:.4g}, {} dB, r = {}: l = {:.6g}'.format(
        params.mu, params.p_est, channel.attenuation_db, params.r_total, result.key_length))
    return result
