"""
Click statistics of an honest middle node.

Alice and Bob each send a phase-encoded weak coherent pulse to Charlie,
who sits halfway along the channel and interferes the two pulses on a
balanced beam splitter followed by two threshold detectors. The left
port is the constructive one. A fraction e_mis of each port's light is
routed to the other port to model imperfect visibility; each detector
also fires with dark-count probability d.
"""
from __future__ import print_function, unicode_literals, absolute_import, division
import math
import logging
from collections import namedtuple

from . import DomainError, DegenerateChannelError

logger = logging.getLogger(__name__)

PHASE_PAIRS = ((0, 0), (0, 1), (1, 0), (1, 1))


class ChannelParams(object):
    """
    Honest-channel description.

    Parameters
    ----------
    attenuation_db : float
        total Alice to Bob loss in dB, split equally between the two arms
    dark : float
        dark-count probability per detector per round
    e_mis : float
        misalignment error probability, at most 1/2
    f_ec : float
        error-correction efficiency, at least 1
    """

    def __init__(self, attenuation_db, dark=1e-10, e_mis=0.01, f_ec=1.1):
        if not attenuation_db >= 0.:
            raise DomainError('ChannelParams: attenuation {} dB is negative'.format(attenuation_db))
        if not 0. <= dark <= 1.:
            raise DomainError('ChannelParams: dark count probability {} outside [0, 1]'.format(dark))
        if not 0. <= e_mis <= 0.5:
            raise DomainError('ChannelParams: misalignment {} outside [0, 1/2]'.format(e_mis))
        if not f_ec >= 1.:
            raise DomainError('ChannelParams: error correction efficiency {} < 1'.format(f_ec))
        self.attenuation_db = float(attenuation_db)
        self.dark = float(dark)
        self.e_mis = float(e_mis)
        self.f_ec = float(f_ec)

    @property
    def eta_arm(self):
        return arm_transmittance(self.attenuation_db)

    def replace(self, **kwargs):
        """Copy with some fields changed"""
        fields = dict(attenuation_db=self.attenuation_db, dark=self.dark,
                      e_mis=self.e_mis, f_ec=self.f_ec)
        fields.update(kwargs)
        return ChannelParams(**fields)

    def __repr__(self):
        return 'ChannelParams(attenuation_db={!r}, dark={!r}, e_mis={!r}, f_ec={!r})'.format(
            self.attenuation_db, self.dark, self.e_mis, self.f_ec)


class ClickDistribution(namedtuple('ClickDistribution',
                                   ['p_left_only', 'p_right_only', 'p_none', 'p_double'])):
    """
    Probabilities of the four detection outcomes of one round.
    Only the single-click outcomes are announced as successful.
    """
    __slots__ = ()

    @property
    def p_single(self):
        return self.p_left_only + self.p_right_only


ExpectedTallies = namedtuple('ExpectedTallies',
                             ['p_succ', 'e_bit', 'exp_n_sig', 'exp_n_est', 'exp_n_est_bit'])
ExpectedTallies.__doc__ = """
Expected click statistics of a run of N rounds.

p_succ : per-round successful-click probability
e_bit : sifted bit error rate
exp_n_sig : expected clicked signal rounds, N(1 - P_est) p_succ
exp_n_est : expected clicked estimation rounds, N P_est p_succ
exp_n_est_bit : expected estimation-round bit errors, N P_est p_succ e_bit
"""


def arm_transmittance(attenuation_db):
    """
    Transmittance of one arm when the total loss is split equally
    between Alice-Charlie and Charlie-Bob.
    """
    if attenuation_db < 0.:
        raise DomainError('arm_transmittance: attenuation {} dB is negative'.format(attenuation_db))
    return 10.**(-attenuation_db / 20.)


def interference_intensities(mu, eta_arm, same_phase, e_mis):
    """
    Mean photon numbers (I_L, I_R) reaching the left and right detectors.

    Parameters
    ----------
    mu : float
        intensity of each user's pulse
    eta_arm : float
        transmittance of each arm
    same_phase : bool
        True if the two pulses carry the same phase, so that the left port
        interferes constructively
    e_mis : float
        fraction of the light routed to the wrong port

    Returns
    -------
    (I_L, I_R) : tuple of float
        I_L + I_R = 2 µ η
    """
    if mu < 0.:
        raise DomainError('interference_intensities: intensity {} is negative'.format(mu))
    if not 0. <= eta_arm <= 1.:
        raise DomainError('interference_intensities: transmittance {} outside [0, 1]'.format(eta_arm))
    total = 2. * mu * eta_arm
    right = total * e_mis
    left = total - right
    if same_phase:
        return left, right
    return right, left


def _click_probability(intensity, dark):
    # threshold detector: fires unless it sees neither photons nor a dark count
    return -math.expm1(math.log1p(-dark) - intensity) if dark < 1. else 1.


def click_distribution(I_L, I_R, dark):
    """
    Outcome probabilities for independent threshold detectors with
    click probability q(I) = 1 - (1 - d) exp(-I).
    """
    if I_L < 0. or I_R < 0.:
        raise DomainError('click_distribution: intensities ({}, {}) must be nonnegative'.format(I_L, I_R))
    q_left = _click_probability(I_L, dark)
    q_right = _click_probability(I_R, dark)
    return ClickDistribution(
        p_left_only=q_left * (1. - q_right),
        p_right_only=q_right * (1. - q_left),
        p_none=(1. - q_left) * (1. - q_right),
        p_double=q_left * q_right,
    )


def expected_statistics(protocol, channel):
    """
    Expected tallies of the protocol over an honest channel.

    The four phase pairs (s_A, s_B) are equally likely. After Bob flips
    his bit on right clicks, a sifted error is a left click with
    s_A != s_B or a right click with s_A == s_B. Correlations of the
    source are ignored; they do not change the click rates.

    Parameters
    ----------
    protocol : fcs_qkd.security.ProtocolParams
    channel : ChannelParams

    Returns
    -------
    tallies : ExpectedTallies

    Raises
    ------
    DegenerateChannelError
        if no round can produce a successful click
    """
    eta = channel.eta_arm
    p_succ = 0.
    p_error = 0.
    for s_a, s_b in PHASE_PAIRS:
        same = s_a == s_b
        I_L, I_R = interference_intensities(protocol.mu, eta, same, channel.e_mis)
        dist = click_distribution(I_L, I_R, channel.dark)
        p_succ += dist.p_single / 4.
        p_error += (dist.p_right_only if same else dist.p_left_only) / 4.

    if p_succ <= 0.:
        raise DegenerateChannelError(
            'expected_statistics: no successful clicks at mu = {}, {} dB, dark = {}'.format(
                protocol.mu, channel.attenuation_db, channel.dark))

    e_bit = min(1., p_error / p_succ)
    n_rounds = protocol.n_rounds
    exp_n_sig = n_rounds * (1. - protocol.p_est) * p_succ
    exp_n_est = n_rounds * protocol.p_est * p_succ
    tallies = ExpectedTallies(p_succ, e_bit, exp_n_sig, exp_n_est, exp_n_est * e_bit)
    logger.debug('expected statistics at {} dB: p_succ = {:.6g}, e_bit = {:.6g}'.format(
        channel.attenuation_db, p_succ, e_bit))
    return tallies
