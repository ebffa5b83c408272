"""
Key-rate maximisation over the signal intensity and the estimation
probability.

The objective has flat zero plateaus and a clipped entropy term, so the
search is derivative free: a log-spaced grid followed by two rounds of
regridding on a window shrunk by a factor 3 around the incumbent.
"""
from __future__ import print_function, unicode_literals, absolute_import, division
import logging

import numpy as np

from . import DomainError
from .security import ProtocolParams, key_rate

logger = logging.getLogger(__name__)

# search box, log-spaced on both axes
MU_BOUNDS = (1e-9, 1.)
P_EST_BOUNDS = (1e-3, 0.5)
GRID_POINTS = 25
REFINE_ROUNDS = 2
SHRINK = 3.


class OptimizationResult(object):
    """
    Result of :func:`optimize`.

    Attributes
    ----------
    mu_opt, p_est_opt : float
        best parameters found
    rate_opt : float
        key rate at (mu_opt, p_est_opt)
    result : fcs_qkd.security.KeyRateResult
        full pipeline output at the optimum
    trace : list of (mu, p_est, rate)
        every evaluated point in evaluation order
    zero_key : bool
        True if no evaluated point gives a positive key
    incumbents : list of (mu, p_est, rate)
        the best point after the coarse grid and after each refinement
    """

    def __init__(self, mu_opt, p_est_opt, result, trace, zero_key, incumbents=()):
        self.mu_opt = mu_opt
        self.p_est_opt = p_est_opt
        self.result = result
        self.rate_opt = result.rate
        self.trace = trace
        self.zero_key = zero_key
        self.incumbents = list(incumbents)

    def __repr__(self):
        return 'OptimizationResult(mu_opt={:.6g}, p_est_opt={:.6g}, rate_opt={:.6g}, zero_key={})'.format(
            self.mu_opt, self.p_est_opt, self.rate_opt, self.zero_key)


def _rank(rate, mu, p_est):
    # total order: higher rate, then smaller mu, then smaller p_est
    return (rate, -mu, -p_est)


def _axis(centre, span, bounds, points):
    """points log-spaced values on a window of ``span`` decades, clipped to bounds"""
    lo, hi = np.log10(bounds[0]), np.log10(bounds[1])
    if centre is None:
        start, stop = lo, hi
    else:
        c = np.log10(centre)
        start = max(lo, c - span / 2.)
        stop = min(hi, c + span / 2.)
    return np.unique(10.**np.linspace(start, stop, points))


def optimize(channel, n_rounds, r1, r2, eps_tot, mu_bounds=MU_BOUNDS, p_est_bounds=P_EST_BOUNDS,
             points=GRID_POINTS, rounds=REFINE_ROUNDS):
    """
    Maximise the key rate of ideal weak coherent sources over (µ, P_est).

    Parameters
    ----------
    channel : fcs_qkd.channel.ChannelParams
    n_rounds : int
    r1, r2 : int
        correlation ranges
    eps_tot : float
    mu_bounds, p_est_bounds : (float, float)
        search box
    points : int
        grid points per axis, in every round
    rounds : int
        number of refinement rounds

    Returns
    -------
    result : OptimizationResult
        the reduction over the trace is deterministic under the order
        (rate, -µ, -P_est)
    """
    if not 0. < mu_bounds[0] < mu_bounds[1]:
        raise DomainError('optimize: invalid intensity bounds {}'.format(mu_bounds))
    if not 0. < p_est_bounds[0] < p_est_bounds[1] < 1.:
        raise DomainError('optimize: invalid estimation probability bounds {}'.format(p_est_bounds))
    if points < 2:
        raise DomainError('optimize: need at least 2 grid points per axis, got {}'.format(points))

    trace = []
    incumbents = []
    best = None
    best_result = None
    mu_span = np.log10(mu_bounds[1] / mu_bounds[0])
    p_span = np.log10(p_est_bounds[1] / p_est_bounds[0])
    centre = (None, None)

    for level in range(rounds + 1):
        mus = _axis(centre[0], mu_span, mu_bounds, points)
        p_ests = _axis(centre[1], p_span, p_est_bounds, points)
        for mu in mus:
            for p_est in p_ests:
                mu, p_est = float(mu), float(p_est)
                params = ProtocolParams.ideal(n_rounds, mu, p_est, r1, r2, eps_tot)
                res = key_rate(params, channel)
                trace.append((mu, p_est, res.rate))
                rank = _rank(res.rate, mu, p_est)
                if best is None or rank > best:
                    best = rank
                    best_result = (mu, p_est, res)

        logger.debug('round {}: incumbent mu = {:.6g}, p_est = {:.6g}, rate = {:.6g}'.format(
            level, best_result[0], best_result[1], best_result[2].rate))
        incumbents.append((best_result[0], best_result[1], best_result[2].rate))
        centre = best_result[:2]
        mu_span /= SHRINK
        p_span /= SHRINK

    mu_opt, p_est_opt, res = best_result
    zero_key = not any(rate > 0. for _, _, rate in trace)
    if zero_key:
        logger.debug('no positive key at {} dB, r = {}'.format(channel.attenuation_db, r1 + r2))
    return OptimizationResult(mu_opt, p_est_opt, res, trace, zero_key, incumbents)
