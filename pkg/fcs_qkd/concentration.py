"""
Concentration bounds for sums of [0, 1]-valued random variables.

Two families are provided. Kato's inequality relates the observed sum
Λ = Σ X_m of an adapted sequence to the sum of its conditional
expectations, in both directions:

  U_e, L_e : bounds on Σ E(X_m | F_{m-1}) given the observation Λ
  U_m, L_m : bounds on Λ given the expectation sum

The multiplicative Chernoff bound C_U bounds the sum of independent
{0, 1} variables from above given its mean.

Failure probabilities are carried as natural logarithms
(:class:`ConfidenceLevel`) so that squared parameters of order 1e-24
never underflow. The Kato coefficients are evaluated with the trial
count factored out of every radical, which keeps all intermediate
quantities of order n at most even for n = 1e14.
"""
from __future__ import print_function, unicode_literals, absolute_import, division
import math
import logging
from collections import namedtuple

import numpy as np
from scipy.optimize import minimize_scalar

from . import DomainError

logger = logging.getLogger(__name__)

# Kato bound kinds
UPPER = 'upper'
LOWER = 'lower'


class ConfidenceLevel(object):
    """
    A failure probability ε, 0 < ε <= 1.

    Stored as ln ε so that ε² and smaller values keep full relative
    precision. Build from ε with :meth:`from_epsilon`, or directly from
    its logarithm.

    Parameters
    ----------
    log_epsilon : float
        natural logarithm of ε, must be <= 0 and finite
    """

    def __init__(self, log_epsilon):
        log_epsilon = float(log_epsilon)
        if not math.isfinite(log_epsilon) or log_epsilon > 0.:
            raise DomainError(
                'ConfidenceLevel: ln(epsilon) = {} is outside (-inf, 0]'.format(log_epsilon))
        self.log_epsilon = log_epsilon

    @classmethod
    def from_epsilon(cls, epsilon):
        epsilon = float(epsilon)
        if not 0. < epsilon <= 1.:
            raise DomainError(
                'ConfidenceLevel: epsilon = {} is outside (0, 1]'.format(epsilon))
        return cls(math.log(epsilon))

    @property
    def epsilon(self):
        return math.exp(self.log_epsilon)

    @property
    def log_inverse(self):
        """ln(1/ε) >= 0"""
        return -self.log_epsilon

    def squared(self):
        """The confidence level ε²"""
        return ConfidenceLevel(2. * self.log_epsilon)

    def __eq__(self, other):
        return isinstance(other, ConfidenceLevel) and self.log_epsilon == other.log_epsilon

    def __hash__(self):
        return hash(self.log_epsilon)

    def __repr__(self):
        return 'ConfidenceLevel(epsilon={:.6g})'.format(self.epsilon)


class TallyFrame(object):
    """
    A trial count n and an observed (or bounded) sum 0 <= Λ <= n.
    """

    def __init__(self, n, lam):
        if n <= 0:
            raise DomainError('TallyFrame: trial count n = {} must be positive'.format(n))
        lam = float(lam)
        if not 0. <= lam <= n:
            raise DomainError(
                'TallyFrame: sum {} lies outside [0, {}]'.format(lam, n))
        self.n = n
        self.lam = lam

    @property
    def fraction(self):
        return self.lam / self.n

    def __repr__(self):
        return 'TallyFrame(n={}, lam={:.12g})'.format(self.n, self.lam)


KatoCoefficients = namedtuple('KatoCoefficients', ['a', 'b'])
KatoCoefficients.__doc__ = """
Coefficients (a, b) of Kato's inequality. Valid coefficients satisfy
b² >= a², so that the confidence constraint has a nonnegative exponent.
"""


def _slope(n):
    # the 4/(3 sqrt(n)) factor multiplying a in the constraint denominator
    return 4. / (3. * math.sqrt(n))


def _kato_coeffs(frame, conf, sign):
    """
    Closed-form minimiser of b + a(2Λ/n - 1) subject to
    exp(-2(b² - a²)/(1 + sign·4a/(3√n))²) = ε.

    With L = ln ε, x = Λ/n and v = n x(1-x) every term of the closed
    form carries a common factor n^(3/2) that cancels, leaving::

        a = -sign·3√n [72vL - 16L² - sign·9√2(n - 2Λ)√(-L(9v - 2L))]
            / (4(9n - 8L)(9v - 2L))
    """
    L = conf.log_epsilon
    if L == 0.:
        return KatoCoefficients(0., 0.)

    n = float(frame.n)
    lam = frame.lam
    v = lam * (n - lam) / n
    quad = 9. * v - 2. * L
    root = math.sqrt(-L * quad)
    core = 72. * v * L - 16. * L * L
    skew = 9. * math.sqrt(2.) * (n - 2. * lam) * root
    denom = 4. * (9. * n - 8. * L) * quad

    if sign > 0:
        a = 3. * math.sqrt(n) * (core + skew) / denom
    else:
        a = -3. * math.sqrt(n) * (core - skew) / denom

    b = math.hypot(a, math.sqrt(-L / 2.) * (1. + sign * _slope(n) * a))
    return KatoCoefficients(a, b)


def kato_coeffs_upper(frame, conf):
    """
    Optimal coefficients (a₁, b₁) for the upper expectation bound U_e
    and the lower observation bound L_m.

    Parameters
    ----------
    frame : TallyFrame
        trial count and observed sum at which the coefficients are tuned
    conf : ConfidenceLevel
        failure probability ε; ε = 1 gives (0, 0)

    Returns
    -------
    coeffs : KatoCoefficients
        satisfy exp(-2(b₁² - a₁²)/(1 + 4a₁/(3√n))²) = ε
    """
    return _kato_coeffs(frame, conf, +1)


def kato_coeffs_lower(frame, conf):
    """
    Optimal coefficients (a₂, b₂) for the lower expectation bound L_e
    and the upper observation bound U_m. The constraint denominator is
    (1 - 4a₂/(3√n))².
    """
    return _kato_coeffs(frame, conf, -1)


def constraint_exponent(coeffs, n, kind):
    """
    ln of the failure probability guaranteed by coefficients (a, b):
    -2(b² - a²)/(1 ± 4a/(3√n))².
    """
    sign = 1. if kind == UPPER else -1.
    a, b = coeffs
    gap = (b - a) * (b + a)
    return -2. * gap / (1. + sign * _slope(n) * a)**2


def _excess(coeffs, x, conf, n, sign):
    """
    b + a(2x - 1), evaluated without the cancellation between b and |a|.

    Uses b - |a| = (b² - a²)/(b + |a|) with b² - a² taken from the
    confidence constraint, then adds |a| + a(2x - 1) which is 2ax for
    a >= 0 and 2|a|(1 - x) otherwise.
    """
    a, b = coeffs
    if b == 0.:
        return 0.
    gap = -conf.log_epsilon / 2. * (1. + sign * _slope(n) * a)**2
    base = gap / (b + abs(a))
    if a >= 0.:
        return base + 2. * a * x
    return base - 2. * a * (1. - x)


def kato_objective(coeffs, frame, conf, kind=UPPER):
    """
    The tightness objective b + a(2Λ/n - 1) of coefficients that meet
    the confidence constraint of the given kind with equality.
    """
    sign = 1 if kind == UPPER else -1
    return _excess(coeffs, frame.fraction, conf, frame.n, sign)


def expectation_upper(frame, conf):
    """
    U_e^ε(Λ): with probability at least 1 - ε,
    Σ E(X_m | F_{m-1}) <= Λ + (b₁ + a₁(2Λ/n - 1))√n.

    Capped at n.
    """
    coeffs = kato_coeffs_upper(frame, conf)
    excess = _excess(coeffs, frame.fraction, conf, frame.n, +1)
    return min(float(frame.n), frame.lam + excess * math.sqrt(frame.n))


def expectation_lower(frame, conf):
    """
    L_e^ε(Λ) = Λ - (b₂ + a₂(2Λ/n - 1))√n, floored at 0.
    """
    coeffs = kato_coeffs_lower(frame, conf)
    excess = _excess(coeffs, frame.fraction, conf, frame.n, -1)
    return max(0., frame.lam - excess * math.sqrt(frame.n))


def _check_sum(expectation_sum, n, name):
    if n <= 0:
        raise DomainError('{}: trial count n = {} must be positive'.format(name, n))
    if not 0. <= expectation_sum <= n:
        raise DomainError(
            '{}: expectation sum {} lies outside [0, {}]'.format(name, expectation_sum, n))


def _observation_upper_once(expectation_sum, n, lam_hat, conf, min_denom=0.):
    coeffs = kato_coeffs_lower(TallyFrame(n, lam_hat), conf)
    rootn = math.sqrt(n)
    denom = 1. - 2. * coeffs.a / rootn
    if denom <= min_denom:
        return None
    offset = _excess(coeffs, 0., conf, n, -1)
    return (expectation_sum + offset * rootn) / denom


def _retry_points(expectation_sum, n):
    lam_hat = max(2. * expectation_sum, 1.)
    while lam_hat < n:
        yield lam_hat
        lam_hat *= 2.
    yield n


def observation_upper(expectation_sum, frame_n, conf):
    """
    U_m^ε: with probability at least 1 - ε the observed sum satisfies
    Λ <= (Σ E + (b₂ - a₂)√n)/(1 - 2a₂/√n).

    The coefficients need the unknown Λ; they are tuned at Λ̂ = Σ E and
    then once more at the resulting bound, and the larger of the two
    bounds is returned. Capped at n.

    Near Σ E = 0 the coefficients tuned at Λ̂ = Σ E make the denominator
    negative. The first pass then moves Λ̂ up a doubling ladder to the
    first point whose denominator is at least 1/2, and a pass with no
    positive denominator is dropped. If the ladder ends at n without a
    usable point the trivial bound n is returned.
    """
    _check_sum(expectation_sum, frame_n, 'observation_upper')
    n = float(frame_n)
    if conf.log_epsilon == 0.:
        return float(expectation_sum)
    if expectation_sum >= n:
        return n

    first = _observation_upper_once(expectation_sum, frame_n, expectation_sum, conf)
    if first is None:
        for lam_hat in _retry_points(expectation_sum, n):
            first = _observation_upper_once(expectation_sum, frame_n, lam_hat, conf, 0.5)
            if first is not None:
                break
        else:
            logger.debug('observation_upper: no usable coefficients for sum {} of {} trials, '
                         'returning n'.format(expectation_sum, frame_n))
            return n
    second = _observation_upper_once(expectation_sum, frame_n, min(max(first, 0.), n), conf)
    if second is None:
        return min(n, first)
    return min(n, max(first, second))


def _observation_lower_once(expectation_sum, n, lam_hat, conf):
    coeffs = kato_coeffs_upper(TallyFrame(n, lam_hat), conf)
    rootn = math.sqrt(n)
    denom = 1. + 2. * coeffs.a / rootn
    if denom <= 0.:
        return 0.
    offset = _excess(coeffs, 0., conf, n, +1)
    return (expectation_sum - offset * rootn) / denom


def observation_lower(expectation_sum, frame_n, conf):
    """
    L_m^ε: with probability at least 1 - ε,
    Λ >= (Σ E - (b₁ - a₁)√n)/(1 + 2a₁/√n). Floored at 0, with the
    coefficients chosen as in :func:`observation_upper` and the smaller
    bound kept.
    """
    _check_sum(expectation_sum, frame_n, 'observation_lower')
    if conf.log_epsilon == 0.:
        return float(expectation_sum)

    first = _observation_lower_once(expectation_sum, frame_n, expectation_sum, conf)
    lam_hat = min(max(first, 0.), float(frame_n))
    second = _observation_lower_once(expectation_sum, frame_n, lam_hat, conf)
    return max(0., min(first, second))


def chernoff_upper(mu_expect, conf):
    """
    Multiplicative Chernoff bound C_U^ε(µ) = (1 + δ)µ for a sum of
    independent {0, 1} variables with mean µ, where
    δ = (ℓ + √(ℓ² + 8µℓ))/(2µ) and ℓ = ln(1/ε).

    Written as µ + (ℓ + √(ℓ² + 8µℓ))/2, which is also the continuous
    limit ℓ at µ = 0.
    """
    if mu_expect < 0.:
        raise DomainError('chernoff_upper: mean {} is negative'.format(mu_expect))
    ell = conf.log_inverse
    return mu_expect + 0.5 * (ell + math.sqrt(ell * ell + 8. * mu_expect * ell))


def kato_coeffs_numeric(frame, conf, kind=UPPER):
    """
    Independent numerical solution of the coefficient optimisation.

    Eliminates b through the confidence constraint and minimises the
    objective b(a) + a(2Λ/n - 1) over a with a bounded Brent search.
    The objective is convex in a, so the minimum is unique. Intended for
    auditing the closed forms.

    Parameters
    ----------
    frame : TallyFrame
    conf : ConfidenceLevel
    kind : str
        'upper' for (a₁, b₁) or 'lower' for (a₂, b₂)

    Returns
    -------
    coeffs : KatoCoefficients
    """
    if kind not in (UPPER, LOWER):
        raise DomainError('kato_coeffs_numeric: unknown kind {!r}'.format(kind))
    L = conf.log_epsilon
    if L == 0.:
        return KatoCoefficients(0., 0.)

    sign = 1. if kind == UPPER else -1.
    n = float(frame.n)
    k = _slope(n)
    c = math.sqrt(-L / 2.)
    x = frame.fraction

    def objective(a):
        # b - |a| through b² - a² = c²(1 ± ka)², then |a| + a(2x - 1)
        scaled = c * (1. + sign * k * a)
        b = math.hypot(a, scaled)
        tail = 2. * a * x if a >= 0. else -2. * a * (1. - x)
        return scaled * scaled / (b + abs(a)) + tail

    half_width = 2. * math.sqrt(n) * (1. + math.sqrt(-L))
    res = minimize_scalar(objective, bounds=(-half_width, half_width), method='bounded',
                          options={'xatol': 1e-12 * half_width, 'maxiter': 5000})
    a = float(res.x)
    return KatoCoefficients(a, math.hypot(a, c * (1. + sign * k * a)))


def expectation_bounds(lams, n, conf):
    """
    Vectorised (L_e, U_e) for an array of observed sums over the same
    trial count. Returns two numpy arrays.
    """
    lams = np.asarray(lams, dtype=float)
    upper = np.array([expectation_upper(TallyFrame(n, lam), conf) for lam in lams.ravel()])
    lower = np.array([expectation_lower(TallyFrame(n, lam), conf) for lam in lams.ravel()])
    return lower.reshape(lams.shape), upper.reshape(lams.shape)
