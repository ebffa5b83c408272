"""
Coherent-state models of correlated sources.

A correlation kernel maps Alice's (or Bob's) bit string to the coherent
amplitude emitted in every round. The bit of round i may influence the
states of rounds i - r1 to i + r2, so the amplitude of round i depends
on the bits of rounds i - r2 to i + r1 only.

Everything here is exact for product coherent states and is used to
check the vacuum-probability bound that the security analysis relies
on, and to drive the Monte Carlo simulator.
"""
from __future__ import print_function, unicode_literals, absolute_import, division
import cmath
import math
import logging
from collections import namedtuple

import numpy as np

from . import DomainError, WindowError

logger = logging.getLogger(__name__)


def _as_bits(bits):
    bits = np.asarray(bits)
    if bits.ndim < 1:
        raise DomainError('correlation kernel: bit string must be at least one-dimensional')
    return bits.astype(np.int8)


def _shifted(values, lag, fill=0.):
    """
    out[..., i] = values[..., i - lag], with ``fill`` where i - lag falls
    outside the string. Positive lags look back, negative lags forward.
    """
    out = np.full(values.shape, fill, dtype=float)
    size = values.shape[-1]
    if abs(lag) >= size:
        return out
    if lag > 0:
        out[..., lag:] = values[..., :size - lag]
    elif lag < 0:
        out[..., :size + lag] = values[..., -lag:]
    else:
        out[...] = values
    return out


class CorrelationKernel(object):
    """
    Base class for finite-range correlation kernels.

    Subclasses implement :meth:`amplitudes`, the vectorised map from bit
    strings to coherent amplitudes, and :attr:`vacuum_floor`, a lower
    bound on exp(-|α_i|²) valid for every string and round.

    Parameters
    ----------
    mu : float
        nominal intensity
    r1 : int
        backward range: the bit of round i reaches back to round i - r1
    r2 : int
        forward range: the bit of round i reaches forward to round i + r2
    """
    kind = None

    def __init__(self, mu, r1=0, r2=0):
        if mu < 0.:
            raise DomainError('{}: intensity {} is negative'.format(self.__class__.__name__, mu))
        if r1 < 0 or r2 < 0:
            raise DomainError('{}: correlation ranges ({}, {}) must be nonnegative'.format(
                self.__class__.__name__, r1, r2))
        self.mu = float(mu)
        self.r1 = int(r1)
        self.r2 = int(r2)

    @property
    def r_total(self):
        return self.r1 + self.r2

    @property
    def vacuum_floor(self):
        raise NotImplementedError

    def amplitudes(self, bits):
        """
        Coherent amplitudes of every round of ``bits``.

        Operates along the last axis, so a 2D array is a batch of
        strings. Rounds beyond either end of the string are absent and
        contribute nothing.
        """
        raise NotImplementedError

    def amplitude(self, bits, index):
        """Amplitude α_i(s) of one round"""
        bits = _as_bits(bits)
        if not 0 <= index < bits.shape[-1]:
            raise WindowError('{}.amplitude: round {} outside string of length {}'.format(
                self.__class__.__name__, index, bits.shape[-1]))
        lo = max(0, index - self.r2)
        hi = min(bits.shape[-1], index + self.r1 + 1)
        # the slice holds every bit that round index depends on
        return complex(self.amplitudes(bits[..., lo:hi])[..., index - lo])

    def __repr__(self):
        return '{}(mu={!r}, r1={}, r2={})'.format(self.__class__.__name__, self.mu, self.r1, self.r2)


class IdealKernel(CorrelationKernel):
    """
    Uncorrelated source, α_i = √µ exp(iπ s_i).
    """
    kind = 'ideal'

    def __init__(self, mu):
        super(IdealKernel, self).__init__(mu, 0, 0)

    @property
    def vacuum_floor(self):
        return math.exp(-self.mu)

    def amplitudes(self, bits):
        bits = _as_bits(bits)
        return math.sqrt(self.mu) * (1. - 2. * bits).astype(complex)


class PhaseLeakKernel(CorrelationKernel):
    """
    Phase modulation that leaks into neighbouring rounds:

        α_i = √µ exp(iπ(s_i + Σ_d f_d s_{i-d} + Σ_d b_d s_{i+d}))

    Parameters
    ----------
    mu : float
        intensity, unchanged by the leak
    forward : sequence of float
        f_1 ... f_{r2}, the share of bit i that reaches round i + d
    backward : sequence of float
        b_1 ... b_{r1}, the share of bit i that reaches round i - d
    """
    kind = 'phase_leak'

    def __init__(self, mu, forward=(), backward=()):
        self.forward = tuple(float(c) for c in forward)
        self.backward = tuple(float(c) for c in backward)
        super(PhaseLeakKernel, self).__init__(mu, len(self.backward), len(self.forward))

    @property
    def vacuum_floor(self):
        return math.exp(-self.mu)

    def phases(self, bits):
        """Phase of every round in units of π"""
        bits = _as_bits(bits).astype(float)
        phase = bits.copy()
        for lag, coeff in enumerate(self.forward, 1):
            phase += coeff * _shifted(bits, lag)
        for lag, coeff in enumerate(self.backward, 1):
            phase += coeff * _shifted(bits, -lag)
        return phase

    def amplitudes(self, bits):
        return math.sqrt(self.mu) * np.exp(1j * np.pi * self.phases(bits))


class IntensityLeakKernel(CorrelationKernel):
    """
    Intensity modulation driven by the neighbouring bits:

        |α_i|² = µ(1 + Σ_d f_d (2s_{i-d} - 1) + Σ_d b_d (2s_{i+d} - 1)),

    clipped at zero, with phase π s_i. Absent neighbours contribute 0.
    """
    kind = 'intensity_leak'

    def __init__(self, mu, forward=(), backward=()):
        self.forward = tuple(float(g) for g in forward)
        self.backward = tuple(float(g) for g in backward)
        super(IntensityLeakKernel, self).__init__(mu, len(self.backward), len(self.forward))

    @property
    def vacuum_floor(self):
        spread = sum(abs(g) for g in self.forward + self.backward)
        return math.exp(-self.mu * (1. + spread))

    def intensities(self, bits):
        bits = _as_bits(bits)
        signs = 2. * bits - 1.
        scale = np.ones(bits.shape, dtype=float)
        for lag, coeff in enumerate(self.forward, 1):
            scale += coeff * _shifted(signs, lag)
        for lag, coeff in enumerate(self.backward, 1):
            scale += coeff * _shifted(signs, -lag)
        return np.clip(self.mu * scale, 0., None)

    def amplitudes(self, bits):
        bits = _as_bits(bits)
        return np.sqrt(self.intensities(bits)) * (1. - 2. * bits)


KERNELS = {
    IdealKernel.kind: IdealKernel,
    PhaseLeakKernel.kind: PhaseLeakKernel,
    IntensityLeakKernel.kind: IntensityLeakKernel,
}


def make_kernel(kind, mu, forward=(), backward=()):
    """
    Build a kernel from its kind tag, as read from a configuration file.
    """
    try:
        cls = KERNELS[kind]
    except KeyError:
        raise DomainError('make_kernel: unknown kernel kind {!r}, expected one of {}'.format(
            kind, ', '.join(sorted(KERNELS))))
    if cls is IdealKernel:
        if forward or backward:
            raise DomainError('make_kernel: the ideal kernel takes no leak coefficients')
        return IdealKernel(mu)
    return cls(mu, forward, backward)


class BlockState(namedtuple('BlockState', ['amplitudes'])):
    """
    Product of coherent states over the r1 + r2 + 1 rounds whose states
    the pivot bit influences, ordered from round i - r1 to i + r2.
    """
    __slots__ = ()

    def __len__(self):
        return len(self.amplitudes)

    @property
    def vacuum_probability(self):
        return float(np.prod([vacuum_probability(a) for a in self.amplitudes]))


def coherent_overlap(alpha, beta):
    """
    Inner product <α|β> = exp(-|α|²/2 - |β|²/2 + conj(α) β)
    """
    alpha = complex(alpha)
    beta = complex(beta)
    return cmath.exp(-abs(alpha)**2 / 2. - abs(beta)**2 / 2. + alpha.conjugate() * beta)


def vacuum_probability(alpha):
    """|<0|α>|² = exp(-|α|²)"""
    return math.exp(-abs(complex(alpha))**2)


def block_states(kernel, context_bits, pivot_index):
    """
    The two block states of rounds pivot - r1 ... pivot + r2 with the pivot
    bit forced to 0 and to 1, every other bit taken from ``context_bits``.

    Raises
    ------
    WindowError
        if ``context_bits`` does not cover every bit the block depends on,
        pivot - (r1 + r2) to pivot + (r1 + r2)
    """
    bits = _as_bits(context_bits)
    if bits.ndim != 1:
        raise DomainError('block_states: context must be a single bit string')
    reach = kernel.r_total
    if pivot_index - reach < 0 or pivot_index + reach >= bits.size:
        raise WindowError(
            'block_states: dependence window [{}, {}] of pivot {} leaves a context of {} bits'.format(
                pivot_index - reach, pivot_index + reach, pivot_index, bits.size))

    window = bits[pivot_index - reach:pivot_index + reach + 1].copy()
    blocks = []
    for value in (0, 1):
        window[reach] = value
        amps = kernel.amplitudes(window)
        blocks.append(BlockState(tuple(complex(a) for a in amps[reach - kernel.r1:reach + kernel.r2 + 1])))
    return blocks[0], blocks[1]


def p_minus_exact(kernel, context_bits, pivot_index):
    """
    Probability of projecting the pivot ancilla on |->,

        P⁻ = ||φ₀ - φ₁||²/4 = (1 - Re Π_k <φ₀ᵏ|φ₁ᵏ>)/2.
    """
    block0, block1 = block_states(kernel, context_bits, pivot_index)
    product = 1. + 0j
    for alpha, beta in zip(block0.amplitudes, block1.amplitudes):
        product *= coherent_overlap(alpha, beta)
    return min(1., max(0., 0.5 * (1. - product.real)))


def vacuum_bound_check(kernel, context_bits, pivot_index, p0_floor):
    """
    Check P⁻ <= 1 - P₀^(r1 + r2 + 1) for a declared vacuum floor P₀.

    A violation means the declared floor is wrong for this kernel.

    Returns
    -------
    holds : bool
    slack : float
        1 - P₀^(r1 + r2 + 1) - P⁻, negative on violation
    """
    if not 0. < p0_floor <= 1.:
        raise DomainError('vacuum_bound_check: floor {} outside (0, 1]'.format(p0_floor))
    p_minus = p_minus_exact(kernel, context_bits, pivot_index)
    bound = -math.expm1((kernel.r_total + 1) * math.log(p0_floor))
    slack = bound - p_minus
    holds = slack >= 0.
    if not holds:
        logger.warning('vacuum bound violated by {!r} at pivot {}: P- = {:.6g} > {:.6g}'.format(
            kernel, pivot_index, p_minus, bound))
    return holds, slack


def _context_offsets(reach):
    return [off for off in range(-reach, reach + 1) if off != 0]


def p_minus_table(kernel):
    """
    P⁻ for every configuration of the 2(r1 + r2) bits around the pivot.

    Entry ``code`` corresponds to the context whose j-th bit, in the order
    of offsets -(r1 + r2) ... -1, 1 ... r1 + r2, is ``(code >> j) & 1``;
    see :func:`context_codes`.
    """
    reach = kernel.r_total
    offsets = _context_offsets(reach)
    codes = np.arange(2**len(offsets), dtype=np.int64)
    windows = np.zeros((codes.size, 2 * reach + 1), dtype=np.int8)
    for j, off in enumerate(offsets):
        windows[:, reach + off] = (codes >> j) & 1

    block = slice(reach - kernel.r1, reach + kernel.r2 + 1)
    windows[:, reach] = 0
    amps0 = kernel.amplitudes(windows)[:, block]
    windows[:, reach] = 1
    amps1 = kernel.amplitudes(windows)[:, block]

    log_overlap = (-np.abs(amps0)**2 / 2. - np.abs(amps1)**2 / 2. + np.conj(amps0) * amps1).sum(axis=1)
    return np.clip(0.5 * (1. - np.exp(log_overlap).real), 0., 1.)


def context_codes(bits, reach):
    """
    Table indices of :func:`p_minus_table` for every pivot whose
    dependence window lies inside ``bits``, i.e. pivots reach ...
    len(bits) - reach - 1.
    """
    bits = _as_bits(bits).astype(np.int64)
    size = bits.size - 2 * reach
    if size <= 0:
        raise WindowError('context_codes: {} bits cannot hold a window of reach {}'.format(bits.size, reach))
    codes = np.zeros(size, dtype=np.int64)
    for j, off in enumerate(_context_offsets(reach)):
        codes |= bits[reach + off:reach + off + size] << j
    return codes
