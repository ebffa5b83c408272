# -*- coding: utf-8 -*-
from __future__ import print_function, unicode_literals, absolute_import, division
import cmath
import math

import numpy as np
import pytest

from fcs_qkd import DomainError, WindowError
from fcs_qkd.statemodel import (BlockState, IdealKernel, IntensityLeakKernel, PhaseLeakKernel,
                                block_states, coherent_overlap, context_codes, make_kernel,
                                p_minus_exact, p_minus_table, vacuum_bound_check,
                                vacuum_probability)


def random_kernel(gen, max_range=6):
    """A phase-leak or intensity-leak kernel with random ranges and coefficients"""
    r_total = gen.integers(0, max_range + 1)
    r1 = gen.integers(0, r_total + 1)
    r2 = r_total - r1
    mu = gen.uniform(0.01, 1.)
    if gen.random() < 0.5:
        return PhaseLeakKernel(mu, gen.uniform(-1., 1., r2), gen.uniform(-1., 1., r1))
    return IntensityLeakKernel(mu, gen.uniform(-0.5, 0.5, r2), gen.uniform(-0.5, 0.5, r1))


def test_kernel_ranges():
    kernel = PhaseLeakKernel(0.1, forward=(0.1, 0.2), backward=(0.3,))
    assert (kernel.r1, kernel.r2, kernel.r_total) == (1, 2, 3)
    assert IdealKernel(0.1).r_total == 0
    with pytest.raises(DomainError):
        IdealKernel(-0.1)


def test_make_kernel():
    kernel = make_kernel('intensity_leak', 0.2, forward=(0.1,))
    assert isinstance(kernel, IntensityLeakKernel)
    assert kernel.r2 == 1
    assert isinstance(make_kernel('ideal', 0.2), IdealKernel)
    with pytest.raises(DomainError):
        make_kernel('polarisation', 0.2)
    with pytest.raises(DomainError):
        make_kernel('ideal', 0.2, backward=(0.1,))


@pytest.mark.parametrize('kernel', [
    IdealKernel(0.3),
    PhaseLeakKernel(0.2, forward=(0.05, -0.2), backward=(0.4,)),
    IntensityLeakKernel(0.5, forward=(0.1,), backward=(-0.2, 0.3, 0.05)),
])
def test_finite_range(kernel, rng):
    # α_i depends on s_j for i - r2 <= j <= i + r1 only
    size = 24
    for _ in range(50):
        bits = rng.integers(0, 2, size=size)
        i = int(rng.integers(0, size))
        before = kernel.amplitudes(bits)[i]
        assert kernel.amplitude(bits, i) == pytest.approx(complex(before), abs=1e-15)
        for j in range(size):
            if i - kernel.r2 <= j <= i + kernel.r1:
                continue
            flipped = bits.copy()
            flipped[j] ^= 1
            assert kernel.amplitudes(flipped)[i] == before


def test_amplitude_window():
    with pytest.raises(WindowError):
        IdealKernel(0.1).amplitude([0, 1, 0], 3)


def test_intensity_leak_is_clipped_and_floored():
    kernel = IntensityLeakKernel(0.4, forward=(0.8,), backward=(0.7,))
    assert kernel.vacuum_floor == pytest.approx(math.exp(-0.4 * 2.5))
    intensities = kernel.intensities(np.array([0, 0, 0, 1, 1, 1]))
    assert intensities.min() >= 0.
    assert np.all(np.exp(-intensities) >= kernel.vacuum_floor * (1. - 1e-12))


def test_coherent_overlap_examples():
    alpha = 0.3 - 0.8j
    assert coherent_overlap(alpha, alpha) == pytest.approx(1., abs=1e-15)
    root = math.sqrt(0.1)
    assert coherent_overlap(root, -root) == pytest.approx(math.exp(-0.2), rel=1e-15)
    value = coherent_overlap(0.3 + 0.1j, -0.2j)
    assert abs(value) == pytest.approx(math.exp(-abs(0.3 + 0.3j) ** 2 / 2.), rel=1e-12)


def test_coherent_overlap_modulus(rng):
    for _ in range(2000):
        alpha, beta = rng.normal(0., 1.5, 2) + 1j * rng.normal(0., 1.5, 2)
        value = coherent_overlap(alpha, beta)
        assert abs(value) == pytest.approx(math.exp(-abs(alpha - beta) ** 2 / 2.), rel=1e-12, abs=1e-300)


def test_vacuum_probability():
    assert vacuum_probability(0.) == 1.
    assert vacuum_probability(math.sqrt(0.1)) == pytest.approx(math.exp(-0.1), rel=1e-15)
    amps = (0.1 + 0.2j, -0.4, 0.3j)
    block = BlockState(amps)
    assert len(block) == 3
    assert block.vacuum_probability == pytest.approx(
        np.prod([vacuum_probability(a) for a in amps]), rel=1e-15)


def test_block_states_ideal():
    block0, block1 = block_states(IdealKernel(0.1), [1], 0)
    root = math.sqrt(0.1)
    assert block0.amplitudes == pytest.approx((root,))
    assert block1.amplitudes == pytest.approx((-root,))


def test_block_states_zero_leak_matches_ideal():
    kernel = PhaseLeakKernel(0.1, forward=(0.,))
    block0, block1 = block_states(kernel, [0, 1, 1], 1)
    assert len(block0) == len(block1) == 2
    assert block0.amplitudes[1] == block1.amplitudes[1]
    assert p_minus_exact(kernel, [0, 1, 1], 1) == pytest.approx((1. - math.exp(-0.2)) / 2., rel=1e-12)


def test_block_states_phase_leak_neighbour():
    kernel = PhaseLeakKernel(0.1, forward=(0.05,))
    block0, block1 = block_states(kernel, [1, 0, 0], 1)
    # the neighbour picks up a phase of π·0.05 when the pivot flips
    ratio = block1.amplitudes[1] / block0.amplitudes[1]
    assert ratio == pytest.approx(cmath.exp(1j * math.pi * 0.05), abs=1e-14)


def test_block_states_window():
    kernel = PhaseLeakKernel(0.1, forward=(0.1,), backward=(0.1,))
    with pytest.raises(WindowError):
        block_states(kernel, [0, 1, 0, 1, 0], 1)
    with pytest.raises(WindowError):
        block_states(kernel, [0, 1, 0, 1, 0], 3)
    block_states(kernel, [0, 1, 0, 1, 0], 2)


@pytest.mark.parametrize('mu', [0.01, 0.1, 0.5])
def test_uncorrelated_closed_form(mu):
    assert p_minus_exact(IdealKernel(mu), [0], 0) == pytest.approx((1. - math.exp(-2. * mu)) / 2., rel=1e-12)


def test_pivot_independent_kernel():
    kernel = IdealKernel(0.)
    assert p_minus_exact(kernel, [1], 0) == 0.
    holds, slack = vacuum_bound_check(kernel, [1], 0, kernel.vacuum_floor)
    assert holds and slack == 0.


def test_vacuum_bound_example():
    holds, slack = vacuum_bound_check(IdealKernel(0.1), [0], 0, math.exp(-0.1))
    assert holds
    assert slack == pytest.approx((1. - math.exp(-0.1)) - (1. - math.exp(-0.2)) / 2., rel=1e-9)


def test_vacuum_bound_reports_wrong_floor(caplog):
    holds, slack = vacuum_bound_check(IdealKernel(0.5), [0], 0, 0.99)
    assert not holds and slack < 0.
    assert 'vacuum bound violated' in caplog.text
    with pytest.raises(DomainError):
        vacuum_bound_check(IdealKernel(0.5), [0], 0, 0.)


def test_vacuum_bound_random_kernels():
    gen = np.random.default_rng(4321)
    for _ in range(10**4):
        kernel = random_kernel(gen)
        reach = kernel.r_total
        context = gen.integers(0, 2, size=2 * reach + 1)
        p_minus = p_minus_exact(kernel, context, reach)
        holds, slack = vacuum_bound_check(kernel, context, reach, kernel.vacuum_floor)
        assert 0. <= p_minus <= 1.
        assert holds, (kernel, context, slack)


def test_p_minus_table_matches_exact(rng):
    kernel = PhaseLeakKernel(0.3, forward=(0.2,), backward=(-0.1,))
    table = p_minus_table(kernel)
    assert table.shape == (2 ** 4,)
    bits = rng.integers(0, 2, size=40)
    codes = context_codes(bits, kernel.r_total)
    assert codes.size == 40 - 2 * kernel.r_total
    for k, code in enumerate(codes):
        pivot = k + kernel.r_total
        assert table[code] == pytest.approx(p_minus_exact(kernel, bits, pivot), abs=1e-14)


def test_context_codes_window():
    with pytest.raises(WindowError):
        context_codes([0, 1, 0], 2)
