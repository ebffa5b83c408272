# -*- coding: utf-8 -*-
from __future__ import print_function, unicode_literals, absolute_import, division
import math

import numpy as np
import pytest

from fcs_qkd import DomainError
from fcs_qkd.channel import ChannelParams
from fcs_qkd.security import ProtocolParams
from fcs_qkd.simulator import (BLOCK, SequenceSpec, SimConfig, block_generator, coverage_experiment,
                               coverage_tolerance, draw_rounds, minus_minus_experiment, run_protocol)
from fcs_qkd.statemodel import IdealKernel, PhaseLeakKernel


def uniforms(gen, size):
    return gen.random(size)


def config(n_rounds, channel, mu=0.1, p_est=0.1, kernels=None, **kwargs):
    kernel_a, kernel_b = kernels or (IdealKernel(mu), IdealKernel(mu))
    protocol = ProtocolParams.ideal(n_rounds, mu, p_est)
    return SimConfig(kwargs.pop('seed', 7), n_rounds, kernel_a, kernel_b, channel, protocol, **kwargs)


def test_block_generator_is_deterministic():
    first = block_generator(11, 3, 2).random(5)
    assert np.array_equal(first, block_generator(11, 3, 2).random(5))
    assert not np.array_equal(first, block_generator(11, 3, 1).random(5))
    assert not np.array_equal(first, block_generator(11, 4, 2).random(5))
    assert not np.array_equal(first, block_generator(12, 3, 2).random(5))
    with pytest.raises(DomainError):
        block_generator(-1, 0, 0)
    with pytest.raises(DomainError):
        block_generator(2**64, 0, 0)


def test_draw_rounds_slices():
    whole = draw_rounds(5, 2, 0, 3 * BLOCK, uniforms)
    assert whole.size == 3 * BLOCK
    for start, stop in [(0, 10), (BLOCK - 3, BLOCK + 4), (17, 2 * BLOCK + 5), (2 * BLOCK, 3 * BLOCK)]:
        assert np.array_equal(draw_rounds(5, 2, start, stop, uniforms), whole[start:stop])
    assert draw_rounds(5, 2, 10, 10, uniforms).size == 0


def test_sim_config_validation(device_channel):
    with pytest.raises(DomainError):
        config(0, device_channel())
    with pytest.raises(DomainError):
        config(10, device_channel(), chunk_size=0)
    with pytest.raises(DomainError):
        config(10, device_channel(), seed=-4)


def test_chunking_does_not_change_the_run():
    kernels = (PhaseLeakKernel(0.2, forward=(0.1,), backward=(-0.2,)),
               PhaseLeakKernel(0.2, forward=(0.05, 0.1)))
    channel = ChannelParams(3., dark=1e-4, e_mis=0.02)
    small = run_protocol(config(5000, channel, mu=0.2, kernels=kernels, chunk_size=1000))
    large = run_protocol(config(5000, channel, mu=0.2, kernels=kernels))
    odd = run_protocol(config(5000, channel, mu=0.2, kernels=kernels, chunk_size=777))
    for other in (large, odd):
        assert small.tallies == other.tallies
        assert small.n_est == other.n_est
        assert np.array_equal(small.sifted_alice, other.sifted_alice)
        assert np.array_equal(small.sifted_bob, other.sifted_bob)


def test_same_seed_same_run(device_channel):
    first = run_protocol(config(20000, device_channel(5.)))
    second = run_protocol(config(20000, device_channel(5.)))
    assert first.summary() == second.summary()
    assert first.tallies != run_protocol(config(20000, device_channel(5.), seed=8)).tallies


def test_perfect_channel_gives_identical_keys():
    result = run_protocol(config(20000, ChannelParams(0., dark=0., e_mis=0.)))
    assert result.tallies.n_est_bit == 0
    assert result.sifted_errors == 0
    alice, bob = result.sifted_bits()
    assert np.array_equal(alice, bob)
    assert result.n_sifted == result.tallies.n_sig > 0


def test_no_light_no_clicks():
    result = run_protocol(config(5000, ChannelParams(0., dark=0.), mu=0.))
    assert result.tallies.n_sig == 0
    assert result.n_est == 0
    assert result.n_sifted == 0
    assert result.aborted
    assert result.z_scores['n_sig'] == 0.


def test_tallies_agree_with_expectations(device_channel):
    result = run_protocol(config(10**6, device_channel(10.), mu=0.1, p_est=0.1))
    for name, z in result.z_scores.items():
        assert abs(z) <= 5., name
    assert result.n_sifted == result.tallies.n_sig
    assert result.tallies.n_sig + result.n_est == result.n_single
    assert result.n_double > 0
    assert result.sifted_errors > 0
    summary = result.summary()
    assert summary['n_sig'] == result.tallies.n_sig
    assert summary['aborted'] == result.aborted
    assert summary['n_single'] == result.n_single


def test_explicit_thresholds(device_channel):
    result = run_protocol(config(10**4, device_channel(10.), n_sig_tol=10**5, n_est_tol=10**5))
    assert result.tallies.n_sig_tol == 10**5
    assert result.aborted


def test_coverage_tolerance():
    assert coverage_tolerance(0.05, 2000) == pytest.approx(0.05 + 3. * math.sqrt(0.05 * 0.95 / 2000.))
    assert coverage_tolerance(1., 100) == 1.


@pytest.mark.parametrize('bound_kind', ['U_e', 'L_e', 'U_m', 'L_m'])
def test_kato_coverage_iid(bound_kind):
    fraction = coverage_experiment(bound_kind, SequenceSpec('iid', p=0.3), 10**4, 0.05, 2000, 3)
    assert 0. <= fraction <= coverage_tolerance(0.05, 2000)


@pytest.mark.parametrize('bound_kind', ['U_e', 'L_e', 'U_m', 'L_m'])
def test_kato_coverage_martingale(bound_kind):
    spec = SequenceSpec('martingale', base=0.2, slope=0.3)
    fraction = coverage_experiment(bound_kind, spec, 1000, 0.05, 2000, 4)
    assert fraction <= coverage_tolerance(0.05, 2000)


@pytest.mark.parametrize('eps', [0.01, 0.05])
def test_chernoff_coverage(eps):
    fraction = coverage_experiment('C_U', SequenceSpec('iid', p=0.1), 1000, eps, 2000, 5)
    assert fraction <= coverage_tolerance(eps, 2000)


def test_coverage_is_reproducible():
    spec = SequenceSpec('iid', p=0.5)
    first = coverage_experiment('U_m', spec, 500, 0.2, 500, 9)
    assert first == coverage_experiment('U_m', spec, 500, 0.2, 500, 9)


def test_coverage_errors():
    with pytest.raises(DomainError):
        coverage_experiment('U_e', SequenceSpec(), 100, 0.05, 99, 1)
    with pytest.raises(DomainError):
        coverage_experiment('C_U', SequenceSpec('martingale'), 100, 0.05, 200, 1)
    with pytest.raises(DomainError):
        coverage_experiment('U_x', SequenceSpec(), 100, 0.05, 200, 1)
    with pytest.raises(DomainError):
        SequenceSpec('martingale', base=0.8, slope=0.3)


def test_martingale_sample_expectations():
    spec = SequenceSpec('martingale', base=0.1, slope=0.5)
    ones, expect = spec.sample(200, 300, np.random.default_rng(2))
    assert ones.shape == expect.shape == (300,)
    assert np.all(expect >= 0.1 * 200)
    assert np.all(expect <= 0.6 * 200)
    # conditional expectations follow the realised prefixes
    assert np.std(expect) > 0.


@pytest.mark.parametrize('kernels, r1, r2', [
    ((IdealKernel(0.1), IdealKernel(0.1)), 0, 0),
    ((PhaseLeakKernel(0.1, forward=(0.2,), backward=(0.1,)),
      PhaseLeakKernel(0.1, forward=(-0.1,), backward=(0.3,))), 1, 1),
])
def test_minus_minus_bound_holds(kernels, r1, r2):
    protocol = ProtocolParams.ideal(10**4, 0.1, 0.1, r1, r2)
    result = minus_minus_experiment(kernels[0], kernels[1], protocol, 1000, 21)
    assert result.counts.size == 1000
    assert result.passed
    assert result.exceedance <= result.allowed


def test_minus_minus_mean_uncorrelated():
    protocol = ProtocolParams.ideal(10**5, 0.1, 0.1)
    result = minus_minus_experiment(IdealKernel(0.1), IdealKernel(0.1), protocol, 200, 13)
    expected = 10**5 * 0.9 * ((1. - math.exp(-0.2)) / 2.) ** 2
    assert expected == pytest.approx(739.2, abs=0.2)
    assert result.mean == pytest.approx(expected, abs=10.)
    assert result.bound > expected


def test_minus_minus_without_light():
    protocol = ProtocolParams.ideal(1000, 0., 0.1)
    result = minus_minus_experiment(IdealKernel(0.), IdealKernel(0.), protocol, 100, 1)
    assert not result.counts.any()
    assert result.passed


def test_minus_minus_errors():
    with pytest.raises(DomainError):
        minus_minus_experiment(IdealKernel(0.1), IdealKernel(0.1),
                               ProtocolParams.ideal(100, 0.1, 0.1, 5, 4), 10, 1)
    with pytest.raises(DomainError):
        minus_minus_experiment(PhaseLeakKernel(0.1, forward=(0.1, 0.1)), IdealKernel(0.1),
                               ProtocolParams.ideal(100, 0.1, 0.1, 0, 1), 10, 1)
    with pytest.raises(DomainError):
        minus_minus_experiment(IdealKernel(0.1), IdealKernel(0.1), ProtocolParams.ideal(100, 0.1, 0.1), 0, 1)
