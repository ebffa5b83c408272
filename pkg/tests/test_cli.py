# -*- coding: utf-8 -*-
from __future__ import print_function, unicode_literals, absolute_import, division
import io
import json
import textwrap

import pytest

from fcs_qkd.cli import COVERAGE_COLUMNS, SWEEP_COLUMNS, SweepSpec, cmd_sweep, main

SIM = """
[channel]
dark = 1e-8
e_mis = 0.02

[sim]
seed = 42
n_rounds = 20000
mu = 0.1
p_est = 0.2
attenuation_db = 5
"""

COVERAGE = """
[coverage]
bounds = U_m, C_U
sequences = iid, martingale
n = 200
eps = 0.05
trials = 200
seed = 3
"""


@pytest.fixture
def write_config(tmp_path):
    def write(text, name='run.cfg'):
        path = tmp_path / name
        path.write_text(textwrap.dedent(text))
        return str(path)
    return write


def run(capsys, *argv):
    status = main(list(argv))
    out, err = capsys.readouterr()
    return status, out, err


def csv_rows(out):
    lines = out.strip().splitlines()
    return lines[0].split(','), [line.split(',') for line in lines[1:]]


def test_point_with_reference_parameters(capsys):
    status, out, _ = run(capsys, 'point')
    assert status == 0
    record = json.loads(out)
    assert record['r_total'] == 100
    assert record['n_rounds'] == 10**14
    assert record['attenuation_db'] == 30.
    assert not record['optimized']
    assert 0. <= record['rate'] < 1.
    assert record['budget']['eps_tot'] == 1e-10


def test_point_without_light_has_no_key(capsys, write_config):
    fname = write_config("""
        [protocol]
        n_rounds = 1e10
        mu = 0
        p_est = 0.1
        """)
    status, out, _ = run(capsys, 'point', '--config', fname)
    assert status == 0
    record = json.loads(out)
    assert record['rate'] == 0.
    assert record['key_length'] == 0.


def test_point_optimized(capsys):
    status, out, _ = run(capsys, 'point', '--optimize', '--r-total', '0', '--attenuation-db', '20')
    assert status == 0
    record = json.loads(out)
    assert record['optimized']
    assert (record['r1'], record['r2']) == (0, 0)
    assert record['attenuation_db'] == 20.
    assert record['rate'] > 0.


def test_point_optimized_reports_ignored_floors(capsys, write_config):
    fname = write_config("""
        [protocol]
        r1 = 0
        r2 = 0
        p0a_floor = 0.5
        """)
    status, out, err = run(capsys, 'point', '--config', fname, '--optimize', '--attenuation-db', '20')
    assert status == 0
    assert 'ignoring [protocol] p0a_floor' in err
    record = json.loads(out)
    assert record['p0a_floor'] == pytest.approx(record['p0b_floor'])
    assert record['p0a_floor'] != 0.5


def test_sweep_empty_range_list(capsys, write_config):
    fname = write_config("""
        [sweep]
        range_list =
        """)
    status, out, _ = run(capsys, 'sweep', '--config', fname)
    assert status == 0
    assert out == ''


def test_sweep_step_beyond_span(capsys, write_config):
    fname = write_config("""
        [sweep]
        attenuation_start = 10
        attenuation_stop = 12
        attenuation_step = 5
        range_list = 0
        """)
    status, out, _ = run(capsys, 'sweep', '--config', fname)
    assert status == 0
    names, rows = csv_rows(out)
    assert names == list(SWEEP_COLUMNS)
    assert len(rows) == 1
    assert rows[0][:2] == ['0', '10']
    assert float(rows[0][-1]) > 0.


def test_sweep_range_override(capsys, write_config):
    fname = write_config("""
        [sweep]
        attenuation_start = 20
        attenuation_stop = 20
        attenuation_step = 1
        range_list = 0, 10, 100
        """)
    status, out, _ = run(capsys, 'sweep', '--config', fname, '--r-total', '4')
    assert status == 0
    _, rows = csv_rows(out)
    assert [row[0] for row in rows] == ['4']


def test_simulate_is_deterministic(capsys, write_config):
    fname = write_config(SIM)
    status, first, _ = run(capsys, 'simulate', '--config', fname)
    assert status == 0
    status, second, _ = run(capsys, 'simulate', '--config', fname)
    assert first == second
    assert len(first.strip().splitlines()) == 1
    summary = json.loads(first)
    assert summary['seed'] == 42
    assert summary['n_rounds'] == 20000
    assert summary['n_sifted'] == summary['n_sig'] > 0
    _, third, _ = run(capsys, 'simulate', '--config', fname, '--seed', '43')
    assert json.loads(third)['seed'] == 43
    assert third != first


def test_simulate_abort_is_not_an_error(capsys, write_config):
    fname = write_config(SIM.replace('mu = 0.1', 'mu = 0').replace('dark = 1e-8', 'dark = 0'))
    status, out, _ = run(capsys, 'simulate', '--config', fname)
    assert status == 0
    summary = json.loads(out)
    assert summary['n_sig'] == 0
    assert summary['aborted']


def test_coverage_rows(capsys, write_config):
    status, out, _ = run(capsys, 'coverage', '--config', write_config(COVERAGE))
    assert status == 0
    names, rows = csv_rows(out)
    assert names == list(COVERAGE_COLUMNS)
    # C_U runs on independent sequences only
    assert [row[0] for row in rows] == ['U_m', 'U_m', 'C_U']
    assert all(row[-1] == 'pass' for row in rows)


def test_coverage_too_few_trials(capsys, write_config):
    fname = write_config(COVERAGE.replace('trials = 200', 'trials = 0'))
    status, out, err = run(capsys, 'coverage', '--config', fname)
    assert status == 2
    assert out == ''
    assert 'line 7' in err
    assert 'trials' in err


def test_seed_overflow_is_a_numeric_failure(capsys, write_config):
    fname = write_config(COVERAGE.replace('eps = 0.05', 'eps = 0.05, 0.1'))
    status, _, err = run(capsys, 'coverage', '--config', fname, '--seed', str(2**64 - 1))
    assert status == 3
    assert 'DomainError' in err


def test_unknown_key(capsys, write_config):
    fname = write_config("""
        [channel]
        dark = 1e-10
        darkness = 3
        """)
    status, _, err = run(capsys, 'point', '--config', fname)
    assert status == 2
    assert 'line 4' in err
    assert 'darkness' in err


def test_unknown_section(capsys, write_config):
    fname = write_config("""
        [detector]
        dark = 1e-10
        """)
    status, _, err = run(capsys, 'point', '--config', fname)
    assert status == 2
    assert 'line 2' in err


def test_value_out_of_range(capsys, write_config):
    fname = write_config("""
        [channel]
        e_mis = 0.7
        """)
    status, _, err = run(capsys, 'point', '--config', fname)
    assert status == 2
    assert 'e_mis' in err


def test_unreadable_value(capsys, write_config):
    fname = write_config("""
        [sim]
        n_rounds = lots
        """)
    status, _, err = run(capsys, 'simulate', '--config', fname)
    assert status == 2
    assert 'line 3' in err


def test_missing_config_file(capsys, tmp_path):
    status, _, _ = run(capsys, 'point', '--config', str(tmp_path / 'absent.cfg'))
    assert status == 2


@pytest.mark.parametrize('argv', [[], ['frobnicate'], ['point', '--r-total', 'many']])
def test_usage_errors(capsys, argv):
    status, out, _ = run(capsys, *argv)
    assert status == 2
    assert out == ''


def test_output_and_log_files(capsys, tmp_path, write_config):
    output = tmp_path / 'summary.json'
    log = tmp_path / 'run.log'
    status, out, _ = run(capsys, 'simulate', '--config', write_config(SIM), '--output', str(output),
                         '--log', str(log))
    assert status == 0
    assert out == ''
    assert json.loads(output.read_text())['seed'] == 42
    text = log.read_text()
    assert 'DEBUG' in text
    assert 'simulated 20000 rounds' in text


def test_cutoff_attenuation_shrinks_with_range(g, device_channel):
    t = g.DEVICE
    spec = SweepSpec(0., 60., 6., [0, 10, 100, 500], device_channel(0.), t['n_rounds'], t['eps_tot'])
    rows = cmd_sweep(spec, io.StringIO())
    cutoffs = {}
    for r_total, attenuation, _, _, _, _, rate in rows:
        if rate > 0.:
            cutoffs[r_total] = max(attenuation, cutoffs.get(r_total, -1.))
    # every range keeps some key, the longest one included
    assert sorted(cutoffs) == [0, 10, 100, 500]
    assert cutoffs[500] >= 6.
    ordered = [cutoffs[r] for r in (0, 10, 100, 500)]
    assert all(b <= a for a, b in zip(ordered, ordered[1:]))
    assert cutoffs[0] > cutoffs[500]
