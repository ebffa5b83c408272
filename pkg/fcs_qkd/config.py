"""
Configuration files.

A configuration is a flat ``key = value`` file with ``[section]``
headers::

    [protocol]
    n_rounds = 100000000000000
    r_total = 100

    [channel]
    attenuation_db = 30
    dark = 1e-10

Sections and keys are checked against SCHEMA; every error names the file
and line at fault. Values set from the command line replace file values
and are reported as such.
"""
from __future__ import print_function, unicode_literals, absolute_import, division
import configparser
import math
import re
from importlib import resources as importlib_resources

from . import ConfigError, DomainError
from .channel import ChannelParams
from .security import ProtocolParams
from .statemodel import make_kernel


def _text(value):
    return value.strip()


def _float(value):
    return float(value)


def _int(value):
    # accepts 100000 as well as 1e5
    try:
        return int(value)
    except ValueError:
        number = float(value)
        if not number.is_integer():
            raise ValueError('not an integer')
        return int(number)


def _bool(value):
    lowered = value.strip().lower()
    if lowered in ('1', 'yes', 'true', 'on'):
        return True
    if lowered in ('0', 'no', 'false', 'off'):
        return False
    raise ValueError('not a boolean')


def _list(convert):
    def parse(value):
        return tuple(convert(item.strip()) for item in value.split(',') if item.strip())
    return parse


_KERNEL = {'kind': _text, 'mu': _float, 'forward': _list(_float), 'backward': _list(_float)}

SCHEMA = {
    'protocol': {'n_rounds': _int, 'mu': _float, 'p_est': _float, 'r_total': _int,
                 'r1': _int, 'r2': _int, 'eps_tot': _float, 'optimize': _bool,
                 'p0a_floor': _float, 'p0b_floor': _float},
    'channel': {'attenuation_db': _float, 'dark': _float, 'e_mis': _float, 'f_ec': _float},
    'kernel_a': _KERNEL,
    'kernel_b': _KERNEL,
    'sweep': {'attenuation_start': _float, 'attenuation_stop': _float,
              'attenuation_step': _float, 'range_list': _list(_int), 'jobs': _int},
    'sim': {'seed': _int, 'n_rounds': _int, 'mu': _float, 'p_est': _float,
            'attenuation_db': _float, 'n_sig_tol': _int, 'n_est_tol': _int, 'chunk_size': _int},
    'coverage': {'bounds': _list(_text), 'sequences': _list(_text), 'n': _int,
                 'eps': _list(_float), 'p': _float, 'base': _float, 'slope': _float,
                 'trials': _int, 'seed': _int},
}

DEFAULT_CONFIG = 'reference.cfg'

_HEADER = re.compile(r'^\s*\[([^\]]+)\]')


class ConfigFile(object):
    """
    Typed contents of a configuration file.

    Parameters
    ----------
    text : str
        file contents
    fname : str
        name used in error messages
    """

    def __init__(self, text, fname='<config>'):
        self.fname = fname
        self._lines = text.splitlines()
        self._overrides = set()
        parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=('#', ';'),
                                           empty_lines_in_values=False)
        parser.optionxform = str
        try:
            parser.read_string(text, source=fname)
        except configparser.Error as err:
            raise ConfigError('{}: line {}: {}'.format(fname, _error_line(err), _error_text(err)))

        self.values = {}
        for section in parser.sections():
            if section not in SCHEMA:
                raise ConfigError('{}: line {}: unknown section [{}], expected one of {}'.format(
                    fname, self.line_of(section), section, ', '.join(sorted(SCHEMA))))
            self.values[section] = {}
            for key, raw in parser.items(section):
                if key not in SCHEMA[section]:
                    raise ConfigError('{}: line {}: unknown key {!r} in [{}]'.format(
                        fname, self.line_of(section, key), key, section))
                try:
                    self.values[section][key] = SCHEMA[section][key](raw)
                except ValueError:
                    raise ConfigError('{}: line {}: cannot read {} = {!r}'.format(
                        fname, self.line_of(section, key), key, raw))

    @classmethod
    def from_file(cls, fname):
        try:
            with open(fname) as fd:
                text = fd.read()
        except (IOError, OSError) as err:
            raise ConfigError('cannot read configuration file {}: {}'.format(fname, err))
        return cls(text, fname)

    @classmethod
    def default(cls):
        """The configuration shipped with the package"""
        text = (importlib_resources.files('fcs_qkd') / 'data' / DEFAULT_CONFIG).read_text()
        return cls(text, DEFAULT_CONFIG)

    def line_of(self, section, key=None):
        """1-based line holding a section header, or a key within a section"""
        current = None
        pattern = re.compile(r'^\s*{}\s*[=:]'.format(re.escape(key))) if key else None
        for number, line in enumerate(self._lines, 1):
            match = _HEADER.match(line)
            if match:
                current = match.group(1).strip()
                if key is None and current == section:
                    return number
            elif pattern is not None and current == section and pattern.match(line):
                return number
        return None

    def where(self, section, key):
        if (section, key) in self._overrides:
            return 'command line'
        line = self.line_of(section, key)
        if line is None:
            return '{}: [{}]'.format(self.fname, section)
        return '{}: line {}'.format(self.fname, line)

    def error(self, section, key, message):
        """ConfigError located at a key"""
        return ConfigError('{}: {} = {}: {}'.format(self.where(section, key), key,
                                                     self.get(section, key), message))

    def has(self, section, key):
        return key in self.values.get(section, {})

    def get(self, section, key, default=None):
        return self.values.get(section, {}).get(key, default)

    def remove(self, section, key):
        self.values.get(section, {}).pop(key, None)

    def overridden(self, section, key):
        return (section, key) in self._overrides

    def set(self, section, key, value):
        """Override a value from the command line"""
        self.values.setdefault(section, {})[key] = value
        self._overrides.add((section, key))


def _error_line(err):
    if getattr(err, 'lineno', None) is not None:
        return err.lineno
    errors = getattr(err, 'errors', None)
    if errors:
        return errors[0][0]
    return '?'


def _error_text(err):
    message = getattr(err, 'message', str(err))
    return message.splitlines()[0]


def ranges(g, section='protocol'):
    """(r1, r2) from explicit ranges or from r_total, split as evenly as possible"""
    cfg = g.cpars
    r_total = cfg.get(section, 'r_total', 0)
    if r_total < 0:
        raise cfg.error(section, 'r_total', 'must be nonnegative')
    r1 = cfg.get(section, 'r1', r_total // 2)
    r2 = cfg.get(section, 'r2', r_total - r1)
    for key, value in (('r1', r1), ('r2', r2)):
        if value < 0:
            raise cfg.error(section, key, 'must be nonnegative')
    return r1, r2


def check(cfg, section, key, value, lo=None, hi=None, lo_open=False, hi_open=False):
    if lo is not None and (value < lo or (lo_open and value == lo)):
        raise cfg.error(section, key, 'must be {} {}'.format('>' if lo_open else '>=', lo))
    if hi is not None and (value > hi or (hi_open and value == hi)):
        raise cfg.error(section, key, 'must be {} {}'.format('<' if hi_open else '<=', hi))
    return value


def channel_params(g, attenuation_db=None):
    """ChannelParams from the [channel] section"""
    cfg = g.cpars
    table = g.DEVICE
    if attenuation_db is None:
        attenuation_db = check(cfg, 'channel', 'attenuation_db',
                                cfg.get('channel', 'attenuation_db', 0.), lo=0.)
    dark = check(cfg, 'channel', 'dark', cfg.get('channel', 'dark', table['dark']), 0., 1.)
    e_mis = check(cfg, 'channel', 'e_mis', cfg.get('channel', 'e_mis', table['e_mis']), 0., 0.5)
    f_ec = check(cfg, 'channel', 'f_ec', cfg.get('channel', 'f_ec', table['f_ec']), lo=1.)
    return ChannelParams(attenuation_db, dark, e_mis, f_ec)


def protocol_params(g, section='protocol', n_rounds=None, mu=None, p_est=None):
    """
    ProtocolParams from a section. Vacuum floors default to exp(-mu),
    the ideal coherent-state value, unless given explicitly.
    """
    cfg = g.cpars
    table = g.DEVICE
    if n_rounds is None:
        n_rounds = check(cfg, section, 'n_rounds', cfg.get(section, 'n_rounds', table['n_rounds']), lo=1)
    if mu is None:
        mu = check(cfg, section, 'mu', cfg.get(section, 'mu', 0.05), lo=0.)
    if p_est is None:
        p_est = check(cfg, section, 'p_est', cfg.get(section, 'p_est', 0.1), 0., 1., True, True)
    eps_tot = check(cfg, 'protocol', 'eps_tot', cfg.get('protocol', 'eps_tot', table['eps_tot']),
                     0., 1., True, True)
    r1, r2 = ranges(g)
    floor = math.exp(-mu)
    floors = []
    for key in ('p0a_floor', 'p0b_floor'):
        floors.append(check(cfg, 'protocol', key, cfg.get('protocol', key, floor), 0., 1., lo_open=True))
    try:
        return ProtocolParams(n_rounds, mu, p_est, r1, r2, floors[0], floors[1], eps_tot)
    except DomainError as err:
        raise ConfigError('{}: [{}]: {}'.format(cfg.fname, section, err))


def kernel(g, section, mu):
    """Correlation kernel from a [kernel_a] or [kernel_b] section"""
    cfg = g.cpars
    kind = cfg.get(section, 'kind', 'ideal')
    kernel_mu = check(cfg, section, 'mu', cfg.get(section, 'mu', mu), lo=0.)
    try:
        return make_kernel(kind, kernel_mu, cfg.get(section, 'forward', ()), cfg.get(section, 'backward', ()))
    except DomainError as err:
        raise cfg.error(section, 'kind', str(err))
