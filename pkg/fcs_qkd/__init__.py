# -*- coding: utf-8 -*-
from __future__ import print_function, unicode_literals, absolute_import, division

__author__ = """FCS-QKD developers"""
__email__ = 'fcs-qkd@users.noreply.github.com'
__version__ = '0.3.0'


class FcsError(Exception):
    pass


class ConfigError(FcsError):
    """
    Raised when a configuration file or command-line override is invalid.
    Messages carry the file name and line number where one is known.
    """
    pass


class DomainError(FcsError, ValueError):
    pass


class DegenerateChannelError(DomainError):
    """
    The channel never produces a successful click, so rates and error
    fractions are undefined.
    """
    pass


class WindowError(FcsError, IndexError):
    pass
