"""
Command log of the fcsqkd script.

Messages go to stderr, and optionally to a file, so that CSV and JSON
results on stdout stay clean. Timestamps are UTC.
"""
from __future__ import print_function, unicode_literals, absolute_import, division
import logging
import time
import sys

RECORD_FORMAT = '%(asctime)s %(name)s %(levelname)-7s %(message)s'


def _utc_formatter(datefmt, suffix=''):
    logging.Formatter.converter = time.gmtime
    return logging.Formatter(RECORD_FORMAT + suffix, datefmt)


class FileHandler(logging.FileHandler):
    """
    Appends every record, DEBUG included, with full dates to a log file
    """
    def __init__(self, fname):
        logging.FileHandler.__init__(self, fname)
        self.setFormatter(_utc_formatter('%Y-%m-%d %H:%M:%S'))
        self.setLevel(logging.DEBUG)


class StreamHandler(logging.StreamHandler):
    """
    Writes records to whatever sys.stderr is at the time of the call,
    with times of day only.
    """
    def __init__(self, level=logging.INFO):
        logging.StreamHandler.__init__(self)
        self.setFormatter(_utc_formatter('%H:%M:%S', '\n'))
        self.setLevel(level)

    def emit(self, record):
        sys.stderr.write(self.format(record))


class Logger(object):
    """
    The named logger of a command run.

    The package modules log through ``logging.getLogger(__name__)``. As
    children of ``fcs_qkd`` their records reach the handlers attached
    here while the Logger is open.

    Parameters
    ----------
    logname : str
        name of the logger, normally the package name
    verbose : bool
        show DEBUG records on stderr too
    """

    def __init__(self, logname, verbose=False):
        self._log = logging.getLogger(logname)
        self._log.setLevel(logging.DEBUG)
        self._log.propagate = False

        # a second Logger of the same name takes over
        self._detach()
        self._log.addHandler(StreamHandler(logging.DEBUG if verbose else logging.INFO))

    def _detach(self):
        for handler in list(self._log.handlers):
            self._log.removeHandler(handler)
            handler.close()

    def to_file(self, fname):
        """Also log to fname, DEBUG records included"""
        self._log.addHandler(FileHandler(fname))

    def close(self):
        """
        Closes the handlers and hands records back to the root logger
        """
        self._detach()
        self._log.propagate = True

    def debug(self, message):
        self._log.debug(message)

    def info(self, message):
        self._log.info(message)

    def warn(self, message):
        self._log.warning(message)

    def error(self, message):
        self._log.error(message)
