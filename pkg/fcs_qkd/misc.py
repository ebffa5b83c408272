"""
Output helpers shared by the subcommands: CSV tables and JSON records,
both with floating point values at 12 significant digits.
"""
from __future__ import print_function, unicode_literals, absolute_import, division
import json
import math

import numpy as np
from astropy.io import ascii
from astropy.table import Table

FLOAT_FORMAT = '%.12g'


def round_sig(value):
    """Round a float to 12 significant digits; inf and nan become None"""
    value = float(value)
    if not math.isfinite(value):
        return None
    return float(FLOAT_FORMAT % value)


def sanitise(data):
    """
    Convert a nested structure of dicts, lists, tuples and numpy scalars
    into JSON-compatible python types with rounded floats.
    """
    if isinstance(data, dict):
        return {str(key): sanitise(value) for key, value in data.items()}
    if isinstance(data, (list, tuple)):
        return [sanitise(value) for value in data]
    if isinstance(data, (bool, np.bool_)):
        return bool(data)
    if isinstance(data, (int, np.integer)):
        return int(data)
    if isinstance(data, (float, np.floating)):
        return round_sig(data)
    return data


def dumpJSON(data, pretty=True):
    """
    Serialise a record. Pretty records are indented and sorted; the
    others fit on one line.
    """
    data = sanitise(data)
    if pretty:
        return json.dumps(data, sort_keys=True, indent=4, separators=(",", ": "))
    return json.dumps(data, sort_keys=True, separators=(", ", ": "))


def writeJSON(fd, data, pretty=True):
    fd.write(dumpJSON(data, pretty) + '\n')


def writeCSV(fd, names, rows):
    """
    Write rows as CSV with a header line. Float columns are written with
    12 significant digits. Nothing at all is written for an empty table.

    Parameters
    ----------
    fd : file-like
        open for writing text
    names : sequence of str
        column names, in output order
    rows : sequence of tuples
    """
    if not rows:
        return
    table = Table(rows=list(rows), names=list(names))
    formats = {name: FLOAT_FORMAT for name in names if table[name].dtype.kind == 'f'}
    ascii.write(table, output=fd, format='csv', formats=formats)
