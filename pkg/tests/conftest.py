# -*- coding: utf-8 -*-
from __future__ import print_function, unicode_literals, absolute_import, division

import numpy as np
import pytest

from fcs_qkd.channel import ChannelParams
from fcs_qkd.globals import Container


@pytest.fixture
def g():
    return Container()


@pytest.fixture
def device_channel(g):
    """Device parameters of the reference simulation at a given attenuation"""
    def channel(attenuation_db=30.):
        t = g.DEVICE
        return ChannelParams(attenuation_db, t['dark'], t['e_mis'], t['f_ec'])
    return channel


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
