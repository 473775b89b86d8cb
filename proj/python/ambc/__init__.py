"""Pilot-based ambient backscatter over LTE: link simulator.

Configurations are plain dicts with the same schema as the JSON files the
``ambc`` command-line tool reads; missing keys take their defaults.
"""

import json

from . import _ambc
from ._ambc import (
    AmbcError,
    DATA_BITS,
    FRAME_BITS,
    SYNC_BITS,
    build_frame,
    calibrate_noise,
    correlation,
    default_payload,
    default_sync,
    m_sequence,
    selftest,
)

__all__ = [
    "AmbcError",
    "DATA_BITS",
    "FRAME_BITS",
    "SYNC_BITS",
    "build_frame",
    "calibrate_noise",
    "channel_estimates",
    "correlation",
    "default_config",
    "default_payload",
    "default_sync",
    "m_sequence",
    "run_point",
    "run_sweep",
    "selftest",
]


def _dump(config):
    return "" if config is None else json.dumps(config)


def default_config():
    return json.loads(_ambc.default_config_json())


def run_point(config=None, snr_db=None, noiseless=False, backscatter_ratio_db=None, traffic_duty=None):
    return _ambc.run_point(_dump(config), snr_db, noiseless, backscatter_ratio_db, traffic_duty)


def run_sweep(config, out_dir=""):
    return _ambc.run_sweep(_dump(config), str(out_dir))


def channel_estimates(config=None, snr_db=None, noiseless=False, backscatter_ratio_db=None,
                      traffic_duty=None, seed=1):
    return _ambc.channel_estimates(_dump(config), snr_db, noiseless, backscatter_ratio_db,
                                   traffic_duty, seed)
