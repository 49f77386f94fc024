"""Decibel and unit helpers shared across modules."""
import re

import numpy as np
from scipy import constants

C0 = constants.c
MU0 = constants.mu_0
K_B = constants.k

# Np -> dB for wave quantities, 20/ln(10) = 8.685889638...
NP_TO_DB = 20 / np.log(10)


def db10(x):
    return 10 * np.log10(x)


def db20(x):
    return 20 * np.log10(np.abs(x))


def from_db10(x_db):
    return 10 ** (np.asarray(x_db, dtype=float) / 10)


def from_db20(x_db):
    return 10 ** (np.asarray(x_db, dtype=float) / 20)


def dbm_to_w(p_dbm):
    return from_db10(p_dbm) * 1e-3


def w_to_dbm(p_w):
    return db10(p_w) + 30


_PREFIX = {
    "f": 1e-15, "p": 1e-12, "n": 1e-9, "u": 1e-6, "µ": 1e-6, "m": 1e-3,
    "": 1.0, "k": 1e3, "M": 1e6, "G": 1e9, "T": 1e12,
}
_QTY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([fpnuµmkMGT]?)(\w*)\s*$")


def parse_quantity(text, unit):
    """Parse ``"300um"``, ``"1 ps"``, ``"140GHz"`` or a bare SI number.

    ``unit`` is the base unit symbol expected after the prefix (``"m"``,
    ``"s"``, ``"Hz"``, ``"F"``, ``"ohm"``). A bare number is taken as SI.
    """
    m = _QTY.match(str(text))
    if not m:
        raise ValueError(f"cannot parse quantity {text!r}")
    value, prefix, suffix = m.groups()
    if suffix == "" and prefix in ("m",) and unit == "m":
        # "5m" means five metres, not five milli-<nothing>
        prefix, suffix = "", "m"
    if suffix and suffix.lower() != unit.lower():
        raise ValueError(f"expected a value in {unit}, got {text!r}")
    if not suffix and prefix:
        raise ValueError(f"missing unit in {text!r} (expected {unit})")
    return float(value) * _PREFIX[prefix]
