"""Touchstone v1 reader and writer for one- and two-port S-parameter files.

Two-port data lines are ordered ``f S11 S21 S12 S22``. That is the v1
convention and differs from matrix row order (S11 S12 S21 S22); it is the
most common source of silently transposed data. Angles in files are degrees.
"""
from __future__ import annotations

import io
import os
from dataclasses import dataclass, replace

import numpy as np

from .netcore import FrequencyGrid, NetworkError, OnePortNetwork, TwoPortNetwork

__all__ = [
    "TouchstoneOptions",
    "TouchstoneError",
    "parse_touchstone",
    "write_touchstone",
    "read_touchstone",
    "save_touchstone",
]

FREQ_UNITS = {"HZ": 1.0, "KHZ": 1e3, "MHZ": 1e6, "GHZ": 1e9}
_UNIT_NAMES = {"HZ": "Hz", "KHZ": "kHz", "MHZ": "MHz", "GHZ": "GHz"}
FORMATS = ("RI", "MA", "DB")
# file column -> (row, col) of the S-matrix
_TWO_PORT_ORDER = ((0, 0), (1, 0), (0, 1), (1, 1))
_DIGITS = 12


class TouchstoneError(ValueError):
    """Malformed Touchstone content; ``lineno`` is 1-based when known."""

    def __init__(self, message, lineno=None):
        where = f"line {lineno}: " if lineno is not None else ""
        super().__init__(where + message)
        self.lineno = lineno


@dataclass(frozen=True)
class TouchstoneOptions:
    freq_unit: str = "GHz"
    parameter: str = "S"
    format: str = "MA"
    resistance: float = 50.0

    def __post_init__(self):
        unit = self.freq_unit.upper()
        if unit not in FREQ_UNITS:
            raise TouchstoneError(f"unknown frequency unit {self.freq_unit!r}")
        if self.parameter.upper() != "S":
            raise TouchstoneError(f"only S-parameters are supported, got {self.parameter!r}")
        if self.format.upper() not in FORMATS:
            raise TouchstoneError(f"unknown data format {self.format!r}")
        if not self.resistance > 0:
            raise TouchstoneError("reference resistance must be > 0")
        object.__setattr__(self, "freq_unit", _UNIT_NAMES[unit])
        object.__setattr__(self, "parameter", "S")
        object.__setattr__(self, "format", self.format.upper())
        object.__setattr__(self, "resistance", float(self.resistance))

    @property
    def freq_scale(self):
        return FREQ_UNITS[self.freq_unit.upper()]

    def option_line(self):
        return f"# {self.freq_unit} S {self.format} R {self.resistance:.12g}"


def _parse_option_line(line, lineno):
    tokens = line[1:].split()
    unit, fmt, res = "GHz", "MA", 50.0
    i = 0
    while i < len(tokens):
        tok = tokens[i].upper()
        if tok in FREQ_UNITS:
            unit = tok
        elif tok in FORMATS:
            fmt = tok
        elif tok in ("Y", "Z", "H", "G"):
            raise TouchstoneError(f"unsupported parameter type {tokens[i]!r}", lineno)
        elif tok == "S":
            pass
        elif tok == "R":
            if i + 1 >= len(tokens):
                raise TouchstoneError("option R needs a value", lineno)
            try:
                res = float(tokens[i + 1])
            except ValueError:
                raise TouchstoneError(f"bad reference resistance {tokens[i + 1]!r}", lineno) from None
            i += 1
        else:
            raise TouchstoneError(f"unrecognised option {tokens[i]!r}", lineno)
        i += 1
    try:
        return TouchstoneOptions(unit, "S", fmt, res)
    except TouchstoneError as exc:
        raise TouchstoneError(str(exc), lineno) from None


def _to_complex(x, y, fmt):
    if fmt == "RI":
        return x + 1j * y
    mag = x if fmt == "MA" else 10 ** (x / 20)
    return mag * np.exp(1j * np.deg2rad(y))


def _from_complex(z, fmt):
    if fmt == "RI":
        return z.real, z.imag
    ang = np.rad2deg(np.angle(z))
    mag = np.abs(z)
    if fmt == "MA":
        return mag, ang
    with np.errstate(divide="ignore"):
        return 20 * np.log10(mag), ang


def parse_touchstone(text, ports=None):
    """Parse Touchstone v1 text.

    ``ports`` (1 or 2) is normally implied by the file extension; when None it
    is inferred from the number of values on the first data line.

    Returns ``(network, options)`` where ``network`` is a
    :class:`~chiptrans.netcore.TwoPortNetwork` or
    :class:`~chiptrans.netcore.OnePortNetwork`.
    """
    if hasattr(text, "read"):
        text = text.read()
    options = None
    rows = []  # (lineno, values) of each frequency record
    pending = []
    pending_line = None
    ncols = None if ports is None else 1 + 2 * ports**2
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("!", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            raise TouchstoneError(
                f"Touchstone v2 keyword {line.split()[0]!r} is not supported (v1 only)", lineno
            )
        if line.startswith("#"):
            if options is not None:
                raise TouchstoneError("duplicate option line", lineno)
            if rows or pending:
                raise TouchstoneError("option line must precede the data", lineno)
            options = _parse_option_line(line, lineno)
            continue
        if options is None:
            raise TouchstoneError("missing option line ('# <unit> S <format> R <ohm>')", lineno)
        try:
            values = [float(v) for v in line.split()]
        except ValueError:
            raise TouchstoneError(f"non-numeric data: {line!r}", lineno) from None
        if ncols is None:
            # a 1-port record is always one line of 3; anything else starts a 2-port record
            ncols = 3 if len(values) == 3 else 9
        if not pending:
            pending_line = lineno
        pending.extend(values)
        if len(pending) == ncols:
            rows.append((pending_line, pending))
            pending = []
        elif len(pending) > ncols:
            raise TouchstoneError(
                f"wrong column count: expected {ncols} values per record, got {len(pending)}",
                pending_line,
            )
    if options is None:
        raise TouchstoneError("missing option line")
    if pending:
        raise TouchstoneError(
            f"truncated record: expected {ncols} values, got {len(pending)}", pending_line
        )
    if not rows:
        raise TouchstoneError("no data records")
    data = np.array([r[1] for r in rows])
    freq = data[:, 0] * options.freq_scale
    steps = np.diff(freq)
    if np.any(steps <= 0):
        k = int(np.flatnonzero(steps <= 0)[0]) + 1
        raise TouchstoneError("non-monotonic frequencies", rows[k][0])
    if np.any(freq <= 0):
        raise TouchstoneError("frequencies must be > 0", rows[int(np.argmax(freq <= 0))][0])
    vals = _to_complex(data[:, 1::2], data[:, 2::2], options.format)
    grid = FrequencyGrid(freq)
    if ncols == 3:
        return OnePortNetwork(grid, vals[:, 0], options.resistance), options
    s = np.empty((len(grid), 2, 2), dtype=complex)
    for col, (i, j) in enumerate(_TWO_PORT_ORDER):
        s[:, i, j] = vals[:, col]
    return TwoPortNetwork(grid, s, options.resistance), options


def write_touchstone(net, options=None, comments=()):
    """Render ``net`` as Touchstone v1 text.

    Both ports must share one reference impedance, which overrides
    ``options.resistance``. Values carry 12 significant digits.
    """
    options = options or TouchstoneOptions()
    if isinstance(net, TwoPortNetwork):
        z1, z2 = net.z_ref
        if z1 != z2:
            raise NetworkError("Touchstone v1 needs one reference impedance for both ports")
        z = z1
        cols = [net.s[:, i, j] for i, j in _TWO_PORT_ORDER]
    elif isinstance(net, OnePortNetwork):
        z = net.z_ref
        cols = [net.s]
    else:
        raise TypeError(f"cannot write {type(net).__name__}")
    options = replace(options, resistance=z)
    out = io.StringIO()
    for c in comments:
        for cl in str(c).splitlines():
            out.write(f"! {cl}\n")
    out.write(options.option_line() + "\n")
    f = net.grid.points / options.freq_scale
    parts = [_from_complex(c, options.format) for c in cols]
    fmt = f"{{:.{_DIGITS}g}}"
    num = f"{{:.{_DIGITS - 1}e}}"
    for k in range(len(f)):
        fields = [fmt.format(f[k])]
        for x, y in parts:
            fields.append(num.format(x[k]))
            fields.append(num.format(y[k]))
        out.write(" ".join(fields) + "\n")
    return out.getvalue()


def read_touchstone(path):
    ext = os.path.splitext(str(path))[1].lower()
    ports = {".s1p": 1, ".s2p": 2}.get(ext)
    with open(path) as fh:
        return parse_touchstone(fh.read(), ports=ports)


def save_touchstone(path, net, options=None, comments=()):
    with open(path, "w") as fh:
        fh.write(write_touchstone(net, options, comments))
