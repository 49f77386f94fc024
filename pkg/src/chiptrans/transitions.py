"""Circuit models and closed-form predictors for chip-to-package transitions.

Two families are covered:

* the coplanar GSG flip-chip transition, whose return current takes a longer
  horizontal path than the signal current through the bump, and
* the via-caged (shielded) stripline transition, modelled as pad capacitance,
  a via line and pad capacitance again, plus the cutoff of the parasitic
  substrate-integrated waveguide formed by the via cage.
"""
from __future__ import annotations

import json
from dataclasses import MISSING, asdict, dataclass, fields

import numpy as np

from . import _backend
from .netcore import (
    NetworkError,
    TwoPortNetwork,
    _as_grid,
    _s2abcd,
    abcd_to_s,
    cascade,
    series_connect,
)
from .tline import ideal_line
from .units import C0

__all__ = [
    "GsgParams",
    "GsgGeometry",
    "SiwGeometry",
    "StriplineTransitionParams",
    "SeriesLineMatch",
    "gsg_return_path",
    "gsg_model",
    "gsg_notch_freq",
    "loop_radiation_freq",
    "pitch_notch_estimate",
    "siw_effective_width",
    "siw_te10_cutoff",
    "shunt_capacitor",
    "stripline_transition_model",
    "apply_series_match",
    "design_series_match",
    "load_params",
    "dump_params",
]

# the bump-pitch rule of thumb is quoted with a rounded speed of light
_C_ROUNDED = 3e8


def _require_positive(obj, *names):
    for n in names:
        v = getattr(obj, n)
        if not (np.isfinite(v) and v > 0):
            raise ValueError(f"{type(obj).__name__}.{n} must be > 0, got {v}")


@dataclass(frozen=True)
class GsgParams:
    """Signal (bump) line ``z1, tau1`` and parasitic return-path line ``z2, tau2``."""

    z1: float
    tau1: float
    z2: float
    tau2: float

    def __post_init__(self):
        _require_positive(self, "z1", "tau1", "z2", "tau2")


@dataclass(frozen=True)
class GsgGeometry:
    """Footprint-to-footprint distance ``H`` (m), bump ``pitch`` (m) and underfill ``eps_r``."""

    H: float
    pitch: float
    eps_r: float

    def __post_init__(self):
        _require_positive(self, "H", "pitch", "eps_r")


@dataclass(frozen=True)
class SiwGeometry:
    """Via cage: centre-to-centre width ``W``, via diameter ``D``, same-side pitch ``P`` (all m)."""

    W: float
    D: float
    P: float
    eps_r: float = 1.0

    def __post_init__(self):
        _require_positive(self, "W", "D", "P", "eps_r")
        if self.D >= self.P:
            raise ValueError("via diameter must be smaller than the via pitch")
        if self.W <= self.D**2 / (0.95 * self.P):
            raise ValueError("non-physical cage: effective width would be <= 0")


@dataclass(frozen=True)
class StriplineTransitionParams:
    """Pad capacitance ``c_pad`` (F, each side) and via line ``z_via`` (ohm), ``tau_via`` (s)."""

    c_pad: float
    z_via: float
    tau_via: float

    def __post_init__(self):
        if not self.c_pad >= 0:
            raise ValueError("c_pad must be >= 0")
        _require_positive(self, "z_via", "tau_via")


@dataclass(frozen=True)
class SeriesLineMatch:
    """Series matching line: impedance ``z0`` and electrical length ``theta_deg`` at ``f0``."""

    z0: float
    theta_deg: float
    f0: float

    def __post_init__(self):
        _require_positive(self, "z0", "f0")
        if not 0 <= self.theta_deg < 180:
            raise ValueError("theta_deg must lie in [0, 180)")

    @property
    def tau(self):
        return self.theta_deg / 360 / self.f0


# ---------------------------------------------------------------------------
# GSG


def gsg_return_path(z2, tau2, grid, z_ref=50.0) -> TwoPortNetwork:
    """Return-path line of the GSG transition as seen by the signal loop.

    The loop forces equal current at both ends of the parasitic line, so its
    T-equivalent shunt arm carries nothing and only the two series arms
    ``j*z2*tan(theta2/2)`` remain, one in series with each port. As a two-port
    that is ``Z = diag(jX, jX)``; written on the waves it stays finite where
    ``theta2 = pi`` makes the arms open.
    """
    grid = _as_grid(grid)
    half = grid.omega * tau2 / 2
    zr = np.broadcast_to(np.asarray(z_ref, dtype=float), (2,))
    s = np.zeros((len(grid), 2, 2), dtype=complex)
    for port in range(2):
        num = 1j * z2 * np.sin(half) - zr[port] * np.cos(half)
        den = 1j * z2 * np.sin(half) + zr[port] * np.cos(half)
        s[:, port, port] = num / den
    return TwoPortNetwork(grid, s, zr)


def gsg_model(p: GsgParams, grid, z_ref=50.0) -> TwoPortNetwork:
    """Transmission-line model of the GSG transition.

    The bump line ``(z1, tau1)`` and the loop-constrained return path
    ``(z2, tau2)`` are joined in series-series. The return-path arms open at
    ``theta2 = (2k+1)*pi``, which blocks the loop current regardless of the
    terminations: a transmission zero at odd multiples of ``1/(2*tau2)``.
    If the bump line is itself a multiple of a half wave at that frequency it
    has no Z matrix and the point is reported as singular.
    """
    grid = _as_grid(grid)
    signal = ideal_line(p.z1, p.tau1, grid, z_ref=z_ref)
    ret = gsg_return_path(p.z2, p.tau2, grid, z_ref=z_ref)
    return series_connect(signal, ret)


def gsg_notch_freq(tau2, harmonic=1):
    """Transmission-zero frequency ``harmonic/(2*tau2)``; ``harmonic`` must be odd."""
    if not tau2 > 0:
        raise ValueError("tau2 must be > 0")
    if harmonic < 1 or harmonic % 2 == 0:
        raise ValueError("notches occur at odd multiples only")
    return harmonic / (2 * tau2)


def loop_radiation_freq(tau1, tau2):
    """Resonance of the parasitic current loop, ``1/(2*(tau1 + tau2))``.

    Radiation into this loop mode is not representable in the lossless
    circuit model, so this stays a standalone predictor.
    """
    if tau1 < 0 or not tau2 > 0:
        raise ValueError("delays must be positive")
    return 1 / (2 * (tau1 + tau2))


def pitch_notch_estimate(g: GsgGeometry):
    """First GSG notch from the loop length ``H + pitch`` in underfill of ``eps_r``."""
    return 0.5 * (_C_ROUNDED / np.sqrt(g.eps_r)) / (g.H + g.pitch)


# ---------------------------------------------------------------------------
# via cage


def siw_effective_width(g: SiwGeometry):
    """Equivalent solid-wall width ``W - D**2/(0.95*P)`` of a via fence waveguide."""
    w = g.W - g.D**2 / (0.95 * g.P)
    if not w > 0:
        raise ValueError("non-physical geometry: effective width <= 0")
    return w


def siw_te10_cutoff(w_eff, eps_r=1.0):
    """TE10 cutoff ``c/(2*w_eff*sqrt(eps_r))`` of the equivalent rectangular guide."""
    if not w_eff > 0:
        raise ValueError("effective width must be > 0")
    return C0 / (2 * w_eff * np.sqrt(eps_r))


# ---------------------------------------------------------------------------
# stripline transition and matching


def shunt_capacitor(c, grid, z_ref=50.0) -> TwoPortNetwork:
    grid = _as_grid(grid)
    abcd = np.zeros((len(grid), 2, 2), dtype=complex)
    abcd[:, 0, 0] = abcd[:, 1, 1] = 1
    abcd[:, 1, 0] = 1j * grid.omega * c
    return abcd_to_s(abcd, z_ref, grid)


def stripline_transition_model(p: StriplineTransitionParams, grid, z_ref=50.0) -> TwoPortNetwork:
    grid = _as_grid(grid)
    pad = shunt_capacitor(p.c_pad, grid, z_ref)
    via = ideal_line(p.z_via, p.tau_via, grid, z_ref=z_ref)
    return cascade(pad, via, pad)


def apply_series_match(net: TwoPortNetwork, m: SeriesLineMatch, side=1) -> TwoPortNetwork:
    """Insert the matching line in front of port ``side`` (1 or 2)."""
    if side not in (1, 2):
        raise ValueError("side must be 1 or 2")
    zr = net.z_ref[side - 1]
    line = ideal_line(m.z0, m.tau, net.grid, z_ref=zr)
    return cascade(line, net) if side == 1 else cascade(net, line)


def design_series_match(
    net: TwoPortNetwork,
    f0,
    z0_range=(10.0, 100.0, 0.5),
    theta_range=(0.0, 90.0, 0.25),
    side=1,
):
    """Grid search for the series line that minimizes ``|S11(f0)|``.

    ``z0_range`` and ``theta_range`` are ``(start, stop, step)`` in ohm and
    degrees, both inclusive. The zero-length candidate is always evaluated so
    the result never reflects worse than the unmatched network. Ties are broken
    by smallest theta, then smallest z0.

    Returns ``(SeriesLineMatch, achieved_abs_s11)``.
    """
    z0s = _inclusive_range(*z0_range)
    thetas = _inclusive_range(*theta_range)
    if z0s.size == 0 or thetas.size == 0:
        raise ValueError("empty search range")
    if thetas[0] > 0:
        thetas = np.concatenate(([0.0], thetas))
    if np.any(thetas >= 180) or np.any(z0s <= 0):
        raise ValueError("search range outside 0 < z0, 0 <= theta < 180")
    s0 = net.s_at(f0)
    z1, z2 = net.z_ref
    abcd, den = _s2abcd(s0[None], z1, z2)
    if not abs(den[0]) > 0:
        raise NetworkError("network has S21 = 0 at f0; cannot design a series match")
    iz, it, best = _backend.series_match_search(
        abcd[0], float(z1), float(z2), int(side), z0s, np.deg2rad(thetas)
    )
    return SeriesLineMatch(float(z0s[iz]), float(thetas[it]), float(f0)), best


def _inclusive_range(start, stop, step):
    if step <= 0 or stop < start:
        return np.array([])
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(n)


# ---------------------------------------------------------------------------
# JSON parameter files

_PARAM_TYPES = (GsgParams, StriplineTransitionParams, SiwGeometry, GsgGeometry)


def load_params(source, kind=None):
    """Build a parameter object from a JSON file path, JSON text or dict.

    Keys are the dataclass field names in SI units. ``kind`` selects the class
    by name; otherwise it is inferred from the keys.
    """
    if isinstance(source, dict):
        data = source
    else:
        text = str(source)
        if not text.lstrip().startswith("{"):
            with open(text) as fh:
                text = fh.read()
        data = json.loads(text)
    if not isinstance(data, dict):
        raise ValueError("parameter file must hold a JSON object")
    candidates = _PARAM_TYPES
    if kind is not None:
        candidates = [t for t in _PARAM_TYPES if t.__name__ == kind]
        if not candidates:
            raise ValueError(f"unknown parameter kind {kind!r}")
    for cls in candidates:
        names = {f.name for f in fields(cls)}
        required = {f.name for f in fields(cls) if f.default is MISSING}
        if kind is not None or (required <= data.keys() and data.keys() <= names):
            missing = required - data.keys()
            unknown = data.keys() - names
            if missing or unknown:
                raise ValueError(
                    f"{cls.__name__}: missing keys {sorted(missing)}, unknown keys {sorted(unknown)}"
                )
            return cls(**{k: float(v) for k, v in data.items()})
    raise ValueError(f"keys {sorted(data)} match no known parameter set")


def dump_params(obj) -> str:
    return json.dumps(asdict(obj), indent=2, sort_keys=True)
