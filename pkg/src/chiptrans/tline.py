"""Transmission-line two-ports, propagation constants and conductor roughness."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from . import _backend
from .netcore import (
    FrequencyGrid,
    NetworkError,
    TwoPortNetwork,
    _as_grid,
    abcd_to_s,
)
from .units import MU0, NP_TO_DB

__all__ = [
    "PropagationConstant",
    "HurayParams",
    "UnwrapError",
    "ideal_line",
    "lossy_line",
    "skin_depth",
    "huray_factor",
    "apply_roughness",
    "extract_gamma",
    "average_gamma",
    "unwrap_phase",
]

COPPER_CONDUCTIVITY = 5.8e7
# measurement noise may push alpha slightly negative; only flag below this
_ALPHA_NOISE_FLOOR = -1e-3


class UnwrapError(NetworkError):
    """Phase samples are too sparse to resolve the 2*pi ambiguity."""


@dataclass(frozen=True, eq=False)
class PropagationConstant:
    """Per-frequency ``gamma = alpha + j*beta`` in Np/m and rad/m."""

    grid: FrequencyGrid
    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        grid = _as_grid(self.grid)
        alpha = np.broadcast_to(np.asarray(self.alpha, dtype=float), (len(grid),)).copy()
        beta = np.broadcast_to(np.asarray(self.beta, dtype=float), (len(grid),)).copy()
        alpha.setflags(write=False)
        beta.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)

    @classmethod
    def from_gamma(cls, grid, gamma):
        gamma = np.asarray(gamma, dtype=complex)
        return cls(grid, gamma.real, gamma.imag)

    @classmethod
    def from_report_units(cls, grid, alpha_db_per_mm, beta_deg_per_mm):
        alpha = np.asarray(alpha_db_per_mm, dtype=float) / NP_TO_DB * 1e3
        beta = np.deg2rad(np.asarray(beta_deg_per_mm, dtype=float)) * 1e3
        return cls(grid, alpha, beta)

    def __len__(self):
        return len(self.grid)

    @property
    def gamma(self):
        return self.alpha + 1j * self.beta

    @property
    def alpha_db_per_mm(self):
        return self.alpha * NP_TO_DB / 1e3

    @property
    def beta_deg_per_mm(self):
        return np.rad2deg(self.beta) / 1e3

    @property
    def nonpassive(self):
        """Points whose attenuation is negative beyond the noise allowance."""
        return self.alpha < _ALPHA_NOISE_FLOOR

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["freq_hz", "alpha_db_per_mm", "beta_deg_per_mm"])
        for f, a, b in zip(self.grid.points, self.alpha_db_per_mm, self.beta_deg_per_mm):
            w.writerow([f"{f:.12g}", f"{a:.12g}", f"{b:.12g}"])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> PropagationConstant:
        rows = list(csv.DictReader(io.StringIO(text)))
        missing = {"freq_hz", "alpha_db_per_mm", "beta_deg_per_mm"} - set(rows[0] if rows else {})
        if not rows or missing:
            raise ValueError(f"gamma CSV needs columns freq_hz, alpha_db_per_mm, beta_deg_per_mm")
        f = [float(r["freq_hz"]) for r in rows]
        a = [float(r["alpha_db_per_mm"]) for r in rows]
        b = [float(r["beta_deg_per_mm"]) for r in rows]
        return cls.from_report_units(FrequencyGrid(f), a, b)


@dataclass(frozen=True)
class HurayParams:
    """Huray snowball roughness: nodule radius (m), surface-area ratio, conductivity (S/m)."""

    nodule_radius: float = 0.25e-6
    surface_ratio: float = 4.0
    conductivity: float = COPPER_CONDUCTIVITY

    def __post_init__(self):
        if not self.nodule_radius > 0:
            raise ValueError("nodule radius must be > 0")
        if not self.surface_ratio >= 0:
            raise ValueError("surface ratio must be >= 0")
        if not self.conductivity > 0:
            raise ValueError("conductivity must be > 0")


def ideal_line(z0, tau, grid, z_ref=None) -> TwoPortNetwork:
    """Lossless line of impedance ``z0`` and delay ``tau``.

    The electrical length is ``theta = 2*pi*f*tau``. In its own reference
    (the default, ``z_ref = z0``) this is ``S11 = 0, S21 = exp(-j*theta)``.
    """
    if not z0 > 0:
        raise ValueError("line impedance must be > 0")
    if not tau >= 0:
        raise ValueError("delay must be >= 0")
    grid = _as_grid(grid)
    theta = grid.omega * tau
    if z_ref is None or np.all(np.asarray(z_ref) == z0):
        s = np.zeros((len(grid), 2, 2), dtype=complex)
        s[:, 0, 1] = s[:, 1, 0] = np.exp(-1j * theta)
        return TwoPortNetwork(grid, s, z0)
    c, sn = np.cos(theta), np.sin(theta)
    abcd = np.empty((len(grid), 2, 2), dtype=complex)
    abcd[:, 0, 0] = abcd[:, 1, 1] = c
    abcd[:, 0, 1] = 1j * z0 * sn
    abcd[:, 1, 0] = 1j * sn / z0
    return abcd_to_s(abcd, z_ref, grid)


def lossy_line(gamma: PropagationConstant, z0, length) -> TwoPortNetwork:
    """Matched line: ``S21 = S12 = exp(-gamma*length)``, no reflections, reference ``z0``."""
    if not length >= 0:
        raise ValueError("length must be >= 0")
    s = np.zeros((len(gamma), 2, 2), dtype=complex)
    s[:, 0, 1] = s[:, 1, 0] = np.exp(-gamma.gamma * length)
    return TwoPortNetwork(gamma.grid, s, z0)


def skin_depth(f, conductivity=COPPER_CONDUCTIVITY):
    """Skin depth of a non-magnetic conductor, ``1/sqrt(pi f mu0 sigma)``."""
    return 1 / np.sqrt(np.pi * np.asarray(f, dtype=float) * MU0 * conductivity)


def huray_factor(f, p: HurayParams = HurayParams()):
    """Conductor-loss multiplier of the Huray model.

    ``K = 1 + 1.5*SR / (1 + delta/a + delta**2/(2*a**2))``, rising from 1 at
    low frequency towards ``1 + 1.5*SR`` once the skin depth is much smaller
    than the nodule radius.
    """
    f = np.asarray(f, dtype=float)
    if np.any(f <= 0):
        raise ValueError("frequency must be > 0")
    x = skin_depth(f, p.conductivity) / p.nodule_radius
    return 1 + 1.5 * p.surface_ratio / (1 + x + 0.5 * x * x)


def apply_roughness(gamma_smooth: PropagationConstant, p: HurayParams, alpha_conductor=None):
    """Scale the conductor-loss part of ``alpha`` by the Huray factor.

    ``alpha_conductor`` is the smooth-conductor attenuation (Np/m, per point or
    scalar) contained in ``gamma_smooth.alpha``; it defaults to all of it. The
    remainder (dielectric, radiation) is left untouched, as is ``beta``.
    """
    alpha = gamma_smooth.alpha
    a_c = alpha if alpha_conductor is None else np.broadcast_to(alpha_conductor, alpha.shape)
    if np.any(a_c > alpha + 1e-15 * np.abs(alpha)) or np.any(a_c < 0):
        raise ValueError("conductor loss must lie between 0 and the total attenuation")
    k = huray_factor(gamma_smooth.grid.points, p)
    return PropagationConstant(gamma_smooth.grid, a_c * k + (alpha - a_c), gamma_smooth.beta)


def unwrap_phase(freq, phase_lag):
    """Unwrap a phase lag by grid continuity; raises :class:`UnwrapError` on aliasing."""
    out, bad = _backend.unwrap_phase(np.asarray(freq, float), np.asarray(phase_lag, float))
    if bad >= 0:
        raise UnwrapError(
            f"phase changes too fast between {freq[bad - 1]:.6g} Hz and {freq[bad]:.6g} Hz; "
            "the grid must resolve less than half a turn per step"
        )
    return out


def extract_gamma(net: TwoPortNetwork, length) -> PropagationConstant:
    """``gamma = -ln(S21)/length`` for a line measured in its own impedance.

    The phase is unwrapped by continuity over the grid (see :func:`unwrap_phase`).
    """
    if not length > 0:
        raise ValueError("length must be > 0")
    s21 = net.s21
    mag = np.abs(s21)
    if np.any(mag == 0):
        raise NetworkError(f"|S21| = 0 at indices {np.flatnonzero(mag == 0).tolist()}")
    lag = unwrap_phase(net.f, -np.angle(s21))
    return PropagationConstant(net.grid, -np.log(mag) / length, lag / length)


def average_gamma(a: PropagationConstant, b: PropagationConstant) -> PropagationConstant:
    if not a.grid.same_as(b.grid):
        raise NetworkError("propagation constants are on different grids")
    return PropagationConstant(a.grid, (a.alpha + b.alpha) / 2, (a.beta + b.beta) / 2)
