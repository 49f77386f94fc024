"""TRL calibration, error-box removal and line de-embedding.

Error model: the raw measurement of a DUT with cascade matrix ``T`` is
``M = X @ T @ Y`` where ``X`` is the port-1 error box and ``Y`` the port-2
error box oriented from the DUT towards the analyzer, so that
``raw = cascade(port1, dut, port2)``. Measurements are assumed switch-term
corrected.

Solution outline, per frequency:

1. ``M_line @ inv(M_thru) = X @ diag(e^-gl, e^gl) @ inv(X)``; the eigenvectors
   give the columns of ``X`` up to scale: ``X ~ [[1, b], [c/a, 1]] @ diag(a, 1)``.
2. The thru then fixes ``Y`` up to the same unknown ``a``.
3. The reflect, identical on both ports, gives ``a**2``; its sign follows the
   declared reflect kind (short or open) at the lowest frequency and
   continuity above it.

The calibrated reference impedance is that of the line standard, which is
generally unknown; results carry that as ``ref_label``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from .netcore import (
    FrequencyGrid,
    NetworkError,
    OnePortNetwork,
    TwoPortNetwork,
    s_to_t,
    t_to_s,
)
from .tline import PropagationConstant, unwrap_phase
from .units import C0

__all__ = [
    "TrlStandards",
    "ErrorBoxes",
    "CalibrationError",
    "RippleReport",
    "trl_calibrate",
    "apply_cal",
    "deembed_line",
    "ripple_spacing_diagnostic",
    "ripple_amplitude",
]

TRL_LINE_LABEL = "TRL line impedance (unknown)"
# line standards within this many degrees of 0/180 are poorly conditioned
_MIN_LINE_PHASE_DEG = 20.0
# below this eigenvalue-magnitude log-ratio the loss cannot decide the root
_LOSS_RESOLUTION = 1e-3
_DEGENERATE_TOL = 1e-6


class CalibrationError(NetworkError):
    """Standards are inconsistent or the calibration cannot be solved."""


def _inv2(m):
    det = m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    out = np.empty_like(m)
    out[..., 0, 0] = m[..., 1, 1]
    out[..., 1, 1] = m[..., 0, 0]
    out[..., 0, 1] = -m[..., 0, 1]
    out[..., 1, 0] = -m[..., 1, 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        return out / det[..., None, None]


@dataclass(frozen=True, eq=False)
class TrlStandards:
    """Raw thru, line and reflect measurements.

    ``reflect1``/``reflect2`` are the raw reflections of the (identical) reflect
    standard seen at port 1 and port 2. ``delta_length`` is the line length
    minus the thru length, in metres.
    """

    thru: TwoPortNetwork
    line: TwoPortNetwork
    reflect1: np.ndarray
    reflect2: np.ndarray
    delta_length: float
    reflect_kind: str = "short"

    def __post_init__(self):
        if not self.thru.grid.same_as(self.line.grid):
            raise CalibrationError("thru and line are on different grids")
        n = len(self.thru)
        r1 = _reflect_array(self.reflect1, self.thru.grid)
        r2 = _reflect_array(self.reflect2, self.thru.grid)
        if r1.shape != (n,) or r2.shape != (n,):
            raise CalibrationError("reflect data must have one value per grid point")
        if not self.delta_length > 0:
            raise CalibrationError("delta_length must be > 0")
        if self.reflect_kind not in ("short", "open"):
            raise CalibrationError("reflect_kind must be 'short' or 'open'")
        object.__setattr__(self, "reflect1", r1)
        object.__setattr__(self, "reflect2", r2)

    @classmethod
    def from_networks(cls, thru, line, reflect, delta_length, reflect_kind="short"):
        """``reflect`` is a two-port (S11/S22 used) or a pair of one-ports."""
        if isinstance(reflect, TwoPortNetwork):
            return cls(thru, line, reflect.s11, reflect.s22, delta_length, reflect_kind)
        r1, r2 = reflect
        return cls(thru, line, r1, r2, delta_length, reflect_kind)

    @property
    def grid(self):
        return self.thru.grid


def _reflect_array(r, grid):
    if isinstance(r, OnePortNetwork):
        if not r.grid.same_as(grid):
            raise CalibrationError("reflect is on a different grid")
        r = r.s
    return np.asarray(r, dtype=complex).reshape(-1)


@dataclass(frozen=True, eq=False)
class ErrorBoxes:
    """Solved error boxes.

    ``port1``/``port2`` hold the error-box S-parameters (port2 oriented DUT to
    analyzer), made reciprocal by choice of the free transmission scale.
    ``flags`` marks points that should not be trusted: line phase within
    20 degrees of 0/180, degenerate eigenvalues, or a root choice where loss and
    error-box structure disagree.
    """

    port1: TwoPortNetwork
    port2: TwoPortNetwork
    gamma_est: PropagationConstant
    flags: np.ndarray
    line_phase_deg: np.ndarray
    reflect_est: np.ndarray
    line_z0: float | None = None

    @property
    def grid(self):
        return self.port1.grid

    @classmethod
    def identity(cls, grid, z_ref=50.0):
        grid = grid if isinstance(grid, FrequencyGrid) else FrequencyGrid(grid)
        s = np.zeros((len(grid), 2, 2), dtype=complex)
        s[:, 0, 1] = s[:, 1, 0] = 1
        net = TwoPortNetwork(grid, s, z_ref)
        n = len(grid)
        return cls(
            net,
            net,
            PropagationConstant(grid, np.zeros(n), np.zeros(n)),
            np.zeros(n, bool),
            np.zeros(n),
            -np.ones(n, complex),
        )


def _eigvecs(w, lam):
    """Eigenvector of each 2x2 ``w`` for eigenvalue ``lam`` (better-conditioned of two forms)."""
    v1 = np.stack([w[:, 0, 1], lam - w[:, 0, 0]], axis=-1)
    v2 = np.stack([lam - w[:, 1, 1], w[:, 1, 0]], axis=-1)
    use1 = np.linalg.norm(v1, axis=-1) >= np.linalg.norm(v2, axis=-1)
    return np.where(use1[:, None], v1, v2)


def _ratio(num, den):
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.abs(num) / np.abs(den)
    return np.where(np.isnan(r), np.inf, r)


def trl_calibrate(std: TrlStandards, line_z0=None) -> ErrorBoxes:
    """Solve the 8-term error model from thru, reflect and line measurements.

    ``line_z0``, when known, is recorded as the numeric reference impedance of
    calibrated results; otherwise they keep the raw port impedance tagged as
    the unknown line impedance.
    """
    grid = std.grid
    n = len(grid)
    mt = s_to_t(std.thru.s)
    ml = s_to_t(std.line.s)
    if not (np.all(np.isfinite(mt)) and np.all(np.isfinite(ml))):
        raise CalibrationError("thru or line has S21 = 0; no cascade representation")
    w = ml @ _inv2(mt)

    tr = w[:, 0, 0] + w[:, 1, 1]
    det = w[:, 0, 0] * w[:, 1, 1] - w[:, 0, 1] * w[:, 1, 0]
    disc = np.sqrt(tr * tr - 4 * det)
    lam_a, lam_b = (tr + disc) / 2, (tr - disc) / 2
    # the square root turns rounding in disc**2 into ~sqrt(eps) separation
    degenerate = np.abs(lam_a - lam_b) <= _DEGENERATE_TOL * (np.abs(lam_a) + np.abs(lam_b))
    va, vb = _eigvecs(w, lam_a), _eigvecs(w, lam_b)

    # error-box structure: column 0 of X is dominated by its first entry,
    # column 1 by its second (small reflections in the error boxes)
    score_a = _ratio(va[:, 1], va[:, 0]) + _ratio(vb[:, 0], vb[:, 1])
    score_b = _ratio(vb[:, 1], vb[:, 0]) + _ratio(va[:, 0], va[:, 1])
    by_structure = score_a <= score_b
    # passivity: the forward-travelling eigenvalue exp(-gamma*dl) has |.| <= 1
    log_ratio = np.log(np.abs(lam_a)) - np.log(np.abs(lam_b))
    by_loss = log_ratio <= 0
    resolved = np.abs(log_ratio) > _LOSS_RESOLUTION
    pick_a = np.where(resolved, by_loss, by_structure)
    conflict = resolved & (by_loss != by_structure)

    lam0 = np.where(pick_a, lam_a, lam_b)
    v0 = np.where(pick_a[:, None], va, vb)
    v1 = np.where(pick_a[:, None], vb, va)
    with np.errstate(divide="ignore", invalid="ignore"):
        c_over_a = v0[:, 1] / v0[:, 0]
        b = v1[:, 0] / v1[:, 1]

    x0 = np.empty((n, 2, 2), dtype=complex)
    x0[:, 0, 0] = 1
    x0[:, 0, 1] = b
    x0[:, 1, 0] = c_over_a
    x0[:, 1, 1] = 1
    g = _inv2(x0) @ mt

    r1, r2 = std.reflect1, std.reflect2
    with np.errstate(divide="ignore", invalid="ignore"):
        u = (r1 - b) / (1 - r1 * c_over_a)  # a * Gamma
        wv = (g[:, 1, 0] + r2 * g[:, 1, 1]) / (g[:, 0, 0] + r2 * g[:, 0, 1])  # Gamma / a
    with np.errstate(divide="ignore", invalid="ignore"):
        a = _resolve_reflect_sign(np.sqrt(u / wv), u, std.reflect_kind)
        gamma_r = u / a

    # split the transmission scale so both boxes are reciprocal (det T = 1)
    det_x0 = 1 - b * c_over_a
    with np.errstate(divide="ignore", invalid="ignore"):
        r = _continuous_sign(1 / np.sqrt(a * det_x0))
        x = r[:, None, None] * x0 * np.stack([a, np.ones(n)], axis=-1)[:, None, :]
        y = (1 / r)[:, None, None] * np.stack([1 / a, np.ones(n)], axis=-1)[:, :, None] * g

    dl = std.delta_length
    finite = np.isfinite(lam0) & (lam0 != 0) & ~degenerate
    if not np.any(finite):
        raise CalibrationError("thru and line are indistinguishable at every frequency")
    lag = np.full(n, np.nan)
    lag[finite] = unwrap_phase(grid.points[finite], -np.angle(lam0[finite]))
    alpha = np.full(n, np.nan)
    alpha[finite] = -np.log(np.abs(lam0[finite]))
    gamma = PropagationConstant(grid, alpha / dl, lag / dl)

    phase_deg = np.rad2deg(np.mod(lag, np.pi))
    flags = (
        ~finite
        | conflict
        | ~np.isfinite(a)
        | (phase_deg < _MIN_LINE_PHASE_DEG)
        | (phase_deg > 180 - _MIN_LINE_PHASE_DEG)
    )
    z = std.thru.z_ref
    return ErrorBoxes(
        port1=TwoPortNetwork(grid, t_to_s(x), z),
        port2=TwoPortNetwork(grid, t_to_s(y), z),
        gamma_est=gamma,
        flags=flags,
        line_phase_deg=phase_deg,
        reflect_est=gamma_r,
        line_z0=line_z0,
    )


def _resolve_reflect_sign(a, u, kind):
    target = -1.0 if kind == "short" else 1.0
    a = a.copy()
    prev = None
    for k in range(a.size):
        if not np.isfinite(a[k]):
            continue
        g_plus = u[k] / a[k]
        ref = target if prev is None else prev
        if abs(-g_plus - ref) < abs(g_plus - ref):
            a[k] = -a[k]
        prev = u[k] / a[k]
    return a


def _continuous_sign(r):
    # the error-box transmission sign is not observable; keep it smooth in f
    r = r.copy()
    prev = None
    for k in range(r.size):
        if not np.isfinite(r[k]):
            continue
        if prev is None:
            if r[k].real < 0:
                r[k] = -r[k]
        elif abs(r[k] + prev) < abs(r[k] - prev):
            r[k] = -r[k]
        prev = r[k]
    return r


def apply_cal(e: ErrorBoxes, raw: TwoPortNetwork, interpolate_flagged=False) -> TwoPortNetwork:
    """Remove the error boxes from a raw two-port measurement.

    With ``interpolate_flagged`` the flagged frequencies are replaced by linear
    interpolation between their unflagged neighbours; otherwise they are
    returned as computed.
    """
    if not raw.grid.same_as(e.grid):
        raise CalibrationError("raw data and calibration are on different grids")
    x = s_to_t(e.port1.s)
    y = s_to_t(e.port2.s)
    m = s_to_t(raw.s)
    t = _inv2(x) @ m @ _inv2(y)
    s = t_to_s(t)
    bad = ~np.all(np.isfinite(s), axis=(1, 2))
    if interpolate_flagged:
        drop = e.flags | bad
        keep = ~drop
        if keep.sum() < 2:
            raise CalibrationError("too few unflagged points to interpolate over")
        f = raw.f
        for i in range(2):
            for j in range(2):
                col = s[:, i, j]
                s[drop, i, j] = np.interp(f[drop], f[keep], col[keep].real) + 1j * np.interp(
                    f[drop], f[keep], col[keep].imag
                )
    elif np.any(bad):
        s[bad] = np.nan
    z = raw.z_ref if e.line_z0 is None else e.line_z0
    label = TRL_LINE_LABEL if e.line_z0 is None else f"TRL line impedance {e.line_z0:g} ohm"
    return TwoPortNetwork(raw.grid, s, z, label)


def deembed_line(net: TwoPortNetwork, gamma: PropagationConstant, l1, l2) -> TwoPortNetwork:
    """Strip matched lines of length ``l1`` (port 1) and ``l2`` (port 2).

    The network must be expressed in the line impedance (as after TRL), where a
    line is ``diag(e^-gl, e^gl)`` in cascade form and its removal rotates the
    reflections by ``e^{2 gamma l}`` and the transmission by ``e^{gamma (l1 + l2)}``.
    """
    if not gamma.grid.same_as(net.grid):
        raise NetworkError("network and propagation constant are on different grids")
    if l1 < 0 or l2 < 0:
        raise ValueError("lengths must be >= 0")
    g = gamma.gamma
    e1, e2 = np.exp(g * l1), np.exp(g * l2)
    s = np.array(net.s)
    s[:, 0, 0] *= e1 * e1
    s[:, 1, 1] *= e2 * e2
    s[:, 0, 1] *= e1 * e2
    s[:, 1, 0] *= e1 * e2
    return net.with_s(s)


@dataclass(frozen=True)
class RippleReport:
    spacing_hz: float
    n_peaks: int
    amplitude: float
    implied_length_m: float | None = None


def _detrended_reflection(net, port):
    if port not in (1, 2):
        raise ValueError("port must be 1 or 2")
    r = net.s11 if port == 1 else net.s22
    f = net.f
    # remove a complex straight-line trend; leaves the rotating remnant terms
    basis = np.stack([np.ones_like(f), (f - f.mean()) / np.ptp(f)], axis=1)
    coef, *_ = np.linalg.lstsq(basis, r, rcond=None)
    return f, r - basis @ coef, r


def ripple_amplitude(net: TwoPortNetwork, port=1) -> float:
    """Peak amplitude of the periodic part of the reflection (RMS * sqrt 2)."""
    if len(net) < 3:
        raise ValueError("need at least 3 points")
    _, x, _ = _detrended_reflection(net, port)
    return float(np.sqrt(2 * np.mean(np.abs(x) ** 2)))


def ripple_spacing_diagnostic(net: TwoPortNetwork, port=1, eps_r=None) -> RippleReport:
    """Dominant periodicity of the reflection at ``port``.

    A remnant line of length ``l`` rotates a reflection by ``e^{-2 j beta l}``,
    repeating every ``c/(2 l sqrt(eps_r))``. The complex reflection is
    detrended and the spacing averaged over successive peaks of its real
    part. With ``eps_r`` the implied remnant length is reported as well.
    """
    if len(net) < 8:
        raise CalibrationError("too few points for a periodicity estimate")
    f, x, r = _detrended_reflection(net, port)
    amp = float(np.sqrt(2 * np.mean(np.abs(x) ** 2)))
    scale = max(float(np.max(np.abs(r))), 1e-300)
    if amp <= 1e-9 * scale or amp == 0:
        raise CalibrationError("no periodicity detected in the reflection")
    y = x.real
    peaks, _ = find_peaks(y, prominence=0.5 * amp)
    if peaks.size < 3:
        raise CalibrationError(
            f"no periodicity detected (found {peaks.size} ripple peaks, need at least 3)"
        )
    fp = _refine_peaks(f, y, peaks)
    spacing = float((fp[-1] - fp[0]) / (fp.size - 1))
    length = None if eps_r is None else float(C0 / (2 * spacing * np.sqrt(eps_r)))
    return RippleReport(spacing, int(peaks.size), amp, length)


def _refine_peaks(f, y, peaks):
    """Parabolic interpolation of each peak location on a uniform-ish grid."""
    out = []
    for k in peaks:
        if 0 < k < y.size - 1:
            y0, y1, y2 = y[k - 1], y[k], y[k + 1]
            den = y0 - 2 * y1 + y2
            shift = 0.5 * (y0 - y2) / den if den != 0 else 0.0
            h = 0.5 * (f[k + 1] - f[k - 1])
            out.append(f[k] + shift * h)
        else:
            out.append(f[k])
    return np.asarray(out)
