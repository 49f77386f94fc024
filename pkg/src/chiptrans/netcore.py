"""Two-port network algebra.

Networks hold a batch of 2x2 complex S-matrices on a shared frequency grid,
one real reference impedance per port. All conversions operate on the whole
batch at once; points where a conversion is singular are reported through
:class:`SingularPointError` instead of silently turning into NaN.

Array layout is ``(n_freq, 2, 2)`` with ``s[:, 1, 0]`` being S21, i.e. the
usual matrix row order (Touchstone v1 column order differs, see
:mod:`chiptrans.touchstone`).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "FrequencyGrid",
    "TwoPortNetwork",
    "OnePortNetwork",
    "GainProfile",
    "Stability",
    "NetworkError",
    "SingularPointError",
    "make_network",
    "s_to_abcd",
    "abcd_to_s",
    "s_to_z",
    "z_to_s",
    "s_to_t",
    "t_to_s",
    "cascade",
    "series_connect",
    "renormalize",
    "stability_k",
    "gmax",
    "thru",
]

# relative threshold below which a conversion denominator counts as zero
_SINGULAR_RTOL = 1e-13
# K within this distance below 1 (or its rounding error, if larger) counts as K = 1
_K_TOL = 1e-9
# |S12*S21| below this is numerically zero transmission (about -200 dB per path)
_UNILATERAL_TOL = 1e-20


class NetworkError(ValueError):
    """Invalid network construction or incompatible operands."""


class SingularPointError(NetworkError):
    """A conversion is singular at some grid points.

    The conversion is still carried out everywhere else; ``result`` holds the
    partial output with NaN at the offending points so a sweep is never lost
    because of a few bad samples.
    """

    def __init__(self, message, indices, result=None):
        super().__init__(f"{message} at {len(indices)} point(s): indices {list(indices)[:10]}")
        self.indices = np.asarray(indices, dtype=int)
        self.result = result


def _readonly(a):
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FrequencyGrid:
    """Strictly ascending, positive frequency points in Hz."""

    points: np.ndarray

    def __post_init__(self):
        f = np.atleast_1d(np.asarray(self.points, dtype=float))
        if f.ndim != 1 or f.size == 0:
            raise NetworkError("frequency grid must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(f)) or np.any(f <= 0):
            raise NetworkError("frequencies must be finite and > 0")
        if f.size > 1 and np.any(np.diff(f) <= 0):
            raise NetworkError("frequencies must be strictly ascending")
        object.__setattr__(self, "points", _readonly(f))

    @classmethod
    def linspace(cls, start, stop, n):
        return cls(np.linspace(start, stop, int(n)))

    def __len__(self):
        return self.points.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.points, dtype=dtype)

    def same_as(self, other: FrequencyGrid, rtol=1e-9) -> bool:
        """Equal length and points within ``rtol`` (grids read back from text files differ in the last digits)."""
        if len(self) != len(other):
            return False
        return bool(np.all(np.abs(self.points - other.points) <= rtol * np.abs(other.points)))

    def index_of(self, f, rtol=1e-9):
        """Index of the grid point equal to ``f`` (relative tolerance), else None."""
        i = int(np.argmin(np.abs(self.points - f)))
        return i if abs(self.points[i] - f) <= rtol * abs(f) else None

    @property
    def omega(self):
        return 2 * np.pi * self.points


def _as_grid(grid):
    return grid if isinstance(grid, FrequencyGrid) else FrequencyGrid(grid)


def _port_pair(z_ref):
    z = np.broadcast_to(np.asarray(z_ref, dtype=float), (2,)).copy()
    if not np.all(np.isfinite(z)) or np.any(z <= 0):
        raise NetworkError(f"reference impedances must be real and > 0, got {z}")
    return z


@dataclass(frozen=True, eq=False)
class TwoPortNetwork:
    """S-parameters of a two-port over a frequency grid.

    ``ref_label`` optionally tags the reference impedance with a meaning that
    the numeric ``z_ref`` cannot carry, e.g. the unknown line impedance a TRL
    calibration refers to.
    """

    grid: FrequencyGrid
    s: np.ndarray
    z_ref: np.ndarray = field(default_factory=lambda: np.array([50.0, 50.0]))
    ref_label: str | None = None

    def __post_init__(self):
        grid = _as_grid(self.grid)
        s = np.asarray(self.s, dtype=complex)
        if s.ndim == 2 and s.shape == (2, 2):
            s = s[None]
        if s.ndim != 3 or s.shape[1:] != (2, 2):
            raise NetworkError(f"S array must have shape (n, 2, 2), got {s.shape}")
        if s.shape[0] != len(grid):
            raise NetworkError(
                f"length mismatch: {len(grid)} frequency points but {s.shape[0]} S-matrices"
            )
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "s", _readonly(s))
        object.__setattr__(self, "z_ref", _readonly(_port_pair(self.z_ref)))

    def __len__(self):
        return len(self.grid)

    @property
    def f(self):
        return self.grid.points

    @property
    def s11(self):
        return self.s[:, 0, 0]

    @property
    def s12(self):
        return self.s[:, 0, 1]

    @property
    def s21(self):
        return self.s[:, 1, 0]

    @property
    def s22(self):
        return self.s[:, 1, 1]

    @property
    def s_db(self):
        with np.errstate(divide="ignore"):
            return 20 * np.log10(np.abs(self.s))

    def s_at(self, f):
        """S-matrix at ``f``; linear interpolation of the complex entries between grid points."""
        i = self.grid.index_of(f)
        if i is not None:
            return self.s[i].copy()
        fp = self.f
        if not fp[0] <= f <= fp[-1]:
            raise NetworkError(f"{f} Hz lies outside the grid [{fp[0]}, {fp[-1]}]")
        out = np.empty((2, 2), dtype=complex)
        for i in range(2):
            for j in range(2):
                out[i, j] = np.interp(f, fp, self.s[:, i, j].real) + 1j * np.interp(
                    f, fp, self.s[:, i, j].imag
                )
        return out

    def with_s(self, s, z_ref=None, ref_label=None):
        return TwoPortNetwork(
            self.grid,
            s,
            self.z_ref if z_ref is None else z_ref,
            self.ref_label if ref_label is None else ref_label,
        )

    def flipped(self):
        """Same network with ports 1 and 2 swapped."""
        return TwoPortNetwork(self.grid, self.s[:, ::-1, ::-1], self.z_ref[::-1], self.ref_label)

    def allclose(self, other, atol=1e-12):
        return (
            self.grid.same_as(other.grid)
            and np.allclose(self.z_ref, other.z_ref)
            and np.max(np.abs(self.s - other.s)) <= atol
        )


@dataclass(frozen=True, eq=False)
class OnePortNetwork:
    """Reflection coefficient over a frequency grid."""

    grid: FrequencyGrid
    s: np.ndarray
    z_ref: float = 50.0

    def __post_init__(self):
        grid = _as_grid(self.grid)
        s = np.atleast_1d(np.asarray(self.s, dtype=complex)).reshape(-1)
        if s.size != len(grid):
            raise NetworkError(f"length mismatch: {len(grid)} points but {s.size} reflections")
        if not self.z_ref > 0:
            raise NetworkError("reference impedance must be > 0")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "s", _readonly(s))
        object.__setattr__(self, "z_ref", float(self.z_ref))

    def __len__(self):
        return len(self.grid)

    @property
    def f(self):
        return self.grid.points


def make_network(grid, s, z_ref=50.0, ref_label=None) -> TwoPortNetwork:
    """Validated two-port constructor.

    >>> net = make_network([140e9], [[[0, 1], [1, 0]]], 50)
    >>> complex(net.s21[0])
    (1+0j)
    """
    return TwoPortNetwork(_as_grid(grid), s, z_ref, ref_label)


def thru(grid, z_ref=50.0) -> TwoPortNetwork:
    grid = _as_grid(grid)
    s = np.zeros((len(grid), 2, 2), dtype=complex)
    s[:, 0, 1] = s[:, 1, 0] = 1
    return TwoPortNetwork(grid, s, z_ref)


def _check_singular(den, scale, what, result):
    bad = ~(np.abs(den) > _SINGULAR_RTOL * scale)
    if np.any(bad):
        result[bad] = np.nan
        raise SingularPointError(what, np.flatnonzero(bad), result)


# ---------------------------------------------------------------------------
# raw batch conversions (arrays in, arrays out)


def _s2abcd(s, z1, z2):
    s11, s12, s21, s22 = s[:, 0, 0], s[:, 0, 1], s[:, 1, 0], s[:, 1, 1]
    den = 2 * s21 * np.sqrt(z1 * z2)
    with np.errstate(divide="ignore", invalid="ignore"):
        abcd = np.empty_like(s)
        abcd[:, 0, 0] = ((z1 + s11 * z1) * (1 - s22) + s12 * s21 * z1) / den
        abcd[:, 0, 1] = ((z1 + s11 * z1) * (z2 + s22 * z2) - s12 * s21 * z1 * z2) / den
        abcd[:, 1, 0] = ((1 - s11) * (1 - s22) - s12 * s21) / den
        abcd[:, 1, 1] = ((1 - s11) * (z2 + s22 * z2) + s12 * s21 * z2) / den
    return abcd, den


def _abcd2s(abcd, z1, z2):
    a, b, c, d = abcd[:, 0, 0], abcd[:, 0, 1], abcd[:, 1, 0], abcd[:, 1, 1]
    den = a * z2 + b + c * z1 * z2 + d * z1
    r = np.sqrt(z1 * z2)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.empty_like(abcd)
        s[:, 0, 0] = (a * z2 + b - c * z1 * z2 - d * z1) / den
        s[:, 0, 1] = 2 * (a * d - b * c) * r / den
        s[:, 1, 0] = 2 * r / den
        s[:, 1, 1] = (-a * z2 + b - c * z1 * z2 + d * z1) / den
    return s, den


def s_to_t(s):
    """Cascade (T) matrices with ``[b1, a1] = T @ [a2, b2]``; requires S21 != 0."""
    s = np.asarray(s, dtype=complex)
    s11, s12, s21, s22 = s[..., 0, 0], s[..., 0, 1], s[..., 1, 0], s[..., 1, 1]
    t = np.empty_like(s)
    with np.errstate(divide="ignore", invalid="ignore"):
        t[..., 0, 0] = (s12 * s21 - s11 * s22) / s21
        t[..., 0, 1] = s11 / s21
        t[..., 1, 0] = -s22 / s21
        t[..., 1, 1] = 1 / s21
    return t


def t_to_s(t):
    t = np.asarray(t, dtype=complex)
    t11, t12, t21, t22 = t[..., 0, 0], t[..., 0, 1], t[..., 1, 0], t[..., 1, 1]
    s = np.empty_like(t)
    with np.errstate(divide="ignore", invalid="ignore"):
        s[..., 0, 0] = t12 / t22
        s[..., 0, 1] = (t11 * t22 - t12 * t21) / t22
        s[..., 1, 0] = 1 / t22
        s[..., 1, 1] = -t21 / t22
    return s


# ---------------------------------------------------------------------------
# public conversions


def s_to_abcd(net: TwoPortNetwork) -> np.ndarray:
    """ABCD matrices of ``net``.

    Both ports must share one reference impedance; call :func:`renormalize`
    first otherwise. Points with S21 = 0 have no ABCD representation.
    """
    z1, z2 = net.z_ref
    if z1 != z2:
        raise NetworkError(f"unequal port impedances {z1} / {z2}; renormalize first")
    abcd, den = _s2abcd(net.s, z1, z2)
    _check_singular(den, z1, "S21 = 0, no ABCD representation", abcd)
    return abcd


def abcd_to_s(abcd, z_ref, grid) -> TwoPortNetwork:
    """Inverse of :func:`s_to_abcd`; ``z_ref`` may be a scalar or per-port pair."""
    abcd = np.asarray(abcd, dtype=complex).reshape(-1, 2, 2)
    z1, z2 = _port_pair(z_ref)
    s, den = _abcd2s(abcd, z1, z2)
    scale = np.abs(abcd[:, 0, 0]) * z2 + np.abs(abcd[:, 0, 1]) + np.abs(abcd[:, 1, 0]) * z1 * z2
    scale = scale + np.abs(abcd[:, 1, 1]) * z1
    _check_singular(den, scale, "A*Z0 + B + C*Z0^2 + D*Z0 = 0", s)
    return TwoPortNetwork(_as_grid(grid), s, (z1, z2))


def s_to_z(net: TwoPortNetwork) -> np.ndarray:
    """Open-circuit impedance matrices, ``Z = F (I + S)(I - S)^-1 F`` with ``F = diag(sqrt(z_ref))``."""
    eye = np.eye(2)
    f = np.sqrt(net.z_ref)
    d = eye - net.s
    det = d[:, 0, 0] * d[:, 1, 1] - d[:, 0, 1] * d[:, 1, 0]
    adj = np.empty_like(d)
    adj[:, 0, 0], adj[:, 1, 1] = d[:, 1, 1], d[:, 0, 0]
    adj[:, 0, 1], adj[:, 1, 0] = -d[:, 0, 1], -d[:, 1, 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        z = (eye + net.s) @ adj / det[:, None, None]
    z = z * f[None, :, None] * f[None, None, :]
    _check_singular(det, 1.0, "I - S is singular, Z undefined", z)
    return z


def z_to_s(z, z_ref, grid) -> TwoPortNetwork:
    z = np.asarray(z, dtype=complex).reshape(-1, 2, 2)
    zr = _port_pair(z_ref)
    f = 1 / np.sqrt(zr)
    zn = z * f[None, :, None] * f[None, None, :]
    eye = np.eye(2)
    p = zn + eye
    det = p[:, 0, 0] * p[:, 1, 1] - p[:, 0, 1] * p[:, 1, 0]
    adj = np.empty_like(p)
    adj[:, 0, 0], adj[:, 1, 1] = p[:, 1, 1], p[:, 0, 0]
    adj[:, 0, 1], adj[:, 1, 0] = -p[:, 0, 1], -p[:, 1, 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        s = (zn - eye) @ adj / det[:, None, None]
    scale = 1 + np.abs(zn).sum(axis=(1, 2)) ** 2
    _check_singular(det, scale, "Z + Z0 is singular", s)
    return TwoPortNetwork(_as_grid(grid), s, zr)


def _check_same_grid(a, b):
    if not a.grid.same_as(b.grid):
        raise NetworkError("networks are defined on different frequency grids")


def cascade(a: TwoPortNetwork, b: TwoPortNetwork, *more: TwoPortNetwork) -> TwoPortNetwork:
    """Chain connection ``a -> b [-> ...]``.

    Evaluated with the S-domain star product, which equals the ABCD product
    but stays finite where a member has S21 = 0 (e.g. at a transmission zero).
    The junction reference impedances must agree.
    """
    if more:
        return cascade(cascade(a, b), *more)
    _check_same_grid(a, b)
    if not np.isclose(a.z_ref[1], b.z_ref[0], rtol=1e-12):
        raise NetworkError(
            f"impedance mismatch at junction: {a.z_ref[1]} ohm vs {b.z_ref[0]} ohm"
        )
    sa, sb = a.s, b.s
    den = 1 - sa[:, 1, 1] * sb[:, 0, 0]
    s = np.empty_like(sa)
    with np.errstate(divide="ignore", invalid="ignore"):
        s[:, 0, 0] = sa[:, 0, 0] + sa[:, 0, 1] * sb[:, 0, 0] * sa[:, 1, 0] / den
        s[:, 0, 1] = sa[:, 0, 1] * sb[:, 0, 1] / den
        s[:, 1, 0] = sa[:, 1, 0] * sb[:, 1, 0] / den
        s[:, 1, 1] = sb[:, 1, 1] + sb[:, 1, 0] * sa[:, 1, 1] * sb[:, 0, 1] / den
    _check_singular(den, 1.0, "internal resonance (1 - S22a*S11b = 0)", s)
    return TwoPortNetwork(a.grid, s, (a.z_ref[0], b.z_ref[1]))


def series_connect(a: TwoPortNetwork, b: TwoPortNetwork) -> TwoPortNetwork:
    """Series-series (loop) interconnection: port currents shared, port voltages add.

    Equivalent to adding Z-matrices, but solved directly on the waves so that
    members without a Z-matrix (a thru, or an open at resonance) are allowed.
    With normalized voltages ``v = a + b`` and currents ``i = a - b`` per member,
    equal currents and summed voltages give a 4x4 linear system per point.
    """
    _check_same_grid(a, b)
    if not np.allclose(a.z_ref, b.z_ref, rtol=1e-12):
        raise NetworkError("series connection needs identical reference impedances")
    n = len(a)
    eye = np.broadcast_to(np.eye(2), (n, 2, 2))
    s1, s2 = a.s, b.s
    m = np.empty((n, 4, 4), dtype=complex)
    # (I - S1) a1 - (I - S2) a2 = 0 ; 2 a1 + (I + S2) a2 = 2 A
    m[:, :2, :2] = eye - s1
    m[:, :2, 2:] = s2 - eye
    m[:, 2:, :2] = 2 * eye
    m[:, 2:, 2:] = eye + s2
    rhs = np.zeros((n, 4, 2), dtype=complex)
    rhs[:, 2:, :] = 2 * eye
    cond = np.linalg.cond(m)
    bad = ~(cond < 1 / _SINGULAR_RTOL)
    m_safe = np.where(bad[:, None, None], np.eye(4), m)
    sol = np.linalg.solve(m_safe, rhs)
    a1, a2 = sol[:, :2, :], sol[:, 2:, :]
    # B = (v - i)/2 = S1 a1 + (I + S2) a2 / 2 with A = I
    s = s1 @ a1 + 0.5 * (eye + s2) @ a2
    if np.any(bad):
        s[bad] = np.nan
        raise SingularPointError(
            "series connection undefined", np.flatnonzero(bad), TwoPortNetwork(a.grid, s, a.z_ref)
        )
    return TwoPortNetwork(a.grid, s, a.z_ref)


def renormalize(net: TwoPortNetwork, z_new) -> TwoPortNetwork:
    """Re-express ``net`` in new real reference impedances.

    Old and new waves are related by ``a' = P a + Q b`` and ``b' = Q a + P b``
    with diagonal ``P = (Z + Z')/(2 sqrt(Z Z'))`` and ``Q = (Z - Z')/(2 sqrt(Z Z'))``,
    hence ``S' = (Q + P S)(P + Q S)^-1``.
    """
    z_old = net.z_ref
    z_new = _port_pair(z_new)
    if np.array_equal(z_old, z_new):
        return TwoPortNetwork(net.grid, net.s, z_new, net.ref_label)
    g = 2 * np.sqrt(z_old * z_new)
    p = np.diag((z_old + z_new) / g)
    q = np.diag((z_old - z_new) / g)
    num = q + p @ net.s
    den = p + q @ net.s
    s = np.linalg.solve(den.transpose(0, 2, 1), num.transpose(0, 2, 1)).transpose(0, 2, 1)
    return TwoPortNetwork(net.grid, s, z_new, net.ref_label)


@dataclass(frozen=True, eq=False)
class Stability:
    """Rollett factor ``k``, ``|Delta|`` and a mask of unilateral points."""

    k: np.ndarray
    delta_mag: np.ndarray
    unilateral: np.ndarray


def stability_k(net: TwoPortNetwork) -> Stability:
    s11, s12, s21, s22 = net.s11, net.s12, net.s21, net.s22
    delta = s11 * s22 - s12 * s21
    loop = np.abs(s12 * s21)
    unilateral = ~(loop > _UNILATERAL_TOL)
    with np.errstate(divide="ignore", invalid="ignore"):
        k = (1 - np.abs(s11) ** 2 - np.abs(s22) ** 2 + np.abs(delta) ** 2) / (2 * loop)
    k = np.where(unilateral, np.nan, k)
    return Stability(k=k, delta_mag=np.abs(delta), unilateral=unilateral)


@dataclass(frozen=True, eq=False)
class GainProfile:
    """Maximum available gain (or maximum stable gain where ``stable`` is False)."""

    grid: FrequencyGrid
    gmax_db: np.ndarray
    stable: np.ndarray
    unilateral: np.ndarray

    def __len__(self):
        return len(self.grid)


def gmax(net: TwoPortNetwork) -> GainProfile:
    """Maximum available power gain.

    For ``K >= 1`` this is MAG ``|S21/S12| (K - sqrt(K^2 - 1))``; below that the
    maximum stable gain ``|S21/S12|`` is returned with ``stable = False``, which
    keeps a single continuous curve while marking the regime. Unilateral points
    (S12 S21 numerically zero) give NaN and are flagged.
    """
    st = stability_k(net)
    k = st.k
    ratio = np.full(len(net), np.nan)
    ok = ~st.unilateral
    ratio[ok] = np.abs(net.s21[ok] / net.s12[ok])
    # rounding error of K itself; large when S12*S21 is tiny
    terms = 1 + np.abs(net.s11) ** 2 + np.abs(net.s22) ** 2 + st.delta_mag**2
    with np.errstate(divide="ignore", invalid="ignore"):
        k_err = 16 * np.finfo(float).eps * terms / (2 * np.abs(net.s12 * net.s21))
    k_ge1 = ok & (k >= 1 - np.maximum(_K_TOL, k_err))
    # K - sqrt(K^2 - 1) is ill-conditioned at K = 1; snap K there when the
    # deviation is below k_err
    kc = np.where(k_ge1, np.maximum(k, 1.0), 1.0)
    kc = np.where(k_ge1 & (kc - 1 <= k_err), 1.0, kc)
    g = np.where(k_ge1, ratio * (kc - np.sqrt(kc**2 - 1)), ratio)
    with np.errstate(divide="ignore", invalid="ignore"):
        g_db = 10 * np.log10(g)
    stable = k_ge1 & (st.delta_mag <= 1 + _K_TOL)
    return GainProfile(net.grid, g_db, stable, st.unilateral)
