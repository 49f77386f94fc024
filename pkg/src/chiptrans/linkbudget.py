"""Line-of-sight link budget and the capacity cost of transition loss.

The SNR expression is evaluated exactly as the product of transmitted power
density, receive effective area and inverse noise power::

    SNR = P_tx G_t N^2 / (4 pi d^2 IL) * c^2 G_r N^2 / (4 pi f0^2 IL) / (k T B F N)

so the transition loss ``IL`` enters squared (it hits both the transmitter
output and the receiver noise figure) and the array size enters as ``N^3``
overall. The ``N^3`` scaling is kept as written rather than re-derived.
"""
from __future__ import annotations

from dataclasses import MISSING, dataclass, fields

import numpy as np

from .units import C0, K_B, dbm_to_w, from_db10

__all__ = [
    "LinkBudgetConfig",
    "CapacityPoint",
    "ConfigError",
    "snr",
    "capacity",
    "sensitivity",
    "capacity_sweep",
    "reference_config",
]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class LinkBudgetConfig:
    """All link scalars in linear SI units (W, Hz, m, K; gains and noise factor linear)."""

    p_tx: float
    g_t: float
    g_r: float
    n_ant: int
    n_beams: int
    n_pol: int
    b: float
    f0: float
    d: float
    noise_factor: float
    temperature: float = 290.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not (np.isfinite(v) and v > 0):
                raise ConfigError(f"{f.name} must be > 0, got {v}")
        for name in ("n_ant", "n_beams", "n_pol"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ConfigError(f"{name} must be an integer >= 1, got {v}")
            object.__setattr__(self, name, int(v))

    # keys accepted in logarithmic form by from_dict
    _LOG_KEYS = {
        "p_tx": ("p_tx_dbm", dbm_to_w),
        "g_t": ("g_t_db", from_db10),
        "g_r": ("g_r_db", from_db10),
        "noise_factor": ("noise_figure_db", from_db10),
    }

    @classmethod
    def from_dict(cls, data):
        """Build from a mapping; power, gains and noise may be given in dBm/dB.

        ``p_tx_dbm``, ``g_t_db``, ``g_r_db`` and ``noise_figure_db`` are accepted
        in place of ``p_tx``, ``g_t``, ``g_r`` and ``noise_factor``.
        """
        if not isinstance(data, dict):
            raise ConfigError("link-budget config must be a JSON object")
        values, missing = {}, []
        for f in fields(cls):
            name = f.name
            log = cls._LOG_KEYS.get(name)
            if name in data:
                values[name] = float(data[name])
            elif log and log[0] in data:
                values[name] = float(log[1](float(data[log[0]])))
            elif f.default is MISSING:
                missing.append(name if not log else f"{name} (or {log[0]})")
        known = {f.name for f in fields(cls)} | {v[0] for v in cls._LOG_KEYS.values()}
        unknown = sorted(set(data) - known)
        if missing or unknown:
            parts = []
            if missing:
                parts.append("missing keys: " + ", ".join(missing))
            if unknown:
                parts.append("unknown keys: " + ", ".join(unknown))
            raise ConfigError("; ".join(parts))
        return cls(**values)


def reference_config(**overrides) -> LinkBudgetConfig:
    """The wideband base-station example: 140 GHz, 20 GHz, 16 elements, 8 beams, 2 polarizations."""
    cfg = dict(
        p_tx=float(dbm_to_w(4.0)),
        g_t=float(from_db10(5.0)),
        g_r=float(from_db10(5.0)),
        n_ant=16,
        n_beams=8,
        n_pol=2,
        b=20e9,
        f0=140e9,
        d=5.0,
        noise_factor=float(from_db10(10.0)),
        temperature=290.0,
    )
    cfg.update(overrides)
    return LinkBudgetConfig(**cfg)


@dataclass(frozen=True)
class CapacityPoint:
    il_db: float
    snr_linear: float
    c_exact: float
    c_approx: float

    @property
    def snr_db(self):
        return 10 * np.log10(self.snr_linear)


def snr(cfg: LinkBudgetConfig, il_linear=1.0):
    il = np.asarray(il_linear, dtype=float)
    if np.any(il < 1):
        raise ValueError("insertion loss must be >= 1 (linear)")
    n = cfg.n_ant
    density = cfg.p_tx * cfg.g_t * n**2 / (4 * np.pi * cfg.d**2 * il)
    area = C0**2 * cfg.g_r * n**2 / (4 * np.pi * cfg.f0**2 * il)
    noise = K_B * cfg.temperature * cfg.b * cfg.noise_factor * n
    return density * area / noise


def capacity(cfg: LinkBudgetConfig, il_linear=1.0):
    """Aggregate capacity ``(exact, high-SNR approximation)`` in bit/s.

    Each beam gets ``SNR/N_beams``. The exact value is
    ``N_beams N_pol B log2(1 + SNR/N_beams)``; the approximation drops the
    ``1 +`` and is clipped at zero where SNR/N_beams < 1.
    """
    per_beam = snr(cfg, il_linear) / cfg.n_beams
    scale = cfg.n_beams * cfg.n_pol * cfg.b
    exact = scale * np.log2(1 + per_beam)
    approx = scale * np.maximum(np.log2(per_beam), 0.0)
    return exact, approx


def sensitivity(cfg: LinkBudgetConfig):
    """Capacity change per dB of one-way transition loss (bit/s/dB), high-SNR limit."""
    return -(2 * np.log2(10) / 10) * cfg.n_beams * cfg.n_pol * cfg.b


def capacity_sweep(cfg: LinkBudgetConfig, start_db=0.0, stop_db=6.0, step_db=0.5):
    """Capacity at ``IL = start, start+step, ..., stop`` dB (stop included when on the step)."""
    if step_db <= 0 or stop_db < start_db:
        raise ValueError("sweep needs start <= stop and step > 0")
    if start_db < 0:
        raise ValueError("insertion loss must be >= 0 dB")
    n = int(np.floor((stop_db - start_db) / step_db + 1e-9)) + 1
    il_db = start_db + step_db * np.arange(n)
    il = from_db10(il_db)
    s = snr(cfg, il)
    exact, approx = capacity(cfg, il)
    return [CapacityPoint(float(a), float(b), float(c), float(d)) for a, b, c, d in zip(il_db, s, exact, approx)]
