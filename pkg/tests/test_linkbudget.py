import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chiptrans.linkbudget import (
    ConfigError,
    LinkBudgetConfig,
    capacity,
    capacity_sweep,
    reference_config,
    sensitivity,
    snr,
)
from chiptrans.units import db10, dbm_to_w, from_db10, from_db20, db20, w_to_dbm

# scalar script with hand-typed constants (k_B = 1.380649e-23, c = 299792458)
SNR_REFERENCE = 149.23623004576095
C_EXACT_REFERENCE = 1374972757911.0452
SENSITIVITY_REFERENCE = -212603398072.79117


def test_reference_snr_frozen():
    assert snr(reference_config()) == pytest.approx(SNR_REFERENCE, rel=1e-12)


def test_reference_capacity_terabit():
    exact, approx = capacity(reference_config())
    assert exact == pytest.approx(C_EXACT_REFERENCE, rel=1e-12)
    assert exact >= 1e12 and exact > approx


def test_sensitivity_values():
    assert sensitivity(reference_config()) == pytest.approx(SENSITIVITY_REFERENCE, rel=1e-12)
    unit = reference_config(n_beams=1, n_pol=1, b=1.0)
    assert sensitivity(unit) == pytest.approx(-0.6643856189774724, rel=1e-12)
    assert sensitivity(reference_config(b=40e9)) == pytest.approx(2 * SENSITIVITY_REFERENCE, rel=1e-14)


def test_il_squared():
    cfg = reference_config()
    assert snr(cfg, 2.0) == pytest.approx(snr(cfg) / 4, rel=1e-14)


def test_distance_squared():
    assert snr(reference_config(d=10.0)) == pytest.approx(snr(reference_config()) / 4, rel=1e-14)


def test_scale_consistency():
    base = snr(reference_config())
    assert snr(reference_config(p_tx=2 * dbm_to_w(4.0))) == pytest.approx(2 * base, rel=1e-14)
    assert snr(reference_config(n_ant=64)) == pytest.approx(64 * base, rel=1e-14)


def test_il_below_one_rejected():
    with pytest.raises(ValueError):
        snr(reference_config(), 0.5)


def test_unit_snr_per_beam():
    cfg = reference_config()
    il = np.sqrt(snr(cfg) / cfg.n_beams)  # makes SNR / N_beams = 1
    exact, approx = capacity(cfg, il)
    assert exact == pytest.approx(cfg.n_beams * cfg.n_pol * cfg.b, rel=1e-12)
    assert approx == pytest.approx(0.0, abs=1e-3)


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 40))
def test_exact_above_approx(il_db):
    exact, approx = capacity(reference_config(), from_db10(il_db))
    assert exact >= approx >= 0


def test_sweep_monotone_and_grid():
    pts = capacity_sweep(reference_config(), 0, 6, 0.5)
    assert [p.il_db for p in pts] == pytest.approx(np.arange(0, 6.01, 0.5))
    c = [p.c_exact for p in pts]
    assert all(b < a for a, b in zip(c, c[1:]))


def test_high_snr_slope_converges():
    cfg = reference_config(p_tx=dbm_to_w(40.0))
    assert snr(cfg) / cfg.n_beams > 1e4
    h = 1e-4
    e0, _ = capacity(cfg, from_db10(0.5 - h))
    e1, _ = capacity(cfg, from_db10(0.5 + h))
    slope = (e1 - e0) / (2 * h)
    assert slope == pytest.approx(sensitivity(cfg), rel=5e-3)


def test_approx_close_at_high_snr():
    cfg = reference_config(p_tx=dbm_to_w(30.0))
    for p in capacity_sweep(cfg, 0, 6, 1):
        if p.snr_linear / cfg.n_beams > 100:
            assert p.c_approx == pytest.approx(p.c_exact, rel=0.01)


def test_config_from_dict_db_keys():
    cfg = LinkBudgetConfig.from_dict(
        dict(p_tx_dbm=4, g_t_db=5, g_r_db=5, n_ant=16, n_beams=8, n_pol=2, b=20e9, f0=140e9, d=5,
             noise_figure_db=10)
    )
    assert snr(cfg) == pytest.approx(SNR_REFERENCE, rel=1e-12)
    assert cfg.temperature == 290.0


def test_config_missing_keys_listed():
    with pytest.raises(ConfigError) as exc:
        LinkBudgetConfig.from_dict({"b": 1e9})
    msg = str(exc.value)
    for key in ("p_tx", "g_t", "n_ant", "noise_factor"):
        assert key in msg
    with pytest.raises(ConfigError, match="unknown"):
        LinkBudgetConfig.from_dict(dict(vars(reference_config()), bogus=1))


def test_config_validation():
    with pytest.raises(ConfigError):
        reference_config(n_beams=2.5)
    with pytest.raises(ConfigError):
        reference_config(d=-1)


@settings(max_examples=100, deadline=None)
@given(st.floats(-200, 200))
def test_db_round_trips(x):
    assert db10(from_db10(x)) == pytest.approx(x, abs=1e-12)
    assert db20(from_db20(x)) == pytest.approx(x, abs=1e-12)
    assert w_to_dbm(dbm_to_w(x)) == pytest.approx(x, abs=1e-12)
