"""The compiled kernels and the numpy fallback must agree exactly in their choices."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chiptrans import _backend, _pykernels

ck = pytest.importorskip("chiptrans._ckernels")


def test_backend_selected():
    assert _backend.BACKEND in ("cython", "python")


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([1, 2]))
def test_match_search_agrees(seed, side):
    r = np.random.default_rng(seed)
    abcd = r.normal(size=(2, 2)) + 1j * r.normal(size=(2, 2))
    z0s = np.arange(10, 100.1, 2.5)
    th = np.deg2rad(np.arange(0, 90.1, 1.0))
    a = _pykernels.series_match_search(abcd, 50.0, 50.0, side, z0s, th)
    b = ck.series_match_search(abcd, 50.0, 50.0, side, z0s, th)
    assert a[:2] == b[:2]
    assert a[2] == pytest.approx(b[2], rel=1e-12)


def test_match_search_tie_prefers_small_theta():
    abcd = np.eye(2, dtype=complex)  # thru: every 50-ohm line is a perfect match
    z0s = np.array([40.0, 50.0, 60.0])
    th = np.deg2rad([0.0, 10.0, 20.0])
    for mod in (_pykernels, ck):
        iz, it, best = mod.series_match_search(abcd, 50.0, 50.0, 1, z0s, th)
        assert (iz, it) == (0, 0) and best == 0.0


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 300))
def test_unwrap_agrees(seed, n):
    r = np.random.default_rng(seed)
    f = np.sort(r.uniform(1e9, 100e9, n))
    f = np.unique(f)
    slope = r.uniform(0, 4e-9)
    phase = np.angle(np.exp(-1j * (slope * 2 * np.pi * f + r.normal(0, 0.3, f.size))))
    a, bad_a = _pykernels.unwrap_phase(f, -phase)
    b, bad_b = ck.unwrap_phase(f, -phase)
    assert bad_a == bad_b
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-9)


def test_unwrap_readonly_input():
    f = np.linspace(1e9, 10e9, 10)
    p = np.linspace(0.1, 1.0, 10)
    f.setflags(write=False)
    p.setflags(write=False)
    out, bad = ck.unwrap_phase(f, p)
    assert bad == -1 and out.shape == (10,)
