"""Pure-Python/numpy kernels; the fallback for :mod:`chiptrans._ckernels`.

Both modules expose the same functions with the same semantics, and
``tests/test_kernels.py`` checks them against each other.
"""
import numpy as np

TWO_PI = 2 * np.pi
# candidates within this of the minimum |S11| count as ties
MATCH_TIE_TOL = 1e-13


def series_match_search(abcd, z1, z2, side, z0s, thetas):
    """Exhaustive search for the series line minimizing ``|S11|``.

    ``abcd`` is the 2x2 ABCD matrix of the network at the design frequency,
    ``z1``/``z2`` the port reference impedances, ``side`` 1 or 2 the port where
    the line is inserted. ``thetas`` (radians) is the outer loop and ``z0s``
    the inner loop, both ascending. Candidates within ``MATCH_TIE_TOL`` of the
    minimum are ties, resolved to the first in (theta, z0) order.

    Returns ``(i_z0, i_theta, best_abs_s11)``.
    """
    z0 = np.asarray(z0s, dtype=float)[None, :]
    th = np.asarray(thetas, dtype=float)[:, None]
    c, s = np.cos(th), np.sin(th)
    la, lb, lc, ld = c, 1j * z0 * s, 1j * s / z0, c
    na, nb, nc, nd = abcd[0, 0], abcd[0, 1], abcd[1, 0], abcd[1, 1]
    if side == 1:
        a = la * na + lb * nc
        b = la * nb + lb * nd
        cc = lc * na + ld * nc
        d = lc * nb + ld * nd
    else:
        a = na * la + nb * lc
        b = na * lb + nb * ld
        cc = nc * la + nd * lc
        d = nc * lb + nd * ld
    num = a * z2 + b - cc * z1 * z2 - d * z1
    den = a * z2 + b + cc * z1 * z2 + d * z1
    mag = np.abs(num / den)
    flat = int(np.argmax(mag <= mag.min() + MATCH_TIE_TOL))
    it, iz = divmod(flat, mag.shape[1])
    return iz, it, float(mag[it, iz])


def unwrap_phase(freq, phase):
    """Continuity unwrap of a phase lag sampled on ``freq``.

    Each point takes the 2*pi branch nearest the previous point. The result is
    then shifted by a whole number of turns so that a straight-line fit through
    it extrapolates to ~0 at DC (a passive line has no phase at f = 0).

    Returns ``(unwrapped, bad)`` where ``bad`` is the first index at which the
    sampling looks too coarse to unwrap unambiguously, or -1. A fit that
    misses DC by more than a quarter turn is reported at index 1.
    """
    freq = np.asarray(freq, dtype=float)
    out = np.unwrap(np.asarray(phase, dtype=float))
    bad = -1
    n = out.size
    if n >= 2:
        step = np.diff(out)
        h = np.diff(freq)
        if n >= 3:
            expected = step[:-1] * h[1:] / h[:-1]
            jump = np.flatnonzero(np.abs(step[1:] - expected) > np.pi / 2)
            if jump.size:
                bad = int(jump[0]) + 2
        if bad < 0:
            back = np.flatnonzero(step < -np.pi / 2)
            if back.size:
                bad = int(back[0]) + 1
        intercept = np.polyfit(freq, out, 1)[1]
        shift = TWO_PI * np.round(intercept / TWO_PI)
        out = out - shift
        # an aliased linear phase extrapolates to a fraction of a turn at DC
        if bad < 0 and abs(intercept - shift) > np.pi / 2:
            bad = 1
    else:
        out = out.copy()
    return out, bad
