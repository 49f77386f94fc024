# cython: language_level=3
"""Compiled kernels; see :mod:`chiptrans._pykernels` for the reference semantics."""
import numpy as np

from libc.math cimport M_PI, cos, sin, sqrt, floor, fabs

cdef double MATCH_TIE_TOL = 1e-13

cdef extern from "complex.h" nogil:
    double cabs(double complex)


def series_match_search(abcd, double z1, double z2, int side, z0s, thetas):
    cdef const double[::1] z0v = np.ascontiguousarray(z0s, dtype=np.float64)
    cdef const double[::1] thv = np.ascontiguousarray(thetas, dtype=np.float64)
    cdef double complex na = abcd[0, 0], nb = abcd[0, 1], nc = abcd[1, 0], nd = abcd[1, 1]
    cdef Py_ssize_t it, iz, nz = z0v.shape[0], nt = thv.shape[0]
    cdef Py_ssize_t k, best_k = 0
    mags_arr = np.empty(nt * nz, dtype=np.float64)
    cdef double[::1] mags = mags_arr
    cdef double best = 1e308, c, s, z0
    cdef double complex la, lb, lc, ld, a, b, cc, d, num, den
    with nogil:
        for it in range(nt):
            c = cos(thv[it])
            s = sin(thv[it])
            for iz in range(nz):
                z0 = z0v[iz]
                la = c
                lb = 1j * z0 * s
                lc = 1j * s / z0
                ld = c
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
                mags[it * nz + iz] = cabs(num / den)
                if mags[it * nz + iz] < best:
                    best = mags[it * nz + iz]
        # first candidate within the tie tolerance, in (theta, z0) order
        for k in range(nt * nz):
            if mags[k] <= best + MATCH_TIE_TOL:
                best_k = k
                break
    return best_k % nz, best_k // nz, mags[best_k]


def unwrap_phase(freq, phase):
    cdef const double[::1] f = np.ascontiguousarray(freq, dtype=np.float64)
    cdef const double[::1] p = np.ascontiguousarray(phase, dtype=np.float64)
    cdef Py_ssize_t n = p.shape[0], k
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double two_pi = 2 * M_PI, d, step, prev_step, expected
    cdef double sf = 0, sp = 0, sff = 0, sfp = 0, intercept, shift
    cdef Py_ssize_t bad = -1
    if n == 0:
        return out_arr, -1
    out[0] = p[0]
    for k in range(1, n):
        d = p[k] - p[k - 1]
        # same branch choice as numpy.unwrap: nearest turn, ties toward +pi
        d = d - two_pi * floor((d + M_PI) / two_pi)
        if d == -M_PI and p[k] - p[k - 1] > 0:
            d = M_PI
        out[k] = out[k - 1] + d
    if n >= 3:
        for k in range(2, n):
            step = out[k] - out[k - 1]
            prev_step = out[k - 1] - out[k - 2]
            expected = prev_step * (f[k] - f[k - 1]) / (f[k - 1] - f[k - 2])
            if fabs(step - expected) > M_PI / 2:
                bad = k
                break
    if bad < 0 and n >= 2:
        for k in range(1, n):
            if out[k] - out[k - 1] < -M_PI / 2:
                bad = k
                break
    if n >= 2:
        for k in range(n):
            sf += f[k]
            sp += out[k]
            sff += f[k] * f[k]
            sfp += f[k] * out[k]
        intercept = (sp * sff - sf * sfp) / (n * sff - sf * sf)
        shift = two_pi * _round_half_even(intercept / two_pi)
        for k in range(n):
            out[k] -= shift
        # an aliased linear phase extrapolates to a fraction of a turn at DC
        if bad < 0 and fabs(intercept - shift) > M_PI / 2:
            bad = 1
    return out_arr, bad


cdef double _round_half_even(double x):
    cdef double r = floor(x + 0.5)
    if r - x == 0.5 and (<long long>r) % 2 != 0:
        r -= 1
    return r
