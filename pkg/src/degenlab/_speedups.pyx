# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled particle-step kernels.

Mirror of the numpy fallback, same positional random-number scheme and the
same arithmetic expression order per particle.  Integer random words are
bit-identical to the fallback; float results agree to libm rounding.
"""

from libc.math cimport sqrt, log, exp, cos

import numpy as np
cimport numpy as cnp

from .errors import NegativeDiscriminantError

cnp.import_array()

BACKEND = "cython"

cdef extern from *:
    """
    #include <stdint.h>
    static inline uint64_t dl_mix(uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    """
    unsigned long long dl_mix(unsigned long long z) nogil

cdef double TWO_PI = 6.283185307179586476925286766559
cdef double TWO_NEG53 = 1.1102230246251565404236316680908e-16
cdef unsigned long long NORMAL_BASE = (<unsigned long long>1) << 63


cdef inline double _uniform(unsigned long long key, unsigned long long counter) nogil:
    return (<double>(dl_mix(key + dl_mix(counter)) >> 11) + 0.5) * TWO_NEG53


cdef inline double _normal(unsigned long long key, unsigned long long counter) nogil:
    cdef unsigned long long c = NORMAL_BASE + counter * 2
    cdef double u1 = _uniform(key, c)
    cdef double u2 = _uniform(key, c + 1)
    return sqrt(-2.0 * log(u1)) * cos(TWO_PI * u2)


def step_chunk_1d(
    double[::1] x,
    unsigned long long[::1] keys,
    unsigned long long step_index,
    double c0,
    double c1,
    double dt,
    double lo,
    double hi,
):
    cdef Py_ssize_t i, n = x.shape[0]
    cdef long clamp_lo = 0, clamp_hi = 0
    cdef Py_ssize_t bad = -1
    cdef double xv, one_minus, drift, w, g, target, disc, s, y, yp, out
    cdef double sqrt2dt = sqrt(2.0 * dt)
    with nogil:
        for i in range(n):
            xv = x[i]
            if xv >= 1.0:
                continue
            w = _normal(keys[i], step_index)
            one_minus = 1.0 - xv
            drift = (c0 * one_minus - c1 * xv) * one_minus
            if xv < lo:
                g = sqrt2dt * one_minus * w
                target = xv + drift * dt
                disc = g * g + 4.0 * target
                if disc < 0.0:
                    bad = i
                    break
                s = 0.5 * (g + sqrt(disc))
                out = s * s
            elif xv > hi:
                y = -log(1.0 - xv)
                yp = y + (c0 * (1.0 - xv) - c1 * xv + xv) * dt + sqrt(2.0 * xv * dt) * w
                out = 1.0 - exp(-yp)
            else:
                out = xv + drift * dt + (1.0 - xv) * sqrt(2.0 * xv * dt) * w
                if out < 0.0:
                    out = lo
                    clamp_lo += 1
                elif out > 1.0:
                    out = hi
                    clamp_hi += 1
            x[i] = out
    if bad >= 0:
        raise NegativeDiscriminantError(
            "implicit square-root step has negative discriminant "
            "(drift pushed x + drift*dt below 0)",
            particle_index=int(bad),
            time=None,
        )
    return clamp_lo, clamp_hi


def step_chunk_2d(
    double[::1] x,
    double[::1] y,
    unsigned long long[::1] keys,
    unsigned long long step_index,
    double g12,
    double g13,
    double g23,
    double dt,
):
    cdef Py_ssize_t i, n = x.shape[0]
    cdef long cut_x = 0, cut_y = 0, n_rescale = 0
    cdef unsigned long long base = 3 * step_index
    cdef double xv, yv, xm1, ym1, dx, dy, s1, s2, s3, w1, w2, w3, xn, yn, ssum, factor
    with nogil:
        for i in range(n):
            xv = x[i]
            yv = y[i]
            w1 = _normal(keys[i], base)
            w2 = _normal(keys[i], base + 1)
            w3 = _normal(keys[i], base + 2)
            xm1 = xv - 1.0
            ym1 = yv - 1.0
            dx = g12 * (yv - xv) + g23 * ym1 * xv + g13 * xm1 * xm1
            dy = -g12 * (yv - xv) + g23 * ym1 * ym1 + g13 * xm1 * yv
            s1 = sqrt(2.0 * g13 * xv * dt)
            s2 = sqrt(2.0 * g23 * yv * dt)
            s3 = sqrt(2.0 * g12 * xv * yv * dt)
            xn = xv + dx * dt + s1 * xm1 * w1 + s2 * xv * w2 + s3 * w3
            yn = yv + dy * dt + s1 * yv * w1 + s2 * ym1 * w2 - s3 * w3
            if xn < 0.0:
                xn = 0.0
                cut_x += 1
            if yn < 0.0:
                yn = 0.0
                cut_y += 1
            ssum = xn + yn
            if ssum > 1.0:
                factor = (xv + yv) / ssum
                xn = xn * factor
                yn = yn * factor
                n_rescale += 1
            x[i] = xn
            y[i] = yn
    return cut_x, cut_y, n_rescale
