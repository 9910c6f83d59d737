"""Pure numpy particle-step kernels (fallback backend).

Each function advances a chunk of particles by one time step in place and
returns event counts.  The Gaussian increments are drawn positionally from
the counter-based generator, so results do not depend on chunking or on
which backend executes the chunk (up to libm rounding; within one backend
they are exactly reproducible).

Regime dispatch for the 1D scheme:
  x == 1        absorbing, no update
  x <  lo       implicit square-root step (positivity preserving)
  x >  hi       log-coordinate step in y = -ln(1-x)
  otherwise     explicit Euler-Maruyama; excursions outside [0,1] are
                clamped to the nearest threshold and counted
"""

from __future__ import annotations

import numpy as np

from .errors import NegativeDiscriminantError
from .rng import normals

BACKEND = "python"


def step_chunk_1d(
    x: np.ndarray,
    keys: np.ndarray,
    step_index: int,
    c0: float,
    c1: float,
    dt: float,
    lo: float,
    hi: float,
) -> tuple[int, int]:
    """One step for every particle in the chunk; returns clamp counts."""
    n = normals(keys, step_index)
    alive = x < 1.0
    xv = x

    one_minus = 1.0 - xv
    drift = (c0 * one_minus - c1 * xv) * one_minus

    is_low = alive & (xv < lo)
    is_high = alive & (xv > hi)
    is_mid = alive & ~is_low & ~is_high

    out = xv.copy()

    # implicit step near 0: solve a quadratic in sqrt(x')
    if np.any(is_low):
        g = np.sqrt(2.0 * dt) * one_minus[is_low] * n[is_low]
        target = xv[is_low] + drift[is_low] * dt
        disc = g * g + 4.0 * target
        if np.any(disc < 0.0):
            bad = int(np.flatnonzero(is_low)[np.argmin(disc)])
            raise NegativeDiscriminantError(
                "implicit square-root step has negative discriminant "
                "(drift pushed x + drift*dt below 0)",
                particle_index=bad,
                time=None,
            )
        s = 0.5 * (g + np.sqrt(disc))
        out[is_low] = s * s

    # log coordinates near 1: y = -ln(1-x)
    if np.any(is_high):
        xh = xv[is_high]
        y = -np.log(1.0 - xh)
        yp = y + (c0 * (1.0 - xh) - c1 * xh + xh) * dt + np.sqrt(2.0 * xh * dt) * n[is_high]
        out[is_high] = 1.0 - np.exp(-yp)

    # explicit interior step
    if np.any(is_mid):
        xm = xv[is_mid]
        out[is_mid] = xm + drift[is_mid] * dt + (1.0 - xm) * np.sqrt(2.0 * xm * dt) * n[is_mid]

    clamp_lo = int(np.count_nonzero(is_mid & (out < 0.0)))
    clamp_hi = int(np.count_nonzero(is_mid & (out > 1.0)))
    out = np.where(is_mid & (out < 0.0), lo, out)
    out = np.where(is_mid & (out > 1.0), hi, out)

    x[...] = out
    return clamp_lo, clamp_hi


def step_chunk_2d(
    x: np.ndarray,
    y: np.ndarray,
    keys: np.ndarray,
    step_index: int,
    g12: float,
    g13: float,
    g23: float,
    dt: float,
) -> tuple[int, int, int]:
    """One triangle step; returns (cutoff_x, cutoff_y, rescale) counts.

    Boundary handling order: per-coordinate cutoff at 0 first, then, if the
    updated point has left the simplex through the diagonal, both
    coordinates are rescaled by (x_prev + y_prev)/(x_new + y_new).
    """
    base = 3 * step_index
    w1 = normals(keys, base)
    w2 = normals(keys, base + 1)
    w3 = normals(keys, base + 2)

    xm1 = x - 1.0
    ym1 = y - 1.0
    drift_x = g12 * (y - x) + g23 * ym1 * x + g13 * xm1 * xm1
    drift_y = -g12 * (y - x) + g23 * ym1 * ym1 + g13 * xm1 * y

    s1 = np.sqrt(2.0 * g13 * x * dt)
    s2 = np.sqrt(2.0 * g23 * y * dt)
    s3 = np.sqrt(2.0 * g12 * x * y * dt)

    xn = x + drift_x * dt + s1 * xm1 * w1 + s2 * x * w2 + s3 * w3
    yn = y + drift_y * dt + s1 * y * w1 + s2 * ym1 * w2 - s3 * w3

    cut_x = int(np.count_nonzero(xn < 0.0))
    cut_y = int(np.count_nonzero(yn < 0.0))
    xn = np.maximum(xn, 0.0)
    yn = np.maximum(yn, 0.0)

    ssum = xn + yn
    over = ssum > 1.0
    n_rescale = int(np.count_nonzero(over))
    if n_rescale:
        factor = np.where(over, (x + y) / np.where(over, ssum, 1.0), 1.0)
        xn = xn * factor
        yn = yn * factor

    x[...] = xn
    y[...] = yn
    return cut_x, cut_y, n_rescale
