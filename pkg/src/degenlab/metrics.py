"""Empirical distribution distances, histograms, and decay-rate fitting."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

import numpy as np

from .errors import ValidationError


def wasserstein_p_vs_density(samples: np.ndarray, quantile, p: float = 1.0) -> float:
    """Order-statistics estimate of W^p between a sample and a density.

    Matches the sorted sample to the quantiles at offsets (i - 1/2)/N:

        W^p = ( N^-1 sum_i |x_(i) - Finv((i - 1/2)/N)|^p )^(1/p)
    """
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ValidationError("empty sample set")
    if p < 1.0:
        raise ValidationError("p must be >= 1")
    srt = np.sort(samples)
    n = srt.size
    q = quantile((np.arange(n) + 0.5) / n)
    return float(np.mean(np.abs(srt - q) ** p) ** (1.0 / p))


def wasserstein_p_to_dirac(samples: np.ndarray, target: float = 1.0, p: float = 1.0) -> float:
    """W^p between a sample and a point mass: a plain p-th moment."""
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ValidationError("empty sample set")
    if p < 1.0:
        raise ValidationError("p must be >= 1")
    return float(np.mean(np.abs(samples - target) ** p) ** (1.0 / p))


def wasserstein_1_sample_sample(a: np.ndarray, b: np.ndarray) -> float:
    """W^1 between two equal-size empirical measures via sorted matching."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size != b.size:
        raise ValidationError(f"sample sizes differ: {a.size} vs {b.size}")
    if a.size == 0:
        raise ValidationError("empty sample set")
    return float(np.mean(np.abs(np.sort(a) - np.sort(b))))


def wasserstein_p_sample_sample(a: np.ndarray, b: np.ndarray, p: float) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size != b.size:
        raise ValidationError(f"sample sizes differ: {a.size} vs {b.size}")
    if a.size == 0:
        raise ValidationError("empty sample set")
    return float(np.mean(np.abs(np.sort(a) - np.sort(b)) ** p) ** (1.0 / p))


def ot_bruteforce_oracle(a: np.ndarray, b: np.ndarray, p: float = 1.0) -> float:
    """Exact optimal transport over all pairings; test oracle, n <= 8 only."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size != b.size:
        raise ValidationError(f"sample sizes differ: {a.size} vs {b.size}")
    if a.size == 0:
        raise ValidationError("empty sample set")
    if a.size > 8:
        raise ValidationError("brute-force oracle is capped at n = 8")
    best = np.inf
    for sigma in permutations(range(a.size)):
        cost = float(np.mean(np.abs(a - b[list(sigma)]) ** p))
        best = min(best, cost)
    return best ** (1.0 / p)


@dataclass(frozen=True)
class RateFitReport:
    rate: float
    intercept: float
    r_squared: float
    window: tuple
    n_points: int
    n_excluded_nonpositive: int

    def to_dict(self) -> dict:
        return {
            "rate": self.rate,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "window": list(self.window),
            "n_points": self.n_points,
            "n_excluded_nonpositive": self.n_excluded_nonpositive,
        }


def fit_exponential_rate(times, values, window: tuple | None = None) -> RateFitReport:
    """Least-squares fit of ln(value) = intercept + rate * t.

    Nonpositive values inside the window are excluded and counted; at least
    4 positive points are required.  A constant series gets rate 0 and
    r_squared 0 rather than a division error.
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.shape != v.shape or t.ndim != 1:
        raise ValidationError("times and values must be equal-length 1D arrays")
    if window is None:
        t_max = float(t.max()) if t.size else 0.0
        window = (t_max / 4.0, t_max)
    in_win = (t >= window[0] - 1e-12) & (t <= window[1] + 1e-12)
    pos = v > 0.0
    n_excluded = int(np.count_nonzero(in_win & ~pos))
    mask = in_win & pos
    if np.count_nonzero(mask) < 4:
        raise ValidationError(
            f"need >= 4 strictly positive points in window {window}, "
            f"got {int(np.count_nonzero(mask))}"
        )
    tt = t[mask]
    ly = np.log(v[mask])
    A = np.vstack([tt, np.ones_like(tt)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - (slope * tt + intercept)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    if ss_tot == 0.0:
        # constant series: degenerate fit, not an error
        slope, r2 = 0.0, 0.0
    else:
        r2 = max(0.0, 1.0 - ss_res / ss_tot)
    return RateFitReport(
        rate=float(slope),
        intercept=float(intercept),
        r_squared=float(min(r2, 1.0)),
        window=(float(window[0]), float(window[1])),
        n_points=int(np.count_nonzero(mask)),
        n_excluded_nonpositive=n_excluded,
    )


@dataclass(frozen=True)
class HistogramResult:
    bin_edges: np.ndarray
    counts: np.ndarray
    underflow: int
    overflow: int
    n_total: int
    density_norm: float  # divide counts by this for a density estimate

    def to_dict(self) -> dict:
        return {
            "bin_edges": self.bin_edges.tolist(),
            "counts": self.counts.tolist(),
            "underflow": self.underflow,
            "overflow": self.overflow,
            "n_total": self.n_total,
            "density_norm": self.density_norm,
        }


def histogram(samples, bins: int, value_range: tuple) -> HistogramResult:
    """Fixed-range histogram that books out-of-range samples explicitly."""
    samples = np.asarray(samples, dtype=float)
    if bins < 1:
        raise ValidationError("bins must be >= 1")
    lo, hi = float(value_range[0]), float(value_range[1])
    if not (hi > lo):
        raise ValidationError(f"empty histogram range ({lo}, {hi})")
    counts, edges = np.histogram(samples, bins=bins, range=(lo, hi))
    underflow = int(np.count_nonzero(samples < lo))
    overflow = int(np.count_nonzero(samples > hi))
    width = (hi - lo) / bins
    return HistogramResult(
        bin_edges=edges,
        counts=counts,
        underflow=underflow,
        overflow=overflow,
        n_total=int(samples.size),
        density_norm=float(samples.size * width),
    )


def noise_floor_vs_density(quantile, n: int, seed: int, n_rep: int = 3) -> float:
    """Mean sample-sample W^1 of independent quantile-sampled N-draws.

    The yardstick for 'as close as Monte Carlo allows': two exact draws
    from the target still differ by about this much.
    """
    from .rng import stream_keys, uniforms

    vals = []
    for r in range(n_rep):
        ka = stream_keys(seed, np.arange(2 * r * n, (2 * r + 1) * n))
        kb = stream_keys(seed, np.arange((2 * r + 1) * n, (2 * r + 2) * n))
        a = quantile(uniforms(ka, 0))
        b = quantile(uniforms(kb, 0))
        vals.append(wasserstein_1_sample_sample(a, b))
    return float(np.mean(vals))
