"""Scale functions, stationary densities, CDFs/quantiles, 2D edge density.

The stationary density is computed directly in x-coordinates as the speed
density

    m(x) = exp( int_{1/2}^x btilde/atilde ) / atilde(x),

which satisfies (atilde m)' = btilde m, hence int L f dm = 0 for smooth f.
A convenient identity: btilde/atilde = b(x) / (a(x) x (1-x)) for every
(m0, m1), so the drift ratio has simple poles at the endpoints with residues
e0 = b(0)/a(0) and -e1 = -b(1)/a(1).  Factoring those poles out gives

    m(x) = x^(e0-m0) * smooth,        x -> 0,
    m(x) = (1-x)^(-e1-m1) * smooth,   x -> 1,

so endpoint exponents are known analytically and singular endpoint
quadrature is done with the substitution x = t^(1/(1+e)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.integrate import quad
from scipy.interpolate import CubicSpline, PchipInterpolator

from .errors import DivergenceError, NonIntegrableError, ValidationError
from .operators import (
    End,
    EndpointKind,
    OperatorSpec1D,
    TriangleSpec,
    classify_endpoint,
    coefficients_full,
)

_QUAD_TOL = 1e-12
_SPLIT = 0.25  # endpoint pieces [0, SPLIT] and [1-SPLIT, 1] get the substitution


def _drift_residues(spec: OperatorSpec1D) -> tuple[float, float]:
    return spec.b0 / spec.a0, spec.b1 / spec.a1


class _LogWeight:
    """exp-free representation of I(x) = int_{1/2}^x btilde/atilde.

    ``I(x) = e0*log(2x) + R0(x)`` on (0, 1/2] and
    ``I(x) = -e1*log(2(1-x)) + R1(x)`` on [1/2, 1), with R0, R1 smooth up to
    the endpoints.  R0, R1 are tabulated once on dense grids and evaluated
    through cubic splines.
    """

    def __init__(self, spec: OperatorSpec1D, n_grid: int = 1025):
        self.spec = spec
        self.e0, self.e1 = _drift_residues(spec)

        def reg0(x):
            # (b/(a(1-x)) - e0) / x, smooth at 0
            return (spec.b_at(x) / (spec.a_at(x) * (1.0 - x)) - self.e0) / x

        def reg1(x):
            # (b/(a x) - e1) / (1-x) with flipped sign convention, smooth at 1
            return (spec.b_at(x) / (spec.a_at(x) * x) - self.e1) / (1.0 - x)

        self._r0 = self._cumulative(reg0, np.linspace(0.5, 0.0, n_grid))
        self._r1 = self._cumulative(reg1, np.linspace(0.5, 1.0, n_grid))

    @staticmethod
    def _cumulative(fn, xs):
        vals = np.zeros(len(xs))
        for i in range(1, len(xs)):
            seg, _ = quad(fn, xs[i - 1], xs[i], epsabs=_QUAD_TOL, epsrel=_QUAD_TOL)
            vals[i] = vals[i - 1] + seg
        order = np.argsort(xs)
        return CubicSpline(xs[order], vals[order])

    def r0(self, x):
        return self._r0(x)

    def r1(self, x):
        return self._r1(x)

    def value(self, x):
        """I(x) itself (finite only for x in (0,1))."""
        x = np.asarray(x, dtype=float)
        out = np.where(
            x <= 0.5,
            self.e0 * np.log(np.maximum(2.0 * x, 1e-300)) + self._r0(np.minimum(x, 0.5)),
            -self.e1 * np.log(np.maximum(2.0 * (1.0 - x), 1e-300)) + self._r1(np.maximum(x, 0.5)),
        )
        return out if out.shape else float(out)


@dataclass(frozen=True)
class DensityProfile:
    """Unnormalized stationary density with analytic endpoint exponents."""

    spec: OperatorSpec1D
    left_exponent: float
    right_exponent: float
    Z: float
    quadrature_tol: float = 1e-10

    # populated via object.__setattr__ in stationary_density
    _logw: _LogWeight = None

    def density(self, x):
        """Unnormalized density m(x); vectorized over x in (0,1)."""
        x = np.asarray(x, dtype=float)
        lw = self._logw
        spec = self.spec
        left = np.power(np.maximum(x, 1e-300), self.left_exponent) * (
            np.exp(lw.r0(np.minimum(x, 0.5)) + lw.e0 * math.log(2.0))
            / (spec.a_at(x) * np.power(1.0 - x, spec.m1))
        )
        right = np.power(np.maximum(1.0 - x, 1e-300), self.right_exponent) * (
            np.exp(lw.r1(np.maximum(x, 0.5)) - lw.e1 * math.log(2.0))
            / (spec.a_at(x) * np.power(x, spec.m0))
        )
        out = np.where(x <= 0.5, left, right)
        return out if out.shape else float(out)

    def pdf(self, x):
        return self.density(x) / self.Z


def _integrate_weighted(profile: DensityProfile, weight: Callable | None, lo: float, hi: float) -> float:
    """int_lo^hi weight(x) m(x) dx with endpoint-singularity substitution.

    weight=None means 1.  lo may be exactly 0 and hi exactly 1.
    """
    w = (lambda x: 1.0) if weight is None else weight
    m = profile.density
    tol = profile.quadrature_tol
    total = 0.0
    pieces = []
    if lo < _SPLIT:
        pieces.append(("left", lo, min(hi, _SPLIT)))
    if min(hi, 1.0 - _SPLIT) > max(lo, _SPLIT):
        pieces.append(("mid", max(lo, _SPLIT), min(hi, 1.0 - _SPLIT)))
    if hi > 1.0 - _SPLIT:
        pieces.append(("right", max(lo, 1.0 - _SPLIT), hi))
    for tag, a, b in pieces:
        if b <= a:
            continue
        if tag == "mid" or (tag == "left" and a > 0.0) or (tag == "right" and b < 1.0):
            val, _ = quad(lambda x: w(x) * m(x), a, b, epsabs=tol, epsrel=tol, limit=200)
        elif tag == "left":
            e = profile.left_exponent
            p = 1.0 / (1.0 + e) if e < 0.0 else 1.0
            # x = t^p, dx = p t^(p-1) dt; integrand regular at t = 0
            val, _ = quad(
                lambda t: w(t**p) * m(t**p) * p * t ** (p - 1.0) if t > 0.0 else 0.0,
                0.0,
                b ** (1.0 / p),
                epsabs=tol,
                epsrel=tol,
                limit=200,
            )
        else:
            e = profile.right_exponent
            p = 1.0 / (1.0 + e) if e < 0.0 else 1.0
            val, _ = quad(
                lambda t: w(1.0 - t**p) * m(1.0 - t**p) * p * t ** (p - 1.0) if t > 0.0 else 0.0,
                0.0,
                (1.0 - a) ** (1.0 / p),
                epsabs=tol,
                epsrel=tol,
                limit=200,
            )
        total += val
    return total


def stationary_density(spec: OperatorSpec1D, quadrature_tol: float = 1e-10) -> DensityProfile:
    """Speed density of the 1D operator, with normalizer.

    Requires both endpoints transverse; otherwise an endpoint exponent is
    <= -1 and the density is not integrable.
    """
    left = classify_endpoint(spec, End.LEFT)
    right = classify_endpoint(spec, End.RIGHT)
    e0, e1 = _drift_residues(spec)
    left_exp = e0 - spec.m0
    right_exp = -e1 - spec.m1
    if left_exp <= -1.0 or right_exp <= -1.0:
        raise NonIntegrableError(
            f"stationary density not integrable: endpoint exponents "
            f"({left_exp:g}, {right_exp:g}); classification "
            f"({left.kind.value}, {right.kind.value})"
        )
    # agreement between the exponent rule and the classification
    assert left.is_transverse and right.is_transverse
    lw = _LogWeight(spec)
    profile = DensityProfile(
        spec=spec,
        left_exponent=left_exp,
        right_exponent=right_exp,
        Z=float("nan"),
        quadrature_tol=quadrature_tol,
    )
    object.__setattr__(profile, "_logw", lw)
    Z = _integrate_weighted(profile, None, 0.0, 1.0)
    object.__setattr__(profile, "Z", Z)
    return profile


def stationarity_residual(profile: DensityProfile, f_coeffs) -> float:
    """int (atilde f'' + btilde f') dmu by quadrature; ~0 for invariant mu."""
    spec = profile.spec
    atilde, btilde = coefficients_full(spec)
    f1 = P.polyder(f_coeffs)
    f2 = P.polyder(f_coeffs, 2)
    g = P.polyadd(P.polymul(atilde, f2), P.polymul(btilde, f1))

    def w(x):
        return P.polyval(x, g)

    return _integrate_weighted(profile, w, 0.0, 1.0) / profile.Z


def residual_against_density(
    spec: OperatorSpec1D, density: Callable, f_coeffs, tol: float = 1e-10
) -> float:
    """Same residual against an arbitrary (normalized) density callable.

    Used to demonstrate test power against deliberately wrong densities.
    The density must be integrable without endpoint substitutions.
    """
    atilde, btilde = coefficients_full(spec)
    f1 = P.polyder(f_coeffs)
    f2 = P.polyder(f_coeffs, 2)
    g = P.polyadd(P.polymul(atilde, f2), P.polymul(btilde, f1))
    val, _ = quad(lambda x: P.polyval(x, g) * density(x), 0.0, 1.0, epsabs=tol, epsrel=tol, limit=200)
    return val


def scale_function(spec: OperatorSpec1D, x, x_ref: float = 0.5):
    """S(x) = int_{x_ref}^x exp(-I(eta)) d eta; the increasing L-harmonic map.

    x and x_ref may touch an endpoint only when the scale integrand is
    integrable there (left: e0 < 1, right: e1 > -1); otherwise a
    DivergenceError is raised rather than a large number.
    """
    lw = _LogWeight(spec)
    e0, e1 = _drift_residues(spec)

    def integrand(eta):
        return math.exp(-lw.value(eta))

    def one(xv: float) -> float:
        lo, hi = (x_ref, xv) if xv >= x_ref else (xv, x_ref)
        sign = 1.0 if xv >= x_ref else -1.0
        if lo < 0.0 or hi > 1.0:
            raise ValidationError("scale_function arguments must lie in [0,1]")
        if lo == 0.0 and e0 >= 1.0:
            raise DivergenceError("scale integrand ~ x^-e0 is not integrable at 0 (e0 >= 1)")
        if hi == 1.0 and e1 <= -1.0:
            raise DivergenceError("scale integrand ~ (1-x)^e1 is not integrable at 1 (e1 <= -1)")
        total = 0.0
        # integrand ~ eta^-e0 at 0 and ~ (1-eta)^e1 at 1; substitute as needed
        if lo == 0.0:
            cut = min(hi, _SPLIT)
            p = 1.0 / (1.0 - e0) if e0 > 0.0 else 1.0
            val, _ = quad(
                lambda t: integrand(t**p) * p * t ** (p - 1.0) if t > 0.0 else 0.0,
                0.0,
                cut ** (1.0 / p),
                epsabs=_QUAD_TOL,
                epsrel=_QUAD_TOL,
                limit=200,
            )
            total += val
            lo = cut
        if hi == 1.0:
            cut = max(lo, 1.0 - _SPLIT)
            p = 1.0 / (1.0 + e1) if e1 < 0.0 else 1.0
            val, _ = quad(
                lambda t: integrand(1.0 - t**p) * p * t ** (p - 1.0) if t > 0.0 else 0.0,
                0.0,
                (1.0 - cut) ** (1.0 / p),
                epsabs=_QUAD_TOL,
                epsrel=_QUAD_TOL,
                limit=200,
            )
            total += val
            hi = cut
        if hi > lo:
            val, _ = quad(integrand, lo, hi, epsabs=_QUAD_TOL, epsrel=_QUAD_TOL, limit=200)
            total += val
        return sign * total

    if np.ndim(x) == 0:
        return one(float(x))
    return np.array([one(float(v)) for v in np.asarray(x)])


def scale_function_callable(atilde: Callable, btilde: Callable, x, x_ref: float = 0.5):
    """Escape hatch for non-polynomial coefficients (interior x only)."""

    def inner(eta):
        val, _ = quad(lambda xi: btilde(xi) / atilde(xi), 0.5, eta, epsabs=1e-11, epsrel=1e-11, limit=200)
        return math.exp(-val)

    def one(xv):
        val, _ = quad(inner, x_ref, xv, epsabs=1e-10, epsrel=1e-10, limit=200)
        return val

    if np.ndim(x) == 0:
        return one(float(x))
    return np.array([one(float(v)) for v in np.asarray(x)])


def normalized_scale_function(spec: OperatorSpec1D) -> Callable:
    """S0 with S0(0)=0, S0(1)=1, L S0 = 0 (needs S finite at both ends)."""
    s_at_0 = scale_function(spec, 0.0)
    s_at_1 = scale_function(spec, 1.0)
    denom = s_at_1 - s_at_0

    def s0(x):
        return (scale_function(spec, x) - s_at_0) / denom

    return s0


def _chebyshev_grid(n: int) -> np.ndarray:
    j = np.arange(n + 1)
    return 0.5 * (1.0 - np.cos(np.pi * j / n))


def cdf_and_quantile(profile: DensityProfile, grid_size: int = 4096):
    """Monotone (F, Finv) pair on a Chebyshev-clustered grid.

    F is a monotone piecewise-cubic interpolant of exact cell masses; Finv
    brackets by grid cell and refines by bisection on F, so the pair is
    consistent: Finv(F(x)) = x to interpolation tolerance.
    """
    if grid_size < 64:
        raise ValidationError("grid_size must be >= 64")
    xg = _chebyshev_grid(grid_size)
    masses = np.zeros(grid_size + 1)
    for i in range(1, grid_size + 1):
        masses[i] = _integrate_weighted(profile, None, xg[i - 1], xg[i])
    Fv = np.cumsum(masses)
    Fv /= Fv[-1]
    Fv = np.maximum.accumulate(np.clip(Fv, 0.0, 1.0))
    Fv[0], Fv[-1] = 0.0, 1.0
    F_interp = PchipInterpolator(xg, Fv)

    def F(x):
        x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
        out = np.clip(F_interp(x), 0.0, 1.0)
        return out if out.shape else float(out)

    def Finv(u):
        u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
        scalar = u.ndim == 0
        u = np.atleast_1d(u)
        idx = np.clip(np.searchsorted(Fv, u, side="left"), 1, grid_size)
        lo = xg[idx - 1].copy()
        hi = xg[idx].copy()
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            below = F_interp(mid) < u
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        out = 0.5 * (lo + hi)
        return float(out[0]) if scalar else out

    return F, Finv


def edge_invariant_2d(tri: TriangleSpec) -> Callable:
    """Closed-form normalized invariant density along the triangle diagonal."""
    g12, g13, g23 = tri.gamma12, tri.gamma13, tri.gamma23
    num = (g12 + g13) * (g12 + g23)

    def mu(x):
        x = np.asarray(x, dtype=float)
        out = num / (g12 + g13 * (1.0 - x) + g23 * x) ** 2
        return out if out.shape else float(out)

    return mu


def restricted_diagonal_operator(tri: TriangleSpec) -> OperatorSpec1D:
    """1D generator of the diagonal coordinate x on the edge x + y = 1.

    atilde(x) = x(1-x) D(x) with D = gamma12 + gamma13(1-x) + gamma23 x and
    btilde(x) = gamma12(1-2x) - gamma23 x^2 + gamma13 (1-x)^2.  (The minus
    sign on the gamma23 term is required for the closed-form edge density to
    be stationary; see the decisions ledger.)
    """
    g12, g13, g23 = tri.gamma12, tri.gamma13, tri.gamma23
    a = [g12 + g13, g23 - g13]
    b = [g12 + g13, -2.0 * (g12 + g13), g13 - g23]
    return OperatorSpec1D(a_coeffs=a, b_coeffs=b, m0=1, m1=1)
