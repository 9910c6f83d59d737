"""Lyapunov candidates and certified negative bounds on Lf/f.

A certified bound lambda0 < 0 with Lf <= lambda0 f for a positive f
implies exponential decay toward the set where f vanishes.  Candidates are
of the product form A x^alpha (1-x)^beta p(x) with p a positive polynomial;
Lf/f is evaluated exactly from the exponents and coefficients, never by
finite differences, and endpoint behavior is handled by analytic limits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from .errors import InfeasiblePatchError, NumericalError, ValidationError
from .invariant import _LogWeight
from .operators import (
    End,
    EndpointKind,
    OperatorSpec1D,
    TriangleSpec,
    classify_endpoint,
)
from .sde2d import drift_2d


@dataclass(frozen=True)
class LyapunovCandidate1D:
    """f(x) = A x^alpha (1-x)^beta p(x) with p positive on [0,1]."""

    alpha: float
    beta: float
    amplitude: float = 1.0
    poly: tuple = (1.0,)

    def __post_init__(self):
        if not (self.amplitude > 0.0):
            raise ValidationError("amplitude must be positive")
        object.__setattr__(self, "poly", tuple(float(c) for c in self.poly))
        grid = np.linspace(0.0, 1.0, 257)
        if np.any(P.polyval(grid, self.poly) <= 0.0):
            raise ValidationError("polynomial factor must be strictly positive on [0,1]")

    def value(self, x):
        x = np.asarray(x, dtype=float)
        return (
            self.amplitude
            * np.power(x, self.alpha)
            * np.power(1.0 - x, self.beta)
            * P.polyval(x, self.poly)
        )


def apply_L_over_f(spec: OperatorSpec1D, cand: LyapunovCandidate1D, x):
    """(atilde f'' + btilde f')/f at interior points, computed exactly.

    Uses the logarithmic derivative g = f'/f = alpha/x - beta/(1-x) + p'/p;
    then f''/f = g^2 + g' and Lf/f = atilde (g^2 + g') + btilde g.
    """
    x = np.asarray(x, dtype=float)
    a, b = cand.alpha, cand.beta
    p = cand.poly
    p1 = P.polyder(p)
    pv = P.polyval(x, p)
    p1v = P.polyval(x, p1)
    p2v = P.polyval(x, P.polyder(p, 2))
    g = a / x - b / (1.0 - x) + p1v / pv
    gp = -a / x**2 - b / (1.0 - x) ** 2 + (p2v * pv - p1v**2) / pv**2
    atilde = (
        spec.a_at(x) * np.power(x, spec.m0) * np.power(1.0 - x, spec.m1)
    )
    btilde = (
        spec.b_at(x) * np.power(x, spec.m0 - 1) * np.power(1.0 - x, spec.m1 - 1)
    )
    out = atilde * (g * g + gp) + btilde * g
    return out if out.shape else float(out)


def _endpoint_limit(spec: OperatorSpec1D, cand: LyapunovCandidate1D, end: End) -> float:
    """Analytic limit of Lf/f at an endpoint.

    Leading behavior is C x^(m-2) with C = alpha (a(0)(alpha-1) + b(0)) on
    the left (mirrored on the right), so a quadratic end has a finite limit
    and a Kimura end diverges with the sign of C; C = 0 falls back to a
    numeric evaluation just inside.
    """
    if end is End.LEFT:
        m, a0, b0, e = spec.m0, spec.a0, spec.b0, cand.alpha
        C = e * (a0 * (e - 1.0) + b0)
        probe = 1e-9
    else:
        m, a0, b0, e = spec.m1, spec.a1, spec.b1, cand.beta
        C = e * (a0 * (e - 1.0) - b0)
        probe = 1.0 - 1e-9
    if m == 2:
        return C
    if C > 0.0:
        return math.inf
    if C < 0.0:
        return -math.inf
    return float(apply_L_over_f(spec, cand, probe))


@dataclass(frozen=True)
class Lambda0Certificate:
    lambda0_bound: float
    worst_point: float
    endpoint_limits: tuple
    grid_size: int

    @property
    def certifies_decay(self) -> bool:
        """True when the supremum is strictly negative."""
        return self.lambda0_bound < 0.0

    def to_dict(self) -> dict:
        return {
            "lambda0_bound": self.lambda0_bound,
            "worst_point": self.worst_point,
            "endpoint_limits": [self.endpoint_limits[0], self.endpoint_limits[1]],
            "grid_size": self.grid_size,
            "certifies_decay": self.certifies_decay,
        }


def certify_lambda0(
    spec: OperatorSpec1D, cand: LyapunovCandidate1D, grid_size: int = 2048
) -> Lambda0Certificate:
    """Supremum of Lf/f over a Chebyshev grid plus analytic endpoint limits.

    A nonnegative bound is a legal outcome meaning the candidate fails to
    certify decay; callers check ``certifies_decay``.
    """
    j = np.arange(1, grid_size)
    xs = 0.5 * (1.0 - np.cos(np.pi * j / grid_size))
    # geometric tails resolve any boundary layer the Chebyshev grid misses
    tails = np.geomspace(1e-12, 1e-3, 28)
    xs = np.concatenate([tails, xs, 1.0 - tails])
    vals = apply_L_over_f(spec, cand, xs)
    i = int(np.argmax(vals))
    grid_max, worst = float(vals[i]), float(xs[i])
    lim_l = _endpoint_limit(spec, cand, End.LEFT)
    lim_r = _endpoint_limit(spec, cand, End.RIGHT)
    bound = max(grid_max, lim_l, lim_r)
    if lim_l >= bound:
        worst = 0.0
    if lim_r >= bound:
        worst = 1.0
    bound = max(grid_max, lim_l, lim_r)
    return Lambda0Certificate(
        lambda0_bound=float(bound),
        worst_point=worst,
        endpoint_limits=(lim_l, lim_r),
        grid_size=grid_size,
    )


def optimize_candidate_exponent(
    spec: OperatorSpec1D,
    make_candidate: Callable[[float], LyapunovCandidate1D],
    c_range: tuple = (1e-4, 1.0 - 1e-4),
    grid_size: int = 2048,
    xtol: float = 1e-6,
):
    """Golden-section minimization of the certified bound over one exponent."""
    lo, hi = c_range

    def objective(c):
        if not (lo <= c <= hi):
            return math.inf
        return certify_lambda0(spec, make_candidate(c), grid_size).lambda0_bound

    mid = 0.5 * (lo + hi)
    res = minimize_scalar(objective, bracket=(lo, mid, hi), method="golden", options={"xtol": xtol})
    c_star = float(min(max(res.x, lo), hi))
    return c_star, certify_lambda0(spec, make_candidate(c_star), grid_size)


def construct_boundary_candidate(spec: OperatorSpec1D, end: End) -> float:
    """Recommend a boundary exponent for the candidate at one endpoint.

    Quadratic ends use the normalized drift ratio r (inward-positive):
    Lf/f -> a c (c - (1 - r)) there, negative exactly for c strictly
    between 0 and 1 - r, so the recommendation is -r/2 when that is valid
    and the midpoint (1 - r)/2 otherwise.  Kimura tangent ends admit any
    c in (0,1) (midpoint 1/2); Kimura transverse ends need no vanishing
    (exponent 0).  A neutral quadratic end (r = 1) has an empty window and
    no recommendation exists.
    """
    cls = classify_endpoint(spec, end)
    if cls.kind is EndpointKind.KIMURA_TANGENT:
        return 0.5
    if cls.kind is EndpointKind.KIMURA_TRANSVERSE:
        return 0.0
    if cls.kind is EndpointKind.QUADRATIC_NEUTRAL:
        raise ValidationError(
            "no boundary exponent exists at a neutral quadratic endpoint "
            "(the admissible window (0, 1-r) is empty at r = 1)"
        )
    if cls.kind is EndpointKind.INADMISSIBLE:
        raise ValidationError("endpoint is inadmissible (outward-drift Kimura)")
    r = spec.b0 / spec.a0 if end is End.LEFT else -spec.b1 / spec.a1
    c = -r / 2.0
    window = (min(0.0, 1.0 - r), max(0.0, 1.0 - r))
    if not (window[0] < c < window[1]):
        c = (1.0 - r) / 2.0
    return c


@dataclass
class InteriorPatch:
    """Profile u on [x1, x2] with Lu = -atilde e^{-B} f < 0 by construction."""

    x1: float
    x2: float
    slope1: float
    slope2: float
    mass: float
    u: Callable
    u_x: Callable
    f: Callable
    Lu: Callable


def construct_interior_patch(
    spec: OperatorSpec1D,
    x1: float,
    x2: float,
    slope1: float,
    slope2: float,
    f_endpoints: tuple | None = None,
) -> InteriorPatch:
    """Solve (e^B u_x)' = -f on [x1, x2] with prescribed endpoint slopes.

    B is the antiderivative of btilde/atilde, so Lu = atilde e^{-B}
    (e^B u_x)' = -atilde e^{-B} f, strictly negative wherever f > 0.  The
    total mass of f is fixed by the slopes:
    M = e^{B(x1)} slope1 - e^{B(x2)} slope2, which must be positive.
    f defaults to the constant M/(x2-x1); with ``f_endpoints`` given, f is
    the linear interpolant plus a sine-squared bump tuned to mass M.
    """
    if not (0.0 < x1 < x2 < 1.0):
        raise ValidationError("need 0 < x1 < x2 < 1")
    lw = _LogWeight(spec)
    B = lw.value
    eb1 = math.exp(B(x1))
    eb2 = math.exp(B(x2))
    mass = eb1 * slope1 - eb2 * slope2
    if not (mass > 0.0):
        raise InfeasiblePatchError(
            f"slope ordering infeasible: e^B(x1) u_x(x1) - e^B(x2) u_x(x2) = "
            f"{mass:g} <= 0; rescale the boundary amplitudes first"
        )
    width = x2 - x1
    if f_endpoints is None:
        const = mass / width

        def f(x):
            return np.full_like(np.asarray(x, dtype=float), const)

    else:
        f1, f2 = f_endpoints
        if f1 <= 0.0 or f2 <= 0.0:
            raise ValidationError("f endpoint values must be positive")
        lin_mass = 0.5 * (f1 + f2) * width
        amp = (mass - lin_mass) / (0.5 * width)

        def f(x):
            x = np.asarray(x, dtype=float)
            s = (x - x1) / width
            out = f1 + (f2 - f1) * s + amp * np.sin(np.pi * s) ** 2
            return out

        probe = np.linspace(x1, x2, 257)
        if np.any(f(probe) <= 0.0):
            raise InfeasiblePatchError(
                "bump shape goes nonpositive for the requested mass; "
                "adjust f_endpoints or the slopes"
            )

    def F(x):
        val, _ = quad(lambda s: float(f(s)), x1, x, epsabs=1e-12, epsrel=1e-12, limit=200)
        return val

    def u_x(x):
        if np.ndim(x):
            return np.array([u_x(float(v)) for v in x])
        return math.exp(-B(x)) * (eb1 * slope1 - F(x))

    def u(x):
        if np.ndim(x):
            return np.array([u(float(v)) for v in x])
        val, _ = quad(lambda s: u_x(s), x1, x, epsabs=1e-11, epsrel=1e-11, limit=200)
        return val

    def Lu(x):
        x = np.asarray(x, dtype=float)
        atilde = spec.a_at(x) * np.power(x, spec.m0) * np.power(1.0 - x, spec.m1)
        out = -atilde * np.exp(-B(x)) * f(x)
        return out if out.shape else float(out)

    return InteriorPatch(
        x1=x1, x2=x2, slope1=slope1, slope2=slope2, mass=mass,
        u=u, u_x=u_x, f=f, Lu=Lu,
    )


@dataclass(frozen=True)
class Certificate2D:
    rate_window: tuple
    max_identity_residual: float
    grid_size: int

    def to_dict(self) -> dict:
        return {
            "rate_window": list(self.rate_window),
            "max_identity_residual": self.max_identity_residual,
            "grid_size": self.grid_size,
        }


def lyapunov_check_2d(tri: TriangleSpec, grid_size: int = 100, tol: float = 1e-12) -> Certificate2D:
    """Verify LV = -((1-x) g13 + (1-y) g23) V for V = 1 - x - y on a grid.

    V is linear, so LV is minus the sum of the drift components; the
    identity is algebraic and must hold to rounding error.  Returns the
    decay-rate window [min(g13, g23), g13 + g23] for the distance to the
    diagonal edge.
    """
    u = np.linspace(0.0, 1.0, grid_size)
    X, Y = np.meshgrid(u, u, indexing="ij")
    inside = X + Y <= 1.0 + 1e-12
    x = X[inside]
    y = Y[inside]
    dx, dy = drift_2d(tri, x, y)
    LV = -(dx + dy)
    V = 1.0 - x - y
    target = -((1.0 - x) * tri.gamma13 + (1.0 - y) * tri.gamma23) * V
    resid = float(np.max(np.abs(LV - target)))
    if resid > tol:
        raise NumericalError(
            f"triangle drift violates the linear-Lyapunov identity "
            f"(max residual {resid:g} > {tol:g})"
        )
    return Certificate2D(
        rate_window=(min(tri.gamma13, tri.gamma23), tri.gamma13 + tri.gamma23),
        max_identity_residual=resid,
        grid_size=grid_size,
    )
