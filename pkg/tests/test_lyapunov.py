"""Lyapunov candidates, certified bounds, boundary recipes, interior patches."""

import numpy as np
import pytest

from degenlab.errors import InfeasiblePatchError, ValidationError
from degenlab.lyapunov import (
    LyapunovCandidate1D,
    apply_L_over_f,
    certify_lambda0,
    construct_boundary_candidate,
    construct_interior_patch,
    lyapunov_check_2d,
    optimize_candidate_exponent,
)
from degenlab.operators import End, OperatorSpec1D, TriangleSpec, model_spec_1d

# benchmark operator: L = x^2 (1-x) d^2, pure noise, m0=2, m1=1
BENCH = OperatorSpec1D(a_coeffs=(1.0,), b_coeffs=(0.0,), m0=2, m1=1)


def _fd_L_over_f(spec, cand, x, h=1e-4):
    f = cand.value
    d1 = (f(x + h) - f(x - h)) / (2 * h)
    d2 = (f(x + h) - 2 * f(x) + f(x - h)) / h**2
    at = spec.a_at(x) * x**spec.m0 * (1 - x) ** spec.m1
    bt = spec.b_at(x) * x ** (spec.m0 - 1) * (1 - x) ** (spec.m1 - 1)
    return (at * d2 + bt * d1) / f(x)


def test_candidate_validation():
    with pytest.raises(ValidationError):
        LyapunovCandidate1D(alpha=0.5, beta=0.5, amplitude=0.0)
    with pytest.raises(ValidationError):
        LyapunovCandidate1D(alpha=0.5, beta=0.5, poly=(1.0, -2.0))
    c = LyapunovCandidate1D(alpha=0.5, beta=1.0, amplitude=2.0, poly=(1.0, 0.5))
    assert c.value(0.25) == pytest.approx(2.0 * 0.5 * 0.75 * 1.125)


def test_apply_L_closed_form_pure_power():
    # L = x^2(1-x) d^2 on f = x^c (1-x):
    # Lf/f = x^2(1-x) (g^2 + g') with g = c/x - 1/(1-x)
    c = 0.5
    cand = LyapunovCandidate1D(alpha=c, beta=1.0)
    xs = np.linspace(0.05, 0.95, 19)
    g = c / xs - 1 / (1 - xs)
    gp = -c / xs**2 - 1 / (1 - xs) ** 2
    expected = xs**2 * (1 - xs) * (g**2 + gp)
    np.testing.assert_allclose(apply_L_over_f(BENCH, cand, xs), expected, rtol=1e-13)


@pytest.mark.parametrize(
    "spec,cand",
    [
        (BENCH, LyapunovCandidate1D(0.5, 1.0)),
        (model_spec_1d(0.5, 2.0), LyapunovCandidate1D(0.3, 0.7)),
        (
            OperatorSpec1D((1.0, 0.5), (0.2, -0.1), 2, 2),
            LyapunovCandidate1D(0.4, 0.6, poly=(1.0, 0.2, 0.3)),
        ),
    ],
)
def test_apply_L_matches_finite_differences(spec, cand):
    xs = np.linspace(0.1, 0.9, 50)
    got = apply_L_over_f(spec, cand, xs)
    oracle = _fd_L_over_f(spec, cand, xs)
    np.testing.assert_allclose(got, oracle, rtol=1e-6)


def test_certified_bound_benchmark_value():
    # optimal exponent for the benchmark operator is 1/2 with bound -1/4
    cand = LyapunovCandidate1D(alpha=0.5, beta=1.0)
    cert = certify_lambda0(BENCH, cand)
    assert cert.lambda0_bound == pytest.approx(-0.25, abs=1e-10)
    assert cert.certifies_decay
    assert cert.endpoint_limits[0] == pytest.approx(-0.25)
    # right end: Kimura tangent with C = 0, numeric probe gives the
    # finite limit x^2(1-x)(g^2 + g') -> -1
    assert cert.endpoint_limits[1] == pytest.approx(-1.0, abs=1e-6)


def test_optimizer_recovers_benchmark_exponent():
    c_star, cert = optimize_candidate_exponent(
        BENCH, lambda c: LyapunovCandidate1D(alpha=c, beta=1.0)
    )
    assert c_star == pytest.approx(0.5, abs=1e-4)
    assert cert.lambda0_bound == pytest.approx(-0.25, abs=1e-6)


def test_certificate_positive_supremum_is_reported_not_raised():
    # alpha <= 0 at a quadratic-tangent left end makes C >= 0
    cand = LyapunovCandidate1D(alpha=-0.5, beta=1.0)
    cert = certify_lambda0(BENCH, cand)
    assert cert.lambda0_bound >= 0.0
    assert not cert.certifies_decay
    # the failure is driven by the positive left-endpoint limit C = 0.75
    assert cert.endpoint_limits[0] == pytest.approx(0.75)


def test_certificate_stable_under_grid_refinement():
    cand = LyapunovCandidate1D(alpha=0.5, beta=1.0)
    b1 = certify_lambda0(BENCH, cand, grid_size=512).lambda0_bound
    b2 = certify_lambda0(BENCH, cand, grid_size=4096).lambda0_bound
    assert b1 == pytest.approx(b2, abs=1e-8)


def test_certificate_serializes():
    d = certify_lambda0(BENCH, LyapunovCandidate1D(0.5, 1.0)).to_dict()
    assert d["certifies_decay"] is True
    assert len(d["endpoint_limits"]) == 2


def test_boundary_recipe_quadratic_ends():
    # left quadratic end of the benchmark: r = 0, window (0, 1), c = 1/2
    assert construct_boundary_candidate(BENCH, End.LEFT) == pytest.approx(0.5)
    # model family with c0 = 0.5: left Kimura transverse end -> exponent 0
    spec = model_spec_1d(0.5, 2.0)
    assert construct_boundary_candidate(spec, End.LEFT) == 0.0
    # right quadratic end, r = -b1/a1 = (c0 + c1) - wait: use the classifier
    c_right = construct_boundary_candidate(spec, End.RIGHT)
    cand = LyapunovCandidate1D(alpha=0.0, beta=c_right, poly=(1.0,))
    lim = certify_lambda0(spec, cand).endpoint_limits[1]
    assert lim < 0.0


def test_boundary_recipe_kimura_tangent():
    spec = OperatorSpec1D((1.0,), (0.0,), 1, 2)  # left Kimura, b(0) = 0
    assert construct_boundary_candidate(spec, End.LEFT) == 0.5


def test_boundary_recipe_neutral_declines():
    # quadratic end with r = 1: b(0)/a(0) = 1
    spec = OperatorSpec1D((1.0,), (1.0, -1.0), 2, 2)
    with pytest.raises(ValidationError):
        construct_boundary_candidate(spec, End.LEFT)


def test_interior_patch_constant_profile():
    spec = model_spec_1d(0.5, 2.0)
    patch = construct_interior_patch(spec, 0.2, 0.8, slope1=1.0, slope2=-1.0)
    assert patch.mass > 0.0
    xs = np.linspace(0.2, 0.8, 200)
    assert np.all(patch.Lu(xs) < 0.0)
    # prescribed slopes are met
    assert patch.u_x(0.2) == pytest.approx(1.0, rel=1e-8)
    assert patch.u_x(0.8) == pytest.approx(-1.0, rel=1e-8)


def test_interior_patch_bump_profile():
    spec = model_spec_1d(0.5, 2.0)
    patch = construct_interior_patch(
        spec, 0.25, 0.75, slope1=2.0, slope2=-0.5, f_endpoints=(0.5, 0.5)
    )
    xs = np.linspace(0.25, 0.75, 200)
    assert np.all(patch.Lu(xs) < 0.0)
    assert np.all(patch.f(xs) > 0.0)
    assert patch.u_x(0.25) == pytest.approx(2.0, rel=1e-8)
    assert patch.u_x(0.75) == pytest.approx(-0.5, rel=1e-8)


def test_interior_patch_infeasible_slopes():
    spec = model_spec_1d(0.5, 2.0)
    with pytest.raises(InfeasiblePatchError):
        construct_interior_patch(spec, 0.2, 0.8, slope1=-1.0, slope2=1.0)
    with pytest.raises(ValidationError):
        construct_interior_patch(spec, 0.8, 0.2, slope1=1.0, slope2=-1.0)


def test_2d_identity_holds():
    cert = lyapunov_check_2d(TriangleSpec(1.0, 2.0, 1.0))
    assert cert.max_identity_residual < 1e-12
    assert cert.rate_window == (1.0, 3.0)


def test_2d_symmetric_rates():
    cert = lyapunov_check_2d(TriangleSpec(0.7, 1.5, 1.5), grid_size=60)
    assert cert.rate_window == (1.5, 3.0)
    assert cert.to_dict()["grid_size"] == 60
