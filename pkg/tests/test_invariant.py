"""Stationary densities, scale functions, CDF/quantile, 2D edge measure."""

import numpy as np
import pytest
from scipy.integrate import quad

from degenlab.errors import DivergenceError, NonIntegrableError
from degenlab.invariant import (
    cdf_and_quantile,
    edge_invariant_2d,
    normalized_scale_function,
    residual_against_density,
    restricted_diagonal_operator,
    scale_function,
    stationarity_residual,
    stationary_density,
)
from degenlab.operators import OperatorSpec1D, TriangleSpec, model_spec_1d

from conftest import CORPUS_TT


def test_closed_form_density(benchmark_profile):
    # (c0, c1) = (0.5, 2): normalized density is x^(-1/2)/2
    xs = np.linspace(1e-6, 1.0 - 1e-6, 100)
    got = benchmark_profile.density(xs) / benchmark_profile.Z
    want = 0.5 / np.sqrt(xs)
    np.testing.assert_allclose(got, want, rtol=1e-10)


def test_endpoint_exponents_match_drift_ratios(benchmark_profile):
    assert benchmark_profile.left_exponent == pytest.approx(-0.5)
    assert benchmark_profile.right_exponent == pytest.approx(0.0)


@pytest.mark.parametrize("spec", CORPUS_TT, ids=lambda s: f"m{s.m0}{s.m1}")
def test_corpus_densities_normalize(spec):
    prof = stationary_density(spec)
    assert np.isfinite(prof.Z) and prof.Z > 0
    xs = np.linspace(1e-4, 1 - 1e-4, 64)
    assert np.all(prof.density(xs) >= 0)
    import warnings
    from scipy.integrate import IntegrationWarning

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        total, _ = quad(lambda x: prof.density(x) / prof.Z, 1e-9, 1 - 1e-9,
                        limit=400, epsabs=1e-8, epsrel=1e-8)
    # interior integral only; endpoint slivers hold the remaining mass
    assert total == pytest.approx(1.0, abs=2e-3)
    F, _ = cdf_and_quantile(prof, grid_size=256)
    assert F(1.0) == pytest.approx(1.0, abs=1e-12)


def test_non_integrable_raises():
    # right endpoint quadratic tangent: density exponent <= -1 there
    with pytest.raises(NonIntegrableError):
        stationary_density(model_spec_1d(0.5, 0.5))


def test_residual_zero_for_constant(benchmark_profile):
    assert stationarity_residual(benchmark_profile, (3.0,)) == 0.0


def test_residual_small_for_test_function(benchmark_profile):
    # f(x) = x(1-x) = x - x^2
    assert abs(stationarity_residual(benchmark_profile, (0.0, 1.0, -1.0))) < 1e-6


def test_residual_detects_wrong_density():
    # uniform density on the same model must not look stationary
    spec = model_spec_1d(0.5, 2.0)
    res = residual_against_density(spec, lambda x: 1.0, (0.0, 1.0, -1.0))
    assert abs(res) > 0.01


def test_cdf_quantile_round_trip(benchmark_quantile):
    F, Finv = benchmark_quantile
    u = np.linspace(0.001, 0.999, 201)
    np.testing.assert_allclose(F(Finv(u)), u, atol=1e-9)
    x = np.linspace(0.01, 0.99, 101)
    np.testing.assert_allclose(Finv(F(x)), x, atol=1e-9)
    # closed-form CDF is sqrt(x)
    np.testing.assert_allclose(F(x), np.sqrt(x), atol=1e-8)
    assert Finv(0.0) == pytest.approx(0.0, abs=1e-12)
    assert Finv(1.0) == pytest.approx(1.0, abs=1e-12)


def test_quantile_monotone(benchmark_quantile):
    _, Finv = benchmark_quantile
    u = np.linspace(0.0, 1.0, 513)
    q = Finv(u)
    assert np.all(np.diff(q) >= 0)


def test_scale_function_is_increasing_and_harmonic():
    spec = model_spec_1d(0.5, 2.0)
    xs = np.linspace(0.05, 0.95, 19)
    s = scale_function(spec, xs)
    assert np.all(np.diff(s) > 0)
    assert scale_function(spec, 0.5) == pytest.approx(0.0, abs=1e-12)
    # S' = exp(-I) solves atilde S'' + btilde S' = 0; check via the
    # integral form: S(b) - S(a) computed from two different references
    s_shift = scale_function(spec, xs, x_ref=0.3)
    np.testing.assert_allclose(np.diff(s), np.diff(s_shift), rtol=1e-8)


def test_scale_function_divergence_guard():
    # left Kimura endpoint with b(0)/a(0) = 1.5 >= 1: S(0) = -inf
    spec = OperatorSpec1D([1.0], [1.5, -3.0], 1, 1)
    with pytest.raises(DivergenceError):
        scale_function(spec, 0.0)
    # interior evaluation still fine
    assert np.isfinite(scale_function(spec, 0.25))


def test_normalized_scale_two_tangent_prediction():
    # both endpoints tangent for (c0, c1) = (0, 0): S0 maps [0,1] onto [0,1]
    spec = model_spec_1d(0.0, 0.0)
    s0 = normalized_scale_function(spec)
    assert s0(0.0) == pytest.approx(0.0, abs=1e-12)
    assert s0(1.0) == pytest.approx(1.0, abs=1e-12)
    mid = s0(np.array([0.25, 0.5, 0.75]))
    assert np.all(np.diff(np.concatenate([[0.0], mid, [1.0]])) > 0)


def test_edge_invariant_closed_form():
    tri = TriangleSpec(1.0, 2.0, 1.0)
    mu = edge_invariant_2d(tri)
    xs = np.linspace(0.0, 1.0, 11)
    np.testing.assert_allclose(mu(xs), 6.0 / (3.0 - xs) ** 2, rtol=1e-14)
    total, _ = quad(mu, 0.0, 1.0)
    assert total == pytest.approx(1.0, abs=1e-10)


def test_restricted_diagonal_operator_consistency():
    tri = TriangleSpec(1.3, 0.7, 2.1)
    op = restricted_diagonal_operator(tri)
    # both endpoints must be Kimura transverse: an AC measure exists
    prof = stationary_density(op)
    mu = edge_invariant_2d(tri)
    xs = np.linspace(0.01, 0.99, 50)
    np.testing.assert_allclose(prof.density(xs) / prof.Z, mu(xs), rtol=1e-8)
