"""Shared test fixtures and the transverse/transverse operator corpus."""

import numpy as np
import pytest

from degenlab.operators import OperatorSpec1D, model_spec_1d

# Six operators whose endpoints are both transverse, covering all four
# ordered (left, right) combinations of Kimura and quadratic transverse
# endpoints, with varied polynomial coefficients.
CORPUS_TT = [
    # Kimura / Kimura
    OperatorSpec1D([1.0], [0.6, -1.3], 1, 1),
    OperatorSpec1D([1.0, 0.5], [0.4, 0.2, -1.5], 1, 1),
    # Kimura / quadratic (the benchmark family)
    model_spec_1d(0.5, 2.0),
    OperatorSpec1D([2.0, -0.5], [0.9, -0.2, -3.5], 1, 2),
    # quadratic / Kimura
    OperatorSpec1D([1.0], [1.7, -2.4], 2, 1),
    # quadratic / quadratic
    OperatorSpec1D([1.0, 1.0], [1.5, 2.0, -6.7], 2, 2),
]


@pytest.fixture(scope="session")
def benchmark_profile():
    """Stationary density of the (c0, c1) = (0.5, 2) model, built once."""
    from degenlab.invariant import stationary_density

    return stationary_density(model_spec_1d(0.5, 2.0))


@pytest.fixture(scope="session")
def benchmark_quantile(benchmark_profile):
    from degenlab.invariant import cdf_and_quantile

    return cdf_and_quantile(benchmark_profile)


def assert_sorted_strictly_increasing(arr):
    arr = np.asarray(arr)
    assert np.all(np.diff(arr) > 0)
