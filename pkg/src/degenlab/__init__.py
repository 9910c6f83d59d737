"""Simulation and verification laboratory for degenerate diffusions on
[0,1] and the triangle, with mixed linear (Kimura) and quadratic boundary
degeneracy: endpoint classification, invariant measures, positivity-aware
particle schemes, Wasserstein diagnostics, and Lyapunov certificates."""

__version__ = "0.1.0"

from .errors import (
    DivergenceError,
    InfeasiblePatchError,
    NegativeDiscriminantError,
    NonIntegrableError,
    NumericalError,
    ValidationError,
)
from .operators import (
    End,
    EndpointKind,
    MeasureKind,
    OperatorSpec1D,
    TriangleSpec,
    classify_endpoint,
    invariant_measure_set,
    model_spec_1d,
)

__all__ = [
    "DivergenceError",
    "End",
    "EndpointKind",
    "InfeasiblePatchError",
    "MeasureKind",
    "NegativeDiscriminantError",
    "NonIntegrableError",
    "NumericalError",
    "OperatorSpec1D",
    "TriangleSpec",
    "ValidationError",
    "classify_endpoint",
    "invariant_measure_set",
    "model_spec_1d",
    "__version__",
]
