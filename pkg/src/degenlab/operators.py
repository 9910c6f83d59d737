"""One-dimensional operator family and the triangle model.

The 1D generator acts on [0,1] as

    L = a(x) x^m0 (1-x)^m1 d^2/dx^2 + b(x) x^(m0-1) (1-x)^(m1-1) d/dx

with a, b polynomials, a > 0 on [0,1], and degeneracy orders m0, m1 in
{1, 2} (linear "Kimura" vs quadratic vanishing of the diffusion).  Endpoint
classification (tangent / transverse / neutral) is exact on the polynomial
coefficients: b(0) is the constant coefficient and b(1) the coefficient sum,
so no epsilon test is involved.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from .errors import ValidationError


class End(Enum):
    LEFT = "left"
    RIGHT = "right"


class EndpointKind(Enum):
    KIMURA_TANGENT = "kimura_tangent"
    KIMURA_TRANSVERSE = "kimura_transverse"
    QUADRATIC_TANGENT = "quadratic_tangent"
    QUADRATIC_TRANSVERSE = "quadratic_transverse"
    QUADRATIC_NEUTRAL = "quadratic_neutral"
    INADMISSIBLE = "inadmissible"


#: endpoint kinds whose Dirac mass is itself an invariant measure
STICKY_KINDS = frozenset(
    {
        EndpointKind.KIMURA_TANGENT,
        EndpointKind.QUADRATIC_TANGENT,
        EndpointKind.QUADRATIC_TRANSVERSE,
        EndpointKind.QUADRATIC_NEUTRAL,
    }
)

TRANSVERSE_KINDS = frozenset(
    {EndpointKind.KIMURA_TRANSVERSE, EndpointKind.QUADRATIC_TRANSVERSE}
)


@dataclass(frozen=True)
class EndpointClass:
    kind: EndpointKind
    which_end: End

    @property
    def is_transverse(self) -> bool:
        return self.kind in TRANSVERSE_KINDS

    @property
    def is_sticky(self) -> bool:
        return self.kind in STICKY_KINDS


@dataclass(frozen=True)
class OperatorSpec1D:
    """Polynomial coefficient data for the 1D generator.

    ``a_coeffs`` and ``b_coeffs`` are ascending-degree coefficient tuples.
    """

    a_coeffs: tuple
    b_coeffs: tuple
    m0: int
    m1: int

    def __init__(self, a_coeffs: Sequence[float], b_coeffs: Sequence[float], m0: int, m1: int):
        object.__setattr__(self, "a_coeffs", tuple(float(c) for c in a_coeffs))
        object.__setattr__(self, "b_coeffs", tuple(float(c) for c in b_coeffs))
        object.__setattr__(self, "m0", int(m0))
        object.__setattr__(self, "m1", int(m1))
        self._validate()

    def _validate(self) -> None:
        if self.m0 not in (1, 2) or self.m1 not in (1, 2):
            raise ValidationError(f"degeneracy orders must be 1 or 2, got m0={self.m0}, m1={self.m1}")
        if not self.a_coeffs:
            raise ValidationError("a_coeffs must be nonempty")
        grid = np.linspace(0.0, 1.0, 257)
        if np.any(P.polyval(grid, self.a_coeffs) <= 0.0):
            raise ValidationError("a(x) must be strictly positive on [0,1]")

    # -- exact endpoint evaluations -------------------------------------
    def a_at(self, x):
        return P.polyval(x, self.a_coeffs)

    def b_at(self, x):
        if not self.b_coeffs:
            return np.zeros_like(np.asarray(x, dtype=float))
        return P.polyval(x, self.b_coeffs)

    @property
    def b0(self) -> float:
        """b(0): the constant coefficient, exactly."""
        return self.b_coeffs[0] if self.b_coeffs else 0.0

    @property
    def b1(self) -> float:
        """b(1): the coefficient sum."""
        return float(sum(self.b_coeffs)) if self.b_coeffs else 0.0

    @property
    def a0(self) -> float:
        return self.a_coeffs[0]

    @property
    def a1(self) -> float:
        return float(sum(self.a_coeffs))

    # -- serialization ---------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "type": "operator1d",
            "a": list(self.a_coeffs),
            "b": list(self.b_coeffs),
            "m0": self.m0,
            "m1": self.m1,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "OperatorSpec1D":
        try:
            return cls(d["a"], d["b"], d["m0"], d["m1"])
        except KeyError as exc:
            raise ValidationError(f"operator1d config missing field {exc}") from exc


@dataclass(frozen=True)
class TriangleSpec:
    """Rate constants of the 2D triangle generator."""

    gamma12: float
    gamma13: float
    gamma23: float

    def __post_init__(self):
        for name in ("gamma12", "gamma13", "gamma23"):
            v = getattr(self, name)
            if not (v > 0.0):
                raise ValidationError(f"{name} must be strictly positive, got {v}")

    def to_dict(self) -> dict:
        return {
            "type": "triangle",
            "gamma12": self.gamma12,
            "gamma13": self.gamma13,
            "gamma23": self.gamma23,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TriangleSpec":
        try:
            return cls(float(d["gamma12"]), float(d["gamma13"]), float(d["gamma23"]))
        except KeyError as exc:
            raise ValidationError(f"triangle config missing field {exc}") from exc


class MeasureKind(Enum):
    DIRAC_LEFT = "dirac_left"
    DIRAC_RIGHT = "dirac_right"
    ABSOLUTELY_CONTINUOUS = "absolutely_continuous"


@dataclass(frozen=True)
class InvariantMeasureSpec:
    kind: MeasureKind
    density: Optional[Callable] = None  # unnormalized density evaluator
    Z: Optional[float] = None


def classify_endpoint(spec: OperatorSpec1D, end: End) -> EndpointClass:
    """Classify one endpoint as tangent / transverse / neutral.

    Kimura endpoints (m=1) with outward drift are inadmissible: the process
    would leave [0,1] and the operator needs boundary conditions we do not
    model.
    """
    if end is End.LEFT:
        m, b, a = spec.m0, spec.b0, spec.a0
    else:
        m, b, a = spec.m1, spec.b1, spec.a1
    if m == 1:
        if b == 0.0:
            kind = EndpointKind.KIMURA_TANGENT
        elif (b > 0.0) if end is End.LEFT else (b < 0.0):
            kind = EndpointKind.KIMURA_TRANSVERSE
        else:
            kind = EndpointKind.INADMISSIBLE
    else:
        r = b / a
        if end is End.RIGHT:
            r = -r
        # in the left-endpoint convention: tangent r<1, transverse r>1
        if r < 1.0:
            kind = EndpointKind.QUADRATIC_TANGENT
        elif r > 1.0:
            kind = EndpointKind.QUADRATIC_TRANSVERSE
        else:
            kind = EndpointKind.QUADRATIC_NEUTRAL
    return EndpointClass(kind=kind, which_end=end)


def invariant_measure_set(spec: OperatorSpec1D) -> list[InvariantMeasureSpec]:
    """Enumerate the invariant measures implied by the endpoint classes.

    Rule: a Dirac at every sticky endpoint (quadratic of any subtype, or
    Kimura tangent), plus one fully supported absolutely continuous measure
    exactly when both endpoints are transverse.  The published summary table
    has one cell (quadratic tangent left / quadratic transverse right)
    listing only one Dirac; the sticky-endpoint rule gives both and that is
    what we return.
    """
    left = classify_endpoint(spec, End.LEFT)
    right = classify_endpoint(spec, End.RIGHT)
    if left.kind is EndpointKind.INADMISSIBLE or right.kind is EndpointKind.INADMISSIBLE:
        raise ValidationError("operator has an inadmissible (outward-drift Kimura) endpoint")
    measures: list[InvariantMeasureSpec] = []
    if left.is_sticky:
        measures.append(InvariantMeasureSpec(MeasureKind.DIRAC_LEFT))
    if right.is_sticky:
        measures.append(InvariantMeasureSpec(MeasureKind.DIRAC_RIGHT))
    if left.is_transverse and right.is_transverse:
        measures.append(InvariantMeasureSpec(MeasureKind.ABSOLUTELY_CONTINUOUS))
    return measures


def coefficients_full(spec: OperatorSpec1D) -> tuple[tuple, tuple]:
    """Exact polynomial products (atilde, btilde).

    atilde(x) = a(x) x^m0 (1-x)^m1 multiplies the second derivative,
    btilde(x) = b(x) x^(m0-1) (1-x)^(m1-1) the first.
    """
    x = (0.0, 1.0)
    one_minus_x = (1.0, -1.0)

    def power(poly, k):
        out = (1.0,)
        for _ in range(k):
            out = P.polymul(out, poly)
        return out

    atilde = P.polymul(P.polymul(spec.a_coeffs, power(x, spec.m0)), power(one_minus_x, spec.m1))
    b = spec.b_coeffs if spec.b_coeffs else (0.0,)
    btilde = P.polymul(P.polymul(b, power(x, spec.m0 - 1)), power(one_minus_x, spec.m1 - 1))
    return tuple(np.trim_zeros(atilde, "b")), tuple(np.trim_zeros(btilde, "b")) or (0.0,)


def model_spec_1d(c0: float, c1: float) -> OperatorSpec1D:
    """The mixed Kimura/quadratic benchmark family.

    Drift btilde(x) = c0 (1-x)^2 - c1 x (1-x) and diffusion
    atilde(x) = x (1-x)^2, i.e. a = 1, b(x) = c0 - (c0+c1) x, m0 = 1, m1 = 2.
    """
    return OperatorSpec1D(a_coeffs=[1.0], b_coeffs=[c0, -(c0 + c1)], m0=1, m1=2)


def model_params_1d(spec: OperatorSpec1D) -> tuple[float, float]:
    """Extract (c0, c1) from a spec of the benchmark family, or raise."""
    ok = (
        spec.m0 == 1
        and spec.m1 == 2
        and len(spec.a_coeffs) == 1
        and spec.a_coeffs[0] == 1.0
        and len(spec.b_coeffs) <= 2
    )
    if not ok:
        raise ValidationError(
            "1D particle scheme supports only the a=1, m0=1, m1=2 family "
            "with linear b(x) = c0 - (c0+c1) x"
        )
    c0 = spec.b0
    c1 = -spec.b1
    return c0, c1


def model_from_dict(d: dict):
    """Deserialize either model type from a config section."""
    kind = d.get("type")
    if kind == "operator1d":
        return OperatorSpec1D.from_dict(d)
    if kind == "triangle":
        return TriangleSpec.from_dict(d)
    raise ValidationError(f"unknown model type {kind!r} (expected 'operator1d' or 'triangle')")
