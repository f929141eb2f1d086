"""Numerical laboratory for weighted spaces of harmonic functions on the upper
half-space, its products and the unit ball."""

from .errors import (CapacityError, DivergenceError, DomainError, EvaluationError, HslError,
                     ParameterError, TruncationError, UnsupportedError)
from .halfspace import Box, Cube, HPoint, WeightSpec, WhitneyCell, hpoint
from .quadrature import HalfspaceQuadSpec, QuadResult, SphereQuadSpec, integrate_halfspace
from .testfns import (DerivativeKernel, HarmonicPolynomialBall, PoissonBallSlice, PoissonShift,
                      ProductOnHm, SolidHarmonic)

__version__ = "0.1.0"

__all__ = [
    "Box", "CapacityError", "Cube", "DerivativeKernel", "DivergenceError", "DomainError",
    "EvaluationError", "HPoint", "HalfspaceQuadSpec", "HarmonicPolynomialBall", "HslError",
    "ParameterError", "PoissonBallSlice", "PoissonShift", "ProductOnHm", "QuadResult",
    "SolidHarmonic", "SphereQuadSpec", "TruncationError", "UnsupportedError", "WeightSpec",
    "WhitneyCell", "hpoint", "integrate_halfspace",
]
