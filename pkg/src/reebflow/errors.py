"""Exception types shared across the package.

Every error raised on bad input or failed preconditions derives from
ReebflowError so callers (and the CLI) can distinguish domain failures
from genuine bugs.
"""

from __future__ import annotations


class ReebflowError(Exception):
    """Base class for all domain errors raised by this package."""


# ---------------------------------------------------------------- mesh layer


class ParseError(ReebflowError):
    """Input bytes are not a well-formed mesh in the requested format."""


class NotClosed(ReebflowError):
    """Some mesh edge is not shared by exactly two triangles."""


class NotOrientable(ReebflowError):
    """Triangle orientations cannot be made globally consistent."""


class NotConnected(ReebflowError):
    """The triangle adjacency graph has more than one component."""


class ZeroArea(ReebflowError):
    """A triangle has zero (or negative) area."""

    def __init__(self, triangle: int, message: str | None = None):
        self.triangle = triangle
        super().__init__(message or f"triangle {triangle} has zero area")


class DegenerateSaddle(ReebflowError):
    """A vertex has three or more lower-link components (monkey saddle)."""

    def __init__(self, vertex: int, message: str | None = None):
        self.vertex = vertex
        super().__init__(message or f"vertex {vertex} is a degenerate saddle")


class DuplicateCriticalValue(ReebflowError):
    """Two critical vertices share a field value and policy is 'reject'."""


class NotSimple(ReebflowError):
    """Field does not satisfy the distinct-critical-value precondition."""


# ---------------------------------------------------------------- reeb layer


class InternalSweepError(ReebflowError):
    """The level-set sweep produced inconsistent component structure."""


class OutOfRange(ReebflowError):
    """Queried level lies outside the value span of the requested edge."""


class HitsVertex(ReebflowError):
    """Queried level coincides with a mesh vertex value on the cycle."""


# ---------------------------------------------------------- invariants layer


class InsufficientSamples(ReebflowError):
    """Too few profile samples near a saddle to fit its asymptotics."""


class IllConditionedFit(ReebflowError):
    """Saddle fit design matrix is numerically rank deficient."""


# ---------------------------------------------------------- circulation layer


class MissingCochain(ReebflowError):
    """Operation requires a 1-cochain but the mesh does not carry one."""


class NoCirculation(ReebflowError):
    """The weighted-mean obstruction is nonzero: no circulation exists."""

    def __init__(self, obstruction: float, message: str | None = None):
        self.obstruction = obstruction
        super().__init__(
            message
            or f"no circulation function exists: mean obstruction {obstruction!r}"
        )


# ------------------------------------------------------------- freezing layer


class GenusTooSmall(ReebflowError):
    """Operation needs genus >= 2 (pants decompositions, half twists)."""


class NoLoops(ReebflowError):
    """Reduced graph has no loop edges, so no half-twist data exists."""


class NotHomologous(ReebflowError):
    """The two cycles are not homologous; no spanning 2-chain exists."""


# -------------------------------------------------------------- advect layer


class DomainMismatch(ReebflowError):
    """The map's domain does not match the mesh (wrong chart, wrong
    vertex count, or a permutation that is not a simplicial
    automorphism)."""


# ---------------------------------------------------------- equivalence layer


class DifferentMesh(ReebflowError):
    """Comparison requires both fields to live on the identical mesh."""


class NotZeroMean(ReebflowError):
    """Hamiltonian comparison requires zero-mean fields."""
