"""Exception hierarchy shared across the package.

Every failure mode that a caller can sensibly react to gets its own class;
the CLI maps each to a distinct exit code.
"""


class WildKZError(Exception):
    """Base class for all package errors."""


class SchemaError(WildKZError):
    """Configuration file violates the expected schema."""


class NotFiniteType(WildKZError):
    """Cartan matrix is not of finite type."""


class ZeroTime(WildKZError):
    """r-matrix evaluated at t = 0."""


class CoincidentTimes(WildKZError):
    """Two marked points coincide."""


class CriticalLevel(WildKZError):
    """Level equals -h^vee; Sugawara and connection operators undefined."""


class TruncationExceeded(WildKZError):
    """An operator left the realized module slice."""


class CutoffTooSmall(WildKZError):
    """A relation image escapes the realized weight box."""


class NonInvariant(WildKZError):
    """Operator does not preserve the relation subspace of a block."""


class CoalescencePenalty(WildKZError):
    """Integration path came closer to a diagonal than the distance floor."""


class StepUnderflow(WildKZError):
    """Adaptive integrator step size fell below the minimum."""
