"""Exception types shared across the package."""


class CloneLabError(Exception):
    """Base class for all clonelab errors."""


class CycleDetected(CloneLabError):
    """Cover relation contains a cycle, so no partial order exists."""


class UnknownElement(CloneLabError):
    """An element id does not belong to the structure it was used with."""


class TooLarge(CloneLabError):
    """Requested enumeration exceeds the hard feasibility guard."""


class InclusionViolation(CloneLabError):
    """A set family member is contained in another member."""


class SizeMismatch(CloneLabError):
    """Set family members do not all have the required cardinality."""


class BasisMismatch(CloneLabError):
    """Operands are defined over different bases or fields."""


class NotComparable(CloneLabError):
    """A translation map was requested for an incomparable element pair."""


class SingletonsNotSmall(CloneLabError):
    """Instance too degenerate for witness construction: no singleton is small."""


class NotAPolymorphism(CloneLabError):
    """A generator is not a binary sum preserving the monoid."""


class BudgetExceeded(CloneLabError):
    """Closure computation exceeded its operation-count budget."""


class ArityBeyondCap(CloneLabError):
    """An operation's arity exceeds the enumeration cap."""


class CapMismatch(CloneLabError):
    """Graded clones compared at different arity caps or domains."""


class ConfigError(CloneLabError):
    """Malformed instance or run configuration."""
