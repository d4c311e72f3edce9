"""Exception hierarchy shared across the package."""


class ValidationError(ValueError):
    """Input data violates a structural contract (bad dataset, bad class, ...)."""


class RankMismatchError(ValidationError):
    """Operands live over covers of different ranks."""


class BudgetError(RuntimeError):
    """An explicitly budgeted computation (oracle iteration, enumeration) ran out."""


class CapabilityError(RuntimeError):
    """The requested exact computation is outside the supported dimension range."""


class SubconeError(ValueError):
    """The chosen subcone is unusable (not strictly interior, too wide, ...)."""
