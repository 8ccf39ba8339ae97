"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when inputs violate a documented precondition."""


class CapacityError(ValidationError):
    """Raised when a request exceeds the simulator's size bounds."""


class NonlinearSemanticsError(RuntimeError):
    """Raised when a state lies outside the domain where the nonlinear
    evolution step has defined semantics."""
