"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class DegenerateSpecError(DomainError):
    """A Hamiltonian description with no nonzero coupling."""


class ResourceLimitError(RuntimeError):
    """The requested problem size exceeds a memory guard."""


class ConvergenceError(ArithmeticError):
    """An iterative routine hit its iteration cap."""
