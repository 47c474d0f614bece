"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid configuration: bad shapes, sizes, parameters or files."""


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""
