class DomainError(ValueError):
    """An endpoint lies outside the environment or is unreachable."""


class ParameterError(ValueError):
    """An invalid model or operation parameter."""
