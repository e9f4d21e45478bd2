"""Exception types shared across the toolkit."""


class DomainError(ValueError):
    """An input lies outside the physical domain of an operation."""


class InsufficientDataError(ValueError):
    """Too few usable data points for the requested estimate."""


class ValidationError(ValueError):
    """Configuration or table validation failed.

    ``errors`` holds every problem found, not only the first one.
    """

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))
