"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Bad input: malformed graph, template, family or argument."""


class InconsistencyError(RuntimeError):
    """A computed quantity contradicts an inequality that must hold.

    Raised, for instance, when a box integral with equal faces comes out
    negative beyond rounding tolerance.
    """
