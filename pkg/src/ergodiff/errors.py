"""Exception types shared across the package.

Every failure mode that callers are expected to handle gets its own class;
plain ValueError is reserved for programming errors.
"""


class ErgodiffError(Exception):
    pass


class DimensionMismatchError(ErgodiffError):
    """Point and system (or metric) disagree about the underlying space."""


class UnsupportedFactorError(ErgodiffError):
    """No closed form available for the requested invariant-factor projection."""


class SingularPointError(ErgodiffError):
    """Evaluation hit the singular center of an observable.

    Carries ``x`` and, when raised along an orbit, the offending iterate ``j``.
    """

    def __init__(self, x, j=None):
        self.x = x
        self.j = j
        where = f"x={x!r}" if j is None else f"x={x!r} at orbit index j={j}"
        super().__init__(f"observable is singular at {where}")


class DivergenceError(ErgodiffError):
    """An improper integral does not converge."""


class NotInLpError(ErgodiffError):
    """Observable fails the declared L^p membership check."""


class ZeroMeasureBallError(ErgodiffError):
    """Ball or cell has zero measure; averages over it are undefined."""


class InsufficientPrefixError(ErgodiffError):
    """Shift points cannot be compared at the requested depth."""


class NonConvergedError(ErgodiffError):
    """A certified limit did not pass its numerical certificate.

    ``partial`` holds the last partial value, never silently discarded.
    """

    def __init__(self, message, partial):
        self.partial = partial
        super().__init__(f"{message} (partial value {partial!r})")


class ScheduleIncompleteError(ErgodiffError):
    """Decay-schedule target unreachable within the h-grid; lists failing (j, k)."""

    def __init__(self, failures):
        self.failures = list(failures)
        super().__init__(f"schedule target unreachable for (j, k) pairs {self.failures}")


class UndefinedRatioError(ErgodiffError):
    """Weak-type ratio is undefined because the observable has zero L^1 norm."""


class ConfigError(ErgodiffError):
    """Experiment configuration failed validation."""
