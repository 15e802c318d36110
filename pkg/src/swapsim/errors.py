"""Exception types shared across the package.

The command line tool maps these onto distinct exit codes, so library code
should raise the most specific one that applies.
"""


class SwapSimError(Exception):
    """Base class for all package errors."""


class ConfigError(SwapSimError):
    """Bad or inconsistent user-supplied configuration (exit code 2)."""


class NumericalDomainError(SwapSimError):
    """A numerical routine left its domain of validity (exit code 3).

    Examples: a covariance matrix that is not positive definite, a
    probability below the negativity tolerance, a fit that cannot brace
    its root.
    """


class FitError(NumericalDomainError):
    """A curve fit failed to converge after bounded restarts.

    Subclasses NumericalDomainError so the command line tool reports it
    with the same exit code as other numerical failures.
    """


class CapacityError(SwapSimError):
    """A request exceeds a documented size limit (exit code 4)."""
