"""Exception types shared across the toolkit.

ConfigurationError maps to CLI exit code 2, NumericalValidityError to 3.
"""


class ConfigurationError(Exception):
    """Invalid grid, step size, or run configuration."""


class ContractViolation(Exception):
    """An operation was called with inputs that break its contract."""


class NumericalValidityError(Exception):
    """A run violated a numerical validity gate (e.g. energy conservation)."""


class FitError(Exception):
    """Not enough usable data points to fit a convergence order."""
