"""Exception types shared across the package.

The CLI maps these onto exit codes: UsageError -> 1, DataError -> 2,
NumericError -> 3.
"""


class UsageError(Exception):
    """Invalid command-line arguments or inconsistent flag combinations."""


class DataError(Exception):
    """Malformed or unusable input data (files, signals, manifests)."""


class NumericError(Exception):
    """Numerical failure, e.g. a non-finite training loss."""
