"""Exception hierarchy; each class maps to a CLI exit code."""


class PolileanError(Exception):
    exit_code = 1


class ConfigError(PolileanError, ValueError):
    """Invalid configuration or usage."""

    exit_code = 2


class DataError(PolileanError, ValueError):
    """Malformed or inconsistent input data."""

    exit_code = 3


class NumericError(PolileanError, ArithmeticError):
    """A numeric stage produced non-finite values."""

    exit_code = 4
