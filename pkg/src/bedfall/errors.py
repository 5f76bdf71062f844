"""Exception hierarchy shared across the package."""


class BedfallError(Exception):
    """Base class for all package errors."""


class DataError(BedfallError):
    """Input data violates a contract (bad content, missing file, wrong shape)."""


class ParseError(DataError):
    """Byte- or line-level parse failure; the message names the offset or line."""


class ConfigError(BedfallError):
    """Invalid configuration file or unknown configuration key."""


class TrainingError(BedfallError):
    """Training aborted (for example a non-finite loss)."""
