"""Exception taxonomy shared by the library and the CLI exit-code mapping."""


class AntmineError(Exception):
    """Base class for all antmine errors."""


class ConfigError(AntmineError, ValueError):
    """Invalid configuration, argument, or precondition (CLI exit code 1)."""


class DataError(AntmineError, ValueError):
    """Malformed or inconsistent input data (CLI exit code 2)."""


class InvariantError(AntmineError):
    """An internal invariant was violated; indicates a bug (CLI exit code 3)."""
