"""Exception hierarchy shared by the library and the command line."""


class EcstatsError(Exception):
    """Base class; ``exit_code`` is what the CLI returns for it."""

    exit_code = 1


class InvariantViolation(EcstatsError):
    """A checked identity failed. This indicates a bug or a false claim."""

    exit_code = 2


class ResourceLimitError(EcstatsError):
    exit_code = 3


class BadInputError(EcstatsError, ValueError):
    exit_code = 4


class CoprimalityError(BadInputError):
    """The prime shares a factor with the level (or with 6)."""


class UnsupportedLevelError(BadInputError):
    pass


class MissingCacheError(EcstatsError):
    exit_code = 4
