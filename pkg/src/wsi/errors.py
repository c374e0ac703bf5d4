"""Exception types raised by the toolkit."""


class WSIError(Exception):
    """Base class for all toolkit errors."""


class OutOfDomainError(WSIError, ValueError):
    pass


class OutOfRangeError(WSIError, ValueError):
    pass


class UnsupportedVariantError(WSIError, ValueError):
    pass


class PreconditionError(WSIError, ValueError):
    pass


class InvalidOracleError(WSIError, ValueError):
    pass


class SingularPointError(WSIError, ValueError):
    pass


class DegenerateFaceError(WSIError, ValueError):
    pass


class ConfigError(WSIError, ValueError):
    pass
