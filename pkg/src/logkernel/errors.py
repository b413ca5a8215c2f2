"""Exception hierarchy shared by the engine and the command line."""


class LogKernelError(Exception):
    """Base class for every error raised by this package."""


class InvalidInput(LogKernelError, ValueError):
    pass


class PrecisionExhausted(LogKernelError, ArithmeticError):
    """The working precision cannot resolve the requested quantity."""


class ResourceLimit(LogKernelError, RuntimeError):
    pass


class Unsupported(LogKernelError, ValueError):
    """The request is well formed but outside the proven frame."""


class NotTorsionCertified(LogKernelError, ArithmeticError):
    pass
