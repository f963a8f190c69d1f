"""
Exception hierarchy shared by the core modules, storage and the CLI
"""


class PsgError(Exception):
    """Base class for every error raised by psgoldbach"""


class OutOfRange(PsgError, ValueError):
    """A parameter lies outside its admissible range"""


class ZeroDenominator(PsgError, ValueError):
    pass


class WeightOverflow(PsgError, OverflowError):
    """W no longer fits a signed 64-bit machine integer"""


class CacheCorrupt(PsgError):
    """A cache file failed its header or checksum validation"""

    def __init__(self, path, reason: str):
        super().__init__(f"Corrupt cache file {path}: {reason}")
        self.path = path
        self.reason = reason


class OutOfBounds(PsgError, IndexError):
    pass


class NoSolution(PsgError):
    pass


class GridTooSmall(PsgError, ValueError):
    pass


class GridMismatch(PsgError, ValueError):
    pass


class LengthMismatch(PsgError, ValueError):
    pass


class DominationViolated(PsgError, ValueError):
    """f <= nu fails somewhere on [1, N]"""

    def __init__(self, n: int, f_value: float, nu_value: float):
        super().__init__(f"f({n}) = {f_value!r} exceeds nu({n}) = {nu_value!r}")
        self.n = n


class PrecisionLoss(PsgError, ArithmeticError):
    """FFT output drifted too far from the integers it should represent"""


class UsageError(PsgError):
    """Invalid command line; the CLI exits with code 64"""

    exit_code = 64

    def __init__(self, message: str, flag: str = None):
        super().__init__(message)
        self.flag = flag


class RunCancelled(PsgError):
    """A long-running verification was asked to stop"""
