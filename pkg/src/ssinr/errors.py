"""Exception hierarchy shared by every ssinr module."""


class SsinrError(Exception):
    """Base class for all errors raised by ssinr."""


class ContractViolation(SsinrError, ValueError):
    """A caller broke an operation's precondition (shapes, ranges, parameters)."""


class NumericError(SsinrError, ArithmeticError):
    """A computation produced NaN or Inf."""

    def __init__(self, message, epoch=None):
        super().__init__(message)
        self.epoch = epoch


class OracleFailure(NumericError):
    """The finite-difference oracle hit a non-finite function value."""

    def __init__(self, message, index):
        super().__init__(message)
        self.index = index


class ConfigError(SsinrError, ValueError):
    """Run configuration is inconsistent or incomplete."""


class IngestionError(SsinrError, ValueError):
    """An input signal file has an unsupported format or layout."""


class CheckpointError(SsinrError, IOError):
    """Base class for checkpoint load failures."""


class NotACheckpointError(CheckpointError):
    pass


class CheckpointVersionError(CheckpointError):
    pass


class TruncatedCheckpointError(CheckpointError):
    pass
