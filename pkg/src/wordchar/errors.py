"""Exception hierarchy shared by every layer of the package."""


class WordCharError(Exception):
    """Base class for all errors raised by wordchar."""


class DimensionError(WordCharError, ValueError):
    """Operand shapes do not line up."""


class NumericError(WordCharError, FloatingPointError):
    """A tensor picked up NaN or Inf values."""


class UsageError(WordCharError, RuntimeError):
    """An API was called in an invalid state or with invalid arguments."""


class DataError(WordCharError, ValueError):
    """Input data is inconsistent with the model or the vocabularies."""


class ConfigError(WordCharError, ValueError):
    """A configuration value or key is invalid."""


class DatasetParseError(DataError):
    def __init__(self, path, line_number, message):
        self.path = path
        self.line_number = line_number
        super().__init__(f"{path}:{line_number}: {message}")


class NumericDivergenceError(WordCharError, ArithmeticError):
    """Training produced a non-finite loss."""

    def __init__(self, epoch, batch, member=None):
        self.epoch = epoch
        self.batch = batch
        self.member = member
        where = f"epoch {epoch}, batch {batch}"
        if member is not None:
            where = f"ensemble member {member}, " + where
        super().__init__(f"loss diverged to a non-finite value at {where}")


class ModelFormatError(WordCharError):
    """Base class for model file load failures."""


class BadMagicError(ModelFormatError):
    pass


class VersionError(ModelFormatError):
    pass


class ChecksumError(ModelFormatError):
    pass


class TruncatedFileError(ModelFormatError):
    pass
