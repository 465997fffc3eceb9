"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes, so each family stays distinct.
"""


class IslrError(Exception):
    """Base class for every error raised by this package."""


class ImageIOError(IslrError, OSError):
    """An image file could not be read or written."""


class MalformedHeaderError(ImageIOError):
    pass


class TruncatedDataError(ImageIOError):
    pass


class UnsupportedFormatError(ImageIOError):
    pass


class ConfigError(IslrError, ValueError):
    """Invalid configuration or argument value."""


class ShapeError(IslrError, ValueError):
    """Tensor or layer shapes are incompatible."""


class NumericError(IslrError, ArithmeticError):
    """Non-finite values appeared, or a gradient check failed."""


class DatasetError(IslrError):
    """The dataset tree does not follow the expected layout."""


class CheckpointError(IslrError):
    pass


class BadMagicError(CheckpointError):
    pass


class UnsupportedVersionError(CheckpointError):
    pass


class TensorMismatchError(CheckpointError):
    """Tensor count, name, or shape in a checkpoint disagrees with the model."""


class TruncatedCheckpointError(CheckpointError):
    pass
