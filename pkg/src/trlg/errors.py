class TrlgError(Exception):
    """Base class for all errors raised by this package."""


class ImageFormatError(TrlgError):
    pass


class DimensionError(TrlgError):
    pass


class KeyValidationError(TrlgError):
    pass
