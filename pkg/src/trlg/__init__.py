"""TRLG fragile quad watermarking: tamper localisation and self-recovery."""

from .chaos import KeyChain, generate_keychain, read_keyfile, write_keyfile
from .embedder import EmbedResult, embed
from .errors import DimensionError, ImageFormatError, KeyValidationError, TrlgError
from .imagecore import load_image, save_image
from .recovery import RecoveryResult, authenticate, recover

__version__ = "0.1.0"

__all__ = [
    "KeyChain",
    "generate_keychain",
    "read_keyfile",
    "write_keyfile",
    "EmbedResult",
    "embed",
    "authenticate",
    "recover",
    "RecoveryResult",
    "load_image",
    "save_image",
    "TrlgError",
    "DimensionError",
    "ImageFormatError",
    "KeyValidationError",
]
