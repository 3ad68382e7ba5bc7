"""Exception types shared by the codecs and the container format."""


class ClzsiError(Exception):
    """Base class for every error raised by this package."""


class TruncatedStreamError(ClzsiError):
    """A read required more bits than the stream still holds."""


class CorruptStreamError(ClzsiError):
    """The bit stream decoded to a value that no encoder can produce."""


class ContainerFormatError(ClzsiError):
    """Malformed container: bad magic, version, or header fields."""


class ChecksumMismatchError(ClzsiError):
    """Container checksum failed, typically wrong side information."""
