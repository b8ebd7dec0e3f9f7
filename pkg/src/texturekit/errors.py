"""Exception types raised at texturekit's public API boundaries."""


class TextureKitError(Exception):
    """Base class for all texturekit errors."""


class FormatError(TextureKitError):
    """A file or byte stream is unreadable, truncated, or malformed."""


class UnsupportedImageError(FormatError):
    """An image uses a bit depth or color layout the loader does not accept."""


class ShapeError(TextureKitError):
    """Array dimensions violate an operation's contract."""


class NumericError(TextureKitError):
    """Input values are degenerate for the requested computation."""
