"""Exception types shared across the package."""


class FormatError(ValueError):
    """A file on disk does not match its expected binary or text layout."""


class NoValidPixelsError(ValueError):
    """An operation that needs at least one valid ground-truth pixel got none."""
