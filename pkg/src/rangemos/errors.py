"""Exception types shared across the package."""


class FormatError(ValueError):
    """A file on disk violates its declared binary or text layout."""


class ShapeMismatchError(ValueError):
    """Two paired grids or arrays do not share the required dimensions."""
