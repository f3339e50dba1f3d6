"""Exception types shared across the package."""


class PscError(Exception):
    """Base class for all package errors."""


class ParseError(PscError):
    """Malformed input file record."""


class ValidationError(PscError):
    """Structurally invalid piecewise complex."""


class GeometryError(PscError):
    """Geometric query cannot be answered (open surface, degenerate ray)."""


class MeshError(PscError):
    """Internal tetrahedralisation failure."""


class ProtectionError(PscError):
    """A sharp feature could not be protected."""
