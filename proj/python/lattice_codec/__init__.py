"""Matrix descriptors for periodic lattice truss unit cells."""

from ._lattice_codec import (
    Cell,
    Descriptors,
    LatticeError,
    ParseError,
    ValidationFailed,
    __version__,
    element_stiffness,
    encode,
    fingerprint,
    properties,
    reconstruct,
    run_cli,
    tessellate,
    validate,
)

__all__ = [
    "Cell",
    "Descriptors",
    "LatticeError",
    "ParseError",
    "ValidationFailed",
    "element_stiffness",
    "encode",
    "fingerprint",
    "properties",
    "reconstruct",
    "run_cli",
    "tessellate",
    "validate",
]
