"""Norm-preserving holomorphic extensions from crossed analytic discs to
the symmetrized bidisc and the diamond.

The heavy lifting happens in the compiled `_npext` module; this package
re-exports its public surface.
"""

from ._npext import (
    BergmanExtension,
    DiamondLinearExtension,
    Extension,
    RoyalPair,
    VarietyFunction,
    __version__,
    build_extension,
    case2_candidate,
    case2_witness,
    check_eqe5,
    contradiction_margin,
    diamond_linear_extension,
    eq8_gap,
    magic_function,
    sample_domain,
    unique_extension,
)

__all__ = [
    "BergmanExtension",
    "DiamondLinearExtension",
    "Extension",
    "RoyalPair",
    "VarietyFunction",
    "__version__",
    "build_extension",
    "case2_candidate",
    "case2_witness",
    "check_eqe5",
    "contradiction_margin",
    "diamond_linear_extension",
    "eq8_gap",
    "magic_function",
    "sample_domain",
    "unique_extension",
]
