"""Sparse linear array synthesis.

Thin package wrapper around the compiled extension: Chebyshev reference
tapers, Hankel rank tools, matrix-pencil extraction, and the JSON-driven
completion pipeline.
"""

from ._synth import (
    chebyshev_taper,
    hankel_rank,
    matrix_pencil,
    run_config,
    sample_reference,
    validate_config,
)

__all__ = [
    "chebyshev_taper",
    "hankel_rank",
    "matrix_pencil",
    "run_config",
    "sample_reference",
    "validate_config",
]
