"""Block Gram matrices and quasi-diagonal blocks."""

from .block import BlockGram, QuasiDiagonal, apply_unitary_freedom, build_block_gram, residual

__all__ = ["BlockGram", "QuasiDiagonal", "apply_unitary_freedom", "build_block_gram", "residual"]
