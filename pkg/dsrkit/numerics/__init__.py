"""Deterministic numerical kernels shared by the other packages.

Block DCT, Jacobi SVD, Gram-Schmidt orthogonalization, norms, PSNR and the
seedable random source.
"""

from dsrkit.numerics.dct import dct2_block, dct_basis, idct2_block
from dsrkit.numerics.linalg import (
    PSNR_CAP,
    l2_norm,
    linf_norm,
    mse,
    normalize,
    orthogonal_complement,
    psnr,
)
from dsrkit.numerics.random import RandomSource, mix_seed
from dsrkit.numerics.svd import spectral_norm, svd, svd_batch

__all__ = [
    "PSNR_CAP",
    "RandomSource",
    "dct2_block",
    "dct_basis",
    "idct2_block",
    "l2_norm",
    "linf_norm",
    "mix_seed",
    "mse",
    "normalize",
    "orthogonal_complement",
    "psnr",
    "spectral_norm",
    "svd",
    "svd_batch",
]
