"""Lossy, non-invertible compression operators C: Image -> Image."""

from dsrkit.compression.base import CompressionOperator, IdentityOperator
from dsrkit.compression.jpeg import JpegOperator, jpeg_like_compress, quantization_table
from dsrkit.compression.operators import OPERATOR_KINDS, OperatorFactory, build_operator
from dsrkit.compression.patch_svd import PatchSvdOperator, patch_svd_compress
from dsrkit.compression.pca import PcaOperator, pca_compress, pca_fit, pca_project_batch

__all__ = [
    "OPERATOR_KINDS",
    "CompressionOperator",
    "IdentityOperator",
    "JpegOperator",
    "OperatorFactory",
    "PatchSvdOperator",
    "PcaOperator",
    "build_operator",
    "jpeg_like_compress",
    "patch_svd_compress",
    "pca_compress",
    "pca_fit",
    "pca_project_batch",
    "quantization_table",
]
