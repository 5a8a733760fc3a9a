"""Operator construction from configuration values."""

import logging

from dsrkit.compression.base import CompressionOperator, IdentityOperator
from dsrkit.compression.jpeg import JpegOperator
from dsrkit.compression.patch_svd import DEFAULT_PATCH, DEFAULT_RANK, PatchSvdOperator
from dsrkit.compression.pca import PcaOperator, pca_fit
from dsrkit.errors import ConfigError
from dsrkit.models import LabeledDataset, PcaBasis

logger = logging.getLogger(__name__)

OPERATOR_KINDS = ("identity", "jpeg", "pca", "patch_svd")

__all__ = ["CompressionOperator", "OPERATOR_KINDS", "OperatorFactory", "build_operator"]


class OperatorFactory:
    """Builds operators, fitting and caching PCA bases on the training split.

    Example:
        >>> factory = OperatorFactory(train_split)
        >>> factory.build("jpeg", quality=55).name
        'jpeg(q=55)'
    """

    def __init__(self, train_split: LabeledDataset | None = None) -> None:
        self.train_split = train_split
        self._bases: dict[int, PcaBasis] = {}

    def pca_basis(self, components: int) -> PcaBasis:
        """Fitted basis with ``components`` components (cached).

        Raises:
            ConfigError: If no training split is available
        """
        if components not in self._bases:
            if self.train_split is None:
                raise ConfigError("PCA operators need a training split to fit on")
            logger.info("Fitting PCA basis with %d components", components)
            self._bases[components] = pca_fit(self.train_split, components)
        return self._bases[components]

    def build(
        self,
        kind: str,
        quality: int = 55,
        components: int = 50,
        patch: int = DEFAULT_PATCH,
        rank: int = DEFAULT_RANK,
    ) -> CompressionOperator:
        """Build an operator of the given kind.

        Raises:
            ConfigError: If the kind is unknown or its parameters are invalid
        """
        try:
            if kind == "identity":
                return IdentityOperator()
            if kind == "jpeg":
                return JpegOperator(quality)
            if kind == "pca":
                return PcaOperator(self.pca_basis(components))
            if kind == "patch_svd":
                return PatchSvdOperator(patch, rank)
        except ConfigError:
            raise
        except ValueError as e:
            raise ConfigError(f"invalid {kind} operator parameters: {e}") from e
        raise ConfigError(
            f"unknown operator kind '{kind}', expected one of {', '.join(OPERATOR_KINDS)}"
        )


def build_operator(
    kind: str, train_split: LabeledDataset | None = None, **params: int
) -> CompressionOperator:
    """One-off operator construction without basis caching."""
    return OperatorFactory(train_split).build(kind, **params)
