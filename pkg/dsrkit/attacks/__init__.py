"""Pixel-space FGSM/PGD and their composition with compression."""

from dsrkit.attacks.gradient import attack_batch, fgsm, fgsm_batch, pgd, pgd_batch
from dsrkit.attacks.pipeline import attack_center, run_pipeline, run_pipeline_batch

__all__ = [
    "attack_batch",
    "attack_center",
    "fgsm",
    "fgsm_batch",
    "pgd",
    "pgd_batch",
    "run_pipeline",
    "run_pipeline_batch",
]
