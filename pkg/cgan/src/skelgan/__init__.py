"""Scan-to-skeleton translation with a conditional GAN.

Consumes table corpora through their on-disk layout (manifest plus paired
PNGs) and writes skeleton images and patch score grids in the formats the
fitting pipeline reads, so neither package imports the other.
"""

from .data import MODEL_RESOLUTION, PairDataset, load_grayscale, to_model_frame
from .nets import PatchDiscriminator, UNetGenerator
from .train import TrainSpec, train

__all__ = [
    "MODEL_RESOLUTION",
    "PairDataset",
    "load_grayscale",
    "to_model_frame",
    "PatchDiscriminator",
    "UNetGenerator",
    "TrainSpec",
    "train",
]
