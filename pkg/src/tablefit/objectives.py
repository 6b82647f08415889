"""Image-distance objectives measuring fit between a target skeleton and a
candidate phenotype, plus the sign convention turning them into GA fitness."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import PageSpec, TableGenotype
from .raster import RasterImage, render_skeleton_resized
from .skeleton_source import Discriminator, SkeletonTarget

OBJECTIVE_KINDS = ("discriminator_logprob", "l1", "weighted", "nonoverlap")

# Objectives where smaller is better; fitness negates them.
MINIMIZED_KINDS = frozenset({"l1", "nonoverlap"})

# Floor for log of patch probabilities, so an all-wrong patch stays finite.
LOG_EPS = 1e-12


@dataclass(frozen=True)
class ObjectiveSpec:
    kind: str = "nonoverlap"
    lam: float = 100.0  # weight of the pixel-distance term in "weighted"
    discriminator: Discriminator | None = None

    def __post_init__(self):
        if self.kind not in OBJECTIVE_KINDS:
            raise ValueError(f"unknown objective kind {self.kind!r}")
        if self.lam < 0.0:
            raise ValueError("lam must be non-negative")
        if self.kind in ("discriminator_logprob", "weighted") and self.discriminator is None:
            raise ValueError(f"objective {self.kind!r} requires a discriminator")


def candidate_phenotype(g: TableGenotype, page: PageSpec | None = None) -> RasterImage:
    """Candidate rendering the objectives compare against the target: all
    separators drawn, no text, model resolution."""
    return render_skeleton_resized(g, page)


def _pixels(image) -> np.ndarray:
    if isinstance(image, SkeletonTarget):
        return image.image.pixels
    return image.pixels


def obj_discriminator(spec: ObjectiveSpec, scan, candidate) -> float:
    """Mean log patch probability; higher is better."""
    if spec.discriminator is None:
        raise ValueError("discriminator objective requires a discriminator")
    grid = spec.discriminator.scores(_as_image(scan), _as_image(candidate))
    return float(np.mean(np.log(np.maximum(grid, LOG_EPS))))


def obj_l1(target, candidate) -> float:
    """Summed absolute pixel difference; lower is better."""
    a, b = _pixels(target), _pixels(candidate)
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    return float(np.abs(a - b).sum())


def obj_weighted(spec: ObjectiveSpec, scan, target, candidate) -> float:
    """Discriminator term minus lam times the pixel distance; higher is better."""
    return obj_discriminator(spec, scan, candidate) - spec.lam * obj_l1(target, candidate)


def obj_nonoverlap(target, candidate) -> float:
    """Pixel difference normalised by the ink mass of both images; lower is
    better and an exact match of non-blank images scores 0. A comparison
    involving an entirely white image is defined as the worst value 1."""
    a, b = _pixels(target), _pixels(candidate)
    if a.shape != b.shape:
        raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
    target_ink = float((1.0 - a).sum())
    candidate_ink = float((1.0 - b).sum())
    if target_ink <= 0.0 or candidate_ink <= 0.0:
        return 1.0
    return float(np.abs(a - b).sum() / (candidate_ink * target_ink))


def _as_image(image) -> RasterImage:
    return image.image if isinstance(image, SkeletonTarget) else image


def objective_value(
    spec: ObjectiveSpec,
    target: SkeletonTarget,
    candidate: RasterImage,
    scan: RasterImage | None = None,
) -> float:
    """Evaluate the configured objective. When no scan image is supplied the
    target itself plays that role, which is what the stub discriminator
    expects."""
    scan_img = scan if scan is not None else _as_image(target)
    if spec.kind == "discriminator_logprob":
        return obj_discriminator(spec, scan_img, candidate)
    if spec.kind == "l1":
        return obj_l1(target, candidate)
    if spec.kind == "weighted":
        return obj_weighted(spec, scan_img, target, candidate)
    return obj_nonoverlap(target, candidate)


def is_minimized(kind: str) -> bool:
    return kind in MINIMIZED_KINDS


def fitness_value(spec: ObjectiveSpec, objective: float) -> float:
    """Fitness is the objective with a sign making larger always better."""
    return -objective if is_minimized(spec.kind) else objective


def fitness(
    spec: ObjectiveSpec,
    target: SkeletonTarget,
    candidate: RasterImage,
    scan: RasterImage | None = None,
) -> float:
    return fitness_value(spec, objective_value(spec, target, candidate, scan))
