"""Target skeleton providers for the fitter.

The optimiser only ever sees a SkeletonTarget at model resolution; where it
came from (ideal rendering, simulated corruption, or an external translation
model) is carried as provenance. The degradation simulator stands in for an
imperfect translation model with controllable error magnitudes.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import uniform_filter

from .fileio import atomic_write_text
from .model import MODEL_RESOLUTION, PageSpec, TableGenotype, divider_positions
from .raster import (
    RasterImage,
    load_png,
    render_skeleton_resized,
    resize,
)

PATCH_GRID = 30

PROVENANCES = ("oracle", "degraded", "external")


@dataclass(frozen=True)
class SkeletonTarget:
    image: RasterImage
    provenance: str

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if self.image.width != self.image.height:
            raise ValueError("target skeleton must be square")


@dataclass(frozen=True)
class DegradationParams:
    """Controlled corruption of an ideal skeleton.

    Jitter shifts whole divider lines, dropout erases line segments between
    cell boundaries, and blur softens line edges; all three act at page scale,
    in page pixels. Speckle flips pixels of the resized model-scale image,
    where stray translation artefacts would appear.
    """

    divider_jitter_px: int = 3
    segment_dropout_prob: float = 0.1
    blur_radius: int = 1
    speckle_prob: float = 0.001

    def __post_init__(self):
        if self.divider_jitter_px < 0 or self.blur_radius < 0:
            raise ValueError("jitter and blur radius must be non-negative")
        for p in (self.segment_dropout_prob, self.speckle_prob):
            if not 0.0 <= p <= 1.0:
                raise ValueError("probabilities must lie in [0, 1]")


def oracle_skeleton(g: TableGenotype, page: PageSpec | None = None) -> SkeletonTarget:
    """Ideal target: exactly the resized rendering of the true skeleton."""
    return SkeletonTarget(render_skeleton_resized(g, page), "oracle")


def degraded_skeleton(
    g: TableGenotype,
    params: DegradationParams,
    rng_seed,
    page: PageSpec | None = None,
    line_width: int = 1,
) -> SkeletonTarget:
    """Corrupted target: jittered divider lines with dropped segments and edge
    blur at page scale, then speckle at model resolution. All randomness comes
    from rng_seed."""
    page = page or PageSpec()
    rng = np.random.default_rng(rng_seed)
    xs, ys = divider_positions(g)
    jitter = params.divider_jitter_px

    if len(xs) >= 2 and len(ys) >= 2:
        jx = np.asarray(xs) + rng.integers(-jitter, jitter + 1, size=len(xs))
        jy = np.asarray(ys) + rng.integers(-jitter, jitter + 1, size=len(ys))
        jx = np.clip(jx, 0, page.width - line_width)
        jy = np.clip(jy, 0, page.height - line_width)
        geometry_clean = params.segment_dropout_prob == 0.0 and jitter == 0
        if geometry_clean and params.blur_radius == 0:
            # Uncorrupted page drawing: reuse the direct model-scale renderer
            # so a zero-parameter degradation is pixel-exact vs the oracle.
            rng.random((len(ys), len(jx) - 1))
            rng.random((len(xs), len(jy) - 1))
            base = render_skeleton_resized(g, page, line_width).pixels
        else:
            canvas = np.ones((page.height, page.width), dtype=np.float64)
            for i, y in enumerate(jy):
                keep = rng.random(len(jx) - 1) >= params.segment_dropout_prob
                for k in range(len(jx) - 1):
                    if not keep[k]:
                        continue
                    hi = jx[k + 1] + (line_width if k == len(jx) - 2 else 0)
                    canvas[y : y + line_width, jx[k] : hi] = 0.0
            for j, x in enumerate(jx):
                keep = rng.random(len(jy) - 1) >= params.segment_dropout_prob
                for k in range(len(jy) - 1):
                    if not keep[k]:
                        continue
                    hi = jy[k + 1] + (line_width if k == len(jy) - 2 else 0)
                    canvas[jy[k] : hi, x : x + line_width] = 0.0
            if params.blur_radius > 0:
                # uniform_filter of exact {0,1} values can stray ~1e-16 outside
                # the unit interval; clamp before the range-checked wrapper.
                canvas = np.clip(
                    uniform_filter(canvas, size=2 * params.blur_radius + 1, mode="nearest"),
                    0.0,
                    1.0,
                )
            base = resize(RasterImage(canvas), page.model_resolution).pixels
    else:
        base = np.ones((page.model_resolution, page.model_resolution))

    out = np.array(base)
    flips = rng.random(out.shape) < params.speckle_prob
    out = np.where(flips, 1.0 - out, out)
    return SkeletonTarget(RasterImage(np.clip(out, 0.0, 1.0)), "degraded")


def load_external_skeleton(path, page: PageSpec | None = None) -> SkeletonTarget:
    """Read a skeleton produced out of band, resizing to model resolution if needed."""
    page = page or PageSpec()
    img = load_png(path)
    target = page.model_resolution
    if img.width != target or img.height != target:
        img = resize(img, target)
    return SkeletonTarget(img, "external")


# --- discriminators ----------------------------------------------------------

class Discriminator:
    """Scores candidate-vs-scan agreement as a PATCH_GRID x PATCH_GRID
    probability grid, one entry per image patch."""

    def scores(self, scan: RasterImage, candidate: RasterImage) -> np.ndarray:
        raise NotImplementedError


def _patch_starts(length: int):
    return np.array([(length * k) // PATCH_GRID for k in range(PATCH_GRID)])


class StubDiscriminator(Discriminator):
    """Deterministic patchwise similarity: 1 minus the mean absolute intensity
    difference per patch. Monotone in patch agreement, so it exercises the
    discriminator-driven objectives without any trained network."""

    def scores(self, scan: RasterImage, candidate: RasterImage) -> np.ndarray:
        a, b = scan.pixels, candidate.pixels
        if a.shape != b.shape:
            raise ValueError(f"image shapes differ: {a.shape} vs {b.shape}")
        diff = np.abs(a - b)
        rs = _patch_starts(a.shape[0])
        cs = _patch_starts(a.shape[1])
        sums = np.add.reduceat(np.add.reduceat(diff, rs, axis=0), cs, axis=1)
        row_sizes = np.diff(np.append(rs, a.shape[0]))
        col_sizes = np.diff(np.append(cs, a.shape[1]))
        areas = np.outer(row_sizes, col_sizes)
        return 1.0 - sums / areas


class PrecomputedScores(Discriminator):
    """Adapter for an externally produced score grid (one fixed candidate)."""

    def __init__(self, grid: np.ndarray):
        self.grid = _validate_grid(np.asarray(grid, dtype=np.float64))

    def scores(self, scan: RasterImage, candidate: RasterImage) -> np.ndarray:
        return self.grid


def _validate_grid(grid: np.ndarray) -> np.ndarray:
    if grid.shape != (PATCH_GRID, PATCH_GRID):
        raise ValueError(f"score grid must be {PATCH_GRID}x{PATCH_GRID}, got {grid.shape}")
    if grid.min() < 0.0 or grid.max() > 1.0:
        raise ValueError("score grid values must lie in [0, 1]")
    return grid


def save_scores_csv(path, grid: np.ndarray) -> None:
    grid = _validate_grid(np.asarray(grid, dtype=np.float64))
    buf = io.StringIO()
    np.savetxt(buf, grid, fmt="%.8f", delimiter=",")
    atomic_write_text(path, buf.getvalue())


def load_scores_csv(path) -> np.ndarray:
    grid = np.loadtxt(path, delimiter=",")
    return _validate_grid(np.atleast_2d(grid))
