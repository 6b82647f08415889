"""Initial genotype estimation from a skeleton image via axis projections.

Divider lines concentrate darkness into narrow bands of the per-axis
projection profiles; peaks of those profiles, mapped back to page
coordinates, give the starting genotype for the optimiser.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import PageSpec, TableConfig, TableGenotype, sample_genotype
from .raster import RasterImage, model_to_page
from .skeleton_source import SkeletonTarget

DEFAULT_PEAK_THRESHOLD_FRAC = 0.5
DEFAULT_MIN_GAP_PX = 4


class InsufficientStructureError(ValueError):
    """The skeleton shows fewer than two dividers on some axis; no table can
    be estimated and the caller should fall back to random initialization."""


@dataclass(frozen=True)
class ProjectionProfile:
    axis: str  # "x" or "y"
    values: np.ndarray

    def __post_init__(self):
        if self.axis not in ("x", "y"):
            raise ValueError(f"axis must be 'x' or 'y', got {self.axis!r}")
        vals = np.asarray(self.values, dtype=np.float64)
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)


def project(img: RasterImage, axis: str) -> ProjectionProfile:
    """Sum darkness (1 - intensity) along the perpendicular axis; no thresholds."""
    darkness = 1.0 - img.pixels
    if axis == "x":
        values = darkness.sum(axis=0)
    elif axis == "y":
        values = darkness.sum(axis=1)
    else:
        raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")
    return ProjectionProfile(axis, values)


def detect_dividers(
    profile: ProjectionProfile,
    peak_threshold_frac: float = DEFAULT_PEAK_THRESHOLD_FRAC,
    min_gap_px: int = DEFAULT_MIN_GAP_PX,
) -> np.ndarray:
    """Darkness-weighted centroids of above-threshold profile runs.

    Indices whose value reaches peak_threshold_frac of the profile maximum
    are clustered; a gap of at least min_gap_px starts a new cluster. An
    all-zero profile yields an empty list (no table found).
    """
    if not 0.0 < peak_threshold_frac <= 1.0:
        raise ValueError("peak_threshold_frac must lie in (0, 1]")
    values = profile.values
    vmax = values.max() if values.size else 0.0
    if vmax <= 0.0:
        return np.array([])
    idx = np.flatnonzero(values >= peak_threshold_frac * vmax)
    positions = []
    start = 0
    for k in range(1, len(idx) + 1):
        if k == len(idx) or idx[k] - idx[k - 1] >= min_gap_px:
            cluster = idx[start:k]
            weights = values[cluster]
            positions.append(float(np.dot(cluster, weights) / weights.sum()))
            start = k
    return np.array(positions)


def initial_genotype(
    target: SkeletonTarget,
    page: PageSpec | None = None,
    peak_threshold_frac: float = DEFAULT_PEAK_THRESHOLD_FRAC,
    min_gap_px: int = DEFAULT_MIN_GAP_PX,
) -> TableGenotype:
    """Estimate a canonical genotype from divider peaks on both axes.

    Peak centroids are mapped from model resolution back to page coordinates
    with the inverse of the resize transform, then consecutive gaps become
    column widths and row heights.
    """
    page = page or PageSpec()
    x_peaks = detect_dividers(project(target.image, "x"), peak_threshold_frac, min_gap_px)
    y_peaks = detect_dividers(project(target.image, "y"), peak_threshold_frac, min_gap_px)
    if len(x_peaks) < 2 or len(y_peaks) < 2:
        raise InsufficientStructureError(
            f"need at least 2 dividers per axis, found {len(x_peaks)} x "
            f"and {len(y_peaks)} y peaks"
        )
    xs = _to_page_coords(x_peaks, page, page.width)
    ys = _to_page_coords(y_peaks, page, page.height)
    if len(xs) < 2 or len(ys) < 2:
        raise InsufficientStructureError("dividers collapsed after page-coordinate rounding")
    widths = tuple(int(d) for d in np.diff(xs))
    heights = tuple(int(d) for d in np.diff(ys))
    return TableGenotype(
        max_rows=len(heights),
        max_cols=len(widths),
        origin_x=int(xs[0]),
        origin_y=int(ys[0]),
        row_heights=heights,
        col_widths=widths,
    )


def _to_page_coords(peaks: np.ndarray, page: PageSpec, limit: int) -> np.ndarray:
    coords = np.rint([model_to_page(p, page) for p in peaks]).astype(int)
    coords = np.clip(coords, 0, limit - 1)
    return np.unique(coords)


def random_initial_population(
    config: TableConfig,
    size: int,
    seed,
    *,
    page: PageSpec | None = None,
) -> list:
    """Independent uniform genotype draws, the fallback initialization."""
    if size < 1:
        raise ValueError("population size must be at least 1")
    rng = np.random.default_rng(seed)
    return [sample_genotype(config, rng, page=page) for _ in range(size)]
