"""Rasterisation: page-scale scan and skeleton images, model-scale resizing.

Images are grayscale intensity grids in [0, 1] where 0 is black ink and 1 is
white background. Rendering is fully deterministic given a seed, so generated
corpora are byte-reproducible.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from PIL import Image
from scipy import sparse

from . import font as fonts
from .fileio import atomic_write_bytes
from .model import PageSpec, TableConfig, TableGenotype, divider_positions

BLACK = 0.0
WHITE = 1.0


class ImageFormatError(ValueError):
    """An image file is missing, corrupt, or not 8-bit grayscale."""


@dataclass(frozen=True, eq=False)
class RasterImage:
    """Immutable grayscale image; pixels shape is (height, width)."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.array(self.pixels, dtype=np.float64, copy=True)
        if px.ndim != 2 or px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("pixels must be a non-empty 2-D array")
        if px.min() < 0.0 or px.max() > 1.0:
            raise ValueError("intensities must lie in [0, 1]")
        px.flags.writeable = False
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def same_pixels(self, other: "RasterImage") -> bool:
        return self.pixels.shape == other.pixels.shape and bool(
            np.array_equal(self.pixels, other.pixels)
        )

    @staticmethod
    def blank(width: int, height: int, value: float = WHITE) -> "RasterImage":
        return RasterImage(np.full((height, width), value, dtype=np.float64))


@dataclass(frozen=True)
class RenderStyle:
    """Knobs of the rasteriser that are not part of the table genotype."""

    line_width: int = 1
    separator_visibility_prob: float = 0.5
    glyph_height: int | None = None  # None: take the configured font size
    word_gap: int = 3
    cell_padding: int = 2

    def __post_init__(self):
        if self.line_width < 1:
            raise ValueError("line_width must be at least 1")
        if not 0.0 <= self.separator_visibility_prob <= 1.0:
            raise ValueError("separator_visibility_prob must lie in [0, 1]")
        if self.word_gap < 0 or self.cell_padding < 0:
            raise ValueError("word_gap and cell_padding must be non-negative")


def _draw_dividers(canvas, g: TableGenotype, line_width: int, keep_h=None, keep_v=None):
    """Paint divider lines in place. keep_h / keep_v mask whole lines; None draws all."""
    xs, ys = divider_positions(g)
    if len(xs) < 2 or len(ys) < 2:
        return
    height, width = canvas.shape
    x_lo = max(xs[0], 0)
    x_hi = min(xs[-1] + line_width, width)
    y_lo = max(ys[0], 0)
    y_hi = min(ys[-1] + line_width, height)
    for i, y in enumerate(ys):
        if keep_h is not None and not keep_h[i]:
            continue
        canvas[max(y, 0) : min(y + line_width, height), x_lo:x_hi] = BLACK
    for j, x in enumerate(xs):
        if keep_v is not None and not keep_v[j]:
            continue
        canvas[y_lo:y_hi, max(x, 0) : min(x + line_width, width)] = BLACK


def render_skeleton(
    g: TableGenotype, page: PageSpec | None = None, style: RenderStyle | None = None
) -> RasterImage:
    """All dividers drawn, no text: the form every candidate is rendered in."""
    page = page or PageSpec()
    style = style or RenderStyle()
    canvas = np.full((page.height, page.width), WHITE, dtype=np.float64)
    _draw_dividers(canvas, g, style.line_width)
    return RasterImage(canvas)


def _random_word(rng, config: TableConfig) -> str:
    lo, hi = config.word_len_range
    length = int(rng.integers(lo, hi + 1))
    letters = rng.integers(0, len(fonts.ALPHABET), size=length)
    return "".join(fonts.ALPHABET[i] for i in letters)


def _blit(canvas, mask, top: int, left: int, box):
    """Stamp a boolean ink mask clipped to the box (y0, y1, x0, x1)."""
    y0, y1, x0, x1 = box
    src_y0 = max(0, y0 - top)
    src_x0 = max(0, x0 - left)
    src_y1 = mask.shape[0] - max(0, top + mask.shape[0] - y1)
    src_x1 = mask.shape[1] - max(0, left + mask.shape[1] - x1)
    if src_y0 >= src_y1 or src_x0 >= src_x1:
        return
    sub = mask[src_y0:src_y1, src_x0:src_x1]
    region = canvas[top + src_y0 : top + src_y1, left + src_x0 : left + src_x1]
    region[sub] = BLACK


def _fill_cell(canvas, rng, config: TableConfig, style: RenderStyle, box):
    """Lay random words into a cell box, wrapping lines and clipping overflow."""
    y0, y1, x0, x1 = box
    inner_w = x1 - x0
    if inner_w < 1 or y1 - y0 < 1:
        return
    family = fonts.get_family(config.font_family)
    size = style.glyph_height or config.font_size
    lo, hi = config.words_per_cell_range
    n_words = int(rng.integers(lo, hi + 1))
    masks = [fonts.render_word(_random_word(rng, config), family, size) for _ in range(n_words)]
    if not masks:
        return
    leading = max(2, size // 4)
    lines = []
    current, used = [], 0
    for mask in masks:
        w = mask.shape[1]
        needed = w if not current else used + style.word_gap + w
        if current and needed > inner_w:
            lines.append((current, used))
            current, used = [mask], w
        else:
            current.append(mask)
            used = needed
    if current:
        lines.append((current, used))
    y = y0
    for line_masks, line_w in lines:
        if y >= y1:
            break
        if config.alignment == "left":
            x = x0
        elif config.alignment == "right":
            x = x1 - line_w
        else:
            x = x0 + (inner_w - line_w) // 2
        for mask in line_masks:
            _blit(canvas, mask, y, x, box)
            x += mask.shape[1] + style.word_gap
        y += size + leading


def render_scan(
    g: TableGenotype,
    config: TableConfig,
    style: RenderStyle | None = None,
    rng_seed=0,
    *,
    page: PageSpec | None = None,
) -> RasterImage:
    """Synthetic input image: random cell text plus a random subset of dividers.

    Text is drawn cell by cell in row-major order, then one visibility coin is
    flipped per divider line; the draw order pins the random stream so a fixed
    seed reproduces the image byte for byte.
    """
    page = page or PageSpec()
    style = style or RenderStyle()
    rng = np.random.default_rng(rng_seed)
    canvas = np.full((page.height, page.width), WHITE, dtype=np.float64)
    xs, ys = divider_positions(g)
    lw, pad = style.line_width, style.cell_padding
    if len(xs) >= 2 and len(ys) >= 2:
        for i in range(len(ys) - 1):
            for j in range(len(xs) - 1):
                box = (
                    ys[i] + lw + pad,
                    ys[i + 1] - pad,
                    xs[j] + lw + pad,
                    xs[j + 1] - pad,
                )
                _fill_cell(canvas, rng, config, style, box)
        keep_h = rng.random(len(ys)) < style.separator_visibility_prob
        keep_v = rng.random(len(xs)) < style.separator_visibility_prob
        _draw_dividers(canvas, g, lw, keep_h, keep_v)
    return RasterImage(canvas)


# --- resizing ----------------------------------------------------------------

@lru_cache(maxsize=16)
def _axis_weights(src_len: int, side: int, target: int):
    """Overlap weights mapping `side` padded source pixels onto `target` cells.

    Returns a sparse (target x src_len) matrix restricted to the real axis,
    plus each target cell's coverage fraction of the real axis; the remaining
    fraction is white padding.
    """
    scale = side / target
    rows, cols, vals = [], [], []
    for k in range(target):
        lo = k * scale
        hi = (k + 1) * scale
        p0 = int(np.floor(lo))
        p1 = min(int(np.ceil(hi)), src_len)
        for p in range(p0, p1):
            overlap = min(hi, p + 1) - max(lo, p)
            if overlap > 0:
                rows.append(k)
                cols.append(p)
                vals.append(overlap / scale)
    weights = sparse.csr_matrix(
        (vals, (rows, cols)), shape=(target, src_len), dtype=np.float64
    )
    coverage = np.asarray(weights.sum(axis=1)).ravel()
    return weights, coverage


def resize(img: RasterImage, target: int = 256) -> RasterImage:
    """Exact area-average downscale, padding with white on the right and bottom
    to a square before scaling so aspect is preserved."""
    side = max(img.width, img.height)
    wy, cy = _axis_weights(img.height, side, target)
    wx, cx = _axis_weights(img.width, side, target)
    real = wy @ img.pixels @ wx.T
    padding = 1.0 - np.outer(cy, cx)
    return RasterImage(np.clip(real + padding, 0.0, 1.0))


def model_scale(page: PageSpec) -> float:
    """Page pixels per model pixel along both axes (square padding)."""
    return max(page.width, page.height) / page.model_resolution


def model_to_page(coord: float, page: PageSpec) -> float:
    """Map a model-resolution coordinate back to page coordinates, using the
    pixel-center convention of the area-average resize."""
    s = model_scale(page)
    return (coord + 0.5) * s - 0.5


def page_to_model(coord: float, page: PageSpec) -> float:
    s = model_scale(page)
    return (coord + 0.5) / s - 0.5


def render_skeleton_resized(
    g: TableGenotype, page: PageSpec | None = None, line_width: int = 1
) -> RasterImage:
    """Skeleton rendered straight at model resolution.

    Agrees with resize(render_skeleton(g)) to floating point: a skeleton is a
    union of axis-aligned lines, so its ink mask decomposes into outer products
    of per-axis indicator vectors and the area average can skip the page-size
    canvas entirely. This is the hot path of candidate evaluation.
    """
    page = page or PageSpec()
    target = page.model_resolution
    xs, ys = divider_positions(g)
    if len(xs) < 2 or len(ys) < 2:
        return RasterImage.blank(target, target)
    side = max(page.width, page.height)
    wx, _ = _axis_weights(page.width, side, target)
    wy, _ = _axis_weights(page.height, side, target)

    vx = np.zeros(page.width)
    bx = np.zeros(page.width)
    for x in xs:
        vx[max(x, 0) : min(x + line_width, page.width)] = 1.0
    bx[max(xs[0], 0) : min(xs[-1] + line_width, page.width)] = 1.0
    vy = np.zeros(page.height)
    by = np.zeros(page.height)
    for y in ys:
        vy[max(y, 0) : min(y + line_width, page.height)] = 1.0
    by[max(ys[0], 0) : min(ys[-1] + line_width, page.height)] = 1.0

    ax_v, ax_b = wx @ vx, wx @ bx
    ay_v, ay_b = wy @ vy, wy @ by
    # ink = horizontal lines + vertical lines - double-counted crossings
    black = np.outer(ay_v, ax_b) + np.outer(ay_b, ax_v) - np.outer(ay_v, ax_v)
    return RasterImage(np.clip(1.0 - black, 0.0, 1.0))


# --- PNG io ------------------------------------------------------------------

def to_png_bytes(img: RasterImage) -> bytes:
    arr = np.rint(img.pixels * 255.0).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(arr, mode="L").save(buf, format="PNG")
    return buf.getvalue()


def save_png(path, img: RasterImage) -> None:
    atomic_write_bytes(path, to_png_bytes(img))


def load_png(path) -> RasterImage:
    try:
        with Image.open(path) as im:
            if im.mode != "L":
                raise ImageFormatError(
                    f"{path}: expected 8-bit grayscale PNG, got mode {im.mode!r}"
                )
            arr = np.asarray(im, dtype=np.float64) / 255.0
    except FileNotFoundError:
        raise
    except ImageFormatError:
        raise
    except Exception as exc:
        raise ImageFormatError(f"{path}: cannot read image ({exc})") from exc
    return RasterImage(arr)
