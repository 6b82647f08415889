"""Latent table structure: genotypes, generator configurations, random sampling.

A table is encoded as a genotype holding the table cardinality, the upper left
corner, and per-row / per-column pixel sizes. Slots beyond the actual number of
rows or columns carry size zero, so a fixed-length genotype can describe any
table up to an a-priori maximum cardinality.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields, replace

import numpy as np

from .fileio import read_json, write_json

PAGE_WIDTH = 595
PAGE_HEIGHT = 842
MODEL_RESOLUTION = 256

# Slot count covering every built-in preset; tables never need more than 10x10 here.
DEFAULT_MAX_CARDINALITY = 10

SAMPLE_MAX_ATTEMPTS = 100

ALIGNMENTS = ("left", "center", "right")


class InfeasibleConfigError(ValueError):
    """A generator configuration cannot produce a page-fitting table."""


@dataclass(frozen=True)
class PageSpec:
    """Page frame the tables live on, plus the square model resolution."""

    width: int = PAGE_WIDTH
    height: int = PAGE_HEIGHT
    model_resolution: int = MODEL_RESOLUTION

    def __post_init__(self):
        if self.width < 1 or self.height < 1 or self.model_resolution < 1:
            raise ValueError("page dimensions must be positive")


@dataclass(frozen=True)
class TableGenotype:
    """Numeric encoding of a table structure.

    max_rows / max_cols are the slot counts n and m; row_heights and col_widths
    always have exactly that many entries. A zero entry encodes an absent row
    or column, so the effective cardinality is the count of positive entries.
    All geometry is integer pixels at page scale.
    """

    max_rows: int
    max_cols: int
    origin_x: int
    origin_y: int
    row_heights: tuple
    col_widths: tuple

    def __post_init__(self):
        object.__setattr__(self, "row_heights", tuple(int(h) for h in self.row_heights))
        object.__setattr__(self, "col_widths", tuple(int(w) for w in self.col_widths))
        if len(self.row_heights) != self.max_rows:
            raise ValueError(
                f"row_heights has {len(self.row_heights)} entries, expected {self.max_rows}"
            )
        if len(self.col_widths) != self.max_cols:
            raise ValueError(
                f"col_widths has {len(self.col_widths)} entries, expected {self.max_cols}"
            )
        if self.origin_x < 0 or self.origin_y < 0:
            raise ValueError("origin must be non-negative")
        if any(h < 0 for h in self.row_heights) or any(w < 0 for w in self.col_widths):
            raise ValueError("row heights and column widths must be non-negative")

    @property
    def effective_rows(self) -> int:
        return sum(1 for h in self.row_heights if h > 0)

    @property
    def effective_cols(self) -> int:
        return sum(1 for w in self.col_widths if w > 0)

    @property
    def total_height(self) -> int:
        return sum(self.row_heights)

    @property
    def total_width(self) -> int:
        return sum(self.col_widths)

    def fits_page(self, page: PageSpec, margin: int = 1) -> bool:
        """True when the table, including a closing border of `margin` pixels,
        lands inside the page frame."""
        return (
            self.origin_x + self.total_width <= page.width - margin
            and self.origin_y + self.total_height <= page.height - margin
        )


def canonicalize(g: TableGenotype) -> TableGenotype:
    """Normal form for structure comparison: zero-size slots removed and the
    slot counts set to the effective cardinality. Divider positions are
    unchanged because zero entries never contribute to them."""
    heights = tuple(h for h in g.row_heights if h > 0)
    widths = tuple(w for w in g.col_widths if w > 0)
    if heights == g.row_heights and widths == g.col_widths:
        return g
    return TableGenotype(
        max_rows=len(heights),
        max_cols=len(widths),
        origin_x=g.origin_x,
        origin_y=g.origin_y,
        row_heights=heights,
        col_widths=widths,
    )


def divider_positions(g: TableGenotype):
    """Absolute divider coordinates: prefix sums of positive sizes from the
    origin. Lengths are effective cols + 1 and effective rows + 1."""
    xs = [g.origin_x]
    for w in g.col_widths:
        if w > 0:
            xs.append(xs[-1] + w)
    ys = [g.origin_y]
    for h in g.row_heights:
        if h > 0:
            ys.append(ys[-1] + h)
    return tuple(xs), tuple(ys)


@dataclass(frozen=True)
class TableConfig:
    """Parameter ranges for the random table generator. Ranges are inclusive."""

    name: str
    rows_range: tuple = (2, 6)
    cols_range: tuple = (2, 6)
    x_offset_range: tuple = (0, 70)
    y_offset_range: tuple = (0, 70)
    row_height_range: tuple = (40, 90)
    col_width_range: tuple = (70, 100)
    word_len_range: tuple = (5, 9)
    words_per_cell_range: tuple = (2, 4)
    font_family: str = "arial"
    font_size: int = 10
    alignment: str = "center"

    def __post_init__(self):
        for field_name in (
            "rows_range",
            "cols_range",
            "x_offset_range",
            "y_offset_range",
            "row_height_range",
            "col_width_range",
            "word_len_range",
            "words_per_cell_range",
        ):
            lo, hi = getattr(self, field_name)
            object.__setattr__(self, field_name, (int(lo), int(hi)))
            if lo > hi:
                raise ValueError(f"{self.name}: {field_name} is empty ({lo} > {hi})")
        if self.alignment not in ALIGNMENTS:
            raise ValueError(f"{self.name}: unknown alignment {self.alignment!r}")
        if self.font_size < 1:
            raise ValueError(f"{self.name}: font_size must be positive")


_BASE = TableConfig(name="base")

PRESETS = {
    "base": _BASE,
    "font_1": replace(_BASE, name="font_1", font_family="new_roman"),
    "font_2": replace(_BASE, name="font_2", font_family="courier"),
    "larger_font_1": replace(_BASE, name="larger_font_1", font_size=14),
    "larger_font_2": replace(_BASE, name="larger_font_2", font_size=18),
    "smaller_font": replace(_BASE, name="smaller_font", font_size=6),
    "skinny_long_cells": replace(
        _BASE,
        name="skinny_long_cells",
        row_height_range=(20, 20),
        col_width_range=(120, 200),
        words_per_cell_range=(3, 7),
    ),
    "short_cells": replace(
        _BASE,
        name="short_cells",
        rows_range=(4, 10),
        cols_range=(4, 10),
        row_height_range=(20, 20),
        col_width_range=(40, 60),
        word_len_range=(1, 4),
        words_per_cell_range=(1, 1),
    ),
    "align_left": replace(_BASE, name="align_left", alignment="left"),
    "align_right": replace(_BASE, name="align_right", alignment="right"),
}


def get_preset(name: str) -> TableConfig:
    try:
        return PRESETS[name]
    except KeyError:
        known = ", ".join(sorted(PRESETS))
        raise ValueError(f"unknown table configuration {name!r} (known: {known})") from None


def _draw(rng, lohi) -> int:
    lo, hi = lohi
    return int(rng.integers(lo, hi + 1))


def sample_genotype(
    config: TableConfig,
    rng_seed,
    *,
    page: PageSpec | None = None,
    max_rows: int = DEFAULT_MAX_CARDINALITY,
    max_cols: int = DEFAULT_MAX_CARDINALITY,
) -> TableGenotype:
    """Draw a genotype with every field uniform over its configured range.

    Draws that do not fit the page are rejected wholesale and redrawn, which
    makes the result uniform over the feasible part of the configuration
    space. rng_seed may be an integer seed or a numpy Generator.
    """
    page = page or PageSpec()
    rng = np.random.default_rng(rng_seed)
    if config.rows_range[1] > max_rows or config.cols_range[1] > max_cols:
        raise InfeasibleConfigError(
            f"{config.name}: cardinality range exceeds the genotype slot count "
            f"({max_rows}x{max_cols})"
        )
    min_w = config.x_offset_range[0] + config.cols_range[0] * config.col_width_range[0]
    min_h = config.y_offset_range[0] + config.rows_range[0] * config.row_height_range[0]
    if min_w > page.width - 1 or min_h > page.height - 1:
        raise InfeasibleConfigError(
            f"{config.name}: minimum table ({min_w}x{min_h} px) cannot fit the page"
        )
    for _ in range(SAMPLE_MAX_ATTEMPTS):
        rows = _draw(rng, config.rows_range)
        cols = _draw(rng, config.cols_range)
        x0 = _draw(rng, config.x_offset_range)
        y0 = _draw(rng, config.y_offset_range)
        heights = [_draw(rng, config.row_height_range) for _ in range(rows)]
        widths = [_draw(rng, config.col_width_range) for _ in range(cols)]
        g = TableGenotype(
            max_rows=max_rows,
            max_cols=max_cols,
            origin_x=x0,
            origin_y=y0,
            row_heights=tuple(heights) + (0,) * (max_rows - rows),
            col_widths=tuple(widths) + (0,) * (max_cols - cols),
        )
        if g.fits_page(page):
            return g
    raise InfeasibleConfigError(
        f"{config.name}: no page-fitting table after {SAMPLE_MAX_ATTEMPTS} draws"
    )


# --- serialization -----------------------------------------------------------

def genotype_to_json(g: TableGenotype) -> dict:
    return {
        "n": g.max_rows,
        "m": g.max_cols,
        "x0": g.origin_x,
        "y0": g.origin_y,
        "row_heights": list(g.row_heights),
        "col_widths": list(g.col_widths),
    }


def genotype_from_json(obj: dict) -> TableGenotype:
    expected = {"n", "m", "x0", "y0", "row_heights", "col_widths"}
    unknown = set(obj) - expected
    if unknown:
        raise ValueError(f"unknown genotype keys: {sorted(unknown)}")
    missing = expected - set(obj)
    if missing:
        raise ValueError(f"missing genotype keys: {sorted(missing)}")
    return TableGenotype(
        max_rows=int(obj["n"]),
        max_cols=int(obj["m"]),
        origin_x=int(obj["x0"]),
        origin_y=int(obj["y0"]),
        row_heights=tuple(obj["row_heights"]),
        col_widths=tuple(obj["col_widths"]),
    )


def save_genotype(path, g: TableGenotype) -> None:
    write_json(path, genotype_to_json(g))


def load_genotype(path) -> TableGenotype:
    return genotype_from_json(read_json(path))


_CONFIG_KEYS = {
    "rows": "rows_range",
    "cols": "cols_range",
    "x_offset": "x_offset_range",
    "y_offset": "y_offset_range",
    "row_height": "row_height_range",
    "col_width": "col_width_range",
    "word_length": "word_len_range",
    "words_per_cell": "words_per_cell_range",
    "font_family": "font_family",
    "font_size": "font_size",
    "alignment": "alignment",
}


def config_to_json(config: TableConfig) -> dict:
    out = {}
    for key, field_name in _CONFIG_KEYS.items():
        value = getattr(config, field_name)
        out[key] = list(value) if isinstance(value, tuple) else value
    return out


def config_from_json(name: str, obj: dict) -> TableConfig:
    unknown = set(obj) - set(_CONFIG_KEYS)
    if unknown:
        raise ValueError(f"config {name!r}: unknown keys {sorted(unknown)}")
    kwargs = {"name": name}
    for key, field_name in _CONFIG_KEYS.items():
        if key not in obj:
            continue
        value = obj[key]
        kwargs[field_name] = tuple(value) if field_name.endswith("_range") else value
    return TableConfig(**kwargs)


def load_configs(path) -> dict:
    """Load a {name: parameter object} preset file."""
    raw = read_json(path)
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: expected an object keyed by configuration name")
    return {name: config_from_json(name, obj) for name, obj in raw.items()}
