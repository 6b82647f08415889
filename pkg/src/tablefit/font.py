"""Embedded fixed bitmap glyphs for pseudo-text rendering.

The glyph set covers lowercase a..z on a 5x7 grid. Families vary only in the
glyph box aspect and letter spacing: what matters downstream is the texture
the text produces, not typeface fidelity.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

GLYPH_ROWS = 7
GLYPH_COLS = 5

_RAW_GLYPHS = {
    "a": (".....", ".....", ".###.", "....#", ".####", "#...#", ".####"),
    "b": ("#....", "#....", "####.", "#...#", "#...#", "#...#", "####."),
    "c": (".....", ".....", ".####", "#....", "#....", "#....", ".####"),
    "d": ("....#", "....#", ".####", "#...#", "#...#", "#...#", ".####"),
    "e": (".....", ".....", ".###.", "#...#", "#####", "#....", ".###."),
    "f": ("..##.", ".#...", "####.", ".#...", ".#...", ".#...", ".#..."),
    "g": (".....", ".####", "#...#", "#...#", ".####", "....#", ".###."),
    "h": ("#....", "#....", "####.", "#...#", "#...#", "#...#", "#...#"),
    "i": ("..#..", ".....", ".##..", "..#..", "..#..", "..#..", ".###."),
    "j": ("...#.", ".....", "...#.", "...#.", "...#.", "#..#.", ".##.."),
    "k": ("#....", "#....", "#..#.", "#.#..", "##...", "#.#..", "#..#."),
    "l": (".##..", "..#..", "..#..", "..#..", "..#..", "..#..", ".###."),
    "m": (".....", ".....", "##.#.", "#.#.#", "#.#.#", "#.#.#", "#.#.#"),
    "n": (".....", ".....", "####.", "#...#", "#...#", "#...#", "#...#"),
    "o": (".....", ".....", ".###.", "#...#", "#...#", "#...#", ".###."),
    "p": (".....", "####.", "#...#", "#...#", "####.", "#....", "#...."),
    "q": (".....", ".####", "#...#", "#...#", ".####", "....#", "....#"),
    "r": (".....", ".....", "#.##.", "##...", "#....", "#....", "#...."),
    "s": (".....", ".....", ".####", "#....", ".###.", "....#", "####."),
    "t": (".#...", ".#...", "####.", ".#...", ".#...", ".#...", "..##."),
    "u": (".....", ".....", "#...#", "#...#", "#...#", "#...#", ".####"),
    "v": (".....", ".....", "#...#", "#...#", "#...#", ".#.#.", "..#.."),
    "w": (".....", ".....", "#.#.#", "#.#.#", "#.#.#", "#.#.#", ".#.#."),
    "x": (".....", ".....", "#...#", ".#.#.", "..#..", ".#.#.", "#...#"),
    "y": (".....", ".....", "#...#", "#...#", ".####", "....#", ".###."),
    "z": (".....", ".....", "#####", "...#.", "..#..", ".#...", "#####"),
}

_SOURCE = {
    ch: np.array([[cell == "#" for cell in row] for row in rows], dtype=bool)
    for ch, rows in _RAW_GLYPHS.items()
}

ALPHABET = "abcdefghijklmnopqrstuvwxyz"


@dataclass(frozen=True)
class FontMetrics:
    name: str
    width_ratio: float  # glyph box width as a fraction of glyph height
    letter_spacing: int


FAMILIES = {
    "arial": FontMetrics("arial", 5 / 7, 1),
    "new_roman": FontMetrics("new_roman", 4 / 7, 1),
    "courier": FontMetrics("courier", 6 / 7, 2),
}


def get_family(name: str) -> FontMetrics:
    try:
        return FAMILIES[name]
    except KeyError:
        known = ", ".join(sorted(FAMILIES))
        raise ValueError(f"unknown font family {name!r} (known: {known})") from None


def glyph_box(family: FontMetrics, size: int):
    """Pixel dimensions of one glyph at the given font size."""
    height = max(1, int(size))
    width = max(1, round(height * family.width_ratio))
    return height, width


@lru_cache(maxsize=4096)
def _glyph(ch: str, height: int, width: int):
    src = _SOURCE[ch]
    rows = (np.arange(height) * GLYPH_ROWS) // height
    cols = (np.arange(width) * GLYPH_COLS) // width
    out = src[np.ix_(rows, cols)]
    out.flags.writeable = False
    return out


def render_word(word: str, family: FontMetrics, size: int):
    """Boolean ink mask for a word; True marks a text pixel."""
    height, width = glyph_box(family, size)
    total = len(word) * width + max(0, len(word) - 1) * family.letter_spacing
    mask = np.zeros((height, max(total, 1)), dtype=bool)
    x = 0
    for ch in word:
        if ch in _SOURCE:
            mask[:, x : x + width] = _glyph(ch, height, width)
        x += width + family.letter_spacing
    return mask
