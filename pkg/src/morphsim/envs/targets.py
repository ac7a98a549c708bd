"""Shape-matching target bitmaps on the 64 x 64 observation lattice.

Bitmaps use the observation orientation: ``bitmap[i, j]`` is the pixel at
x-index i, y-index j (y grows upward). The bundled PNGs store the same data
in image orientation (row 0 at the top); the loader converts back.
"""

from __future__ import annotations

from importlib import resources

import numpy as np
from PIL import Image, ImageDraw

from ..errors import ConfigError

RESOLUTION = 64
_CACHE: dict[str, np.ndarray] = {}


def _polygon_bitmap(points) -> np.ndarray:
    img = Image.new("1", (RESOLUTION, RESOLUTION), 0)
    draw = ImageDraw.Draw(img)
    # array (i, j) with y up -> image (col=i, row=63-j)
    draw.polygon([(i, RESOLUTION - 1 - j) for i, j in points], fill=1)
    arr = np.array(img, dtype=bool)
    return arr[::-1, :].T


def _rects_bitmap(rects) -> np.ndarray:
    bm = np.zeros((RESOLUTION, RESOLUTION), dtype=bool)
    for (x0, y0, x1, y1) in rects:
        bm[x0 : x1 + 1, y0 : y1 + 1] = True
    return bm


def _star() -> np.ndarray:
    cx = cy = RESOLUTION // 2
    outer, inner = 13.0, 5.5
    pts = []
    for k in range(10):
        r = outer if k % 2 == 0 else inner
        ang = np.pi / 2 + k * np.pi / 5
        pts.append((cx + r * np.cos(ang), cy + r * np.sin(ang)))
    return _polygon_bitmap(pts)


def _disc() -> np.ndarray:
    c = RESOLUTION / 2
    ii, jj = np.meshgrid(np.arange(RESOLUTION), np.arange(RESOLUTION), indexing="ij")
    return (ii + 0.5 - c) ** 2 + (jj + 0.5 - c) ** 2 <= 7.7**2


def _square() -> np.ndarray:
    return _rects_bitmap([(25, 25, 38, 38)])


def _letter_t() -> np.ndarray:
    return _rects_bitmap([(23, 37, 40, 41), (29, 21, 34, 41)])


def _letter_l() -> np.ndarray:
    return _rects_bitmap([(26, 22, 30, 42), (26, 22, 39, 26)])


def _letter_i() -> np.ndarray:
    return _rects_bitmap([(29, 21, 34, 42), (25, 21, 38, 24), (25, 39, 38, 42)])


BUILTIN = {
    "star": _star,
    "disc": _disc,
    "square": _square,
    "letter_t": _letter_t,
    "letter_l": _letter_l,
    "letter_i": _letter_i,
}


def generate(name: str) -> np.ndarray:
    if name not in BUILTIN:
        raise ConfigError(f"unknown target bitmap {name!r}; options: {sorted(BUILTIN)}")
    return BUILTIN[name]()


def bitmap_to_png_array(bitmap: np.ndarray) -> np.ndarray:
    """Observation-oriented bool bitmap -> uint8 image rows (top row first)."""
    return (bitmap.T[::-1, :] * np.uint8(255))


def png_array_to_bitmap(img: np.ndarray) -> np.ndarray:
    return (img[::-1, :].T > 127)


def load(name: str) -> np.ndarray:
    """Load a bundled target bitmap PNG (falls back to the generator)."""
    if name in _CACHE:
        return _CACHE[name]
    ref = resources.files("morphsim.envs").joinpath(f"targets/{name}.png")
    try:
        with ref.open("rb") as fh:
            bitmap = png_array_to_bitmap(np.array(Image.open(fh).convert("L")))
    except FileNotFoundError:
        bitmap = generate(name)
    _CACHE[name] = bitmap
    return bitmap
