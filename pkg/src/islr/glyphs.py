"""Stroke font and rasterizer for the synthetic 36-class sign stand-in.

Each class name is drawn as a thick single-piece stroke figure on a black
226 x 226 canvas, so the threshold + largest-component mask keeps the whole
glyph. Geometry lives in a unit box (x right, y down) and is mapped onto a
90 x 120 pixel cell at the canvas centre.
"""
from __future__ import annotations

import math

import numpy as np

CANVAS = 226
CELL_W, CELL_H = 90.0, 120.0
STROKE = 14.0


def _arc(cx, cy, rx, ry, a0, a1, n=24):
    """Points on an ellipse arc; angles in degrees, 90 points down."""
    t = np.deg2rad(np.linspace(a0, a1, n))
    return list(zip(cx + rx * np.cos(t), cy + ry * np.sin(t)))


def _ellipse(cx, cy, rx, ry, n=40):
    return _arc(cx, cy, rx, ry, 0, 360, n)


# Each glyph is a list of polylines.
STROKES: dict[str, list[list[tuple[float, float]]]] = {
    "0": [_ellipse(.5, .5, .33, .5), [(.27, .85), (.73, .15)]],
    "1": [[(.2, .25), (.55, 0), (.55, 1)], [(.25, 1), (.85, 1)]],
    "2": [_arc(.5, .3, .42, .3, 180, 400) + [(.05, 1), (.95, 1)]],
    "3": [_arc(.5, .27, .4, .27, 200, 450), _arc(.5, .76, .45, .24, 270, 520)],
    "4": [[(.7, 1), (.7, 0), (.05, .7), (.95, .7)]],
    "5": [[(.9, 0), (.2, 0), (.2, .45)] + _arc(.5, .68, .42, .32, 225, 500)],
    "6": [_arc(.5, .5, .4, .5, 300, 150), _ellipse(.5, .7, .38, .3)],
    "7": [[(.05, 0), (.95, 0), (.35, 1)]],
    "8": [_ellipse(.5, .25, .33, .25), _ellipse(.5, .73, .42, .27)],
    "9": [_ellipse(.5, .3, .38, .3), [(.88, .3), (.75, 1)]],
    "A": [[(0, 1), (.5, 0), (1, 1)], [(.25, .55), (.75, .55)]],
    "B": [[(.1, 0), (.1, 1)],
          [(.1, 0), (.55, 0)] + _arc(.55, .25, .25, .25, 270, 450) + [(.1, .5)],
          [(.1, .5), (.6, .5)] + _arc(.6, .75, .25, .25, 270, 450) + [(.1, 1)]],
    "C": [_arc(.55, .5, .45, .5, 45, 315)],
    "D": [[(.1, 0), (.1, 1)], [(.1, 0), (.4, 0)] + _arc(.4, .5, .5, .5, 270, 450) + [(.1, 1)]],
    "E": [[(.9, 0), (.1, 0), (.1, 1), (.9, 1)], [(.1, .5), (.7, .5)]],
    "F": [[(.9, 0), (.1, 0), (.1, 1)], [(.1, .5), (.7, .5)]],
    "G": [_arc(.55, .5, .45, .5, 300, 45) + [(.87, .55), (.55, .55)]],
    "H": [[(.1, 0), (.1, 1)], [(.9, 0), (.9, 1)], [(.1, .5), (.9, .5)]],
    "I": [[(.5, 0), (.5, 1)], [(.2, 0), (.8, 0)], [(.2, 1), (.8, 1)]],
    "J": [[(.3, 0), (.9, 0)], [(.7, 0), (.7, .7)] + _arc(.42, .7, .28, .28, 0, 160)],
    "K": [[(.1, 0), (.1, 1)], [(.9, 0), (.1, .55)], [(.35, .4), (.9, 1)]],
    "L": [[(.1, 0), (.1, 1), (.9, 1)]],
    "M": [[(.05, 1), (.1, 0), (.5, .6), (.9, 0), (.95, 1)]],
    "N": [[(.1, 1), (.1, 0), (.9, 1), (.9, 0)]],
    "O": [_ellipse(.5, .5, .5, .5)],
    "P": [[(.1, 1), (.1, 0), (.5, 0)] + _arc(.5, .27, .27, .27, 270, 450) + [(.1, .54)]],
    "Q": [_ellipse(.5, .5, .5, .5), [(.55, .65), (1, 1.05)]],
    "R": [[(.1, 1), (.1, 0), (.5, 0)] + _arc(.5, .27, .27, .27, 270, 450) + [(.1, .54)],
          [(.45, .54), (.9, 1)]],
    "S": [_arc(.5, .27, .38, .27, 330, 90), _arc(.5, .75, .4, .25, 270, 510)],
    "T": [[(0, 0), (1, 0)], [(.5, 0), (.5, 1)]],
    "U": [[(.1, 0), (.1, .6)] + _arc(.5, .6, .4, .4, 180, 0) + [(.9, 0)]],
    "V": [[(0, 0), (.5, 1), (1, 0)]],
    "W": [[(0, 0), (.25, 1), (.5, .35), (.75, 1), (1, 0)]],
    "X": [[(0, 0), (1, 1)], [(1, 0), (0, 1)]],
    "Y": [[(0, 0), (.5, .5), (1, 0)], [(.5, .5), (.5, 1)]],
    "Z": [[(0, 0), (1, 0), (0, 1), (1, 1)]],
}


def _segments(name, rotation_deg, scale, shift):
    """Glyph polylines transformed to canvas pixel coordinates, as (a, b) pairs."""
    theta = math.radians(rotation_deg)
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    cx = cy = (CANVAS - 1) / 2.0
    segs = []
    for line in STROKES[name]:
        pts = np.asarray(line, dtype=np.float64)
        x = (pts[:, 0] - 0.5) * CELL_W * scale
        y = (pts[:, 1] - 0.5) * CELL_H * scale
        px = cx + shift[0] + cos_t * x - sin_t * y
        py = cy + shift[1] + sin_t * x + cos_t * y
        p = np.stack([px, py], axis=1)
        segs.extend(zip(p[:-1], p[1:]))
    return segs


def render_glyph(name: str, rotation: float = 0.0, scale: float = 1.0,
                 shift: tuple[float, float] = (0.0, 0.0)) -> np.ndarray:
    """Rasterize ``name`` as a 226 x 226 binary image (255 on the strokes).

    A pixel centre is on when its distance to any stroke segment is at most
    half the (scaled) stroke width.
    """
    if name not in STROKES:
        raise KeyError(f"no glyph for class {name!r}")
    img = np.zeros((CANVAS, CANVAS), dtype=bool)
    half = STROKE * scale / 2.0
    for a, b in _segments(name, rotation, scale, shift):
        x0 = max(int(math.floor(min(a[0], b[0]) - half)), 0)
        x1 = min(int(math.ceil(max(a[0], b[0]) + half)) + 1, CANVAS)
        y0 = max(int(math.floor(min(a[1], b[1]) - half)), 0)
        y1 = min(int(math.ceil(max(a[1], b[1]) + half)) + 1, CANVAS)
        if x0 >= x1 or y0 >= y1:
            continue
        ys, xs = np.mgrid[y0:y1, x0:x1]
        d = b - a
        ll = float(d @ d)
        if ll == 0.0:
            t = np.zeros(xs.shape)
        else:
            t = np.clip(((xs - a[0]) * d[0] + (ys - a[1]) * d[1]) / ll, 0.0, 1.0)
        dist2 = (xs - a[0] - t * d[0]) ** 2 + (ys - a[1] - t * d[1]) ** 2
        img[y0:y1, x0:x1] |= dist2 <= half * half
    return np.where(img, 255, 0).astype(np.uint8)


def random_glyph(name: str, rng: np.random.Generator) -> np.ndarray:
    """Render with seeded jitter: rotation +-15 deg, shift +-10 px, scale 0.8-1.2."""
    rotation = rng.uniform(-15.0, 15.0)
    shift = (rng.uniform(-10.0, 10.0), rng.uniform(-10.0, 10.0))
    scale = rng.uniform(0.8, 1.2)
    return render_glyph(name, rotation, scale, shift)
