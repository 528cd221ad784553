"""Schematic top-down observation rendering.

Two orthographic views share one horizontal position mapping; the third-person
view mirrors x about the image midline, so the physical right arm shows up on
the image left. meters_per_pixel controls only how large an object is drawn:
the third-person camera sits further away, so its glyphs are smaller.
"""
from __future__ import annotations

import io
from dataclasses import dataclass

from PIL import Image, ImageDraw

from .world import ARMS, SceneState

# pixels per meter for positions; shared by both views so that the views stay
# pixel-for-pixel mirror images of each other
POSITION_SCALE = 600.0

# world point projected to the image center
VIEW_CENTER = (0.0, -0.075)

RGB = {
    "red": (200, 40, 40),
    "green": (40, 160, 60),
    "blue": (50, 80, 210),
    "yellow": (220, 200, 40),
    "black": (25, 25, 25),
    "white": (240, 240, 240),
    "gray": (130, 130, 130),
    "brown": (140, 90, 50),
    "orange": (230, 140, 40),
}

_TABLE_BOUNDS = (-0.45, -0.30, 0.45, 0.15)  # x_min, y_min, x_max, y_max


@dataclass(frozen=True)
class ViewSpec:
    kind: str  # "ego" | "third_person"
    width: int = 640
    height: int = 480
    meters_per_pixel: float = 0.002

    def __post_init__(self):
        assert self.kind in ("ego", "third_person")


EGO_VIEW = ViewSpec("ego", meters_per_pixel=0.002)
THIRD_PERSON_VIEW = ViewSpec("third_person", meters_per_pixel=0.003)


def project(view: ViewSpec, x: float, y: float) -> tuple[float, float]:
    """World xy to pixel coordinates for the given view."""
    cx, cy = VIEW_CENTER
    dx = (x - cx) * POSITION_SCALE
    px = view.width / 2.0 + (dx if view.kind == "ego" else -dx)
    py = view.height / 2.0 - (y - cy) * POSITION_SCALE
    return px, py


def _rect(view: ViewSpec, x: float, y: float, hx: float, hy: float):
    px, py = project(view, x, y)
    rx = max(2.0, hx / view.meters_per_pixel)
    ry = max(2.0, hy / view.meters_per_pixel)
    return [px - rx, py - ry, px + rx, py + ry]


def render_view(state: SceneState, view: ViewSpec) -> Image.Image:
    img = Image.new("RGB", (view.width, view.height), (60, 60, 70))
    draw = ImageDraw.Draw(img)

    x0, y0 = project(view, _TABLE_BOUNDS[0], _TABLE_BOUNDS[3])
    x1, y1 = project(view, _TABLE_BOUNDS[2], _TABLE_BOUNDS[1])
    left, right = sorted((x0, x1))
    top, bottom = sorted((y0, y1))
    draw.rectangle([left, top, right, bottom], fill=(180, 160, 130), outline=(90, 80, 60), width=2)

    # draw lower objects first so stacked objects appear on top
    for o in sorted(state.objects, key=lambda o: (o.bottom_z, o.id)):
        p = o.pose.position
        color = RGB.get(o.color, RGB["gray"])
        box = _rect(view, p[0], p[1], o.half_extents[0], o.half_extents[1])
        draw.rectangle(box, fill=color, outline=(10, 10, 10))
        draw.text((box[0], box[3] + 1), o.id, fill=(15, 15, 15))

    for tag in ("left", "right"):
        a = state.arms[tag]
        p = a.pose.position
        px, py = project(view, p[0], p[1])
        r = max(3.0, 0.02 / view.meters_per_pixel)
        closed = a.gripper < 0.5
        if closed:
            draw.ellipse([px - r, py - r, px + r, py + r], fill=(250, 250, 250), outline=(0, 0, 0))
        else:
            draw.ellipse([px - r, py - r, px + r, py + r], outline=(250, 250, 250), width=2)
        draw.text((px + r + 2, py - r), tag[0].upper(), fill=(250, 250, 250))

    # base markers anchor the viewer's notion of left and right
    for tag in ("left", "right"):
        bx, by, _ = ARMS[tag].base_origin.position
        px, py = project(view, bx, by)
        draw.text((px - 4, py), f"{tag} base", fill=(220, 220, 220))
    return img


def render_png(state: SceneState, view: ViewSpec) -> bytes:
    buf = io.BytesIO()
    render_view(state, view).save(buf, format="PNG")
    return buf.getvalue()
