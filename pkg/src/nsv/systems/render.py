"""Rasterizer: each arm is a filled capsule, each bob a disc, on white.

Palette is fixed so the extractor needs no learning: arm 1 red, arm 2 blue,
bob green.  Rasterization is 2x2 supersampled; every subsample evaluates a
smooth signed-distance coverage (smoothstep over a sub-pixel band), which
keeps pixel intensities differentiable in the state and the extracted
angles steady between consecutive frames.
"""

from __future__ import annotations

import math

import numpy as np

from .specs import SystemSpec

RED = np.array([1.0, 0.0, 0.0])
BLUE = np.array([0.0, 0.0, 1.0])
GREEN = np.array([0.0, 1.0, 0.0])

SUPERSAMPLE = 2


class RenderRejected(Exception):
    """An object does not fit the canvas for this state."""


def unit_from_angle(theta: float) -> np.ndarray:
    """World direction for a pendulum angle (0 points straight down)."""
    return np.array([math.sin(theta), -math.cos(theta)])


def scene_primitives(spec: SystemSpec, s: np.ndarray) -> list:
    """Painter-ordered primitives: (kind, geometry, radius, color).

    kind 'capsule': geometry = (endpoint_a, endpoint_b); kind 'disc':
    geometry = center.  Coordinates are world units, y up, pivot at origin.
    """
    geo = spec.render
    origin = np.zeros(2)
    if spec.name == "circular_motion":
        bob = spec.radius * unit_from_angle(s[0])
        return [("capsule", (origin, bob), geo.arm1_halfwidth, RED),
                ("disc", bob, geo.bob_radius, GREEN)]
    if spec.name == "single_pendulum":
        bob = spec.l1 * unit_from_angle(s[0])
        return [("capsule", (origin, bob), geo.arm1_halfwidth, RED),
                ("disc", bob, geo.bob_radius, GREEN)]
    if spec.name == "rigid_double_pendulum":
        p1 = spec.l1 * unit_from_angle(s[0])
        p2 = p1 + spec.l2 * unit_from_angle(s[1])
        return [("capsule", (origin, p1), geo.arm1_halfwidth, RED),
                ("capsule", (p1, p2), geo.arm2_halfwidth, BLUE),
                ("disc", p2, geo.bob_radius, GREEN)]
    p1 = spec.l1 * unit_from_angle(s[0])
    p2 = p1 + (spec.spring_rest + s[2]) * unit_from_angle(s[1])
    return [("capsule", (origin, p1), geo.arm1_halfwidth, RED),
            ("capsule", (p1, p2), geo.arm2_halfwidth, BLUE),
            ("disc", p2, geo.bob_radius, GREEN)]


def _check_in_frame(spec: SystemSpec, prims: list) -> None:
    he = spec.render.half_extent
    for idx, (kind, geom, radius, _) in enumerate(prims):
        points = geom if kind == "capsule" else (geom,)
        for p in points:
            if np.max(np.abs(p)) + radius > he:
                raise RenderRejected(
                    f"object {idx} ({kind}) extends outside the canvas "
                    f"(|{p.round(3)}| + {radius} > half extent {he})")


def coverage_field(kind, geom, radius, px, py, aa):
    """Smooth ink coverage of one primitive at arbitrary world points.

    Signed-distance based with a smoothstep edge of width ``aa``; the same
    profile the rasterizer uses, so extraction-side models of a primitive
    match rendered frames.
    """
    if kind == "disc":
        d = np.hypot(px - geom[0], py - geom[1])
    else:
        a, b = geom
        ab = b - a
        denom = float(ab @ ab)
        if denom < 1e-30:
            d = np.hypot(px - a[0], py - a[1])
        else:
            t = ((px - a[0]) * ab[0] + (py - a[1]) * ab[1]) / denom
            t = np.clip(t, 0.0, 1.0)
            d = np.hypot(px - (a[0] + t * ab[0]), py - (a[1] + t * ab[1]))
    t = np.clip((radius - d) / aa + 0.5, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)  # smoothstep


def render(spec: SystemSpec, s: np.ndarray, size: int) -> np.ndarray:
    """Rasterize a state to an (size, size, 3) float image in [0, 1]."""
    if size < 32:
        raise ValueError("frame size must be >= 32")
    s = np.asarray(s, dtype=np.float64)
    prims = scene_primitives(spec, s)
    _check_in_frame(spec, prims)

    he = spec.render.half_extent
    n = size * SUPERSAMPLE
    step = 2.0 * he / n
    coords = (np.arange(n) + 0.5) * step - he
    px = coords[None, :]            # world x along columns
    py = (-coords)[:, None]         # world y up, rows go down
    aa = 0.75 * (2.0 * he / size)   # anti-alias band, in world units

    img = np.ones((n, n, 3))
    for kind, geom, radius, color in prims:
        alpha = coverage_field(kind, geom, radius, px, py, aa)
        img = img * (1.0 - alpha[..., None]) + color * alpha[..., None]
    f = SUPERSAMPLE
    img = img.reshape(size, f, size, f, 3).mean(axis=(1, 3))
    return img


def render_pair(spec: SystemSpec, s: np.ndarray, s_next: np.ndarray,
                size: int) -> np.ndarray:
    """Two consecutive frames stacked along the channel axis (H, W, 6)."""
    return np.concatenate([render(spec, s, size), render(spec, s_next, size)], axis=2)
