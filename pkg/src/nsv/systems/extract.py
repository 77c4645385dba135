"""Physical-variable extraction from rendered frames (threshold + moments).

Pipeline per frame: threshold color channels into per-object masks, keep
the largest 8-connected component per object, then fit each arm's axis
from coverage-weighted second moments.  Moments use the smooth coverage
field on a dilated component rather than the binary mask, so the fitted
axis varies smoothly between consecutive frames and finite-difference
velocities stay clean.

Arm 1 pivots at the frame center, which is known exactly, so its angle
comes from a second-moment fit about the pivot.  Where arm 2 overlaps
arm 1 (fold-back states) the overlap band and its mirror image across the
candidate axis are both excluded before refitting; symmetric removal
cancels the tilt bias that one-sided occlusion would introduce.  Arm 2 is
drawn on top and is never occluded (except by its bob, symmetrically), so
a plain centered fit suffices; its lower-arm extent gives the spring
elongation for the elastic system.  Velocities come from the two frames
of a pair by wrapped finite differences.

REJECT is a valid outcome, not an error: blob too small, axis residual
too large, or missing object.  Thresholds are fixed: channel cut 0.5,
minimum blob 0.1% of frame pixels, maximum axis-fit RMS residual 2 px
(arms; bobs are discs, so only their pixel count is checked).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .render import BLUE as render_blue
from .render import GREEN as render_green
from .render import RED as render_red
from .render import SUPERSAMPLE as render_supersample
from .render import coverage_field
from .dynamics import state_energy
from .specs import PhysicalVariables, SystemSpec, wrap_angle

CHANNEL_THRESHOLD = 0.5
MIN_BLOB_FRACTION = 0.001
MAX_AXIS_RMS_PX = 2.0

_EIGHT_CONNECTED = np.ones((3, 3), dtype=int)


@dataclass
class FrameReading:
    """Angles (rad, wrapped) and spring elongation read from one frame."""

    theta1: float
    theta2: float = None
    z: float = None


@dataclass
class ExtractionResult:
    ok: bool
    variables: PhysicalVariables = None
    reason: str = None

    def __bool__(self):
        return self.ok


def object_masks(frame: np.ndarray) -> dict:
    """Threshold masks for the fixed palette (red arm, blue arm, green bob)."""
    r, g, b = frame[..., 0], frame[..., 1], frame[..., 2]
    t = CHANNEL_THRESHOLD
    return {
        "arm1": (r > t) & (g < t) & (b < t),
        "arm2": (b > t) & (r < t) & (g < t),
        "bob": (g > t) & (r < t) & (b < t),
    }


def _coverage_weights(frame: np.ndarray, obj: str) -> np.ndarray:
    # visible ink coverage over white background: the complement channels
    # carry 1 - alpha.  For the bob (top layer) the complement estimate is
    # also capped by the G channel itself, which is exact over saturated
    # ink below; the min of the two is exact everywhere, including on
    # red/blue anti-aliased boundaries where the complement alone misreads.
    r, g, b = frame[..., 0], frame[..., 1], frame[..., 2]
    if obj == "arm1":
        return 1.0 - np.maximum(g, b)
    if obj == "arm2":
        return 1.0 - np.maximum(r, g)
    return np.minimum(1.0 - np.maximum(r, b), g)


def _largest_component(mask: np.ndarray):
    labels, n = ndimage.label(mask, structure=_EIGHT_CONNECTED)
    if n == 0:
        return None, 0
    counts = np.bincount(labels.ravel())[1:]
    best = int(np.argmax(counts)) + 1
    return labels == best, int(counts[best - 1])


def _significant_components(mask: np.ndarray, speck_floor: int = 3):
    """Union of all components above a speck floor, plus the largest count.

    Occlusion can split an arm into parallel strips; every strip carries
    orientation information, so the fit pools them all.  The returned
    count is the largest single component's, which is what the min-blob
    REJECT test is defined on.
    """
    labels, n = ndimage.label(mask, structure=_EIGHT_CONNECTED)
    if n == 0:
        return None, 0
    counts = np.bincount(labels.ravel())[1:]
    keep = np.flatnonzero(counts >= speck_floor) + 1
    if keep.size == 0:
        return None, int(counts.max())
    return np.isin(labels, keep), int(counts.max())


def _world_coords(shape, half_extent):
    h, w = shape
    wpp = 2.0 * half_extent / w
    xs = (np.arange(w) + 0.5) * wpp - half_extent
    ys = half_extent - (np.arange(h) + 0.5) * wpp
    return np.meshgrid(xs, ys), wpp


@dataclass
class _BlobPoints:
    x: np.ndarray             # world coords and coverage weight of the
    y: np.ndarray             # dilated component's pixels
    w: np.ndarray
    wpp: float

    @classmethod
    def gather(cls, frame, comp, weights, half_extent):
        (gx, gy), wpp = _world_coords(comp.shape, half_extent)
        sel = ndimage.binary_dilation(comp, structure=_EIGHT_CONNECTED, iterations=2)
        return cls(gx[sel], gy[sel], weights[sel], wpp)

    def centroid(self):
        wsum = float(self.w.sum())
        return np.array([float((self.w * self.x).sum() / wsum),
                         float((self.w * self.y).sum() / wsum)])

    def centered_fit(self):
        """(axis, residual_px): principal axis about the centroid."""
        c = self.centroid()
        dx, dy = self.x - c[0], self.y - c[1]
        cov = np.array([[float((self.w * dx * dx).sum()), float((self.w * dx * dy).sum())],
                        [float((self.w * dx * dy).sum()), float((self.w * dy * dy).sum())]])
        cov /= float(self.w.sum())
        evals, evecs = np.linalg.eigh(cov)
        return evecs[:, 1], math.sqrt(max(evals[0], 0.0)) / self.wpp, c


def _pivot_axis(x, y, w) -> np.ndarray:
    """Principal axis of second moments about the origin (the known pivot)."""
    m = np.array([[float((w * x * x).sum()), float((w * x * y).sum())],
                  [float((w * x * y).sum()), float((w * y * y).sum())]])
    return np.linalg.eigh(m)[1][:, 1]


def _segment_distance(px, py, a, b):
    ab = b - a
    denom = float(ab @ ab)
    if denom < 1e-30:
        return np.hypot(px - a[0], py - a[1])
    t = np.clip(((px - a[0]) * ab[0] + (py - a[1]) * ab[1]) / denom, 0.0, 1.0)
    return np.hypot(px - (a[0] + t * ab[0]), py - (a[1] + t * ab[1]))


def _soft_outside(d: np.ndarray, inner: float, width: float) -> np.ndarray:
    # smooth 0 -> 1 ramp from distance `inner` to `inner + width`
    t = np.clip((d - inner) / width, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def _occluder_factor(px, py, occluders, wpp):
    f = np.ones_like(px)
    for kind, geom, radius in occluders:
        if kind == "capsule":
            d = _segment_distance(px, py, geom[0], geom[1])
        else:
            d = np.hypot(px - geom[0], py - geom[1])
        f = f * _soft_outside(d, radius + 1.25 * wpp, 1.5 * wpp)
    return f


def _fit_arm1_axis(pts: _BlobPoints, occluders: list) -> np.ndarray:
    """Axis through the pivot, with symmetric soft exclusion of occluded bands.

    Each occluded band and its mirror image across the candidate axis are
    down-weighted together, so one-sided occlusion cannot tilt the fit;
    smooth (smoothstep) band edges keep the fit differentiable in the
    underlying state.
    """
    axis = _pivot_axis(pts.x, pts.y, pts.w)
    if not occluders:
        return axis
    direct = _occluder_factor(pts.x, pts.y, occluders, pts.wpp)
    for _ in range(3):
        t = pts.x * axis[0] + pts.y * axis[1]
        mx, my = 2 * t * axis[0] - pts.x, 2 * t * axis[1] - pts.y
        mirror = _occluder_factor(mx, my, occluders, pts.wpp)
        w_kept = pts.w * direct * mirror
        if float(w_kept.sum()) < 0.15 * float(pts.w.sum()):
            return axis  # occlusion too severe to symmetrize; keep plain fit
        axis = _pivot_axis(pts.x, pts.y, w_kept)
    return axis


def _angle_of(direction: np.ndarray) -> float:
    # direction (sin theta, -cos theta) -> theta, measured from straight down
    return math.atan2(direction[0], -direction[1])


def _golden_min(f, lo: float, hi: float, iters: int = 22) -> float:
    ratio = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - ratio * (b - a), a + ratio * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - ratio * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + ratio * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


class _TemplateMatcher:
    """Refine arm parameters by matching observed ink against a capsule model.

    The painter composite makes the visible ink of a lower layer equal its
    own coverage times (1 - coverage) of every layer above it; the upper
    layers' coverages are directly observable, so each arm's angle (and
    lower-arm length) can be fit by least squares against a synthesized
    capsule, occlusion handled exactly.  The model capsule is evaluated at
    the rasterizer's own 2x2 subsample positions so the fit is free of
    sub-pixel grid bias.
    """

    def __init__(self, frame, spec):
        self.frame = frame
        self.size = frame.shape[0]
        self.he = spec.render.half_extent
        self.wpp = 2.0 * self.he / self.size
        self.aa = 0.75 * self.wpp
        self.o_arm1 = _coverage_weights(frame, "arm1")
        self.o_arm2 = _coverage_weights(frame, "arm2")
        self.o_bob = _coverage_weights(frame, "bob")
        self.spec = spec
        n = self.size * render_supersample
        step = 2.0 * self.he / n
        coords = (np.arange(n) + 0.5) * step - self.he
        self.sub_x = coords            # world x per subsample column
        self.sub_y = -coords           # world y per subsample row

    def _bbox(self, points, pad):
        pts = np.array(points)
        lo = pts.min(axis=0) - pad
        hi = pts.max(axis=0) + pad
        j0 = max(0, int((lo[0] + self.he) / self.wpp))
        j1 = min(self.size, int(math.ceil((hi[0] + self.he) / self.wpp)) + 1)
        i0 = max(0, int((self.he - hi[1]) / self.wpp))
        i1 = min(self.size, int(math.ceil((self.he - lo[1]) / self.wpp)) + 1)
        return i0, max(i0 + 1, i1), j0, max(j0 + 1, j1)

    def _fit_capsule(self, target, occ, pivot, theta0, length0, halfwidth,
                     window, fit_length):
        f = render_supersample
        sweep = [pivot] + [pivot + L * np.array([math.sin(p), -math.cos(p)])
                           for p in np.linspace(theta0 - window, theta0 + window, 7)
                           for L in ((length0 - 0.1, length0 + 0.1) if fit_length
                                     else (length0,))]
        i0, i1, j0, j1 = self._bbox(sweep, halfwidth + self.aa + 3 * self.wpp)
        tgt = target[i0:i1, j0:j1]
        oc = occ[i0:i1, j0:j1]
        sx = self.sub_x[j0 * f:j1 * f][None, :]
        sy = self.sub_y[i0 * f:i1 * f][:, None]

        def q(phi, length):
            tip = pivot + length * np.array([math.sin(phi), -math.cos(phi)])
            cov = coverage_field("capsule", (pivot, tip), halfwidth, sx, sy, self.aa)
            cov = cov.reshape(i1 - i0, f, j1 - j0, f).mean(axis=(1, 3))
            # weight by the occlusion factor: overlap pixels carry the least
            # reliable ink estimates, so they should steer the fit the least
            r = (tgt - cov * oc) * oc
            return float((r * r).sum())

        theta = _golden_min(lambda p: q(p, length0), theta0 - window, theta0 + window)
        if not fit_length:
            return theta, length0
        length = length0
        for shrink in (1.0, 0.5, 0.25):
            length = _golden_min(lambda L: q(theta, L),
                                 max(length - 0.1 * shrink, 0.05), length + 0.1 * shrink)
            theta = _golden_min(lambda p: q(p, length),
                                theta - 0.5 * shrink * window,
                                theta + 0.5 * shrink * window)
        return theta, length

    def refine_arm1(self, theta0: float, length: float, window: float = 0.12) -> float:
        occ = (1.0 - self.o_arm2) * (1.0 - self.o_bob)
        theta, _ = self._fit_capsule(self.o_arm1, occ, np.zeros(2), theta0, length,
                                     self.spec.render.arm1_halfwidth, window, False)
        return theta

    def refine_arm2(self, pivot, theta0: float, length0: float, fit_length: bool,
                    theta1: float, window: float = 0.12):
        """Full-scene fit of the lower arm against all three channels.

        The model composites the (already fitted) upper arm, the candidate
        blue capsule, and the green bob at the candidate tip, exactly the
        way the rasterizer does; the bob riding on the tip makes its
        position a strong constraint on the angle and length.
        """
        geo = self.spec.render
        f = render_supersample
        sweep = [pivot] + [pivot + L * np.array([math.sin(p), -math.cos(p)])
                           for p in np.linspace(theta0 - window, theta0 + window, 7)
                           for L in ((length0 - 0.1, length0 + 0.1) if fit_length
                                     else (length0,))]
        pad = max(geo.arm2_halfwidth, geo.bob_radius) + self.aa + 3 * self.wpp
        i0, i1, j0, j1 = self._bbox(sweep, pad)
        obs = self.frame[i0:i1, j0:j1, :]
        sx = self.sub_x[j0 * f:j1 * f][None, :]
        sy = self.sub_y[i0 * f:i1 * f][:, None]
        arm1_len = self.spec.radius if self.spec.name == "circular_motion" else self.spec.l1
        tip1 = arm1_len * np.array([math.sin(theta1), -math.cos(theta1)])
        cov1 = coverage_field("capsule", (np.zeros(2), tip1), geo.arm1_halfwidth,
                              sx, sy, self.aa)
        base = np.ones(cov1.shape + (3,))
        base = base * (1.0 - cov1[..., None]) + render_red * cov1[..., None]

        def q(phi, length):
            tip = pivot + length * np.array([math.sin(phi), -math.cos(phi)])
            cov2 = coverage_field("capsule", (pivot, tip), geo.arm2_halfwidth,
                                  sx, sy, self.aa)
            covb = coverage_field("disc", tip, geo.bob_radius, sx, sy, self.aa)
            img = base * (1.0 - cov2[..., None]) + render_blue * cov2[..., None]
            img = img * (1.0 - covb[..., None]) + render_green * covb[..., None]
            ny, nx = i1 - i0, j1 - j0
            img = img.reshape(ny, f, nx, f, 3).mean(axis=(1, 3))
            r = obs - img
            return float((r * r).sum())

        theta = _golden_min(lambda p: q(p, length0), theta0 - window, theta0 + window)
        if not fit_length:
            return theta, length0
        length = length0
        for shrink in (1.0, 0.5, 0.25):
            length = _golden_min(lambda L: q(theta, L),
                                 max(length - 0.1 * shrink, 0.05), length + 0.1 * shrink)
            theta = _golden_min(lambda p: q(p, length),
                                theta - 0.5 * shrink * window,
                                theta + 0.5 * shrink * window)
        return theta, length


def _orient(axis: np.ndarray, centroid: np.ndarray, pivot: np.ndarray) -> np.ndarray:
    return axis if float((centroid - pivot) @ axis) >= 0 else -axis


def read_frame(frame: np.ndarray, spec: SystemSpec):
    """Extract angles (and z) from one frame; returns (FrameReading|None, reason)."""
    masks = object_masks(frame)
    min_count = MIN_BLOB_FRACTION * frame.shape[0] * frame.shape[1]
    he = spec.render.half_extent
    two_arms = spec.name in ("rigid_double_pendulum", "elastic_double_pendulum")
    parts = {}
    for obj in (("arm1", "arm2", "bob") if two_arms else ("arm1", "bob")):
        comp, count = _significant_components(masks[obj])
        if comp is None or count < min_count:
            return None, f"{obj}: component below min blob ({count} px)"
        parts[obj] = comp

    pts1 = _BlobPoints.gather(frame, parts["arm1"], _coverage_weights(frame, "arm1"), he)
    _, residual1, centroid1 = pts1.centered_fit()
    if residual1 > MAX_AXIS_RMS_PX:
        return None, f"arm1: axis residual {residual1:.2f} px"

    occluders = []
    if two_arms:
        pts2 = _BlobPoints.gather(frame, parts["arm2"], _coverage_weights(frame, "arm2"), he)
        axis2, residual2, centroid2 = pts2.centered_fit()
        if residual2 > MAX_AXIS_RMS_PX:
            return None, f"arm2: axis residual {residual2:.2f} px"
        t2 = (pts2.x - centroid2[0]) * axis2[0] + (pts2.y - centroid2[1]) * axis2[1]
        end_a = centroid2 + float(t2.min()) * axis2
        end_b = centroid2 + float(t2.max()) * axis2
        occluders.append(("capsule", (end_a, end_b), spec.render.arm2_halfwidth))
        bob_pts = _BlobPoints.gather(frame, parts["bob"], _coverage_weights(frame, "bob"), he)
        occluders.append(("disc", bob_pts.centroid(), spec.render.bob_radius))

    axis1 = _fit_arm1_axis(pts1, occluders)
    u1 = _orient(axis1, centroid1, np.zeros(2))
    theta1 = _angle_of(u1)
    matcher = _TemplateMatcher(frame, spec)
    arm1_len = spec.radius if spec.name == "circular_motion" else spec.l1
    theta1 = matcher.refine_arm1(theta1, arm1_len)
    if not two_arms:
        return FrameReading(theta1=theta1), None

    pivot2 = spec.l1 * np.array([math.sin(theta1), -math.cos(theta1)])
    u2 = _orient(axis2, centroid2, pivot2)
    theta2 = _angle_of(u2)
    if spec.name == "rigid_double_pendulum":
        theta2, _ = matcher.refine_arm2(pivot2, theta2, spec.l2, fit_length=False, theta1=theta1)
        return FrameReading(theta1=theta1, theta2=theta2), None

    # elastic: initial lower-arm length from the farthest blue pixel along
    # the axis (the bob hides the far end, so add its radius back), then
    # refine angle and length jointly
    t = (pts2.x - pivot2[0]) * u2[0] + (pts2.y - pivot2[1]) * u2[1]
    arm2_len = float(t.max()) + spec.render.bob_radius
    theta2, arm2_len = matcher.refine_arm2(pivot2, theta2, arm2_len, fit_length=True,
                                            theta1=theta1)
    return FrameReading(theta1=theta1, theta2=theta2,
                        z=arm2_len - spec.spring_rest), None


def extract_physical(pair: np.ndarray, spec: SystemSpec, dt: float) -> ExtractionResult:
    """Extract PhysicalVariables from a frame pair, or REJECT.

    Positions come from the first frame; velocities are wrapped finite
    differences across the pair; total energy combines both.
    """
    if pair.ndim != 3 or pair.shape[2] != 6:
        raise ValueError(f"expected an (H, W, 6) frame pair, got {pair.shape}")
    first, reason = read_frame(pair[..., :3], spec)
    if first is None:
        return ExtractionResult(False, reason=f"frame 0: {reason}")
    second, reason = read_frame(pair[..., 3:], spec)
    if second is None:
        return ExtractionResult(False, reason=f"frame 1: {reason}")

    deg = 180.0 / math.pi
    th1 = wrap_angle(first.theta1)
    th1_dot = wrap_angle(second.theta1 - first.theta1) / dt
    if spec.name in ("circular_motion", "single_pendulum"):
        state = np.array([th1, th1_dot])
        return ExtractionResult(True, PhysicalVariables(
            theta1_deg=th1 * deg, theta1_dot_deg_s=th1_dot * deg,
            total_energy_j=state_energy(spec, state)))
    th2 = wrap_angle(first.theta2)
    th2_dot = wrap_angle(second.theta2 - first.theta2) / dt
    if spec.name == "rigid_double_pendulum":
        state = np.array([th1, th2, th1_dot, th2_dot])
        return ExtractionResult(True, PhysicalVariables(
            theta1_deg=th1 * deg, theta2_deg=th2 * deg,
            theta1_dot_deg_s=th1_dot * deg, theta2_dot_deg_s=th2_dot * deg,
            total_energy_j=state_energy(spec, state)))
    z = first.z
    z_dot = (second.z - first.z) / dt
    state = np.array([th1, th2, z, th1_dot, th2_dot, z_dot])
    return ExtractionResult(True, PhysicalVariables(
        theta1_deg=th1 * deg, theta2_deg=th2 * deg, z_m=z,
        theta1_dot_deg_s=th1_dot * deg, theta2_dot_deg_s=th2_dot * deg,
        z_dot_m_s=z_dot, total_energy_j=state_energy(spec, state)))
