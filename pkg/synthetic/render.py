import numpy as np

from errors import InvalidConfigValue

from .pose import BONES, J, Pose

# Capsule radii as a fraction of frame height.
BONE_RADIUS = (0.045,
               0.035, 0.025, 0.022,
               0.035, 0.025, 0.022,
               0.060, 0.032, 0.028,
               0.060, 0.032, 0.028)
HEAD_RADIUS = 0.065
MIN_RADIUS_PX = 0.75

# RGB in [0, 1]; warm tones on the right side of the body, cool tones on the left.
BONE_COLORS = np.array([
    (1.00, 1.00, 1.00),  # head-neck
    (1.00, 0.55, 0.00),  # neck-r_shoulder
    (1.00, 0.85, 0.00),  # r_upper_arm
    (1.00, 0.00, 0.00),  # r_forearm
    (0.00, 0.85, 0.35),  # neck-l_shoulder
    (0.00, 0.75, 0.75),  # l_upper_arm
    (0.00, 0.20, 1.00),  # l_forearm
    (0.85, 0.35, 0.35),  # neck-r_hip
    (0.95, 0.00, 0.60),  # r_thigh
    (0.60, 0.20, 0.00),  # r_shin
    (0.35, 0.85, 0.35),  # neck-l_hip
    (0.45, 0.00, 0.95),  # l_thigh
    (0.00, 0.45, 0.25),  # l_shin
])


def _pixel_grid(H: int, W: int):
    ys, xs = np.mgrid[0:H, 0:W]
    return xs + 0.5, ys + 0.5


def _segment_distance(px, py, a, b):
    """Distance from every pixel centre to the segment a-b, in pixels."""
    d = b - a
    length2 = float(d @ d)
    if length2 == 0.0:
        return np.hypot(px - a[0], py - a[1])
    t = np.clip(((px - a[0]) * d[0] + (py - a[1]) * d[1]) / length2, 0.0, 1.0)
    return np.hypot(px - (a[0] + t * d[0]), py - (a[1] + t * d[1]))


def _to_pixels(pose: Pose, H: int, W: int) -> np.ndarray:
    return pose.joints * np.array([W, H], dtype=np.float64)


def render_silhouette(pose: Pose, H: int, W: int) -> np.ndarray:
    """Filled union of bone capsules and a head disc, +1 inside and -1 outside. Shape (1, H, W)."""
    px, py = _pixel_grid(H, W)
    pts = _to_pixels(pose, H, W)
    inside = np.zeros((H, W), dtype=bool)
    for (i, j), radius in zip(BONES, BONE_RADIUS):
        r = max(radius * H, MIN_RADIUS_PX)
        inside |= _segment_distance(px, py, pts[i], pts[j]) <= r
    head = pts[J["head"]]
    inside |= np.hypot(px - head[0], py - head[1]) <= max(HEAD_RADIUS * H, MIN_RADIUS_PX)
    return np.where(inside, 1.0, -1.0)[None]


def render_skeleton(pose: Pose, H: int, W: int) -> np.ndarray:
    """Anti-aliased coloured bones on a -1 background. Shape (3, H, W)."""
    px, py = _pixel_grid(H, W)
    pts = _to_pixels(pose, H, W)
    half_width = max(1.0, 0.02 * H)
    frame = np.full((3, H, W), -1.0)
    for (i, j), color in zip(BONES, BONE_COLORS):
        dist = _segment_distance(px, py, pts[i], pts[j])
        alpha = np.clip(half_width + 0.5 - dist, 0.0, 1.0)
        target = 2.0 * color - 1.0
        frame = frame * (1.0 - alpha) + target[:, None, None] * alpha
    return np.clip(frame, -1.0, 1.0)


def render(pose: Pose, H: int, W: int, kind: str) -> np.ndarray:
    if kind == "silhouette":
        return render_silhouette(pose, H, W)
    if kind == "skeleton":
        return render_skeleton(pose, H, W)
    raise InvalidConfigValue(f"unknown clip kind: {kind}")
