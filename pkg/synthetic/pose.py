"""Procedural stick figure: 14 joints driven by a bounded kinematic random walk."""
import logging
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from errors import DataError

logger = logging.getLogger("Synthetic")

JOINTS = (
    "head", "neck",
    "r_shoulder", "r_elbow", "r_wrist",
    "l_shoulder", "l_elbow", "l_wrist",
    "r_hip", "r_knee", "r_ankle",
    "l_hip", "l_knee", "l_ankle",
)
J = {name: i for i, name in enumerate(JOINTS)}

BONES: Tuple[Tuple[int, int], ...] = (
    (J["head"], J["neck"]),
    (J["neck"], J["r_shoulder"]),
    (J["r_shoulder"], J["r_elbow"]),
    (J["r_elbow"], J["r_wrist"]),
    (J["neck"], J["l_shoulder"]),
    (J["l_shoulder"], J["l_elbow"]),
    (J["l_elbow"], J["l_wrist"]),
    (J["neck"], J["r_hip"]),
    (J["r_hip"], J["r_knee"]),
    (J["r_knee"], J["r_ankle"]),
    (J["neck"], J["l_hip"]),
    (J["l_hip"], J["l_knee"]),
    (J["l_knee"], J["l_ankle"]),
)

# Segment lengths at scale 1, in scene units.
SEGMENTS = {
    "head": 0.10,
    "shoulder": 0.07,
    "torso": 0.22,
    "hip": 0.05,
    "upper_arm": 0.12,
    "forearm": 0.11,
    "thigh": 0.16,
    "shin": 0.16,
}

# Angle state: torso tilt, head, then per limb a root angle and a relative bend.
ANGLES = ("torso", "head", "r_upper", "r_fore", "l_upper", "l_fore",
          "r_thigh", "r_shin", "l_thigh", "l_shin")
ANGLE_LIMITS = np.array([
    (-0.30, 0.30),
    (np.pi - 0.35, np.pi + 0.35),
    (-2.60, -0.10),
    (-1.20, 1.20),
    (0.10, 2.60),
    (-1.20, 1.20),
    (-0.60, 0.05),
    (-0.80, 0.80),
    (-0.05, 0.60),
    (-0.80, 0.80),
])
NEUTRAL_ANGLES = np.array([0.0, np.pi, -0.6, -0.2, 0.6, 0.2, -0.15, 0.05, 0.15, -0.05])
NEUTRAL_ROOT = np.array([0.5, 0.25])

MAX_STEP = 0.05
MAX_ANGLE_SPEED = 0.02
MAX_ROOT_SPEED = 0.006


def _direction(theta):
    # angle 0 points down the image (+y)
    return np.array([np.sin(theta), np.cos(theta)])


def forward_kinematics(root: np.ndarray, angles: np.ndarray, scale: float = 1.0) -> np.ndarray:
    """Joint positions (14, 2) from the neck position and the angle state."""
    seg = {name: length * scale for name, length in SEGMENTS.items()}
    torso, head, r_up, r_fo, l_up, l_fo, r_th, r_sh, l_th, l_sh = angles
    down = _direction(torso)
    across = np.array([down[1], -down[0]])

    joints = np.empty((len(JOINTS), 2))
    neck = np.asarray(root, dtype=np.float64)
    joints[J["neck"]] = neck
    joints[J["head"]] = neck + seg["head"] * _direction(torso + head)

    joints[J["r_shoulder"]] = neck - seg["shoulder"] * across
    joints[J["r_elbow"]] = joints[J["r_shoulder"]] + seg["upper_arm"] * _direction(torso + r_up)
    joints[J["r_wrist"]] = joints[J["r_elbow"]] + seg["forearm"] * _direction(torso + r_up + r_fo)
    joints[J["l_shoulder"]] = neck + seg["shoulder"] * across
    joints[J["l_elbow"]] = joints[J["l_shoulder"]] + seg["upper_arm"] * _direction(torso + l_up)
    joints[J["l_wrist"]] = joints[J["l_elbow"]] + seg["forearm"] * _direction(torso + l_up + l_fo)

    pelvis = neck + seg["torso"] * down
    joints[J["r_hip"]] = pelvis - seg["hip"] * across
    joints[J["r_knee"]] = joints[J["r_hip"]] + seg["thigh"] * _direction(torso + r_th)
    joints[J["r_ankle"]] = joints[J["r_knee"]] + seg["shin"] * _direction(torso + r_th + r_sh)
    joints[J["l_hip"]] = pelvis + seg["hip"] * across
    joints[J["l_knee"]] = joints[J["l_hip"]] + seg["thigh"] * _direction(torso + l_th)
    joints[J["l_ankle"]] = joints[J["l_knee"]] + seg["shin"] * _direction(torso + l_th + l_sh)
    return joints


@dataclass(frozen=True, eq=False)
class Pose:
    """Joint positions in normalised scene coordinates, x to the right and y down."""
    joints: np.ndarray

    def __post_init__(self):
        joints = np.array(self.joints, dtype=np.float64)
        if joints.shape != (len(JOINTS), 2):
            raise DataError(f"pose needs {len(JOINTS)} (x, y) joints, got shape {joints.shape}")
        if not np.all(np.isfinite(joints)) or joints.min() < 0.0 or joints.max() > 1.0:
            raise DataError("pose joints must lie in the unit square")
        joints.setflags(write=False)
        object.__setattr__(self, "joints", joints)

    @classmethod
    def neutral(cls, scale: float = 1.0) -> "Pose":
        """Upright figure with arms spread and legs apart, neck at the upper centre."""
        return cls(forward_kinematics(NEUTRAL_ROOT, NEUTRAL_ANGLES, scale))

    def __getitem__(self, name: str) -> np.ndarray:
        return self.joints[J[name]]

    def __eq__(self, other):
        if not isinstance(other, Pose):
            return NotImplemented
        return np.array_equal(self.joints, other.joints)

    def centroid(self) -> np.ndarray:
        return self.joints.mean(axis=0)

    def limb_spread(self) -> float:
        """Mean distance of wrists and ankles from the centroid."""
        ends = self.joints[[J["r_wrist"], J["l_wrist"], J["r_ankle"], J["l_ankle"]]]
        return float(np.linalg.norm(ends - self.centroid(), axis=1).mean())

    def translated(self, dx: float, dy: float = 0.0) -> "Pose":
        return Pose(self.joints + np.array([dx, dy]))

    def interpolate(self, other: "Pose", u: float) -> "Pose":
        return Pose(np.clip((1.0 - u) * self.joints + u * other.joints, 0.0, 1.0))


def _valid(joints: np.ndarray) -> bool:
    return joints.min() >= 0.0 and joints.max() <= 1.0


def pose_trajectory(seed, T: int) -> List[Pose]:
    """Deterministic smooth pose sequence of length T.

    Angles follow clipped AR(1) velocities inside joint limits and the neck drifts slowly.
    A step that would leave the unit square or move any joint by more than MAX_STEP
    per axis is shortened, and dropped entirely if halving does not help.
    """
    if T < 1:
        raise DataError(f"trajectory length must be >= 1, got {T}")
    rng = np.random.default_rng(seed)
    scale = rng.uniform(0.8, 1.0)

    root = NEUTRAL_ROOT + rng.uniform(-0.05, 0.05, size=2)
    angles = np.clip(NEUTRAL_ANGLES + rng.normal(0.0, 0.15, size=len(ANGLES)),
                     ANGLE_LIMITS[:, 0], ANGLE_LIMITS[:, 1])
    joints = forward_kinematics(root, angles, scale)
    if not _valid(joints):
        root, angles = NEUTRAL_ROOT.copy(), NEUTRAL_ANGLES.copy()
        joints = forward_kinematics(root, angles, scale)

    angle_vel = np.zeros(len(ANGLES))
    root_vel = np.zeros(2)
    poses = [Pose(joints)]

    for _ in range(T - 1):
        angle_vel = np.clip(0.85 * angle_vel + rng.normal(0.0, 0.008, size=len(ANGLES)),
                            -MAX_ANGLE_SPEED, MAX_ANGLE_SPEED)
        root_vel = np.clip(0.9 * root_vel + rng.normal(0.0, 0.002, size=2),
                           -MAX_ROOT_SPEED, MAX_ROOT_SPEED)

        target_angles = angles + angle_vel
        hit = (target_angles < ANGLE_LIMITS[:, 0]) | (target_angles > ANGLE_LIMITS[:, 1])
        angle_vel[hit] = -angle_vel[hit]
        target_angles = np.clip(target_angles, ANGLE_LIMITS[:, 0], ANGLE_LIMITS[:, 1])
        target_root = root + root_vel

        step = 1.0
        for _ in range(6):
            cand_root = root + step * (target_root - root)
            cand_angles = angles + step * (target_angles - angles)
            cand = forward_kinematics(cand_root, cand_angles, scale)
            if _valid(cand) and np.abs(cand - joints).max() <= MAX_STEP:
                root, angles, joints = cand_root, cand_angles, cand
                break
            # bounce off the scene border
            root_vel = -root_vel
            step *= 0.5
        poses.append(Pose(joints))
    return poses
