"""Skeleton layout and mass model.

The default skeleton has 28 joints: the 25 OpenPose-style body and foot
keypoints plus 3 spine joints between pelvis and neck. The spine joints have
no 2D detections. Rest-pose bone offsets are given in the shared zero-angle
frame (z up, character facing +x, arms along +-y).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

JOINT_NAMES = (
    "pelvis",
    "spine_lower",
    "spine_middle",
    "spine_upper",
    "neck",
    "nose",
    "left_eye",
    "right_eye",
    "left_ear",
    "right_ear",
    "left_shoulder",
    "left_elbow",
    "left_wrist",
    "right_shoulder",
    "right_elbow",
    "right_wrist",
    "left_hip",
    "left_knee",
    "left_ankle",
    "left_heel",
    "left_toe",
    "left_toe_end",
    "right_hip",
    "right_knee",
    "right_ankle",
    "right_heel",
    "right_toe",
    "right_toe_end",
)

PARENTS = (
    -1,  # pelvis
    0,   # spine_lower
    1,   # spine_middle
    2,   # spine_upper
    3,   # neck
    4,   # nose
    5,   # left_eye
    5,   # right_eye
    6,   # left_ear
    7,   # right_ear
    4,   # left_shoulder
    10,  # left_elbow
    11,  # left_wrist
    4,   # right_shoulder
    13,  # right_elbow
    14,  # right_wrist
    0,   # left_hip
    16,  # left_knee
    17,  # left_ankle
    18,  # left_heel
    18,  # left_toe
    20,  # left_toe_end
    0,   # right_hip
    22,  # right_knee
    23,  # right_ankle
    24,  # right_heel
    24,  # right_toe
    26,  # right_toe_end
)

# joints without any 2D detection (dropped from reprojection terms)
SPINE_JOINTS = ("spine_lower", "spine_middle", "spine_upper")

# the four contact joints, in the order used for contact labels everywhere
CONTACT_JOINT_NAMES = ("left_toe", "left_heel", "right_toe", "right_heel")

# lower-body joints feeding the contact classifier features
LOWER_BODY_JOINT_NAMES = (
    "pelvis",
    "left_hip", "right_hip",
    "left_knee", "right_knee",
    "left_ankle", "right_ankle",
    "left_heel", "right_heel",
    "left_toe", "right_toe",
    "left_toe_end", "right_toe_end",
)

# rest-pose bone vector (unit direction, length in m) per joint, parent frame
_REST_BONES = {
    "pelvis": ((0.0, 0.0, 0.0), 0.0),
    "spine_lower": ((0.0, 0.0, 1.0), 0.07),
    "spine_middle": ((0.0, 0.0, 1.0), 0.11),
    "spine_upper": ((0.0, 0.0, 1.0), 0.11),
    "neck": ((0.0, 0.0, 1.0), 0.16),
    "nose": ((0.6, 0.0, 0.8), 0.13),
    "left_eye": ((-0.4472, 0.8944, 0.0), 0.055),
    "right_eye": ((-0.4472, -0.8944, 0.0), 0.055),
    "left_ear": ((-0.8, 0.6, 0.0), 0.07),
    "right_ear": ((-0.8, -0.6, 0.0), 0.07),
    "left_shoulder": ((0.0, 1.0, 0.0), 0.18),
    "left_elbow": ((0.0, 1.0, 0.0), 0.28),
    "left_wrist": ((0.0, 1.0, 0.0), 0.25),
    "right_shoulder": ((0.0, -1.0, 0.0), 0.18),
    "right_elbow": ((0.0, -1.0, 0.0), 0.28),
    "right_wrist": ((0.0, -1.0, 0.0), 0.25),
    "left_hip": ((0.0, 1.0, 0.0), 0.09),
    "left_knee": ((0.0, 0.0, -1.0), 0.40),
    "left_ankle": ((0.0, 0.0, -1.0), 0.40),
    # heel = (-0.035, 0, -0.070), toe drop = 0.070: a zero-pitch ankle puts
    # heel and toe at exactly the same height, so flat feet sit on the floor
    "left_heel": ((-0.4472135954999579, 0.0, -0.8944271909999159), 0.07826237921249264),
    "left_toe": ((0.8660254037844386, 0.0, -0.5), 0.14),
    "left_toe_end": ((0.5547, 0.8321, 0.0), 0.05),
    "right_hip": ((0.0, -1.0, 0.0), 0.09),
    "right_knee": ((0.0, 0.0, -1.0), 0.40),
    "right_ankle": ((0.0, 0.0, -1.0), 0.40),
    "right_heel": ((-0.4472135954999579, 0.0, -0.8944271909999159), 0.07826237921249264),
    "right_toe": ((0.8660254037844386, 0.0, -0.5), 0.14),
    "right_toe_end": ((0.5547, -0.8321, 0.0), 0.05),
}


@dataclass(frozen=True)
class MassSegment:
    """One point mass: fraction of total mass at proximal + ratio*(distal - proximal)."""
    name: str
    mass_fraction: float
    proximal: str
    distal: str
    com_ratio: float


def load_default_segments():
    """Segment table shipped with the package."""
    raw = json.loads(
        resources.files("physmocap.data").joinpath("segment_masses.json").read_text()
    )
    return tuple(
        MassSegment(s["name"], s["mass_fraction"], s["proximal"], s["distal"], s["com_ratio"])
        for s in raw["segments"]
    )


@dataclass(frozen=True, eq=False)
class SkeletonModel:
    """Kinematic tree plus the mass model.

    bone_dirs[j] is the unit rest direction of the bone parent(j) -> j in the
    parent's frame (all frames coincide in the zero-angle pose); the root row
    is zero. bone_lengths are in meters. Joint angles everywhere are intrinsic
    Z-Y-X Euler.
    """
    joint_names: tuple = JOINT_NAMES
    parents: tuple = PARENTS
    bone_dirs: np.ndarray = None    # J x 3
    bone_lengths: np.ndarray = None  # J
    mass_total: float = 73.0
    segments: tuple = None
    foot_joint_ids: tuple = None    # (left_toe, left_heel, right_toe, right_heel)
    hip_joint_ids: tuple = None     # (left_hip, right_hip)
    l_foot: float = None
    l_leg: float = None
    _name_to_id: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_name_to_id",
                           {n: i for i, n in enumerate(self.joint_names)})
        if self.bone_dirs is None or self.bone_lengths is None:
            dirs = np.zeros((len(self.joint_names), 3))
            lens = np.zeros(len(self.joint_names))
            for j, name in enumerate(self.joint_names):
                d, l = _REST_BONES[name]
                dirs[j] = d
                lens[j] = l
            object.__setattr__(self, "bone_dirs", dirs)
            object.__setattr__(self, "bone_lengths", lens)
        dirs = np.asarray(self.bone_dirs, dtype=float).copy()
        norms = np.linalg.norm(dirs, axis=1)
        nonzero = norms > 1e-12
        dirs[nonzero] /= norms[nonzero, None]   # exactly unit so FK lengths are exact
        object.__setattr__(self, "bone_dirs", dirs)
        object.__setattr__(self, "bone_lengths", np.asarray(self.bone_lengths, dtype=float))
        if self.segments is None:
            object.__setattr__(self, "segments", load_default_segments())
        if self.foot_joint_ids is None:
            object.__setattr__(self, "foot_joint_ids",
                               tuple(self._name_to_id[n] for n in CONTACT_JOINT_NAMES))
        if self.hip_joint_ids is None:
            object.__setattr__(self, "hip_joint_ids",
                               (self._name_to_id["left_hip"], self._name_to_id["right_hip"]))
        if self.l_foot is None:
            rest = self.rest_positions()
            toe, heel = self.foot_joint_ids[0], self.foot_joint_ids[1]
            object.__setattr__(self, "l_foot", float(np.linalg.norm(rest[toe] - rest[heel])))
        if self.l_leg is None:
            # kinematic maximum: stretched hip -> knee -> ankle -> toe chain
            chain = ("left_knee", "left_ankle", "left_toe")
            object.__setattr__(self, "l_leg",
                               float(sum(self.bone_lengths[self._name_to_id[n]] for n in chain)))
        validate_skeleton(self)

    def joint_id(self, name):
        return self._name_to_id[name]

    @property
    def n_joints(self):
        return len(self.joint_names)

    def rest_positions(self):
        """Joint positions in the zero-angle pose, root at the origin. J x 3."""
        pos = np.zeros((self.n_joints, 3))
        for j in range(1, self.n_joints):
            pos[j] = pos[self.parents[j]] + self.bone_dirs[j] * self.bone_lengths[j]
        return pos

    def joints_with_2d(self):
        """Indices of joints that carry 2D detections (everything but the spine)."""
        skip = {self._name_to_id[n] for n in SPINE_JOINTS if n in self._name_to_id}
        return tuple(j for j in range(self.n_joints) if j not in skip)

    def lower_body_ids(self):
        return tuple(self._name_to_id[n] for n in LOWER_BODY_JOINT_NAMES)

    def with_bone_lengths(self, lengths):
        return SkeletonModel(
            joint_names=self.joint_names, parents=self.parents,
            bone_dirs=self.bone_dirs.copy(), bone_lengths=np.asarray(lengths, dtype=float),
            mass_total=self.mass_total, segments=self.segments,
            foot_joint_ids=self.foot_joint_ids, hip_joint_ids=self.hip_joint_ids,
            l_foot=None, l_leg=None,
        )

    def scaled(self, factor):
        """Uniformly scaled copy (bone lengths only; mass kept)."""
        return self.with_bone_lengths(self.bone_lengths * float(factor))


def validate_skeleton(skel):
    J = len(skel.joint_names)
    if len(skel.parents) != J:
        raise ValueError(f"parents has {len(skel.parents)} entries for {J} joints")
    if skel.parents[0] != -1:
        raise ValueError(f"joint 0 must be the root, got parent {skel.parents[0]}")
    for j in range(1, J):
        p = skel.parents[j]
        if not 0 <= p < j:
            raise ValueError(
                f"joint {j} ({skel.joint_names[j]}) has parent {p}; "
                "parents must precede children")
    if skel.bone_dirs.shape != (J, 3):
        raise ValueError(f"bone_dirs shape {skel.bone_dirs.shape}, expected {(J, 3)}")
    if skel.bone_lengths.shape != (J,):
        raise ValueError(f"bone_lengths shape {skel.bone_lengths.shape}, expected {(J,)}")
    if np.any(skel.bone_lengths < 0):
        raise ValueError("negative bone length")
    norms = np.linalg.norm(skel.bone_dirs[1:], axis=1)
    if np.any(np.abs(norms - 1.0) > 1e-3):
        bad = 1 + int(np.argmax(np.abs(norms - 1.0)))
        raise ValueError(
            f"bone_dirs[{bad}] ({skel.joint_names[bad]}) has norm {norms[bad - 1]:.6f}, "
            "expected unit vectors")
    total = sum(s.mass_fraction for s in skel.segments)
    if abs(total - 1.0) > 1e-6:
        raise ValueError(f"segment mass fractions sum to {total:.8f}, expected 1")
    for s in skel.segments:
        for joint in (s.proximal, s.distal):
            if joint not in skel._name_to_id:
                raise ValueError(f"segment {s.name} references unknown joint {joint!r}")
    if skel.mass_total <= 0:
        raise ValueError(f"mass_total must be positive, got {skel.mass_total}")


def default_skeleton(mass_total=73.0):
    return SkeletonModel(mass_total=mass_total)
