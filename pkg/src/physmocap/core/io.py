"""Versioned JSON file formats for poses, motions and floors.

Every file carries {"format_version": 1, "kind": "<schema name>"}. Floats are
written with Python's shortest round-trip repr, so save/load is bit-exact for
finite values; non-finite values are rejected on both sides. Contact and
trajectory files live next to their types (contact.sequence, physopt.trajectory)
and reuse the helpers here.
"""
from __future__ import annotations

import json

import numpy as np

from .skeleton import MassSegment, SkeletonModel
from .types import FloorPlane, PoseSequence, JointAngleMotion

FORMAT_VERSION = 1


class SchemaError(ValueError):
    """Raised when a file does not match its documented schema."""


def check_finite(arr, field):
    arr = np.asarray(arr, dtype=float)
    if not np.all(np.isfinite(arr)):
        bad = np.argwhere(~np.isfinite(arr))[0]
        raise SchemaError(f"non-finite value in {field} at index {tuple(bad)}")
    return arr


def write_json(path, payload):
    with open(path, "w") as f:
        json.dump(payload, f, indent=1)
        f.write("\n")


def read_json(path, kind):
    with open(path) as f:
        try:
            raw = json.load(f)
        except json.JSONDecodeError as e:
            raise SchemaError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}") from e
    if not isinstance(raw, dict):
        raise SchemaError(f"{path}: top level must be an object")
    got_kind = raw.get("kind")
    if got_kind != kind:
        raise SchemaError(f"{path}: kind is {got_kind!r}, expected {kind!r}")
    version = raw.get("format_version")
    if version != FORMAT_VERSION:
        raise SchemaError(
            f"{path}: format_version {version!r} not supported (expected {FORMAT_VERSION})")
    return raw


def need(raw, field, path=""):
    if field not in raw:
        where = f"{path}.{field}" if path else field
        raise SchemaError(f"missing field {where!r}")
    return raw[field]


def _array(raw, field, shape, path=""):
    arr = np.asarray(need(raw, field, path), dtype=float)
    where = f"{path}.{field}" if path else field
    if arr.shape != tuple(shape):
        raise SchemaError(f"{where}: shape {arr.shape}, expected {tuple(shape)}")
    return check_finite(arr, where)


def save_pose_sequence(seq, path):
    check_finite(seq.joints2d, "joints2d")
    check_finite(seq.conf, "conf")
    check_finite(seq.joints3d, "joints3d")
    write_json(path, {
        "format_version": FORMAT_VERSION,
        "kind": "pose_sequence",
        "fps": seq.fps,
        "focal": seq.focal,
        "image_size": list(seq.image_size),
        "joint_names": list(seq.joint_names),
        "joints2d": seq.joints2d.tolist(),
        "conf": seq.conf.tolist(),
        "joints3d": seq.joints3d.tolist(),
    })


def load_pose_sequence(path):
    raw = read_json(path, "pose_sequence")
    names = tuple(need(raw, "joint_names"))
    T = len(need(raw, "conf"))
    J = len(names)
    return PoseSequence(
        joint_names=names,
        fps=float(need(raw, "fps")),
        joints2d=_array(raw, "joints2d", (T, J, 2)),
        conf=_array(raw, "conf", (T, J)),
        joints3d=_array(raw, "joints3d", (T, J, 3)),
        focal=float(need(raw, "focal")),
        image_size=tuple(need(raw, "image_size")),
    )


def _skeleton_payload(skel):
    return {
        "joint_names": list(skel.joint_names),
        "parents": list(skel.parents),
        "bone_dirs": skel.bone_dirs.tolist(),
        "bone_lengths": skel.bone_lengths.tolist(),
        "mass_total": skel.mass_total,
        "segments": [
            {"name": s.name, "mass_fraction": s.mass_fraction, "proximal": s.proximal,
             "distal": s.distal, "com_ratio": s.com_ratio}
            for s in skel.segments
        ],
        "foot_joints": [skel.joint_names[i] for i in skel.foot_joint_ids],
        "hip_joints": [skel.joint_names[i] for i in skel.hip_joint_ids],
        "l_foot": skel.l_foot,
        "l_leg": skel.l_leg,
    }


def _skeleton_from_payload(raw, path="skeleton"):
    names = tuple(need(raw, "joint_names", path))
    J = len(names)
    ids = {n: i for i, n in enumerate(names)}
    segs = tuple(
        MassSegment(need(s, "name", f"{path}.segments[{i}]"),
                    float(need(s, "mass_fraction", f"{path}.segments[{i}]")),
                    need(s, "proximal", f"{path}.segments[{i}]"),
                    need(s, "distal", f"{path}.segments[{i}]"),
                    float(need(s, "com_ratio", f"{path}.segments[{i}]")))
        for i, s in enumerate(need(raw, "segments", path))
    )
    return SkeletonModel(
        joint_names=names,
        parents=tuple(int(p) for p in need(raw, "parents", path)),
        bone_dirs=_array(raw, "bone_dirs", (J, 3), path),
        bone_lengths=_array(raw, "bone_lengths", (J,), path),
        mass_total=float(need(raw, "mass_total", path)),
        segments=segs,
        foot_joint_ids=tuple(ids[n] for n in need(raw, "foot_joints", path)),
        hip_joint_ids=tuple(ids[n] for n in need(raw, "hip_joints", path)),
        l_foot=float(need(raw, "l_foot", path)),
        l_leg=float(need(raw, "l_leg", path)),
    )


def save_motion(motion, path):
    check_finite(motion.root_pos, "root_pos")
    check_finite(motion.joint_angles, "joint_angles")
    write_json(path, {
        "format_version": FORMAT_VERSION,
        "kind": "motion",
        "fps": motion.fps,
        "skeleton": _skeleton_payload(motion.skeleton),
        "root_pos": motion.root_pos.tolist(),
        "joint_angles": motion.joint_angles.tolist(),
    })


def load_motion(path):
    raw = read_json(path, "motion")
    skel = _skeleton_from_payload(need(raw, "skeleton"))
    T = len(need(raw, "root_pos"))
    return JointAngleMotion(
        skeleton=skel,
        fps=float(need(raw, "fps")),
        root_pos=_array(raw, "root_pos", (T, 3)),
        joint_angles=_array(raw, "joint_angles", (T, skel.n_joints, 3)),
    )


def save_floor(floor, path):
    write_json(path, {
        "format_version": FORMAT_VERSION,
        "kind": "floor_plane",
        "normal": check_finite(floor.normal, "normal").tolist(),
        "point": check_finite(floor.point, "point").tolist(),
        "tangents": check_finite(floor.tangents, "tangents").tolist(),
    })


def load_floor(path):
    raw = read_json(path, "floor_plane")
    return FloorPlane(
        normal=_array(raw, "normal", (3,)),
        point=_array(raw, "point", (3,)),
        tangents=_array(raw, "tangents", (2, 3)),
    )
