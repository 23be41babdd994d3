"""Closed-form synthetic clips: scripted motions, camera simulation, noise.

World frame is z-up with the floor at z = 0; everything the caller sees is
already transformed into the camera frame (x right, y down, z forward).

The vertical scripts (stand / hop / jump) are built to be exactly feasible
for the centroidal physics stage: leg segments carry no mass and the upper
body is frozen, so the center of mass is the root plus a constant offset; the
vertical acceleration is piecewise linear on the physics knot grid, reaches
exactly -g at liftoff and touchdown, and the flight arc is an exact parabola.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..contact.heuristic import heuristic_label
from ..core.kinematics import forward_kinematics, project_perspective, transform_motion
from ..core.skeleton import SPINE_JOINTS, MassSegment, SkeletonModel, default_skeleton
from ..core.types import FloorPlane, JointAngleMotion, PoseSequence
from .profiles import design_stance_accel, sample_pwl_accel, swing_lift, swing_shift
from .rig import ANKLE_DROP, arms_down_angles, solve_leg
from .scripts import MotionScript

GRAVITY = 9.8
KNOT_DT = 0.1   # node grid of the vertical profiles; matches the physics splines

UPPER_BODY_SEGMENTS = (
    MassSegment("head", 0.12, "neck", "nose", 0.7),
    MassSegment("trunk", 0.58, "pelvis", "neck", 0.5),
    MassSegment("left_upper_arm", 0.08, "left_shoulder", "left_elbow", 0.577),
    MassSegment("right_upper_arm", 0.08, "right_shoulder", "right_elbow", 0.577),
    MassSegment("left_forearm", 0.05, "left_elbow", "left_wrist", 0.457),
    MassSegment("right_forearm", 0.05, "right_elbow", "right_wrist", 0.457),
    MassSegment("left_hand", 0.02, "left_wrist", "left_wrist", 0.0),
    MassSegment("right_hand", 0.02, "right_wrist", "right_wrist", 0.0),
)


@dataclass(frozen=True)
class GeneratedClip:
    """One synthetic clip: ground truth, noisy observations, and the floor."""
    script: MotionScript
    seed: int
    motion: JointAngleMotion     # camera frame
    pose: PoseSequence           # noisy detections + 3D estimate, camera frame
    contacts: object             # ContactSequence from the clean motion
    floor: FloorPlane            # camera frame

    @property
    def name(self):
        return f"{self.script.name}_s{self.seed}"


def upper_body_skeleton(skeleton):
    """Copy of the skeleton with all mass in the (frozen) upper body."""
    return SkeletonModel(
        joint_names=skeleton.joint_names, parents=skeleton.parents,
        bone_dirs=skeleton.bone_dirs.copy(), bone_lengths=skeleton.bone_lengths.copy(),
        mass_total=skeleton.mass_total, segments=UPPER_BODY_SEGMENTS,
    )


def _grid_count(value, name):
    n = round(value / KNOT_DT)
    if n < 1 or abs(value - n * KNOT_DT) > 1e-9:
        raise ValueError(f"{name} must be a positive multiple of {KNOT_DT} s, got {value}")
    return n


def _script_params(script, defaults):
    unknown = set(script.params) - set(defaults)
    if unknown:
        raise ValueError(
            f"unknown params for '{script.kind}' script: {sorted(unknown)}")
    merged = dict(defaults)
    merged.update(script.params)
    return merged


def _leg_angles_inplace(angles, skeleton, frame, root, ankle_targets, foot_pitch=0.0):
    """Solve both legs for one frame and write the joint angles."""
    for side, sign in (("left", 1.0), ("right", -1.0)):
        hip = root + np.array([0.0, sign * 0.09, 0.0])
        hip_j = skeleton.joint_id(f"{side}_hip")
        knee_j = skeleton.joint_id(f"{side}_knee")
        ankle_j = skeleton.joint_id(f"{side}_ankle")
        hip_a, knee_a, ankle_a = solve_leg(
            skeleton, side, hip, ankle_targets[side], foot_pitch)
        angles[frame, hip_j] = hip_a
        angles[frame, knee_j] = knee_a
        angles[frame, ankle_j] = ankle_a


def _build_vertical(script, skeleton):
    """stand / hop / jump: still stance, optional crouch-push-flight-land arc."""
    p = _script_params(script, dict(
        root_height=0.82, flight_time=0.0, push_time=0.5, land_time=0.5,
        lead_pad=0.3, tuck=0.25))
    fps = script.fps
    if abs(KNOT_DT * fps - round(KNOT_DT * fps)) > 1e-9:
        raise ValueError(f"fps {fps} does not align with the {KNOT_DT} s node grid")
    n_seg = _grid_count(script.duration, "duration")
    T = round(script.duration * fps)

    nodes = np.zeros(n_seg + 1)
    flight_frames = None
    if p["flight_time"] > 0:
        n_lead = _grid_count(p["lead_pad"], "lead_pad")
        n_push = _grid_count(p["push_time"], "push_time")
        n_fl = _grid_count(p["flight_time"], "flight_time")
        n_land = _grid_count(p["land_time"], "land_time")
        if n_lead + n_push + n_fl + n_land > n_seg - 2:
            raise ValueError(
                "script phases leave less than 0.2 s of still tail: "
                f"{(n_lead + n_push + n_fl + n_land) * KNOT_DT} s of {script.duration} s used")
        v1 = 0.5 * GRAVITY * p["flight_time"]
        i0 = n_lead
        nodes[i0:i0 + n_push + 1] = design_stance_accel(
            n_push, KNOT_DT, 0.0, -GRAVITY, v_start=0.0, dv=v1, dz=0.0)
        nodes[i0 + n_push:i0 + n_push + n_fl + 1] = -GRAVITY
        nodes[i0 + n_push + n_fl:i0 + n_push + n_fl + n_land + 1] = design_stance_accel(
            n_land, KNOT_DT, -GRAVITY, 0.0, v_start=-v1, dv=v1, dz=0.0)
        if nodes.min() < -GRAVITY - 1e-9:
            raise ValueError(
                f"contact force would go negative (min accel {nodes.min():.2f}); "
                "increase push_time or land_time")
        f1 = round((p["lead_pad"] + p["push_time"]) * fps)
        f2 = f1 + round(p["flight_time"] * fps)
        flight_frames = (f1, f2)

    times = np.arange(T) / fps
    z, _, _ = sample_pwl_accel(nodes, KNOT_DT, times, v0=0.0, z0=p["root_height"])
    root_pos = np.zeros((T, 3))
    root_pos[:, 2] = z

    lift = np.zeros(T)
    if flight_frames is not None:
        f1, f2 = flight_frames
        inner = np.arange(f1 + 1, f2)
        tau = (inner - f1) / (f2 - f1)
        lift[inner] = p["tuck"] * swing_lift(tau)

    angles = arms_down_angles(skeleton, T)
    for f in range(T):
        targets = {
            side: np.array([0.0, sign * 0.09, ANKLE_DROP + lift[f]])
            for side, sign in (("left", 1.0), ("right", -1.0))
        }
        _leg_angles_inplace(angles, skeleton, f, root_pos[f], targets)

    expected = np.ones((T, 4), dtype=bool)
    if flight_frames is not None:
        # the heuristic's backward displacement test marks the touchdown frame
        # as moving, so the expected flight run ends at f2 inclusive
        f1, f2 = flight_frames
        expected[f1 + 1:f2 + 1] = False
    return root_pos, angles, expected


def _build_walk(script, skeleton):
    """Steady-state gait along +x with a 60% duty cycle."""
    p = _script_params(script, dict(
        cycle_time=1.0, stride=0.55, root_height=0.83, bob=0.015, sway=0.04,
        step_lift=0.05, arm_swing=0.35, duty=0.6))
    fps = script.fps
    C = 2 * round(p["cycle_time"] * fps / 2)
    if C < 12:
        raise ValueError(f"cycle_time {p['cycle_time']} too short at {fps} fps")
    n_st = round(p["duty"] * C)
    n_sw = C - n_st
    T = round(script.duration * fps)
    S = p["stride"]
    speed = S * fps / C

    frames = np.arange(T)
    root_pos = np.empty((T, 3))
    root_pos[:, 0] = speed * frames / fps - 0.25 * S
    root_pos[:, 1] = p["sway"] * np.sin(2.0 * np.pi * frames / C - 0.1 * np.pi)
    root_pos[:, 2] = p["root_height"] - p["bob"] * np.cos(4.0 * np.pi * frames / C)

    def ankle_path(offset, anchor_shift):
        g = frames + offset
        k = g // C
        c = g % C
        x = (k - anchor_shift) * S
        zl = np.full(T, ANKLE_DROP)
        swing = c >= n_st
        tau = (c[swing] - n_st) / n_sw
        x = x.astype(float)
        x[swing] += S * swing_shift(tau)
        zl[swing] += p["step_lift"] * swing_lift(tau)
        return x, zl

    xl, zl = ankle_path(0, 0.0)
    xr, zr = ankle_path(C // 2, 0.5)

    angles = arms_down_angles(skeleton, T)
    swing_arm = p["arm_swing"] * np.sin(2.0 * np.pi * frames / C - 1.1 * np.pi)
    ls = skeleton.joint_id("left_shoulder")
    rs = skeleton.joint_id("right_shoulder")
    angles[:, ls, 1] = swing_arm
    angles[:, rs, 1] = -swing_arm
    angles[:, skeleton.joint_id("left_elbow"), 2] = -0.25
    angles[:, skeleton.joint_id("right_elbow"), 2] = 0.25

    for f in range(T):
        targets = {
            "left": np.array([xl[f], 0.09, zl[f]]),
            "right": np.array([xr[f], -0.09, zr[f]]),
        }
        _leg_angles_inplace(angles, skeleton, f, root_pos[f], targets)
    return root_pos, angles, None


def _build_dance(script, skeleton):
    """Box-step pattern: slow weight shifts, one foot moving at a time."""
    p = _script_params(script, dict(
        step_len=0.15, side=0.12, root_height=0.82, bob=0.012, step_lift=0.06,
        swing_time=0.27, pause_time=0.6))
    fps = script.fps
    n_sw = max(4, round(p["swing_time"] * fps))
    n_p = max(4, round(p["pause_time"] * fps))
    move = n_sw + n_p
    T = round(script.duration * fps)

    base_l, base_r = np.array([0.0, 0.09]), np.array([0.0, -0.09])
    fwd_l = np.array([p["step_len"], 0.09 + p["side"]])
    fwd_r = np.array([p["step_len"], -0.09 - p["side"]])
    # box step: one foot moves per quarter cycle, the other stands still
    moves = [("left", base_l, fwd_l), ("right", base_r, fwd_r),
             ("left", fwd_l, base_l), ("right", fwd_r, base_r)]
    still_pos = [base_r, fwd_l, fwd_r, base_l]

    def support_anchor(xy):
        # root target while balancing on one foot: over the sole, biased inward
        return np.array([xy[0] + 0.04, 0.7 * xy[1]])

    anchors = [support_anchor(q) for q in still_pos]

    foot_xy = {"left": np.empty((T, 2)), "right": np.empty((T, 2))}
    foot_lift = {"left": np.zeros(T), "right": np.zeros(T)}
    root_xy = np.empty((T, 2))

    for f in range(T):
        m = (f // move) % 4
        c = f % move
        swing_foot, start, end = moves[m]
        other = "right" if swing_foot == "left" else "left"
        if c < n_sw:
            tau = c / n_sw
            foot_xy[swing_foot][f] = start + (end - start) * swing_shift(tau)
            foot_lift[swing_foot][f] = p["step_lift"] * swing_lift(tau)
            root_xy[f] = anchors[m]
        else:
            foot_xy[swing_foot][f] = end
            # pause: ease the weight toward the next move's support foot
            tau = (c - n_sw) / n_p
            root_xy[f] = anchors[m] + (anchors[(m + 1) % 4] - anchors[m]) * swing_shift(tau)
        foot_xy[other][f] = still_pos[m]

    root_pos = np.empty((T, 3))
    root_pos[:, :2] = root_xy
    dips = foot_lift["left"] + foot_lift["right"]
    root_pos[:, 2] = p["root_height"] - p["bob"] * dips / max(p["step_lift"], 1e-9)

    angles = arms_down_angles(skeleton, T)
    for f in range(T):
        targets = {
            side: np.array([foot_xy[side][f, 0], foot_xy[side][f, 1],
                            ANKLE_DROP + foot_lift[side][f]])
            for side in ("left", "right")
        }
        _leg_angles_inplace(angles, skeleton, f, root_pos[f], targets)
    return root_pos, angles, None


_BUILDERS = {
    "stand": _build_vertical,
    "hop": _build_vertical,
    "jump": _build_vertical,
    "walk": _build_walk,
    "dance": _build_dance,
}


def _camera_pose(script, target, rng):
    yaw = script.camera_yaw
    if yaw is None:
        yaw = rng.uniform(0.0, 2.0 * np.pi)
    cam = target + script.camera_distance * np.array([np.cos(yaw), np.sin(yaw), 0.0])
    cam[2] = script.camera_height
    fwd = target - cam
    fwd = fwd / np.linalg.norm(fwd)
    up = np.array([0.0, 0.0, 1.0])
    x = np.cross(fwd, up)
    x = x / np.linalg.norm(x)
    y = np.cross(fwd, x)
    R = np.stack([x, y, fwd])
    return R, -R @ cam


def generate(script, skeleton=None, seed=0):
    """Build one clip. Deterministic in (script, seed)."""
    base = default_skeleton() if skeleton is None else skeleton
    skel = upper_body_skeleton(base) if script.mass_override == "upper_body" else base
    rng = np.random.default_rng(seed)

    root_pos, angles, expected = _BUILDERS[script.kind](script, skel)
    motion_world = JointAngleMotion(skel, script.fps, root_pos, angles)
    floor_world = FloorPlane(np.array([0.0, 0.0, 1.0]), np.zeros(3))

    target = root_pos.mean(axis=0)
    R, t = _camera_pose(script, target, rng)
    motion = transform_motion(motion_world, R, t)
    floor = floor_world.transformed(R, t)

    contacts = heuristic_label(motion, floor)
    if expected is not None and not np.array_equal(contacts.labels, expected):
        bad = int(np.argmax(np.any(contacts.labels != expected, axis=1)))
        raise RuntimeError(
            f"script '{script.name}': heuristic labels diverge from the designed "
            f"schedule at frame {bad}; adjust tuck/flight_time")

    joints3d = forward_kinematics(motion)
    if joints3d[..., 2].min() < 0.5:
        raise ValueError(
            f"subject too close to the camera (min depth {joints3d[..., 2].min():.2f} m)")
    seq0 = PoseSequence(skel.joint_names, script.fps,
                        np.zeros((len(root_pos), skel.n_joints, 2)),
                        np.zeros((len(root_pos), skel.n_joints)), joints3d)
    joints2d = project_perspective(joints3d, seq0.focal, seq0.principal_point)

    T, J = joints2d.shape[:2]
    conf = np.clip(1.0 - np.abs(rng.normal(0.0, 0.06, (T, J))), 0.35, 1.0)
    noisy2d = joints2d.copy()
    noisy3d = joints3d.copy()
    if script.pixel_noise > 0:
        noisy2d += rng.normal(0.0, script.pixel_noise, noisy2d.shape)
    if script.depth_noise > 0:
        noisy3d += rng.normal(0.0, script.depth_noise, noisy3d.shape)
    spine_ids = [skel.joint_id(n) for n in SPINE_JOINTS]
    if script.conf_drop > 0:
        drop = rng.random((T, J)) < script.conf_drop
        drop[:, spine_ids] = False
        n_drop = int(drop.sum())
        conf[drop] = rng.uniform(0.05, 0.25, n_drop)
        noisy2d[drop] += rng.normal(0.0, 25.0, (n_drop, 2))
        noisy3d[drop] += rng.normal(0.0, 0.12, (n_drop, 3))
    # the spine carries no 2D detection; its confidence marks the 3D estimate
    conf[:, spine_ids] = 0.8

    pose = PoseSequence(skel.joint_names, script.fps, noisy2d, conf, noisy3d)
    return GeneratedClip(script, seed, motion, pose, contacts, floor)
