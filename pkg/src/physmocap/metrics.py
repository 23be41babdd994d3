"""Plausibility and positional metrics for recovered motions.

Ground-reaction forces are read off a physics trajectory directly or implied
from a kinematic motion by twice differencing its COM; they are reported as a
percentage of the idle body-weight force. Foot metrics count frames where a
foot floats, penetrates the floor, or skates during ground-truth contact.
Positional metrics are global mean per-joint errors in millimetres, with an
extra variant that aligns the root of the first frame only.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core.kinematics import (compute_com_inertia, fk_positions_rotations,
                              segment_points)

GRAVITY = 9.8
FLOAT_THRESHOLD = 0.03        # m above the floor while labelled in contact
PENETRATION_THRESHOLD = 0.03  # m below the floor, any frame
SKATE_THRESHOLD = 0.02        # m moved between consecutive contact frames

BODY_EVAL_JOINTS = (
    "pelvis", "neck",
    "left_shoulder", "right_shoulder", "left_elbow", "right_elbow",
    "left_wrist", "right_wrist",
    "left_hip", "right_hip", "left_knee", "right_knee",
    "left_ankle", "right_ankle", "left_toe", "right_toe",
)
FEET_EVAL_JOINTS = ("left_ankle", "right_ankle", "left_toe", "right_toe")


@dataclass
class PlausibilityReport:
    """Table-2/3 style summary. GRF values in percent of idle body weight,
    foot metrics in percent of their frame counts, positions in mm."""
    mean_grf: float
    max_grf: float
    ballistic_grf: float | None   # None when the clip has no flight frames
    floating: float
    penetration: float
    skate: float
    feet_mpjpe: float | None = None
    body_mpjpe: float | None = None
    body_align1_mpjpe: float | None = None

    def as_dict(self):
        def fmt(v):
            return "n/a" if v is None else float(v)
        return {k: fmt(getattr(self, k)) for k in (
            "mean_grf", "max_grf", "ballistic_grf", "floating", "penetration",
            "skate", "feet_mpjpe", "body_mpjpe", "body_align1_mpjpe")}


def _central_second_difference(track, fps):
    """Second time derivative, one-sided at the ends. T x 3."""
    acc = np.empty_like(track)
    acc[1:-1] = track[2:] - 2.0 * track[1:-1] + track[:-2]
    acc[0] = track[0] - 2.0 * track[1] + track[2]
    acc[-1] = track[-1] - 2.0 * track[-2] + track[-3]
    return acc * fps * fps


def implied_grf(source, mass=None, floor=None):
    """Per-frame net contact force, T x 3.

    A physics trajectory carries its contact forces, so they are summed
    directly at the frame grid. A kinematic motion implies them through
    m (r'' - g), with r'' from second differences of the segment-model COM
    and gravity pointing against the floor normal.
    """
    if hasattr(source, "layout"):       # CentroidalTrajectory
        fps = source.layout.fps
        times = np.arange(round(source.layout.total * fps)) / fps
        return source.sample(times)["forces"].sum(axis=1)
    motion = source
    if motion.n_frames < 3:
        raise ValueError("need at least 3 frames to difference the COM")
    if floor is None:
        raise ValueError("kinematic motions need the floor for gravity")
    states = compute_com_inertia(motion)
    if mass is None:
        mass = states.mass
    acc = _central_second_difference(states.r, motion.fps)
    gravity = -GRAVITY * floor.normal
    return mass * (acc - gravity)


def grf_metrics(forces, contacts_gt, mass):
    """(mean, max, ballistic) force magnitude in percent of idle body weight.

    Ballistic is the median over frames whose ground-truth labels have no
    foot in contact; it is None when the clip never leaves the ground.
    """
    percent = np.linalg.norm(forces, axis=1) / (mass * GRAVITY) * 100.0
    flight = ~contacts_gt.labels.any(axis=1)
    ballistic = float(np.median(percent[flight])) if flight.any() else None
    return float(percent.mean()), float(percent.max()), ballistic


def _foot_counts(feet, floor, labels):
    height = feet @ floor.normal - floor.normal @ floor.point
    n_contact = labels.sum()
    floating = float((labels & (height > FLOAT_THRESHOLD)).sum()
                     / max(n_contact, 1))
    penetration = float((height < -PENETRATION_THRESHOLD).mean())
    move = np.linalg.norm(feet[1:] - feet[:-1], axis=2)
    pair = labels[1:] & labels[:-1]
    skate = float((pair & (move > SKATE_THRESHOLD)).sum() / max(pair.sum(), 1))
    return floating, penetration, skate


def foot_metrics(motion, floor, contacts_gt):
    """(floating, penetration, skate) fractions for the four contact joints.

    Floating: > 3 cm above the floor while labelled in contact. Penetration:
    > 3 cm below the floor at any frame. Skate: moved > 2 cm from the
    previous frame while both frames are labelled in contact.
    """
    positions, _ = fk_positions_rotations(
        motion.skeleton, motion.root_pos, motion.joint_angles)
    feet = positions[:, list(motion.skeleton.foot_joint_ids)]   # T x 4 x 3
    return _foot_counts(feet, floor, contacts_gt.labels)


def positional_metrics(pred, gt, joint_names=None):
    """(feet, body, body_align1) global mean per-joint errors in mm.

    body_align1 subtracts the frame-0 root offset from every predicted
    frame before measuring, removing any constant trajectory shift.
    """
    if joint_names is None:
        joint_names = BODY_EVAL_JOINTS
    pred_pos, _ = fk_positions_rotations(
        pred.skeleton, pred.root_pos, pred.joint_angles)
    gt_pos, _ = fk_positions_rotations(gt.skeleton, gt.root_pos, gt.joint_angles)

    def mpjpe(a, b, names):
        ids_a = [pred.skeleton.joint_id(n) for n in names]
        ids_b = [gt.skeleton.joint_id(n) for n in names]
        err = np.linalg.norm(a[:, ids_a] - b[:, ids_b], axis=2)
        return float(err.mean() * 1000.0)

    feet = mpjpe(pred_pos, gt_pos, FEET_EVAL_JOINTS)
    body = mpjpe(pred_pos, gt_pos, joint_names)
    shift = pred.root_pos[0] - gt.root_pos[0]
    body_align1 = mpjpe(pred_pos - shift, gt_pos, joint_names)
    return feet, body, body_align1


def plausibility_report(motion, floor, contacts_gt, mass=None, forces=None,
                        gt_motion=None):
    """Assemble the full report for one motion.

    forces: per-frame net contact force from the physics stage; when None
    they are implied from the motion's COM (the right choice for raw inputs
    and kinematic-only results).
    """
    if mass is None:
        mass = compute_com_inertia(motion).mass
    if forces is None:
        forces = implied_grf(motion, mass=mass, floor=floor)
    mean, peak, ballistic = grf_metrics(forces, contacts_gt, mass)
    floating, penetration, skate = foot_metrics(motion, floor, contacts_gt)
    report = PlausibilityReport(
        mean_grf=mean, max_grf=peak, ballistic_grf=ballistic,
        floating=100.0 * floating, penetration=100.0 * penetration,
        skate=100.0 * skate)
    if gt_motion is not None:
        feet, body, align1 = positional_metrics(motion, gt_motion)
        report.feet_mpjpe, report.body_mpjpe = feet, body
        report.body_align1_mpjpe = align1
    return report


def positions_report(positions, skeleton, fps, floor, contacts_gt, mass=None,
                     gt_motion=None):
    """Report for raw per-frame joint positions (the noisy pose input).

    There is no joint-angle motion to differentiate, so forces are implied
    from the segment-model COM of the given positions.
    """
    positions = np.asarray(positions, dtype=float)
    pts, masses = segment_points(skeleton, positions)
    if mass is None:
        mass = float(masses.sum())
    com = np.einsum("s,tsd->td", masses, pts) / masses.sum()
    acc = _central_second_difference(com, fps)
    forces = mass * (acc + GRAVITY * floor.normal)
    mean, peak, ballistic = grf_metrics(forces, contacts_gt, mass)
    feet = positions[:, list(skeleton.foot_joint_ids)]
    floating, penetration, skate = _foot_counts(feet, floor,
                                                contacts_gt.labels)
    report = PlausibilityReport(
        mean_grf=mean, max_grf=peak, ballistic_grf=ballistic,
        floating=100.0 * floating, penetration=100.0 * penetration,
        skate=100.0 * skate)
    if gt_motion is not None:
        gt_pos, _ = fk_positions_rotations(
            gt_motion.skeleton, gt_motion.root_pos, gt_motion.joint_angles)

        def mpjpe(names):
            ids_p = [skeleton.joint_id(n) for n in names]
            ids_g = [gt_motion.skeleton.joint_id(n) for n in names]
            err = np.linalg.norm(positions[:, ids_p] - gt_pos[:, ids_g], axis=2)
            return float(err.mean() * 1000.0)

        report.feet_mpjpe = mpjpe(FEET_EVAL_JOINTS)
        report.body_mpjpe = mpjpe(BODY_EVAL_JOINTS)
        root_p = positions[0, skeleton.joint_id("pelvis")]
        root_g = gt_pos[0, gt_motion.skeleton.joint_id("pelvis")]
        shift = root_p - root_g
        ids_p = [skeleton.joint_id(n) for n in BODY_EVAL_JOINTS]
        ids_g = [gt_motion.skeleton.joint_id(n) for n in BODY_EVAL_JOINTS]
        err = np.linalg.norm(positions[:, ids_p] - shift - gt_pos[:, ids_g],
                             axis=2)
        report.body_align1_mpjpe = float(err.mean() * 1000.0)
    return report
