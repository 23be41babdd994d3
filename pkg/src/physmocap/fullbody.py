"""Full-body recovery from the reduced trajectory, and skeletal retargeting.

The reduced optimization outputs center-of-mass, orientation and foot-joint
tracks. upgrade_fullbody rebuilds a joint-angle motion around them: every
upper-body joint is targeted at its original offset from the COM carried to
the new COM, the toe and heel joints are targeted at the optimized contact
tracks, and the hip/knee/ankle chain is left free for the IK to place.
"""
from __future__ import annotations

import warnings

import numpy as np

from .core.ik import ik_solve_frame, ik_solve_sequence
from .core.kinematics import compute_com_inertia, fk_positions_rotations
from .core.types import JointAngleMotion

FOOT_TARGET_WEIGHT = 10.0
LEG_JOINT_NAMES = ("left_hip", "left_knee", "left_ankle",
                   "right_hip", "right_knee", "right_ankle")
FREE_END_NAMES = ("left_toe_end", "right_toe_end")


def _upgrade_weights(skeleton):
    names = list(skeleton.joint_names)
    w = np.ones(skeleton.n_joints)
    for name in LEG_JOINT_NAMES + FREE_END_NAMES:
        w[names.index(name)] = 0.0
    for j in skeleton.foot_joint_ids:
        w[j] = FOOT_TARGET_WEIGHT
    return w


def upgrade_fullbody(kin_motion, traj, skeleton=None, max_iters=100,
                     damping=1e-3):
    """Rebuild a full-body motion around the optimized reduced trajectory.

    Each frame is solved by damped least-squares IK, warm-started from the
    kinematic pose carried to the new COM and orientation. Foot targets
    beyond leg reach are projected back onto the reachable sphere around
    the hip and reported once with a frame count.
    """
    skeleton = skeleton or kin_motion.skeleton
    T = kin_motion.n_frames
    times = np.arange(T) / kin_motion.fps
    positions, _ = fk_positions_rotations(
        skeleton, kin_motion.root_pos, kin_motion.joint_angles)
    r_old = compute_com_inertia(kin_motion).r
    out = traj.sample(times)
    shift = out["r"] - r_old
    theta = traj.layout.com_samples(traj.x, times, which=1)

    targets = positions + shift[:, None, :]
    foot_ids = list(skeleton.foot_joint_ids)
    targets[:, foot_ids] = out["feet"]
    weights = _upgrade_weights(skeleton)

    hip_of_foot = [skeleton.hip_joint_ids[0], skeleton.hip_joint_ids[0],
                   skeleton.hip_joint_ids[1], skeleton.hip_joint_ids[1]]
    root_out = np.empty((T, 3))
    ang_out = np.empty_like(kin_motion.joint_angles)
    clipped_frames = 0
    for t in range(T):
        root0 = kin_motion.root_pos[t] + shift[t]
        angles0 = kin_motion.joint_angles[t].copy()
        angles0[0] = theta[t]
        hips = positions[t, list(skeleton.hip_joint_ids)] + shift[t]
        clipped = False
        for k, j in enumerate(foot_ids):
            hip = hips[0] if hip_of_foot[k] == skeleton.hip_joint_ids[0] else hips[1]
            d = targets[t, j] - hip
            reach = np.linalg.norm(d)
            if reach > skeleton.l_leg:
                targets[t, j] = hip + d * (skeleton.l_leg / reach) * (1.0 - 1e-9)
                clipped = True
        clipped_frames += clipped
        root_out[t], ang_out[t], _ = ik_solve_frame(
            skeleton, targets[t], weights, root0, angles0,
            max_iters=max_iters, damping=damping)
    if clipped_frames:
        warnings.warn(f"{clipped_frames} frames had foot targets beyond leg "
                      "reach; projected onto the reachable sphere")
    return JointAngleMotion(skeleton, kin_motion.fps, root_out, ang_out)


def retarget(motion, src, tgt, joint_map):
    """Carry a motion from skeleton src to tgt through scaled IK targets.

    joint_map is a sequence of (src joint name, tgt joint name) pairs. The
    source motion's joint positions are scaled uniformly by the leg-length
    ratio and used as position targets for the mapped target joints.
    """
    scale = tgt.l_leg / src.l_leg
    positions, _ = fk_positions_rotations(src, motion.root_pos,
                                          motion.joint_angles)
    positions = positions * scale
    src_names = list(src.joint_names)
    tgt_names = list(tgt.joint_names)
    T = motion.n_frames
    targets = np.zeros((T, tgt.n_joints, 3))
    weights = np.zeros((T, tgt.n_joints))
    # seed frame 0 from the source pose carried through the map; position
    # targets alone leave bone twist free, and the warm start pins the
    # solver to the source's branch of those redundancies
    angles0 = np.zeros((tgt.n_joints, 3))
    for src_name, tgt_name in joint_map:
        si, ti = src_names.index(src_name), tgt_names.index(tgt_name)
        targets[:, ti] = positions[:, si]
        weights[:, ti] = 1.0
        angles0[ti] = motion.joint_angles[0, si]
    root0 = motion.root_pos[0] * scale
    root, angles, _ = ik_solve_sequence(tgt, targets, weights,
                                        root_pos0=root0, angles0=angles0)
    return JointAngleMotion(tgt, motion.fps, root, angles)


def identity_joint_map(skeleton):
    """All-joints map for retargeting between identical topologies."""
    return [(n, n) for n in skeleton.joint_names]
