"""Initial skeleton scale and pose from the raw 3D estimates."""
from __future__ import annotations

import numpy as np

from ..core.ik import ik_solve_sequence


def estimate_bone_lengths(seq, skeleton, min_conf=0.3):
    """Median observed parent-child distance per bone.

    Frames where either endpoint has low confidence are skipped; bones never
    observed confidently keep the rest-pose length.
    """
    lengths = skeleton.bone_lengths.copy()
    for j in range(1, skeleton.n_joints):
        par = skeleton.parents[j]
        ok = (seq.conf[:, j] >= min_conf) & (seq.conf[:, par] >= min_conf)
        if not np.any(ok):
            continue
        d = np.linalg.norm(seq.joints3d[ok, j] - seq.joints3d[ok, par], axis=-1)
        med = float(np.median(d))
        if med > 1e-6:
            lengths[j] = med
    return lengths


def initialize_from_3d(seq, skeleton, ik_iters=60):
    """Scaled skeleton + per-frame IK fit to the 3D estimates.

    Returns (skeleton, root_pos, joint_angles).
    """
    skeleton = skeleton.with_bone_lengths(estimate_bone_lengths(seq, skeleton))
    weights = np.clip(seq.conf, 0.05, 1.0)
    root, angles, _ = ik_solve_sequence(skeleton, seq.joints3d, weights,
                                        max_iters=ik_iters)
    return skeleton, root, angles
