"""Damped least-squares inverse kinematics on full-body joint targets."""
from __future__ import annotations

import numpy as np

from .kinematics import fk_jacobian, fk_positions_rotations


def _frame_residual(skeleton, root_pos, angles, targets, weights):
    pos, rots = fk_positions_rotations(skeleton, root_pos[None], angles[None])
    diff = (pos[0] - targets) * weights[:, None]
    return diff.ravel(), pos[0], rots


def ik_solve_frame(skeleton, targets, weights, root_pos0, angles0,
                   max_iters=100, damping=1e-3, tol=1e-8):
    """Fit root position + joint angles so FK matches weighted 3D targets.

    Levenberg-Marquardt with multiplicative damping updates: steps that do not
    reduce the residual are rejected and retried with 10x damping. Returns
    (root_pos, angles, rms_error).
    """
    targets = np.asarray(targets, dtype=float)
    weights = np.asarray(weights, dtype=float)
    J = skeleton.n_joints
    root = np.asarray(root_pos0, dtype=float).copy()
    angles = np.asarray(angles0, dtype=float).copy()

    r, pos, rots = _frame_residual(skeleton, root, angles, targets, weights)
    cost = r @ r
    lam = damping
    for _ in range(max_iters):
        jac_angles = fk_jacobian(skeleton, root[None], angles[None],
                                 positions=pos[None], rotations=rots)[0]
        # rows: 3 per joint; cols: [root (3) | angles (3J)]
        Jm = np.empty((3 * J, 3 + 3 * J))
        Jm[:, :3] = np.tile(np.eye(3), (J, 1))
        Jm[:, 3:] = jac_angles.reshape(3 * J, 3 * J)
        Jm *= np.repeat(weights, 3)[:, None]

        JtJ = Jm.T @ Jm
        g = Jm.T @ r
        for _try in range(8):
            H = JtJ + (lam * lam) * np.eye(JtJ.shape[0])
            try:
                step = np.linalg.solve(H, -g)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            new_root = root + step[:3]
            new_angles = angles + step[3:].reshape(J, 3)
            r_new, pos_new, rots_new = _frame_residual(
                skeleton, new_root, new_angles, targets, weights)
            cost_new = r_new @ r_new
            if cost_new < cost:
                root, angles = new_root, new_angles
                improvement = cost - cost_new
                r, pos, rots, cost = r_new, pos_new, rots_new, cost_new
                lam = max(lam * 0.5, 1e-6)
                break
            lam *= 10.0
        else:
            break
        if improvement < tol * max(cost, 1e-12):
            break
    n_eff = max(np.count_nonzero(weights), 1)
    rms = float(np.sqrt(cost / (3 * n_eff)))
    return root, angles, rms


def ik_solve_sequence(skeleton, targets, weights, root_pos0=None, angles0=None,
                      max_iters=100, damping=1e-3):
    """Per-frame IK over a sequence, warm-starting each frame from the last.

    targets: T x J x 3, weights: T x J. Returns (root_pos, angles, rms) arrays.
    """
    targets = np.asarray(targets, dtype=float)
    T, J = targets.shape[:2]
    root_out = np.empty((T, 3))
    ang_out = np.empty((T, J, 3))
    rms_out = np.empty(T)
    root = targets[0, 0].copy() if root_pos0 is None else np.asarray(root_pos0, float).copy()
    angles = np.zeros((J, 3)) if angles0 is None else np.asarray(angles0, float).copy()
    for t in range(T):
        if root_pos0 is None and t > 0:
            root = root_out[t - 1] + (targets[t, 0] - targets[t - 1, 0])
        root, angles, rms = ik_solve_frame(
            skeleton, targets[t], weights[t], root, angles,
            max_iters=max_iters, damping=damping)
        root_out[t] = root
        ang_out[t] = angles
        rms_out[t] = rms
    return root_out, ang_out, rms_out
