"""Rule-based contact labeling and the velocity-only baselines.

The heuristic needs a motion and a floor and is what generates training labels
for the classifier; the velocity baselines see only a pose sequence and exist
as comparison points.
"""
from __future__ import annotations

import numpy as np

from ..core.kinematics import forward_kinematics
from .sequence import ContactSequence


def heuristic_label(motion, floor, move_tol=0.02, height_tol=0.05):
    """A foot joint is in contact when it moved less than move_tol since the
    previous frame and sits below height_tol above the floor. Frame 0 reuses
    frame 1's movement test."""
    pos = forward_kinematics(motion)[:, list(motion.skeleton.foot_joint_ids)]
    disp = np.linalg.norm(np.diff(pos, axis=0), axis=2)       # (T-1) x 4
    if len(disp) == 0:
        moved = np.zeros((1, 4), dtype=bool)
    else:
        moved = np.concatenate([disp[:1], disp], axis=0) < move_tol
    height = floor.height(pos)
    return ContactSequence(fps=motion.fps, labels=moved & (height < height_tol))


def _displacement_labels(points, threshold, fps):
    """Contact iff per-frame displacement below threshold; frame 0 copies frame 1."""
    disp = np.linalg.norm(np.diff(points, axis=0), axis=2)
    if len(disp) == 0:
        labels = np.ones((1, points.shape[1]), dtype=bool)
    else:
        labels = np.concatenate([disp[:1], disp], axis=0) < threshold
    return ContactSequence(fps=fps, labels=labels)


def velocity_baseline_2d(seq, threshold=5.0):
    """2D pixel-velocity baseline over the four contact joints."""
    ids = [seq.joint_id(n) for n in ("left_toe", "left_heel", "right_toe", "right_heel")]
    return _displacement_labels(seq.joints2d[:, ids], threshold, seq.fps)


def velocity_baseline_3d(seq, threshold=0.02):
    """3D velocity baseline on the (noisy) input joint positions."""
    ids = [seq.joint_id(n) for n in ("left_toe", "left_heel", "right_toe", "right_heel")]
    return _displacement_labels(seq.joints3d[:, ids], threshold, seq.fps)


def label_accuracy(pred, gt):
    """Fraction of (frame, joint) cells that agree."""
    if pred.labels.shape != gt.labels.shape:
        raise ValueError(
            f"label shapes differ: {pred.labels.shape} vs {gt.labels.shape}")
    return float(np.mean(pred.labels == gt.labels))


def tune_baseline_threshold(baseline, pairs, thresholds):
    """Pick the threshold maximizing mean accuracy over (seq, gt) pairs."""
    best, best_acc = None, -1.0
    for th in thresholds:
        accs = [label_accuracy(baseline(seq, th), gt) for seq, gt in pairs]
        acc = float(np.mean(accs))
        if acc > best_acc:
            best, best_acc = th, acc
    return best, best_acc
