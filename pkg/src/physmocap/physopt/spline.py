"""Cubic Hermite segments in power form, with knot and duration partials.

A segment is parameterized by endpoint values and velocities (x0, v0, x1, v1)
over a duration delta; evaluation uses the local coordinate u in [0, delta].
Every quantity is linear in the knots, so gradients with respect to them are
shared scalar weights across axes. Duration enters through the polynomial
coefficients and, for phase-structured tracks, through the sample's local
coordinate; both partials are provided here.
"""
from __future__ import annotations

import numpy as np


def hermite_coeffs(x0, v0, x1, v1, delta):
    """Power-basis coefficients (a0, a1, a2, a3) of the Hermite segment."""
    d = delta
    a0 = x0
    a1 = v0
    a2 = (-3.0 * x0 - 2.0 * d * v0 + 3.0 * x1 - d * v1) / d ** 2
    a3 = (2.0 * x0 + d * v0 - 2.0 * x1 + d * v1) / d ** 3
    return a0, a1, a2, a3


def hermite_eval(x0, v0, x1, v1, delta, u, order=0):
    a0, a1, a2, a3 = hermite_coeffs(x0, v0, x1, v1, delta)
    if order == 0:
        return a0 + u * (a1 + u * (a2 + u * a3))
    if order == 1:
        return a1 + u * (2.0 * a2 + 3.0 * u * a3)
    if order == 2:
        return 2.0 * a2 + 6.0 * u * a3
    if order == 3:
        return 6.0 * a3 * np.ones_like(u) if np.ndim(u) else 6.0 * a3
    raise ValueError(f"order {order}")


def hermite_weights(u, delta, order=0):
    """Weights w such that eval = w @ (x0, v0, x1, v1). Shape (..., 4)."""
    u = np.asarray(u, dtype=float)
    d = delta
    # rows of the coefficient map: a_m = B[m] @ knots
    b2 = np.array([-3.0 / d ** 2, -2.0 / d, 3.0 / d ** 2, -1.0 / d])
    b3 = np.array([2.0 / d ** 3, 1.0 / d ** 2, -2.0 / d ** 3, 1.0 / d ** 2])
    if order == 0:
        out = np.zeros(u.shape + (4,))
        out[..., 0] = 1.0
        out[..., 1] = u
        return out + (u ** 2)[..., None] * b2 + (u ** 3)[..., None] * b3
    if order == 1:
        out = np.zeros(u.shape + (4,))
        out[..., 1] = 1.0
        return out + (2.0 * u)[..., None] * b2 + (3.0 * u ** 2)[..., None] * b3
    if order == 2:
        return np.broadcast_to(2.0 * b2, u.shape + (4,)) \
            + (6.0 * u)[..., None] * b3
    if order == 3:
        return np.broadcast_to(6.0 * b3, u.shape + (4,)).copy()
    raise ValueError(f"order {order}")


def hermite_delta_partial(x0, v0, x1, v1, delta, u, order=0):
    """d(eval)/d(delta) at fixed local coordinate u."""
    d = delta
    da2 = (6.0 * x0 + 2.0 * d * v0 - 6.0 * x1 + d * v1) / d ** 3
    da3 = (-6.0 * x0 - 2.0 * d * v0 + 6.0 * x1 - 2.0 * d * v1) / d ** 4
    if order == 0:
        return u ** 2 * da2 + u ** 3 * da3
    if order == 1:
        return 2.0 * u * da2 + 3.0 * u ** 2 * da3
    if order == 2:
        return 2.0 * da2 + 6.0 * u * da3
    raise ValueError(f"order {order}")


def locate(t, delta, n_segs):
    """Segment index and local coordinate for time t in a uniform track.

    Knot times are assigned to the segment on their right, except the final
    endpoint which belongs to the last segment.
    """
    k = int(np.floor(t / delta + 1e-12))
    k = min(max(k, 0), n_segs - 1)
    return k, t - k * delta


def segment_count(duration, max_seg_time=2.0, per_block=6):
    """Number of polynomials for a foot or force phase of the given duration."""
    return max(per_block, int(np.ceil(duration / max_seg_time)) * per_block)
