"""Variable layout and evaluation for the reduced-body trajectory.

The decision vector holds, in order: COM position knots, COM orientation
knots, per-foot-joint phase variables (stance position constants, stance
force splines, flight position splines), and per-foot-joint phase durations.
COM tracks are Hermite splines with one segment per 0.1 s on a fixed grid;
foot tracks are phase-structured, so their segment durations scale with the
phase duration variables.

A flight spline's boundary knots are tied to the neighboring stance
constants with zero velocity (the foot leaves the floor from rest and lands
to rest), which keeps every foot trajectory C1 across phase switches; the
tie is structural: the boundary knot simply reads the stance variable.

Evaluation returns the value plus its gradient in two parts: ``diag``
entries (col, w) add w to the three diagonal components d value[a] / d
x[col + a], and ``dur`` entries (col, vec) give dense partials with respect
to a duration variable.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spline import (hermite_delta_partial, hermite_eval, hermite_weights,
                     locate, segment_count)

COM_KNOT_DT = 0.1


@dataclass
class Phase:
    contact: bool
    n_frames: int
    duration0: float
    n_segs: int
    const_col: int = -1
    force_col: int = -1
    pos_cols: np.ndarray = field(default=None)
    vel_cols: np.ndarray = field(default=None)


class TrajectoryLayout:
    def __init__(self, contacts):
        self.fps = contacts.fps
        self.total = contacts.duration
        self.n_com = max(1, int(round(self.total / COM_KNOT_DT)))
        self.com_delta = self.total / self.n_com

        col = 0
        self.com_base = (0, 6 * (self.n_com + 1))
        col = 12 * (self.n_com + 1)

        self.joint_phases = []
        for i in range(4):
            phases = []
            for kind, n in contacts.phases(i):
                dur = n / self.fps
                if kind == "contact":
                    ph = Phase(True, n, dur, segment_count(dur))
                    ph.const_col = col
                    col += 3
                    ph.force_col = col
                    col += 6 * (ph.n_segs + 1)
                else:
                    ph = Phase(False, n, dur, segment_count(dur))
                phases.append(ph)
            self.joint_phases.append(phases)

        # flight knots: boundaries read the neighbor stance constant, zero
        # velocity; interiors are free
        for phases in self.joint_phases:
            for j, ph in enumerate(phases):
                if ph.contact:
                    continue
                n = ph.n_segs
                pos = np.empty(n + 1, dtype=int)
                vel = np.empty(n + 1, dtype=int)
                for m in range(n + 1):
                    tied_prev = (m == 0 and j > 0)
                    tied_next = (m == n and j + 1 < len(phases))
                    if tied_prev:
                        pos[m], vel[m] = phases[j - 1].const_col, -1
                    elif tied_next:
                        pos[m], vel[m] = phases[j + 1].const_col, -1
                    else:
                        pos[m], vel[m] = col, col + 3
                        col += 6
                ph.pos_cols, ph.vel_cols = pos, vel

        self.dur_base = col
        self.dur_cols = []
        for phases in self.joint_phases:
            self.dur_cols.append(np.arange(col, col + len(phases)))
            col += len(phases)
        self.n_vars = col

    # -- accessors --------------------------------------------------------

    def durations0(self):
        d = np.zeros(self.n_vars - self.dur_base)
        for phases, cols in zip(self.joint_phases, self.dur_cols):
            d[cols - self.dur_base] = [ph.duration0 for ph in phases]
        return d

    def durations(self, x, i):
        return x[self.dur_cols[i]]

    def com_knot_cols(self, which, k):
        """(pos_col, vel_col) of COM knot k; which is 0 for r, 1 for theta."""
        base = self.com_base[which] + 6 * k
        return base, base + 3

    @staticmethod
    def _locate_phase(durs, t):
        ends = np.cumsum(durs)
        j = int(np.searchsorted(ends, t, side="right"))
        j = min(j, len(durs) - 1)
        return j, t - (ends[j] - durs[j])

    # -- evaluation -------------------------------------------------------

    def com_state(self, x, which, t, order=0):
        k, u = locate(t, self.com_delta, self.n_com)
        p0c, v0c = self.com_knot_cols(which, k)
        p1c, v1c = self.com_knot_cols(which, k + 1)
        w = hermite_weights(u, self.com_delta, order)
        value = (w[0] * x[p0c:p0c + 3] + w[1] * x[v0c:v0c + 3]
                 + w[2] * x[p1c:p1c + 3] + w[3] * x[v1c:v1c + 3])
        diag = [(p0c, w[0]), (v0c, w[1]), (p1c, w[2]), (v1c, w[3])]
        return value, diag

    @staticmethod
    def _flight_knots(x, ph, k):
        p0 = x[ph.pos_cols[k]:ph.pos_cols[k] + 3]
        p1 = x[ph.pos_cols[k + 1]:ph.pos_cols[k + 1] + 3]
        v0 = x[ph.vel_cols[k]:ph.vel_cols[k] + 3] if ph.vel_cols[k] >= 0 \
            else np.zeros(3)
        v1 = x[ph.vel_cols[k + 1]:ph.vel_cols[k + 1] + 3] if ph.vel_cols[k + 1] >= 0 \
            else np.zeros(3)
        return p0, v0, p1, v1

    def foot_pos(self, x, i, t, order=0):
        """Foot-joint position (or time derivative); see module docstring."""
        durs = self.durations(x, i)
        j, s = self._locate_phase(durs, t)
        ph = self.joint_phases[i][j]
        if ph.contact:
            if order == 0:
                c = ph.const_col
                return x[c:c + 3].copy(), [(c, 1.0)], []
            return np.zeros(3), [], []
        n = ph.n_segs
        delta = durs[j] / n
        k = min(max(int(np.floor(s / delta + 1e-12)), 0), n - 1)
        u = s - k * delta
        p0, v0, p1, v1 = self._flight_knots(x, ph, k)
        w = hermite_weights(u, delta, order)
        value = w[0] * p0 + w[1] * v0 + w[2] * p1 + w[3] * v1
        diag = [(ph.pos_cols[k], w[0]), (ph.pos_cols[k + 1], w[2])]
        if ph.vel_cols[k] >= 0:
            diag.append((ph.vel_cols[k], w[1]))
        if ph.vel_cols[k + 1] >= 0:
            diag.append((ph.vel_cols[k + 1], w[3]))
        dv_du = hermite_eval(p0, v0, p1, v1, delta, u, order + 1)
        dv_dd = hermite_delta_partial(p0, v0, p1, v1, delta, u, order)
        dur = [(self.dur_cols[i][m], -dv_du) for m in range(j)]
        dur.append((self.dur_cols[i][j], -(k / n) * dv_du + dv_dd / n))
        return value, diag, dur

    def foot_force(self, x, i, t, order=0):
        """Contact force of one foot joint; identically zero in flight."""
        durs = self.durations(x, i)
        j, s = self._locate_phase(durs, t)
        ph = self.joint_phases[i][j]
        if not ph.contact:
            return np.zeros(3), [], []
        n = ph.n_segs
        delta = durs[j] / n
        k = min(max(int(np.floor(s / delta + 1e-12)), 0), n - 1)
        u = s - k * delta
        b = ph.force_col
        p0 = x[b + 6 * k:b + 6 * k + 3]
        v0 = x[b + 6 * k + 3:b + 6 * k + 6]
        p1 = x[b + 6 * (k + 1):b + 6 * (k + 1) + 3]
        v1 = x[b + 6 * (k + 1) + 3:b + 6 * (k + 1) + 6]
        w = hermite_weights(u, delta, order)
        value = w[0] * p0 + w[1] * v0 + w[2] * p1 + w[3] * v1
        diag = [(b + 6 * k, w[0]), (b + 6 * k + 3, w[1]),
                (b + 6 * (k + 1), w[2]), (b + 6 * (k + 1) + 3, w[3])]
        dv_du = hermite_eval(p0, v0, p1, v1, delta, u, order + 1)
        dv_dd = hermite_delta_partial(p0, v0, p1, v1, delta, u, order)
        dur = [(self.dur_cols[i][m], -dv_du) for m in range(j)]
        dur.append((self.dur_cols[i][j], -(k / n) * dv_du + dv_dd / n))
        return value, diag, dur

    def force_knot_mid(self, x, i, j, k, at_mid):
        """Force at a spline knot (at_mid False) or segment midpoint (True).

        These samples ride with the phase, so only the phase's own duration
        enters, and knot samples carry no duration dependence at all.
        """
        ph = self.joint_phases[i][j]
        b = ph.force_col
        if not at_mid:
            col = b + 6 * k
            return x[col:col + 3].copy(), [(col, 1.0)], []
        n = ph.n_segs
        delta = self.durations(x, i)[j] / n
        u = 0.5 * delta
        p0 = x[b + 6 * k:b + 6 * k + 3]
        v0 = x[b + 6 * k + 3:b + 6 * k + 6]
        p1 = x[b + 6 * (k + 1):b + 6 * (k + 1) + 3]
        v1 = x[b + 6 * (k + 1) + 3:b + 6 * (k + 1) + 6]
        w = hermite_weights(u, delta, 0)
        value = w[0] * p0 + w[1] * v0 + w[2] * p1 + w[3] * v1
        diag = [(b + 6 * k, w[0]), (b + 6 * k + 3, w[1]),
                (b + 6 * (k + 1), w[2]), (b + 6 * (k + 1) + 3, w[3])]
        dv_du = hermite_eval(p0, v0, p1, v1, delta, u, 1)
        dv_dd = hermite_delta_partial(p0, v0, p1, v1, delta, u, 0)
        dur = [(self.dur_cols[i][j], (0.5 * dv_du + dv_dd) / n)]
        return value, diag, dur

    # -- dense sampling (for output and reporting) ------------------------

    def com_samples(self, x, times, which=0, order=0):
        return np.stack([self.com_state(x, which, t, order)[0] for t in times])

    def sample(self, x, times):
        times = np.asarray(times, dtype=float)
        out = {
            "r": np.stack([self.com_state(x, 0, t)[0] for t in times]),
            "theta": np.stack([self.com_state(x, 1, t)[0] for t in times]),
            "r_ddot": np.stack([self.com_state(x, 0, t, 2)[0] for t in times]),
            "feet": np.stack([[self.foot_pos(x, i, t)[0] for i in range(4)]
                              for t in times]),
            "forces": np.stack([[self.foot_force(x, i, t)[0] for i in range(4)]
                                for t in times]),
        }
        return out


@dataclass
class CentroidalTrajectory:
    """A solved reduced-body trajectory: spline layout plus variable vector."""
    layout: TrajectoryLayout
    x: np.ndarray

    def sample(self, times):
        return self.layout.sample(self.x, times)

    def durations(self, joint):
        return self.layout.durations(self.x, joint)

    @property
    def total(self):
        return self.layout.total
