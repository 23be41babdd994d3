"""Objective and constraints of the reduced-body trajectory optimization.

The model is a single rigid body: COM position r(t), orientation theta(t)
(Euler Z-Y-X), four foot contact points p_i(t) with forces f_i(t), and the
contact phase durations. Dynamics are enforced at 0.1 s samples:

    m r''         = sum_i f_i + m g
    I_w w' + w x I_w w = sum_i f_i x (r - p_i)

with w the world angular velocity of the Euler track and I_w the body
inertia from the kinematic fit rotated by the current orientation. Leg
reach and rigid foot length are enforced on a 0.08 s grid, feet stay on or
above the floor, and forces stay in a friction cone sampled at the force
spline knots and segment midpoints.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from ..core.kinematics import fk_positions_rotations
from ..core.rotation import (euler_rotation_axes, euler_rotation_axes_grad,
                             euler_rotation_axes_hess, euler_to_matrix,
                             euler_to_matrix_grad, skew)

GRAVITY = 9.8
FORCE_MAX = 1000.0
FRICTION_RATIO = 0.5
DYN_DT = 0.1
KIN_DT = 0.08


@dataclass(frozen=True)
class ReducedWeights:
    data_r: float = 0.4
    data_theta: float = 1.7
    data_foot: float = 0.3
    dur: float = 0.1
    vel_r: float = 1e-3
    vel_theta: float = 1e-3
    vel_foot: float = 0.1
    acc: float = 1e-4


@dataclass
class ReducedTargets:
    """Tracking targets and model constants from the kinematic stage."""
    fps: float
    mass: float
    times: np.ndarray        # T
    r: np.ndarray            # T x 3
    theta: np.ndarray        # T x 3, unwrapped
    feet: np.ndarray         # T x 4 x 3
    I_b: np.ndarray          # T x 3 x 3
    hip_offsets: np.ndarray  # T x 2 x 3, body frame COM -> (left, right) hip
    floor: object
    l_leg: float
    l_foot: float
    r_bound_vel: np.ndarray = field(default=None)   # 2 x 3
    theta_bound_vel: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.r_bound_vel is None:
            self.r_bound_vel = _boundary_velocities(self.r, self.fps)
        if self.theta_bound_vel is None:
            self.theta_bound_vel = _boundary_velocities(self.theta, self.fps)

    def interp(self, arr, t):
        """Linear interpolation of per-frame data at time t."""
        f = t * self.fps
        i0 = int(np.clip(np.floor(f), 0, len(self.times) - 2))
        a = f - i0
        return (1.0 - a) * arr[i0] + a * arr[i0 + 1]


def _boundary_velocities(track, fps, n=5):
    """Mean finite-difference velocity over the first and last n frames."""
    T = len(track)
    n = min(n, T - 1)
    v0 = (track[n] - track[0]) * fps / n
    v1 = (track[-1] - track[-1 - n]) * fps / n
    return np.stack([v0, v1])


def targets_from_kinematic(motion, states, floor):
    """Build ReducedTargets from the kinematic-stage outputs."""
    skeleton = motion.skeleton
    positions, rotations = fk_positions_rotations(
        skeleton, motion.root_pos, motion.joint_angles)
    feet = positions[:, list(skeleton.foot_joint_ids)]
    hips = positions[:, list(skeleton.hip_joint_ids)]
    root_R = rotations[:, 0]
    offsets = np.einsum("tji,thj->thi", root_R, hips - states.r[:, None, :])
    T = motion.n_frames
    return ReducedTargets(
        fps=motion.fps, mass=states.mass,
        times=np.arange(T) / motion.fps,
        r=states.r, theta=states.theta, feet=feet, I_b=states.I_b,
        hip_offsets=offsets, floor=floor,
        l_leg=skeleton.l_leg, l_foot=skeleton.l_foot)


def _contact_intervals(phases):
    """[(phase_index, (start, end))] of the contact phases, initial timing."""
    out = []
    at = 0.0
    for j, ph in enumerate(phases):
        if ph.contact:
            out.append((j, (at, at + ph.duration0)))
        at += ph.duration0
    return out


class _Memo:
    """Single-entry cache keyed on the variable vector."""

    def __init__(self):
        self.key = None
        self.value = None

    def get(self, x, compute):
        key = x.tobytes()
        if key != self.key:
            self.value = compute(x)
            self.key = key
        return self.value


class ReducedProblem:
    # foot joints are ordered (left toe, left heel, right toe, right heel)
    FOOT_SIDE = (0, 0, 1, 1)
    FOOT_PAIRS = ((0, 1), (2, 3))

    def __init__(self, layout, targets, weights=None):
        self.layout = layout
        self.tg = targets
        self.w = weights or ReducedWeights()
        self.up = targets.floor.normal
        self.tans = targets.floor.tangents
        self.floor_h = float(targets.floor.normal @ targets.floor.point)
        self.gravity = -GRAVITY * self.up

        total = layout.total
        # dynamics samples ride the COM knot grid (~DYN_DT, spans [0, total])
        self.dyn_times = np.arange(layout.n_com + 1) * layout.com_delta
        self.kin_times = np.arange(0.0, total + 1e-9, KIN_DT)
        self.cone_samples = []          # (joint, phase, segment, at_mid)
        for i, phases in enumerate(layout.joint_phases):
            for j, ph in enumerate(phases):
                if not ph.contact:
                    continue
                for k in range(ph.n_segs + 1):
                    self.cone_samples.append((i, j, k, False))
                for k in range(ph.n_segs):
                    self.cone_samples.append((i, j, k, True))
        self.stance_consts = [(i, j) for i, phases in enumerate(layout.joint_phases)
                              for j, ph in enumerate(phases) if ph.contact]

        # Rigid foot length. When toe and heel are both planted the sampled
        # rows all collapse onto the two stance constants, which would give
        # duplicated equality rows and a singular constraint Jacobian, so
        # those intervals get one row per overlapping stance pair instead.
        # Swing samples keep the 0.08 s grid (membership frozen at the
        # initial durations).
        d0_by_joint = [np.array([ph.duration0 for ph in phases])
                       for phases in layout.joint_phases]

        def in_contact(i, t):
            j, _ = layout._locate_phase(d0_by_joint[i], t)
            return layout.joint_phases[i][j].contact

        self.footlen_const = []
        self.footlen_times = []
        for toe, heel in self.FOOT_PAIRS:
            for jt, (a0, a1) in _contact_intervals(layout.joint_phases[toe]):
                for jh, (b0, b1) in _contact_intervals(layout.joint_phases[heel]):
                    if min(a1, b1) - max(a0, b0) > 1e-9:
                        self.footlen_const.append(
                            (layout.joint_phases[toe][jt].const_col,
                             layout.joint_phases[heel][jh].const_col))
            for t in self.kin_times:
                if not (in_contact(toe, t) and in_contact(heel, t)):
                    self.footlen_times.append((toe, heel, t))
        n_flen = len(self.footlen_const) + len(self.footlen_times)

        nd, nk = len(self.dyn_times), len(self.kin_times)
        self.n_rows = (3 * nd + 3 * nd + 4 * nk + n_flen
                       + len(self.stance_consts) + 4 * nd
                       + 5 * len(self.cone_samples))
        lb = np.zeros(self.n_rows)
        ub = np.zeros(self.n_rows)
        at = 6 * nd
        at += 4 * nk
        lb[6 * nd:at] = -np.inf          # leg reach: <= 0
        at += n_flen                     # foot length: == 0
        at += len(self.stance_consts)    # on floor: == 0
        ub[at:at + 4 * nd] = np.inf      # above floor: >= 0
        at += 4 * nd
        ub[at:at + 5 * len(self.cone_samples)] = np.inf
        cone = np.arange(len(self.cone_samples))
        ub[at + 5 * cone] = FORCE_MAX    # 0 <= f.n <= FORCE_MAX

        # Nondimensionalise the rows so the solver sees everything at O(1):
        # force rows in units of body weight, torque rows in units of body
        # weight times leg length.  Geometry rows are already metre-scale.
        # Without this the Newton system mixes magnitudes ~1e3 apart and the
        # interior point stalls with a collapsed trust region.
        weight = targets.mass * GRAVITY
        scale = np.ones(self.n_rows)
        scale[:3 * nd] = 1.0 / weight
        scale[3 * nd:6 * nd] = 1.0 / (weight * targets.l_leg)
        scale[self.n_rows - 5 * len(self.cone_samples):] = 1.0 / weight
        self.row_scale = scale
        self.c_lb, self.c_ub = lb * scale, ub * scale

        self._c_memo = _Memo()
        self._o_memo = _Memo()
        self._hess = None
        self._hess_key = None

    # -- constraint assembly ----------------------------------------------

    def _constraints(self, x):
        lay, tg = self.layout, self.tg
        m = tg.mass
        rows_i, cols_i, vals_i = [], [], []
        vals = np.zeros(self.n_rows)

        def put_vec(r0, entries_diag, entries_dur, scale=1.0):
            for col, w in entries_diag:
                for a in range(3):
                    rows_i.append(r0 + a)
                    cols_i.append(col + a)
                    vals_i.append(scale * w)
            for col, vec in entries_dur:
                for a in range(3):
                    rows_i.append(r0 + a)
                    cols_i.append(col)
                    vals_i.append(scale * vec[a])

        def put_mat(r0, M, entries_diag, entries_dur):
            """Rows r0..r0+2 += M @ d(value); M is 3x3."""
            for col, w in entries_diag:
                for a in range(3):
                    for b in range(3):
                        if M[a, b] != 0.0:
                            rows_i.append(r0 + a)
                            cols_i.append(col + b)
                            vals_i.append(w * M[a, b])
            for col, vec in entries_dur:
                mv = M @ vec
                for a in range(3):
                    rows_i.append(r0 + a)
                    cols_i.append(col)
                    vals_i.append(mv[a])

        def put_row(r0, entries_diag, entries_dur, direction):
            """Single row r0 += direction . d(value)."""
            for col, w in entries_diag:
                for a in range(3):
                    rows_i.append(r0)
                    cols_i.append(col + a)
                    vals_i.append(w * direction[a])
            for col, vec in entries_dur:
                rows_i.append(r0)
                cols_i.append(col)
                vals_i.append(direction @ vec)

        at = 0
        # linear dynamics
        for t in self.dyn_times:
            acc, acc_d = lay.com_state(x, 0, t, 2)
            h = m * (acc - self.gravity)
            put_vec(at, acc_d, [], scale=m)
            for i in range(4):
                f, fd, fdur = lay.foot_force(x, i, t)
                h -= f
                put_vec(at, fd, fdur, scale=-1.0)
            vals[at:at + 3] = h
            at += 3

        # angular dynamics
        for t in self.dyn_times:
            at = self._angular_rows(x, t, at, rows_i, cols_i, vals_i, vals,
                                    put_vec, put_mat)

        # leg reach
        for t in self.kin_times:
            r, r_d = lay.com_state(x, 0, t)
            th, th_d = lay.com_state(x, 1, t)
            R = euler_to_matrix(th)
            dR = euler_to_matrix_grad(th)
            off = tg.interp(tg.hip_offsets, t)
            for i in range(4):
                o = off[self.FOOT_SIDE[i]]
                hip = r + R @ o
                p, p_d, p_dur = lay.foot_pos(x, i, t)
                d = p - hip
                vals[at] = d @ d - tg.l_leg ** 2
                put_row(at, p_d, p_dur, 2.0 * d)
                put_row(at, r_d, [], -2.0 * d)
                dhip = np.einsum("abc,b->ac", dR, o)    # 3 x 3, cols = angles
                grad_th = -2.0 * (d @ dhip)
                for col, w in th_d:
                    for c in range(3):
                        rows_i.append(at)
                        cols_i.append(col + c)
                        vals_i.append(w * grad_th[c])
                at += 1

        # rigid foot length
        for ct, ch in self.footlen_const:
            d = x[ct:ct + 3] - x[ch:ch + 3]
            vals[at] = d @ d - tg.l_foot ** 2
            for a in range(3):
                rows_i.extend((at, at))
                cols_i.extend((ct + a, ch + a))
                vals_i.extend((2.0 * d[a], -2.0 * d[a]))
            at += 1
        for toe, heel, t in self.footlen_times:
            pt, pt_d, pt_dur = lay.foot_pos(x, toe, t)
            ph_, ph_d, ph_dur = lay.foot_pos(x, heel, t)
            d = pt - ph_
            vals[at] = d @ d - tg.l_foot ** 2
            put_row(at, pt_d, pt_dur, 2.0 * d)
            put_row(at, ph_d, ph_dur, -2.0 * d)
            at += 1

        # stance constants on the floor
        for i, j in self.stance_consts:
            c = self.layout.joint_phases[i][j].const_col
            vals[at] = self.up @ x[c:c + 3] - self.floor_h
            for a in range(3):
                rows_i.append(at)
                cols_i.append(c + a)
                vals_i.append(self.up[a])
            at += 1

        # feet on or above the floor
        for t in self.dyn_times:
            for i in range(4):
                p, p_d, p_dur = lay.foot_pos(x, i, t)
                vals[at] = self.up @ p - self.floor_h
                put_row(at, p_d, p_dur, self.up)
                at += 1

        # friction cones
        for i, j, k, at_mid in self.cone_samples:
            f, f_d, f_dur = lay.force_knot_mid(x, i, j, k, at_mid)
            fn = self.up @ f
            vals[at] = fn
            put_row(at, f_d, f_dur, self.up)
            for tdir in self.tans:
                ft = tdir @ f
                vals[at + 1] = FRICTION_RATIO * fn - ft
                put_row(at + 1, f_d, f_dur, FRICTION_RATIO * self.up - tdir)
                vals[at + 2] = FRICTION_RATIO * fn + ft
                put_row(at + 2, f_d, f_dur, FRICTION_RATIO * self.up + tdir)
                at += 2
            at += 1

        assert at == self.n_rows
        jac = sparse.coo_matrix(
            (vals_i, (rows_i, cols_i)), shape=(self.n_rows, self.layout.n_vars))
        vals = vals * self.row_scale
        jac = jac.tocsr().multiply(self.row_scale[:, None]).tocsr()
        return vals, jac

    def _angular_rows(self, x, t, at, rows_i, cols_i, vals_i, vals,
                      put_vec, put_mat):
        lay, tg = self.layout, self.tg
        th, th_d = lay.com_state(x, 1, t, 0)
        thv, thv_d = lay.com_state(x, 1, t, 1)
        tha, tha_d = lay.com_state(x, 1, t, 2)
        r, r_d = lay.com_state(x, 0, t, 0)

        A = euler_rotation_axes(th)
        G = euler_rotation_axes_grad(th)
        H = euler_rotation_axes_hess(th)
        R = euler_to_matrix(th)
        dR = euler_to_matrix_grad(th)
        I_b = tg.interp(tg.I_b, t)
        I_w = R @ I_b @ R.T

        w_vec = A @ thv
        B = np.einsum("ick,k->ic", G, thv)
        wdot = A @ tha + B @ thv
        Iw_w = I_w @ w_vec
        h = I_w @ wdot + np.cross(w_vec, Iw_w)

        # derivative blocks wrt theta value / rate / accel
        M_th = np.empty((3, 3))
        M_tv = np.empty((3, 3))
        for c in range(3):
            dIw = dR[..., c] @ I_b @ R.T + R @ I_b @ dR[..., c].T
            dw = G[:, :, c] @ thv
            dwdot = G[:, :, c] @ tha + np.einsum("ick,k->ic", H[..., c], thv) @ thv
            M_th[:, c] = (dIw @ wdot + I_w @ dwdot
                          + np.cross(dw, Iw_w) + np.cross(w_vec, dIw @ w_vec + I_w @ dw))
            dw_v = A[:, c]
            dwdot_v = G[:, :, c] @ thv + B[:, c]
            M_tv[:, c] = (I_w @ dwdot_v + np.cross(dw_v, Iw_w)
                          + np.cross(w_vec, I_w @ dw_v))
        M_ta = I_w @ A

        put_mat(at, M_th, th_d, [])
        put_mat(at, M_tv, thv_d, [])
        put_mat(at, M_ta, tha_d, [])

        sum_skew_f = np.zeros((3, 3))
        for i in range(4):
            f, f_d, f_dur = lay.foot_force(x, i, t)
            p, p_d, p_dur = lay.foot_pos(x, i, t)
            d = r - p
            h -= np.cross(f, d)
            put_mat(at, skew(d), f_d, f_dur)      # d(-f x d)/df = skew(d)
            put_mat(at, skew(f), p_d, p_dur)      # d(-f x d)/dp = skew(f)
            sum_skew_f += skew(f)
        put_mat(at, -sum_skew_f, r_d, [])         # -f x dr

        vals[at:at + 3] = h
        at += 3
        return at

    # -- public constraint interface --------------------------------------

    def constraints(self, x):
        return self._c_memo.get(np.asarray(x, dtype=float), self._constraints)

    def constraint_fun(self, x):
        return self.constraints(x)[0]

    def constraint_jac(self, x):
        return self.constraints(x)[1]

    # -- objective ---------------------------------------------------------

    def _sample_terms(self, x):
        """Yield (weight, value, target, diag, dur) for every tracking term."""
        lay, tg, w = self.layout, self.tg, self.w
        zero = np.zeros(3)
        for fi, t in enumerate(tg.times):
            v, d = lay.com_state(x, 0, t, 0)
            yield w.data_r, v, tg.r[fi], d, ()
            v, d = lay.com_state(x, 1, t, 0)
            yield w.data_theta, v, tg.theta[fi], d, ()
            v, d = lay.com_state(x, 0, t, 1)
            yield w.vel_r, v, zero, d, ()
            v, d = lay.com_state(x, 1, t, 1)
            yield w.vel_theta, v, zero, d, ()
            v, d = lay.com_state(x, 0, t, 2)
            yield w.acc, v, zero, d, ()
            v, d = lay.com_state(x, 1, t, 2)
            yield w.acc, v, zero, d, ()
            for i in range(4):
                v, d, du = lay.foot_pos(x, i, t, 0)
                yield w.data_foot, v, tg.feet[fi, i], d, du
                v, d, du = lay.foot_pos(x, i, t, 1)
                yield w.vel_foot, v, zero, d, du
                v, d, du = lay.foot_pos(x, i, t, 2)
                yield w.acc, v, zero, d, du

    def _knot_hessian(self, x):
        """Gauss-Newton Hessian over the spline-knot columns.

        The knot weights depend on the durations only, so this is rebuilt
        just when the durations change. Curvature coupling into the
        duration columns is left to the trust region; only the soft
        duration prior contributes there.
        """
        lay = self.layout
        hrows, hcols, hvals = [], [], []
        for weight, _v, _t, diag, _dur in self._sample_terms(x):
            for ci, wi in diag:
                for cj, wj in diag:
                    v = 2.0 * weight * wi * wj
                    for a in range(3):
                        hrows.append(ci + a)
                        hcols.append(cj + a)
                        hvals.append(v)
        dur_cols = np.arange(lay.dur_base, lay.n_vars)
        hrows.extend(dur_cols)
        hcols.extend(dur_cols)
        hvals.extend(np.full(len(dur_cols), 2.0 * self.w.dur))
        return sparse.coo_matrix((hvals, (hrows, hcols)),
                                 shape=(lay.n_vars, lay.n_vars)).tocsr()

    def _objective(self, x):
        lay = self.layout
        dur_key = x[lay.dur_base:].tobytes()
        if dur_key != self._hess_key:
            self._hess = self._knot_hessian(x)
            self._hess_key = dur_key
        grad = np.zeros(lay.n_vars)
        total = 0.0
        for weight, value, target, diag, dur in self._sample_terms(x):
            res = value - target
            total += weight * (res @ res)
            tw = 2.0 * weight
            for col, wgt in diag:
                grad[col:col + 3] += (tw * wgt) * res
            for col, vec in dur:
                grad[col] += tw * (res @ vec)

        d0 = lay.durations0()
        dur_cols = np.arange(lay.dur_base, lay.n_vars)
        res = x[dur_cols] - d0
        total += self.w.dur * (res @ res)
        grad[dur_cols] += 2.0 * self.w.dur * res
        return total, grad, self._hess

    def objective(self, x):
        return self._o_memo.get(np.asarray(x, dtype=float), self._objective)

    def objective_fun(self, x):
        return self.objective(x)[0]

    def objective_grad(self, x):
        return self.objective(x)[1]

    def objective_hess(self, x):
        return self.objective(x)[2]

    def objective_breakdown(self, x):
        """Named objective terms: tracking, smoothness, duration prior."""
        lay, tg, w = self.layout, self.tg, self.w
        out = {"data": 0.0, "velocity": 0.0, "acceleration": 0.0}
        for fi, t in enumerate(tg.times):
            for which, wd, tgt in ((0, w.data_r, tg.r[fi]),
                                   (1, w.data_theta, tg.theta[fi])):
                res = lay.com_state(x, which, t, 0)[0] - tgt
                out["data"] += wd * (res @ res)
                v = lay.com_state(x, which, t, 1)[0]
                out["velocity"] += (w.vel_r if which == 0 else w.vel_theta) * (v @ v)
                a = lay.com_state(x, which, t, 2)[0]
                out["acceleration"] += w.acc * (a @ a)
            for i in range(4):
                res = lay.foot_pos(x, i, t, 0)[0] - tg.feet[fi, i]
                out["data"] += w.data_foot * (res @ res)
                v = lay.foot_pos(x, i, t, 1)[0]
                out["velocity"] += w.vel_foot * (v @ v)
                a = lay.foot_pos(x, i, t, 2)[0]
                out["acceleration"] += w.acc * (a @ a)
        res = x[lay.dur_base:] - lay.durations0()
        out["duration"] = float(w.dur * (res @ res))
        return out

    # -- reporting ---------------------------------------------------------

    def violation_by_group(self, x):
        """Max violation of each constraint group at x."""
        vals = self.constraint_fun(x)
        over = np.maximum(vals - self.c_ub, 0.0) + np.maximum(self.c_lb - vals, 0.0)
        nd, nk = len(self.dyn_times), len(self.kin_times)
        n_flen = len(self.footlen_const) + len(self.footlen_times)
        groups = [("dynamics_linear", 3 * nd), ("dynamics_angular", 3 * nd),
                  ("leg_reach", 4 * nk), ("foot_length", n_flen),
                  ("stance_on_floor", len(self.stance_consts)),
                  ("above_floor", 4 * nd),
                  ("force_cone", 5 * len(self.cone_samples))]
        out = {}
        at = 0
        for name, size in groups:
            out[name] = float(over[at:at + size].max()) if size else 0.0
            at += size
        return out
