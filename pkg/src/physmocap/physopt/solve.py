"""Staged solve of the reduced-body trajectory optimization.

Stage "fit" is a linear least-squares fill-in of the spline knots against
the kinematic targets (one sparse factorization; the tracking objective is
quadratic in the knots at fixed durations), plus a static force guess that
distributes the net contact wrench between the feet in contact. Stage
"dynamics" runs the full nonlinear program with the contact durations
clamped; stage
"durations" releases them inside bounds, keeping the result only if it is
at least as feasible and strictly better.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint, NonlinearConstraint, minimize
from scipy.sparse.linalg import splu

from ..core.rotation import (euler_rotation_axes, euler_rotation_axes_grad,
                             euler_to_matrix, skew)
from .problem import FORCE_MAX, ReducedProblem
from .trajectory import CentroidalTrajectory, TrajectoryLayout

VIOLATION_TOL = 1e-6
MIN_PHASE_FRAMES = 2


@dataclass
class StageReport:
    name: str
    objective: float
    violations: dict
    n_iters: int
    status: int
    success: bool
    wall_time: float

    @property
    def max_violation(self):
        return max(self.violations.values()) if self.violations else 0.0


@dataclass
class PhysOptReport:
    stages: list = field(default_factory=list)
    objective_terms: dict = field(default_factory=dict)

    @property
    def max_violation(self):
        return self.stages[-1].max_violation if self.stages else np.inf

    @property
    def converged(self):
        return bool(self.stages and self.stages[-1].success
                    and self.max_violation < VIOLATION_TOL)

    def summary(self):
        lines = []
        for st in self.stages:
            lines.append(f"{st.name:9s} obj={st.objective:10.4f} "
                         f"viol={st.max_violation:8.2e} iters={st.n_iters:4d} "
                         f"status={st.status} {st.wall_time:6.1f}s")
        terms = " ".join(f"{k}={v:.4f}" for k, v in self.objective_terms.items())
        lines.append(f"terms: {terms}")
        return "\n".join(lines)


def _phase_frame_ranges(phases):
    """[(first_frame, n_frames)] for each phase of one joint."""
    out = []
    at = 0
    for ph in phases:
        out.append((at, ph.n_frames))
        at += ph.n_frames
    return out


def initial_guess(problem):
    """Linear least-squares knot fit plus a static contact-force guess."""
    lay, tg = problem.layout, problem.tg
    up, floor_h = problem.up, problem.floor_h
    x = np.zeros(lay.n_vars)
    d0 = lay.durations0()
    x[lay.dur_base:] = d0

    # stance constants: phase-mean foot target projected onto the floor
    for i, phases in enumerate(lay.joint_phases):
        for (first, count), ph in zip(_phase_frame_ranges(phases), phases):
            if not ph.contact:
                continue
            c = tg.feet[first:first + count, i].mean(axis=0)
            c -= (up @ c - floor_h) * up
            x[ph.const_col:ph.const_col + 3] = c

    # flight knots: start from the interpolated foot targets
    for i, phases in enumerate(lay.joint_phases):
        start = 0.0
        for ph in phases:
            if not ph.contact:
                n = ph.n_segs
                delta = ph.duration0 / n
                for k in range(n + 1):
                    t = min(start + k * delta, tg.times[-1])
                    if ph.pos_cols[k] >= 0 and ph.vel_cols[k] >= 0:
                        pc, vc = ph.pos_cols[k], ph.vel_cols[k]
                        x[pc:pc + 3] = tg.interp(tg.feet, t)[i]
                        x[vc:vc + 3] = 0.0
            start += ph.duration0

    # COM knots: sample the targets, then one exact Newton step on the
    # quadratic tracking objective over the free knot columns
    for k in range(lay.n_com + 1):
        t = min(k * lay.com_delta, tg.times[-1])
        for which, track in ((0, tg.r), (1, tg.theta)):
            pc, vc = lay.com_knot_cols(which, k)
            x[pc:pc + 3] = tg.interp(track, t)
    for which, bv in ((0, tg.r_bound_vel), (1, tg.theta_bound_vel)):
        for k, v in ((0, bv[0]), (lay.n_com, bv[1])):
            vc = lay.com_knot_cols(which, k)[1]
            x[vc:vc + 3] = v

    free = np.ones(lay.n_vars, dtype=bool)
    free[lay.dur_base:] = False
    for i, phases in enumerate(lay.joint_phases):
        for ph in phases:
            if ph.contact:
                free[ph.const_col:ph.const_col + 3] = False
                free[ph.force_col:ph.force_col + 6 * (ph.n_segs + 1)] = False
    for which in (0, 1):
        for k in (0, lay.n_com):
            vc = lay.com_knot_cols(which, k)[1]
            free[vc:vc + 3] = False
    cols = np.flatnonzero(free)

    _, grad, hess = problem.objective(x)
    sub = hess[cols][:, cols].tocsc()
    sub = sub + sparse.eye(len(cols), format="csc") * 1e-9
    x[cols] += splu(sub).solve(-grad[cols])

    # static forces: distribute the net contact wrench of the fitted motion
    # between the feet in contact (least-squares over force and torque
    # balance), each force clipped into the friction cone
    mass, grav = tg.mass, problem.gravity
    starts = [np.concatenate([[0.0], np.cumsum([p.duration0 for p in phases])])
              for phases in lay.joint_phases]

    def split_forces(t):
        ids = [ii for ii in range(4)
               if lay.joint_phases[ii][lay._locate_phase(
                   lay.durations(x, ii), t)[0]].contact]
        if not ids:
            return {}
        acc = lay.com_state(x, 0, t, 2)[0]
        r = lay.com_state(x, 0, t, 0)[0]
        A = np.zeros((6, 3 * len(ids)))
        for k, ii in enumerate(ids):
            p = lay.foot_pos(x, ii, t)[0]
            A[:3, 3 * k:3 * k + 3] = np.eye(3)
            A[3:, 3 * k:3 * k + 3] = skew(p - r)
        rhs = np.concatenate([mass * (acc - grav), _torque_demand(problem, x, t)])
        sol = np.linalg.lstsq(A, rhs, rcond=None)[0]
        return {ii: sol[3 * k:3 * k + 3] for k, ii in enumerate(ids)}

    for i, phases in enumerate(lay.joint_phases):
        for j, ph in enumerate(phases):
            if not ph.contact:
                continue
            delta = ph.duration0 / ph.n_segs
            for k in range(ph.n_segs + 1):
                t = starts[i][j] + k * delta
                f = split_forces(t).get(i, np.zeros(3))
                fn = np.clip(up @ f, 0.0, 0.9 * FORCE_MAX)
                ft = np.array([tdir @ f for tdir in problem.tans])
                ft = np.clip(ft, -0.45 * fn, 0.45 * fn)
                f = fn * up + ft[0] * problem.tans[0] + ft[1] * problem.tans[1]
                b = ph.force_col + 6 * k
                x[b:b + 3] = f
                x[b + 3:b + 6] = 0.0
    return x


def _torque_demand(problem, x, t):
    """Rate of angular momentum of the fitted spline state at time t."""
    lay, tg = problem.layout, problem.tg
    th = lay.com_state(x, 1, t, 0)[0]
    thv = lay.com_state(x, 1, t, 1)[0]
    tha = lay.com_state(x, 1, t, 2)[0]
    A = euler_rotation_axes(th)
    G = euler_rotation_axes_grad(th)
    R = euler_to_matrix(th)
    I_w = R @ tg.interp(tg.I_b, t) @ R.T
    w = A @ thv
    wdot = A @ tha + np.einsum("ick,k->ic", G, thv) @ thv
    return I_w @ wdot + np.cross(w, I_w @ w)


def _variable_bounds(problem, stage):
    lay, tg = problem.layout, problem.tg
    lb = np.full(lay.n_vars, -np.inf)
    ub = np.full(lay.n_vars, np.inf)
    for which, bv in ((0, tg.r_bound_vel), (1, tg.theta_bound_vel)):
        for k, v in ((0, bv[0]), (lay.n_com, bv[1])):
            vc = lay.com_knot_cols(which, k)[1]
            lb[vc:vc + 3] = ub[vc:vc + 3] = v
    d0 = lay.durations0()
    cols = np.arange(lay.dur_base, lay.n_vars)
    if stage == "dynamics":
        lb[cols] = ub[cols] = d0
    else:
        lb[cols] = np.maximum(0.5 * d0, MIN_PHASE_FRAMES / lay.fps)
        ub[cols] = 2.0 * d0
    return Bounds(lb, ub)


def _duration_sum_constraint(layout):
    rows, cols = [], []
    for i, dcols in enumerate(layout.dur_cols):
        rows.extend([i] * len(dcols))
        cols.extend(dcols)
    A = sparse.coo_matrix((np.ones(len(cols)), (rows, cols)),
                          shape=(4, layout.n_vars)).tocsr()
    return LinearConstraint(A, layout.total, layout.total)


def _run_stage(problem, x0, stage, max_iters, verbose, callback=None):
    nlc = NonlinearConstraint(problem.constraint_fun, problem.c_lb,
                              problem.c_ub, jac=problem.constraint_jac)
    constraints = [nlc]
    if stage == "durations":
        # redundant while the durations are clamped by their bounds
        constraints.append(_duration_sum_constraint(problem.layout))
    t0 = time.perf_counter()
    res = minimize(problem.objective_fun, x0, jac=problem.objective_grad,
                   hess=problem.objective_hess, method="trust-constr",
                   constraints=constraints,
                   bounds=_variable_bounds(problem, stage),
                   callback=callback,
                   options={"maxiter": max_iters, "gtol": 1e-6, "xtol": 1e-10,
                            "verbose": verbose})
    report = StageReport(
        name=stage, objective=float(res.fun),
        violations=problem.violation_by_group(res.x),
        n_iters=int(res.niter), status=int(res.status),
        success=bool(res.status in (1, 2)), wall_time=time.perf_counter() - t0)
    return res.x, report


def solve_reduced(targets, contacts, weights=None, max_iters=3000,
                  duration_stage=True, verbose=0, collect_iterates=None,
                  layout=None):
    """Run the staged trajectory optimization.

    Returns (CentroidalTrajectory, report, problem). If collect_iterates
    is a list, solver iterates are appended to it as (x, stage-name) pairs.
    """
    if layout is None:
        layout = TrajectoryLayout(contacts)
    problem = ReducedProblem(layout, targets, weights)
    x0 = initial_guess(problem)

    callback = None
    if collect_iterates is not None:
        stage_name = ["fit"]

        def callback(xk, _state):
            collect_iterates.append((np.array(xk), stage_name[0]))
            return False

    report = PhysOptReport()
    report.stages.append(StageReport(
        name="fit", objective=problem.objective_fun(x0),
        violations=problem.violation_by_group(x0),
        n_iters=0, status=0, success=True, wall_time=0.0))

    if collect_iterates is not None:
        stage_name[0] = "dynamics"
    x, st = _run_stage(problem, x0, "dynamics", max_iters, verbose, callback)
    report.stages.append(st)

    if duration_stage:
        if collect_iterates is not None:
            stage_name[0] = "durations"
        x3, st3 = _run_stage(problem, x, "durations", max_iters, verbose, callback)
        v2, v3 = st.max_violation, st3.max_violation
        accept = (v3 <= VIOLATION_TOL < v2
                  or (v3 <= max(VIOLATION_TOL, v2) and st3.objective < st.objective))
        if accept:
            x = x3
            report.stages.append(st3)

    report.objective_terms = problem.objective_breakdown(x)
    return CentroidalTrajectory(layout, x), report, problem
