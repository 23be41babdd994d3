"""Feasibility probe: pin COM position knots at the fit, solve the rest."""
import sys
import time

import numpy as np
from scipy.optimize import NonlinearConstraint, minimize

from physmocap.core.kinematics import compute_com_inertia
from physmocap.physopt.problem import ReducedProblem, targets_from_kinematic
from physmocap.physopt.solve import _variable_bounds, initial_guess
from physmocap.physopt.trajectory import TrajectoryLayout
from physmocap.synth.generate import generate
from physmocap.synth.scripts import MotionScript

maxit = int(sys.argv[1]) if len(sys.argv) > 1 else 300

script = MotionScript(name="hop", kind="hop", duration=2.0,
                      mass_override="upper_body",
                      params=dict(flight_time=0.3, push_time=0.5,
                                  land_time=0.5, tuck=0.25))
clip = generate(script, seed=3)
states = compute_com_inertia(clip.motion)
targets = targets_from_kinematic(clip.motion, states, clip.floor)
layout = TrajectoryLayout(clip.contacts)
problem = ReducedProblem(layout, targets)
x0 = initial_guess(problem)

print("viol at init:", {k: f"{v:.2e}" for k, v in
                        problem.violation_by_group(x0).items()})

bounds = _variable_bounds(problem, "dynamics")
lb, ub = bounds.lb.copy(), bounds.ub.copy()
for which in (0, 1):
    for k in range(layout.n_com + 1):
        pc, _ = layout.com_knot_cols(which, k)
        lb[pc:pc + 3] = ub[pc:pc + 3] = x0[pc:pc + 3]
bounds.lb, bounds.ub = lb, ub

nlc = NonlinearConstraint(problem.constraint_fun, problem.c_lb, problem.c_ub,
                          jac=problem.constraint_jac)
t0 = time.perf_counter()
res = minimize(problem.objective_fun, x0, jac=problem.objective_grad,
               hess=problem.objective_hess, method="trust-constr",
               constraints=[nlc], bounds=bounds,
               options={"maxiter": maxit, "gtol": 1e-6, "xtol": 1e-10})
print(f"{time.perf_counter() - t0:.1f}s iters={res.niter} status={res.status}")
print("obj", res.fun, "constr viol", res.constr_violation)
print("viol by group:", {k: f"{v:.2e}" for k, v in
                         problem.violation_by_group(res.x).items()})
print("terms:", problem.objective_breakdown(res.x))
np.save("scratch_feas_x.npy", res.x)
