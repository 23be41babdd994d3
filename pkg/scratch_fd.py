import numpy as np

from physmocap.core.kinematics import compute_com_inertia
from physmocap.physopt.problem import ReducedProblem, targets_from_kinematic
from physmocap.physopt.spline import (hermite_delta_partial, hermite_eval,
                                      hermite_weights)
from physmocap.physopt.trajectory import TrajectoryLayout
from physmocap.synth.generate import generate
from physmocap.synth.scripts import MotionScript

rng = np.random.default_rng(0)

# 1. hermite weights / delta partials vs direct eval
for order in range(3):
    x0, v0, x1, v1 = rng.normal(size=(4, 3))
    delta, u = 0.37, 0.21
    w = hermite_weights(u, delta, order)
    ref = hermite_eval(x0, v0, x1, v1, delta, u, order)
    got = w[0] * x0 + w[1] * v0 + w[2] * x1 + w[3] * v1
    print("hermite w", order, np.abs(ref - got).max())
    eps = 1e-7
    fd = (hermite_eval(x0, v0, x1, v1, delta + eps, u, order)
          - hermite_eval(x0, v0, x1, v1, delta - eps, u, order)) / (2 * eps)
    an = hermite_delta_partial(x0, v0, x1, v1, delta, u, order)
    print("hermite d", order, np.abs(fd - an).max())

# 2. problem FD on a hop clip
script = MotionScript(name="hop", kind="hop", duration=2.0)
clip = generate(script, seed=3)
states = compute_com_inertia(clip.motion)
targets = targets_from_kinematic(clip.motion, states, clip.floor)
layout = TrajectoryLayout(clip.contacts)
prob = ReducedProblem(layout, targets)
print("n_vars", layout.n_vars, "n_rows", prob.n_rows)

x = rng.normal(scale=0.3, size=layout.n_vars)
d0 = layout.durations0()
x[layout.dur_base:] = d0 * rng.uniform(0.9, 1.1, size=len(d0))

f0, g, H = prob.objective(x)
print("objective", f0)
eps = 1e-6
worst = 0.0
for _ in range(8):
    d = rng.normal(size=layout.n_vars)
    d /= np.linalg.norm(d)
    fd = (prob.objective_fun(x + eps * d) - prob.objective_fun(x - eps * d)) / (2 * eps)
    an = g @ d
    rel = abs(fd - an) / max(1.0, abs(fd))
    worst = max(worst, rel)
print("obj grad rel err", worst)

c0, J = prob.constraints(x)
worst = 0.0
for _ in range(8):
    d = rng.normal(size=layout.n_vars)
    d /= np.linalg.norm(d)
    fd = (prob.constraint_fun(x + eps * d) - prob.constraint_fun(x - eps * d)) / (2 * eps)
    an = J @ d
    rel = np.abs(fd - an).max() / max(1.0, np.abs(fd).max())
    worst = max(worst, rel)
print("con jac rel err", worst)
print(prob.violation_by_group(x))
