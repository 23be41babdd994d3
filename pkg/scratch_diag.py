import sys
import time

import numpy as np

from physmocap.core.kinematics import compute_com_inertia
from physmocap.physopt.problem import targets_from_kinematic
from physmocap.physopt.solve import solve_reduced
from physmocap.synth.generate import generate
from physmocap.synth.scripts import MotionScript

maxit = int(sys.argv[1]) if len(sys.argv) > 1 else 1200
dur_stage = len(sys.argv) <= 2

script = MotionScript(name="hop", kind="hop", duration=2.0,
                      mass_override="upper_body",
                      params=dict(flight_time=0.3, push_time=0.5,
                                  land_time=0.5, tuck=0.25))
clip = generate(script, seed=3)
states = compute_com_inertia(clip.motion)
targets = targets_from_kinematic(clip.motion, states, clip.floor)

t0 = time.perf_counter()
traj, report, problem = solve_reduced(
    targets, clip.contacts, max_iters=maxit, duration_stage=dur_stage)
print(f"total {time.perf_counter() - t0:.1f}s n_vars={traj.layout.n_vars}")
print(report.summary())
print("converged:", report.converged)
print("viol by group:", {k: f"{v:.2e}" for k, v in
                         problem.violation_by_group(traj.x).items()})

lay = traj.layout
print("durations0 vs durations:")
for i in range(4):
    d0 = [f"{p.duration0:.3f}" for p in lay.joint_phases[i]]
    d1 = [f"{d:.3f}" for d in lay.durations(traj.x, i)]
    kinds = ["C" if p.contact else "F" for p in lay.joint_phases[i]]
    print(f"  joint{i} {list(zip(kinds, d0, d1))}")

times = np.arange(clip.motion.n_frames) / clip.motion.fps
out = traj.sample(times)
err = np.linalg.norm(out["r"] - targets.r, axis=1)
th_err = np.abs(out["theta"] - targets.theta).max(axis=1) if "theta" in out else None
print("com err profile (every 5th frame):")
for k in range(0, len(times), 5):
    print(f"  t={times[k]:.2f} err={err[k]:.3f}")
print("worst frame:", times[np.argmax(err)], err.max())
fe = np.linalg.norm(out["feet"] - targets.feet, axis=2).max(axis=1)
print("feet worst:", times[np.argmax(fe)], fe.max())
