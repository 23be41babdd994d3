import sys
import time

import numpy as np

from physmocap.core.kinematics import compute_com_inertia
from physmocap.physopt.problem import targets_from_kinematic
from physmocap.physopt.solve import solve_reduced
from physmocap.synth.generate import generate
from physmocap.synth.scripts import MotionScript

kind = sys.argv[1] if len(sys.argv) > 1 else "hop"
maxit = int(sys.argv[2]) if len(sys.argv) > 2 else 500

PARAMS = {
    "hop": dict(flight_time=0.3, push_time=0.5, land_time=0.5, tuck=0.25),
    "jump": dict(flight_time=0.4, push_time=0.5, land_time=0.5, tuck=0.35),
}
script = MotionScript(name=kind, kind=kind, duration=2.0,
                      mass_override="upper_body", params=PARAMS.get(kind, {}))
clip = generate(script, seed=3)
states = compute_com_inertia(clip.motion)
targets = targets_from_kinematic(clip.motion, states, clip.floor)

t0 = time.perf_counter()
traj, report, problem = solve_reduced(
    targets, clip.contacts, max_iters=maxit, verbose=0)
print(f"total {time.perf_counter() - t0:.1f}s  n_vars={traj.layout.n_vars}")
print(report.summary())
print("converged:", report.converged)

times = np.arange(clip.motion.n_frames) / clip.motion.fps
out = traj.sample(times)
print("com err", np.abs(out["r"] - targets.r).max())
print("feet err", np.abs(out["feet"] - targets.feet).max())
forces = out["forces"]
in_flight = ~clip.contacts.labels
print("flight |f| max", np.abs(forces[in_flight]).max() if in_flight.any() else 0.0)
