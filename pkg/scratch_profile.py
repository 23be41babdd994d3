import cProfile
import pstats
import time

import numpy as np

from physmocap.core.kinematics import compute_com_inertia
from physmocap.physopt.problem import ReducedProblem, targets_from_kinematic
from physmocap.physopt.solve import initial_guess, _run_stage
from physmocap.physopt.trajectory import TrajectoryLayout
from physmocap.synth.generate import generate
from physmocap.synth.scripts import MotionScript

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

t0 = time.perf_counter()
for _ in range(5):
    problem._c_memo = type(problem._c_memo)()
    problem.constraints(x0 + 1e-9 * np.random.default_rng(0).normal(size=x0.size))
print(f"constraints: {(time.perf_counter() - t0) / 5 * 1e3:.1f} ms/call")

t0 = time.perf_counter()
for _ in range(5):
    problem._o_memo = type(problem._o_memo)()
    problem.objective(x0 + 1e-9 * np.random.default_rng(1).normal(size=x0.size))
print(f"objective:   {(time.perf_counter() - t0) / 5 * 1e3:.1f} ms/call")

pr = cProfile.Profile()
pr.enable()
_run_stage(problem, x0, "dynamics", 40, 0)
pr.disable()
stats = pstats.Stats(pr)
stats.sort_stats("cumulative").print_stats(18)
