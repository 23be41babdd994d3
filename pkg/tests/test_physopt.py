"""Tests for the reduced-body trajectory optimization stack."""
import numpy as np
import pytest

from physmocap.core.kinematics import compute_com_inertia
from physmocap.physopt.problem import (ReducedProblem, targets_from_kinematic)
from physmocap.physopt.solve import initial_guess, solve_reduced
from physmocap.physopt.spline import (hermite_delta_partial, hermite_eval,
                                      hermite_weights, locate, segment_count)
from physmocap.physopt.trajectory import TrajectoryLayout
from physmocap.synth.generate import generate
from physmocap.synth.scripts import MotionScript


def test_hermite_weights_match_eval():
    rng = np.random.default_rng(0)
    for order in range(4):
        x0, v0, x1, v1 = rng.normal(size=(4, 3))
        delta, u = 0.37, 0.21
        w = hermite_weights(u, delta, order)
        ref = hermite_eval(x0, v0, x1, v1, delta, u, order)
        got = w[0] * x0 + w[1] * v0 + w[2] * x1 + w[3] * v1
        assert np.abs(ref - got).max() < 1e-12


def test_hermite_interpolates_knots():
    rng = np.random.default_rng(1)
    x0, v0, x1, v1 = rng.normal(size=(4, 3))
    delta = 0.52
    assert np.allclose(hermite_eval(x0, v0, x1, v1, delta, 0.0), x0)
    assert np.allclose(hermite_eval(x0, v0, x1, v1, delta, delta), x1)
    assert np.allclose(hermite_eval(x0, v0, x1, v1, delta, 0.0, 1), v0)
    assert np.allclose(hermite_eval(x0, v0, x1, v1, delta, delta, 1), v1)


def test_hermite_delta_partial_matches_fd():
    rng = np.random.default_rng(2)
    for order in range(3):
        x0, v0, x1, v1 = rng.normal(size=(4, 3))
        delta, u, eps = 0.41, 0.33, 1e-7
        fd = (hermite_eval(x0, v0, x1, v1, delta + eps, u, order)
              - hermite_eval(x0, v0, x1, v1, delta - eps, u, order)) / (2 * eps)
        an = hermite_delta_partial(x0, v0, x1, v1, delta, u, order)
        assert np.abs(fd - an).max() < 1e-6


def test_segment_count():
    assert segment_count(0.3) == 6
    assert segment_count(2.0) == 6
    assert segment_count(2.01) == 12
    assert segment_count(5.0) == 18


def test_locate_boundaries():
    k, u = locate(0.0, 0.1, 5)
    assert (k, u) == (0, 0.0)
    k, u = locate(0.1, 0.1, 5)
    assert k == 1 and abs(u) < 1e-12
    k, u = locate(0.5, 0.1, 5)
    assert k == 4 and abs(u - 0.1) < 1e-12


@pytest.fixture(scope="module")
def hop_clip():
    script = MotionScript(
        name="hop", kind="hop", duration=2.0, mass_override="upper_body",
        params=dict(flight_time=0.3, push_time=0.5, land_time=0.5, tuck=0.25))
    return generate(script, seed=3)


@pytest.fixture(scope="module")
def hop_setup(hop_clip):
    states = compute_com_inertia(hop_clip.motion)
    targets = targets_from_kinematic(hop_clip.motion, states, hop_clip.floor)
    layout = TrajectoryLayout(hop_clip.contacts)
    return layout, targets, hop_clip


def _random_x(layout, rng, dur_jitter=True):
    x = rng.normal(scale=0.3, size=layout.n_vars)
    d0 = layout.durations0()
    jit = rng.uniform(0.9, 1.1, size=len(d0)) if dur_jitter else 1.0
    x[layout.dur_base:] = d0 * jit
    return x


def test_layout_var_count(hop_setup):
    layout, _, _ = hop_setup
    assert layout.dur_base < layout.n_vars
    d0 = layout.durations0()
    for cols in layout.dur_cols:
        assert abs(d0[cols - layout.dur_base].sum() - layout.total) < 1e-12


def test_stance_track_is_constant(hop_setup):
    layout, _, _ = hop_setup
    rng = np.random.default_rng(3)
    x = _random_x(layout, rng, dur_jitter=False)
    ph = layout.joint_phases[0][0]
    assert ph.contact
    c = x[ph.const_col:ph.const_col + 3]
    for t in (0.0, 0.25 * ph.duration0, 0.9 * ph.duration0):
        v, _, _ = layout.foot_pos(x, 0, t)
        assert np.allclose(v, c)
        vel, _, _ = layout.foot_pos(x, 0, t, 1)
        assert np.allclose(vel, 0.0)


def test_flight_track_ties_to_stance(hop_setup):
    """Flight boundary knots read the neighbouring stance constants."""
    layout, _, _ = hop_setup
    rng = np.random.default_rng(4)
    x = _random_x(layout, rng, dur_jitter=False)
    phases = layout.joint_phases[0]
    j = next(j for j, p in enumerate(phases)
             if not p.contact and 0 < j < len(phases) - 1)
    t0 = sum(p.duration0 for p in phases[:j])
    before, _, _ = layout.foot_pos(x, 0, t0 - 1e-9)
    after, _, _ = layout.foot_pos(x, 0, t0)
    assert np.abs(before - after).max() < 1e-6
    t1 = t0 + phases[j].duration0
    before, _, _ = layout.foot_pos(x, 0, t1 - 1e-9)
    after, _, _ = layout.foot_pos(x, 0, t1)
    assert np.abs(before - after).max() < 1e-6


def test_flight_force_is_zero(hop_setup):
    layout, _, _ = hop_setup
    rng = np.random.default_rng(5)
    x = _random_x(layout, rng, dur_jitter=False)
    phases = layout.joint_phases[2]
    j = next(j for j, p in enumerate(phases) if not p.contact)
    t = sum(p.duration0 for p in phases[:j]) + 0.5 * phases[j].duration0
    f, diag, dur = layout.foot_force(x, 2, t)
    assert np.all(f == 0.0) and not diag and not dur


def _directional_fd(fun, x, d, eps=1e-6):
    return (fun(x + eps * d) - fun(x - eps * d)) / (2 * eps)


def test_track_eval_gradients_match_fd(hop_setup):
    """diag/duration entries of the track evaluations against FD."""
    layout, _, _ = hop_setup
    rng = np.random.default_rng(6)
    x = _random_x(layout, rng)
    times = [0.137, 0.513, 0.977, 1.391, 1.843]

    def check(evalfn):
        for t in times:
            for order in (0, 1, 2):
                _, diag, dur = evalfn(x, t, order)
                d = rng.normal(size=layout.n_vars)
                d /= np.linalg.norm(d)
                an = np.zeros(3)
                for col, w in diag:
                    an += w * d[col:col + 3]
                for col, vec in dur:
                    an += d[col] * vec
                fd = _directional_fd(lambda xx: evalfn(xx, t, order)[0], x, d)
                assert np.abs(fd - an).max() < 1e-5, (t, order)

    check(lambda xx, t, o: layout.com_state(xx, 0, t, o) + ([],))
    check(lambda xx, t, o: layout.com_state(xx, 1, t, o) + ([],))
    for i in range(4):
        check(lambda xx, t, o, i=i: layout.foot_pos(xx, i, t, o))
        check(lambda xx, t, o, i=i: layout.foot_force(xx, i, t, o))


def test_problem_gradients_match_fd(hop_setup):
    layout, targets, _ = hop_setup
    problem = ReducedProblem(layout, targets)
    rng = np.random.default_rng(7)
    x = _random_x(layout, rng)
    _, grad, _ = problem.objective(x)
    _, jac = problem.constraints(x)
    for _ in range(6):
        d = rng.normal(size=layout.n_vars)
        d /= np.linalg.norm(d)
        fd = _directional_fd(problem.objective_fun, x, d)
        assert abs(fd - grad @ d) / max(1.0, abs(fd)) < 1e-5
        fd = _directional_fd(problem.constraint_fun, x, d)
        err = np.abs(fd - jac @ d).max() / max(1.0, np.abs(fd).max())
        assert err < 1e-5


def _nudge_durations(problem, x, scale=1e-4):
    """Move phase boundaries off the constraint sample times.

    The track evaluations are only piecewise smooth in the durations; at a
    solver iterate with the durations still at their initial values, many
    sample times sit exactly on phase boundaries and a central difference
    would straddle the switch. A sub-millisecond duration offset moves
    every interior boundary clear of the sample grids without changing
    what is being tested.
    """
    lay = problem.layout
    x = np.array(x)
    for i, cols in enumerate(lay.dur_cols):
        if len(cols) < 2:
            continue
        d = scale * (1.0 + 0.3 * i)
        x[cols[0]] += d
        x[cols[-1]] -= d
    sample_times = np.concatenate(
        [problem.dyn_times, problem.kin_times, problem.tg.times])
    for i, cols in enumerate(lay.dur_cols):
        ends = np.cumsum(x[cols])[:-1]
        if len(ends):
            gap = np.abs(sample_times[:, None] - ends[None, :]).min()
            assert gap > 2e-5, "nudge failed to clear the sample grid"
    return x


def test_gradients_match_fd_at_solver_iterates(hop_setup):
    """First derivatives stay exact along the path of a real solve."""
    layout, targets, _ = hop_setup
    iterates = []
    solve_reduced(targets, None, max_iters=30, duration_stage=False,
                  collect_iterates=iterates, layout=layout)
    assert len(iterates) >= 20
    rng = np.random.default_rng(8)
    problem = ReducedProblem(layout, targets)
    step = max(1, len(iterates) // 20)
    checked = 0
    for xk, _stage in iterates[::step]:
        x = _nudge_durations(problem, xk)
        _, grad, _ = problem.objective(x)
        _, jac = problem.constraints(x)
        d = rng.normal(size=layout.n_vars)
        d /= np.linalg.norm(d)
        fd = _directional_fd(problem.objective_fun, x, d)
        assert abs(fd - grad @ d) / max(1.0, abs(fd)) < 1e-5
        fd = _directional_fd(problem.constraint_fun, x, d)
        err = np.abs(fd - jac @ d).max() / max(1.0, np.abs(fd).max())
        assert err < 1e-5
        checked += 1
    assert checked >= 20


def test_initial_guess_tracks_targets(hop_setup):
    layout, targets, _ = hop_setup
    problem = ReducedProblem(layout, targets)
    x0 = initial_guess(problem)
    times = targets.times
    out = layout.sample(x0, times)
    # the velocity damping shaves a few centimetres off the flight arc,
    # so the fit is close to, not on top of, the targets
    assert np.abs(out["r"] - targets.r).max() < 0.15
    assert np.abs(out["theta"] - targets.theta).max() < 0.08
    viol = problem.violation_by_group(x0)
    assert viol["force_cone"] < 1e-9
    assert viol["stance_on_floor"] < 1e-9
    assert viol["above_floor"] < 1e-9


def test_short_solve_reduces_violation(hop_setup):
    """A capped dynamics stage should still push feasibility well down."""
    layout, targets, clip = hop_setup
    x0_prob = ReducedProblem(layout, targets)
    v0 = max(x0_prob.violation_by_group(initial_guess(x0_prob)).values())
    traj, report, _ = solve_reduced(
        targets, None, max_iters=250, duration_stage=False, layout=layout)
    v = report.stages[-1].max_violation
    assert v < 1e-3 and v < 1e-3 * v0
    out = traj.sample(targets.times)
    flight = ~clip.contacts.labels
    assert np.abs(out["forces"][flight]).max() == 0.0
