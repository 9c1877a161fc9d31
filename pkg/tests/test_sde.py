import io
import math

import numpy as np
import pytest

from levyexit.domain import Box, Interval
from levyexit.errors import NonFiniteState
from levyexit.levy import AlphaStable, CompoundPoisson, NoJumps, \
    TruncatedStable
from levyexit.sde import (Coefficients, Policy, SimulationSpec,
                          batch_simulate, boundary_exit_probe,
                          coupled_sup_gap, simulate)


def drift_spec(dt=1e-3, b=1.0):
    return SimulationSpec(Interval(-1, 1), Policy.constant(1.0),
                          Coefficients.make(1, 0, b1=b),
                          NoJumps(1), dt=dt, horizon=4.0)


def bm_spec(dt=1e-3, horizon=50.0):
    return SimulationSpec(Interval(-1, 1), Policy.constant(0.0),
                          Coefficients.make(1, 1, s0=1.0),
                          NoJumps(1), dt=dt, horizon=horizon)


def stable2d_spec(dt=1e-3):
    return SimulationSpec(Box((-1, -1), (1, 1)),
                          Policy.constant(0.0, dim=2),
                          Coefficients.make(2, 0, b1=(1.0, 0.0)),
                          AlphaStable(0.5, dim=2), dt=dt, horizon=50.0)


def test_frozen_state_is_censored():
    spec = SimulationSpec(Interval(-1, 1), Policy.constant(0.0),
                          Coefficients.make(1, 0), NoJumps(1),
                          dt=0.01, horizon=1.0)
    s = simulate(spec, [0.3], seed=1)
    assert s.censored
    assert s.tau == spec.horizon
    assert s.trajectory.eval(0.5) == (0.3,)


def test_pure_drift_exit_time_within_dt():
    for dt in (1e-2, 1e-3):
        spec = drift_spec(dt)
        s = simulate(spec, [0.0], seed=2)
        assert not s.censored
        assert abs(s.tau - 1.0) <= dt + 1e-12
        assert abs(s.exit_point[0] - 1.0) <= dt + 1e-12
        assert s.tau <= s.tau_hat


def test_stable_exits_by_jump_with_overshoot():
    spec = stable2d_spec()
    arch = batch_simulate(spec, [0.0, 0.0], 2000, seed=3)
    assert not arch.censored.any()
    assert arch.exited_by_jump.mean() > 0.5
    outside_closure = 0
    for i in range(len(arch)):
        x = tuple(arch.exit_x[i])
        assert not spec.domain.contains_open(x)
        if not spec.domain.contains_closed(x):
            outside_closure += 1
    assert outside_closure > 0


def test_doubling_n_preserves_prefix():
    spec = bm_spec()
    a = batch_simulate(spec, [0.0], 50, seed=11)
    b = batch_simulate(spec, [0.0], 100, seed=11)
    assert np.array_equal(a.tau, b.tau[:50])
    assert np.array_equal(a.cost, b.cost[:50])


def test_blocks_match_single_run():
    spec = stable2d_spec()
    whole = batch_simulate(spec, [0.0, 0.0], 60, seed=12)
    parts = [batch_simulate(spec, [0.0, 0.0], 20, seed=12, first_index=k)
             for k in (0, 20, 40)]
    tau = np.concatenate([p.tau for p in parts])
    assert np.array_equal(whole.tau, tau)


def test_single_sample_matches_batch_entry():
    spec = bm_spec()
    arch = batch_simulate(spec, [0.2], 5, seed=13)
    one = simulate(spec, [0.2], seed=13, stream_index=3)
    assert one.tau == arch.tau[3]


def test_threads_do_not_change_results():
    spec = bm_spec(dt=1e-2)
    a = batch_simulate(spec, [0.0], 3000, seed=14, threads=1)
    b = batch_simulate(spec, [0.0], 3000, seed=14, threads=2)
    assert np.array_equal(a.tau, b.tau)
    assert np.array_equal(a.exit_x[~a.censored], b.exit_x[~b.censored])


def test_pre_exit_states_inside():
    spec = stable2d_spec(dt=5e-3)
    arch = batch_simulate(spec, [0.0, 0.0], 40, seed=15, record_paths=True)
    for i in range(len(arch)):
        p = arch.paths[i]
        that = arch.tau_hat[i]
        for t, v in zip(p.times, p.rights):
            if 0 < t < that:
                assert spec.domain.contains_closed(v)
            if 0 < t < arch.tau[i]:
                assert spec.domain.contains_open(v)


def test_trajectory_jump_marks():
    spec = stable2d_spec()
    s = simulate(spec, [0.0, 0.0], seed=16)
    if s.exited_by_jump:
        jumps = s.trajectory.jump_times()
        assert jumps, "jump-exit trajectory must carry a jump mark"
        assert abs(jumps[-1] - s.tau) < 1e-12


def test_mean_exit_time_bm_fd_oracle():
    # oracle: the two-point boundary value problem -u''/2 = 1, u(+-1)=0
    # solved by finite differences (not a quoted constant)
    n = 2001
    h = 2.0 / (n - 1)
    from scipy.linalg import solve_banded

    ab = np.zeros((3, n - 2))
    ab[0, 1:] = -0.5 / h ** 2
    ab[1, :] = 1.0 / h ** 2
    ab[2, :-1] = -0.5 / h ** 2
    u = solve_banded((1, 1), ab, np.ones(n - 2))
    ref = float(u[(n - 2) // 2])
    assert ref == pytest.approx(1.0, abs=1e-6)  # closed form 1 - x^2 at 0

    biases = []
    dts = (1e-2, 1e-3, 1e-4)
    for dt in dts:
        arch = batch_simulate(bm_spec(dt=dt), [0.0], 20_000, seed=17)
        assert arch.censored.mean() < 1e-3
        biases.append(arch.tau.mean() - ref)
    # discrete monitoring overshoots the exact exit; bias shrinks ~ sqrt(dt)
    assert all(b > 0 for b in biases)
    assert biases[0] > biases[1] > biases[2]
    slope = np.polyfit(np.log(dts), np.log(biases), 1)[0]
    assert 0.25 <= slope <= 0.75


def test_coupled_initial_condition_slope():
    spec = SimulationSpec(
        None, Policy.clamped_affine(0.0, (0.5,), -1.0, 1.0),
        Coefficients(np.zeros(1), np.ones(1), np.full((1, 1), 0.4),
                     np.full((1, 1), 0.2)),
        NoJumps(1), dt=1e-3, horizon=2.0)
    means = []
    hs = (1e-1, 1e-2, 1e-3)
    for h in hs:
        gaps = coupled_sup_gap(spec, [0.1], [0.1 + h], 1.0, 500, seed=18)
        means.append(gaps.mean())
    slope = np.polyfit(np.log(hs), np.log(means), 1)[0]
    assert abs(slope - 2.0) <= 0.2


def test_boundary_probe_stable():
    spec = stable2d_spec(dt=1e-4)
    frac = boundary_exit_probe(spec, [1.0, 0.0], delta=0.01, n=400, seed=19)
    assert frac > 0.9


def test_nonfinite_state_raises():
    spec = SimulationSpec(None, Policy.constant(1.0),
                          Coefficients.make(1, 0, b1=1e308),
                          NoJumps(1), dt=10.0, horizon=100.0)
    with pytest.raises(NonFiniteState):
        batch_simulate(spec, [1e308], 2, seed=20)


def test_compound_poisson_compensator_mean():
    # L_t = sum of jumps - t * int_{B_1} y nu(dy); for the one-sided
    # exponential density E L_1 = 1 - (1 - 2/e) = 2/e
    model = CompoundPoisson("exp_positive")
    spec = SimulationSpec(None, Policy.constant(0.0),
                          Coefficients.make(1, 0), model,
                          dt=0.05, horizon=1.0)
    arch = batch_simulate(spec, [0.0], 4000, seed=21, record_paths=True)
    finals = np.array([p.eval(1.0 - 1e-9)[0] for p in arch.paths])
    want = 2 / math.e
    se = finals.std(ddof=1) / math.sqrt(len(finals))
    assert abs(finals.mean() - want) <= 4 * se


def test_scheduled_jump_epochs_recorded():
    model = CompoundPoisson("exp_positive")
    spec = SimulationSpec(Interval(-5, 2), Policy.constant(0.0),
                          Coefficients.make(1, 0), model,
                          dt=0.25, horizon=8.0)
    arch = batch_simulate(spec, [0.0], 60, seed=22, record_paths=True)
    saw_offgrid = 0
    for i in range(len(arch)):
        p = arch.paths[i]
        for t in p.jump_times():
            assert spec.domain.contains_closed(p.left_limit(t)) or \
                t > arch.tau_hat[i]
            if abs(t / spec.dt - round(t / spec.dt)) > 1e-9:
                saw_offgrid += 1
    assert saw_offgrid > 10  # jumps sit at their sampled epochs


def test_truncated_stable_runs_and_compensation_flag():
    for flag in (True, False):
        model = TruncatedStable(0.8, eps_jump=0.05,
                                gaussian_compensation=flag)
        spec = SimulationSpec(Interval(-1, 1), Policy.constant(0.0),
                              Coefficients.make(1, 0), model,
                              dt=0.01, horizon=10.0)
        arch = batch_simulate(spec, [0.0], 100, seed=23)
        assert (~arch.censored).mean() > 0.9
    a = batch_simulate(SimulationSpec(
        Interval(-1, 1), Policy.constant(0.0), Coefficients.make(1, 0),
        TruncatedStable(0.8, 0.05, True), dt=0.01, horizon=10.0),
        [0.0], 50, seed=24)
    b = batch_simulate(SimulationSpec(
        Interval(-1, 1), Policy.constant(0.0), Coefficients.make(1, 0),
        TruncatedStable(0.8, 0.05, False), dt=0.01, horizon=10.0),
        [0.0], 50, seed=24)
    assert not np.array_equal(a.tau, b.tau)


def test_exit_sample_invariants():
    spec = stable2d_spec()
    arch = batch_simulate(spec, [0.1, 0.2], 500, seed=25)
    assert np.all(arch.tau <= arch.tau_hat + 1e-12)
    s = arch.sample(0)
    assert s.tau <= s.tau_hat


def test_archive_save_text():
    spec = drift_spec(1e-2)
    arch = batch_simulate(spec, [0.5], 3, seed=26, ell=1.0)
    buf = io.StringIO()
    arch.save_text(buf)
    text = buf.getvalue()
    assert "levyexit exit archive" in text
    assert text.count("\n") == 8 + 3  # header+column lines + one row each
    assert "np.float64" not in text


def test_grid_policy_routes_to_python():
    pol = Policy.interpolated([-1.0, 0.0, 1.0], [-0.5, 0.0, 0.5],
                              -1.0, 1.0)
    spec = SimulationSpec(Interval(-1, 1), pol,
                          Coefficients.make(1, 1, b1=1.0, s0=0.5),
                          NoJumps(1), dt=1e-2, horizon=20.0)
    arch = batch_simulate(spec, [0.0], 50, seed=27)
    assert (~arch.censored).any()
