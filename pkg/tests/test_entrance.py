import math
from fractions import Fraction as F

import pytest

from levyexit.cadlag import (compose_scalar, constant, lower_envelope,
                             piecewise)
from levyexit.domain import Ball, Box, Interval
from levyexit.entrance import (classify_gamma, classify_gamma_skeleton,
                               continuity_probe, entrance_point,
                               entrance_record, entrance_time,
                               entrance_time_capped, scalar_entrance_time)
from levyexit.errors import NeverExits, UndeterminedClassification
from levyexit.skorohod import TimeChange, apply_timechange
from conftest import philox

INF = math.inf
O01 = Interval(0, 1)


def vee():
    return piecewise((0, F(1, 2)), ((F(1, 2),), (0,)), ((-1,), (1,)), INF)


def staircase():
    return piecewise((0, F(1, 3)), ((F(1, 3),), (F(1, 3),)),
                     ((-1,), (-1,)), INF)


def reanchored_drop():
    return piecewise((0, 1), ((F(9, 10),), (-1,)),
                     ((-F(9, 10),), (-1,)), INF)


def test_entrance_vee():
    assert entrance_time(vee(), O01) == F(1, 2)


def test_entrance_staircase():
    assert entrance_time(staircase(), O01) == F(2, 3)


def test_entrance_never():
    p = constant(0.5, horizon=10)
    assert entrance_time(p, O01) == INF


def test_entrance_capped():
    assert entrance_time_capped(staircase(), O01, F(1, 2)) == F(1, 2)
    assert entrance_time_capped(vee(), O01, 3) == F(1, 2)


def test_entrance_point_reanchored_drop():
    assert entrance_point(reanchored_drop(), O01) == (-1,)


def test_entrance_point_shifted_drop_hits_boundary():
    p = reanchored_drop().shift((-F(1, 100),))
    assert entrance_point(p, O01) == (0,)


def test_entrance_point_drift():
    p = piecewise((0,), ((0,),), ((1,),), INF)
    assert entrance_time(p, Interval(-1, 1)) == 1
    assert entrance_point(p, Interval(-1, 1)) == (1,)


def test_entrance_point_never_raises():
    with pytest.raises(NeverExits):
        entrance_point(constant(0.5, horizon=2), O01)


def test_closed_vs_open_complement_vee():
    p = vee()
    assert entrance_time(p, O01, "open_complement") == F(1, 2)
    assert entrance_time(p, O01, "closed_complement") == F(3, 2)


def test_left_path_entrance_drop():
    p = reanchored_drop()
    assert entrance_time(p, O01, of="left") == 1


def test_conventions_at_zero():
    # starts on the boundary moving inward: t >= 0 gives 0, t > 0 skips
    # the isolated origin
    p = piecewise((0,), ((1,),), ((-1,),), INF)
    assert entrance_time(p, O01, convention="geq") == 0
    assert entrance_time(p, O01, convention="gt") == 1
    # starts outside and stays outside for a while: both conventions 0
    q = piecewise((0,), ((2,),), ((0,),), INF)
    assert entrance_time(q, O01, convention="geq") == 0
    assert entrance_time(q, O01, convention="gt") == 0


def test_classify_vee_not_in_gamma():
    rec = classify_gamma(vee(), O01)
    assert not rec.in_gamma
    assert rec.t_exit == F(1, 2) and rec.t_exit_closure == F(3, 2)


def test_classify_strict_crossing():
    # strict downward crossing started inside (a boundary start would
    # make the exit time 0 under the t >= 0 convention)
    p = piecewise((0,), ((F(9, 10),), ), ((-2,),), INF)  # 9/10 - 2t
    rec = classify_gamma(p, O01)
    assert rec.in_gamma and rec.in_gamma_hat
    assert rec.t_exit == F(9, 20)


def test_classify_reanchored_drop():
    rec = classify_gamma(reanchored_drop(), O01)
    assert rec.in_gamma and not rec.in_gamma_hat
    assert rec.entrance_pt_left == (F(9, 10) - F(9, 10),)


def test_classify_undetermined():
    p = constant(0.5, horizon=2)
    rec = classify_gamma(p, O01)
    assert not rec.determined
    with pytest.raises(UndeterminedClassification):
        classify_gamma(p, O01, require_determined=True)


def test_classify_jump_exit_is_in_gamma_hat():
    p = piecewise((0, F(1, 2)), ((F(1, 2),), (3,)), ((0,), (0,)), INF)
    rec = classify_gamma(p, O01)
    assert rec.in_gamma and rec.in_gamma_hat
    assert rec.t_exit == F(1, 2)
    assert rec.entrance_pt_left == (F(1, 2),)


def test_ball_domain_entrance():
    p = piecewise((0,), ((0.0, 0.0),), ((1.0, 0.0),), INF)
    t = entrance_time(p, Ball((0.0, 0.0), 1.0))
    assert t == pytest.approx(1.0, abs=1e-12)


def test_timechange_commutation_exact():
    # T(omega ∘ lam) = lam^{-1}(T(omega)) on random exact cases
    rng = philox(11)
    dom = O01
    count = 0
    for _ in range(100):
        n = int(rng.integers(1, 4))
        times = [F(0)]
        for _ in range(n):
            times.append(times[-1] + F(1 + int(rng.integers(1, 6)), 8))
        rights = [(F(int(rng.integers(1, 8)), 9),) for _ in times]
        slopes = [(F(int(rng.integers(-10, 11)), 4),) for _ in times]
        omega = piecewise(times, rights, slopes, INF)
        T = times[-1] + 1
        anchors = [(F(0), F(0))]
        ks = sorted(rng.integers(1, 16, size=2))
        if ks[0] < ks[1]:
            anchors.append((F(int(ks[0]), 16) * T, F(int(ks[1]), 16) * T))
        anchors.append((T, T))
        lam = TimeChange(anchors)
        t_base = entrance_time(omega, dom)
        warped = apply_timechange(omega, lam)
        t_warp = entrance_time(warped, dom)
        if t_base == INF:
            assert t_warp == INF
        elif t_base < T:
            count += 1
            assert t_warp == lam.inv(t_base)
    assert count >= 30


def test_reduction_identity_through_signed_distance():
    # entrance into the open complement equals the scalar first entry of
    # rho∘omega into (-infty, 0], within the compose tolerance on
    # transversal crossings
    rng = philox(12)
    dom = Interval(0, 1)
    eps = F(1, 10 ** 9)
    for _ in range(50):
        n = int(rng.integers(1, 4))
        times = [F(0)]
        for _ in range(n):
            times.append(times[-1] + F(1 + int(rng.integers(1, 6)), 8))
        rights = [(F(int(rng.integers(-4, 14)), 10),) for _ in times]
        slopes = [(F(int(rng.integers(-8, 9)), 4),) for _ in times]
        omega = piecewise(times, rights, slopes, times[-1] + 2)
        t_direct = entrance_time(omega, dom)
        rho_path = compose_scalar(omega, dom.distance_map(), eps=eps)
        t_scalar = scalar_entrance_time(rho_path, closed=True)
        if t_direct == INF:
            assert t_scalar == INF
        else:
            slack = float(2 * eps * 64)  # transversal slopes >= 1/64 here
            assert abs(float(t_scalar - t_direct)) <= slack


def test_scalar_entrance_of_envelope():
    # envelope reaches 0 at the approach time even when unattained
    p = staircase()
    env = lower_envelope(p)
    assert scalar_entrance_time(env, closed=True) == F(1, 3)
    assert scalar_entrance_time(p, closed=True) == F(2, 3)


def test_entrance_record_text():
    rec = entrance_record(vee(), O01, cap=F(1, 4))
    text = rec.to_text()
    assert "T_exit = 1/2" in text
    assert "T_exit_capped = 1/4" in text
    assert "entrance_point = 0" in text


def test_skeleton_classifier_matches_full():
    rng = philox(13)
    dom = Box((-1.0, -1.0), (1.0, 1.0))
    for trial in range(60):
        n = 40
        times = [0.0]
        for _ in range(n):
            times.append(times[-1] + 0.01)
        pts = [(0.0, 0.0)]
        jump_lefts = {}
        for i in range(n):
            prev = pts[-1]
            step = rng.normal(scale=0.12, size=2)
            nxt = (prev[0] + float(step[0]), prev[1] + float(step[1]))
            if rng.random() < 0.1:  # occasional marked jump
                jump_lefts[i + 1] = prev
                nxt = (prev[0] + float(rng.normal(scale=0.8)),
                       prev[1] + float(rng.normal(scale=0.8)))
            pts.append(nxt)
        from levyexit.cadlag import from_grid

        path = from_grid(times, pts, jump_lefts, horizon=times[-1] + 1)
        full = classify_gamma(path, dom)
        fast = classify_gamma_skeleton(path, dom)
        assert (full.in_gamma, full.in_gamma_hat, full.determined) == \
            (fast.in_gamma, fast.in_gamma_hat, fast.determined)
        # absolute times agree up to the re-anchoring roundoff only
        for a, b in ((full.t_exit, fast.t_exit),
                     (full.t_exit_closure, fast.t_exit_closure)):
            if a == INF or b == INF:
                assert a == b
            else:
                assert abs(a - b) <= 1e-12


def test_entrance_fuzz_against_grid_oracle():
    # two exact sandwich properties with no tolerance: the entrance time
    # is <= every grid point found outside, and every grid point before
    # it lies strictly inside the domain
    rng = philox(77)
    from levyexit.cadlag import CadlagPath

    for trial in range(250):
        k = int(rng.integers(1, 5))
        times = [0.0] + sorted(float(t) for t in rng.random(k) * 2 + 0.01)
        rights = [(float(v),) for v in rng.uniform(-0.5, 1.5, size=k + 1)]
        slopes = [(float(s),) for s in rng.uniform(-4, 4, size=k + 1)]
        horizon = times[-1] + float(rng.random()) + 0.1
        p = CadlagPath(times, rights, slopes, horizon)
        lo = float(rng.uniform(-0.2, 0.2))
        dom = Interval(lo, lo + float(rng.uniform(0.5, 1.2)))
        T = entrance_time(p, dom)
        grid = [horizon * i / 1500 for i in range(1500)]
        for t in grid:
            outside = not dom.contains_open(p.eval(t))
            if outside:
                assert T <= t
            if t < T:
                assert not outside


def test_entrance_fuzz_left_path_and_strict_agree_on_jump_exits():
    # when the path jumps cleanly across the closure, all three
    # functionals agree exactly (the generic census situation)
    rng = philox(78)
    dom = Interval(0, 1)
    hits = 0
    for _ in range(100):
        jump_t = float(rng.uniform(0.2, 1.5))
        inside = float(rng.uniform(0.1, 0.9))
        target = float(rng.choice([-1, 1]) * rng.uniform(1.5, 3.0))
        p = piecewise((0, jump_t), ((inside,), (target,)),
                      ((0,), (0,)), INF)
        rec = classify_gamma(p, dom)
        if not dom.contains_closed((target,)):
            hits += 1
            assert rec.in_gamma and rec.in_gamma_hat
            assert rec.t_exit == rec.t_exit_left == rec.t_exit_closure \
                == jump_t
    assert hits == 100


def test_continuity_probe_strict_crossing_converges():
    p = piecewise((0,), ((1,),), ((-2,),), INF)
    rows = continuity_probe(p, O01, kinds=("shift", "warp"),
                            magnitudes=(1e-1, 1e-2, 1e-3))
    for r in rows:
        assert r.t_gap <= 10 * r.eps
        assert r.pi_gap <= 10 * r.eps


def test_continuity_probe_reproduces_vee_discontinuity():
    # shifting the vee path up reproduces the jump of the exit time:
    # T(omega + eps) - T(omega) -> 1
    p = vee()
    rows = continuity_probe(p, O01, kinds=("shift",),
                            magnitudes=(1e-2, 1e-3),
                            shift_direction=(1,))
    for r in rows:
        assert abs(r.t_gap - 1.0) < 2 * r.eps
