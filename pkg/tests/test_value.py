import math

import numpy as np
import pytest

from levyexit.domain import Box, Interval
from levyexit.levy import AlphaStable, NoJumps
from levyexit.sde import Coefficients, Policy, SimulationSpec
from levyexit.value import (ValueEstimate, continuity_scan, estimate,
                            per_path_values, resolve_cost)


def drift_spec(dt=1e-3):
    return SimulationSpec(Interval(-1, 1), Policy.constant(1.0),
                          Coefficients.make(1, 0, b1=1.0),
                          NoJumps(1), dt=dt, horizon=4.0)


def stable2d_spec(dt=2e-3):
    return SimulationSpec(Box((-1, -1), (1, 1)),
                          Policy.constant(0.0, dim=2),
                          Coefficients.make(2, 0, b1=(1.0, 0.0)),
                          AlphaStable(0.5, dim=2), dt=dt, horizon=50.0)


def test_boundary_start_returns_g_exactly():
    spec = drift_spec()
    est = estimate(spec, [1.0], 1.0, lambda X: 7.25 + 0 * X[:, 0], 100, 5)
    assert est.mean == 7.25
    assert est.std_error == 0.0


def test_outside_closure_rejected():
    with pytest.raises(ValueError):
        estimate(drift_spec(), [1.5], 1.0, 0.0, 10, 5)


def test_drift_value_closed_form():
    dt = 1e-4
    spec = drift_spec(dt)
    for x in (0.0, 0.5):
        est = estimate(spec, [x], 1.0, 0.0, 200, 6)
        want = 1.0 - math.exp(-(1.0 - x))
        assert abs(est.mean - want) <= 2 * dt
        assert est.std_error <= 1e-15  # deterministic dynamics


def test_monotonicity_under_cost_dominance_per_path():
    spec = stable2d_spec()
    x = [0.2, 0.1]
    v1, _ = per_path_values(spec, x, 0.5, 0.0, 300, 7)
    v2, _ = per_path_values(spec, x, 1.0,
                            lambda X: 0.3 + 0 * X[:, 0], 300, 7)
    # common random numbers: identical trajectories, ordered functionals
    assert np.all(v1 <= v2 + 1e-15)


def test_value_bound_per_path():
    spec = stable2d_spec()
    ell_sup, g_sup = 1.0, 0.4
    vals, arch = per_path_values(spec, [0.0, 0.0], 1.0,
                                 lambda X: g_sup + 0 * X[:, 0], 300, 8)
    bound = ell_sup * (1.0 - np.exp(-arch.tau)) \
        + g_sup * np.exp(-arch.tau) * (~arch.censored)
    # the trapezoid accumulator overestimates the convex discount by at
    # most dt^2 tau / 12 per path
    slack = spec.dt ** 2 * arch.tau / 8 + 1e-12
    assert np.all(vals <= bound + slack)
    assert np.all(np.abs(vals) <= ell_sup + g_sup + slack)


def test_discount_shift_per_path():
    spec = stable2d_spec()
    c = 0.75
    v1, arch = per_path_values(spec, [0.1, 0.0], 1.0, 0.0, 200, 9)
    v2, _ = per_path_values(spec, [0.1, 0.0], 1.0,
                            lambda X: c + 0 * X[:, 0], 200, 9)
    hit = ~arch.censored
    shift = np.where(hit, c * np.exp(-arch.tau), 0.0)
    assert np.allclose(v2 - v1, shift, rtol=0, atol=1e-12)


def test_censored_warning():
    spec = SimulationSpec(Interval(-1, 1), Policy.constant(0.0),
                          Coefficients.make(1, 0), NoJumps(1),
                          dt=0.01, horizon=1.0)
    with pytest.warns(UserWarning, match="censored"):
        est = estimate(spec, [0.0], 1.0, 0.0, 20, 10)
    assert est.censored_fraction == 1.0


def test_scan_degenerate_segment():
    spec = drift_spec()
    rows = continuity_scan(spec, [0.25], [0.25], 4, 1.0, 0.0, 50, 11)
    assert len(rows) == 4
    assert len({r.mean for r in rows}) == 1


def test_scan_endpoints_anchor_to_g():
    spec = drift_spec(1e-3)
    rows = continuity_scan(spec, [-1.0], [1.0], 5, 1.0, 0.0, 100, 12)
    assert rows[0].mean == 0.0 and rows[-1].mean == 0.0


def test_scan_matches_pointwise_closed_form():
    dt = 1e-3
    spec = drift_spec(dt)
    rows = continuity_scan(spec, [0.0], [0.75], 4, 1.0, 0.0, 100, 13)
    for r in rows:
        want = 1.0 - math.exp(-(1.0 - r.x[0]))
        assert abs(r.mean - want) <= 2 * dt


def test_resolve_cost_registry():
    assert resolve_cost("zero") == 0.0
    assert resolve_cost("one") == 1.0
    assert resolve_cost("constant:2.5") == 2.5
    g = resolve_cost("gaussian_bump")
    assert g(np.array([[0.0, 0.0]]))[0] == 1.0
    c = resolve_cost("coord:1")
    assert c(np.array([[3.0, 4.0]]))[0] == 4.0
    with pytest.raises(ValueError):
        resolve_cost("nope")


def test_value_estimate_dataclass():
    v = ValueEstimate(1.0, 0.1, 10, 0.0)
    assert v.std_error >= 0
    assert 0 <= v.censored_fraction <= 1
