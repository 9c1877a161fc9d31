import math

import numpy as np
import pytest
from scipy import integrate

from levyexit.errors import ControlOutOfRange, QuadratureFailure
from levyexit.levy import AlphaStable, CompoundPoisson, NoJumps
from levyexit.nonlocal_op import (QuadratureSpec, SmoothCandidate, candidate,
                                  candidate_names, eval_F_residual, eval_H,
                                  eval_I, eval_I_split, inf_H,
                                  operator_continuity_probe)
from levyexit.sde import Coefficients
from conftest import philox


def test_registry_names():
    names = candidate_names()
    for want in ("exp_profile", "gaussian", "quadratic", "cosine",
                 "cauchy", "sech"):
        assert want in names
    with pytest.raises(ValueError):
        candidate("bessel", 1)


@pytest.mark.parametrize("name,dim", [
    ("quadratic", 1), ("quadratic", 2), ("gaussian", 1), ("gaussian", 2),
    ("cosine", 1), ("cosine", 2), ("cauchy", 1), ("cauchy", 2),
    ("sech", 1), ("exp_profile", 1), ("exp_profile", 2)])
def test_derivatives_match_finite_differences(name, dim):
    cand = candidate(name, dim)
    rng = philox(41)
    h = 1e-5
    checked = 0
    for _ in range(40):
        x = rng.uniform(-1.5, 1.5, size=dim)
        if cand.kink_distance is not None and cand.kink_distance(x) < 0.05:
            continue
        checked += 1
        g = cand.gradient(x)
        H = cand.hessian(x)
        scale = max(1.0, abs(cand.value(x)))
        for j in range(dim):
            e = np.zeros(dim)
            e[j] = h
            fd = (cand.value(x + e) - cand.value(x - e)) / (2 * h)
            assert abs(fd - g[j]) <= 1e-6 * max(scale, abs(g[j]))
            for k in range(dim):
                ek = np.zeros(dim)
                ek[k] = h
                fd2 = (cand.gradient(x + ek)[j]
                       - cand.gradient(x - ek)[j]) / (2 * h)
                assert abs(fd2 - H[j, k]) <= 1e-6 * max(scale, abs(H[j, k]),
                                                        1.0)
        if checked >= 20:
            break
    assert checked >= 20


def test_eval_H_quadratic_arithmetic():
    cand = candidate("quadratic", 1)
    coeffs = Coefficients.make(1, 1, b1=1.0, s1=1.0)
    # sigma(a) = a, b(a) = a, x = 0, a = 1: H = 1/2 * 1 * 1 + 1 * 0
    assert eval_H(cand, [0.0], 1.0, coeffs) == pytest.approx(0.5, abs=1e-15)


def test_eval_H_control_out_of_range():
    cand = candidate("quadratic", 1)
    coeffs = Coefficients.make(1, 0, b1=1.0)
    with pytest.raises(ControlOutOfRange):
        eval_H(cand, [0.0], 2.0, coeffs)


def test_inf_H_is_negative_abs_gradient():
    # b(a) = a, sigma = 0: inf over [-1, 1] of a * p = -|p|
    cand = candidate("gaussian", 1)
    coeffs = Coefficients.make(1, 0, b1=1.0)
    x = np.array([0.7])
    p = cand.gradient(x)[0]
    a_star, h_min = inf_H(cand, x, coeffs)
    assert h_min == pytest.approx(-abs(p), abs=1e-9)
    assert a_star == pytest.approx(math.copysign(1.0, -p), abs=1e-6)


def test_inf_H_singleton_control():
    cand = candidate("quadratic", 1)
    coeffs = Coefficients.make(1, 0, b1=1.0, a_lo=0.3, a_hi=0.3)
    a_star, h_min = inf_H(cand, [2.0], coeffs)
    assert a_star == 0.3
    assert h_min == pytest.approx(0.6, abs=1e-15)


def test_affine_annihilation():
    #phi affine: the compensated inner part vanishes and the symmetric
    # outer part kills the odd increment
    def u(X):
        return 2.0 + 3.0 * X[:, 0]

    def grad(X):
        g = np.zeros_like(X)
        g[:, 0] = 3.0
        return g

    def hess(X):
        return np.zeros((X.shape[0], 1, 1))

    affine = SmoothCandidate("affine", u, grad, hess, None,
                             lambda s: 2.0 + 3.0 * (s + 10), 0.0, 0.0)
    model = AlphaStable(0.8, 1)
    s = eval_I_split(affine, np.array([0.4]), model, r=0.5)
    assert abs(s.i1) <= 1e-12
    assert abs(s.total) <= s.error + 1e-9


def test_cosine_oracle_value():
    # I(cos, 0) = -c(alpha) with c from an independent adaptive
    # quadrature oracle (finite range plus an integration-by-parts tail)
    for alpha in (0.5, 1.5):
        R = 3000.0
        body = integrate.quad(
            lambda y: (1 - math.cos(y)) * y ** (-1 - alpha), 0, R,
            limit=3000)[0]
        oracle = 2 * (body + R ** -alpha / alpha)
        oracle_err = 8 * R ** (-1 - alpha)
        model = AlphaStable(alpha, 1)
        total, err = eval_I(candidate("cosine", 1), np.array([0.0]), model)
        assert abs(total + oracle) <= err + oracle_err


def test_split_r_invariance_quick():
    model = AlphaStable(1.0, 1)
    cand = candidate("gaussian", 1)
    x = np.array([0.2])
    res = [eval_I_split(cand, x, model, r=r) for r in (0.25, 1.0, 2.0)]
    for a in res:
        for b in res:
            assert abs(a.total - b.total) <= a.error + b.error


def test_split_2d_r_invariance():
    model = AlphaStable(0.5, 2)
    cand = candidate("gaussian", 2)
    x = np.array([0.3, -0.2])
    res = [eval_I_split(cand, x, model, r=r) for r in (0.5, 1.0)]
    assert abs(res[0].total - res[1].total) <= res[0].error + res[1].error
    assert res[0].br_term == 0.0


def test_inner_part_scaling_in_r():
    # I_{r,1} = O(r^{2 - alpha}) as r -> 0 (second-order compensation)
    model = AlphaStable(0.8, 1)
    cand = candidate("gaussian", 1)
    x = np.array([0.5])
    rs = (0.2, 0.1, 0.05, 0.025)
    vals = [abs(eval_I_split(cand, x, model, r=r).i1) for r in rs]
    slope = np.polyfit(np.log(rs), np.log(vals), 1)[0]
    assert slope == pytest.approx(2.0 - 0.8, abs=0.1)


def test_density_model_split():
    model = CompoundPoisson("exp_positive")
    cand = candidate("gaussian", 1)
    x = np.array([0.1])
    res = [eval_I_split(cand, x, model, r=r) for r in (0.5, 1.0, 2.0)]
    for a in res:
        for b in res:
            assert abs(a.total - b.total) <= a.error + b.error + 1e-10
    # b_r term is genuinely nonzero for the one-sided density
    assert abs(res[0].br_term) > 1e-3


def test_quadratic_against_light_tails():
    # quadratic candidates integrate against the exponential density
    model = CompoundPoisson("exp_positive")
    cand = candidate("quadratic", 1)
    s = eval_I_split(cand, np.array([0.0]), model, r=1.0)
    # oracle: int (y^2/2) e^{-y} dy over y > 0 equals 1 (the split total
    # at x = 0 where u = y^2/2, Du = 0 inside the compensator)
    want = integrate.quad(lambda y: 0.5 * y * y * math.exp(-y), 0,
                          60.0)[0]
    assert s.total == pytest.approx(want, abs=s.error + 1e-8)


def test_local_only_rejected_for_stable():
    with pytest.raises(QuadratureFailure):
        eval_I_split(candidate("quadratic", 1), np.array([0.0]),
                     AlphaStable(0.9, 1), r=1.0)


def test_none_model_is_zero():
    s = eval_I_split(candidate("gaussian", 1), np.array([0.3]), NoJumps(1))
    assert s.total == 0.0 and s.error == 0.0


def test_kink_guard():
    cand = candidate("exp_profile", 1)
    coeffs = Coefficients.make(1, 0, b1=1.0)
    with pytest.raises(QuadratureFailure):
        eval_F_residual(cand, np.array([1e-5]), NoJumps(1), coeffs, 1.0)


def test_drift_profile_residual_zero():
    # |u'| + u - 1 = 0 for u = 1 - e^{-1+|x|} away from the kink in the
    # no-jump configuration
    cand = candidate("exp_profile", 1)
    coeffs = Coefficients.make(1, 0, b1=1.0)
    for x in (0.5, -0.5, 0.25, 0.9):
        res, err = eval_F_residual(cand, np.array([x]), NoJumps(1), coeffs,
                                   1.0)
        assert abs(res) <= 1e-9 + err


def test_manufactured_residual_2d():
    cand = candidate("gaussian", 2)
    model = AlphaStable(0.5, 2)
    coeffs = Coefficients.make(2, 0, b1=(1.0, 0.0))
    x = np.array([0.3, 0.4])
    tight = QuadratureSpec.tight()
    base, err_t = eval_F_residual(cand, x, model, coeffs, 0.0, spec=tight)
    res, err_d = eval_F_residual(cand, x, model, coeffs, float(base))
    assert abs(res) <= err_d + err_t + 1e-8


def test_operator_continuity_probe():
    model = AlphaStable(0.5, 1)
    cand = candidate("gaussian", 1)
    rows = operator_continuity_probe(cand, [0.2], model,
                                     radii=[2.0 ** -k for k in range(6)])
    gaps = [r[1] for r in rows]
    assert gaps[-1] <= gaps[0]
    assert gaps[-1] <= 0.05
    rows0 = operator_continuity_probe(cand, [0.2], model, radii=[0.0])
    assert rows0[0][1] == 0.0


def test_oscillatory_2d_rejected():
    with pytest.raises(QuadratureFailure):
        eval_I_split(candidate("cosine", 2), np.array([0.0, 0.0]),
                     AlphaStable(0.5, 2), r=1.0)
