import math

import numpy as np
import pytest
from scipy import integrate, stats

from levyexit.levy import (AlphaStable, CompoundPoisson, NoJumps,
                           TruncatedStable, levy_constant, make_levy_model,
                           stable_positive, stable_symmetric)
from conftest import philox


def test_levy_constant_closed_forms():
    # alpha = 1/2 in d = 1: the integral is 2 sqrt(2 pi)
    assert levy_constant(1, 0.5) == pytest.approx(2 * math.sqrt(2 * math.pi),
                                                  rel=1e-12)
    # alpha = 1 in d = 1: pi
    assert levy_constant(1, 1.0) == pytest.approx(math.pi, rel=1e-12)


def test_levy_constant_against_quadrature_oracle():
    # C(1, alpha) = 2 * int_0^R (1 - cos y) y^{-1-a} dy + exact-tail terms;
    # the oscillatory remainder beyond R is bounded by 4 R^{-1-a}
    for alpha in (0.5, 1.0, 1.5):
        R = 2000.0
        body = integrate.quad(
            lambda y: (1 - math.cos(y)) * y ** (-1 - alpha), 0, R,
            limit=2000)[0]
        tail_one = R ** -alpha / alpha  # int of y^{-1-a} beyond R
        est = 2 * (body + tail_one)
        assert levy_constant(1, alpha) == pytest.approx(
            est, abs=8 * R ** (-1 - alpha) + 1e-9)


def test_levy_constant_2d_against_polar_oracle():
    for alpha in (0.5, 1.2):
        R = 4000.0

        def radial(r):
            # int_0^{2pi} (1 - cos(r cos t)) dt = 2 pi (1 - J0(r))
            from scipy.special import j0

            return 2 * math.pi * (1 - j0(r)) * r ** (-1 - alpha)

        body = integrate.quad(radial, 0, R, limit=4000)[0]
        tail = 2 * math.pi * R ** -alpha / alpha
        assert levy_constant(2, alpha) == pytest.approx(
            body, abs=2 * tail + 1e-7)


def test_partial_drift_symmetric_zero():
    for model in (AlphaStable(0.7, 1), AlphaStable(1.3, 2),
                  TruncatedStable(0.9)):
        for r in (0.3, 1.0, 2.5):
            assert np.all(model.partial_drift(r) == 0.0)


def test_partial_drift_exp_density_closed_form():
    # oracle: antiderivative of y e^{-y} is -(y+1) e^{-y}
    model = CompoundPoisson("exp_positive")
    want = 1.5 * math.exp(-0.5) - 2 * math.exp(-1.0)
    got = model.partial_drift(0.5)[0]
    assert got == pytest.approx(want, abs=1e-10)
    assert model.partial_drift(1.0)[0] == 0.0


def test_partial_drift_sign_convention_above_one():
    # b_r for r > 1 is minus the integral over B_r \ B_1
    model = CompoundPoisson("exp_positive")
    want = -(2 * math.exp(-1.0) - 3 * math.exp(-2.0))
    assert model.partial_drift(2.0)[0] == pytest.approx(want, abs=1e-10)


def test_partial_drift_annulus_additivity():
    model = CompoundPoisson("exp_positive")
    b1 = model.partial_drift(0.25)[0]
    b2 = model.partial_drift(0.75)[0]
    annulus = integrate.quad(lambda y: y * math.exp(-y), 0.25, 0.75)[0]
    assert b1 - b2 == pytest.approx(annulus, abs=1e-9)


def test_integrability_check():
    assert CompoundPoisson("exp_positive").check_levy_integrability() < 1.0


def test_stable_symmetric_median_and_symmetry():
    rng = philox(31)
    n = 1_000_000
    u = rng.random(n)
    e = rng.standard_exponential(n)
    x = stable_symmetric(u, e, 0.8)
    med = np.median(x)
    iqr = np.subtract(*np.percentile(x, [75, 25]))
    se = 1.2533 * iqr / 1.349 / math.sqrt(n)  # asymptotic median se
    assert abs(med) <= 3 * se


def test_stable_char_function():
    rng = philox(32)
    n = 300_000
    for alpha in (0.6, 1.0, 1.6):
        u = rng.random(n)
        e = rng.standard_exponential(n)
        x = stable_symmetric(u, e, alpha)
        for xi in (0.5, 1.5):
            emp = np.cos(xi * x).mean()
            assert emp == pytest.approx(math.exp(-xi ** alpha), abs=5e-3)


def test_positive_stable_laplace_transform():
    rng = philox(33)
    n = 300_000
    for g in (0.25, 0.5, 0.75):
        u = rng.random(n)
        e = rng.standard_exponential(n)
        s = stable_positive(u, e, g)
        assert np.all(s > 0)
        for t in (0.5, 2.0):
            emp = np.exp(-t * s).mean()
            assert emp == pytest.approx(math.exp(-t ** g), abs=5e-3)


def test_hill_estimator_recovers_alpha():
    rng = philox(34)
    n = 1_000_000
    for alpha in (0.5, 1.2):
        model = AlphaStable(alpha, 1)
        x = np.abs(model.sample_increments(1.0, n, rng)[:, 0])
        x = np.sort(x)
        k = 20_000
        tail = x[-k - 1:]
        hill = 1.0 / (np.log(tail[1:] / tail[0]).mean())
        assert abs(hill - alpha) <= 0.1


def test_self_similarity_ks():
    rng = philox(35)
    n = 100_000
    model = AlphaStable(1.4, 1)
    a = model.sample_increments(0.01, n, rng)[:, 0]
    b = model.sample_increments(0.02, n, rng)[:, 0] * 2 ** (-1 / 1.4)
    p = stats.ks_2samp(a, b).pvalue
    assert p > 0.01


def test_isotropic_marginal_matches_1d():
    # projections of the isotropic 2-d model onto an axis have the same
    # law as the 1-d model at the same characteristic scale
    rng = philox(36)
    n = 100_000
    m2 = AlphaStable(0.9, 2)
    m1 = AlphaStable(0.9, 1)
    x2 = m2.sample_increments(1.0, n, rng)[:, 0]
    scale_ratio = m1.increment_scale(1.0) / m2.increment_scale(1.0)
    x1 = m1.sample_increments(1.0, n, rng)[:, 0] / scale_ratio
    p = stats.ks_2samp(x2, x1).pvalue
    assert p > 0.01


def test_compound_poisson_count_gof():
    # jump counts over a horizon are Poisson(intensity * H)
    rng = philox(37)
    model = CompoundPoisson("exp_positive")
    H = 5.0
    lam = model.intensity * H
    n = 4000
    counts = rng.poisson(lam, size=n)  # the engine draws exactly this way
    # merge the upper tail so every expected bin count is at least 5
    kmax = 0
    while stats.poisson.sf(kmax, lam) * n >= 5:
        kmax += 1
    obs = np.bincount(np.minimum(counts, kmax), minlength=kmax + 1)
    probs = np.array([stats.poisson.pmf(k, lam) for k in range(kmax)])
    probs = np.append(probs, stats.poisson.sf(kmax - 1, lam))
    exp = probs * n
    exp = exp * obs.sum() / exp.sum()
    p = stats.chisquare(obs, exp).pvalue
    assert p > 0.01


def test_truncated_stable_pieces():
    model = TruncatedStable(0.8, eps_jump=1e-2)
    # exact small-jump variance and tail mass
    assert model.small_jump_variance() == pytest.approx(
        2 * (1e-2) ** 1.2 / 1.2, rel=1e-12)
    assert model.nu_tail(1.0) == pytest.approx(2 / 0.8, rel=1e-12)
    rng = philox(38)
    sizes = model.sample_jump_sizes(rng, 200_000)
    assert np.abs(sizes).min() >= model.eps_jump
    # tail law |Y| = eps U^{-1/alpha}: P(|Y| > z) = (z/eps)^{-alpha}
    z = 0.1
    emp = (np.abs(sizes) > z).mean()
    assert emp == pytest.approx((z / 1e-2) ** -0.8, abs=3e-3)


def test_extreme_draws_stay_finite():
    # pathological uniform/exponential corners must produce finite draws
    # (a capped draw still exits any bounded domain immediately)
    u = np.array([0.0, 1.0 - 1e-16, 0.5, 1e-18])
    e = np.array([1e-300, 1e-300, 1e-300, 1e-300])
    for alpha in (0.3, 0.5, 1.0, 1.7):
        x = stable_symmetric(u, e, alpha)
        assert np.all(np.isfinite(x))
    for g in (0.15, 0.5, 0.9):
        s = stable_positive(u, e, g)
        assert np.all(np.isfinite(s)) and np.all(s >= 0)
    m = AlphaStable(0.5, 2)
    z = np.array([[0.0, 1.0]] * 4)
    inc = m.increments_from_draws(1e-3, u, e, z)
    assert np.all(np.isfinite(inc))


def test_make_levy_model():
    assert isinstance(make_levy_model({"kind": "none"}), NoJumps)
    m = make_levy_model({"kind": "alpha_stable", "alpha": 0.5, "dim": 2})
    assert isinstance(m, AlphaStable) and m.dim == 2
    m = make_levy_model({"kind": "compound_poisson",
                         "density": "exp_positive"})
    assert isinstance(m, CompoundPoisson)
    with pytest.raises(ValueError):
        make_levy_model({"kind": "weird"})
    with pytest.raises(ValueError):
        AlphaStable(2.5, 1)
