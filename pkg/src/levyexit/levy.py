"""Levy measure models, partial moments, and increment samplers.

Models drive both the simulation engine and the nonlocal-operator
quadrature, so the measure normalization must be the same in both: the
isotropic stable model uses the unnormalized density |y|^{-d-alpha}
exactly, which makes the process characteristic exponent
-C(d, alpha) |xi|^alpha with

    C(d, alpha) = 2^{1-alpha} pi^{d/2} Gamma(1-alpha/2)
                  / (alpha Gamma((d+alpha)/2)),

and increments over dt are standard isotropic stable vectors scaled by
(C dt)^{1/alpha}.  Samplers consume uniforms/exponentials/normals in a
fixed per-step layout so that counter-based per-trajectory streams stay
reproducible under chunked, vectorized generation.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .errors import QuadratureFailure


def levy_constant(d, alpha):
    """C(d, alpha) = integral of (1 - cos y_1) |y|^{-d-alpha} dy."""
    if not 0 < alpha < 2:
        raise ValueError("alpha must lie in (0, 2)")
    return (2.0 ** (1.0 - alpha) * math.pi ** (d / 2.0)
            * special.gamma(1.0 - alpha / 2.0)
            / (alpha * special.gamma((d + alpha) / 2.0)))


# draws beyond this magnitude act as jumps to infinity for any bounded
# domain; capping them keeps exit semantics while avoiding inf/nan states
_DRAW_CAP = 1e300


def stable_symmetric(u, e, alpha):
    """Symmetric alpha-stable draws (char fn e^{-|xi|^alpha}) from
    uniforms in [0,1) and unit exponentials (Chambers-Mallows-Stuck)."""
    U = math.pi * (np.asarray(u) - 0.5)
    e = np.asarray(e)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        if alpha == 1.0:
            out = np.tan(U)
        else:
            s = np.sin(alpha * U) / np.cos(U) ** (1.0 / alpha)
            t = (np.cos((1.0 - alpha) * U) / e) ** ((1.0 - alpha) / alpha)
            out = s * t
    out = np.nan_to_num(out, nan=0.0, posinf=_DRAW_CAP,
                        neginf=-_DRAW_CAP)
    return np.clip(out, -_DRAW_CAP, _DRAW_CAP)


def stable_positive(u, e, gamma_idx):
    """One-sided stable draws with Laplace transform e^{-s^gamma}
    (Kanter's method), gamma in (0, 1)."""
    if not 0 < gamma_idx < 1:
        raise ValueError("index must lie in (0, 1)")
    U = math.pi * np.asarray(u)
    U = np.clip(U, 1e-12, math.pi - 1e-12)
    e = np.asarray(e)
    g = gamma_idx
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        a = (np.sin(g * U) ** g * np.sin((1.0 - g) * U) ** (1.0 - g)
             / np.sin(U)) ** (1.0 / (1.0 - g))
        out = (a / e) ** ((1.0 - g) / g)
    out = np.nan_to_num(out, nan=0.0, posinf=_DRAW_CAP)
    return np.clip(out, 0.0, _DRAW_CAP)


@dataclass
class NoJumps:
    """Degenerate model: no jump part (the alpha -> 0 convention)."""

    dim: int = 1
    kind: str = "none"

    def partial_drift(self, r):
        return np.zeros(self.dim)


@dataclass
class AlphaStable:
    """Isotropic stable model with nu(dy) = dy / |y|^{d+alpha}."""

    alpha: float
    dim: int = 1
    kind: str = "alpha_stable"

    def __post_init__(self):
        if not 0 < self.alpha < 2:
            raise ValueError("alpha must lie in (0, 2)")
        self.constant = levy_constant(self.dim, self.alpha)

    def density(self, y):
        y = np.asarray(y, dtype=float)
        r = np.abs(y) if y.ndim <= 1 else np.sqrt((y * y).sum(axis=-1))
        return r ** (-(self.dim + self.alpha))

    def radial_density(self, r):
        """nu as a density in (radius, angle): r^{-1-alpha} per unit angle."""
        return np.asarray(r, dtype=float) ** (-1.0 - self.alpha)

    def surface_measure(self):
        # total angular mass: 2 in d=1 (two rays), 2*pi in d=2
        return {1: 2.0, 2: 2.0 * math.pi}[self.dim]

    def nu_tail(self, r):
        """nu(B_r^c), exactly."""
        return self.surface_measure() * r ** (-self.alpha) / self.alpha

    def second_moment_inner(self, r):
        """integral of |y|^2 over B_r, exactly."""
        return self.surface_measure() * r ** (2.0 - self.alpha) \
            / (2.0 - self.alpha)

    def partial_drift(self, r):
        if not r > 0:
            raise ValueError("r must be positive")
        return np.zeros(self.dim)  # odd integrand, symmetric measure

    def increment_scale(self, dt):
        return (self.constant * dt) ** (1.0 / self.alpha)

    # draw layout per step: d=1 needs (uniform, exponential); d>=2 the
    # subordinator pair plus d normals
    def draws_per_step(self):
        return {"uniform": 1, "exponential": 1,
                "normal": 0 if self.dim == 1 else self.dim}

    def increments_from_draws(self, dt, u, e, z=None):
        scale = self.increment_scale(dt)
        if self.dim == 1:
            out = (scale * stable_symmetric(u, e, self.alpha))[..., None]
        else:
            s = stable_positive(u, e, self.alpha / 2.0)
            out = scale * np.sqrt(2.0 * s)[..., None] * z
        return np.clip(out, -_DRAW_CAP, _DRAW_CAP)

    def sample_increments(self, dt, n, rng):
        u = rng.random(n)
        e = rng.standard_exponential(n)
        z = None if self.dim == 1 else \
            rng.standard_normal((n, self.dim))
        return self.increments_from_draws(dt, u, e, z)


def _quad(f, a, b):
    val, err = integrate.quad(f, a, b, limit=400)
    if not math.isfinite(val):
        raise QuadratureFailure(f"integral over ({a}, {b}) diverged",
                                partial=val)
    return val, err


@dataclass
class CompoundPoisson:
    """Finite-activity 1-d model given by a jump density nu_hat.

    The driving process with generating triplet (0, nu, 0) is the
    compound Poisson process minus the deterministic compensator drift
    integral of y over B_1, which the simulation engine applies.
    """

    density_name: str
    dim: int = 1
    kind: str = "compound_poisson"

    def __post_init__(self):
        if self.dim != 1:
            raise ValueError("density models are supported in d=1 only")
        if self.density_name == "exp_positive":
            self.density = lambda y: math.exp(-y) if y > 0 else 0.0
            self.intensity = 1.0
            self.support = (0.0, math.inf)
            self._sampler = lambda rng, n: rng.standard_exponential(n)
        elif self.density_name == "exp_symmetric":
            self.density = lambda y: 0.5 * math.exp(-abs(y))
            self.intensity = 1.0
            self.support = (-math.inf, math.inf)
            self._sampler = lambda rng, n: (
                rng.standard_exponential(n)
                * np.where(rng.random(n) < 0.5, -1.0, 1.0))
        else:
            raise ValueError(f"unknown density {self.density_name!r}")

    def nu_tail(self, r):
        lo, hi = self.support
        out = 0.0
        if hi > r:
            out += _quad(self.density, r, hi)[0]
        if lo < -r:
            out += _quad(self.density, lo, -r)[0]
        return out

    def partial_drift(self, r):
        """b_r = integral of y nu(dy) over B_1 \\ B_r (sign-reversed for
        r > 1)."""
        if not r > 0:
            raise ValueError("r must be positive")
        if r == 1:
            return np.zeros(1)
        f = lambda y: y * self.density(y)  # noqa: E731
        lo, hi = (r, 1.0) if r < 1 else (1.0, r)
        sign = 1.0 if r < 1 else -1.0
        val = _quad(f, lo, hi)[0] + _quad(f, -hi, -lo)[0]
        return np.array([sign * val])

    def compensator_drift(self):
        """integral of y nu(dy) over B_1 (the small-jump compensation in
        the generating triplet)."""
        f = lambda y: y * self.density(y)  # noqa: E731
        return _quad(f, -1.0, 1.0)[0]

    def sample_jump_sizes(self, rng, n):
        return self._sampler(rng, n)

    def check_levy_integrability(self):
        f = lambda y: min(1.0, y * y) * self.density(y)  # noqa: E731
        lo, hi = self.support
        lo = max(lo, -1e9)
        hi = min(hi, 1e9)
        val = _quad(f, lo, hi)[0]
        if not math.isfinite(val):
            raise QuadratureFailure("(1 ^ y^2) moment diverges", partial=val)
        return val


@dataclass
class TruncatedStable:
    """1-d stable density cut at eps_jump, with optional Gaussian
    compensation of the removed small jumps."""

    alpha: float
    eps_jump: float = 1e-3
    gaussian_compensation: bool = True
    dim: int = 1
    kind: str = "truncated_stable"

    def __post_init__(self):
        if not 0 < self.alpha < 2:
            raise ValueError("alpha must lie in (0, 2)")
        if self.dim != 1:
            raise ValueError("truncated model is 1-d")
        self.intensity = 2.0 * self.eps_jump ** (-self.alpha) / self.alpha
        self.support = (-math.inf, math.inf)

    def density(self, y):
        a = abs(y)
        return a ** (-1.0 - self.alpha) if a >= self.eps_jump else 0.0

    def small_jump_variance(self):
        """integral of y^2 nu(dy) over |y| < eps_jump (exact)."""
        return 2.0 * self.eps_jump ** (2.0 - self.alpha) / (2.0 - self.alpha)

    def partial_drift(self, r):
        if not r > 0:
            raise ValueError("r must be positive")
        return np.zeros(1)  # symmetric

    def compensator_drift(self):
        return 0.0

    def nu_tail(self, r):
        r = max(r, self.eps_jump)
        return 2.0 * r ** (-self.alpha) / self.alpha

    def sample_jump_sizes(self, rng, n):
        # inverse cdf of the Pareto-like tail |Y| = eps * U^{-1/alpha}
        mag = self.eps_jump * rng.random(n) ** (-1.0 / self.alpha)
        sign = np.where(rng.random(n) < 0.5, -1.0, 1.0)
        return mag * sign


def make_levy_model(spec):
    """Build a model from a config mapping."""
    kind = spec.get("kind", "none").strip().lower()
    dim = int(spec.get("dim", 1))
    if kind in ("none", "zero"):
        return NoJumps(dim=dim)
    if kind == "alpha_stable":
        return AlphaStable(alpha=float(spec["alpha"]), dim=dim)
    if kind == "compound_poisson":
        return CompoundPoisson(density_name=spec["density"], dim=dim)
    if kind == "truncated_stable":
        return TruncatedStable(
            alpha=float(spec["alpha"]),
            eps_jump=float(spec.get("eps_jump", 1e-3)),
            gaussian_compensation=bool(
                spec.get("gaussian_compensation", True)),
            dim=dim)
    raise ValueError(f"unknown levy model kind {kind!r}")
