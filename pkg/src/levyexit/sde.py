"""Controlled jump-diffusion simulation and first exit times.

Euler-Maruyama stepping with state-frozen coefficients per step; large
scheduled jumps (finite-activity models) are placed at their sampled
epochs by sub-stepping the drift within the step.  Exit from the open
domain (tau) and from its closure (tau_hat) are detected on the discrete
skeleton; no boundary-crossing correction is applied.

Randomness: each trajectory i draws from its own counter-based stream
Philox(key=(seed, first_index + i)) in a fixed per-chunk layout, so
archives are reproducible regardless of block/thread scheduling and
doubling N preserves the first N samples.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import backend
from .cadlag import from_grid
from .domain import Ball, Box, Interval
from .errors import NonFiniteState

BLOCK = 2048
CHUNK = 512


def _stream(seed, index):
    key = np.array([seed, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass
class Policy:
    """Markov control map; clamped-affine covers constant policies."""

    c0: float
    c1: np.ndarray
    lo: float
    hi: float
    grid: tuple | None = None  # optional (xs, ys) interpolation, d = 1

    @staticmethod
    def constant(a, dim=1):
        a = float(a)
        return Policy(a, np.zeros(dim), a, a)

    @staticmethod
    def clamped_affine(c0, c1, lo, hi):
        return Policy(float(c0), np.asarray(c1, dtype=float), float(lo),
                      float(hi))

    @staticmethod
    def interpolated(xs, ys, lo, hi):
        p = Policy(0.0, np.zeros(1), float(lo), float(hi),
                   grid=(np.asarray(xs, float), np.asarray(ys, float)))
        return p

    @property
    def dim(self):
        return len(self.c1)

    def control(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self.grid is not None:
            a = np.interp(X[:, 0], self.grid[0], self.grid[1])
        else:
            a = np.full(X.shape[0], self.c0)
            for j in range(self.dim):
                a = a + X[:, j] * self.c1[j]
        return np.minimum(np.maximum(a, self.lo), self.hi)

    def lipschitz_bound(self):
        if self.grid is not None:
            xs, ys = self.grid
            return float(np.max(np.abs(np.diff(ys) / np.diff(xs))))
        return float(np.sqrt((self.c1 ** 2).sum()))


@dataclass
class Coefficients:
    """Affine-in-control coefficient maps b(a) = b0 + a b1,
    sigma(a) = s0 + a s1 with sigma of shape (d, k)."""

    b0: np.ndarray
    b1: np.ndarray
    s0: np.ndarray
    s1: np.ndarray
    a_lo: float = -1.0
    a_hi: float = 1.0

    @staticmethod
    def make(d, k, b0=0.0, b1=0.0, s0=0.0, s1=0.0, a_lo=-1.0, a_hi=1.0):
        def vec(v, shape):
            arr = np.zeros(shape)
            arr[...] = v
            return arr

        return Coefficients(vec(b0, d), vec(b1, d), vec(s0, (d, k)),
                            vec(s1, (d, k)), a_lo, a_hi)

    @property
    def dim(self):
        return len(self.b0)

    @property
    def noise_dim(self):
        return self.s0.shape[1]

    def drift(self, a):
        a = np.asarray(a, dtype=float)
        return self.b0[None, :] + a[:, None] * self.b1[None, :]

    def sigma(self, a):
        a = np.asarray(a, dtype=float)
        return self.s0[None, :, :] + a[:, None, None] * self.s1[None, :, :]

    def diffusion_matrix(self, a):
        """A(a) = sigma sigma^T, the d x d generator matrix."""
        s = self.s0 + float(a) * self.s1
        return s @ s.T

    def lipschitz_bounds(self):
        """Exact Lipschitz constants in the control (affine maps)."""
        return (float(np.sqrt((self.b1 ** 2).sum())),
                float(np.sqrt((self.s1 ** 2).sum())))


@dataclass
class SimulationSpec:
    domain: object
    policy: Policy
    coeffs: Coefficients
    levy: object
    dt: float
    horizon: float = 50.0
    jump_mark_threshold: float = 0.05
    backend: str = "auto"

    @property
    def dim(self):
        return self.coeffs.dim

    @property
    def max_steps(self):
        return int(round(self.horizon / self.dt))


@dataclass
class ExitSample:
    trajectory: object
    tau: float
    exit_point: np.ndarray | None
    tau_hat: float
    discounted_cost: float
    exited_by_jump: bool
    censored: bool


@dataclass
class ExitArchive:
    dt: float
    horizon: float
    seed: int
    first_index: int
    x0: np.ndarray
    tau: np.ndarray
    tau_hat: np.ndarray
    exit_x: np.ndarray
    cost: np.ndarray
    censored: np.ndarray
    exited_by_jump: np.ndarray
    paths: list = field(default=None, repr=False)

    def __len__(self):
        return len(self.tau)

    def sample(self, i):
        pt = None if self.censored[i] else self.exit_x[i].copy()
        return ExitSample(self.paths[i] if self.paths else None,
                          float(self.tau[i]), pt, float(self.tau_hat[i]),
                          float(self.cost[i]), bool(self.exited_by_jump[i]),
                          bool(self.censored[i]))

    def save_text(self, fh):
        d = self.exit_x.shape[1]
        fh.write("# levyexit exit archive v1\n")
        fh.write(f"n = {len(self)}\ndim = {d}\ndt = {self.dt!r}\n"
                 f"horizon = {self.horizon!r}\nseed = {self.seed}\n"
                 f"first_index = {self.first_index}\n")
        fh.write("index,tau,tau_hat,censored,exited_by_jump,cost,"
                 + ",".join(f"exit_x{j}" for j in range(d)) + "\n")
        for i in range(len(self)):
            xs = ",".join(repr(float(c)) for c in self.exit_x[i])
            fh.write(f"{self.first_index + i},{float(self.tau[i])!r},"
                     f"{float(self.tau_hat[i])!r},{int(self.censored[i])},"
                     f"{int(self.exited_by_jump[i])},"
                     f"{float(self.cost[i])!r},{xs}\n")


def _domain_args(domain, d):
    if domain is None:
        return 0, np.zeros(d), np.zeros(d), 0.0, False
    if isinstance(domain, Interval):
        return 1, np.array([float(domain.lo)]), np.array([float(domain.hi)]), \
            0.0, False
    if isinstance(domain, Box):
        return 2, np.array([float(c) for c in domain.lo]), \
            np.array([float(c) for c in domain.hi]), 0.0, False
    if isinstance(domain, Ball):
        c = np.array([float(v) for v in domain.center])
        return 3, c, c, float(domain.radius) ** 2, False
    return -1, np.zeros(d), np.zeros(d), 0.0, True  # general: python route


def _parse_ell(ell):
    """ell: None | float | ("const", c) | callable."""
    if ell is None:
        return 0, 0.0, None
    if isinstance(ell, (int, float)):
        return 1, float(ell), None
    if isinstance(ell, tuple) and ell[0] == "const":
        return 1, float(ell[1]), None
    if callable(ell):
        return 2, 0.0, ell
    raise ValueError(f"bad running-cost spec {ell!r}")


def batch_simulate(spec, x0, n, seed, first_index=0, record_paths=False,
                   ell=None, threads=1):
    """Simulate n independent trajectories from x0; returns ExitArchive.

    The running cost accumulator integrates e^{-s} ell(X_s) ds by the
    trapezoid rule on the step grid, stopping at tau.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    d = spec.dim
    if len(x0) != d:
        raise ValueError("x0 dimension mismatch")
    ell_mode, ell_c, ell_fn = _parse_ell(ell)
    scheduled = getattr(spec.levy, "kind", "none") in (
        "compound_poisson", "truncated_stable")
    dom_kind, dom_lo, dom_hi, dom_r2, dom_general = _domain_args(
        spec.domain, d)
    needs_python = (record_paths or scheduled or ell_mode == 2
                    or spec.policy.grid is not None or dom_general or d > 8)
    kern = backend.resolve(spec.backend, needs_python)

    out = dict(
        tau=np.full(n, spec.horizon), tau_hat=np.full(n, spec.horizon),
        exit_x=np.full((n, d), np.nan), cost=np.zeros(n),
        censored=np.ones(n, dtype=bool),
        exited_by_jump=np.zeros(n, dtype=bool),
        paths=[None] * n if record_paths else None)

    blocks = [(b, min(b + BLOCK, n)) for b in range(0, n, BLOCK)]

    def run(block):
        lo, hi = block
        if scheduled:
            _run_scheduled_block(spec, x0, lo, hi, seed, first_index,
                                 record_paths, ell_mode, ell_c, ell_fn, out)
        else:
            _run_block(spec, x0, lo, hi, seed, first_index, record_paths,
                       ell_mode, ell_c, ell_fn, kern, out,
                       (dom_kind, dom_lo, dom_hi, dom_r2))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            list(ex.map(run, blocks))
    else:
        for b in blocks:
            run(b)
    return ExitArchive(spec.dt, spec.horizon, seed, first_index, x0,
                       out["tau"], out["tau_hat"], out["exit_x"],
                       out["cost"], out["censored"], out["exited_by_jump"],
                       out["paths"])


def _run_block(spec, x0, lo, hi, seed, first_index, record, ell_mode, ell_c,
               ell_fn, kern, out, dom):
    m = hi - lo
    d = spec.dim
    k = spec.coeffs.noise_dim
    dt, sqdt = spec.dt, math.sqrt(spec.dt)
    max_steps = spec.max_steps
    model = spec.levy
    stable = getattr(model, "kind", "none") == "alpha_stable"
    dom_kind, dom_lo, dom_hi, dom_r2 = dom
    pol = spec.policy
    co = spec.coeffs

    gens = [_stream(seed, first_index + lo + i) for i in range(m)]
    X = np.tile(x0, (m, 1))
    status = np.zeros(m, dtype=np.uint8)
    has_tau = np.zeros(m, dtype=np.uint8)
    acc = np.zeros(m)
    tau_x = np.zeros((m, d))
    jumped = np.zeros(m, dtype=np.uint8)
    g_tau = np.full(m, -1, dtype=np.int64)
    g_that = np.full(m, -1, dtype=np.int64)
    rec_chunks = [[] for _ in range(m)] if record else None

    offset = 0
    while offset < max_steps and (status == 0).any():
        L = min(CHUNK, max_steps - offset)
        act = np.nonzero(status == 0)[0]
        gauss = None
        if k > 0:
            gauss = np.zeros((m, L, k))
            for r in act:
                gauss[r] = gens[r].standard_normal((L, k))
        levy_inc = None
        lnorm = None
        if stable:
            u = np.zeros((m, L))
            e = np.ones((m, L))
            z = np.zeros((m, L, d)) if d >= 2 else None
            for r in act:
                u[r] = gens[r].random(L)
                e[r] = gens[r].standard_exponential(L)
                if d >= 2:
                    z[r] = gens[r].standard_normal((L, d))
            levy_inc = np.zeros((m, L, d))
            levy_inc[act] = model.increments_from_draws(
                dt, u[act], e[act], None if d == 1 else z[act])
            lnorm = np.sqrt((levy_inc * levy_inc).sum(axis=2))
        w = np.exp(-dt * np.arange(offset, offset + L + 1))
        tau_rel = np.full(m, -1, dtype=np.int64)
        that_rel = np.full(m, -1, dtype=np.int64)
        rec_states = np.zeros((m, L, d)) if record else None
        rec_pre = np.zeros((m, L, d)) if record else None

        kern.step_chunk(L, X, gauss, levy_inc, lnorm, w, dt, sqdt,
                        pol.c0, pol.c1, pol.lo, pol.hi,
                        co.b0, co.b1, co.s0, co.s1,
                        dom_kind, dom_lo, dom_hi, dom_r2,
                        spec.jump_mark_threshold, ell_mode, ell_c,
                        has_tau, acc, tau_rel, that_rel, tau_x, jumped,
                        status, rec_states, rec_pre)

        newly = np.nonzero(tau_rel >= 0)[0]
        g_tau[newly] = offset + tau_rel[newly] + 1
        has_tau[newly] = 1
        done = np.nonzero(that_rel >= 0)[0]
        g_that[done] = offset + that_rel[done] + 1
        bad = np.nonzero(status == 2)[0]
        if bad.size:
            raise NonFiniteState(
                f"non-finite state in trajectory {first_index + lo + bad[0]}"
                f" before step {offset + L}")
        if record:
            for r in act:
                n_keep = that_rel[r] + 1 if that_rel[r] >= 0 else L
                rec_chunks[r].append((rec_states[r, :n_keep].copy(),
                                      rec_pre[r, :n_keep].copy()))
        offset += L

    sl = slice(lo, hi)
    exited = g_tau >= 0
    tau_view = out["tau"][sl]
    tau_view[exited] = g_tau[exited] * dt
    that_view = out["tau_hat"][sl]
    hit = g_that >= 0
    that_view[hit] = g_that[hit] * dt
    out["exit_x"][sl] = np.where(exited[:, None], tau_x, np.nan)
    out["cost"][sl] = acc
    out["censored"][sl] = ~exited
    out["exited_by_jump"][sl] = jumped.astype(bool) & exited
    if record:
        for r in range(m):
            out["paths"][lo + r] = _assemble_path(
                x0, rec_chunks[r], dt, spec.jump_mark_threshold,
                spec.horizon)


def _assemble_path(x0, chunks, dt, thr, horizon):
    states = np.concatenate([c[0] for c in chunks]) if chunks else \
        np.zeros((0, len(x0)))
    pres = np.concatenate([c[1] for c in chunks]) if chunks else states
    nsteps = len(states)
    times = [0.0] + [(i + 1) * dt for i in range(nsteps)]
    pts = [tuple(float(c) for c in x0)] + \
        [tuple(float(c) for c in s) for s in states]
    jump_lefts = {}
    for i in range(nsteps):
        gap = math.sqrt(float(((states[i] - pres[i]) ** 2).sum()))
        if gap > thr:
            jump_lefts[i + 1] = tuple(float(c) for c in pres[i])
    return from_grid(times, pts, jump_lefts,
                     horizon=times[-1] + dt if nsteps else dt)


def simulate(spec, x0, seed, stream_index=0, ell=None):
    """One trajectory with its recorded path; see batch_simulate."""
    arch = batch_simulate(spec, x0, 1, seed, first_index=stream_index,
                          record_paths=True, ell=ell)
    return arch.sample(0)


# -- finite-activity models: scheduled jumps with sub-stepping ----------


def _run_scheduled_block(spec, x0, lo, hi, seed, first_index, record,
                         ell_mode, ell_c, ell_fn, out):
    model = spec.levy
    d = spec.dim
    if d != 1:
        raise ValueError("scheduled-jump models are 1-d")
    dt, sqdt = spec.dt, math.sqrt(spec.dt)
    max_steps = spec.max_steps
    pol, co = spec.policy, spec.coeffs
    k = co.noise_dim
    comp = float(model.compensator_drift())
    sigma_small = 0.0
    if getattr(model, "kind", "") == "truncated_stable" and \
            model.gaussian_compensation:
        sigma_small = math.sqrt(model.small_jump_variance())
    domain = spec.domain

    def ell_val(x):
        if ell_mode == 1:
            return ell_c
        if ell_mode == 2:
            return float(ell_fn(np.asarray([x]))[0])
        return 0.0

    for i in range(hi - lo):
        gen = _stream(seed, first_index + lo + i)
        n_jumps = gen.poisson(model.intensity * spec.horizon)
        jtimes = np.sort(gen.random(n_jumps)) * spec.horizon
        jsizes = model.sample_jump_sizes(gen, n_jumps)
        x = float(x0[0])
        tau = None
        that = None
        exit_x = math.nan
        by_jump = False
        acc = 0.0
        jp = 0  # schedule pointer
        times = [0.0]
        vals = [(x,)]
        jump_lefts = {}
        step = 0
        while step < max_steps and that is None:
            L = min(CHUNK, max_steps - step)
            gauss = gen.standard_normal((L, k)) if k else None
            small = gen.standard_normal(L) if sigma_small else None
            for l in range(L):
                t0 = (step + l) * dt
                t1 = (step + l + 1) * dt
                a = min(max(pol.c0 + pol.c1[0] * x, pol.lo), pol.hi)
                drift = co.b0[0] + a * co.b1[0] - comp
                ell_left = ell_val(x)
                cur_t, x_cur = t0, x
                while jp < n_jumps and jtimes[jp] <= t1:
                    s = float(jtimes[jp])
                    x_pre = x_cur + drift * (s - cur_t)
                    x_new = x_pre + float(jsizes[jp])
                    times.append(s)
                    vals.append((x_new,))
                    jump_lefts[len(times) - 1] = (x_pre,)
                    if domain is not None:
                        if tau is None and not domain.contains_open((x_new,)):
                            tau, exit_x, by_jump = s, x_new, True
                        if not domain.contains_closed((x_new,)):
                            that = s
                    cur_t, x_cur = s, x_new
                    jp += 1
                    if that is not None:
                        break
                if that is not None:
                    break
                x_new = x_cur + drift * (t1 - cur_t)
                for kk in range(k):
                    x_new += (co.s0[0, kk] + a * co.s1[0, kk]) \
                        * (sqdt * gauss[l, kk])
                if sigma_small:
                    x_new += sigma_small * sqdt * small[l]
                if not math.isfinite(x_new):
                    raise NonFiniteState(
                        f"non-finite state in trajectory "
                        f"{first_index + lo + i} at t={t1}")
                if tau is None and ell_mode:
                    acc += 0.5 * dt * (math.exp(-t0) * ell_left
                                       + math.exp(-t1) * ell_val(x_new))
                times.append(t1)
                vals.append((x_new,))
                x = x_new
                if domain is not None:
                    if tau is None and not domain.contains_open((x_new,)):
                        tau, exit_x, by_jump = t1, x_new, False
                    if not domain.contains_closed((x_new,)):
                        that = t1
                        break
            step += L

        r = lo + i
        out["censored"][r] = tau is None
        out["tau"][r] = spec.horizon if tau is None else tau
        out["tau_hat"][r] = spec.horizon if that is None else that
        out["exit_x"][r, 0] = exit_x
        out["cost"][r] = acc
        out["exited_by_jump"][r] = by_jump and tau is not None
        if record:
            out["paths"][r] = from_grid(
                times, vals, jump_lefts, horizon=times[-1] + dt)


# -- coupled pairs and boundary probes ----------------------------------


def coupled_sup_gap(spec, xa, xb, t_end, n, seed, first_index=0):
    """sup over the grid of |X^a - X^b|^2 per path, under shared noise.

    Both trajectories consume the same per-path stream, which couples
    the Brownian and jump inputs exactly; no exit detection is done.
    """
    xa = np.atleast_1d(np.asarray(xa, dtype=float))
    xb = np.atleast_1d(np.asarray(xb, dtype=float))
    d = spec.dim
    k = spec.coeffs.noise_dim
    dt, sqdt = spec.dt, math.sqrt(spec.dt)
    steps = int(round(t_end / spec.dt))
    model = spec.levy
    stable = getattr(model, "kind", "none") == "alpha_stable"
    pol, co = spec.policy, spec.coeffs
    gaps = np.zeros(n)
    for base in range(0, n, BLOCK):
        m = min(BLOCK, n - base)
        gens = [_stream(seed, first_index + base + i) for i in range(m)]
        A = np.tile(xa, (m, 1))
        B = np.tile(xb, (m, 1))
        g = ((A - B) ** 2).sum(axis=1)
        done = 0
        while done < steps:
            L = min(CHUNK, steps - done)
            gauss = None
            if k:
                gauss = np.stack([gg.standard_normal((L, k)) for gg in gens])
            inc = None
            if stable:
                u = np.stack([gg.random(L) for gg in gens])
                e = np.stack([gg.standard_exponential(L) for gg in gens])
                z = np.stack([gg.standard_normal((L, d)) for gg in gens]) \
                    if d >= 2 else None
                inc = model.increments_from_draws(dt, u, e, z)
            for l in range(L):
                for X in (A, B):
                    a = pol.control(X)
                    X += co.drift(a) * dt
                    if k:
                        sig = co.sigma(a)
                        X += (sig @ (sqdt * gauss[:, l, :, None]))[:, :, 0]
                    if inc is not None:
                        X += inc[:, l, :]
                g = np.maximum(g, ((A - B) ** 2).sum(axis=1))
            done += L
        gaps[base:base + m] = g
    return gaps


def boundary_exit_probe(spec, x_boundary, delta, n, seed):
    """Fraction of trajectories from a boundary point with tau_hat <= delta.

    Statistical stand-in for the admissibility condition that the closure
    is left instantly from the boundary almost surely; membership of a
    policy in the admissible set is not algorithmically decidable.
    """
    probe = SimulationSpec(spec.domain, spec.policy, spec.coeffs, spec.levy,
                           spec.dt, horizon=max(delta, spec.dt),
                           jump_mark_threshold=spec.jump_mark_threshold,
                           backend=spec.backend)
    arch = batch_simulate(probe, x_boundary, n, seed)
    return float((arch.tau_hat <= delta).mean())
