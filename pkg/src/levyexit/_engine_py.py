"""Pure-numpy stepping kernel (fallback for the compiled extension).

The kernel advances a block of paths through a chunk of Euler steps.
Noise is pre-generated and pre-transformed by the driver, so the kernel
only performs plain IEEE add/mul/compare in a fixed order; the Cython
kernel performs the identical sequence (compiled with fp-contract off),
which keeps the two backends bit-for-bit equal.
"""

import numpy as np

name = "python"

ACTIVE = 0
EXITED = 1
NONFINITE = 2


def step_chunk(L, X, gauss, levy_inc, levy_norm, w, dt, sqdt,
               pol_c0, pol_c1, pol_lo, pol_hi,
               b0, b1, s0, s1,
               dom_kind, dom_lo, dom_hi, dom_r2,
               jump_thr, ell_mode, ell_c,
               has_tau, acc, tau_rel, that_rel, tau_x, jumped, status,
               rec_states=None, rec_pre=None):
    """Advance paths until closure exit, non-finite state, or L steps.

    Shapes: X (m, d) in/out; gauss (m, L, k) or None; levy_inc
    (m, L, d) or None; levy_norm (m, L) or None; w (L+1,) discount
    weights exp(-t_n).  tau_rel / that_rel receive chunk-local step
    indices (or stay -1); has_tau marks paths whose exit from the open
    domain happened in an earlier chunk.  ell_mode: 0 no running cost,
    1 constant running cost ell_c.
    """
    m, d = X.shape
    k = gauss.shape[2] if gauss is not None else 0
    alive = status == ACTIVE
    pre_tau = (~has_tau.astype(bool)) & alive
    c_half = 0.5 * dt * ell_c

    for step in range(L):
        idx = np.nonzero(alive)[0]
        if idx.size == 0:
            break
        Xa = X[idx]
        # control value: a = clip(c0 + c1 . x, lo, hi), summed in index order
        a = np.full(idx.size, pol_c0)
        for j in range(d):
            a = a + Xa[:, j] * pol_c1[j]
        a = np.minimum(np.maximum(a, pol_lo), pol_hi)
        Xn = Xa + (b0[None, :] + a[:, None] * b1[None, :]) * dt
        for kk in range(k):
            xi = sqdt * gauss[idx, step, kk]
            sig = s0[None, :, kk] + a[:, None] * s1[None, :, kk]
            Xn = Xn + sig * xi[:, None]
        if rec_pre is not None:
            rec_pre[idx, step, :] = Xn
        if levy_inc is not None:
            Xn = Xn + levy_inc[idx, step, :]
        if rec_states is not None:
            rec_states[idx, step, :] = Xn

        finite = np.isfinite(Xn).all(axis=1)
        if not finite.all():
            bad = idx[~finite]
            status[bad] = NONFINITE
            alive[bad] = False
            idx = idx[finite]
            Xn = Xn[finite]
            if idx.size == 0:
                break

        if ell_mode == 1:
            pays = pre_tau[idx]
            if pays.any():
                acc[idx[pays]] += c_half * (w[step] + w[step + 1])

        in_open, in_closed = _membership(Xn, dom_kind, dom_lo, dom_hi,
                                         dom_r2)
        newly_tau = pre_tau[idx] & ~in_open
        if newly_tau.any():
            rows = idx[newly_tau]
            tau_rel[rows] = step
            tau_x[rows] = Xn[newly_tau]
            if levy_norm is not None:
                jumped[rows] = levy_norm[rows, step] > jump_thr
            pre_tau[rows] = False
        X[idx] = Xn
        done = ~in_closed
        if done.any():
            rows = idx[done]
            that_rel[rows] = step
            status[rows] = EXITED
            alive[rows] = False


def _membership(X, kind, lo, hi, r2):
    if kind == 0:  # unbounded
        t = np.ones(X.shape[0], dtype=bool)
        return t, t
    if kind in (1, 2):  # interval / box
        in_open = ((X > lo[None, :]) & (X < hi[None, :])).all(axis=1)
        in_closed = ((X >= lo[None, :]) & (X <= hi[None, :])).all(axis=1)
        return in_open, in_closed
    if kind == 3:  # ball centered at lo with squared radius r2
        diff = X - lo[None, :]
        sq = np.zeros(X.shape[0])
        for j in range(X.shape[1]):
            sq = sq + diff[:, j] * diff[:, j]
        return sq < r2, sq <= r2
    raise ValueError(f"unknown domain kind {kind}")
