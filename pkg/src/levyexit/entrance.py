"""Entrance times, entrance points, and exit-continuity classification.

All functionals are computed exactly on the piecewise-affine presentation
(in the arithmetic of the stored numbers).  The scalar reduction through
the signed distance never materializes: first-entry times into the
complement of a convex domain are solved face by face, which keeps every
crossing a rational operation for interval/box/polygon domains.

Two infimum conventions are exposed: over t >= 0 (path functionals) and
over t > 0 (SDE exit times); they differ only when the entry condition
holds at t = 0 and nowhere immediately after.
"""

import math
from dataclasses import dataclass, field

from .cadlag import CadlagPath, LowerEnvelope
from .errors import NeverExits, UndeterminedClassification
from .skorohod import apply_timechange, d_inf_upper, two_piece_warp

INF = math.inf


def _dot(a, x):
    return sum(ai * xi for ai, xi in zip(a, x))


def _constraints(domain):
    """Entry condition for the domain complement as constraint records."""
    if getattr(domain, "halfspaces", None) is not None:
        return [("affine", a, b) for a, b in domain.halfspaces]
    return [("ball", domain.center, domain.radius)]


def _affine_candidates(g0, gs, t0, length, include_left, include_right,
                       strict):
    """Times in the segment where g >= 0 (or > 0 if strict) starts to hold.

    The segment carries the affine function g(t) = g0 + gs*(t - t0) on an
    interval of the given length starting at t0; include_left and
    include_right say whether the endpoints belong to the interval.
    Returns a list of (time, isolated); `isolated` marks a candidate
    whose condition holds at that single point only (needed for the
    t > 0 convention at the origin).
    """
    if strict:
        if g0 > 0:
            return [(t0, False)]
        if g0 == 0 and gs > 0:
            return [(t0, False)]
        if g0 < 0 and gs > 0:
            tau = t0 + (-g0) / gs
            if length is INF or tau < t0 + length:
                return [(tau, False)]
        return []
    if g0 > 0:
        return [(t0, False)]
    if g0 == 0:
        if gs >= 0:
            return [(t0, False)]
        return [(t0, True)] if include_left else []
    if gs > 0:
        tau = t0 + (-g0) / gs
        if length is INF or tau < t0 + length:
            return [(tau, False)]
        if include_right and tau == t0 + length:
            return [(tau, False)]
    return []


def _ball_candidates(v, s, center, radius, t0, length, include_left,
                     include_right, strict):
    """Same contract as _affine_candidates for q(t) = |x(t)-c|^2 - R^2.

    Quadratic roots are solved in floats; ball crossings are irrational
    in general so no exactness is promised beyond IEEE arithmetic.
    """
    d = len(v)
    A = sum(si * si for si in s)
    B = 2 * sum((v[j] - center[j]) * s[j] for j in range(d))
    C = sum((v[j] - center[j]) ** 2 for j in range(d)) - radius ** 2
    if A == 0:
        return _affine_candidates(C, B, t0, length, include_left,
                                  include_right, strict)
    out = []
    if C > 0:
        return [(t0, False)]
    if C == 0:
        if strict:
            if B > 0:
                # q(0) = 0 and q > 0 immediately after
                return [(t0, False)]
            if B == 0:
                # q = A t'^2 > 0 immediately after
                return [(t0, False)]
        else:
            if B >= 0:
                return [(t0, False)]
            if include_left:
                out.append((t0, True))
        # moving strictly inward: the re-exit root below still applies
    disc = B * B - 4 * A * C
    if disc < 0:
        return out
    root = (-B + math.sqrt(float(disc))) / (2 * A)
    if root <= 0:
        return out
    tau = t0 + root
    if length is INF or tau < t0 + length:
        out.append((tau, False))
    elif not strict and include_right and tau == t0 + length:
        out.append((tau, False))
    return out


def _segments(path, of):
    """Yield (t0, length, v, s, include_left, include_right).

    of = "right": segments [t_i, t_{i+1}) of the path itself.
    of = "left":  segments (t_i, t_{i+1}] of the left-limit path, plus
                  the single point t = 0 with value path(0).
    """
    n = len(path.times)
    for i in range(n):
        t0 = path.times[i]
        end = path.times[i + 1] if i + 1 < n else path.horizon
        length = INF if end == INF else end - t0
        if of == "right":
            yield t0, length, path.rights[i], path.slopes[i], True, False
        else:
            yield t0, length, path.rights[i], path.slopes[i], False, True


def _first_entry(path, constraints, strict, convention, of="right"):
    best = INF
    if of == "left":
        # the left-limit path at 0 takes the value of the path itself
        v0 = path.rights[0]
        for con in constraints:
            cand = _point_satisfies(v0, con, strict)
            if cand and convention == "geq":
                return 0
            if cand and _holds_after_zero(path, con, strict):
                return 0
    for t0, length, v, s, inc_l, inc_r in _segments(path, of):
        if t0 >= best:
            break
        if of == "left" and length is not INF and t0 + length == path.horizon:
            inc_r = False  # horizon itself is outside the path domain
        for con in constraints:
            if con[0] == "affine":
                _, a, b = con
                cands = _affine_candidates(_dot(a, v) - b, _dot(a, s), t0,
                                           length, inc_l, inc_r, strict)
            else:
                _, c, r = con
                cands = _ball_candidates(v, s, c, r, t0, length, inc_l,
                                         inc_r, strict)
            for tau, isolated in cands:
                if convention == "gt" and tau == 0 and isolated:
                    continue
                if tau < best:
                    best = tau
    return best


def _point_satisfies(x, con, strict):
    if con[0] == "affine":
        _, a, b = con
        g = _dot(a, x) - b
    else:
        _, c, r = con
        g = sum((x[j] - c[j]) ** 2 for j in range(len(x))) - r ** 2
    return g > 0 if strict else g >= 0


def _holds_after_zero(path, con, strict):
    v, s = path.rights[0], path.slopes[0]
    if con[0] == "affine":
        _, a, b = con
        cands = _affine_candidates(_dot(a, v) - b, _dot(a, s), 0,
                                   INF, False, False, strict)
    else:
        _, c, r = con
        cands = _ball_candidates(v, s, c, r, 0, INF, False, False, strict)
    return (0, False) in cands


# -- public operations -------------------------------------------------


def entrance_time(path, domain, target="open_complement", convention="geq",
                  of="right"):
    """First entrance time into the complement of the domain.

    target "open_complement" is the exit time from O (condition
    omega(t) not in O); "closed_complement" exits the closure.  Returns
    math.inf when the path never enters the target before its horizon.
    """
    strict = (target == "closed_complement")
    if target not in ("open_complement", "closed_complement"):
        raise ValueError(f"unknown target {target!r}")
    return _first_entry(path, _constraints(domain), strict, convention, of)


def entrance_time_capped(path, domain, cap, **kw):
    t = entrance_time(path, domain, **kw)
    return min(t, cap)


def entrance_point(path, domain, convention="geq"):
    """Path value at the exit time from O; error if the path never exits."""
    t = entrance_time(path, domain, convention=convention)
    if t == INF or t >= path.horizon:
        raise NeverExits("entrance time is not finite within the horizon")
    return path.eval(t)


def scalar_entrance_time(path, closed=True, cap=None, of="right"):
    """First time a scalar path is <= 0 (closed) or < 0 (open).

    Accepts a CadlagPath or a LowerEnvelope.  This is the 1-d functional
    behind the signed-distance reduction and the semicontinuity lemmas.
    """
    con = [("affine", (-1,), 0)]
    strict = not closed
    if isinstance(path, LowerEnvelope):
        base = path.path
        best = INF
        for i, t in enumerate(base.times):
            val = path.break_values[i]
            if (val < 0 if strict else val <= 0):
                best = t
                break
        interior = _first_entry(base, con, strict, "geq", of="left")
        # left-variant intervals (t_i, t_{i+1}] cover the open interiors
        # and segment-end limits, which together with the breakpoint
        # minima give the envelope's exact first entry
        best = min(best, interior)
        t = best
    else:
        if path.dim != 1:
            raise ValueError("scalar_entrance_time needs a scalar path")
        t = _first_entry(path, con, strict, "geq", of=of)
    return t if cap is None else min(t, cap)


@dataclass
class GammaRecord:
    """Exit-continuity classification of one path against one domain."""

    determined: bool
    in_gamma: bool
    in_gamma_hat: bool
    t_exit: object
    t_exit_left: object
    t_exit_closure: object
    entrance_pt: object = None
    entrance_pt_left: object = None
    violations: list = field(default_factory=list)


def classify_gamma(path, domain, require_determined=False):
    """Test the three-entrance-time equality and the entrance-point rule.

    A path is in the time-continuity class when the exit times of the
    path, of its left-limit path, and of the closure complement all
    agree; it is additionally in the point-continuity class when a
    boundary-valued left entrance point forces equality of the entrance
    points.  Undetermined when nothing exits before a finite horizon.
    """
    t1 = entrance_time(path, domain, "open_complement")
    t2 = entrance_time(path, domain, "open_complement", of="left")
    t3 = entrance_time(path, domain, "closed_complement")
    determined = not (path.horizon < INF and t1 == t2 == t3 == INF)
    if not determined and require_determined:
        raise UndeterminedClassification(
            "no exit before the path horizon; classification unknown")

    violations = []
    if t2 != t1:
        violations.append(f"left-path exit {t2} != exit {t1}")
    if t3 != t1:
        violations.append(f"closure exit {t3} != exit {t1}")
    in_gamma = determined and not violations

    pi = pi_left = None
    in_hat = in_gamma
    if t1 != INF and t1 < path.horizon:
        pi = path.eval(t1)
    if t2 != INF and t2 < path.horizon:
        pi_left = path.rights[0] if t2 == 0 else path.left_limit(t2)
    if in_gamma and pi is not None:
        if domain.on_boundary(pi_left) and pi_left != pi:
            in_hat = False
            violations.append(
                f"boundary left entrance point {pi_left} != {pi}")
    return GammaRecord(determined, in_gamma, in_hat, t1, t2, t3, pi, pi_left,
                       violations)


def classify_gamma_skeleton(path, domain):
    """classify_gamma with a vectorized strictly-inside prefix check.

    For convex half-space domains, breakpoints whose right values and
    left limits are all strictly inside contribute no entrance-time
    candidates (segments between strictly interior points of a convex
    domain stay strictly interior), so the path can be truncated to a
    short window before the first non-interior breakpoint and classified
    exactly there.  Falls back to the full scan when numpy or the domain
    shape does not apply.
    """
    hs = getattr(domain, "halfspaces", None)
    if hs is None or len(path.times) < 16:
        return classify_gamma(path, domain)
    import numpy as np

    T = np.asarray(path.times, dtype=float)
    R = np.asarray(path.rights, dtype=float)
    S = np.asarray(path.slopes, dtype=float)
    left = R[:-1] + S[:-1] * (T[1:] - T[:-1])[:, None]
    A = np.asarray([h[0] for h in hs], dtype=float)
    b = np.asarray([h[1] for h in hs], dtype=float)
    r_in = (R @ A.T < b[None, :]).all(axis=1)
    l_in = (left @ A.T < b[None, :]).all(axis=1)
    # breakpoint i is clean when its right value and incoming left limit
    # are strictly inside; the last breakpoint is never clean because the
    # final segment (to the horizon) is not covered by the left limits
    clean = r_in.copy()
    clean[1:] &= l_in
    clean[-1] = False
    bad = np.nonzero(~clean)[0]
    start = max(0, int(bad[0]) - 2)
    if start == 0:
        return classify_gamma(path, domain)
    t0 = path.times[start]
    try:
        sub = CadlagPath(tuple(t - t0 for t in path.times[start:]),
                         path.rights[start:], path.slopes[start:],
                         path.horizon - t0)
    except ValueError:
        # re-anchoring collapsed a breakpoint pair (sub-ulp spacing)
        return classify_gamma(path, domain)
    rec = classify_gamma(sub, domain)
    shift = (lambda v: v if v == INF else v + t0)
    rec.t_exit = shift(rec.t_exit)
    rec.t_exit_left = shift(rec.t_exit_left)
    rec.t_exit_closure = shift(rec.t_exit_closure)
    return rec


@dataclass
class EntranceRecord:
    t_exit: object
    t_exit_capped: object
    entrance_pt: object
    t_exit_left: object
    t_exit_closure: object

    def to_text(self):
        def fmt(v):
            return "inf" if v == INF else str(v)

        pt = ("none" if self.entrance_pt is None
              else ",".join(str(c) for c in self.entrance_pt))
        return "\n".join([
            f"T_exit = {fmt(self.t_exit)}",
            f"T_exit_capped = {fmt(self.t_exit_capped)}",
            f"entrance_point = {pt}",
            f"T_exit_left_path = {fmt(self.t_exit_left)}",
            f"T_exit_closure = {fmt(self.t_exit_closure)}",
        ]) + "\n"


def entrance_record(path, domain, cap=None):
    t1 = entrance_time(path, domain, "open_complement")
    t2 = entrance_time(path, domain, "open_complement", of="left")
    t3 = entrance_time(path, domain, "closed_complement")
    pt = None
    if t1 != INF and t1 < path.horizon:
        pt = path.eval(t1)
    capped = t1 if cap is None else min(t1, cap)
    return EntranceRecord(t1, capped, pt, t2, t3)


# -- continuity probe ---------------------------------------------------


@dataclass
class ProbeRow:
    label: str
    eps: float
    d_inf_upper: float
    t_gap: float
    pi_gap: float


def _pi_gap(a, b):
    if a is None or b is None:
        return INF
    return math.sqrt(sum(float(ai - bi) ** 2 for ai, bi in zip(a, b)))


def continuity_probe(path, domain, kinds=("shift", "warp"),
                     magnitudes=(1e-1, 1e-2, 1e-3), shift_direction=None,
                     warp_knot=None):
    """Perturb the path while tracking certified metric upper bounds.

    For each perturbation size the report row holds an upper bound on the
    Skorohod distance between the perturbed and base paths and the exact
    entrance time/point gaps, so convergence (or a genuine discontinuity)
    is visible directly.
    """
    base_t = entrance_time(path, domain)
    base_pi = None
    if base_t != INF and base_t < path.horizon:
        base_pi = path.eval(base_t)
    if shift_direction is None:
        shift_direction = tuple([1] + [0] * (path.dim - 1))
    rows = []
    for kind in kinds:
        for eps in magnitudes:
            if kind == "shift":
                pert = path.shift(tuple(eps * c for c in shift_direction))
                upper = d_inf_upper(pert, path)
            elif kind == "warp":
                knot = warp_knot
                if knot is None:
                    knot = min(base_t if base_t not in (0, INF) else 0.5,
                               0.8) / 2
                lam = two_piece_warp(knot, eps, horizon=path.horizon)
                pert = apply_timechange(path, lam)
                upper = d_inf_upper(pert, path, witness=lam)
            else:
                raise ValueError(f"unknown perturbation kind {kind!r}")
            t_n = entrance_time(pert, domain)
            pi_n = None
            if t_n != INF and t_n < pert.horizon:
                pi_n = pert.eval(t_n)
            t_gap = abs(float(t_n - base_t)) if INF not in (t_n, base_t) \
                else INF
            rows.append(ProbeRow(kind, float(eps), float(upper), t_gap,
                                 _pi_gap(pi_n, base_pi)))
    return rows
