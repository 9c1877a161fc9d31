"""Time changes and the Skorohod J1 metrics d°_t and d°_infty.

The metric on [0, t) is inf over time changes of max(||lambda||°,
sup |x - y∘lambda|), where ||lambda||° is the sup of |log chord slope|.
The infimum over all continuous time changes is not exactly computable,
so metric_finite reports a certified interval: the upper bound is the
best candidate found (order-preserving matchings of salient breakpoints
plus local anchor refinement), the lower bound is the best of several
sound elementary bounds.  For the d°_infty sum the window products g_m * x are
approximated piecewise-affinely with a certified sup error that is
folded into the interval.
"""

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from fractions import Fraction

from .cadlag import CadlagPath, path_sub, sup_norm
from .errors import HorizonMismatch, InvalidTimeChange

INF = math.inf


def _abs_log_ratio(dy, dx):
    """|log(dy/dx)| computed as |log p - log q|, exactly symmetric under
    inversion of the ratio."""
    ratio = Fraction(dy) / Fraction(dx)
    if ratio <= 0:
        raise InvalidTimeChange("non-increasing anchors")
    return abs(math.log(ratio.numerator) - math.log(ratio.denominator))


class TimeChange:
    """Strictly increasing piecewise-linear bijection of [0, T] onto itself."""

    __slots__ = ("anchors", "horizon")

    def __init__(self, anchors):
        anchors = tuple((s, l) for s, l in anchors)
        if len(anchors) < 2:
            raise InvalidTimeChange("need at least the two endpoints")
        if anchors[0] != (0, 0):
            raise InvalidTimeChange("time change must fix 0")
        T = anchors[-1][0]
        if anchors[-1][1] != T or T <= 0:
            raise InvalidTimeChange("time change must fix its horizon")
        for (s0, l0), (s1, l1) in zip(anchors, anchors[1:]):
            if not (s1 > s0 and l1 > l0):
                raise InvalidTimeChange("anchors must increase strictly")
        self.anchors = anchors
        self.horizon = T

    def __call__(self, s):
        """lambda(s); the identity beyond the horizon."""
        if s >= self.horizon:
            return s
        if s < 0:
            raise InvalidTimeChange(f"negative time {s}")
        ss = [a[0] for a in self.anchors]
        i = bisect_right(ss, s) - 1
        s0, l0 = self.anchors[i]
        s1, l1 = self.anchors[i + 1]
        return l0 + (l1 - l0) * (s - s0) / (s1 - s0)

    def inv(self, t):
        """lambda^{-1}(t); the identity beyond the horizon."""
        if t >= self.horizon:
            return t
        if t < 0:
            raise InvalidTimeChange(f"negative time {t}")
        ls = [a[1] for a in self.anchors]
        i = bisect_right(ls, t) - 1
        s0, l0 = self.anchors[i]
        s1, l1 = self.anchors[i + 1]
        return s0 + (s1 - s0) * (t - l0) / (l1 - l0)

    def inverse(self):
        return TimeChange(tuple((l, s) for s, l in self.anchors))

    def deviation(self):
        """sup_s |lambda(s) - s|, attained at an anchor."""
        return max(abs(l - s) for s, l in self.anchors)

    def __repr__(self):
        return f"TimeChange({len(self.anchors)} anchors, T={self.horizon})"


def identity_timechange(T):
    return TimeChange(((0, 0), (T, T)))


def two_piece_warp(knot, log_slope, horizon, settle=None):
    """Warp with initial chord slope e^{log_slope}, identity after settle.

    Keeping the map equal to the identity beyond `settle` makes every
    restriction to [0, m], m >= settle, a valid time change of [0, m],
    which the certified d°_infty upper bound uses.
    """
    image = knot * math.exp(log_slope)
    if settle is None:
        settle = min(1.0, horizon / 2 if horizon != INF else 1.0)
    if not 0 < knot < settle <= (horizon if horizon != INF else settle):
        raise InvalidTimeChange("need 0 < knot < settle <= horizon")
    if not 0 < image < settle:
        raise InvalidTimeChange("warped knot leaves (0, settle)")
    T = settle if horizon == INF else horizon
    anchors = [(0, 0), (knot, image), (settle, settle)]
    if T > settle:
        anchors.append((T, T))
    return TimeChange(anchors)


def timechange_seminorm(lam):
    """||lambda||° = sup over chords of |log slope|.

    For a piecewise-linear map every chord slope is a convex combination
    of segment slopes, so the sup is the largest |log| over segments.
    """
    out = 0.0
    for (s0, l0), (s1, l1) in zip(lam.anchors, lam.anchors[1:]):
        out = max(out, _abs_log_ratio(l1 - l0, s1 - s0))
    return out


def apply_timechange(path, lam):
    """The path t -> omega(lambda(t)), exactly (affine ∘ linear is affine).

    lambda may have a shorter horizon than the path, in which case it is
    extended by the identity; a longer horizon is a HorizonMismatch.

    Breakpoints of the result are path breakpoints pulled back through
    lambda^{-1} plus lambda's own anchors.  Values at pulled-back
    breakpoints are taken from the path's stored right values directly,
    never by re-applying lambda to a rounded preimage, so jumps survive
    float round-trips intact.
    """
    if lam.horizon > path.horizon:
        raise HorizonMismatch(
            f"time change on [0, {lam.horizon}] exceeds path horizon "
            f"{path.horizon}")
    events = {}
    for i, t in enumerate(path.times):
        s = lam.inv(t) if t < lam.horizon else t
        events[s] = ("break", i)
    for s, _ in lam.anchors:
        if s < path.horizon and s not in events:
            events[s] = ("anchor", None)
    order = sorted(events)

    def lam_right_slope(s):
        if s >= lam.horizon:
            return 1
        ss = [a[0] for a in lam.anchors]
        j = min(bisect_right(ss, s) - 1, len(lam.anchors) - 2)
        s0, l0 = lam.anchors[j]
        s1, l1 = lam.anchors[j + 1]
        return (l1 - l0) / (s1 - s0)

    times, rights, slopes = [], [], []
    seg = 0
    for s in order:
        kind, idx = events[s]
        if kind == "break":
            seg = idx
            val = path.rights[idx]
        else:
            t = lam(s)
            t0, v, sl = path.times[seg], path.rights[seg], path.slopes[seg]
            val = tuple(v[j] + sl[j] * (t - t0) for j in range(path.dim))
        f = lam_right_slope(s)
        times.append(s)
        rights.append(val)
        slopes.append(tuple(c * f for c in path.slopes[seg]))
    return CadlagPath._raw(times, rights, slopes, path.horizon)


# -- metric on [0, t) ---------------------------------------------------


@dataclass
class SearchBudget:
    max_candidates: int = 4000
    max_jumps: int = 8
    refine_rounds: int = 1
    refine_iters: int = 24
    lower_bisect_iters: int = 60


@dataclass
class MetricResult:
    upper: float
    lower: float
    witness: TimeChange | None = None
    gap_flag: bool = False
    terms: list = field(default_factory=list)

    @property
    def certified(self):
        return self.upper - self.lower <= 1e-9

    def to_text(self):
        lines = [f"upper = {self.upper!r}", f"lower = {self.lower!r}",
                 f"gap_flag = {self.gap_flag}"]
        if self.witness is not None:
            anchors = " ".join(f"({float(s)},{float(l)})"
                               for s, l in self.witness.anchors)
            lines.append(f"witness_anchors = {anchors}")
        return "\n".join(lines) + "\n"


def _jumps_with_sizes(path):
    out = []
    for i in range(1, len(path.times)):
        left = path.end_limit(i - 1)
        right = path.rights[i]
        sq = sum((float(a) - float(b)) ** 2 for a, b in zip(right, left))
        if sq > 0:
            out.append((path.times[i], math.sqrt(sq)))
    return out


def _matchings(jx, jy, cap):
    """Order-preserving pairings between subsets of two jump-time lists.

    Each pairing is generated exactly once by always extending with a
    pair strictly to the right of the previous one.
    """
    out = [[]]
    truncated = False

    def rec(i, j, acc):
        nonlocal truncated
        for ii in range(i, len(jx)):
            for jj in range(j, len(jy)):
                if len(out) >= cap:
                    truncated = True
                    return
                ext = acc + [(jx[ii], jy[jj])]
                out.append(ext)
                rec(ii + 1, jj + 1, ext)

    rec(0, 0, [])
    return out, truncated


def _cost(x, y, lam, T):
    warped = apply_timechange(y, lam)
    return max(timechange_seminorm(lam),
               float(sup_norm(path_sub(x, warped), T)))


def _coordinate_range_bound(x, y, T):
    """max over coordinates of |sup x_j - sup y_j| and |inf x_j - inf y_j|.

    Any time change is a bijection of [0, T), so sup and inf of each
    coordinate are invariant under composition; the sup distance cannot
    beat the range discrepancy.
    """
    best = 0.0
    for j in range(x.dim):
        for sign in (1, -1):
            sx = _coord_sup(x, j, T, sign)
            sy = _coord_sup(y, j, T, sign)
            best = max(best, abs(float(sx) - float(sy)))
    return best


def _coord_sup(path, j, T, sign):
    best = None
    for i in range(len(path.times)):
        ti = path.times[i]
        if ti >= T:
            break
        end = path.times[i + 1] if i + 1 < len(path.times) else path.horizon
        end = min(end, T)
        v = path.rights[i][j]
        w = v + path.slopes[i][j] * (end - ti)
        for cand in (v, w):
            cand = sign * cand
            if best is None or cand > best:
                best = cand
    return best


def _endpoint_bound(x, y, T):
    """|x(0)-y(0)| and the left limits at T are pinned by lambda(0)=0,
    lambda(T)=T."""

    def norm(a, b):
        return math.sqrt(sum((float(u) - float(v)) ** 2
                             for u, v in zip(a, b)))

    b0 = norm(x.rights[0], y.rights[0])
    ax = _left_at(x, T)
    ay = _left_at(y, T)
    return max(b0, norm(ax, ay))


def _left_at(path, T):
    if T <= path.times[0]:
        return path.rights[0]
    if T >= path.horizon:
        i = len(path.times) - 1
        t0 = path.times[i]
        dt = T - t0
        return tuple(path.rights[i][j] + path.slopes[i][j] * dt
                     for j in range(path.dim))
    return path.left_limit(T)


def _jump_window_bound(x, y, T, iters):
    """Largest c such that some jump of x provably has no match in y.

    If d° < c there is a time change with seminorm and sup distance
    below c; the jump of x at s of size delta then forces a jump of y of
    size >= delta - 2c at a time r with |log(r/s)| <= c and
    |log((T-r)/(T-s))| <= c.  If no such jump of y exists, d° >= c.
    The predicate is monotone in c, so bisection finds its supremum.
    """
    jx = _jumps_with_sizes(x)
    jy = _jumps_with_sizes(y)
    if not jx:
        return 0.0
    T = float(T)

    def predicate(c):
        for s, delta in jx:
            if delta <= 2 * c:
                continue
            s_f = float(s)
            ok = True
            for r, dsize in jy:
                if dsize < delta - 2 * c:
                    continue
                r_f = float(r)
                if abs(math.log(r_f / s_f)) <= c and \
                        abs(math.log((T - r_f) / (T - s_f))) <= c:
                    ok = False
                    break
            if ok:
                return True
        return False

    lo, hi = 0.0, max(d for _, d in jx) / 2
    if not predicate(0.0):
        return 0.0
    for _ in range(iters):
        mid = (lo + hi) / 2
        if predicate(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _refine(x, y, lam, T, best_cost, budget):
    """Coordinate descent on interior anchor images (golden section)."""
    phi = (math.sqrt(5) - 1) / 2
    anchors = [list(a) for a in lam.anchors]
    for _ in range(budget.refine_rounds):
        for k in range(1, len(anchors) - 1):
            lo = float(anchors[k - 1][1])
            hi = float(anchors[k + 1][1])
            span = hi - lo
            if span <= 0:
                continue

            def cost_at(lv):
                trial = [tuple(a) for a in anchors]
                trial[k] = (anchors[k][0], lv)
                try:
                    return _cost(x, y, TimeChange(trial), T)
                except InvalidTimeChange:
                    return INF

            a = lo + 1e-12 * span
            b = hi - 1e-12 * span
            c1 = b - phi * (b - a)
            c2 = a + phi * (b - a)
            f1, f2 = cost_at(c1), cost_at(c2)
            for _ in range(budget.refine_iters):
                if f1 <= f2:
                    b, c2, f2 = c2, c1, f1
                    c1 = b - phi * (b - a)
                    f1 = cost_at(c1)
                else:
                    a, c1, f1 = c1, c2, f2
                    c2 = a + phi * (b - a)
                    f2 = cost_at(c2)
            lv = c1 if f1 <= f2 else c2
            fbest = min(f1, f2)
            if fbest < best_cost:
                anchors[k][1] = lv
                best_cost = fbest
    return TimeChange(tuple(tuple(a) for a in anchors)), best_cost


def _match_points(path, cap):
    """Interior breakpoints ranked by salience (jump size plus slope
    change); matching candidates align these across the two paths.
    Breakpoints whose salience is negligible relative to the strongest
    feature (for example subdivision points of windowed paths) are not
    worth aligning and are dropped without setting the budget flag."""
    out = []
    for i in range(1, len(path.times)):
        left = path.end_limit(i - 1)
        right = path.rights[i]
        jump = math.sqrt(sum((float(a) - float(b)) ** 2
                             for a, b in zip(right, left)))
        dslope = math.sqrt(sum(
            (float(a) - float(b)) ** 2
            for a, b in zip(path.slopes[i], path.slopes[i - 1])))
        out.append((path.times[i], jump + dslope))
    if out:
        # window subdivision kinks carry slope changes ~ sqrt(tol); one
        # percent of the dominant feature separates them cleanly
        floor = 1e-2 * max(s for _, s in out)
        out = [p for p in out if p[1] > floor]
    truncated = len(out) > cap
    if truncated:
        out = sorted(out, key=lambda p: -p[1])[:cap]
        out.sort()
    return [t for t, _ in out], truncated


def _one_direction(x, y, T, budget):
    ident = identity_timechange(T)
    ident_cost = _cost(x, y, ident, T)
    if ident_cost == 0.0:
        return 0.0, 0.0, ident, False
    bx, tr_x = _match_points(x, budget.max_jumps)
    by, tr_y = _match_points(y, budget.max_jumps)
    ms, trunc2 = _matchings(bx, by, budget.max_candidates)
    truncated = tr_x or tr_y or trunc2

    best_cost = ident_cost
    best_lam = ident
    for m in ms:
        anchors = [(0, 0)] + m + [(T, T)]
        try:
            lam = TimeChange(anchors)
        except InvalidTimeChange:
            continue
        c = _cost(x, y, lam, T)
        if c < best_cost:
            best_cost, best_lam = c, lam
    if budget.refine_rounds > 0 and len(best_lam.anchors) > 2:
        best_lam, best_cost = _refine(x, y, best_lam, T, best_cost, budget)

    lower = max(_endpoint_bound(x, y, T),
                _coordinate_range_bound(x, y, T),
                _jump_window_bound(x, y, T, budget.lower_bisect_iters),
                _jump_window_bound(y, x, T, budget.lower_bisect_iters))
    lower = min(lower, best_cost)
    return best_cost, lower, best_lam, truncated


def metric_finite(x, y, t=None, budget=None):
    """Certified interval around d°_t(x, y), symmetric by construction."""
    budget = budget or SearchBudget()
    if t is None:
        t = min(x.horizon, y.horizon)
    if t == INF:
        raise HorizonMismatch("metric_finite needs a finite time; "
                              "use metric_infinite for [0, infinity)")
    if t > x.horizon or t > y.horizon:
        raise HorizonMismatch("paths are not defined up to the requested t")
    xr = x.restrict(t) if x.horizon > t else x
    yr = y.restrict(t) if y.horizon > t else y
    u1, l1, w1, tr1 = _one_direction(xr, yr, t, budget)
    u2, l2, w2, tr2 = _one_direction(yr, xr, t, budget)
    if u2 < u1:
        witness = w2.inverse()
        upper = u2
    else:
        witness = w1
        upper = u1
    lower = min(max(l1, l2), upper)
    return MetricResult(upper, lower, witness, tr1 or tr2)


# -- metric on [0, infinity) --------------------------------------------


def window_path(x, m, tol):
    """Certified piecewise-affine approximation of t -> g_m(t) x(t) on [0, m).

    g_m is 1 up to m-1 and ramps linearly to 0 at m; the product is
    quadratic on the ramp and is sampled finely enough that the secant
    error |q''| w^2 / 8 stays below tol.  Returns (path, error_bound).
    """
    if x.horizon < m:
        raise HorizonMismatch("window needs the path defined on [0, m)")
    times, rights, slopes = [], [], []
    err = 0.0
    for i in range(len(x.times)):
        t0 = x.times[i]
        if t0 >= m:
            break
        end = x.times[i + 1] if i + 1 < len(x.times) else x.horizon
        end = min(end, m)
        v, s = x.rights[i], x.slopes[i]

        def value(t, t0=t0, v=v, s=s):
            g = 1 if t <= m - 1 else m - t
            return tuple(g * (v[j] + s[j] * (t - t0)) for j in range(x.dim))

        pieces = [(t0, end)]
        if t0 < m - 1 < end:
            pieces = [(t0, m - 1), (m - 1, end)]
        for (a, b) in pieces:
            if b <= m - 1:
                # window is identically 1: copy the affine segment
                times.append(a)
                rights.append(value(a))
                slopes.append(s)
                continue
            smax = max(abs(float(c)) for c in s)
            width = float(b - a)
            if smax > 0:
                # product quadratic has second derivative 2 * slope
                n = max(1, math.ceil(
                    width * math.sqrt(smax / (4 * tol / math.sqrt(x.dim)))))
            else:
                n = 1
            err = max(err, math.sqrt(x.dim) * smax * (width / n) ** 2 / 4)
            prev_t = a
            prev_v = value(a)
            for k in range(1, n + 1):
                tk = a + (b - a) * k / n
                vk = value(tk)
                dt = tk - prev_t
                times.append(prev_t)
                rights.append(prev_v)
                slopes.append(tuple((vk[j] - prev_v[j]) / dt
                                    for j in range(x.dim)))
                prev_t, prev_v = tk, vk
    return CadlagPath._raw(times, rights, slopes, m), err


def metric_infinite(x, y, tol=1e-6, budget=None):
    """Truncated sum  sum_m 2^{-m} (1 ∧ d°_m(x^m, y^m))  with certified
    window-approximation and tail errors folded into the interval.

    Window terms default to a coarse candidate budget (top salient
    features only, no anchor refinement): each term is capped at one and
    weighted 2^{-m}, so heavy per-window optimization buys little; pass
    a custom budget to tighten individual terms."""
    if x.horizon != INF or y.horizon != INF:
        raise HorizonMismatch("metric_infinite needs paths on [0, infinity)")
    budget = budget or SearchBudget(max_jumps=3, max_candidates=60,
                                    refine_rounds=0)
    M = max(1, math.ceil(-math.log2(tol)))
    wtol = tol / 16
    upper = 0.0
    lower = 0.0
    terms = []
    gap = False
    for m in range(1, M + 1):
        xw, ex = window_path(x, m, wtol)
        yw, ey = window_path(y, m, wtol)
        r = metric_finite(xw, yw, t=m, budget=budget)
        gap = gap or r.gap_flag
        u_m = min(1.0, r.upper + ex + ey)
        l_m = min(1.0, max(0.0, r.lower - ex - ey))
        upper += 2.0 ** -m * u_m
        lower += 2.0 ** -m * l_m
        terms.append((m, l_m, u_m))
    upper += 2.0 ** -M  # every further term is at most 2^{-m}
    return MetricResult(upper, lower, None, gap, terms)


def d_inf_upper(x, y, witness=None, m_terms=40):
    """Cheap certified upper bound on d°_infty(x, y).

    With a witness time change lambda that is the identity beyond some
    settle time <= 1, each restriction lambda|[0, m] is a valid time
    change of [0, m] and

        d°_m(x^m, y^m) <= max(||lambda||°,
                              ||x - y∘lambda||_[0,m) + dev(lambda) ||y||_m)

    because the window g_m is 1-Lipschitz and bounded by one.  Without a
    witness the identity is used.
    """
    if x.horizon != INF or y.horizon != INF:
        raise HorizonMismatch("d_inf_upper needs paths on [0, infinity)")
    total = 0.0
    if witness is None:
        semi = 0.0
        dev = 0.0
        warped = y
    else:
        for s, l in witness.anchors:
            if s > 1 and l != s:
                raise InvalidTimeChange(
                    "witness must settle to the identity by t = 1")
        semi = timechange_seminorm(witness)
        dev = float(witness.deviation())
        warped = apply_timechange(y, witness)
    diff = path_sub(x, warped)
    for m in range(1, m_terms + 1):
        sup_m = float(sup_norm(diff, m))
        ynorm = float(sup_norm(y, m)) if dev else 0.0
        u_m = max(semi, sup_m + dev * ynorm)
        total += 2.0 ** -m * min(1.0, u_m)
    # every dropped term is at most 2^{-m} * cap; flat-tailed paths give
    # a global sup bound, otherwise cap at one
    cap = 1.0
    if _flat_tail(diff) and (dev == 0.0 or _flat_tail(y)):
        last = float(diff.times[-1]) + 1.0
        if dev:
            last = max(last, float(y.times[-1]) + 1.0)
        sup_g = float(sup_norm(diff, last))
        yn_g = float(sup_norm(y, last)) if dev else 0.0
        cap = min(1.0, max(semi, sup_g + dev * yn_g))
    total += 2.0 ** -m_terms * cap
    return total


def _flat_tail(path):
    return all(c == 0 for c in path.slopes[-1])
