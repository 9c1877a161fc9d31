"""Finitely presented cadlag paths on [0, horizon).

A path is a list of breakpoints 0 = t_0 < t_1 < ... < t_k with one affine
segment per interval [t_i, t_{i+1}) (the last segment extends to the
horizon, which may be infinite).  The right value at a breakpoint may
differ from the left limit of the preceding segment, which is how jumps
are represented.  All evaluations (right values, left limits, running
infima, sup norms) are computed segment-by-segment and are exact in the
arithmetic of the stored numbers: paths built from ints/Fractions give
exact rational answers, float paths give plain IEEE answers.  No
tolerances are applied to time comparisons.
"""

import math
from bisect import bisect_left, bisect_right
from fractions import Fraction

from .errors import (
    ApproximationBudgetExceeded,
    DimensionError,
    TimeOutOfRange,
)

INF = math.inf


def _vec(v):
    if isinstance(v, (tuple, list)):
        return tuple(v)
    return (v,)


def _finite(c):
    if isinstance(c, float):
        return math.isfinite(c)
    return True


class CadlagPath:
    """Piecewise-affine cadlag path.

    Parameters
    ----------
    times : breakpoints, times[0] == 0, strictly increasing.
    rights : right value at each breakpoint (scalar or d-tuple).
    slopes : slope of the segment starting at each breakpoint.
    horizon : end of the domain [0, horizon); math.inf allowed, in which
        case the final segment extrapolates forever.
    """

    __slots__ = ("times", "rights", "slopes", "horizon", "dim")

    def __init__(self, times, rights, slopes, horizon=INF):
        times = tuple(times)
        rights = tuple(_vec(v) for v in rights)
        slopes = tuple(_vec(s) for s in slopes)
        if not times or times[0] != 0:
            raise ValueError("first breakpoint must be 0")
        if not (len(times) == len(rights) == len(slopes)):
            raise ValueError("times, rights, slopes must have equal length")
        for a, b in zip(times, times[1:]):
            if not b > a:
                raise ValueError("breakpoints must be strictly increasing")
        if horizon <= times[-1]:
            raise ValueError("horizon must exceed the last breakpoint")
        d = len(rights[0])
        for v in rights:
            if len(v) != d or not all(_finite(c) for c in v):
                raise ValueError("values must be finite, constant dimension")
        for s in slopes:
            if len(s) != d or not all(_finite(c) for c in s):
                raise ValueError("slopes must be finite, constant dimension")
        self.times = times
        self.rights = rights
        self.slopes = slopes
        self.horizon = horizon
        self.dim = d

    @classmethod
    def _raw(cls, times, rights, slopes, horizon):
        """Internal constructor bypassing validation (trusted callers:
        transforms that preserve the invariants by construction)."""
        self = object.__new__(cls)
        self.times = tuple(times)
        self.rights = tuple(rights)
        self.slopes = tuple(slopes)
        self.horizon = horizon
        self.dim = len(self.rights[0])
        return self

    # -- evaluation ----------------------------------------------------

    def segment_index(self, t):
        """Index i with t in [t_i, t_{i+1})."""
        return bisect_right(self.times, t) - 1

    def eval(self, t):
        """Right-continuous value at t; error outside [0, horizon)."""
        if t < 0 or t >= self.horizon:
            raise TimeOutOfRange(f"t={t} outside [0, {self.horizon})")
        i = self.segment_index(t)
        ti, v, s = self.times[i], self.rights[i], self.slopes[i]
        dt = t - ti
        return tuple(v[j] + s[j] * dt for j in range(self.dim))

    __call__ = eval

    def left_limit(self, t):
        """lim_{s->t-} of the path; requires 0 < t < horizon."""
        if t <= 0 or t >= self.horizon:
            raise TimeOutOfRange(f"left limit needs 0 < t < horizon, got {t}")
        i = bisect_left(self.times, t) - 1
        ti, v, s = self.times[i], self.rights[i], self.slopes[i]
        dt = t - ti
        return tuple(v[j] + s[j] * dt for j in range(self.dim))

    def end_limit(self, i):
        """Left limit at breakpoint i+1 (the end of segment i)."""
        dt = self.times[i + 1] - self.times[i]
        v, s = self.rights[i], self.slopes[i]
        return tuple(v[j] + s[j] * dt for j in range(self.dim))

    def jump_times(self):
        """Breakpoints where the right value differs from the left limit."""
        out = []
        for i in range(1, len(self.times)):
            if self.end_limit(i - 1) != self.rights[i]:
                out.append(self.times[i])
        return out

    def jump_size(self, t):
        i = self.times.index(t)
        left = self.end_limit(i - 1)
        return tuple(self.rights[i][j] - left[j] for j in range(self.dim))

    # -- simple transforms ---------------------------------------------

    def shift(self, c):
        """Path + constant vector c."""
        c = _vec(c)
        if len(c) != self.dim:
            raise DimensionError("shift dimension mismatch")
        rights = tuple(tuple(v[j] + c[j] for j in range(self.dim))
                       for v in self.rights)
        return CadlagPath(self.times, rights, self.slopes, self.horizon)

    def scale(self, a):
        rights = tuple(tuple(a * c for c in v) for v in self.rights)
        slopes = tuple(tuple(a * c for c in s) for s in self.slopes)
        return CadlagPath(self.times, rights, slopes, self.horizon)

    def restrict(self, new_horizon):
        """Restriction to [0, new_horizon)."""
        if new_horizon > self.horizon:
            raise TimeOutOfRange("cannot extend a path by restriction")
        keep = [i for i, t in enumerate(self.times) if t < new_horizon]
        k = len(keep)
        return CadlagPath(self.times[:k], self.rights[:k], self.slopes[:k],
                          new_horizon)

    def component(self, j):
        return CadlagPath(self.times,
                          tuple((v[j],) for v in self.rights),
                          tuple((s[j],) for s in self.slopes),
                          self.horizon)

    def is_scalar(self):
        return self.dim == 1

    def __eq__(self, other):
        if not isinstance(other, CadlagPath):
            return NotImplemented
        return (self.times == other.times and self.rights == other.rights
                and self.slopes == other.slopes
                and self.horizon == other.horizon)

    def __hash__(self):
        return hash((self.times, self.rights, self.slopes, self.horizon))

    def __repr__(self):
        return (f"CadlagPath(d={self.dim}, breaks={len(self.times)}, "
                f"horizon={self.horizon})")


# -- constructors ------------------------------------------------------


def piecewise(times, rights, slopes, horizon=INF):
    return CadlagPath(times, rights, slopes, horizon)


def constant(value, horizon=INF):
    v = _vec(value)
    return CadlagPath((0,), (v,), (tuple(0 for _ in v),), horizon)


def indicator(a, b, horizon=INF):
    """Scalar indicator of [a, b); requires 0 <= a < b <= horizon."""
    if not (0 <= a < b):
        raise ValueError("need 0 <= a < b")
    times, rights = [0], [(0,)] if a > 0 else [(1,)]
    if a > 0:
        times.append(a)
        rights.append((1,))
    if b < horizon:
        times.append(b)
        rights.append((0,))
    slopes = [(0,)] * len(times)
    return CadlagPath(times, rights, slopes, horizon)


def from_grid(times, states, jump_lefts=None, horizon=None):
    """Skeleton path from sampled states: linear between samples.

    jump_lefts maps a sample index i >= 1 to the left limit at times[i];
    at those indices the path jumps from the given left value to
    states[i] instead of interpolating.  The final segment is constant.
    """
    times = list(times)
    states = [_vec(v) for v in states]
    n = len(times)
    if n != len(states) or n == 0:
        raise ValueError("times/states mismatch")
    jump_lefts = {i: _vec(v) for i, v in (jump_lefts or {}).items()}
    d = len(states[0])
    slopes = []
    for i in range(n - 1):
        left_end = jump_lefts.get(i + 1, states[i + 1])
        dt = times[i + 1] - times[i]
        slopes.append(tuple((left_end[j] - states[i][j]) / dt
                            for j in range(d)))
    slopes.append(tuple(0.0 for _ in range(d)))
    if horizon is None:
        horizon = times[-1] + (times[-1] - times[-2] if n > 1 else 1.0)
    return CadlagPath(times, states, slopes, horizon)


# -- functionals -------------------------------------------------------


class LowerEnvelope:
    """Lower-semicontinuous envelope of a scalar path.

    Coincides with the path away from breakpoints; at a breakpoint its
    value is min(left limit, right value).
    """

    __slots__ = ("path", "break_values")

    def __init__(self, path):
        if path.dim != 1:
            raise DimensionError("lower envelope needs a scalar path")
        vals = [path.rights[0][0]]
        for i in range(1, len(path.times)):
            left = path.end_limit(i - 1)[0]
            vals.append(min(left, path.rights[i][0]))
        self.path = path
        self.break_values = tuple(vals)

    @property
    def horizon(self):
        return self.path.horizon

    def eval(self, t):
        if t < 0 or t >= self.path.horizon:
            raise TimeOutOfRange(f"t={t} outside [0, {self.path.horizon})")
        i = self.path.segment_index(t)
        if t == self.path.times[i]:
            return self.break_values[i]
        return self.path.eval(t)[0]

    __call__ = eval


def lower_envelope(path):
    return LowerEnvelope(path)


def running_inf(path, t):
    """inf over [0, t] of a scalar path (left limits included)."""
    if isinstance(path, LowerEnvelope):
        path = path.path  # M[omega] = M[omega_*]
    if path.dim != 1:
        raise DimensionError("running_inf needs a scalar path")
    if t < 0 or t >= path.horizon:
        raise TimeOutOfRange(f"t={t} outside [0, {path.horizon})")
    best = path.rights[0][0]
    for i in range(len(path.times)):
        ti = path.times[i]
        if ti > t:
            break
        v = path.rights[i][0]
        best = min(best, v)
        seg_end = path.times[i + 1] if i + 1 < len(path.times) else path.horizon
        if seg_end <= t:
            best = min(best, v + path.slopes[i][0] * (seg_end - ti))
        else:
            best = min(best, v + path.slopes[i][0] * (t - ti))
            break
    return best


def _sq_norm(v):
    return sum(c * c for c in v)


def sup_norm(path, m=None):
    """sup over [0, m) of |path(t)| (Euclidean norm componentwise).

    Exact for scalar paths; for d > 1 the maximum squared norm is found
    exactly and a float sqrt is taken at the end.
    """
    if m is None:
        m = path.horizon
    if m <= 0 or m > path.horizon:
        raise TimeOutOfRange(f"need 0 < m <= horizon, got m={m}")
    scalar = path.dim == 1
    best = None
    for i in range(len(path.times)):
        ti = path.times[i]
        if ti >= m:
            break
        v = path.rights[i]
        seg_end = path.times[i + 1] if i + 1 < len(path.times) else path.horizon
        end = min(seg_end, m)
        if end == INF:
            if any(c != 0 for c in path.slopes[i]):
                return INF  # unbounded final segment
            w = v
        else:
            w = tuple(v[j] + path.slopes[i][j] * (end - ti)
                      for j in range(path.dim))
        for cand in (v, w):
            key = abs(cand[0]) if scalar else _sq_norm(cand)
            if best is None or key > best:
                best = key
    return best if scalar else math.sqrt(best)


def path_combine(x, y, fn_value, fn_slope):
    """Pointwise combination of two paths on merged breakpoints.

    fn_value/fn_slope combine per-component values/slopes; only affine
    combinations stay exact (that is all this is used for).  The merge
    walks both breakpoint lists once with incremental segment tracking.
    """
    if x.dim != y.dim:
        raise DimensionError("combining paths of different dimension")
    d = x.dim
    horizon = min(x.horizon, y.horizon)
    times, rights, slopes = [], [], []
    i = j = 0
    nx, ny = len(x.times), len(y.times)
    prev = None
    while i < nx or j < ny:
        tx = x.times[i] if i < nx else None
        ty = y.times[j] if j < ny else None
        if ty is None or (tx is not None and tx <= ty):
            t = tx
            i += 1
            if ty is not None and ty == t:
                j += 1
        else:
            t = ty
            j += 1
        if t >= horizon or t == prev:
            continue
        prev = t
        si, sj = i - 1 if i else 0, j - 1 if j else 0
        xv = x.rights[si]
        xs = x.slopes[si]
        dtx = t - x.times[si]
        yv = y.rights[sj]
        ys = y.slopes[sj]
        dty = t - y.times[sj]
        times.append(t)
        rights.append(tuple(
            fn_value(xv[k] + xs[k] * dtx, yv[k] + ys[k] * dty)
            for k in range(d)))
        slopes.append(tuple(fn_slope(xs[k], ys[k]) for k in range(d)))
    return CadlagPath._raw(times, rights, slopes, horizon)


def path_sub(x, y):
    return path_combine(x, y, lambda a, b: a - b, lambda a, b: a - b)


def path_add(x, y):
    return path_combine(x, y, lambda a, b: a + b, lambda a, b: a + b)


# -- certified scalar composition --------------------------------------


def compose_scalar(path, f, eps=Fraction(1, 10**9), max_pieces=200000):
    """Scalar path t -> f(path(t)) as a certified piecewise-affine path.

    f is either a plain callable tagged with a shape via f.curvature in
    {"affine", "concave", "convex"} (signed distances of convex domains
    are concave along lines), or callable with f.lipschitz set, in which
    case a conservative uniform refinement is used.  The result is within
    eps of the true composition in sup norm; jump times are preserved.
    """
    shape = getattr(f, "curvature", None)
    lip = getattr(f, "lipschitz", None)
    if shape is None and lip is None:
        raise ValueError("f needs a curvature tag or a lipschitz constant")
    if path.horizon == INF and shape != "affine":
        raise ValueError("compose_scalar needs a finite horizon unless f "
                         "composes affinely; restrict the path first")

    out_times, out_rights, out_slopes = [], [], []
    budget = [max_pieces]

    def emit(ta, tb, fa, fb):
        if budget[0] <= 0:
            raise ApproximationBudgetExceeded(
                f"compose_scalar exceeded {max_pieces} pieces")
        budget[0] -= 1
        out_times.append(ta)
        out_rights.append((fa,))
        out_slopes.append(((fb - fa) / (tb - ta),))

    def midpoint(ta, tb):
        s = ta + tb
        return Fraction(s, 2) if isinstance(s, int) else s / 2

    def refine(ta, tb, fa, fb, point):
        # midpoint certificate: for concave/convex g the secant gap is at
        # most twice the midpoint gap
        tm = midpoint(ta, tb)
        fm = f(point(tm))
        gap = fm - (fa + fb) / 2
        if shape == "affine" or 2 * abs(gap) <= eps:
            emit(ta, tb, fa, fb)
            return
        refine(ta, tm, fa, fm, point)
        refine(tm, tb, fm, fb, point)

    for i in range(len(path.times)):
        ta = path.times[i]
        tb = path.times[i + 1] if i + 1 < len(path.times) else path.horizon
        if tb == INF:
            tb = ta + 1  # affine f: one extrapolating piece is exact
            open_end = True
        else:
            open_end = False
        v, s = path.rights[i], path.slopes[i]

        def point(t, ti=ta, v=v, s=s):
            return tuple(v[j] + s[j] * (t - ti) for j in range(path.dim))

        fa = f(point(ta))
        fb = f(point(tb))
        if shape in ("concave", "convex", "affine"):
            refine(ta, tb, fa, fb, point)
        else:
            n = max(1, math.ceil(float(lip) * float(tb - ta) / (2 * float(eps))))
            if n > budget[0]:
                raise ApproximationBudgetExceeded(
                    "lipschitz refinement exceeds piece budget")
            prev_t, prev_f = ta, fa
            for k in range(1, n + 1):
                tk = ta + (tb - ta) * k / n
                fk = f(point(tk))
                emit(prev_t, tk, prev_f, fk)
                prev_t, prev_f = tk, fk
        if open_end:
            # extrapolate the last emitted slope to infinity
            break
    return CadlagPath(out_times, out_rights, out_slopes, path.horizon)


# -- path literal format -----------------------------------------------


def parse_number(tok):
    tok = tok.strip()
    if tok in ("inf", "+inf", "Infinity"):
        return INF
    if "/" in tok:
        return Fraction(tok)
    if any(c in tok for c in ".eE") or "nan" in tok.lower():
        f = Fraction(tok)  # exact decimal -> rational
        return f
    return Fraction(int(tok))


def _fmt_number(x):
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return str(x.numerator)
        return f"{x.numerator}/{x.denominator}"
    if x == INF:
        return "inf"
    return repr(x)


def dump_path(path):
    """Serialize a path as the text literal format.

    One record per breakpoint: time, left value, right value, slope
    (vector components comma-separated).  The left value at 0 equals the
    right value by convention.
    """
    lines = [f"dim = {path.dim}", f"horizon = {_fmt_number(path.horizon)}"]
    for i, t in enumerate(path.times):
        left = path.rights[0] if i == 0 else path.end_limit(i - 1)
        right = path.rights[i]
        slope = path.slopes[i]
        row = [
            _fmt_number(t),
            ",".join(_fmt_number(c) for c in left),
            ",".join(_fmt_number(c) for c in right),
            ",".join(_fmt_number(c) for c in slope),
        ]
        lines.append("  ".join(row))
    return "\n".join(lines) + "\n"


def load_path(text):
    """Parse the path literal format and validate its invariants.

    The stored left values are redundant; the loader recomputes each left
    limit from the previous segment and rejects inconsistent records.
    """
    dim = None
    horizon = INF
    rows = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" in line and not line[0].isdigit():
            key, val = (p.strip() for p in line.split("=", 1))
            if key == "dim":
                dim = int(val)
            elif key == "horizon":
                horizon = parse_number(val)
            else:
                raise ValueError(f"unknown header key {key!r}")
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ValueError(f"bad path record: {raw!r}")
        t = parse_number(parts[0])
        left = tuple(parse_number(c) for c in parts[1].split(","))
        right = tuple(parse_number(c) for c in parts[2].split(","))
        slope = tuple(parse_number(c) for c in parts[3].split(","))
        rows.append((t, left, right, slope))
    if not rows:
        raise ValueError("empty path literal")
    if dim is not None:
        for _, left, right, slope in rows:
            if not len(left) == len(right) == len(slope) == dim:
                raise ValueError("record dimension disagrees with header")
    times = [r[0] for r in rows]
    rights = [r[2] for r in rows]
    slopes = [r[3] for r in rows]
    path = CadlagPath(times, rights, slopes, horizon)
    if rows[0][1] != rows[0][2]:
        raise ValueError("left value at t=0 must equal the right value")
    for i in range(1, len(rows)):
        if path.end_limit(i - 1) != rows[i][1]:
            raise ValueError(
                f"stored left value at t={rows[i][0]} does not match the "
                "limit of the preceding segment")
    return path
