"""Bounded open convex domains with exact membership and signed distance.

Supported shapes: interval (a, b), axis-aligned box, Euclidean ball, and
2-d convex polygons given by half-spaces.  Membership tests are exact in
the arithmetic of the inputs.  The signed distance is positive inside,
zero on the boundary, negative outside; for convex domains it is concave
along any line, which the certified path composition relies on.
"""

import math
from fractions import Fraction

from .errors import DimensionError

_ZERO = 0


def _vec(x):
    if isinstance(x, (tuple, list)):
        return tuple(x)
    return (x,)


def _dot(a, b):
    return sum(ai * bi for ai, bi in zip(a, b))


def _exact_div(p, q):
    if isinstance(p, int) and isinstance(q, int):
        return Fraction(p, q)
    return p / q


class _Base:
    def _check(self, x):
        x = _vec(x)
        if len(x) != self.dim:
            raise DimensionError(
                f"point dim {len(x)} != domain dim {self.dim}")
        return x

    def contains_open(self, x):
        x = self._check(x)
        return all(_dot(a, x) < b for a, b in self.halfspaces)

    def contains_closed(self, x):
        x = self._check(x)
        return all(_dot(a, x) <= b for a, b in self.halfspaces)

    def on_boundary(self, x):
        return self.contains_closed(x) and not self.contains_open(x)

    def distance_map(self):
        """Signed distance as a callable tagged for compose_scalar."""
        f = lambda x: self.signed_distance(x)  # noqa: E731
        f.curvature = "concave"
        f.lipschitz = 1
        return f


class Interval(_Base):
    def __init__(self, lo, hi):
        if not lo < hi:
            raise ValueError("need lo < hi")
        self.lo, self.hi = lo, hi
        self.dim = 1
        self.halfspaces = (((-1,), -lo), ((1,), hi))

    def signed_distance(self, x):
        x = self._check(x)[0]
        return min(x - self.lo, self.hi - x)

    def __repr__(self):
        return f"Interval({self.lo}, {self.hi})"


class Box(_Base):
    def __init__(self, lo, hi):
        lo, hi = _vec(lo), _vec(hi)
        if len(lo) != len(hi) or not all(a < b for a, b in zip(lo, hi)):
            raise ValueError("need lo < hi componentwise")
        self.lo, self.hi = lo, hi
        self.dim = len(lo)
        hs = []
        for j in range(self.dim):
            e = tuple(_ZERO if k != j else -1 for k in range(self.dim))
            hs.append((e, -lo[j]))
            e = tuple(_ZERO if k != j else 1 for k in range(self.dim))
            hs.append((e, hi[j]))
        self.halfspaces = tuple(hs)

    def signed_distance(self, x):
        x = self._check(x)
        inside = min(min(x[j] - self.lo[j], self.hi[j] - x[j])
                     for j in range(self.dim))
        if inside >= 0:
            return inside
        q = [max(self.lo[j] - x[j], x[j] - self.hi[j], _ZERO)
             for j in range(self.dim)]
        q = [c for c in q if c > 0]
        if len(q) == 1:
            return -q[0]
        return -math.sqrt(sum(float(c) * float(c) for c in q))

    def __repr__(self):
        return f"Box({self.lo}, {self.hi})"


class Ball(_Base):
    def __init__(self, center, radius):
        center = _vec(center)
        if not radius > 0:
            raise ValueError("radius must be positive")
        self.center, self.radius = center, radius
        self.dim = len(center)
        self.halfspaces = None  # nonlinear shape

    def _sq(self, x):
        return sum((x[j] - self.center[j]) ** 2 for j in range(self.dim))

    def contains_open(self, x):
        x = self._check(x)
        return self._sq(x) < self.radius ** 2

    def contains_closed(self, x):
        x = self._check(x)
        return self._sq(x) <= self.radius ** 2

    def signed_distance(self, x):
        x = self._check(x)
        return self.radius - math.sqrt(float(self._sq(x)))

    def __repr__(self):
        return f"Ball({self.center}, {self.radius})"


class Polygon(_Base):
    """Convex 2-d polygon from half-spaces a.x <= b (interior strict).

    Vertices are computed exactly from the half-space data, so outside
    points get exact edge/vertex projections.
    """

    def __init__(self, halfspaces):
        hs = []
        for a, b in halfspaces:
            a = _vec(a)
            if len(a) != 2:
                raise DimensionError("polygons are supported in d=2 only")
            hs.append((a, b))
        self.halfspaces = tuple(hs)
        self.dim = 2
        self.vertices = self._vertices()
        if len(self.vertices) < 3:
            raise ValueError("half-spaces do not bound a 2-d polygon")

    def _vertices(self):
        pts = []
        hs = self.halfspaces
        for i in range(len(hs)):
            for j in range(i + 1, len(hs)):
                (a1, b1), (a2, b2) = hs[i], hs[j]
                det = a1[0] * a2[1] - a1[1] * a2[0]
                if det == 0:
                    continue
                x = _exact_div(b1 * a2[1] - b2 * a1[1], det)
                y = _exact_div(a1[0] * b2 - a2[0] * b1, det)
                p = (x, y)
                if all(_dot(a, p) <= b for a, b in hs):
                    pts.append(p)
        # dedupe and order by angle around the centroid
        pts = list(dict.fromkeys(pts))
        cx = sum(p[0] for p in pts) / len(pts)
        cy = sum(p[1] for p in pts) / len(pts)
        pts.sort(key=lambda p: math.atan2(float(p[1] - cy), float(p[0] - cx)))
        return tuple(pts)

    def signed_distance(self, x):
        x = self._check(x)
        if self.contains_closed(x):
            return min((b - _dot(a, x)) / math.sqrt(float(_dot(a, a)))
                       for a, b in self.halfspaces)
        return -math.sqrt(float(self._sq_dist_outside(x)))

    def _sq_dist_outside(self, x):
        best = None
        n = len(self.vertices)
        for i in range(n):
            p, q = self.vertices[i], self.vertices[(i + 1) % n]
            d = (q[0] - p[0], q[1] - p[1])
            w = (x[0] - p[0], x[1] - p[1])
            denom = _dot(d, d)
            t = _dot(w, d) / denom
            t = min(1, max(0, t))
            proj = (p[0] + t * d[0], p[1] + t * d[1])
            sq = (x[0] - proj[0]) ** 2 + (x[1] - proj[1]) ** 2
            if best is None or sq < best:
                best = sq
        return best

    def __repr__(self):
        return f"Polygon({len(self.halfspaces)} half-spaces)"


def make_domain(spec):
    """Build a domain from a config mapping {type, parameters...}."""
    kind = spec["type"].strip().lower()
    if kind == "interval":
        return Interval(spec["a"], spec["b"])
    if kind == "box":
        return Box(spec["lo"], spec["hi"])
    if kind == "ball":
        return Ball(spec["center"], spec["radius"])
    if kind == "polygon":
        return Polygon(spec["halfspaces"])
    raise ValueError(f"unknown domain type {kind!r}")
