"""Exact convex geometry over the rationals, in cover ranks 1 and 2.

All coordinates are ints or Fractions; no floating point is used here, so
every predicate (containment, disjointness, distance comparison) is exact.
Hulls are vertex lists: sorted endpoints in rank 1, counterclockwise monotone
chains in rank 2.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

from .errors import CapabilityError, ValidationError

Point = tuple  # tuple of int | Fraction, length = rank


def convex_hull(points: Iterable[Point], rank: int) -> list[Point]:
    """Vertices of the convex hull.

    Rank 1: [min] or [min, max].  Rank 2: counterclockwise order, starting
    from the lexicographically smallest vertex (monotone chain).
    """
    pts = sorted(set(tuple(p) for p in points))
    if not pts:
        raise ValidationError("empty point set has no hull")
    if rank == 1:
        return [pts[0]] if len(pts) == 1 else [pts[0], pts[-1]]
    if rank != 2:
        raise CapabilityError(f"exact hulls implemented for rank <= 2, got {rank}")
    if len(pts) == 1:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    return hull if len(hull) >= 2 else pts[:1]


def directional_extrema(points: Iterable[Point], u: Sequence) -> tuple:
    """(min, max) of <u, x> over the points."""
    vals = [sum(a * b for a, b in zip(u, p)) for p in points]
    if not vals:
        raise ValidationError("empty point set")
    return min(vals), max(vals)


def translate(points: Iterable[Point], v: Sequence) -> list[Point]:
    return [tuple(a + b for a, b in zip(p, v)) for p in points]


def negate(points: Iterable[Point]) -> list[Point]:
    return [tuple(-a for a in p) for p in points]


def minkowski_sum(hull_a: Sequence[Point], hull_b: Sequence[Point], rank: int) -> list[Point]:
    """Hull of the Minkowski sum of two hulls (vertex-sum then re-hull)."""
    pts = [tuple(x + y for x, y in zip(a, b)) for a in hull_a for b in hull_b]
    return convex_hull(pts, rank)


def dilate(hull: Sequence[Point], s: int, rank: int) -> list[Point]:
    """Minkowski sum with the cube [-s, s]^rank (s = 0 is a no-op)."""
    if s == 0:
        return list(hull)
    if s < 0:
        raise ValidationError("dilation must be nonnegative")
    if rank == 1:
        cube = [(-s,), (s,)]
    elif rank == 2:
        cube = [(-s, -s), (-s, s), (s, -s), (s, s)]
    else:
        raise CapabilityError(f"dilation implemented for rank <= 2, got {rank}")
    return minkowski_sum(hull, cube, rank)


def _seg_dist2(y: Point, a: Point, b: Point) -> Fraction:
    """Exact squared distance from point y to segment [a, b]."""
    d = tuple(bb - aa for aa, bb in zip(a, b))
    dd = sum(x * x for x in d)
    if dd == 0:
        return Fraction(sum((yy - aa) ** 2 for yy, aa in zip(y, a)))
    t = Fraction(sum((yy - aa) * x for yy, aa, x in zip(y, a, d)), dd)
    t = max(Fraction(0), min(Fraction(1), t))
    return sum((Fraction(yy) - (aa + t * x)) ** 2 for yy, aa, x in zip(y, a, d))


def contains_point(hull: Sequence[Point], y: Point, rank: int) -> bool:
    """Exact membership of y in the closed hull."""
    if rank == 1:
        lo, hi = hull[0][0], hull[-1][0]
        return lo <= y[0] <= hi
    if rank != 2:
        raise CapabilityError(f"containment implemented for rank <= 2, got {rank}")
    if len(hull) == 1:
        return tuple(y) == tuple(hull[0])
    if len(hull) == 2:
        a, b = hull
        cross = (b[0] - a[0]) * (y[1] - a[1]) - (b[1] - a[1]) * (y[0] - a[0])
        if cross != 0:
            return False
        dot = (y[0] - a[0]) * (b[0] - a[0]) + (y[1] - a[1]) * (b[1] - a[1])
        return 0 <= dot <= (b[0] - a[0]) ** 2 + (b[1] - a[1]) ** 2
    for i in range(len(hull)):
        a = hull[i]
        b = hull[(i + 1) % len(hull)]
        cross = (b[0] - a[0]) * (y[1] - a[1]) - (b[1] - a[1]) * (y[0] - a[0])
        if cross < 0:
            return False
    return True


def point_hull_dist2(y: Point, hull: Sequence[Point], rank: int) -> Fraction:
    """Exact squared Euclidean distance from y to the closed hull."""
    if rank == 1:
        lo, hi = hull[0][0], hull[-1][0]
        if lo <= y[0] <= hi:
            return Fraction(0)
        return Fraction((lo - y[0]) ** 2 if y[0] < lo else (y[0] - hi) ** 2)
    if rank != 2:
        raise CapabilityError(f"distances implemented for rank <= 2, got {rank}")
    if len(hull) == 1:
        return Fraction(sum((a - b) ** 2 for a, b in zip(y, hull[0])))
    if contains_point(hull, y, rank):
        return Fraction(0)
    best = None
    for i in range(len(hull)):
        d = _seg_dist2(y, hull[i], hull[(i + 1) % len(hull)])
        if best is None or d < best:
            best = d
    return best


def _project(hull: Sequence[Point], axis: tuple) -> tuple:
    vals = [sum(a * b for a, b in zip(axis, p)) for p in hull]
    return min(vals), max(vals)


def hulls_disjoint(hull_a: Sequence[Point], hull_b: Sequence[Point], rank: int) -> bool:
    """Exact disjointness of two closed hulls (touching counts as overlap)."""
    if rank == 1:
        return hull_a[-1][0] < hull_b[0][0] or hull_b[-1][0] < hull_a[0][0]
    if rank != 2:
        raise CapabilityError(f"disjointness implemented for rank <= 2, got {rank}")
    axes = []
    for hull in (hull_a, hull_b):
        n = len(hull)
        if n == 1:
            continue
        for i in range(n if n > 2 else 1):
            a, b = hull[i], hull[(i + 1) % n]
            d = (b[0] - a[0], b[1] - a[1])
            axes.append((-d[1], d[0]))
            axes.append(d)  # covers collinear degenerate hulls
    if not axes:  # two single points
        return tuple(hull_a[0]) != tuple(hull_b[0])
    for axis in axes:
        if axis == (0, 0):
            continue
        lo_a, hi_a = _project(hull_a, axis)
        lo_b, hi_b = _project(hull_b, axis)
        if hi_a < lo_b or hi_b < lo_a:
            return True
    return False


def hausdorff_dist2(pts_a: Iterable[Point], pts_b: Iterable[Point]) -> Fraction:
    """Exact squared Hausdorff distance between two finite point sets."""
    pa, pb = list(pts_a), list(pts_b)
    if not pa or not pb:
        raise ValidationError("Hausdorff distance needs nonempty sets")

    def one_sided(src, dst):
        worst = Fraction(0)
        for p in src:
            d = min(Fraction(sum((a - b) ** 2 for a, b in zip(p, q))) for q in dst)
            if d > worst:
                worst = d
        return worst

    return max(one_sided(pa, pb), one_sided(pb, pa))


def halfspace_vertices(halfspaces: Sequence[tuple[Sequence, Fraction]], rank: int) -> list[Point]:
    """Vertices of a bounded polytope {x : <u, x> <= c} in rank 1 or 2.

    Each halfspace is (u, c) with integer u and rational c.  Raises if the
    region is empty.
    """
    if rank == 1:
        hi = min(Fraction(c, u[0]) for u, c in halfspaces if u[0] > 0)
        lo = max(Fraction(c, u[0]) for u, c in halfspaces if u[0] < 0)
        if lo > hi:
            raise ValidationError("empty halfspace intersection")
        return [(lo,)] if lo == hi else [(lo,), (hi,)]
    if rank != 2:
        raise CapabilityError(f"vertex enumeration implemented for rank <= 2, got {rank}")
    verts = []
    m = len(halfspaces)
    for i in range(m):
        (u1, c1) = halfspaces[i]
        for j in range(i + 1, m):
            (u2, c2) = halfspaces[j]
            det = u1[0] * u2[1] - u1[1] * u2[0]
            if det == 0:
                continue
            x = Fraction(c1 * u2[1] - c2 * u1[1], det)
            y = Fraction(u1[0] * c2 - u2[0] * c1, det)
            if all(u[0] * x + u[1] * y <= c for u, c in halfspaces):
                verts.append((x, y))
    if not verts:
        raise ValidationError("empty halfspace intersection")
    return convex_hull(verts, 2)
