"""Reconstruction of the fibered cone and its dual from finite support data.

The dual cone in Z^{r+1} is the cone over the support polytopes stacked at
their heights.  Facet slopes are estimated from the data: for a direction u,
the directional extent N'_1(u, p) is subadditive in p, so N'_1(u, p)/p
decreases to the true slope and min over computed p is a certified upper
estimate.  Every model records the truncation p_max and the convergence
window constant C, so downstream certificates carry their evidence level.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Optional, Sequence

from . import geometry
from .errors import SubconeError, ValidationError
from .trackmap import LiftedGraphMap, support_of_power


def _primitive(vec: Sequence[int]) -> tuple[int, ...]:
    g = 0
    for v in vec:
        g = gcd(g, abs(int(v)))
    if g == 0:
        raise ValidationError("zero vector cannot be normalized")
    return tuple(int(v) // g for v in vec)


@dataclass(frozen=True)
class FacetDirection:
    """One dual-cone facet direction with its slope estimate and C-window."""

    u: tuple[int, ...]
    slope: Fraction  # certified upper estimate of the true facet slope
    c_window: int    # N'_1(u, k0) - N'_2(u, k0)


@dataclass(frozen=True)
class DualConeModel:
    rank: int
    p_max: int
    k0: Optional[int]
    facets: tuple[FacetDirection, ...]
    points: frozenset  # all computed (x_1..x_r, p), p <= p_max
    low_confidence: bool = False

    @property
    def C(self) -> int:
        return max(f.c_window for f in self.facets)

    def facet(self, u: Sequence[int]) -> FacetDirection:
        u = tuple(int(v) for v in u)
        for f in self.facets:
            if f.u == u:
                return f
        raise ValidationError(f"direction {u} is not a model facet direction")

    def contains_fattened(self, point: Sequence[int]) -> bool:
        """Is (x, p) inside the C-fattened reconstructed dual cone?"""
        *x, p = point
        if p < 0:
            return False
        for f in self.facets:
            if sum(a * b for a, b in zip(f.u, x)) > f.slope * p + f.c_window:
                return False
        return True

    def slice_vertices(self, height: int) -> list[tuple]:
        """Vertices of the C-fattened cone slice at a (positive) height."""
        halfspaces = [
            (f.u, f.slope * height + f.c_window) for f in self.facets
        ]
        return geometry.halfspace_vertices(halfspaces, self.rank)

    def base_polytope(self) -> list[tuple]:
        """Vertices of the height-1 slice of the (unfattened) model cone."""
        return geometry.halfspace_vertices(
            [(f.u, f.slope) for f in self.facets], self.rank
        )


def _candidate_directions(rank: int, ratio_points: list[tuple]) -> list[tuple[int, ...]]:
    dirs: list[tuple[int, ...]] = []
    for j in range(rank):
        e = tuple(1 if i == j else 0 for i in range(rank))
        dirs.append(e)
        dirs.append(tuple(-v for v in e))
    if rank == 2 and len(set(ratio_points)) >= 2:
        hull = geometry.convex_hull(ratio_points, 2)
        n = len(hull)
        for i in range(n if n > 2 else 1):
            v, w = hull[i], hull[(i + 1) % n]
            d = (w[0] - v[0], w[1] - v[1])
            # Outward normal for a counterclockwise hull, cleared to integers.
            normal = (d[1], -d[0])
            den = 1
            for c in normal:
                den = den * Fraction(c).denominator // gcd(den, Fraction(c).denominator)
            cleared = tuple(int(c * den) for c in normal)
            for cand in (cleared, tuple(-c for c in cleared)):
                prim = _primitive(cand)
                if prim not in dirs:
                    dirs.append(prim)
    return dirs


def estimate_dual_cone(track: LiftedGraphMap, p_max: int) -> DualConeModel:
    """Reconstruct the dual cone from supports at powers 1..p_max."""
    if p_max < 1:
        raise ValidationError("p_max must be >= 1")
    supports = [support_of_power(track, p) for p in range(0, p_max + 1)]
    points = set()
    ratio_points = []
    for p in range(0, p_max + 1):
        for x in supports[p].points:
            points.add(x + (p,))
            if p >= 1:
                ratio_points.append(tuple(Fraction(c, p) for c in x))
    k0 = track.k0
    low_confidence = k0 is None or p_max < k0
    facets = []
    for u in _candidate_directions(track.rank, ratio_points):
        slope = min(
            Fraction(supports[p].extent(u)[1], p) for p in range(1, p_max + 1)
        )
        if k0 is not None and k0 <= p_max:
            lo, hi = supports[k0].extent(u)
            c_window = hi - lo
        else:
            # No strict-positivity window available; fall back to the widest
            # observed deviation so the fattened cone still contains the data.
            c_window = max(
                -min(0, min(supports[p].extent(u)[0] for p in range(1, p_max + 1))),
                0,
            )
        facets.append(FacetDirection(u, slope, c_window))
    return DualConeModel(
        rank=track.rank,
        p_max=p_max,
        k0=k0,
        facets=tuple(facets),
        points=frozenset(points),
        low_confidence=low_confidence,
    )


@dataclass(frozen=True)
class Membership:
    status: str  # interior | exterior | near-boundary
    margin: Fraction


@dataclass(frozen=True)
class FiberedConeModel:
    """The reconstructed fibered cone in H^1 coordinates.

    ``generators`` are the primitive integer extreme rays of the dual cone;
    a class is in the cone iff it pairs positively with all of them.  Two
    proper-subcone shrinkages are available and can be combined: ``mu`` > 0
    keeps classes whose normalized slack stays >= mu, and ``slope_cap``
    restricts to the angular neighborhood |alpha_i| <= slope_cap * n of the
    monodromy axis (the latter is what keeps the comparability constant
    epsilon positive for wide cones).
    """

    rank: int
    generators: tuple[tuple[int, ...], ...]
    mu: Fraction = Fraction(0)
    slope_cap: Optional[Fraction] = None
    boundary_tolerance: Fraction = Fraction(1, 100)

    @property
    def is_proper(self) -> bool:
        return self.mu > 0 or self.slope_cap is not None

    @property
    def gen_sum(self) -> tuple[int, ...]:
        return tuple(sum(g[i] for g in self.generators) for i in range(self.rank + 1))

    def membership(self, alpha: Sequence[int]) -> Membership:
        alpha = tuple(int(v) for v in alpha)
        if len(alpha) != self.rank + 1:
            raise ValidationError(
                f"class has length {len(alpha)}, expected {self.rank + 1}"
            )
        values = [sum(a * b for a, b in zip(g, alpha)) for g in self.generators]
        total = sum(a * b for a, b in zip(self.gen_sum, alpha))
        if total <= 0 or min(values) < 0:
            return Membership("exterior", Fraction(-1))
        margin = min(Fraction(v, total) for v in values) - self.mu
        if self.slope_cap is not None:
            n = alpha[-1]
            if n <= 0:
                return Membership("exterior", Fraction(-1))
            box_margin = min(
                (self.slope_cap - Fraction(abs(a), n)) / (1 + self.slope_cap)
                for a in alpha[:-1]
            )
            margin = min(margin, box_margin)
        if abs(margin) < self.boundary_tolerance:
            return Membership("near-boundary", margin)
        return Membership("interior" if margin > 0 else "exterior", margin)

    def subcone(self, mu: Fraction) -> "FiberedConeModel":
        if not 0 < mu < 1:
            raise SubconeError(f"subcone shrinkage must be in (0, 1), got {mu}")
        return FiberedConeModel(self.rank, self.generators, Fraction(mu),
                                self.slope_cap, self.boundary_tolerance)

    def subcone_slope(self, cap: Fraction) -> "FiberedConeModel":
        """Intersect with the axis-centered slope box |alpha_i| <= cap * n."""
        cap = Fraction(cap)
        if cap <= 0:
            raise SubconeError(f"slope cap must be positive, got {cap}")
        return FiberedConeModel(self.rank, self.generators, self.mu, cap,
                                self.boundary_tolerance)

    def extreme_rays(self) -> list[tuple[int, ...]]:
        """Primitive integer extreme rays of the (sub)cone."""
        if self.slope_cap is not None:
            return self._slice_rays()
        gsum = self.gen_sum
        mu = Fraction(self.mu)
        # Halfspace normals <g_j - mu * g_sum, alpha> >= 0, cleared to integers.
        normals = []
        for g in self.generators:
            h = [Fraction(a) - mu * b for a, b in zip(g, gsum)]
            den = 1
            for c in h:
                den = den * c.denominator // gcd(den, c.denominator)
            normals.append(tuple(int(c * den) for c in h))
        dim = self.rank + 1
        rays: list[tuple[int, ...]] = []

        def satisfies(v):
            return all(sum(a * b for a, b in zip(h, v)) >= 0 for h in normals)

        if dim == 2:
            for h in normals:
                for cand in ((-h[1], h[0]), (h[1], -h[0])):
                    if any(cand) and satisfies(cand):
                        prim = _primitive(cand)
                        if prim not in rays:
                            rays.append(prim)
        elif dim == 3:
            for i in range(len(normals)):
                for j in range(i + 1, len(normals)):
                    a, b = normals[i], normals[j]
                    c = (
                        a[1] * b[2] - a[2] * b[1],
                        a[2] * b[0] - a[0] * b[2],
                        a[0] * b[1] - a[1] * b[0],
                    )
                    if not any(c):
                        continue
                    for cand in (c, tuple(-v for v in c)):
                        if satisfies(cand):
                            prim = _primitive(cand)
                            if prim not in rays:
                                rays.append(prim)
        else:
            raise SubconeError(f"ray enumeration implemented for rank <= 2, got rank {self.rank}")
        if not rays:
            raise SubconeError("subcone is empty: shrinkage mu is too large")
        return sorted(rays)

    def _slice_rays(self) -> list[tuple[int, ...]]:
        """Extreme rays via vertex enumeration of the bounded height-1 slice
        (available once a slope cap makes the slice bounded)."""
        cap = Fraction(self.slope_cap)
        mu = Fraction(self.mu)
        gsum = self.gen_sum
        halfspaces: list[tuple[tuple, Fraction]] = []
        for g in self.generators:
            # <g, (s, 1)> >= mu <gsum, (s, 1)>, rewritten as <u, s> <= c.
            head = [mu * b - Fraction(a) for a, b in zip(g[:-1], gsum[:-1])]
            rhs = Fraction(g[-1]) - mu * gsum[-1]
            den = 1
            for v in head:
                den = den * v.denominator // gcd(den, v.denominator)
            halfspaces.append((tuple(int(v * den) for v in head), rhs * den))
        for j in range(self.rank):
            e = tuple(1 if i == j else 0 for i in range(self.rank))
            halfspaces.append((e, cap))
            halfspaces.append((tuple(-v for v in e), cap))
        rays: list[tuple[int, ...]] = []
        for v in geometry.halfspace_vertices(halfspaces, self.rank):
            vec = [Fraction(c) for c in v] + [Fraction(1)]
            den = 1
            for c in vec:
                den = den * c.denominator // gcd(den, c.denominator)
            prim = _primitive(tuple(int(c * den) for c in vec))
            if prim not in rays:
                rays.append(prim)
        if not rays:
            raise SubconeError("subcone is empty: slope cap is too small")
        return sorted(rays)


def fibered_cone_from_dual(dual: DualConeModel) -> FiberedConeModel:
    """Dualize: generators are the primitive rays over the base-slice vertices."""
    gens = []
    for v in dual.base_polytope():
        vec = list(v) + [Fraction(1)]
        den = 1
        for c in vec:
            c = Fraction(c)
            den = den * c.denominator // gcd(den, c.denominator)
        gens.append(_primitive(tuple(int(Fraction(c) * den) for c in vec)))
    gens = sorted(set(gens))
    model = FiberedConeModel(dual.rank, tuple(gens))
    axis = (0,) * dual.rank + (1,)
    if model.membership(axis).status == "exterior":
        raise ValidationError("reconstructed cone does not contain the monodromy axis")
    return model


@dataclass(frozen=True)
class EpsilonBound:
    """Conservative comparability constant for truncating the word enumeration.

    For any word (x, y) in the kernel of a class in the subcone, every point
    q of its support translate satisfies
    ||q||_inf >= epsilon * ||x||_inf - c_inf  and
    ||q||_inf <= ||x||_inf / epsilon + c_inf,
    a two-sided norm comparison.  rho bounds the per-coordinate support growth rate,
    c_ratio bounds sum_i |p_i| / n over the subcone's extreme rays.
    """

    epsilon: Fraction
    rho: Fraction
    c_inf: int
    c_ratio: Fraction
    rays: tuple[tuple[int, ...], ...]
    degenerate: bool = False


def epsilon_of_subcone(P: FiberedConeModel, dual: DualConeModel) -> EpsilonBound:
    if not P.is_proper:
        raise SubconeError("epsilon needs a proper subcone (mu > 0 or a slope cap)")
    rho = Fraction(0)
    c_inf = 0
    for j in range(dual.rank):
        e = tuple(1 if i == j else 0 for i in range(dual.rank))
        for u in (e, tuple(-v for v in e)):
            f = dual.facet(u)
            rho = max(rho, f.slope)
            c_inf = max(c_inf, f.c_window)
    rho = max(rho, Fraction(0))
    rays = P.extreme_rays()
    c_ratio = Fraction(0)
    for ray in rays:
        *x, n = ray
        if n <= 0:
            raise SubconeError(
                f"subcone ray {ray} does not have positive last coordinate; "
                "shrink the subcone (raise mu)"
            )
        c_ratio = max(c_ratio, Fraction(sum(abs(v) for v in x), n))
    if c_ratio == 0:
        return EpsilonBound(Fraction(1), rho, c_inf, c_ratio, tuple(rays), degenerate=True)
    eps = 1 - rho * c_ratio
    if eps <= 0:
        raise SubconeError(
            f"subcone too wide: growth rate {rho} * kernel ratio {c_ratio} >= 1; "
            "raise mu"
        )
    return EpsilonBound(min(eps, Fraction(1)), rho, c_inf, c_ratio, tuple(rays))
