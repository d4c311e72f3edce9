"""Lifted train-track maps on Z^r covers and their support polytopes.

A map is given combinatorially: a finite graph with a Z^r voltage on every
edge (the edge copy (e, s) runs from (src(e), s) to (dst(e), s + w(e))),
a vertex image with a deck shift per vertex, and for every edge the image
edge-path as (edge, shift, orientation) steps.  The occupied fundamental
domain of a step is its shift; the unit discrepancy between track-level and
surface-level domains is absorbed downstream by the safety margin.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import geometry
from .errors import BudgetError, ValidationError
from .laurent import LaurentMatrix, LaurentPoly, mat_pow

Shift = tuple[int, ...]
Step = tuple[str, Shift, int]  # (edge, deck shift, orientation +1/-1)

# Wielandt: a primitive m x m 0/1 matrix has a positive power <= (m-1)^2 + 1.
_PRIMITIVITY_CAP = 200


@dataclass(frozen=True)
class Edge:
    name: str
    src: str
    dst: str
    voltage: Shift


@dataclass(frozen=True)
class SupportPolytope:
    """Occupied fundamental-domain indices of one map power (or word translate)."""

    rank: int
    p: int
    points: frozenset[Shift]
    hull: tuple[Shift, ...]
    mode: str = "exact-forward"  # or inverse-data / mirror / cone-approx

    @staticmethod
    def from_points(rank: int, p: int, points, mode: str = "exact-forward") -> "SupportPolytope":
        pts = frozenset(tuple(x) for x in points)
        if not pts:
            raise ValidationError("support polytope must be nonempty")
        hull = tuple(geometry.convex_hull(pts, rank))
        return SupportPolytope(rank, p, pts, hull, mode)

    def extent(self, u: Sequence[int]) -> tuple[int, int]:
        """(N'_2, N'_1) in direction u: min and max of <u, x> over the points."""
        lo, hi = geometry.directional_extrema(self.points, u)
        return lo, hi

    def translate(self, v: Sequence[int], mode: Optional[str] = None) -> "SupportPolytope":
        return SupportPolytope.from_points(
            self.rank, self.p, geometry.translate(self.points, v), mode or self.mode
        )

    def mirror(self) -> "SupportPolytope":
        return SupportPolytope.from_points(
            self.rank, -self.p, geometry.negate(self.points), "mirror"
        )


@dataclass(frozen=True)
class LiftedGraphMap:
    """A train-track self-map lifted to the Z^rank cover, validated on construction."""

    rank: int
    vertices: tuple[str, ...]
    edges: tuple[Edge, ...]
    vertex_images: dict[str, tuple[str, Shift]]
    edge_images: dict[str, tuple[Step, ...]]
    inverse: Optional["LiftedGraphMap"] = None
    metadata: dict = field(default_factory=dict)
    euler_functional: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        self._validate()
        object.__setattr__(self, "_lock", threading.Lock())
        object.__setattr__(self, "_matpows", [LaurentMatrix.identity(len(self.edges), self.rank)])
        object.__setattr__(self, "_supports", {})
        object.__setattr__(self, "_supsets", [])
        object.__setattr__(self, "_k0", self._primitivity_power())

    # -- validation ---------------------------------------------------------

    def _edge(self, name: str) -> Edge:
        for e in self.edges:
            if e.name == name:
                return e
        raise ValidationError(f"unknown edge {name!r}")

    def _step_endpoints(self, step: Step) -> tuple[tuple[str, Shift], tuple[str, Shift]]:
        name, shift, orient = step
        e = self._edge(name)
        start = (e.src, tuple(shift))
        end = (e.dst, tuple(a + b for a, b in zip(shift, e.voltage)))
        return (start, end) if orient == 1 else (end, start)

    def _validate(self):
        if self.rank < 1:
            raise ValidationError("rank must be >= 1")
        names = [e.name for e in self.edges]
        if len(set(names)) != len(names):
            raise ValidationError("duplicate edge names")
        for e in self.edges:
            if e.src not in self.vertices or e.dst not in self.vertices:
                raise ValidationError(f"edge {e.name!r} has unknown endpoint")
            if len(e.voltage) != self.rank:
                raise ValidationError(f"edge {e.name!r} voltage has wrong length")
        for v in self.vertices:
            if v not in self.vertex_images:
                raise ValidationError(f"vertex {v!r} has no image")
            w, shift = self.vertex_images[v]
            if w not in self.vertices or len(shift) != self.rank:
                raise ValidationError(f"vertex image of {v!r} is malformed")
        zero = (0,) * self.rank
        for e in self.edges:
            path = self.edge_images.get(e.name)
            if not path:
                raise ValidationError(f"edge {e.name!r} has no image path")
            iv, iv_shift = self.vertex_images[e.src]
            expected_start = (iv, tuple(iv_shift))
            wv, wv_shift = self.vertex_images[e.dst]
            expected_end = (wv, tuple(a + b + c for a, b, c in zip(wv_shift, e.voltage, zero)))
            cursor = expected_start
            for idx, step in enumerate(path):
                name, shift, orient = step
                if orient not in (1, -1):
                    raise ValidationError(
                        f"edge {e.name!r} image step {idx}: orientation must be +1/-1"
                    )
                if len(shift) != self.rank:
                    raise ValidationError(
                        f"edge {e.name!r} image step {idx}: shift has wrong length"
                    )
                start, end = self._step_endpoints((name, tuple(shift), orient))
                if start != cursor:
                    raise ValidationError(
                        f"edge {e.name!r} image step {idx} ({name!r}): path breaks at {cursor}"
                    )
                cursor = end
            if cursor != expected_end:
                raise ValidationError(
                    f"edge {e.name!r} image path ends at {cursor}, expected {expected_end}"
                )

    def _primitivity_power(self) -> Optional[int]:
        """First power making the integer incidence matrix strictly positive.

        None if no power up to the Wielandt cap works; that disables the
        convergence-constant machinery but is only a warning.
        """
        m = len(self.edges)
        idx = {e.name: i for i, e in enumerate(self.edges)}
        M = [[0] * m for _ in range(m)]
        for e in self.edges:
            for name, _, _ in self.edge_images[e.name]:
                M[idx[e.name]][idx[name]] += 1
        cap = min((m - 1) ** 2 + 1 if m > 1 else 1, _PRIMITIVITY_CAP)
        P = M
        for k in range(1, cap + 1):
            if all(all(x > 0 for x in row) for row in P):
                return k
            P = [[sum(P[i][l] * M[l][j] for l in range(m)) for j in range(m)] for i in range(m)]
        return None

    # -- derived data --------------------------------------------------------

    @property
    def k0(self) -> Optional[int]:
        return self._k0

    def content_key(self) -> tuple:
        """Canonical content identity (feeds the dataset hash in dataio)."""
        return (
            self.rank,
            self.vertices,
            tuple((e.name, e.src, e.dst, e.voltage) for e in self.edges),
            tuple(sorted((v, im) for v, im in self.vertex_images.items())),
            tuple(sorted((e, tuple(path)) for e, path in self.edge_images.items())),
            self.inverse.content_key() if self.inverse else None,
            self.euler_functional,
        )


def build_transition_matrix(track: LiftedGraphMap) -> LaurentMatrix:
    """Incidence matrix over Z[t_1^{±1},...]: entry (e, f) sums t^shift over
    occurrences of edge f (either orientation) in the image of e."""
    idx = {e.name: i for i, e in enumerate(track.edges)}
    m = len(track.edges)
    rows = [[LaurentPoly.zero(track.rank) for _ in range(m)] for _ in range(m)]
    for e in track.edges:
        for name, shift, _ in track.edge_images[e.name]:
            j = idx[name]
            rows[idx[e.name]][j] = rows[idx[e.name]][j] + LaurentPoly.monomial(
                track.rank, shift
            )
    return LaurentMatrix.from_rows(rows)


def _matrix_power_cached(track: LiftedGraphMap, p: int) -> LaurentMatrix:
    with track._lock:  # type: ignore[attr-defined]
        pows = track._matpows  # type: ignore[attr-defined]
        if len(pows) == 1 and p >= 1:
            pows.append(build_transition_matrix(track))
        while len(pows) <= p:
            pows.append(pows[-1] * pows[1])
        return pows[p]


def _support_sets_cached(track: LiftedGraphMap, p: int) -> list[list[frozenset]]:
    """Entrywise supports of the p-th matrix power over the set semiring.

    Transition-matrix coefficients are nonnegative occurrence counts, so
    products and sums never cancel and the support of a product is exactly
    the union of Minkowski sums of entry supports.  This avoids carrying the
    (exponentially large) integer coefficients when only supports matter.
    """
    m = len(track.edges)
    zero = (0,) * track.rank
    with track._lock:  # type: ignore[attr-defined]
        sets = track._supsets  # type: ignore[attr-defined]
        if not sets:
            sets.append(
                [[frozenset([zero]) if i == j else frozenset() for j in range(m)]
                 for i in range(m)]
            )
        if len(sets) == 1 and p >= 1:
            M = build_transition_matrix(track)
            sets.append([[frozenset(q.terms) for q in row] for row in M.entries])
        while len(sets) <= p:
            prev, base = sets[-1], sets[1]
            nxt = []
            for i in range(m):
                row = []
                for j in range(m):
                    acc = set()
                    for k in range(m):
                        for s in prev[i][k]:
                            for t in base[k][j]:
                                acc.add(tuple(a + b for a, b in zip(s, t)))
                    row.append(frozenset(acc))
                nxt.append(row)
            sets.append(nxt)
        return sets[p]


def support_of_power(track: LiftedGraphMap, p: int) -> SupportPolytope:
    """Occupied domains of the p-th power of the transition matrix."""
    if p < 0:
        raise ValidationError("power must be nonnegative")
    with track._lock:  # type: ignore[attr-defined]
        cached = track._supports.get(p)  # type: ignore[attr-defined]
    if cached is not None:
        return cached
    entry_sets = _support_sets_cached(track, p)
    points: set[Shift] = set()
    for row in entry_sets:
        for s in row:
            points.update(s)
    support = SupportPolytope.from_points(track.rank, p, points)
    with track._lock:  # type: ignore[attr-defined]
        track._supports.setdefault(p, support)  # type: ignore[attr-defined]
    return support


def oracle_iterate(track: LiftedGraphMap, p: int, step_budget: int = 2_000_000) -> SupportPolytope:
    """Occupied domains of the p-th power by literal edge-path substitution.

    Independent of the matrix-algebra route; serves as its oracle.  Raises
    BudgetError when the symbolic path outgrows ``step_budget`` steps.
    """
    if p < 0:
        raise ValidationError("power must be nonnegative")
    zero = (0,) * track.rank
    if p == 0:
        return SupportPolytope.from_points(track.rank, 0, [zero])
    images = {e: list(path) for e, path in track.edge_images.items()}
    points: set[Shift] = set()
    for e in track.edges:
        # Path of the p-th image of the lift of e based in domain 0.
        path: list[Step] = [(e.name, zero, 1)]
        for _ in range(p):
            new_path: list[Step] = []
            for name, shift, orient in path:
                img = images[name]
                if orient == 1:
                    for n2, s2, o2 in img:
                        new_path.append((n2, tuple(a + b for a, b in zip(shift, s2)), o2))
                else:
                    for n2, s2, o2 in reversed(img):
                        new_path.append((n2, tuple(a + b for a, b in zip(shift, s2)), -o2))
                if len(new_path) > step_budget:
                    raise BudgetError(
                        f"oracle path exceeded {step_budget} steps at power {p}"
                    )
            path = new_path
        points.update(s for _, s, _ in path)
    return SupportPolytope.from_points(track.rank, p, points)


def omega_of_word(
    track: LiftedGraphMap,
    x: Sequence[int],
    y: int,
    allow_mirror: bool = False,
    p_cap: Optional[int] = None,
) -> SupportPolytope:
    """Support of the word h^x psi~^y: the translate x + Omega(psi~^y).

    Negative y needs either bundled inverse-map data or explicitly enabled
    mirror mode (the deck-commutation identity at the surface level; the
    track-level discrepancy is absorbed by the safety margin downstream).
    """
    x = tuple(int(v) for v in x)
    if len(x) != track.rank:
        raise ValidationError("translate vector has wrong length")
    if p_cap is not None and abs(y) > p_cap:
        raise ValidationError(f"power {y} beyond exact cap {p_cap}")
    if y >= 0:
        return support_of_power(track, y).translate(x, "exact-forward")
    if track.inverse is not None:
        return support_of_power(track.inverse, -y).translate(x, "inverse-data")
    if allow_mirror:
        return support_of_power(track, -y).mirror().translate(x, "mirror")
    raise ValidationError(
        "negative power requires inverse-map data or explicitly enabled mirror mode"
    )


def mode_gap_constant(track: LiftedGraphMap, p_max: int = 6) -> int:
    """Measured C0: max over p <= p_max of the Hausdorff distance (rounded up)
    between inverse-data and mirror-mode supports.  Requires inverse data."""
    if track.inverse is None:
        raise ValidationError("no inverse data to compare against mirror mode")
    import math

    worst = 0
    for p in range(1, p_max + 1):
        inv = support_of_power(track.inverse, p)
        mir = support_of_power(track, p).mirror()
        d2 = geometry.hausdorff_dist2(inv.points, mir.points)
        c = math.isqrt(math.ceil(d2))
        while c * c < d2:
            c += 1
        worst = max(worst, c)
    return worst
