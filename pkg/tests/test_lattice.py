import random
from fractions import Fraction
from itertools import product
from math import gcd

import pytest

from fibercert.errors import CapabilityError, ValidationError
from fibercert.geometry import point_hull_dist2
from fibercert.lattice import (
    DeepPoint,
    FiberedClass,
    PerpLattice,
    covolume,
    deep_point,
    perp_basis,
    systole,
)


def primitive_classes(rank: int, count: int, seed: int = 7):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        vec = tuple(rng.randint(-9, 9) for _ in range(rank)) + (rng.randint(1, 30),)
        g = 0
        for v in vec:
            g = gcd(g, abs(v))
        if g == 1:
            out.append(FiberedClass(vec))
    return out


# -- classes -------------------------------------------------------------------

def test_fibered_class_basics():
    a = FiberedClass((3, 6))
    assert a.rank == 1 and a.n == 6 and a.p_part == (3,)
    assert not a.is_primitive()
    assert a.primitive_reduction().vector == (1, 2)
    assert FiberedClass((2, 3)).is_primitive()
    with pytest.raises(ValidationError):
        FiberedClass((0, 0))


# -- kernel lattices ---------------------------------------------------------

def test_perp_basis_examples():
    L = perp_basis(FiberedClass((0, 1)))
    assert L.basis == ((1, 0),)
    assert L.zeta_basis == ((1,),)
    assert L.covol2 == 1 and L.ambient_covol2 == 1

    L = perp_basis(FiberedClass((1, 2)))
    assert L.basis == ((2, -1),)
    assert L.covol2 == 4  # projected basis (2,)
    assert L.ambient_covol2 == 5  # |(2, -1)|^2 = |alpha|^2


def test_perp_basis_rejects_imprimitive():
    with pytest.raises(ValidationError, match="primitive"):
        perp_basis(FiberedClass((2, 4)))


def test_perp_basis_is_orthogonal_and_saturated():
    """Basis rows kill alpha, and the lattice is saturated: its Gram
    determinant in the ambient space equals |alpha|^2 exactly (index-1
    sublattice of alpha-perp)."""
    for alpha in primitive_classes(1, 25) + primitive_classes(2, 25):
        L = perp_basis(alpha)
        for b in L.basis:
            assert sum(x * y for x, y in zip(b, alpha.vector)) == 0
        assert L.ambient_covol2 == sum(v * v for v in alpha.vector)


def test_projected_covolume_is_n_squared():
    """covol^2 of the projected kernel lattice equals n^2 for primitive
    classes with n > 0."""
    for alpha in primitive_classes(1, 25) + primitive_classes(2, 25):
        L = perp_basis(alpha)
        assert covolume(L) == alpha.n ** 2


def test_covolume_is_unimodular_invariant():
    alpha = FiberedClass((2, 3, 7))
    L = perp_basis(alpha)
    b0, b1 = L.basis
    rebased = (tuple(x + 3 * y for x, y in zip(b0, b1)), tuple(-v for v in b1))
    L2 = PerpLattice(
        alpha, rebased, tuple(b[:-1] for b in rebased), 0, 0
    )
    gram = [
        [sum(x * y for x, y in zip(u, v)) for v in L2.zeta_basis]
        for u in L2.zeta_basis
    ]
    det = gram[0][0] * gram[1][1] - gram[0][1] * gram[1][0]
    assert det == L.covol2


def test_word_vector():
    L = perp_basis(FiberedClass((1, 1, 3)))
    w = L.word_vector((2, -1))
    assert w == tuple(2 * a - b for a, b in zip(L.basis[0], L.basis[1]))
    assert sum(x * y for x, y in zip(w, (1, 1, 3))) == 0
    with pytest.raises(ValidationError):
        L.word_vector((1,))


# -- systole -------------------------------------------------------------------

def _fake_lattice(zeta_rows) -> PerpLattice:
    alpha = FiberedClass((0,) * len(zeta_rows[0]) + (1,))
    full = tuple(tuple(r) + (0,) for r in zeta_rows)
    return PerpLattice(alpha, full, tuple(tuple(r) for r in zeta_rows), 1, 1)


def _brute_shortest2(rows, span=12):
    best = None
    r = len(rows)
    for coeffs in product(range(-span, span + 1), repeat=r):
        if not any(coeffs):
            continue
        v = tuple(sum(c * row[i] for c, row in zip(coeffs, rows))
                  for i in range(len(rows[0])))
        l2 = sum(x * x for x in v)
        if best is None or l2 < best:
            best = l2
    return best


def test_systole_examples():
    assert systole(_fake_lattice([(5,)])).length2 == 25
    assert systole(_fake_lattice([(3, 0), (0, 4)])).length2 == 9
    s = systole(_fake_lattice([(7, 1), (3, 5)]))
    assert s.length2 == _brute_shortest2([(7, 1), (3, 5)])
    # Canonical sign: lexicographically positive representative.
    assert s.vector >= tuple(-x for x in s.vector)


def test_systole_needs_lll():
    """A badly skewed basis whose shortest vector has large coefficients."""
    rows = [(101, 100), (100, 99)]  # det -1; shortest vector is (1, -1)-ish
    s = systole(_fake_lattice(rows))
    assert s.length2 == _brute_shortest2(rows, span=210)


def test_systole_randomized_vs_brute_force():
    rng = random.Random(11)
    for _ in range(15):
        while True:
            rows = [(rng.randint(-6, 6), rng.randint(-6, 6)) for _ in range(2)]
            det = rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
            if det != 0:
                break
        assert systole(_fake_lattice(rows)).length2 == _brute_shortest2(rows)


def test_systole_on_real_kernels():
    for alpha in primitive_classes(1, 10) + primitive_classes(2, 10):
        L = perp_basis(alpha)
        s = systole(L)
        assert s.length2 >= 1
        # The reported vector really lies in the projected lattice at the
        # reported length.
        assert sum(x * x for x in s.vector) == s.length2


# -- deep point ------------------------------------------------------------

def test_deep_point_rank1_example():
    obstacles = [[(0,)], [(-5,)], [(5,)]]
    dp = deep_point(obstacles, 5, 1)
    assert dp == DeepPoint((-3,), Fraction(4))  # lex-smallest of the tie


def test_deep_point_rank2_matches_exhaustive_scan():
    rng = random.Random(23)
    for _ in range(6):
        obstacles = []
        for _k in range(rng.randint(1, 4)):
            pts = [(rng.randint(-6, 6), rng.randint(-6, 6))
                   for _ in range(rng.randint(1, 4))]
            from fibercert.geometry import convex_hull
            obstacles.append(convex_hull(pts, 2))
        R = 6
        dp = deep_point(obstacles, R, 2)
        best = None
        # product() yields points in ascending lexicographic order, so a
        # strict improvement rule reproduces the lex-smallest tie-break.
        for y in product(range(-R, R + 1), repeat=2):
            d = min(point_hull_dist2(y, h, 2) for h in obstacles)
            if best is None or d > best[1]:
                best = (y, d)
        assert dp.point == best[0]
        assert dp.dist2 == best[1]


def test_deep_point_validation():
    with pytest.raises(ValidationError):
        deep_point([], 3, 1)
    with pytest.raises(ValidationError):
        deep_point([[(0,)]], 0, 1)
    with pytest.raises(CapabilityError):
        deep_point([[(0, 0, 0)]], 3, 3)
