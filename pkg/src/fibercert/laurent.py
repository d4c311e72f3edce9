"""Exact integer multivariate Laurent polynomial and matrix arithmetic.

Polynomials are maps from exponent vectors in Z^r to nonzero integer
coefficients.  Matrices of them carry the lifted train-track transition data;
the characteristic polynomial is computed division-free (Berkowitz), since
Z[t_1^{±1}, ..., t_r^{±1}] is not a field.

Sign convention, used everywhere: char_poly returns F(x, t) = det(M - xI),
i.e. (-1)^m det(xI - M) for an m x m matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Sequence

from .errors import RankMismatchError, ValidationError

Exponent = tuple[int, ...]


def _check_same_rank(p: "LaurentPoly", q: "LaurentPoly") -> None:
    if p.rank != q.rank:
        raise RankMismatchError(f"rank mismatch: {p.rank} vs {q.rank}")


@dataclass(frozen=True)
class LaurentPoly:
    """An integer Laurent polynomial in ``rank`` variables.

    ``terms`` maps exponent vectors to nonzero coefficients; the zero
    polynomial has an empty map.  Instances are immutable.
    """

    rank: int
    terms: Mapping[Exponent, int]

    def __post_init__(self):
        if self.rank < 1:
            raise ValidationError(f"rank must be >= 1, got {self.rank}")
        clean = {}
        for exp, coeff in self.terms.items():
            if len(exp) != self.rank:
                raise ValidationError(f"exponent {exp} has length != rank {self.rank}")
            if coeff != 0:
                clean[tuple(int(e) for e in exp)] = int(coeff)
        object.__setattr__(self, "terms", clean)

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(rank: int) -> "LaurentPoly":
        return LaurentPoly(rank, {})

    @staticmethod
    def const(rank: int, c: int) -> "LaurentPoly":
        return LaurentPoly(rank, {(0,) * rank: c} if c else {})

    @staticmethod
    def monomial(rank: int, exponent: Sequence[int], coeff: int = 1) -> "LaurentPoly":
        return LaurentPoly(rank, {tuple(exponent): coeff} if coeff else {})

    # -- ring operations ---------------------------------------------------

    def __add__(self, other: "LaurentPoly") -> "LaurentPoly":
        _check_same_rank(self, other)
        terms = dict(self.terms)
        for exp, c in other.terms.items():
            s = terms.get(exp, 0) + c
            if s:
                terms[exp] = s
            else:
                terms.pop(exp, None)
        return LaurentPoly(self.rank, terms)

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly(self.rank, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: "LaurentPoly") -> "LaurentPoly":
        return self + (-other)

    def __mul__(self, other: "LaurentPoly") -> "LaurentPoly":
        _check_same_rank(self, other)
        terms: dict[Exponent, int] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                exp = tuple(a + b for a, b in zip(e1, e2))
                s = terms.get(exp, 0) + c1 * c2
                if s:
                    terms[exp] = s
                else:
                    terms.pop(exp, None)
        return LaurentPoly(self.rank, terms)

    def scale(self, c: int) -> "LaurentPoly":
        if c == 0:
            return LaurentPoly.zero(self.rank)
        return LaurentPoly(self.rank, {e: c * v for e, v in self.terms.items()})

    # -- queries -----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def support(self) -> set[Exponent]:
        return set(self.terms)

    def evaluate(self, point: Sequence[Fraction | int]) -> Fraction:
        """Evaluate at nonzero rational coordinates."""
        if len(point) != self.rank:
            raise RankMismatchError("evaluation point has wrong length")
        total = Fraction(0)
        for exp, c in self.terms.items():
            v = Fraction(c)
            for x, e in zip(point, exp):
                v *= Fraction(x) ** e
            total += v
        return total

    def max_degree(self, u: Sequence[int]) -> Optional[int]:
        """Max of <u, e> over the support, or None for the zero polynomial."""
        if not self.terms:
            return None
        return max(sum(a * b for a, b in zip(u, e)) for e in self.terms)

    def min_degree(self, u: Sequence[int]) -> Optional[int]:
        if not self.terms:
            return None
        return min(sum(a * b for a, b in zip(u, e)) for e in self.terms)

    def to_pairs(self) -> list[tuple[Exponent, int]]:
        """Canonical (exponent, coefficient) list, lexicographic on exponents."""
        return sorted(self.terms.items())

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, LaurentPoly)
            and self.rank == other.rank
            and dict(self.terms) == dict(other.terms)
        )

    def __hash__(self) -> int:
        return hash((self.rank, tuple(self.to_pairs())))

    def __repr__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for exp, c in self.to_pairs():
            mono = "*".join(f"t{i + 1}^{e}" for i, e in enumerate(exp) if e)
            parts.append(f"{c}" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)


@dataclass(frozen=True)
class LaurentMatrix:
    """A square matrix of Laurent polynomials over one common rank."""

    dim: int
    rank: int
    entries: tuple[tuple[LaurentPoly, ...], ...]

    def __post_init__(self):
        if self.dim < 1:
            raise ValidationError("matrix dimension must be >= 1")
        rows = []
        for row in self.entries:
            if len(row) != self.dim:
                raise ValidationError("matrix is not square")
            for p in row:
                if p.rank != self.rank:
                    raise RankMismatchError("entry rank differs from matrix rank")
            rows.append(tuple(row))
        if len(rows) != self.dim:
            raise ValidationError("matrix is not square")
        object.__setattr__(self, "entries", tuple(rows))

    @staticmethod
    def from_rows(rows: Sequence[Sequence[LaurentPoly]]) -> "LaurentMatrix":
        return LaurentMatrix(len(rows), rows[0][0].rank, tuple(tuple(r) for r in rows))

    @staticmethod
    def identity(dim: int, rank: int) -> "LaurentMatrix":
        one = LaurentPoly.const(rank, 1)
        zero = LaurentPoly.zero(rank)
        return LaurentMatrix(
            dim, rank,
            tuple(tuple(one if i == j else zero for j in range(dim)) for i in range(dim)),
        )

    def __mul__(self, other: "LaurentMatrix") -> "LaurentMatrix":
        if self.dim != other.dim or self.rank != other.rank:
            raise RankMismatchError("matrix shape/rank mismatch")
        zero = LaurentPoly.zero(self.rank)
        rows = []
        for i in range(self.dim):
            row = []
            for j in range(self.dim):
                acc = zero
                for k in range(self.dim):
                    a = self.entries[i][k]
                    b = other.entries[k][j]
                    if a.terms and b.terms:
                        acc = acc + a * b
                row.append(acc)
            rows.append(tuple(row))
        return LaurentMatrix(self.dim, self.rank, tuple(rows))

    def support(self) -> set[Exponent]:
        """Union of the supports of all entries."""
        pts: set[Exponent] = set()
        for row in self.entries:
            for p in row:
                pts.update(p.terms)
        return pts

    def evaluate(self, point: Sequence[Fraction | int]) -> list[list[Fraction]]:
        return [[p.evaluate(point) for p in row] for row in self.entries]


def mat_pow(M: LaurentMatrix, p: int) -> LaurentMatrix:
    """Exact p-th power by binary powering; M^0 is the identity."""
    if p < 0:
        raise ValidationError("matrix power must be nonnegative")
    result = LaurentMatrix.identity(M.dim, M.rank)
    base = M
    while p:
        if p & 1:
            result = result * base
        p >>= 1
        if p:
            base = base * base
    return result


@dataclass(frozen=True)
class CharPoly:
    """F(x, t) = det(M - xI) = sum_k coeffs[k] * x^(m-k), coeffs[0] = (-1)^m."""

    dim: int
    rank: int
    coeffs: tuple[LaurentPoly, ...]

    def __post_init__(self):
        if len(self.coeffs) != self.dim + 1:
            raise ValidationError("char poly needs dim+1 coefficients")
        c0 = self.coeffs[0]
        if list(c0.terms.items()) != [((0,) * self.rank, (-1) ** self.dim)]:
            raise ValidationError("leading coefficient must be the constant (-1)^dim")

    def evaluate(self, x: Fraction | int, point: Sequence[Fraction | int]) -> Fraction:
        total = Fraction(0)
        for k, c in enumerate(self.coeffs):
            total += c.evaluate(point) * Fraction(x) ** (self.dim - k)
        return total


def char_poly(M: LaurentMatrix) -> CharPoly:
    """Division-free characteristic polynomial via the Berkowitz recursion."""
    m, rank = M.dim, M.rank
    one = LaurentPoly.const(rank, 1)

    def berk(rows: list[list[LaurentPoly]], n: int) -> list[LaurentPoly]:
        # Coefficients of det(xI - A), monic, length n + 1.
        if n == 0:
            return [one]
        a = rows[0][0]
        R = rows[0][1:]
        C = [rows[i][0] for i in range(1, n)]
        B = [row[1:] for row in rows[1:]]
        q = berk(B, n - 1)
        # s[k] = R B^(k-1) C for k >= 1; s[0] = a.
        s = [a]
        v = C
        for _ in range(1, n):
            s.append(_dot(R, v, rank))
            v = _matvec(B, v, rank)
        p = [q[0]]
        for i in range(1, n + 1):
            acc = q[i] if i < len(q) else LaurentPoly.zero(rank)
            for k in range(i):
                j = i - 1 - k
                if j < len(q) and s[k].terms and q[j].terms:
                    acc = acc - s[k] * q[j]
            p.append(acc)
        return p

    rows = [list(r) for r in M.entries]
    monic = berk(rows, m)
    sign = (-1) ** m
    return CharPoly(m, rank, tuple(c.scale(sign) for c in monic))


def _dot(u: Sequence[LaurentPoly], v: Sequence[LaurentPoly], rank: int) -> LaurentPoly:
    acc = LaurentPoly.zero(rank)
    for a, b in zip(u, v):
        if a.terms and b.terms:
            acc = acc + a * b
    return acc


def _matvec(B, v, rank: int) -> list[LaurentPoly]:
    return [_dot(row, v, rank) for row in B]


@dataclass(frozen=True)
class DegreeData:
    """Directional degree extrema of char-poly coefficients.

    For direction u, a[k] (b[k]) is the max (min) of <u, e> over the support
    of the coefficient of x^(m-k), k = 1..m; None marks an empty coefficient.
    """

    direction: tuple[int, ...]
    a: tuple[Optional[int], ...]
    b: tuple[Optional[int], ...]

    def __post_init__(self):
        for ak, bk in zip(self.a, self.b):
            if (ak is None) != (bk is None):
                raise ValidationError("a_k and b_k must be empty together")
            if ak is not None and bk > ak:
                raise ValidationError("b_k must not exceed a_k")


def degree_extrema(F: CharPoly, u: Sequence[int]) -> DegreeData:
    """a_k, b_k for the coefficients of x^(m-k), k = 1..m, in direction u."""
    u = tuple(int(x) for x in u)
    if len(u) != F.rank:
        raise RankMismatchError("direction has wrong length")
    if not any(u):
        raise ValidationError("direction must be nonzero")
    a = []
    b = []
    for k in range(1, F.dim + 1):
        c = F.coeffs[k]
        a.append(c.max_degree(u))
        b.append(c.min_degree(u))
    return DegreeData(u, tuple(a), tuple(b))


@dataclass(frozen=True)
class SlopeEstimate:
    """Char-poly slope estimates in one direction, at truncation p_max.

    A is max over p <= p_max and k of a_k(p)/(k p); B the analogous min of
    b_k(p)/(k p), where a_k(p), b_k(p) are the degree data of char_poly(M^p).
    Both are lower/upper estimates that are monotone in p_max.
    """

    direction: tuple[int, ...]
    p_max: int
    A: Fraction
    B: Fraction


def slope_estimate(M: LaurentMatrix, u: Sequence[int], p_max: int) -> SlopeEstimate:
    if p_max < 1:
        raise ValidationError("p_max must be >= 1")
    u = tuple(int(x) for x in u)
    A: Optional[Fraction] = None
    B: Optional[Fraction] = None
    Mp = LaurentMatrix.identity(M.dim, M.rank)
    for p in range(1, p_max + 1):
        Mp = Mp * M
        dd = degree_extrema(char_poly(Mp), u)
        for k in range(1, M.dim + 1):
            ak, bk = dd.a[k - 1], dd.b[k - 1]
            if ak is None:
                continue
            ra = Fraction(ak, k * p)
            rb = Fraction(bk, k * p)
            A = ra if A is None or ra > A else A
            B = rb if B is None or rb < B else B
    if A is None:
        raise ValidationError("nilpotent matrix: no nonzero char-poly coefficients")
    return SlopeEstimate(u, p_max, A, B)
