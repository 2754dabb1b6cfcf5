"""Index algebra: dyadic shear parameters, parabolic/shear/sampling matrices
and enumeration of shearlet indices.

Shears are kept as exact dyadic rationals ``q / 2**t``; matrices are exact
2x2 tuples of :class:`fractions.Fraction` with float views for numerics.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

import numpy as np


class DomainError(ValueError):
    """An index lies outside the domain of an operation."""


def ceil_half(j: int) -> int:
    return -((-j) // 2)


def floor_half(j: int) -> int:
    return j // 2


@dataclass(frozen=True, order=False)
class ShearParam:
    """Shear ``q / 2**t`` in canonical form: ``(t, q) == (0, 0)`` or ``q`` odd."""

    t: int
    q: int

    def __post_init__(self):
        if self.t < 0:
            raise DomainError(f"negative exponent t={self.t}")
        if abs(self.q) > 2 ** self.t:
            raise DomainError(f"|q|={abs(self.q)} exceeds 2**t={2 ** self.t}")
        if not ((self.t, self.q) == (0, 0) or self.q % 2 != 0):
            raise DomainError(f"non-canonical shear (t={self.t}, q={self.q})")

    @classmethod
    def from_value(cls, value) -> "ShearParam":
        """Canonical representation of a dyadic rational in [-1, 1]."""
        v = Fraction(value)
        if v == 0:
            return cls(0, 0)
        den = v.denominator
        t = den.bit_length() - 1
        if den != 2 ** t:
            raise DomainError(f"{value} is not a dyadic rational")
        return cls(t, v.numerator)

    @property
    def value(self) -> Fraction:
        return Fraction(self.q, 2 ** self.t)

    @property
    def j0(self) -> int:
        """Smallest nonnegative scale j with ``ceil(j/2) == t``."""
        return 0 if self.t == 0 else 2 * self.t - 1

    def __float__(self) -> float:
        return float(self.value)

    def __lt__(self, other: "ShearParam") -> bool:
        return self.value < other.value

    def label(self) -> str:
        """Filesystem-safe text form, e.g. ``-3o4`` for -3/4."""
        v = self.value
        return f"{v.numerator}o{v.denominator}"

    def __str__(self) -> str:
        return str(self.value)


def shear_set(J: int) -> list[ShearParam]:
    """All shears ``q / 2**ceil(j/2)`` with ``0 <= j <= J``, sorted by value."""
    if J < 0:
        raise DomainError("J must be nonnegative")
    found = {ShearParam(0, 0)}
    for j in range(J + 1):
        t = ceil_half(j)
        for q in range(-(2 ** t), 2 ** t + 1):
            if q % 2:
                found.add(ShearParam(t, q))
    return sorted(found)


def k_for(s: ShearParam, j: int) -> int:
    """Integer shear k with ``s == k / 2**ceil(j/2)``."""
    if j < s.j0:
        raise DomainError(f"scale j={j} below minimal scale j0={s.j0} of s={s}")
    return s.q * 2 ** (ceil_half(j) - s.t)


def shear_for(j: int, k: int) -> ShearParam:
    """Inverse of :func:`k_for`: the unique shear whose integer shear at scale j is k."""
    if abs(k) > 2 ** ceil_half(j):
        raise DomainError(f"|k|={abs(k)} exceeds 2**ceil(j/2) at j={j}")
    return ShearParam.from_value(Fraction(k, 2 ** ceil_half(j)))


# --- exact 2x2 matrices -------------------------------------------------------

Mat = tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]


def mat(a, b, c, d) -> Mat:
    return ((Fraction(a), Fraction(b)), (Fraction(c), Fraction(d)))


def matmul(x: Mat, y: Mat) -> Mat:
    return tuple(
        tuple(sum(x[i][k] * y[k][l] for k in range(2)) for l in range(2)) for i in range(2)
    )


def transpose(x: Mat) -> Mat:
    return ((x[0][0], x[1][0]), (x[0][1], x[1][1]))


def det(x: Mat) -> Fraction:
    return x[0][0] * x[1][1] - x[0][1] * x[1][0]


def inv(x: Mat) -> Mat:
    d = det(x)
    if d == 0:
        raise ZeroDivisionError("singular matrix")
    return ((x[1][1] / d, -x[0][1] / d), (-x[1][0] / d, x[0][0] / d))


def to_array(x: Mat) -> np.ndarray:
    return np.array([[float(v) for v in row] for row in x])


def parabolic(j: int) -> Mat:
    """``A_j = diag(2**j, 2**floor(j/2))``; negative j allowed."""
    return mat(Fraction(2) ** j, 0, 0, Fraction(2) ** floor_half(j))


def parabolic_tilde(j: int) -> Mat:
    return mat(Fraction(2) ** floor_half(j), 0, 0, Fraction(2) ** j)


def shear_matrix(s) -> Mat:
    """Unit upper-triangular shear with entry s (int, Fraction or ShearParam)."""
    v = s.value if isinstance(s, ShearParam) else Fraction(s)
    return mat(1, v, 0, 1)


def sampling(p: int) -> Mat:
    """``D_p = diag(1, 2**-max(p-1, 0))``."""
    if p < 0:
        raise DomainError("p must be nonnegative")
    return mat(1, 0, 0, Fraction(1, 2 ** max(p - 1, 0)))


@dataclass(frozen=True)
class ParabolicMatrices:
    j: int
    shear: Fraction
    p: int
    A: Mat
    Atilde: Mat
    S: Mat
    D: Mat
    A_inv: Mat = field(repr=False)
    S_inv: Mat = field(repr=False)

    @property
    def AS(self) -> Mat:
        return matmul(self.A, self.S)

    @property
    def AS_inv_T(self) -> Mat:
        """``(A_j S_s)^{-T}``, the matrix acting on frequencies."""
        return transpose(inv(self.AS))


def matrices(j: int, s, p: int = 0) -> ParabolicMatrices:
    if j < 0 or p < 0:
        raise DomainError("j and p must be nonnegative")
    A = parabolic(j)
    S = shear_matrix(s)
    v = s.value if isinstance(s, ShearParam) else Fraction(s)
    return ParabolicMatrices(
        j=j, shear=v, p=p, A=A, Atilde=parabolic_tilde(j), S=S, D=sampling(p),
        A_inv=inv(A), S_inv=inv(S),
    )


# --- shearlet indices ---------------------------------------------------------

@dataclass(frozen=True)
class LambdaIndex:
    """Full index (cone, j, s, m, p); ``j == -1`` marks the coarse element."""

    cone: int
    j: int
    s: ShearParam
    m: tuple[int, int]
    p: int

    def __post_init__(self):
        if self.cone not in (0, 1):
            raise DomainError("cone must be 0 or 1")
        if self.p < 0:
            raise DomainError("p must be nonnegative")
        if not (self.j == -1 or self.j >= self.s.j0):
            raise DomainError(f"j={self.j} below j0={self.s.j0} for s={self.s}")

    @property
    def scale(self) -> int:
        """The dilation actually applied: j0 for coarse elements, j otherwise."""
        return self.s.j0 if self.j == -1 else self.j


def enumerate_lambda(shears: list[ShearParam], J: int, P: int,
                     m_range: range = range(1)) -> Iterator[LambdaIndex]:
    """Truncated Λ in lexicographic (cone, s, j, p, m) order."""
    for cone in (0, 1):
        for s in shears:
            for j in [-1] + list(range(s.j0, J + 1)):
                for p in range(P + 1):
                    for m1 in m_range:
                        for m2 in m_range:
                            yield LambdaIndex(cone, j, s, (m1, m2), p)
