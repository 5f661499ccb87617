"""Residue data of a cyclic action and the lattice of admissible weights.

A weight system ``1/r(a1, a2, a3, a4; e)`` records the characters of a
cyclic group of order ``r`` acting on four coordinates and on the equation.
Weights are nonnegative rational 4-vectors congruent to a multiple of
``(a1, ..., a4) / r`` modulo the integer lattice.  Everything is exact:
coordinates are :class:`fractions.Fraction` values with denominators
dividing ``r``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Optional, Sequence

ZERO = Fraction(0)
ONE = Fraction(1)


class DomainError(ValueError):
    """An operation was called outside its domain."""


class InvalidWeightSystem(DomainError):
    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


def frac(x: Fraction) -> Fraction:
    """Fractional part ``{x}``, always in ``[0, 1)``."""
    return x - (x.numerator // x.denominator)


def setting_violations(r: int, a: Sequence[int], e: int) -> list[str]:
    """Return the violated residue conditions (empty when the data is admissible)."""
    if r < 1:
        return ["r must be a positive integer"]
    if len(a) != 4:
        return ["exactly four weights are required"]
    a = [x % r for x in a]
    e %= r
    out = []
    ge = gcd(e, r)
    for i, ai in enumerate(a, 1):
        if ge % gcd(ai, r):
            out.append(f"gcd(a{i},r)={gcd(ai, r)} does not divide gcd(e,r)={ge}")
    for i, j in itertools.combinations(range(4), 2):
        g = gcd(gcd(a[i], a[j]), r)
        if g != 1:
            out.append(f"gcd(a{i + 1},a{j + 1},r)={g} != 1")
    if (sum(a) - e - 1) % r:
        out.append("a1+a2+a3+a4-e is not 1 mod r")
    return out


@dataclass(frozen=True)
class WeightSystem:
    """Validated residue data; residues are reduced into ``[0, r)``."""

    r: int
    a: tuple[int, int, int, int]
    e: int

    def __post_init__(self):
        bad = setting_violations(self.r, self.a, self.e)
        if bad:
            raise InvalidWeightSystem(bad)
        object.__setattr__(self, "a", tuple(int(x) % self.r for x in self.a))
        object.__setattr__(self, "e", int(self.e) % self.r)

    def residues(self, j: int) -> tuple[int, int, int, int]:
        return tuple(j * x % self.r for x in self.a)

    def permuted(self, perm: Sequence[int]) -> "WeightSystem":
        """Coordinate ``i`` of the result is coordinate ``perm[i]`` of ``self``."""
        return WeightSystem(self.r, tuple(self.a[p] for p in perm), self.e)

    def __str__(self):
        return f"1/{self.r}({', '.join(map(str, self.a))}; {self.e})"


@dataclass(frozen=True)
class Weight:
    """A point of the lattice N together with its class index ``j``."""

    coords: tuple[Fraction, Fraction, Fraction, Fraction]
    class_index: int
    r: int

    @property
    def numerators(self) -> tuple[int, ...]:
        """Coordinates scaled by ``r`` (always integers)."""
        return tuple(int(c * self.r) for c in self.coords)

    def sort_key(self):
        return (self.class_index, self.coords)

    def total(self) -> Fraction:
        return sum(self.coords, ZERO)

    def scaled(self, t: int) -> "Weight":
        return Weight(tuple(t * c for c in self.coords), t * self.class_index % self.r, self.r)

    def in_unit_cube(self) -> bool:
        return all(ZERO <= c <= ONE for c in self.coords)

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coords)

    def permuted(self, perm: Sequence[int]) -> "Weight":
        return Weight(tuple(self.coords[p] for p in perm), self.class_index, self.r)

    def __str__(self):
        return "(" + ",".join(str(c) for c in self.coords) + ")"


def class_of(ws: WeightSystem, coords: Sequence[Fraction]) -> Optional[int]:
    """Class index ``j`` with ``coords = j*a/r mod Z^4``, or None if there is none.

    Raises DomainError if several classes match; the pairwise gcd condition
    rules that out for validated systems with ``r > 1``.
    """
    r = ws.r
    nums = []
    for c in coords:
        c = Fraction(c)
        if (c * r).denominator != 1:
            return None
        nums.append(int(c * r) % r)
    hits = [j for j in range(r) if all(j * ai % r == n for ai, n in zip(ws.a, nums))]
    if len(hits) > 1:
        raise DomainError(f"ambiguous class for {tuple(coords)}: {hits}")
    return hits[0] if hits else None


def make_weight(ws: WeightSystem, coords: Iterable) -> Weight:
    """Build a member of N, checking nonnegativity, nonvanishing and the congruence."""
    coords = tuple(Fraction(c) for c in coords)
    if len(coords) != 4:
        raise DomainError("weights have four coordinates")
    if any(c < 0 for c in coords):
        raise DomainError(f"negative coordinate in {coords}")
    if all(c == 0 for c in coords):
        raise DomainError("the zero vector is not in N")
    j = class_of(ws, coords)
    if j is None:
        raise DomainError(f"{tuple(map(str, coords))} is not congruent to any j*a/r")
    return Weight(coords, j, ws.r)


def alpha(ws: WeightSystem, j: int) -> Weight:
    """The fractional-part vector ``({j a1/r}, ..., {j a4/r})``."""
    if not 1 <= j <= ws.r - 1:
        raise DomainError(f"class index {j} outside [1, {ws.r - 1}]")
    return Weight(tuple(Fraction(n, ws.r) for n in ws.residues(j)), j, ws.r)


def complement(w: Weight) -> Weight:
    """``(1,1,1,1) - w``; defined for weights inside the unit cube."""
    if any(c > ONE or c < ZERO for c in w.coords):
        raise DomainError(f"complement needs coordinates in [0,1], got {w}")
    return Weight(tuple(ONE - c for c in w.coords), -w.class_index % w.r, w.r)


def enumerate_N0(ws: WeightSystem) -> list[Weight]:
    """All weights in ``[0,1]^4`` of nonzero class, minus the 0/1 vectors.

    A zero coordinate of ``alpha_j`` contributes both its 0 and its 1 lift.
    """
    out = []
    for j in range(1, ws.r):
        base = alpha(ws, j)
        zeros = [i for i, c in enumerate(base.coords) if c == 0]
        for lift in itertools.product((ZERO, ONE), repeat=len(zeros)):
            coords = list(base.coords)
            for i, v in zip(zeros, lift):
                coords[i] = v
            if all(c in (ZERO, ONE) for c in coords):
                continue
            out.append(Weight(tuple(coords), j, ws.r))
    out.sort(key=Weight.sort_key)
    return out


def is_primitive(ws: WeightSystem, w: Weight) -> bool:
    """True unless ``w = t*gamma`` for some ``gamma`` in N and ``t >= 2``."""
    content = 0
    for n in w.numerators:
        content = gcd(content, n)
    for t in range(2, content + 1):
        if content % t == 0 and class_of(ws, [c / t for c in w.coords]) is not None:
            return False
    return True


@dataclass(frozen=True)
class PsiSets:
    psi1: tuple[Weight, ...]
    psi2: tuple[Weight, ...]
    k: int

    @property
    def union(self) -> tuple[Weight, ...]:
        return self.psi1 + self.psi2

    def contains(self, w: Weight) -> bool:
        return any(w.coords == p.coords for p in self.union)

    def in_psi1(self, w: Weight) -> bool:
        return any(w.coords == p.coords for p in self.psi1)

    def in_psi2(self, w: Weight) -> bool:
        return any(w.coords == p.coords for p in self.psi2)


def psi_sets(ws: WeightSystem, beta: Optional[Weight], k: int) -> PsiSets:
    """Multiples ``t*beta`` (``t < k``) and the complements of those inside the unit cube."""
    if k < 1:
        raise DomainError("k must be positive")
    if k == 1:
        return PsiSets((), (), 1)
    if beta is None:
        raise DomainError("k >= 2 needs a weight beta")
    psi1 = tuple(beta.scaled(t) for t in range(1, k))
    psi2 = tuple(complement(w) for w in psi1 if w.in_unit_cube())
    return PsiSets(psi1, psi2, k)
