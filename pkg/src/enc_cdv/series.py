"""Finite monomial models of the semi-invariant equation ``f``.

Only the minimum monomial weight of ``f`` ever matters, so a series is
stored as the domination-minimal part of its support: a monomial whose
exponent vector dominates another one can never be the unique minimiser.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .weights import DomainError, Weight, WeightSystem

Monomial = tuple  # 4-tuple of nonnegative ints

CA, ODD, CDE = "cA", "odd", "cDE"
FTYPES = (CA, ODD, CDE)
_ALIASES = {"ca": CA, "odd": ODD, "cde": CDE, "cd-e": CDE, "cd/e": CDE}

X1X2 = (1, 1, 0, 0)
X1SQ = (2, 0, 0, 0)
X2SQ = (0, 2, 0, 0)

# distinguished monomials, variables allowed in g, minimal degree of g
_SHAPE = {
    CA: ((X1X2,), (2, 3), 2),
    ODD: ((X1SQ, X2SQ), (2, 3), 3),
    CDE: ((X1SQ,), (1, 2, 3), 3),
}


def normalize_ftype(name: str) -> str:
    try:
        return _ALIASES[str(name).strip().lower()]
    except KeyError:
        raise DomainError(f"unknown series type {name!r}") from None


def distinguished(ftype: str) -> tuple:
    return _SHAPE[normalize_ftype(ftype)][0]


def g_variables(ftype: str) -> tuple:
    return _SHAPE[normalize_ftype(ftype)][1]


def g_min_degree(ftype: str) -> int:
    return _SHAPE[normalize_ftype(ftype)][2]


def dominates(m: Sequence[int], n: Sequence[int]) -> bool:
    """True when ``m >= n`` coordinate-wise."""
    return all(x >= y for x, y in zip(m, n))


def minimal_elements(monos: Iterable[Sequence[int]]) -> list:
    """Domination-minimal members, sorted and deduplicated."""
    uniq = sorted(set(tuple(int(x) for x in m) for m in monos))
    return [m for m in uniq if not any(n != m and dominates(m, n) for n in uniq)]


@dataclass(frozen=True)
class SeriesSupport:
    """Type tag plus the domination-minimal support of ``f``."""

    ftype: str
    monomials: tuple

    @property
    def g_monomials(self) -> tuple:
        dist = distinguished(self.ftype)
        return tuple(m for m in self.monomials if m not in dist)

    def permuted(self, perm: Sequence[int]) -> "SeriesSupport":
        """Relabel variables: new variable ``i`` is old variable ``perm[i]``."""
        monos = [tuple(m[p] for p in perm) for m in self.monomials]
        return SeriesSupport(self.ftype, tuple(minimal_elements(monos)))

    def max_degree(self) -> int:
        return max(sum(m) for m in self.monomials)

    def __str__(self):
        def mono(m):
            parts = []
            for i, d in enumerate(m, 1):
                if d == 1:
                    parts.append(f"x{i}")
                elif d:
                    parts.append(f"x{i}^{d}")
            return "*".join(parts) or "1"

        return " + ".join(mono(m) for m in self.monomials)


def make_support(ftype: str, monomials: Iterable[Sequence[int]]) -> SeriesSupport:
    """Validate the shape of ``f`` for its type and reduce to the minimal support.

    The distinguished monomials are inserted when missing.  A series with no
    g-part is rejected.
    """
    ftype = normalize_ftype(ftype)
    dist, gvars, gdeg = _SHAPE[ftype]
    monos = []
    for m in monomials:
        m = tuple(int(x) for x in m)
        if len(m) != 4 or any(x < 0 for x in m):
            raise DomainError(f"bad exponent vector {m}")
        if sum(m) < 1:
            raise DomainError("constant monomial in support")
        monos.append(m)
    g = [m for m in monos if m not in dist]
    if not g:
        raise DomainError("g = 0 is not allowed")
    for m in g:
        if any(m[i] for i in range(4) if i not in gvars):
            raise DomainError(f"monomial {m} uses a variable outside g for type {ftype}")
        if sum(m) < gdeg:
            raise DomainError(f"monomial {m} has degree below {gdeg} for type {ftype}")
    full = minimal_elements(list(dist) + g)
    if any(d not in full for d in dist):  # cannot happen given the variable checks
        raise DomainError("distinguished monomial dominated")
    return SeriesSupport(ftype, tuple(full))


def semiinvariance_violations(ws: WeightSystem, s: SeriesSupport) -> list[str]:
    out = []
    for m in s.monomials:
        if sum(x * y for x, y in zip(m, ws.a)) % ws.r != ws.e:
            out.append(f"monomial {m} is not semi-invariant of weight e={ws.e}")
    if s.ftype == ODD and (ws.a[0] - ws.a[1]) % ws.r == 0:
        out.append("odd type needs a1 != a2 mod r")
    return out


def weight_of_monomial(w, m: Sequence[int]) -> Fraction:
    coords = w.coords if isinstance(w, Weight) else w
    return sum((Fraction(c) * x for c, x in zip(coords, m)), Fraction(0))


def weight_of_f(w, s) -> Fraction:
    monos = s.monomials if isinstance(s, SeriesSupport) else tuple(s)
    if not monos:
        raise DomainError("empty support")
    return min(weight_of_monomial(w, m) for m in monos)


def semiinvariant_monomials(ws: WeightSystem, ftype: str, max_degree: int) -> list:
    """Minimal semi-invariant g-monomials of the type up to ``max_degree``."""
    if max_degree < 2:
        raise DomainError("max_degree must be at least 2")
    ftype = normalize_ftype(ftype)
    _, gvars, gdeg = _SHAPE[ftype]
    found = []
    for exps in itertools.product(range(max_degree + 1), repeat=len(gvars)):
        deg = sum(exps)
        if deg < gdeg or deg > max_degree:
            continue
        m = [0, 0, 0, 0]
        for i, x in zip(gvars, exps):
            m[i] = x
        if sum(x * y for x, y in zip(m, ws.a)) % ws.r == ws.e:
            found.append(tuple(m))
    return minimal_elements(found)
