"""The ten normal-form families, g-template enumeration, scans and the atlas."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import gcd
from typing import Callable, Iterable, Optional

from .series import CA, CDE, ODD, make_support, semiinvariant_monomials
from .weights import InvalidWeightSystem, WeightSystem

RECORD_VERSION = 1


@dataclass(frozen=True)
class FamilySpec:
    tag: str
    ftype: str
    tuple_of: Callable  # (r, a) -> (a1, a2, a3, a4, e)
    constraint: Callable  # (r, a) -> None or a reason string
    uses_param: bool = True


def _coprime(*vals):
    def check(r, a):
        for name, v in vals:
            g = gcd(v(r, a) % r, r)
            if g != 1:
                return f"gcd({name},r)={g} != 1"
        return None

    return check


def _all(*checks):
    def check(r, a):
        for c in checks:
            why = c(r, a)
            if why:
                return why
        return None

    return check


def _even(r, a):
    return None if r % 2 == 0 else "r must be even"


def _odd(r, a):
    return None if r % 2 else "r must be odd"


def _four(r, a):
    return None if r % 4 == 0 else "4 must divide r"


def _a_plus_one_shared(r, a):
    return None if gcd((a + 1) % r, r) > 1 else "gcd(a+1,r) must exceed 1"


_A = ("a", lambda r, a: a)
_A1 = ("a+1", lambda r, a: a + 1)

FAMILIES = {
    "cA-C": FamilySpec("cA-C", CA, lambda r, a: (a, 1, -a, a + 1, a + 1), _coprime(_A, _A1)),
    "cA-D": FamilySpec("cA-D", CA, lambda r, a: (a, -a - 1, -a, a + 1, -1), _coprime(_A, _A1)),
    "cA-B": FamilySpec(
        "cA-B", CA, lambda r, a: (1, a, -a, a + 1, a + 1), _all(_coprime(_A), _a_plus_one_shared)
    ),
    "Odd": FamilySpec(
        "Odd", ODD, lambda r, a: (1, (r + 2) // 2, (r - 2) // 2, 2, 2), _four, uses_param=False
    ),
    "cDE-b": FamilySpec("cDE-b", CDE, lambda r, a: (a, -a, 1, 2 * a, 2 * a), _all(_coprime(_A), _even)),
    "cDE-c": FamilySpec("cDE-c", CDE, lambda r, a: (1, a, -a, 2, 2), _all(_coprime(_A), _even)),
    "cDE-d": FamilySpec(
        "cDE-d", CDE, lambda r, a: ((r - 1) // 2, (r + 1) // 2, a, -a, -1), _all(_coprime(_A), _odd)
    ),
    "cDE-e": FamilySpec("cDE-e", CDE, lambda r, a: (a, -a, 2 * a, 1, 2 * a), _all(_coprime(_A), _odd)),
    "cDE-f": FamilySpec("cDE-f", CDE, lambda r, a: (1, a, -a, 2, 2), _all(_coprime(_A), _odd)),
    "cDE-a": FamilySpec("cDE-a", CDE, lambda r, a: (0, a, -a, 1, 0), _coprime(_A)),
}
FAMILY_TAGS = tuple(FAMILIES)


@dataclass(frozen=True)
class Rejection:
    family: str
    r: int
    a: Optional[int]
    reason: str


def moreover_excluded(r: int, a, e: int) -> Optional[int]:
    """Parameter ``t`` when ``(a1..a4; e) = (t, -t, 1, 0; 0)`` with gcd(t, r) = 1.

    Matched literally: the swapped tuple (t, -t, 0, 1; 0) stays admissible.
    """
    a = [x % r for x in a]
    e %= r
    if e != 0 or (a[0] + a[1]) % r or gcd(a[0], r) != 1:
        return None
    if (a[2], a[3]) == (1 % r, 0):
        return a[0]
    return None


def generate_family(family: str, r: int, a: Optional[int] = None):
    """The reduced weight system of a family member, or a :class:`Rejection`."""
    form = FAMILIES.get(family)
    if form is None:
        raise ValueError(f"unknown family {family!r}")
    if r < 2:
        return Rejection(family, r, a, "r must be at least 2")
    if form.uses_param:
        if a is None:
            return Rejection(family, r, a, "missing parameter a")
        a %= r
    why = form.constraint(r, a if form.uses_param else 0)
    if why:
        return Rejection(family, r, a, why)
    t = form.tuple_of(r, a if form.uses_param else 0)
    try:
        ws = WeightSystem(r, t[:4], t[4])
    except InvalidWeightSystem as exc:
        return Rejection(family, r, a, f"setting violated: {exc}")
    if form.ftype == CA and moreover_excluded(r, ws.a, ws.e) is not None:
        return Rejection(family, r, a, "excluded tuple (a,-a,1,0;0)")
    return ws


def family_members(family: str, r: int):
    """Admissible ``(a, ws)`` for one ``r``; ``a`` is None for the parameter-free family."""
    form = FAMILIES[family]
    params = range(1, r) if form.uses_param else [None]
    out = []
    for a in params:
        ws = generate_family(family, r, a)
        if isinstance(ws, WeightSystem):
            out.append((a, ws))
    return out


def g_templates(ws: WeightSystem, ftype: str, d_max: int, s_max: int):
    """Nonempty subsets (size <= s_max) of the minimal semi-invariant g-monomials.

    Subsets of an antichain are antichains; each yields a support.
    """
    pool = semiinvariant_monomials(ws, ftype, d_max)
    for size in range(1, s_max + 1):
        for combo in itertools.combinations(pool, size):
            yield make_support(ftype, combo)


def degree_cap_binding(support, d_max: int) -> bool:
    return any(sum(m) >= d_max for m in support.g_monomials)


# ---------------------------------------------------------------- scans


def scan_family(
    family: str,
    r_max: int,
    k_max: int = 3,
    d_max: int = 8,
    s_max: int = 3,
    r_min: int = 2,
    exclude_integer_classes: bool = True,
    with_structure: bool = True,
) -> list:
    """Run the classification over every member and template; records in canonical order."""
    from .pipeline import family_record  # local import: pipeline depends on this module

    if r_max < 1 or k_max < 1 or d_max < 2 or s_max < 1:
        raise ValueError("caps must be positive (d_max >= 2)")
    form = FAMILIES[family]
    out = []
    for r in range(max(2, r_min), r_max + 1):
        for a, ws in family_members(family, r):
            for s in g_templates(ws, form.ftype, d_max, s_max):
                out.append(
                    family_record(
                        family, a, ws, s, k_max, d_max, exclude_integer_classes, with_structure
                    )
                )
    return out


class VersionMismatch(ValueError):
    pass


def atlas_merge(records: Iterable[dict]) -> list:
    """Deduplicated ``(family, k, r, beta)`` rows with the number of distinct supports."""
    keys = {}
    for rec in records:
        if rec.get("version") != RECORD_VERSION:
            raise VersionMismatch(f"record version {rec.get('version')} != {RECORD_VERSION}")
        verdict = rec.get("verdict", {})
        if verdict.get("status") != "Valid":
            continue
        key = (rec["family"], verdict["k"], rec["r"], tuple(verdict["beta"] or ()))
        supp = (tuple(rec["ws"]["a"]), rec["ws"]["e"], tuple(tuple(m) for m in rec["support"]["monomials"]))
        keys.setdefault(key, set()).add(supp)
    rows = []
    for (family, k, r, beta), supports in keys.items():
        rows.append({"family": family, "k": k, "r": r, "beta": list(beta), "supports": len(supports)})
    rows.sort(key=lambda row: (row["family"], row["k"], row["r"], _beta_sort(row["beta"])))
    return rows


def _beta_sort(beta):
    from fractions import Fraction

    return tuple(Fraction(x) for x in beta)


def beta_growth(records: Iterable[dict], family: str) -> list:
    """Distinct beta counts among Valid records in windows ``(R/2, R]`` for ``R`` = each r seen.

    Regressions (a later window with more distinct values) are reported by the caller.
    """
    by_r = {}
    for rec in records:
        v = rec.get("verdict", {})
        if rec.get("family") == family and v.get("status") == "Valid" and v.get("beta"):
            by_r.setdefault(rec["r"], set()).add(tuple(v["beta"]))
    out = []
    for big in sorted(by_r):
        seen = set()
        for r, betas in by_r.items():
            if big / 2 < r <= big:
                seen |= betas
        out.append((big, len(seen)))
    return out
