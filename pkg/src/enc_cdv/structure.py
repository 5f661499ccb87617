"""Condition-by-condition checks of the two structure theorems, and the
normal-form matcher.

Each condition is evaluated on the concrete instance and recorded as data;
a failing condition is reported as an exception for the ``(r, beta)`` atlas
rather than raised.  Only the gcd condition depends on the coordinate order,
so the coordinate search is done there alone.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Optional

from .families import FAMILIES, moreover_excluded
from .lemmas import terminal_identity_fails
from .series import CA, CDE, ODD, SeriesSupport, normalize_ftype, weight_of_f, weight_of_monomial
from .valuation import SETTING_BOUND
from .weights import ONE, ZERO, Weight, WeightSystem, alpha, complement, enumerate_N0, psi_sets

STRUCTURE_BOUND = Fraction(13, 14)
HALF = Fraction(1, 2)

IDENTITY = (0, 1, 2, 3)
SWAP_34 = (0, 1, 3, 2)
# x1<->x2 and x3<->x4 generate the symmetries of the cA and odd shapes
CA_PERMS = (IDENTITY, (1, 0, 2, 3), SWAP_34, (1, 0, 3, 2))
# permutations of x2, x3, x4: identity, transpositions, then 3-cycles
CDE_PERMS = (IDENTITY, (0, 2, 1, 3), (0, 3, 2, 1), SWAP_34, (0, 2, 3, 1), (0, 3, 1, 2))


@dataclass
class Condition:
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_json(self):
        out = {"pass": self.passed}
        out.update(self.detail)
        return out


@dataclass
class StructureReport:
    theorem: str  # "cA" or "nonCA"
    conditions: dict
    permutation: tuple
    exceptions: list = field(default_factory=list)
    flags: list = field(default_factory=list)

    @property
    def all_pass(self) -> bool:
        return all(c.passed for c in self.conditions.values())

    def failed(self) -> list:
        return [k for k, c in self.conditions.items() if not c.passed]


def _mono(m):
    return tuple(m)


X1X2 = (1, 1, 0, 0)
X3X4 = (0, 0, 1, 1)
X2X3X4 = (0, 1, 1, 1)


def _w(w, m) -> Fraction:
    return weight_of_monomial(w, m)


def _frac_sum(r, j, vals):
    return sum(j * x % r for x in vals)


def _multiples_skip(ws, witness):
    """Class indices of the multiples t*beta with t < k (used where only classes matter)."""
    if witness.k <= 1 or witness.beta is None:
        return set()
    return {t * witness.beta.class_index % ws.r for t in range(1, witness.k)}


def _beta_in_N0(beta: Optional[Weight]) -> bool:
    return beta is not None and beta.in_unit_cube() and not all(c in (ZERO, ONE) for c in beta.coords)


# ---------------------------------------------------------------- cA


def _ca_dichotomy(w: Weight, s) -> Optional[str]:
    """None when ``w`` satisfies the three bullets of the cA dichotomy, else the first broken bullet.

    The second half of the first bullet uses ``w'(f) = w'(x1x2) - 1``.
    """
    wc = complement(w)
    wf, wcf = weight_of_f(w, s), weight_of_f(wc, s)
    w12, wc12 = _w(w, X1X2), _w(wc, X1X2)
    if not (wf == w12 <= 1 and wcf == wc12 - 1):
        return "a"
    if not (_w(w, X3X4) > 1 and _w(wc, X3X4) < 1):
        return "b"
    if (w12 == 1) != (wc12 == 1):
        return "c"
    if w12 == 1:
        if not (w.coords[2] == 1 or w.coords[3] == 1):
            return "c"
        if not (wc.coords[2] == 0 or wc.coords[3] == 0):
            return "c"
    return None


def check_cA_structure(ws: WeightSystem, s: SeriesSupport, witness) -> StructureReport:
    r, a, e = ws.r, ws.a, ws.e
    beta, k = witness.beta, witness.k
    psi = psi_sets(ws, beta, k)
    conds = {}
    flags = []

    # (1)
    bad = None
    for al in enumerate_N0(ws):
        if psi.contains(al):
            continue
        why_a = _ca_dichotomy(al, s)
        if why_a is None:
            continue
        why_b = _ca_dichotomy(complement(al), s)
        if why_b is None:
            continue
        bad = {"weight": al, "bullet": why_a}
        break
    conds["1"] = Condition(bad is None, {"counterexample": bad} if bad else {})

    # (2)
    # classes inside Psi are exempt; their bullet (if any) is kept for auditing
    bullets, in_psi, bad = {}, {}, None
    for j in range(1, r):
        s12 = _frac_sum(r, j, a[:2])
        s34 = _frac_sum(r, j, a[2:])
        je = j * e % r
        if s12 == je and s34 == j + r:
            hit = 1
        elif s12 == je + r and s34 == j:
            hit = 2
        else:
            hit = None
        if psi.contains(alpha(ws, j)):
            if hit:
                in_psi[j] = hit
        elif hit:
            bullets[j] = hit
        elif bad is None:
            bad = j
    detail = {"bullets": bullets, "bullets_in_psi": in_psi} if bad is None else {"j": bad}
    conds["2"] = Condition(bad is None, detail)

    # (3): the only place where switching x3 and x4 matters
    perm, bad_i = None, None
    for p in (IDENTITY, SWAP_34):
        b = [a[i] for i in p]
        fails = [i + 1 for i in range(3) if gcd(b[i], r) != 1]
        if gcd(b[3], r) != gcd(e, r):
            fails.append(4)
        if not fails:
            perm = p
            break
        if bad_i is None:
            bad_i = fails[0]
    conds["3"] = Condition(perm is not None, {"permutation": list(perm)} if perm else {"i": bad_i})

    # (4)
    _check_four(ws, s, witness, conds, flags, ca=True)

    # (5)
    j = terminal_identity_fails(r, a, e)
    conds["5"] = Condition(j is None, {} if j is None else {"j": j})

    rep = StructureReport("cA", conds, perm or IDENTITY, [], flags)
    _record_exceptions(rep, ws, witness)
    return rep


def _check_four(ws, s, witness, conds, flags, ca: bool):
    r, a, e = ws.r, ws.a, ws.e
    beta, k = witness.beta, witness.k
    if not _beta_in_N0(beta):
        for lab in ("4a", "4b", "4c"):
            conds[lab] = Condition(True, {"vacuous": True})
        return
    k0 = beta.class_index
    exact = k0 != 0 and beta.coords == alpha(ws, k0).coords
    if ca:
        conds["4a"] = Condition(exact, {"k0": k0})
        lhs = _w(beta, X3X4)
        ok_b = lhs == Fraction(k0, r) and _four_b(Fraction(k0, r), k)
        conds["4b"] = Condition(ok_b, {"k0/r": Fraction(k0, r), "beta(x3x4)": lhs})
        ok_c = (
            _w(beta, X1X2) >= 1
            and _frac_sum(r, k0, a[:2]) == k0 * e % r + r
            and _frac_sum(r, k0, a[2:]) == k0
        )
        conds["4c"] = Condition(ok_c, {})
    else:
        conds["4a"] = Condition(k0 != 0, {"k0": k0})
        conds["4b"] = Condition(_four_b(Fraction(k0, r), k), {"k0/r": Fraction(k0, r)})
        if exact:
            ok_c = (
                weight_of_f(beta, s) == 2 * beta.coords[0] >= 1
                and 2 * (k0 * a[0] % r) == k0 * e % r + r
                and _frac_sum(r, k0, a[1:]) == k0 * a[0] % r + k0
            )
            conds["4c"] = Condition(ok_c, {})
        else:
            conds["4c"] = Condition(True, {"vacuous": True})
    q = Fraction(k0, r)
    if SETTING_BOUND < q < STRUCTURE_BOUND:
        flags.append("k0/r lies between 12/13 and 13/14")


def _four_b(q: Fraction, k: int) -> bool:
    top = STRUCTURE_BOUND if k < 2 else min(STRUCTURE_BOUND, Fraction(1, k - 1))
    return Fraction(1, k) < q < top


def _record_exceptions(rep: StructureReport, ws: WeightSystem, witness):
    for lab in rep.failed():
        rep.exceptions.append(
            {
                "condition": lab,
                "r": ws.r,
                "beta": witness.beta,
                "detail": rep.conditions[lab].detail,
            }
        )


# ---------------------------------------------------------------- non-cA


def _nonca_dichotomy(w: Weight, s, ws: WeightSystem) -> Optional[str]:
    wc = complement(w)
    x1, xc1 = w.coords[0], wc.coords[0]
    if not (weight_of_f(w, s) == 2 * x1 <= 1 and weight_of_f(wc, s) == 2 * xc1 - 1 >= 0):
        return "a"
    if not (_w(w, X2X3X4) > 1 + x1 and _w(wc, X2X3X4) < 1 + xc1):
        return "b"
    if (2 * x1 == 1) != (2 * xc1 - 1 == 0):
        return "c"
    if 2 * x1 == 1:
        if ws.r % 2 or wc.class_index != ws.r // 2:
            return "c"
        tail = sorted(w.coords[1:])
        tailc = sorted(wc.coords[1:])
        if tail != [HALF, HALF, ONE] or tailc != [ZERO, HALF, HALF]:
            return "c"
        # the 1 and the 0 sit on the same variable
        if w.coords.index(ONE, 1) != wc.coords.index(ZERO, 1):
            return "c"
    return None


def _gcd_pattern(r, b, e):
    g = [gcd(x, r) for x in b]
    ge = gcd(e, r)
    if g[0] == ge >= 2 and g[1] == g[2] == g[3] == 1:
        return "a"
    if r % 2 and all(x == 1 for x in g) and ge == 1:
        return "b"
    if g[3] == ge == 2 and g[0] == g[1] == g[2] == 1:
        return "c"
    return None


def check_nonCA_structure(ws: WeightSystem, s: SeriesSupport, witness) -> StructureReport:
    r, a, e = ws.r, ws.a, ws.e
    beta, k = witness.beta, witness.k
    psi = psi_sets(ws, beta, k)
    conds, flags = {}, []

    bad = None
    for al in enumerate_N0(ws):
        if psi.contains(al):
            continue
        why = _nonca_dichotomy(al, s, ws)
        if why is None or _nonca_dichotomy(complement(al), s, ws) is None:
            continue
        bad = {"weight": al, "bullet": why}
        break
    conds["1"] = Condition(bad is None, {"counterexample": bad} if bad else {})

    bullets, bad = {}, None
    for j in range(1, r):
        if psi.contains(alpha(ws, j)):
            continue
        f1 = j * a[0] % r
        rest = _frac_sum(r, j, a[1:])
        je = j * e % r
        if 2 * f1 == je and rest == f1 + j + r:
            bullets[j] = 1
        elif 2 * f1 == je + r and rest == f1 + j:
            bullets[j] = 2
        elif bad is None:
            bad = j
    conds["2"] = Condition(bad is None, {"bullets": bullets} if bad is None else {"j": bad})

    perm, pattern = None, None
    for p in CDE_PERMS:
        pat = _gcd_pattern(r, [a[i] for i in p], e)
        if pat:
            perm, pattern = p, pat
            break
    g1, ge = gcd(a[0], r), gcd(e, r)
    claim = g1 < 2 or g1 == ge
    detail = {"claim_gcd_a1_equals_gcd_e": claim}
    if perm:
        detail.update({"pattern": pattern, "permutation": list(perm)})
    conds["3"] = Condition(perm is not None and claim, detail)

    _check_four(ws, s, witness, conds, flags, ca=False)

    j = terminal_identity_fails(r, a, e)
    conds["5"] = Condition(j is None, {} if j is None else {"j": j})

    ok6 = not (g1 == ge >= 2) or g1 == r
    conds["6"] = Condition(ok6, {} if ok6 else {"gcd": g1})

    rep = StructureReport("nonCA", conds, perm or IDENTITY, [], flags)
    _record_exceptions(rep, ws, witness)
    return rep


def check_structure(ws, s, witness) -> StructureReport:
    if s.ftype == CA:
        return check_cA_structure(ws, s, witness)
    return check_nonCA_structure(ws, s, witness)


# ---------------------------------------------------------------- normal forms


@dataclass(frozen=True)
class NormalForm:
    family: str
    a: Optional[int]
    permutation: tuple


def allowed_permutations(ftype: str) -> tuple:
    return CDE_PERMS if normalize_ftype(ftype) == CDE else CA_PERMS


def match_normal_form(ws: WeightSystem, ftype: str) -> list:
    """Every (family, a, permutation) whose tuple equals the permuted residues mod r."""
    ftype = normalize_ftype(ftype)
    r = ws.r
    out = []
    for p in allowed_permutations(ftype):
        target = tuple(ws.a[i] for i in p) + (ws.e,)
        for tag, form in FAMILIES.items():
            if form.ftype != ftype:
                continue
            params = range(1, r) if form.uses_param else [0]
            for t in params:
                if form.constraint(r, t):
                    continue
                if tuple(x % r for x in form.tuple_of(r, t)) == target:
                    if form.ftype == CA and moreover_excluded(r, target[:4], target[4]) is not None:
                        continue
                    out.append(NormalForm(tag, t if form.uses_param else None, p))
    return out
