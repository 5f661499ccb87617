"""End-to-end classification of one instance and the verification suites."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import lemmas
from .families import (
    FAMILIES,
    RECORD_VERSION,
    degree_cap_binding,
    family_members,
    g_templates,
    moreover_excluded,
    scan_family,
)
from .series import CA, SeriesSupport, distinguished, make_support, semiinvariance_violations
from .structure import NormalForm, StructureReport, check_structure, match_normal_form
from .valuation import (
    DEFAULT_KMAX,
    BetaFailure,
    BetaWitness,
    boundedness_certificate,
    find_beta,
    sublevel_bruteforce,
    sublevel_enumerate,
)
from .weights import DomainError, InvalidWeightSystem, WeightSystem, setting_violations

TERMINAL_LIKE = "Terminal-like"
ENC_CANDIDATE = "Enc candidate"
SETTING_VIOLATED = "Setting violated"


class StageError(RuntimeError):
    def __init__(self, stage: str, exc: BaseException):
        super().__init__(f"{stage}: {type(exc).__name__}: {exc}")
        self.stage = stage
        self.original = exc


@dataclass
class Verdict:
    setting_pass: bool
    reasons: list
    weights: Optional[WeightSystem] = None
    support: Optional[SeriesSupport] = None
    witness: Optional[BetaWitness] = None
    failure: Optional[BetaFailure] = None
    normal_forms: list = field(default_factory=list)
    structure: Optional[StructureReport] = None

    @property
    def summary(self) -> str:
        if not self.setting_pass or self.witness is None:
            return SETTING_VIOLATED
        return TERMINAL_LIKE if self.witness.k == 1 else ENC_CANDIDATE

    @property
    def k(self) -> Optional[int]:
        return self.witness.k if self.witness else None

    @property
    def beta(self):
        return self.witness.beta if self.witness else None

    def to_json(self) -> dict:
        from .serialize import to_jsonable

        out = {
            "summary": self.summary,
            "setting": {"pass": self.setting_pass, "reasons": list(self.reasons)},
        }
        if self.weights is not None:
            out["ws"] = {"r": self.weights.r, "a": list(self.weights.a), "e": self.weights.e}
        if self.support is not None:
            out["support"] = support_json(self.support)
        if self.witness is not None:
            out["witness"] = witness_json(self.witness)
        if self.failure is not None:
            out["failure"] = {
                "reason": self.failure.reason,
                "offending": [[to_jsonable(w), to_jsonable(d)] for w, d in self.failure.offending],
                "rays": [list(g) for g in self.failure.evidence.rays],
            }
        out["normalForms"] = [normal_form_json(n) for n in self.normal_forms]
        out["structure"] = structure_json(self.structure) if self.structure else None
        return to_jsonable(out)


def support_json(s: SeriesSupport) -> dict:
    return {"type": s.ftype, "monomials": [list(m) for m in s.monomials]}


def witness_json(w: BetaWitness) -> dict:
    ev = w.evidence
    return {
        "k": w.k,
        "beta": list(w.beta.coords) if w.beta else None,
        "betaClass": w.beta.class_index if w.beta else None,
        "betaDiff": w.beta_diff,
        "boundary": w.boundary,
        "sublevel": [[list(p.coords), d] for p, d in ev.points],
        "certificate": {"value": ev.certificate.value, "direction": list(ev.certificate.direction)},
        "minDiff": ev.min_diff,
    }


def normal_form_json(n: NormalForm) -> dict:
    return {"family": n.family, "a": n.a, "permutation": list(n.permutation)}


def structure_json(rep: StructureReport) -> dict:
    from .serialize import to_jsonable

    return to_jsonable(
        {
            "theorem": rep.theorem,
            "conditions": {k: c.to_json() for k, c in rep.conditions.items()},
            "permutation": list(rep.permutation),
            "exceptions": rep.exceptions,
            "flags": rep.flags,
        }
    )


def _coerce_ws(ws_in):
    if isinstance(ws_in, WeightSystem):
        return ws_in, []
    r, a, e = ws_in
    bad = setting_violations(r, a, e)
    if bad:
        return None, bad
    return WeightSystem(r, tuple(a), e), []


def classify(
    ws_in,
    s_in,
    k_max: int = DEFAULT_KMAX,
    exclude_integer_classes: bool = True,
    with_structure: bool = True,
) -> Verdict:
    """Setting validation, then (k, beta), then structure checks and normal forms.

    ``ws_in`` is a WeightSystem or ``(r, a, e)``; ``s_in`` a SeriesSupport or
    ``(type, monomials)``.

    Equivariant under the allowed coordinate permutations, except that the cA
    exclusion ``(t, -t, 1, 0; 0)`` is matched in the order given, so swapping
    x3 and x4 can move an instance into or out of it.
    """
    stage = "setting"
    try:
        reasons = []
        ws, bad = _coerce_ws(ws_in)
        reasons += bad
        if isinstance(s_in, SeriesSupport):
            ftype, monos = s_in.ftype, s_in.monomials
        else:
            ftype, monos = s_in
        from .series import normalize_ftype

        ftype = normalize_ftype(ftype)
        if ws is not None and ftype == CA:
            t = moreover_excluded(ws.r, ws.a, ws.e)
            if t is not None:
                reasons.append(f"moreover exclusion: residues match (a,-a,1,0;0) with a={t}")
        s = None
        try:
            s = s_in if isinstance(s_in, SeriesSupport) else make_support(ftype, monos)
        except DomainError as exc:
            reasons.append(f"series: {exc}")
        if ws is not None and s is not None:
            reasons += semiinvariance_violations(ws, s)
        if reasons:
            return Verdict(False, reasons, ws, s)

        stage = "beta"
        res = find_beta(ws, s, k_max, exclude_integer_classes)
        if isinstance(res, BetaFailure):
            return Verdict(False, [f"weight condition: {res.reason}"], ws, s, failure=res)

        stage = "normal form"
        forms = match_normal_form(ws, s.ftype)
        rep = None
        if with_structure:
            stage = "structure"
            rep = check_structure(ws, s, res)
        return Verdict(True, [], ws, s, res, None, forms, rep)
    except StageError:
        raise
    except Exception as exc:  # wrap with the stage name
        raise StageError(stage, exc) from exc


def classify_json(data: dict, k_max: int = DEFAULT_KMAX, exclude_integer_classes: bool = True) -> Verdict:
    """Classify the documented input object ``{"r", "a", "e", "f": {"type", "monomials"}}``."""
    try:
        r, a, e = int(data["r"]), [int(x) for x in data["a"]], int(data["e"])
        f = data["f"]
        ftype, monos = f["type"], [tuple(int(x) for x in m) for m in f.get("monomials", [])]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed input: {exc}") from exc
    if len(a) != 4:
        raise ValueError("malformed input: a needs four entries")
    return classify((r, a, e), (ftype, monos), k_max, exclude_integer_classes)


# ---------------------------------------------------------------- scan records


def family_record(family, a_param, ws, s, k_max, d_max, exclude_integer_classes=True, with_structure=True) -> dict:
    from .serialize import to_jsonable

    res = find_beta(ws, s, k_max, exclude_integer_classes)
    rec = {
        "version": RECORD_VERSION,
        "family": family,
        "r": ws.r,
        "a_param": a_param,
        "ws": {"r": ws.r, "a": list(ws.a), "e": ws.e},
        "support": support_json(s),
        "cap_binding": degree_cap_binding(s, d_max),
    }
    if isinstance(res, BetaFailure):
        rec["verdict"] = {"status": "SettingFails", "reason": res.reason}
        rec["structure"] = None
    else:
        rec["verdict"] = {
            "status": "Valid",
            "k": res.k,
            "beta": list(res.beta.coords) if res.beta else None,
            "beta_diff": res.beta_diff,
            "boundary": res.boundary,
        }
        rec["structure"] = structure_json(check_structure(ws, s, res)) if with_structure else None
    return to_jsonable(rec)


def record_objects(rec: dict):
    """Rebuild the weight system and support a record was computed from."""
    ws = WeightSystem(rec["ws"]["r"], tuple(rec["ws"]["a"]), rec["ws"]["e"])
    s = make_support(rec["support"]["type"], rec["support"]["monomials"])
    return ws, s


# ---------------------------------------------------------------- verification suites

SUITES = (
    "terminal",
    "nc",
    "bound-oracle",
    "structure-cA",
    "structure-nonCA",
    "lemma-4.7",
    "sublevel-oracle",
)

CA_FAMILIES = tuple(t for t, f in FAMILIES.items() if f.ftype == CA)
NONCA_FAMILIES = tuple(t for t, f in FAMILIES.items() if f.ftype != CA)


class UnknownSuite(ValueError):
    pass


def _suite_structure(families, r_max, k_max, d_max, s_max, workers=None):
    """Hard assertion: every Valid record satisfies the fractional-part identity."""
    violations, exceptions, valid, total = [], [], 0, 0
    per_family = {}
    for fam in families:
        recs = scan_family_parallel(fam, r_max, k_max, d_max, s_max, workers)
        per_family[fam] = {"records": len(recs), "valid": 0, "exceptions": 0}
        for rec in recs:
            total += 1
            if rec["verdict"]["status"] != "Valid":
                continue
            valid += 1
            per_family[fam]["valid"] += 1
            ws, _ = record_objects(rec)
            if not lemmas.terminal_hypothesis(ws):
                violations.append({"family": fam, "ws": rec["ws"], "support": rec["support"]})
            st = rec["structure"]
            if st and st["exceptions"]:
                per_family[fam]["exceptions"] += 1
                exceptions.append(
                    {"family": fam, "ws": rec["ws"], "support": rec["support"], "failed": [x["condition"] for x in st["exceptions"]]}
                )
    return {
        "records": total,
        "valid": valid,
        "violations": violations,
        "exceptions": exceptions,
        "per_family": per_family,
    }


def _suite_g_weight(r_max, k_max, d_max, s_max, workers=None):
    from .valuation import find_beta as _fb

    recs = scan_family_parallel("cDE-a", r_max, k_max, d_max, s_max, workers, with_structure=False)
    bad, valid = [], 0
    for rec in recs:
        if rec["verdict"]["status"] != "Valid":
            continue
        valid += 1
        ws, s = record_objects(rec)
        wit = _fb(ws, s, k_max)
        if not lemmas.g_weight_lemma_check(ws, s, wit):
            bad.append({"ws": rec["ws"], "support": rec["support"], "classes": lemmas.g_weight_lemma_failures(ws, s, wit)})
    return {"records": len(recs), "valid": valid, "violations": bad}


def sublevel_corpus(r_max: int, count: int, seed: int = 0, d_max: int = 6, s_max: int = 3):
    """Seeded sample of Setting-shaped (ws, support) pairs with bounded certificate.

    Weight systems range over every admissible residue tuple with ``r <= r_max``
    whose distinguished monomials are semi-invariant for the chosen type.
    """
    from .series import FTYPES, semiinvariant_monomials

    rng = random.Random(seed)
    by_type = {t: [] for t in FTYPES}
    for r in range(2, r_max + 1):
        for a in itertools.product(range(r), repeat=4):
            for e in range(r):
                if setting_violations(r, a, e):
                    continue
                for t in FTYPES:
                    if all(sum(x * y for x, y in zip(m, a)) % r == e for m in distinguished(t)):
                        if t == "odd" and a[0] == a[1]:
                            continue
                        if t == CA and moreover_excluded(r, a, e) is not None:
                            continue
                        by_type[t].append((r, a, e))
    out, attempts = [], 0
    while len(out) < count and attempts < 50 * count:
        attempts += 1
        t = rng.choice(FTYPES)
        r, a, e = rng.choice(by_type[t])
        ws = WeightSystem(r, a, e)
        pool = semiinvariant_monomials(ws, t, d_max)
        if not pool:
            continue
        g = rng.sample(pool, min(len(pool), rng.randint(1, s_max)))
        s = make_support(t, g)
        if boundedness_certificate(s).bounded:
            out.append((ws, s))
    return out


def family_corpus(r_max: int, d_max: int = 8, s_max: int = 3):
    """Every family member with ``r <= r_max`` paired with each g-template whose certificate is bounded."""
    out = []
    for fam, form in FAMILIES.items():
        for r in range(2, r_max + 1):
            for _, ws in family_members(fam, r):
                for s in g_templates(ws, form.ftype, d_max, s_max):
                    if boundedness_certificate(s).bounded:
                        out.append((ws, s))
    return out


def _shift_exceeds(coords, cap: int) -> bool:
    return any(c.numerator // c.denominator > cap for c in coords)


def compare_with_box(ws, s):
    """Enumeration versus brute force over shifts in ``[0, maxdeg + 3]^4``.

    Returns None on equality, else the kind of discrepancy: ``missing`` (brute
    force found a point the enumeration lacks), ``extra`` (enumeration has a
    point inside the box the brute force lacks) or ``beyond_box`` (every
    extra point has a shift above the cap, so the box cannot see it).
    """
    fast = sublevel_enumerate(ws, s, with_min=False).points
    cap = s.max_degree() + 3
    slow = sublevel_bruteforce(ws, s, cap)
    if fast == slow:
        return None
    fs, ss = {w.coords for w, _ in fast}, {w.coords for w, _ in slow}
    if ss - fs:
        return "missing"
    if all(_shift_exceeds(c, cap) for c in fs - ss):
        return "beyond_box"
    return "extra"


def _suite_sublevel(r_max, count, seed=0, d_max=8, s_max=3):
    corpora = {"families": family_corpus(r_max, d_max, s_max), "random": sublevel_corpus(r_max, count, seed)}
    rep = {"systems": 0, "missing": [], "extra": [], "beyond_box": [], "per_corpus": {}}
    for name, corpus in corpora.items():
        rep["per_corpus"][name] = len(corpus)
        for ws, s in corpus:
            rep["systems"] += 1
            kind = compare_with_box(ws, s)
            if kind:
                rep[kind].append({"corpus": name, "ws": [ws.r, list(ws.a), ws.e], "support": support_json(s)})
    return rep


def scan_family_parallel(family, r_max, k_max, d_max, s_max, workers=None, with_structure=True, r_min=2,
                         exclude_integer_classes=True):
    """``scan_family`` sharded by r; output order is independent of the worker count."""
    n = lemmas.worker_count(workers)
    rs = list(range(max(2, r_min), r_max + 1))
    if n <= 1 or len(rs) <= 1:
        return scan_family(family, r_max, k_max, d_max, s_max, r_min=r_min,
                           exclude_integer_classes=exclude_integer_classes, with_structure=with_structure)
    from concurrent.futures import ProcessPoolExecutor

    jobs = [(family, r, k_max, d_max, s_max, with_structure, exclude_integer_classes) for r in rs]
    with ProcessPoolExecutor(max_workers=n) as pool:
        parts = list(pool.map(_scan_one_r, jobs))
    return [rec for part in parts for rec in part]


def _scan_one_r(job):
    family, r, k_max, d_max, s_max, with_structure, exclude = job
    return scan_family(family, r, k_max, d_max, s_max, r_min=r, exclude_integer_classes=exclude,
                       with_structure=with_structure)


def verify_all(suite: str, r_max: Optional[int] = None, delta=None, d: int = 2, epsilon=None,
               q_max: int = 6, k_max: int = 3, d_max: int = 8, s_max: int = 3, workers=None,
               count: int = 400, seed: int = 0):
    """Run a named suite; returns ``(status, report)`` with status 0 unless a hard check fails."""
    if suite not in SUITES:
        raise UnknownSuite(f"unknown suite {suite!r}; expected one of {', '.join(SUITES)}")
    if suite == "terminal":
        scan = lemmas.terminal_scan(r_max or 30, workers)
        rep = {"r_max": scan.r_max, "tuples": scan.total, "per_r": scan.per_r,
               "counterexamples": scan.counterexamples}
        return (0 if not scan.counterexamples else 1), rep
    if suite == "nc":
        delta = Fraction(delta) if delta is not None else Fraction(1, 2)
        scan = lemmas.nc_gamma0_scan(delta, r_max or 12, workers)
        chain_bad = []
        for val, (r, k0, a, e) in scan.witnesses.items():
            ok = lemmas.nc_hypothesis(r, k0, a, e, delta) and all(
                x >= delta for _, x in lemmas.nc_chain_sums(r, k0, a, e))
            if not ok:
                chain_bad.append([r, k0, list(a), e])
        rep = {"delta": delta, "r_max": scan.r_max, "values": scan.values, "counts": scan.counts,
               "witnesses": {v: [r, k0, list(a), e] for v, (r, k0, a, e) in scan.witnesses.items()},
               "chain_failures": chain_bad}
        return (0 if not chain_bad else 1), rep
    if suite == "bound-oracle":
        eps = Fraction(epsilon) if epsilon is not None else Fraction(1, 2)
        b = lemmas.bound_oracle(d, eps, q_max, r_max or 60)
        rep = {"d": b.d, "epsilon": b.epsilon, "q_max": b.q_max, "r_max": b.r_max, "max_r": b.max_r,
               "attained_by": list(b.attained_by), "degenerate": [list(v) for v in b.degenerate],
               "checked": b.checked}
        return 0, rep
    if suite == "structure-cA":
        rep = _suite_structure(CA_FAMILIES, r_max or 25, k_max, d_max, s_max, workers)
        return (0 if not rep["violations"] else 1), rep
    if suite == "structure-nonCA":
        rep = _suite_structure(NONCA_FAMILIES, r_max or 25, k_max, d_max, s_max, workers)
        return (0 if not rep["violations"] else 1), rep
    if suite == "lemma-4.7":
        rep = _suite_g_weight(r_max or 25, k_max, d_max, s_max, workers)
        return (0 if not rep["violations"] else 1), rep
    rep = _suite_sublevel(r_max or 12, count, seed, d_max, s_max)
    return (0 if not (rep["missing"] or rep["extra"] or rep["beyond_box"]) else 1), rep
