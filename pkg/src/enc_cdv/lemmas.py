"""Fractional-part lemmas: the terminal lemma, the non-canonical lemma, the
index-bound oracle and the g-weight lemma for the ``(0, a, -a, 1; 0)`` family.

All identities are checked on integers: ``r * {j x / r} = j x mod r``.
"""
from __future__ import annotations

import itertools
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, gcd
from typing import Optional, Sequence

import numpy as np

from .series import SeriesSupport
from .weights import DomainError, WeightSystem, alpha

WORKERS_ENV = "ENC_CDV_WORKERS"


def worker_count(requested: Optional[int] = None) -> int:
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return 1


def _unpack(ws_or_r, a=None, e=None):
    if isinstance(ws_or_r, WeightSystem):
        return ws_or_r.r, ws_or_r.a, ws_or_r.e
    if a is None:
        r, a, e = ws_or_r
        return int(r), tuple(int(x) % int(r) for x in a), int(e) % int(r)
    r = int(ws_or_r)
    return r, tuple(int(x) % r for x in a), int(e) % r


# ---------------------------------------------------------------- terminal lemma


def terminal_identity_fails(r: int, a: Sequence[int], e: int) -> Optional[int]:
    """First ``j`` where ``sum {j a_i/r} = {j e/r} + j/r + 1`` fails, or None."""
    for j in range(1, r):
        if sum(j * x % r for x in a) != j * e % r + j + r:
            return j
    return None


def terminal_hypothesis(ws_or_r, a=None, e=None) -> bool:
    r, a, e = _unpack(ws_or_r, a, e)
    return terminal_identity_fails(r, a, e) is None


def terminal_preconditions(r: int, a: Sequence[int], e: int) -> bool:
    """``gcd(a_i, r) = 1`` for i <= 3 and ``gcd(a4, r) = gcd(e, r)``."""
    return all(gcd(x, r) == 1 for x in a[:3]) and gcd(a[3], r) == gcd(e, r)


class TerminalCounterexample(Exception):
    pass


@dataclass(frozen=True)
class TerminalConclusion:
    case: int
    pairing: tuple  # case 1: (i1, i2, i3); case 2: three index pairs over 1..6
    values: tuple  # the residues a1..a4 (case 1) or a1..a6 (case 2)
    alternatives: tuple = ()


def _matchings(items):
    if not items:
        yield ()
        return
    first, rest = items[0], items[1:]
    for k, other in enumerate(rest):
        for tail in _matchings(rest[:k] + rest[k + 1:]):
            yield ((first, other),) + tail


def terminal_conclusion(ws_or_r, a=None, e=None, all_pairings: bool = False) -> TerminalConclusion:
    r, a, e = _unpack(ws_or_r, a, e)
    if not terminal_preconditions(r, a, e):
        raise DomainError("gcd preconditions of the terminal lemma fail")
    if not terminal_hypothesis(r, a, e):
        raise DomainError("fractional-part hypothesis fails")
    found = []
    if gcd(e, r) > 1:
        if (a[3] - e) % r == 0:
            for i1 in range(3):
                i2, i3 = [i for i in range(3) if i != i1]
                if (a[i1] - 1) % r == 0 and (a[i2] + a[i3]) % r == 0:
                    found.append((i1 + 1, i2 + 1, i3 + 1))
        case, values = 1, tuple(a)
    else:
        values = tuple(a) + ((-e) % r, (-1) % r)
        for m in _matchings(list(range(1, 7))):
            if all((values[i - 1] + values[j - 1]) % r == 0 for i, j in m):
                found.append(m)
        case = 2
    if not found:
        raise TerminalCounterexample(f"no pairing for r={r}, a={a}, e={e}")
    return TerminalConclusion(case, found[0], values, tuple(found[1:]) if all_pairings else ())


def _terminal_shard(r: int):
    """Tuples for one ``r`` meeting the preconditions and the identity, with any counterexamples."""
    units = [x for x in range(r) if gcd(x, r) == 1]
    if r == 1:
        units = [0]
    u = np.array(units, dtype=np.int64)
    rng = np.arange(r, dtype=np.int64)
    a1, a2, a4, e = (x.ravel() for x in np.meshgrid(u, u, rng, rng, indexing="ij"))
    keep = np.gcd(a4, r) == np.gcd(e, r)
    # the j = 1 identity determines a3 exactly
    a3 = e + 1 + r - a1 - a2 - a4
    keep &= (a3 >= 0) & (a3 < r)
    a1, a2, a3, a4, e = (x[keep] for x in (a1, a2, a3, a4, e))
    keep = np.gcd(a3, r) == 1 if r > 1 else np.ones(len(a3), bool)
    a1, a2, a3, a4, e = (x[keep] for x in (a1, a2, a3, a4, e))
    for j in range(2, r):
        lhs = (j * a1) % r + (j * a2) % r + (j * a3) % r + (j * a4) % r
        keep = lhs == (j * e) % r + j + r
        a1, a2, a3, a4, e = (x[keep] for x in (a1, a2, a3, a4, e))
    tuples = sorted(zip(a1.tolist(), a2.tolist(), a3.tolist(), a4.tolist(), e.tolist()))
    bad = []
    for t in tuples:
        try:
            terminal_conclusion(r, t[:4], t[4])
        except TerminalCounterexample:
            bad.append(t)
    return r, len(tuples), bad


@dataclass
class TerminalScan:
    r_max: int
    per_r: dict = field(default_factory=dict)  # r -> number of tuples satisfying the hypothesis
    counterexamples: list = field(default_factory=list)  # (r, a1, a2, a3, a4, e)

    @property
    def total(self) -> int:
        return sum(self.per_r.values())


def terminal_scan(r_max: int, workers: Optional[int] = None) -> TerminalScan:
    """Every tuple with ``r <= r_max`` meeting the preconditions and the identity, checked."""
    if r_max < 1:
        raise DomainError("r_max must be positive")
    rs = list(range(2, r_max + 1))
    n = worker_count(workers)
    if n > 1:
        with ProcessPoolExecutor(max_workers=n) as pool:
            results = list(pool.map(_terminal_shard, rs))
    else:
        results = [_terminal_shard(r) for r in rs]
    out = TerminalScan(r_max)
    for r, count, bad in sorted(results):
        out.per_r[r] = count
        out.counterexamples.extend((r,) + t for t in bad)
    return out


def terminal_bruteforce(r: int) -> list:
    """Direct enumeration of all tuples (no reduction by the j = 1 identity)."""
    out = []
    for a in itertools.product(range(r), repeat=4):
        for e in range(r):
            if terminal_preconditions(r, a, e) and terminal_identity_fails(r, a, e) is None:
                out.append(a + (e,))
    return out


# ---------------------------------------------------------------- non-canonical lemma


def _as_fraction(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def nc_hypothesis(r: int, k0: int, a: Sequence[int], e: int, delta) -> bool:
    """Equality at ``k0`` and slack ``delta`` at every other ``k`` in ``[1, r-1]``."""
    delta = _as_fraction(delta)
    if not 1 <= k0 <= r - 1:
        raise DomainError("k0 must lie in [1, r-1]")
    if delta <= 0:
        raise DomainError("delta must be positive")

    def s(k):
        return sum(x * k % r for x in a) - e * k % r

    if s(k0) != k0:
        return False
    bound = k0 + delta * r
    return all(s(k) >= bound for k in range(1, r) if k != k0)


def nc_chain_sums(r: int, k0: int, a: Sequence[int], e: int) -> list:
    """``sum_i (1 + (m-1) v_i - ceil(m v_i))`` for ``2 <= m <= r/gcd(r,k0) - 1``.

    ``v_i = {k0 a_i / r}`` for the four weights and ``v_5 = {(r - e) k0 / r}``.
    """
    v = [Fraction(k0 * x % r, r) for x in a] + [Fraction((r - e) * k0 % r, r)]
    top = r // gcd(r, k0) - 1
    return [(m, sum(1 + (m - 1) * x - ceil(m * x) for x in v)) for m in range(2, top + 1)]


def _nc_shard(args):
    r, p, q, skip_degenerate = args
    ks = np.arange(1, r, dtype=np.int64)
    combos = np.array(list(itertools.combinations_with_replacement(range(r), 4)), dtype=np.int64)
    asum = np.zeros((len(combos), r - 1), dtype=np.int64)
    for i in range(4):
        asum += np.outer(combos[:, i], ks) % r
    counts, witness = {}, {}
    for e in range(r):
        s = asum - (e * ks) % r
        hit = s == ks[None, :]
        cand = np.nonzero(hit.any(axis=1))[0]
        if not len(cand):
            continue
        s, hit = s[cand], hit[cand]
        # min over k != k0 is the minimum, or the runner-up when k0 is the argmin
        first = s.argmin(axis=1)
        m1 = s[np.arange(len(s)), first]
        masked = s.copy()
        # sentinel large enough to pass the slack test, so r = 2 is vacuous
        masked[np.arange(len(s)), first] = 2 * r + -(-p * r // q)
        m2 = masked.min(axis=1)
        other = np.where(np.arange(r - 1)[None, :] == first[:, None], m2[:, None], m1[:, None])
        ok = hit & (q * other >= q * ks[None, :] + p * r)
        if skip_degenerate:
            # some v_i = {k0 a_i / r} or v_5 = {-e k0 / r} vanishes
            zero = ((combos[cand][:, :, None] * ks[None, None, :]) % r == 0).any(axis=1)
            zero |= ((e * ks) % r == 0)[None, :]
            ok &= ~zero
        for row, col in zip(*(x.tolist() for x in np.nonzero(ok))):
            k0 = col + 1
            val = r // gcd(r, k0)
            counts[val] = counts.get(val, 0) + 1
            wit = (r, k0, tuple(combos[cand[row]].tolist()), e)
            if val not in witness or wit < witness[val]:
                witness[val] = wit
    return r, counts, witness


@dataclass
class NcScan:
    delta: Fraction
    r_max: int
    counts: dict = field(default_factory=dict)  # r/gcd(r,k0) -> number of (r, k0, multiset a, e)
    witnesses: dict = field(default_factory=dict)  # value -> smallest (r, k0, a, e)
    skip_degenerate: bool = False

    @property
    def values(self) -> list:
        return sorted(self.counts)


def nc_gamma0_scan(
    delta, r_max: int, workers: Optional[int] = None, skip_degenerate: bool = False
) -> NcScan:
    """All ``r/gcd(r, k0)`` realised by data passing the non-canonical hypothesis.

    The hypothesis is symmetric in ``a1..a4`` so each multiset of residues is
    visited once; counts refer to multisets.  ``skip_degenerate`` drops data
    where one of the five chain values ``v_i`` vanishes (the all-zero
    coordinate case in which the index-bound oracle gives no bound).
    """
    delta = _as_fraction(delta)
    if r_max < 2:
        raise DomainError("r_max must be at least 2")
    if delta <= 0:
        raise DomainError("delta must be positive")
    jobs = [(r, delta.numerator, delta.denominator, skip_degenerate) for r in range(2, r_max + 1)]
    n = worker_count(workers)
    if n > 1:
        with ProcessPoolExecutor(max_workers=n) as pool:
            results = list(pool.map(_nc_shard, jobs))
    else:
        results = [_nc_shard(j) for j in jobs]
    out = NcScan(delta, r_max, skip_degenerate=skip_degenerate)
    for _, counts, wit in sorted(results, key=lambda t: t[0]):
        for val, c in counts.items():
            out.counts[val] = out.counts.get(val, 0) + c
            if val not in out.witnesses or wit[val] < out.witnesses[val]:
                out.witnesses[val] = wit[val]
    out.counts = dict(sorted(out.counts.items()))
    out.witnesses = dict(sorted(out.witnesses.items()))
    return out


# ---------------------------------------------------------------- index-bound oracle


def farey(q_max: int) -> list:
    return sorted({Fraction(p, q) for q in range(1, q_max + 1) for p in range(q + 1)})


def bound_streak(v: Sequence[Fraction], epsilon, r_max: int) -> int:
    """Largest ``r <= r_max`` with the sum at least epsilon for every ``m`` in ``[2, r]``."""
    epsilon = _as_fraction(epsilon)
    r = 1
    for m in range(2, r_max + 1):
        if sum(1 + (m - 1) * x - ceil(m * x) for x in v) < epsilon:
            break
        r = m
    return r


@dataclass
class BoundReport:
    d: int
    epsilon: Fraction
    q_max: int
    r_max: int
    max_r: int  # over vectors whose streak stays below r_max
    attained_by: tuple
    degenerate: list  # vectors whose streak reaches r_max
    checked: int


def bound_oracle(d: int, epsilon, q_max: int, r_max: int = 200) -> BoundReport:
    """Scan ``[0,1]^d`` over fractions with denominator at most ``q_max``.

    Vectors are visited up to reordering since the sum is symmetric.
    """
    epsilon = _as_fraction(epsilon)
    if d < 1 or epsilon <= 0 or q_max < 1 or r_max < 2:
        raise DomainError("need d >= 1, epsilon > 0, q_max >= 1, r_max >= 2")
    best, arg, degenerate, checked = 1, None, [], 0
    for v in itertools.combinations_with_replacement(farey(q_max), d):
        checked += 1
        s = bound_streak(v, epsilon, r_max)
        if s >= r_max:
            degenerate.append(v)
        elif arg is None or s > best:
            best, arg = s, v
    return BoundReport(d, epsilon, q_max, r_max, best, arg or (), degenerate, checked)


# ---------------------------------------------------------------- g-weight lemma


def is_zero_family(ws: WeightSystem) -> bool:
    """Residues of the shape ``(0, a, -a, 1; 0)`` with ``gcd(a, r) = 1``."""
    r, a, e = ws.r, ws.a, ws.e
    return a[0] == 0 and e == 0 and a[3] == 1 % r and (a[1] + a[2]) % r == 0 and gcd(a[1], r) == 1


def g_weight_lemma_check(ws: WeightSystem, s: SeriesSupport, witness) -> bool:
    """Every class not congruent to a multiple of beta has g-weight exactly 1."""
    if not is_zero_family(ws):
        raise DomainError("weight system is not of the form (0, a, -a, 1; 0)")
    if s.ftype != "cDE":
        raise DomainError("the g-weight lemma concerns cD-E type series")
    r = ws.r
    if witness.k > 1:
        bj = witness.beta.class_index
        skip = {t * bj % r for t in range(1, witness.k)}
    else:
        skip = set()
    g = s.g_monomials
    for j in range(1, r):
        if j in skip:
            continue
        n = ws.residues(j)
        if min(sum(x * y for x, y in zip(m, n)) for m in g) != r:
            return False
    return True


def g_weight_lemma_failures(ws: WeightSystem, s: SeriesSupport, witness) -> list:
    """Classes where the g-weight differs from 1, with that weight."""
    r = ws.r
    skip = set()
    if witness.k > 1:
        skip = {t * witness.beta.class_index % r for t in range(1, witness.k)}
    out = []
    for j in range(1, r):
        if j not in skip:
            w = alpha(ws, j)
            val = min(sum(Fraction(x) * c for x, c in zip(m, w.coords)) for m in s.g_monomials)
            if val != 1:
                out.append((j, val))
    return out
