"""Weighted discrepancy of monomial valuations and its sublevel set over N.

For a weight ``w`` and a support ``S`` put

    diff(w) = w1 + w2 + w3 + w4 - min_{m in S} <m, w>.

It is convex, piecewise linear and positively homogeneous.  The set
``P = {w >= 0 : diff(w) <= 1}`` is a polyhedron cut out by ``w_i >= 0`` and
``sum_i (1 - m_i) w_i <= 1`` for each monomial.  All lattice questions are
answered by searching a box read off from the vertices and extreme rays of
``P``:

* if ``P`` is bounded, every point lies below the coordinate-wise maximum of
  the vertices;
* otherwise any lattice point ``v + sum t_g g`` of ``P`` can be pushed back
  along the integral rays ``g`` to a point of the same class with
  coordinates below ``max vertex + sum g``, so emptiness is decidable, and a
  single point forces infinitely many (adding rays never increases diff).

Inside the box, coordinates along which every monomial has exponent at most
one are "monotone": diff never decreases along them, so those loops stop at
the first value above the threshold.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import floor
from typing import Optional, Sequence, Union

import numpy as np

from .exact import cramer_batch, kernel_batch, kernel_vector, solve
from .series import SeriesSupport
from .weights import ONE, ZERO, DomainError, Weight, WeightSystem, is_primitive

SETTING_BOUND = Fraction(12, 13)
DEFAULT_KMAX = 13


def _monos(s) -> tuple:
    return s.monomials if isinstance(s, SeriesSupport) else tuple(tuple(m) for m in s)


def diff(w, s) -> Fraction:
    coords = w.coords if isinstance(w, Weight) else tuple(Fraction(c) for c in w)
    if any(c < 0 for c in coords):
        raise DomainError("diff needs a nonnegative weight")
    monos = _monos(s)
    if not monos:
        raise DomainError("empty support")
    low = min(sum((c * x for c, x in zip(coords, m)), ZERO) for m in monos)
    return sum(coords, ZERO) - low


def diff_scaled(n: Sequence[int], monos) -> int:
    """``r * diff`` for a weight given by its numerators ``n`` over ``r``."""
    return sum(n) - min(m[0] * n[0] + m[1] * n[1] + m[2] * n[2] + m[3] * n[3] for m in monos)


# ---------------------------------------------------------------- certificate


@dataclass(frozen=True)
class Certificate:
    """``value`` = max over the simplex of min_m <m, d>, attained at ``direction``."""

    value: Fraction
    direction: tuple

    @property
    def bounded(self) -> bool:
        return self.value < 1


def _certificate_reference(monos: tuple) -> Certificate:
    """Same LP as :func:`_certificate`, by Fraction elimination (slow cross-check)."""
    # LP in (d1..d4, t): max t, sum d = 1, d >= 0, t - <m,d> <= 0.
    # The optimum sits at a vertex: the equality plus four tight inequalities.
    rows = [tuple(-1 if c == i else 0 for c in range(4)) + (0,) for i in range(4)]
    rhs = [0] * 4
    for m in monos:
        rows.append(tuple(-x for x in m) + (1,))
        rhs.append(0)
    eq = (1, 1, 1, 1, 0)
    best = None
    for idx in itertools.combinations(range(len(rows)), 4):
        sol = solve([eq] + [rows[i] for i in idx], [1] + [rhs[i] for i in idx])
        if sol is None:
            continue
        if any(sum(c * x for c, x in zip(row, sol)) > b for row, b in zip(rows, rhs)):
            continue
        key = (-sol[4], tuple(sol[:4]))
        if best is None or key < best:
            best = key
    return Certificate(-best[0], best[1])


@lru_cache(maxsize=65536)
def _certificate(monos: tuple) -> Certificate:
    # Same vertex enumeration, batched with exact integer Cramer's rule.
    rows = np.array(
        [[-1 if c == i else 0 for c in range(4)] + [0] for i in range(4)]
        + [[-x for x in m] + [1] for m in monos],
        dtype=np.int64,
    )
    idx = np.array(list(itertools.combinations(range(len(rows)), 4)), dtype=np.int64)
    eq = np.broadcast_to(np.array([1, 1, 1, 1, 0], dtype=np.int64), (len(idx), 1, 5))
    a = np.concatenate([eq, rows[idx]], axis=1)
    b = np.zeros((len(idx), 5), dtype=np.int64)
    b[:, 0] = 1
    det, num, ok = cramer_batch(a, b)
    feasible = ok & (num @ rows.T <= 0).all(axis=1)
    best = None
    for dv, nv in {(int(d), tuple(int(x) for x in n)) for d, n in zip(det[feasible], num[feasible])}:
        sol = [Fraction(x, dv) for x in nv]
        key = (-sol[4], tuple(sol[:4]))
        if best is None or key < best:
            best = key
    return Certificate(-best[0], best[1])


def boundedness_certificate(s) -> Certificate:
    monos = _monos(s)
    if not monos:
        raise DomainError("empty support")
    return _certificate(tuple(sorted(monos)))


# ---------------------------------------------------------------- region


@dataclass(frozen=True)
class Region:
    """Vertices and primitive integral extreme rays of ``{w >= 0 : diff(w) <= 1}``."""

    vertices: tuple
    rays: tuple

    @property
    def bounded(self) -> bool:
        return not self.rays

    def box(self, scale: Fraction = ONE) -> tuple:
        """Coordinate bounds containing every lattice point that matters at level ``scale``."""
        top = [max(v[i] for v in self.vertices) * scale for i in range(4)]
        for g in self.rays:
            top = [t + x for t, x in zip(top, g)]
        return tuple(top)


def _region_reference(monos: tuple) -> Region:
    """Fraction-elimination version of :func:`_region` (slow cross-check)."""
    rows = [tuple(-1 if c == i else 0 for c in range(4)) for i in range(4)]
    rhs = [0] * 4
    for m in monos:
        rows.append(tuple(1 - x for x in m))
        rhs.append(1)

    def feasible(p, homogeneous):
        return all(
            sum(c * x for c, x in zip(row, p)) <= (0 if homogeneous else b)
            for row, b in zip(rows, rhs)
        )

    verts = set()
    for idx in itertools.combinations(range(len(rows)), 4):
        sol = solve([rows[i] for i in idx], [rhs[i] for i in idx])
        if sol is not None and feasible(sol, False):
            verts.add(tuple(sol))
    rays = set()
    for idx in itertools.combinations(range(len(rows)), 3):
        v = kernel_vector([rows[i] for i in idx])
        if v is None:
            continue
        for sign in (1, -1):
            u = tuple(sign * x for x in v)
            if feasible(u, True):
                rays.add(u)
    return Region(tuple(sorted(verts)), tuple(sorted(rays)))


@lru_cache(maxsize=65536)
def _region(monos: tuple) -> Region:
    rows = np.array(
        [[-1 if c == i else 0 for c in range(4)] for i in range(4)] + [[1 - x for x in m] for m in monos],
        dtype=np.int64,
    )
    rhs = np.array([0] * 4 + [1] * len(monos), dtype=np.int64)
    idx = np.array(list(itertools.combinations(range(len(rows)), 4)), dtype=np.int64)
    det, num, ok = cramer_batch(rows[idx], rhs[idx])
    feasible = ok & (num @ rows.T <= det[:, None] * rhs[None, :]).all(axis=1)
    verts = {
        tuple(Fraction(int(x), int(d)) for x in n) for d, n in zip(det[feasible], num[feasible])
    }
    idx = np.array(list(itertools.combinations(range(len(rows)), 3)), dtype=np.int64)
    ker = kernel_batch(rows[idx])
    ker = ker[ker.any(axis=1)]
    ker = ker // np.gcd.reduce(np.abs(ker), axis=1)[:, None]
    ker = np.concatenate([ker, -ker])
    ker = ker[(ker @ rows.T <= 0).all(axis=1)]
    rays = {tuple(int(x) for x in u) for u in ker}
    return Region(tuple(sorted(verts)), tuple(sorted(rays)))


def sublevel_region(s) -> Region:
    return _region(tuple(sorted(_monos(s))))


# ---------------------------------------------------------------- lattice search


def _classes(ws: WeightSystem, exclude_integer_classes: bool):
    return range(1, ws.r) if exclude_integer_classes else range(0, ws.r)


GRID_LIMIT = 5000


def _search(ws, monos, box, threshold, exclude_integer_classes, limit=None):
    """All numerator vectors ``n`` in the domain inside ``box`` with ``diff_scaled <= threshold``.

    Stops once more than ``limit`` points are collected.  Small boxes are
    scanned as one integer array; large ones by the pruned walk.
    """
    res = _search_grid(ws, monos, box, threshold, exclude_integer_classes, limit)
    if res is not None:
        return res
    return _search_eliminate(ws, monos, box, threshold, exclude_integer_classes, limit)


BLOCK_ROWS = 1_000_000


def _search_eliminate(ws, monos, box, threshold, exclude_integer_classes, limit=None):
    """Same contract as :func:`_search`.

    ``diff_scaled(n) <= T`` is the system ``sum_i (1 - m_i) n_i <= T`` over the
    support, so once three coordinates are fixed the fourth ranges over an
    interval.  The three outer coordinates are scanned as integer arrays and
    the interval is solved exactly.
    """
    r = ws.r
    top = [floor(b * r) for b in box]
    if min(top) < 0:
        return [], False
    steps = [t // r + 1 for t in top]
    el = max(range(4), key=lambda i: (steps[i], -i))
    outer = [i for i in range(4) if i != el]
    m = np.array(monos, dtype=np.int64)
    coef = 1 - m[:, el]
    amat = (1 - m[:, outer]).T
    top_o = np.array([top[i] for i in outer], dtype=np.int64)
    found = []

    def blocks(b):
        # chunks of the outer grid along its first axis
        per = steps[outer[1]] * steps[outer[2]]
        size = max(1, BLOCK_ROWS // per)
        for start in range(0, steps[outer[0]], size):
            axes = [np.arange(start, min(start + size, steps[outer[0]]), dtype=np.int64)]
            axes += [np.arange(steps[i], dtype=np.int64) for i in outer[1:]]
            g = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, 3)
            n = np.array([b[i] for i in outer], dtype=np.int64) + r * g
            yield n[(n <= top_o).all(axis=1)]

    for j in _classes(ws, exclude_integer_classes):
        b = ws.residues(j) if j else (0, 0, 0, 0)
        for n in blocks(b):
            rest = threshold - n @ amat
            lo = np.zeros(len(n), dtype=np.int64)
            hi = np.full(len(n), top[el], dtype=np.int64)
            ok = np.ones(len(n), dtype=bool)
            for k, c in enumerate(coef.tolist()):
                if c > 0:
                    hi = np.minimum(hi, rest[:, k] // c)
                elif c < 0:
                    lo = np.maximum(lo, -((-rest[:, k]) // c))  # ceil(rest / c), c < 0
                else:
                    ok &= rest[:, k] >= 0
            t_lo = -((b[el] - lo) // r)
            t_hi = (hi - b[el]) // r
            cnt = np.where(ok, np.maximum(t_hi - t_lo + 1, 0), 0)
            sel = np.nonzero(cnt)[0]
            if not len(sel):
                continue
            reps = cnt[sel]
            rows = np.repeat(sel, reps)
            offs = np.arange(len(rows)) - np.repeat(np.cumsum(reps) - reps, reps)
            full = np.empty((len(rows), 4), dtype=np.int64)
            full[:, outer] = n[rows]
            full[:, el] = b[el] + r * (np.repeat(t_lo[sel], reps) + offs)
            full = full[full.any(axis=1)]
            found.extend(tuple(x) for x in full.tolist())
            if limit is not None and len(found) > limit:
                return found[: limit + 1], True
    return found, False


def _search_grid(ws, monos, box, threshold, exclude_integer_classes, limit=None):
    r = ws.r
    top = [floor(b * r) for b in box]
    if min(top) < 0:
        return [], False
    steps = [t // r + 1 for t in top]
    classes = list(_classes(ws, exclude_integer_classes))
    size = len(classes) * steps[0] * steps[1] * steps[2] * steps[3]
    if size > GRID_LIMIT:
        return None
    if not classes:
        return [], False
    base = np.array([ws.residues(j) if j else (0, 0, 0, 0) for j in classes], dtype=np.int64)
    grid = np.stack(np.meshgrid(*(np.arange(s, dtype=np.int64) for s in steps), indexing="ij"), -1)
    n = (base[:, None, :] + r * grid.reshape(-1, 4)[None, :, :]).reshape(-1, 4)
    n = n[(n <= np.array(top)).all(axis=1) & n.any(axis=1)]
    vals = n.sum(axis=1) - (n @ np.array(monos, dtype=np.int64).T).min(axis=1)
    found = [tuple(v) for v in n[vals <= threshold].tolist()]
    if limit is not None and len(found) > limit:
        return found[: limit + 1], True
    return found, False


def _search_walk(ws, monos, box, threshold, exclude_integer_classes, limit=None):
    r = ws.r
    monotone = [all(m[i] <= 1 for m in monos) for i in range(4)]
    free = [i for i in range(4) if not monotone[i]]
    mono = [i for i in range(4) if monotone[i]]
    found = []

    def walk(n, depth):
        # n has every coordinate from mono[depth:] at its base value
        i = mono[depth]
        base = n[i]
        last = depth == len(mono) - 1
        for c in range(cmax[i] + 1):
            n[i] = base + r * c
            if diff_scaled(n, monos) > threshold:
                break
            if last:
                if any(n):
                    found.append(tuple(n))
                    if limit is not None and len(found) > limit:
                        raise _Enough
            else:
                walk(n, depth + 1)
        n[i] = base

    try:
        for j in _classes(ws, exclude_integer_classes):
            b = ws.residues(j) if j else (0, 0, 0, 0)
            cmax = [floor(box[i] - Fraction(b[i], r)) for i in range(4)]
            if min(cmax) < 0:
                continue
            for shift in itertools.product(*(range(cmax[i] + 1) for i in free)):
                n = list(b)
                for i, c in zip(free, shift):
                    n[i] += r * c
                if mono:
                    walk(n, 0)
                elif any(n) and diff_scaled(n, monos) <= threshold:
                    found.append(tuple(n))
                    if limit is not None and len(found) > limit:
                        raise _Enough
    except _Enough:
        return found, True
    return found, False


class _Enough(Exception):
    pass


def _to_weight(ws: WeightSystem, n) -> Weight:
    j = next(j for j in range(ws.r) if all(j * a % ws.r == x % ws.r for a, x in zip(ws.a, n)))
    return Weight(tuple(Fraction(x, ws.r) for x in n), j, ws.r)


@dataclass(frozen=True)
class SublevelSet:
    """Lattice weights with diff <= 1.

    ``bounded`` is False only when the set is nonempty and infinite; then
    ``points`` holds a witness and ``rays`` the recession directions.
    ``truncated`` marks an early exit after more than the requested number
    of points.  ``min_diff`` is the minimum of diff over the domain when the
    set is empty and the minimum is attained on a bounded search.
    """

    points: tuple
    bounded: bool
    certificate: Certificate
    rays: tuple = ()
    truncated: bool = False
    min_diff: Optional[Fraction] = None
    exclude_integer_classes: bool = True

    @property
    def weights(self) -> tuple:
        return tuple(w for w, _ in self.points)


def minimum_diff(ws: WeightSystem, s, exclude_integer_classes: bool = True) -> Optional[Fraction]:
    """Exact minimum of diff over the domain, or None when the region is unbounded."""
    monos = _monos(s)
    region = sublevel_region(monos)
    if not region.bounded:
        return None
    r = ws.r
    reps = []
    for j in _classes(ws, exclude_integer_classes):
        if j:
            reps.append(ws.residues(j))
        else:
            reps.extend(tuple(r if c == i else 0 for c in range(4)) for i in range(4))
    if not reps:
        return None
    upper = min(diff_scaled(n, monos) for n in reps)
    scale = Fraction(upper, r)
    found, _ = _search(ws, monos, region.box(scale), upper, exclude_integer_classes)
    return Fraction(min(diff_scaled(n, monos) for n in found), r)


def sublevel_enumerate(
    ws: WeightSystem,
    s,
    exclude_integer_classes: bool = True,
    limit: Optional[int] = None,
    with_min: bool = True,
) -> SublevelSet:
    """All weights of the domain with diff <= 1, sorted by (class, coords)."""
    monos = _monos(s)
    cert = boundedness_certificate(monos)
    region = sublevel_region(monos)
    r = ws.r
    if region.bounded:
        found, cut = _search(ws, monos, region.box(), r, exclude_integer_classes, limit)
    else:
        found, cut = _search(ws, monos, region.box(), r, exclude_integer_classes, 0)
    pts = sorted(
        ((_to_weight(ws, n), Fraction(diff_scaled(n, monos), r)) for n in found),
        key=lambda p: p[0].sort_key(),
    )
    bounded = region.bounded or not pts
    low = None
    if not pts and region.bounded and with_min:
        low = minimum_diff(ws, monos, exclude_integer_classes)
    return SublevelSet(
        tuple(pts),
        bounded,
        cert,
        region.rays,
        cut and region.bounded,
        low,
        exclude_integer_classes,
    )


def sublevel_bruteforce(ws: WeightSystem, s, shift_cap: int, exclude_integer_classes: bool = True):
    """Reference enumeration over every shift in ``[0, shift_cap]^4`` (vectorised, exact integers)."""
    monos = np.array(_monos(s), dtype=np.int64)
    r = ws.r
    grid = np.array(list(itertools.product(range(shift_cap + 1), repeat=4)), dtype=np.int64)
    out = []
    for j in _classes(ws, exclude_integer_classes):
        b = np.array(ws.residues(j) if j else (0, 0, 0, 0), dtype=np.int64)
        n = b + r * grid
        vals = n.sum(axis=1) - (n @ monos.T).min(axis=1)
        keep = (vals <= r) & n.any(axis=1)
        for row, v in zip(n[keep].tolist(), vals[keep].tolist()):
            out.append((Weight(tuple(Fraction(x, r) for x in row), j, r), Fraction(v, r)))
    out.sort(key=lambda p: p[0].sort_key())
    return tuple(out)


# ---------------------------------------------------------------- beta


@dataclass(frozen=True)
class BetaWitness:
    """``k`` and ``beta`` (None when k = 1) with the sublevel evidence."""

    k: int
    beta: Optional[Weight]
    beta_diff: Optional[Fraction]
    evidence: SublevelSet
    boundary: bool = False  # diff(beta) == 1/(k-1) exactly


@dataclass(frozen=True)
class BetaFailure:
    reason: str
    offending: tuple
    evidence: SublevelSet
    unbounded: bool = False


def setting_inequality_holds(d: Fraction, k: int) -> bool:
    """Either ``1/k < d <= min(12/13, 1/(k-1))`` or ``d = 1`` with ``k = 2``."""
    if k < 2:
        return False
    if d == 1 and k == 2:
        return True
    return Fraction(1, k) < d <= min(SETTING_BOUND, Fraction(1, k - 1))


def find_beta(
    ws: WeightSystem,
    s,
    k_max: int = DEFAULT_KMAX,
    exclude_integer_classes: bool = True,
) -> Union[BetaWitness, BetaFailure]:
    """Search for ``(k, beta)`` with sublevel set exactly ``{beta, ..., (k-1) beta}``."""
    if k_max < 1:
        raise DomainError("k_max must be positive")
    ev = sublevel_enumerate(ws, s, exclude_integer_classes, limit=k_max - 1)
    pts = ev.points
    if not ev.bounded:
        return BetaFailure(
            "setting unsatisfiable (infinite non-canonical family)", pts, ev, unbounded=True
        )
    if not pts:
        return BetaWitness(1, None, None, ev)
    if ev.truncated:
        return BetaFailure(f"more than {k_max - 1} weights with diff <= 1", pts, ev)
    low = min(d for _, d in pts)
    mins = [p for p in pts if p[1] == low]
    if len(mins) > 1:
        return BetaFailure("several weights attain the minimal diff", tuple(mins), ev)
    beta = mins[0][0]
    k = len(pts) + 1
    expected = {beta.scaled(t).coords for t in range(1, k)}
    if {w.coords for w, _ in pts} != expected:
        extra = tuple(p for p in pts if p[0].coords not in expected)
        return BetaFailure("sublevel set is not the multiples of its minimum", extra, ev)
    if k > k_max:
        return BetaFailure(f"k={k} exceeds k_max={k_max}", pts, ev)
    if not is_primitive(ws, beta):
        return BetaFailure("minimal weight is not primitive", (mins[0],), ev)
    if not setting_inequality_holds(low, k):
        return BetaFailure(f"diff(beta)={low} violates the bound for k={k}", (mins[0],), ev)
    return BetaWitness(k, beta, low, ev, low == Fraction(1, k - 1))
