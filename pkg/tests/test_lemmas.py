import itertools
from fractions import Fraction as F
from math import ceil, gcd
from types import SimpleNamespace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from enc_cdv.lemmas import (
    TerminalCounterexample,
    bound_oracle,
    bound_streak,
    g_weight_lemma_check,
    g_weight_lemma_failures,
    nc_chain_sums,
    nc_gamma0_scan,
    nc_hypothesis,
    terminal_bruteforce,
    terminal_conclusion,
    terminal_hypothesis,
    terminal_identity_fails,
    terminal_scan,
    worker_count,
)
from enc_cdv.series import CDE, make_support
from enc_cdv.weights import DomainError, WeightSystem


def frac_identity(r, a, e, j):
    """Independent Fraction evaluation of the terminal identity at one j."""
    lhs = sum(F(j * x, r) - (j * x) // r for x in a)
    rhs = F(j * e, r) - (j * e) // r + F(j, r) + 1
    return lhs == rhs


# ---------------------------------------------------------------- terminal lemma


@pytest.mark.parametrize(
    "r,a,e,expected",
    [((5, (3, 1, 2, 4), 4, True)), ((4, (1, 1, 3, 2), 2, True)), ((5, (1, 1, 2, 4), 3, False))],
)
def test_terminal_hypothesis_examples(r, a, e, expected):
    assert terminal_hypothesis(r, a, e) == expected
    assert expected == all(frac_identity(r, a, e, j) for j in range(1, r))


def test_terminal_hypothesis_first_failure():
    assert terminal_identity_fails(5, (1, 1, 2, 4), 3) == 1
    assert terminal_hypothesis(WeightSystem(5, (3, 1, 2, 4), 4))


def test_terminal_conclusion_examples():
    c1 = terminal_conclusion(4, (1, 1, 3, 2), 2)
    assert c1.case == 1 and c1.pairing == (1, 2, 3)
    c2 = terminal_conclusion(5, (3, 1, 2, 4), 4)
    assert c2.case == 2 and c2.values == (3, 1, 2, 4, 1, 4)
    assert c2.pairing == ((1, 3), (2, 4), (5, 6))
    c3 = terminal_conclusion(2, (1, 1, 1, 1), 1)
    assert c3.case == 2 and c3.pairing == ((1, 2), (3, 4), (5, 6))


def test_terminal_conclusion_all_pairings():
    c = terminal_conclusion(2, (1, 1, 1, 1), 1, all_pairings=True)
    assert len(c.alternatives) == 14  # all 15 perfect matchings of six odd residues
    for m in (c.pairing,) + c.alternatives:
        assert all((c.values[i - 1] + c.values[j - 1]) % 2 == 0 for i, j in m)


def test_terminal_conclusion_preconditions():
    with pytest.raises(DomainError):
        terminal_conclusion(5, (1, 1, 2, 4), 3)
    with pytest.raises(DomainError):
        terminal_conclusion(4, (2, 1, 1, 1), 1)


@pytest.mark.parametrize("r", range(2, 10))
def test_terminal_scan_matches_bruteforce(r):
    scan = terminal_scan(r)
    brute = terminal_bruteforce(r)
    assert scan.per_r[r] == len(brute)
    assert scan.counterexamples == []
    for t in brute:
        terminal_conclusion(r, t[:4], t[4])


def test_terminal_scan_totals_frozen():
    # counts of tuples meeting the preconditions and the identity, cross-checked by brute force above
    scan = terminal_scan(12)
    assert scan.total == sum(len(terminal_bruteforce(r)) for r in range(2, 13))


def test_terminal_scan_worker_independent():
    assert terminal_scan(14, workers=1) == terminal_scan(14, workers=2)


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("ENC_CDV_WORKERS", "3")
    assert worker_count() == 3 and worker_count(2) == 2
    monkeypatch.delenv("ENC_CDV_WORKERS")
    assert worker_count() == 1


# ---------------------------------------------------------------- non-canonical lemma


def test_nc_hypothesis_examples():
    assert nc_hypothesis(4, 1, (1, 1, 1, 1), 3, F(1, 2))
    assert not nc_hypothesis(4, 2, (1, 1, 1, 1), 3, F(1, 2))
    assert not nc_hypothesis(2, 1, (1, 1, 1, 1), 1, F(1))


def test_nc_hypothesis_domain():
    with pytest.raises(DomainError):
        nc_hypothesis(4, 0, (1, 1, 1, 1), 3, F(1, 2))
    with pytest.raises(DomainError):
        nc_hypothesis(4, 1, (1, 1, 1, 1), 3, F(0))


def test_nc_scan_examples():
    assert 4 in nc_gamma0_scan(F(1, 2), 4).values
    assert set(nc_gamma0_scan(F(1, 2), 2).values) <= {1, 2}
    assert nc_gamma0_scan(F(2), 3).counts == nc_gamma0_scan(F(2), 3, workers=2).counts


@pytest.mark.parametrize("delta", [F(1, 2), F(1, 14), F(1), F(2)])
def test_nc_scan_matches_direct_enumeration(delta):
    expected = {}
    for r in range(2, 7):
        for a in itertools.combinations_with_replacement(range(r), 4):
            for e in range(r):
                for k0 in range(1, r):
                    if nc_hypothesis(r, k0, a, e, delta):
                        v = r // gcd(r, k0)
                        expected[v] = expected.get(v, 0) + 1
    assert nc_gamma0_scan(delta, 6).counts == dict(sorted(expected.items()))


def test_nc_chain_implied_by_hypothesis():
    delta = F(1, 2)
    for r in range(2, 9):
        for a in itertools.combinations_with_replacement(range(r), 4):
            for e in range(r):
                for k0 in range(1, r):
                    if nc_hypothesis(r, k0, a, e, delta):
                        assert all(s >= delta for _, s in nc_chain_sums(r, k0, a, e))


def test_nc_witnesses_replay():
    scan = nc_gamma0_scan(F(1, 2), 8)
    for val, (r, k0, a, e) in scan.witnesses.items():
        assert nc_hypothesis(r, k0, a, e, F(1, 2)) and r // gcd(r, k0) == val


# ---------------------------------------------------------------- bound oracle


def test_bound_oracle_examples():
    rep = bound_oracle(1, F(1, 2), 2, r_max=50)
    assert rep.max_r == 2 and rep.attained_by == (F(1, 2),)
    assert (F(0),) in rep.degenerate
    assert bound_streak((F(0),), F(1), 40) == 40
    assert bound_streak((F(1), F(1)), F(2), 40) == 1
    assert bound_oracle(2, F(2), 2, r_max=20).max_r == 1


def test_bound_streak_direct_values():
    v = (F(1, 2),)
    assert 1 + 1 * v[0] - ceil(2 * v[0]) == F(1, 2)
    assert 1 + 2 * v[0] - ceil(3 * v[0]) == 0
    assert bound_streak(v, F(1, 2), 10) == 2


@settings(max_examples=200)
@given(
    st.lists(st.fractions(0, 1, max_denominator=7), min_size=1, max_size=3),
    st.fractions(F(1, 20), 2, max_denominator=20),
    st.fractions(F(1, 20), 2, max_denominator=20),
)
def test_bound_streak_monotone_in_epsilon(v, e1, e2):
    lo, hi = sorted((e1, e2))
    assert bound_streak(tuple(v), hi, 60) <= bound_streak(tuple(v), lo, 60)


# ---------------------------------------------------------------- g-weight lemma


def test_g_weight_lemma_holds_on_valid_family_records():
    from enc_cdv.families import scan_family
    from enc_cdv.pipeline import classify, record_objects

    valid = 0
    for rec in scan_family("cDE-a", 9, k_max=3, d_max=6, s_max=2, with_structure=False):
        if rec["verdict"]["status"] != "Valid":
            continue
        ws, s = record_objects(rec)
        wit = classify(ws, s, k_max=3, with_structure=False).witness
        assert g_weight_lemma_check(ws, s, wit)
        assert g_weight_lemma_failures(ws, s, wit) == []
        valid += 1
    assert valid > 0


def test_g_weight_lemma_negative_control():
    ws = WeightSystem(5, (0, 2, 3, 1), 0)
    s = make_support(CDE, [(0, 5, 0, 0)])  # alpha_1(g) = 2 and nothing of weight 1
    wit = SimpleNamespace(k=1, beta=None)
    assert not g_weight_lemma_check(ws, s, wit)
    assert (1, F(2)) in g_weight_lemma_failures(ws, s, wit)


def test_g_weight_lemma_trivial_r1():
    ws = WeightSystem(1, (0, 0, 0, 0), 0)
    s = make_support(CDE, [(0, 3, 0, 0)])
    assert g_weight_lemma_check(ws, s, SimpleNamespace(k=1, beta=None))


def test_g_weight_lemma_domain():
    with pytest.raises(DomainError):
        g_weight_lemma_check(WeightSystem(5, (3, 1, 2, 4), 4), make_support(CDE, [(0, 3, 0, 0)]), SimpleNamespace(k=1))
