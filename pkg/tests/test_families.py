import json
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from enc_cdv.families import (
    FAMILIES,
    FAMILY_TAGS,
    RECORD_VERSION,
    Rejection,
    VersionMismatch,
    atlas_merge,
    beta_growth,
    degree_cap_binding,
    family_members,
    g_templates,
    generate_family,
    moreover_excluded,
    scan_family,
)
from enc_cdv.pipeline import record_objects, scan_family_parallel
from enc_cdv.series import CA, ODD, make_support
from enc_cdv.serialize import dumps
from enc_cdv.structure import match_normal_form
from enc_cdv.valuation import find_beta
from enc_cdv.weights import WeightSystem, setting_violations

WORKED_BETA = ["2/5", "4/5", "3/5", "1/5"]


def test_generate_examples():
    assert generate_family("cA-C", 5, 3) == WeightSystem(5, (3, 1, 2, 4), 4)
    assert generate_family("Odd", 8) == WeightSystem(8, (1, 5, 3, 2), 2)
    assert generate_family("cDE-a", 7, 3) == WeightSystem(7, (0, 3, 4, 1), 0)


@pytest.mark.parametrize(
    "family,r,a,fragment",
    [
        ("cA-C", 6, 2, "gcd(a,r)"),
        ("cA-C", 6, 1, "gcd(a+1,r)"),
        ("cA-B", 5, 1, "gcd(a+1,r) must exceed 1"),
        ("Odd", 6, None, "4 must divide r"),
        ("cDE-b", 5, 2, "r must be even"),
        ("cDE-d", 6, 1, "r must be odd"),
        ("cA-C", 1, 1, "at least 2"),
        ("cA-C", 5, None, "missing parameter"),
    ],
)
def test_generate_rejections(family, r, a, fragment):
    rej = generate_family(family, r, a)
    assert isinstance(rej, Rejection) and fragment in rej.reason


def test_generate_unknown_family():
    with pytest.raises(ValueError):
        generate_family("cA-Z", 5, 1)


def test_moreover_exclusion_is_literal():
    assert moreover_excluded(5, (1, 4, 1, 0), 0) == 1
    assert moreover_excluded(5, (1, 4, 0, 1), 0) is None
    assert moreover_excluded(2, (1, 1, 0, 1), 0) is None
    assert moreover_excluded(6, (2, 4, 1, 0), 0) is None


def test_every_member_revalidates_and_round_trips():
    for tag, form in FAMILIES.items():
        for r in range(2, 21):
            for a, ws in family_members(tag, r):
                assert setting_violations(ws.r, ws.a, ws.e) == []
                got = match_normal_form(ws, form.ftype)
                assert any(nf.family == tag and nf.a == a for nf in got), (tag, r, a)


def test_templates_are_antichains_within_caps():
    ws = generate_family("cA-C", 7, 2)
    seen = 0
    for s in g_templates(ws, CA, 8, 3):
        g = s.g_monomials
        assert 1 <= len(g) <= 3 and all(sum(m) <= 8 for m in g)
        for m in g:
            for n in g:
                assert m == n or not all(x <= y for x, y in zip(m, n))
        seen += 1
    assert seen > 0


def test_odd_templates_live_in_x3_x4():
    ws = generate_family("Odd", 8)
    for s in g_templates(ws, ODD, 8, 2):
        assert all(m[0] == m[1] == 0 for m in s.g_monomials)


def test_degree_cap_binding():
    assert degree_cap_binding(make_support(CA, [(0, 0, 2, 0), (0, 0, 0, 6)]), 6)
    assert not degree_cap_binding(make_support(CA, [(0, 0, 2, 0), (0, 0, 0, 6)]), 7)


def test_scan_contains_worked_example():
    recs = scan_family("cA-C", 5, k_max=3, d_max=6, s_max=2)
    hits = [
        r
        for r in recs
        if r["r"] == 5
        and r["a_param"] == 3
        and set(map(tuple, r["support"]["monomials"])) == {(1, 1, 0, 0), (0, 0, 2, 0), (0, 0, 0, 6)}
    ]
    assert hits
    v = hits[0]["verdict"]
    assert v["status"] == "Valid" and v["k"] == 2 and v["beta"] == WORKED_BETA
    assert all(c["pass"] for c in hits[0]["structure"]["conditions"].values())


def test_scan_rejects_bad_caps():
    with pytest.raises(ValueError):
        scan_family("cA-C", 5, d_max=1)


def test_scan_determinism_and_worker_independence():
    a = scan_family("cDE-b", 10, k_max=3, d_max=6, s_max=2)
    b = scan_family_parallel("cDE-b", 10, 3, 6, 2, workers=2)
    assert [dumps(x) for x in a] == [dumps(x) for x in b]


def test_valid_records_revalidate():
    for rec in scan_family("cA-B", 12, k_max=3, d_max=6, s_max=2, with_structure=False):
        if rec["verdict"]["status"] != "Valid":
            continue
        ws, s = record_objects(rec)
        w = find_beta(ws, s, 3)
        assert w.k == rec["verdict"]["k"]
        assert json.loads(dumps([w.beta.coords if w.beta else None]))[0] == rec["verdict"]["beta"]


def test_ca_d_valid_records_are_small_or_near_one():
    recs = scan_family_parallel("cA-D", 50, 3, 8, 3, workers=1, with_structure=False)
    for rec in recs:
        v = rec["verdict"]
        if v["status"] == "Valid":
            assert rec["r"] <= 13 or F(v["beta_diff"]) >= F(13, 14)


def test_lemma_property_on_zero_family_records():
    from enc_cdv.lemmas import g_weight_lemma_check
    from enc_cdv.pipeline import classify

    for rec in scan_family("cDE-a", 25, k_max=3, d_max=6, s_max=2, with_structure=False):
        if rec["verdict"]["status"] == "Valid":
            ws, s = record_objects(rec)
            assert g_weight_lemma_check(ws, s, classify(ws, s, 3, with_structure=False).witness)


# ---------------------------------------------------------------- atlas


@pytest.fixture(scope="module")
def ca_c_small():
    return scan_family("cA-C", 5, k_max=3, d_max=6, s_max=2, with_structure=False)


def test_atlas_contains_worked_key(ca_c_small):
    rows = atlas_merge(ca_c_small)
    assert any(row["family"] == "cA-C" and row["k"] == 2 and row["r"] == 5 and row["beta"] == WORKED_BETA for row in rows)


def test_atlas_idempotent(ca_c_small):
    assert atlas_merge(ca_c_small + ca_c_small) == atlas_merge(ca_c_small)


def test_atlas_union_of_disjoint_ranges():
    lo = scan_family("cDE-c", 8, 3, 6, 2, with_structure=False)
    hi = scan_family("cDE-c", 14, 3, 6, 2, r_min=9, with_structure=False)
    key = lambda rows: {(x["family"], x["k"], x["r"], tuple(x["beta"])) for x in rows}
    merged = atlas_merge(hi + lo)
    assert key(merged) == key(atlas_merge(lo)) | key(atlas_merge(hi))
    assert merged == atlas_merge(lo + hi)


def test_atlas_version_mismatch(ca_c_small):
    bad = dict(ca_c_small[0], version=RECORD_VERSION + 1)
    with pytest.raises(VersionMismatch):
        atlas_merge([bad])


@settings(max_examples=40)
@given(st.randoms(use_true_random=False))
def test_atlas_stable_under_shard_order(rng):
    recs = scan_family("cA-C", 9, 3, 6, 2, with_structure=False)
    shuffled = list(recs)
    rng.shuffle(shuffled)
    assert atlas_merge(shuffled) == atlas_merge(recs)


def test_beta_growth_windows(ca_c_small):
    out = beta_growth(ca_c_small, "cA-C")
    assert [big for big, _ in out] == sorted(big for big, _ in out)
    assert all(n >= 1 for _, n in out)


def test_family_tags():
    assert FAMILY_TAGS == ("cA-C", "cA-D", "cA-B", "Odd", "cDE-b", "cDE-c", "cDE-d", "cDE-e", "cDE-f", "cDE-a")
