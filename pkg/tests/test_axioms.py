from fractions import Fraction
from random import Random

import pytest

from fnpw import Bundle, generate, get_mechanism
from fnpw.axioms import (
    TypePool,
    build_demo_scf,
    check_dlb,
    check_nsa,
    check_nsaw,
    check_pia,
    check_scf_fnpw,
    check_scf_strategyproof,
    check_snsaw,
    check_subadditivity,
    check_submodularity,
    check_weak_monotonicity,
    check_withdrawal_monotonicity,
    multisets,
)
from helpers import additive, bundle, example1_agents, explicit2, sm

SUB_TRIPLE = explicit2(3, 2, 4)


def small_pool(seed=60, m=2, size=4):
    rng = Random(seed)
    return [
        generate(rng.choice(("additive", "single_minded")), m, Random(rng.getrandbits(32)))
        for _ in range(size)
    ]


def test_type_pool_validates_members():
    from fnpw import ExplicitValuation

    with pytest.raises(ValueError):
        TypePool(types=(ExplicitValuation(2, [0, 2, 0, 1]),), m=2)
    pool = TypePool(types=tuple(small_pool()), m=2)
    assert len(pool) == 4


def test_dlb_item_pricing_passes_everywhere():
    rng = Random(61)
    for _ in range(15):
        others = tuple(
            generate("complementary", 2, Random(rng.getrandbits(32))) for _ in range(3)
        )
        assert check_dlb(get_mechanism("mmvip"), others).passed


def test_dlb_externality_pricing_fails_on_substitutes():
    report = check_dlb(get_mechanism("vcg"), (SUB_TRIPLE,))
    assert not report.passed
    ce = report.counterexample
    assert {ce["S1"].label(), ce["S2"].label()} == {"{A}", "{B}"}
    assert ce["price(S1)"] + ce["price(S2)"] < ce["price(union)"]
    # re-verify the certificate independently
    mech = get_mechanism("vcg")
    assert mech.price(ce["S1"], (SUB_TRIPLE,)) + mech.price(ce["S2"], (SUB_TRIPLE,)) < mech.price(
        ce["S1"] | ce["S2"], (SUB_TRIPLE,)
    )


def test_pia_fails_for_externality_pricing_when_rival_joins():
    a1, a2, _ = example1_agents()
    report = check_pia(get_mechanism("vcg"), (a1, a2), sm("B", 4))
    assert not report.passed
    ce = report.counterexample
    assert ce["S"] == bundle("A")
    assert ce["price_before"] == 2 and ce["price_after"] == 0


def test_pia_item_pricing_only_rises():
    a1, a2, _ = example1_agents()
    assert check_pia(get_mechanism("mmvip"), (a1, a2), sm("B", 4)).passed
    assert check_pia(get_mechanism("set"), (a1, a2), sm("B", 4)).passed


def test_snsaw_verdicts_across_zoo():
    pool = small_pool()
    for name in ("set", "mb", "mmvip"):
        assert check_snsaw(get_mechanism(name), pool, max_n=2).passed, name
    report = check_snsaw(get_mechanism("vcg"), pool + [SUB_TRIPLE], max_n=2)
    assert not report.passed


def test_nsaw_finds_the_withdrawal_certificate():
    a1, a2, _ = example1_agents()
    O = (a1, a2, sm("A", 1), sm("B", 4))
    report = check_nsaw(get_mechanism("vcg"), O)
    assert not report.passed
    ce = report.counterexample
    assert ce["Y"] == [2] and ce["Z"] == [3]
    assert ce["kept_price_sum"] == 0 and ce["union_price"] == 2


def test_nsa_catches_the_pure_bundling_gap_on_the_same_profile():
    # keeping both split identities costs 3, one bundled identity pays 4:
    # a high-value joint type gains even without withdrawing anything
    a1, a2, _ = example1_agents()
    O = (a1, a2, sm("A", 1), sm("B", 4))
    report = check_nsa(get_mechanism("vcg"), O)
    assert not report.passed
    ce = report.counterexample
    assert ce["Y"] == [2, 3] and ce["Z"] == []
    assert ce["kept_price_sum"] == 3 and ce["union_price"] == 4


def test_nsa_passes_on_the_truthful_three_agent_profile():
    a1, a2, a3 = example1_agents()
    assert check_nsa(get_mechanism("vcg"), (a1, a2, a3)).passed
    assert check_nsaw(get_mechanism("vcg"), (a1, a2, a3)).passed


def test_nsaw_passes_for_item_pricing_on_random_contexts():
    rng = Random(62)
    for _ in range(10):
        O = tuple(
            generate(rng.choice(("additive", "single_minded")), 2, Random(rng.getrandbits(32)))
            for _ in range(rng.randint(1, 4))
        )
        assert check_nsaw(get_mechanism("mmvip"), O).passed


def test_nsaw_singleton_is_trivial():
    report = check_nsaw(get_mechanism("vcg"), (sm("A", 1),))
    assert report.passed and report.cases == 1


def test_weak_monotonicity_passes_for_truthful_mechanisms():
    pool = small_pool(63)
    others = small_pool(64, size=2)
    for name in ("vcg", "set", "mmvip"):
        assert check_weak_monotonicity(get_mechanism(name), pool, others).passed, name


def test_subadditivity_small_pools():
    pool = [sm("A", "0.5"), sm("B", "0.75"), sm("AB", 1)]
    for name in ("set", "mmvip"):
        assert check_subadditivity(get_mechanism(name), pool, (), k_max=2).passed, name


def test_subadditivity_vacuous_on_singleton_pool():
    report = check_subadditivity(get_mechanism("set"), [sm("A", 1)], (), k_max=2)
    assert report.passed and report.cases == 0  # premises never fire


def test_withdrawal_monotonicity_level_mechanism_fails():
    pool = [sm("A", "1.3", 3), sm("A", "1.1", 3), sm("A", "1.05", 3), sm("BC", "2.9", 3)]
    others = (sm("AB", "2.2", 3),)
    report = check_withdrawal_monotonicity(get_mechanism("lds3"), pool, others)
    assert not report.passed
    ce = report.counterexample
    assert ce["v_L"] == Fraction("1.1") and ce["v_U"] == Fraction("1.05")
    assert ce["X(theta_i)"] == bundle("A", 3)
    # item pricing on the same universe is fine
    assert check_withdrawal_monotonicity(get_mechanism("mmvip"), pool, others).passed


def test_submodularity_verdicts():
    assert check_submodularity([additive(3, 2), additive(1, 5)], 2).passed
    report = check_submodularity([sm("AB", 1)], 1)
    assert not report.passed
    ce = report.counterexample
    assert {ce["S1"].label(), ce["S2"].label()} == {"{A}", "{B}"}
    assert ce["U(S1)+U(S2)"] == 0 and ce["U(union)+U(intersection)"] == 1


def test_scf_strategyproof_verdicts():
    table, util = build_demo_scf("majority")
    assert check_scf_strategyproof(table, util).passed
    table, util = build_demo_scf("minority")
    report = check_scf_strategyproof(table, util)
    assert not report.passed
    # dictatorship of the first slot: nobody else can move the outcome
    types = ("px", "py")
    dic = {}
    level = [()]
    for _ in range(3):
        level = [p + (t,) for p in level for t in types]
        for p in level:
            dic[p] = "x" if p[0] == "px" else "y"
    _, util = build_demo_scf("majority")
    assert check_scf_strategyproof(dic, util).passed


def test_scf_fnpw_majority_is_ballot_stuffable():
    # duplicating your own report flips a tie: attainable sets reopen
    table, _ = build_demo_scf("majority")
    report = check_scf_fnpw(table)
    assert not report.passed
    ce = report.counterexample
    assert ce["others"] == ["px"] and ce["added_type"] == "py"
    assert ce["attainable_before"] == ["x"]
    assert set(ce["attainable_after"]) == {"x", "y"}


def test_scf_fnpw_threshold_rule_fails_with_expected_witness():
    table, _ = build_demo_scf("two_threshold")
    report = check_scf_fnpw(table)
    assert not report.passed
    ce = report.counterexample
    assert ce["others"] == [] and ce["attainable_before"] == ["y"]
    assert set(ce["attainable_after"]) == {"x", "y"}


def test_scf_fnpw_constant_rule_passes():
    table, _ = build_demo_scf("majority")
    constant = {profile: "x" for profile in table}
    assert check_scf_fnpw(constant).passed


def test_scf_incomplete_table_is_an_error():
    table, util = build_demo_scf("majority")
    del table[("px",)]
    with pytest.raises(ValueError):
        check_scf_strategyproof(table, util)


def test_multisets_enumeration_order():
    got = list(multisets(("a", "b"), 2))
    assert got == [(), ("a",), ("b",), ("a", "a"), ("a", "b"), ("b", "b")]


def test_snsaw_implies_nsaw_on_shared_contexts():
    pool = small_pool(65, size=3)
    for name in ("set", "mb", "mmvip"):
        mech = get_mechanism(name)
        assert check_snsaw(mech, pool, max_n=3).passed
        for O in multisets(tuple(pool), 3, min_size=1):
            assert check_nsaw(mech, O).passed, (name, O)
