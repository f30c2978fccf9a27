from fractions import Fraction
from random import Random

import pytest

from fnpw import (
    Bundle,
    Profile,
    all_subsets,
    amd_h,
    amd_price,
    generate,
    get_mechanism,
    grand_bundle,
    price_mb,
    price_mmvip,
    price_set,
    price_vcg,
    run_auction,
    run_lds3,
)
from fnpw.mechanisms import AmdPrice, MmvipPrice, SetPrice, VcgPrice
from helpers import (
    additive,
    brute_marginal_max,
    brute_welfare,
    bundle,
    example1_agents,
    explicit2,
    profile,
    sm,
)

A = bundle("A")
B = bundle("B")
AB = bundle("AB")
EMPTY = Bundle.empty(2)
SUB_TRIPLE = explicit2(3, 2, 4)


def test_price_vcg_frozen_examples():
    assert price_vcg(A, (additive(3, 2),)) == 3
    a1, a2, _ = example1_agents()
    # winning {A} displaces the 4-value joint bidder onto {B} alone: 4 - 2
    assert price_vcg(A, (a1, a2)) == 2
    # winning {B} leaves only the worthless {A} behind: 4 - 0
    assert price_vcg(B, (a1, a2)) == 4
    assert price_vcg(EMPTY, (a1, a2)) == 0
    assert price_vcg(AB, ()) == 0


def test_price_vcg_is_externality_of_brute_welfare():
    rng = Random(41)
    for _ in range(30):
        vals = [generate("substitutable", 2, Random(rng.getrandbits(32))) for _ in range(3)]
        for b in all_subsets(2):
            expected = brute_welfare(AB, vals) - brute_welfare(AB - b, vals)
            if not b:
                expected = Fraction(0)
            assert price_vcg(b, vals) == expected


def test_price_set_frozen_examples():
    assert price_set(A, (additive(3, 2),)) == 5
    assert price_set(EMPTY, (additive(3, 2),)) == 0
    assert price_set(AB, ()) == 0


def test_price_mb_frozen_examples():
    assert price_mb(A, (additive(3, 2),)) == 5
    assert price_mb(A, (sm("B", 2),)) == 0
    assert price_mb(B, (sm("AB", 4),)) == 4
    assert price_mb(EMPTY, (sm("AB", 4),)) == 0


def test_price_mmvip_frozen_examples():
    assert price_mmvip(A, (additive(3, 2),)) == 3
    assert price_mmvip(AB, (additive(3, 2),)) == 5
    assert price_mmvip(A, (sm("AB", 4),)) == 4
    assert price_mmvip(AB, ()) == 0


def test_price_mmvip_matches_brute_marginals():
    rng = Random(43)
    for _ in range(30):
        vals = [generate("complementary", 2, Random(rng.getrandbits(32))) for _ in range(3)]
        for b in all_subsets(2):
            expected = sum(
                (max(brute_marginal_max(v, item) for v in vals) for item in b),
                Fraction(0),
            )
            assert price_mmvip(b, vals) == expected


def test_price_mmvip_is_item_additive():
    rng = Random(44)
    for _ in range(20):
        vals = [generate("substitutable", 2, Random(rng.getrandbits(32))) for _ in range(2)]
        for b in all_subsets(2):
            assert price_mmvip(b, vals) == sum(
                (price_mmvip(Bundle(1 << i, 2), vals) for i in b), Fraction(0)
            )


def test_price_function_invariants_across_zoo():
    rng = Random(45)
    names = ("vcg", "set", "mb", "mmvip", "amd:vcg", "amd:mmvip")
    for _ in range(12):
        m = rng.choice((2, 3))
        modes = ("additive", "single_minded")
        vals = tuple(
            generate(rng.choice(modes), m, Random(rng.getrandbits(32)))
            for _ in range(rng.randint(0, 3))
        )
        for name in names:
            mech = get_mechanism(name)
            row = mech.price_row(m, vals)
            assert row[0] == 0, name
            for mask in range(1 << m):
                assert row[mask] >= 0, name
                for i in range(m):
                    if not mask >> i & 1:
                        assert row[mask] <= row[mask | (1 << i)], name


def test_amd_h_frozen_examples():
    assert amd_h(VcgPrice(), ()) == 0
    assert amd_h(VcgPrice(), (SUB_TRIPLE,)) == 1
    rng = Random(46)
    for _ in range(10):
        vals = tuple(
            generate("substitutable", 2, Random(rng.getrandbits(32))) for _ in range(2)
        )
        assert amd_h(MmvipPrice(), vals) == 0


def test_amd_price_frozen_examples():
    others = (SUB_TRIPLE,)
    assert amd_price(VcgPrice(), A, others) == 3
    assert amd_price(VcgPrice(), B, others) == 2
    assert amd_price(VcgPrice(), AB, others) == 5
    assert amd_price(VcgPrice(), EMPTY, others) == 0
    for b in all_subsets(2):
        assert amd_price(VcgPrice(), b, others) == price_mmvip(b, others)


def test_amd_on_additive_types_equals_base():
    rng = Random(47)
    for _ in range(15):
        vals = tuple(
            generate("additive", 2, Random(rng.getrandbits(32))) for _ in range(3)
        )
        for b in all_subsets(2):
            p = price_vcg(b, vals)
            assert amd_price(VcgPrice(), b, vals) == p
            assert price_mmvip(b, vals) == p


def test_amd_fixed_point_when_base_already_robust():
    # bases that satisfy both superadditivity conditions are unchanged
    rng = Random(48)
    for name in ("set", "mb", "mmvip"):
        for _ in range(8):
            vals = tuple(
                generate("substitutable", 2, Random(rng.getrandbits(32)))
                for _ in range(rng.randint(0, 3))
            )
            base = get_mechanism(name)
            wrapped = AmdPrice(get_mechanism(name))
            for b in all_subsets(2):
                assert wrapped.price(b, vals) == base.price(b, vals), name


def test_amd_feasibility_inherited():
    rng = Random(49)
    for _ in range(15):
        vals = [generate("substitutable", 2, Random(rng.getrandbits(32))) for _ in range(4)]
        prof = profile(2, *((f"a{k}", v) for k, v in enumerate(vals)))
        run_auction(get_mechanism("amd:vcg"), prof)  # must not raise


def test_set_mechanism_tie_goes_to_lowest_id():
    prof = profile(2, ("z", sm("AB", 4)), ("a", sm("AB", 4)), ("m", sm("A", 1)))
    run = run_auction(get_mechanism("set"), prof)
    assert run.outcome.bundle("a") == AB
    assert run.outcome.payment("a") == 4  # pays the tied rival value, utility 0
    assert run.outcome.bundle("z") == EMPTY
    assert run.outcome.bundle("m") == EMPTY


def test_set_and_mb_coincide_on_generated_tables():
    rng = Random(50)
    for _ in range(25):
        vals = [generate("substitutable", 2, Random(rng.getrandbits(32))) for _ in range(5)]
        prof = profile(2, *((f"a{k}", v) for k, v in enumerate(vals)))
        out_set = run_auction(get_mechanism("set"), prof).outcome
        out_mb = run_auction(get_mechanism("mb"), prof).outcome
        assert out_set.allocation == out_mb.allocation
        assert out_set.payments == out_mb.payments


# -- the three-item leveled-division procedure ------------------------------


def sm3(labels, value):
    return sm(labels, value, m=3)


def test_lds3_low_value_stage_frozen_allocations():
    others = ("o", sm3("AB", "2.2"))
    out = run_lds3(profile(3, ("i", sm3("A", "1.3")), others))
    assert out.bundle("i") == bundle("A", 3)
    assert out.payment("i") == Fraction("1.2")
    assert out.bundle("o") == Bundle.empty(3)

    out = run_lds3(profile(3, ("i", sm3("A", "1.1")), others))
    assert out.bundle("i") == Bundle.empty(3)
    assert out.payment("i") == 0

    out = run_lds3(
        profile(3, ("i", sm3("A", "1.05")), others, ("a", sm3("BC", "2.9")))
    )
    assert out.bundle("i") == bundle("A", 3)


def test_lds3_two_high_bidders_grand_vickrey():
    out = run_lds3(
        profile(3, ("x", sm3("ABC", 5)), ("y", sm3("ABC", "3.5")), ("z", sm3("A", 1)))
    )
    assert out.bundle("x") == grand_bundle(3)
    assert out.payment("x") == Fraction("3.5")
    assert out.bundle("y") == Bundle.empty(3)
    assert out.bundle("z") == Bundle.empty(3)


def test_lds3_single_high_bidder_takes_better_option():
    # grand-bundle purchase at 3 beats her empty restricted-stage result
    out = run_lds3(profile(3, ("x", sm3("ABC", 5)), ("o", sm3("AB", "2.2"))))
    assert out.bundle("x") == grand_bundle(3)
    assert out.payment("x") == 3
    assert out.bundle("o") == Bundle.empty(3)

    # additive high bidder: buying at 3 (utility 1.5) still beats the
    # restricted stage ({A,B} at 2.2, utility 0.8); rival wins nothing
    out = run_lds3(
        profile(3, ("x", additive("1.5", "1.5", "1.5")), ("o", sm3("AB", "2.2")))
    )
    assert out.bundle("x") == grand_bundle(3)
    assert out.payment("x") == 3


def test_lds3_requires_three_items():
    with pytest.raises(ValueError):
        run_lds3(profile(2, ("x", sm("A", 1))))


def test_lds3_pay_only_and_individual_rationality():
    rng = Random(51)
    for _ in range(60):
        n = rng.randint(1, 4)
        vals = []
        for _ in range(n):
            mode = rng.choice(("additive", "single_minded"))
            v = generate(mode, 3, Random(rng.getrandbits(32)))
            if rng.random() < 0.4:
                # push some grand-bundle values above the reserve threshold
                v = sm3("ABC", 3 + v.value_mask(0b111))
            vals.append(v)
        prof = profile(3, *((f"a{k}", v) for k, v in enumerate(vals)))
        out = run_lds3(prof)
        for agent, v in prof.agents:
            assert out.payment(agent) >= 0
            assert v.value(out.bundle(agent)) - out.payment(agent) >= 0


def test_registry_names():
    assert get_mechanism("amd:vcg").name == "amd:vcg"
    assert get_mechanism("lds3").name == "lds3"
    with pytest.raises(ValueError):
        get_mechanism("amd:lds3")
    with pytest.raises(ValueError):
        get_mechanism("unknown")
