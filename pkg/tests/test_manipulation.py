from fractions import Fraction
from random import Random

import pytest

from fnpw import Bundle, CapExceeded, generate, get_mechanism
from fnpw.manipulation import (
    ManipulationPlan,
    find_fnpw_manipulation,
    replay_gain,
    simulate_identities,
    truthful_utility,
)
from helpers import additive, bundle, example1_agents, sm


def example1_setup():
    a1, a2, truth = example1_agents()
    pool = [sm("A", 1), sm("B", 4)]
    return truth, (a1, a2), pool


def test_truthful_utility_examples():
    truth, others, _ = example1_setup()
    assert truthful_utility(get_mechanism("vcg"), truth, others) == 0
    zero = sm("A", 0)
    assert truthful_utility(get_mechanism("vcg"), zero, others) == 0
    assert truthful_utility(get_mechanism("mmvip"), additive(3, 2), ()) == 5


def test_withdrawal_plan_found_with_exact_gain():
    truth, others, pool = example1_setup()
    plan = find_fnpw_manipulation(get_mechanism("vcg"), truth, others, pool)
    assert plan is not None
    assert plan.gain == 1
    assert list(plan.kept) == [sm("A", 1)]
    assert list(plan.withdrawn) == [sm("B", 4)]
    assert plan.bundle == bundle("A")
    assert plan.payment == 0
    assert not plan.pure


def test_no_pure_false_name_gain_on_same_fixture():
    truth, others, pool = example1_setup()
    plan = find_fnpw_manipulation(
        get_mechanism("vcg"), truth, others, pool, k_max=2, allow_withdrawal=False
    )
    assert plan is None


def test_item_pricing_immune_on_same_fixture():
    truth, others, pool = example1_setup()
    for name in ("set", "mb", "mmvip", "amd:vcg"):
        assert find_fnpw_manipulation(get_mechanism(name), truth, others, pool) is None, name


def test_plan_replays_to_its_stored_gain():
    truth, others, pool = example1_setup()
    mech = get_mechanism("vcg")
    plan = find_fnpw_manipulation(mech, truth, others, pool)
    assert replay_gain(mech, truth, others, plan) == plan.gain
    got_bundle, got_payment = simulate_identities(mech, others, plan.kept, plan.withdrawn)
    assert (got_bundle, got_payment) == (plan.bundle, plan.payment)


def test_withdrawal_search_is_conservative_extension():
    # anything refused with withdrawal enabled is refused without it
    rng = Random(70)
    for name in ("vcg", "set", "mmvip"):
        mech = get_mechanism(name)
        for _ in range(8):
            m = rng.choice((2, 3))
            pool = [
                generate(rng.choice(("additive", "single_minded")), m, Random(rng.getrandbits(32)))
                for _ in range(3)
            ]
            truth = pool[0]
            others = tuple(pool[1:2])
            full = find_fnpw_manipulation(mech, truth, others, pool, k_max=2, q_max=1)
            pure = find_fnpw_manipulation(
                mech, truth, others, pool, k_max=2, allow_withdrawal=False
            )
            if full is None:
                assert pure is None, name


def test_level_mechanism_gains_by_withdrawing_the_helper():
    truth = sm("A", "1.1", 3)
    others = (sm("AB", "2.2", 3),)
    pool = [sm("A", "1.05", 3), sm("BC", "2.9", 3)]
    plan = find_fnpw_manipulation(get_mechanism("lds3"), truth, others, pool, k_max=1, q_max=1)
    assert plan is not None
    assert plan.gain > 0
    assert sm("BC", "2.9", 3) in plan.withdrawn
    assert plan.bundle == bundle("A", 3)


def test_total_budget_prunes_large_auctions():
    truth, others, pool = example1_setup()
    # with everything capped to the truthful auction size, nothing extra fits
    plan = find_fnpw_manipulation(
        get_mechanism("vcg"), truth, others, pool, k_max=2, q_max=2, total_max=3
    )
    assert plan is None


def test_cap_violations_raise():
    truth, others, pool = example1_setup()
    with pytest.raises(CapExceeded):
        find_fnpw_manipulation(
            get_mechanism("vcg"), truth, others, pool, k_max=5, q_max=5
        )


def test_plan_requires_kept_identity():
    with pytest.raises(ValueError):
        ManipulationPlan(
            kept=(),
            withdrawn=(),
            bundle=Bundle.empty(2),
            payment=Fraction(0),
            gain=Fraction(1),
            truthful=Fraction(0),
        )
