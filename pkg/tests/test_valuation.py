from fractions import Fraction
from random import Random

import pytest

from fnpw import (
    AdditiveValuation,
    Bundle,
    ExplicitValuation,
    SingleMindedValuation,
    generate,
    marginal_value,
    minimal_bundles,
    validate,
    valuation_from_jsonable,
)
from helpers import additive, bundle, explicit2, sm


def test_value_single_minded_on_superset():
    v = sm("A", 1)
    assert v.value(bundle("AB")) == 1
    assert v.value(bundle("B")) == 0
    assert v.value(Bundle.empty(2)) == 0


def test_value_additive_sums_items():
    assert additive(3, 2).value(bundle("AB")) == 5
    assert additive(3, 2).value(bundle("B")) == 2


def test_value_rejects_mismatched_m():
    with pytest.raises(ValueError):
        sm("A", 1).value(Bundle.empty(3))


def test_equality_is_by_value_function_not_representation():
    as_table = ExplicitValuation(2, [0, 0, 0, 4])
    as_target = sm("AB", 4)
    assert as_table == as_target
    assert hash(as_table) == hash(as_target)
    assert as_table != sm("AB", 5)


def test_validate_passes_standard_shapes():
    assert validate(additive(3, 2)).passed
    assert validate(sm("AB", 4)).passed
    assert validate(explicit2("0.5", "0.25", "0.6")).passed


def test_validate_reports_monotonicity_witness():
    broken = ExplicitValuation(2, [0, 2, 0, 1])
    report = validate(broken)
    assert not report.passed
    ce = report.counterexample
    assert ce["B1"] == bundle("A") and ce["B2"] == bundle("AB")
    assert ce["v(B1)"] == 2 and ce["v(B2)"] == 1


def test_validate_reports_nonzero_empty_and_negatives():
    assert not validate(ExplicitValuation(2, [1, 1, 1, 1])).passed
    assert not validate(AdditiveValuation(2, [Fraction(-1), 1])).passed


def test_marginal_value():
    assert marginal_value(sm("AB", 4), bundle("B"), 0) == 4
    assert marginal_value(additive(3, 2), bundle("B"), 0) == 3
    assert marginal_value(sm("AB", 4), Bundle.empty(2), 0) == 0
    with pytest.raises(ValueError):
        marginal_value(sm("AB", 4), bundle("A"), 0)


def test_minimal_bundles():
    assert minimal_bundles(sm("AB", 4)) == {bundle("AB")}
    assert minimal_bundles(additive(3, 2)) == {bundle("A"), bundle("B"), bundle("AB")}
    assert minimal_bundles(sm("A", 1)) == {bundle("A")}  # superset adds nothing


def test_minimal_bundles_property():
    rng = Random(5)
    for _ in range(40):
        v = generate("substitutable", 2, rng)
        mins = minimal_bundles(v)
        for mask in range(1, 4):
            b = Bundle(mask, 2)
            subs = [Bundle(s, 2) for s in range(mask) if s & mask == s]
            if b in mins:
                assert all(v.value(s) < v.value(b) for s in subs)
            else:
                assert any(v.value(s) == v.value(b) for s in subs)


@pytest.mark.parametrize("mode,m", [
    ("substitutable", 2),
    ("complementary", 2),
    ("additive", 3),
    ("single_minded", 3),
])
def test_generate_always_validates(mode, m):
    for seed in range(1000):
        v = generate(mode, m, Random(seed))
        assert validate(v).passed, (mode, seed)


def test_generate_substitutable_bounds():
    for seed in range(200):
        v = generate("substitutable", 2, Random(seed))
        va, vb, vab = v.value(bundle("A")), v.value(bundle("B")), v.value(bundle("AB"))
        assert max(va, vb) <= vab <= va + vb


def test_generate_complementary_bounds():
    for seed in range(200):
        v = generate("complementary", 2, Random(seed))
        va, vb, vab = v.value(bundle("A")), v.value(bundle("B")), v.value(bundle("AB"))
        assert vab >= va + vb


def test_generate_is_deterministic_per_seed():
    assert generate("substitutable", 2, Random(99)) == generate("substitutable", 2, Random(99))


def test_generate_rejects_unsupported_combo():
    with pytest.raises(ValueError):
        generate("substitutable", 3, Random(0))
    with pytest.raises(ValueError):
        generate("nope", 2, Random(0))


def test_marginal_max_additive_is_item_value():
    v = additive(3, 2)
    assert v.marginal_max(0) == 3
    assert v.marginal_max(1) == 2


def test_json_round_trip():
    for v in (sm("AB", "2.2"), additive("0.5", "0.25", 1), explicit2(3, 2, 4)):
        doc = v.to_jsonable()
        assert valuation_from_jsonable(doc) == v
    with pytest.raises(ValueError):
        valuation_from_jsonable({"kind": "mystery", "m": 2})
