"""Reproducible numeric experiments: the two-item revenue/efficiency
benchmark tables, the worst-case efficiency-ratio scenarios, and the named
regression fixtures.

Instances draw their randomness from per-index sub-generators seeded as
(seed << 32) + index, so serial and parallel runs are bit-identical; all
accumulated statistics are exact rationals.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from random import Random
from typing import Optional, Sequence

from .domain import (
    Bundle,
    CheckReport,
    FnpwError,
    Money,
    Profile,
    ZERO,
    as_money,
    grand_bundle,
    money_to_string,
)
from .manipulation import find_fnpw_manipulation, truthful_utility
from .mechanisms import get_mechanism
from .porf import InfeasibleAllocation
from .valuation import AdditiveValuation, SingleMindedValuation, ValuationSpec, generate
from .welfare import efficient_value

TABLE_ITEMS = 2
TABLE_AGENTS = 5
DEFAULT_TABLE_MECHANISMS = ("vcg", "set", "amd:vcg", "mmvip")

FIXTURE_NAMES = ("example1", "prop5_lds", "prop11_amd_eq_mmvip", "prop12_additive_coincide")


class ExperimentAborted(FnpwError):
    """An instance produced an infeasible run; carries the instance."""

    def __init__(self, index: int, instance: list, cause: Exception):
        self.index = index
        self.instance = instance
        self.cause = cause
        super().__init__(f"instance {index} aborted: {cause}")


@dataclass(frozen=True)
class TableResult:
    """Mean per-instance revenue and allocative efficiency per mechanism."""

    scenario: str
    seed: int
    n_instances: int
    mechanisms: tuple[str, ...]
    revenue: dict
    efficiency: dict
    instances: Optional[list] = None

    def to_jsonable(self) -> dict:
        return {
            "scenario": self.scenario,
            "seed": self.seed,
            "n_instances": self.n_instances,
            "mechanisms": list(self.mechanisms),
            "revenue": {k: money_to_string(v) for k, v in self.revenue.items()},
            "efficiency": {k: money_to_string(v) for k, v in self.efficiency.items()},
            "revenue_float": {k: float(v) for k, v in self.revenue.items()},
            "efficiency_float": {k: float(v) for k, v in self.efficiency.items()},
        }

    def csv_rows(self) -> list[list[str]]:
        rows = [["mechanism", "revenue", "efficiency", "revenue_float", "efficiency_float"]]
        for name in self.mechanisms:
            rows.append(
                [
                    name,
                    money_to_string(self.revenue[name]),
                    money_to_string(self.efficiency[name]),
                    f"{float(self.revenue[name]):.6f}",
                    f"{float(self.efficiency[name]):.6f}",
                ]
            )
        return rows


def _instance_valuations(scenario: str, seed: int, index: int) -> list[ValuationSpec]:
    rng = Random((seed << 32) + index)
    return [generate(scenario, TABLE_ITEMS, rng) for _ in range(TABLE_AGENTS)]


def _run_instances(
    scenario: str,
    mechanisms: Sequence[str],
    seed: int,
    start: int,
    stop: int,
    keep: bool,
):
    revenue = {name: ZERO for name in mechanisms}
    efficiency = {name: ZERO for name in mechanisms}
    records = [] if keep else None
    for index in range(start, stop):
        vals = _instance_valuations(scenario, seed, index)
        profile = Profile(
            agents=tuple((f"a{k}", v) for k, v in enumerate(vals)), m=TABLE_ITEMS
        )
        record = {} if keep else None
        for name in mechanisms:
            mech = get_mechanism(name)
            try:
                outcome = mech.run(profile)
            except InfeasibleAllocation as exc:
                raise ExperimentAborted(
                    index, [v.to_jsonable() for v in vals], exc
                ) from exc
            rev = outcome.revenue
            eff = sum((v.value(outcome.bundle(a)) for a, v in profile.agents), ZERO)
            revenue[name] += rev
            efficiency[name] += eff
            if keep:
                record[name] = (rev, eff)
        if keep:
            records.append(record)
    return revenue, efficiency, records


def run_table_experiment(
    scenario: str,
    mechanisms: Sequence[str] = DEFAULT_TABLE_MECHANISMS,
    n_instances: int = 1000,
    seed: int = 0,
    keep_instances: bool = False,
    threads: Optional[int] = None,
) -> TableResult:
    """Monte Carlo benchmark: two items, five agents per instance.

    Revenue is the sum of payments; efficiency is the winners' total value
    for their bundles (payments excluded). Reported numbers are exact
    per-instance means.
    """
    if scenario not in ("substitutable", "complementary"):
        raise ValueError(f"unknown scenario {scenario!r}")
    mechanisms = tuple(mechanisms)
    if threads is None:
        threads = int(os.environ.get("FNPW_THREADS", "1"))
    threads = max(1, min(threads, n_instances or 1))

    revenue = {name: ZERO for name in mechanisms}
    efficiency = {name: ZERO for name in mechanisms}
    records: Optional[list] = [] if keep_instances else None

    if threads == 1:
        revenue, efficiency, records = _run_instances(
            scenario, mechanisms, seed, 0, n_instances, keep_instances
        )
    else:
        bounds = [
            (n_instances * k // threads, n_instances * (k + 1) // threads)
            for k in range(threads)
        ]
        with ProcessPoolExecutor(max_workers=threads) as pool:
            futures = [
                pool.submit(
                    _run_instances, scenario, mechanisms, seed, lo, hi, keep_instances
                )
                for lo, hi in bounds
                if lo < hi
            ]
            for future in futures:
                rev, eff, recs = future.result()
                for name in mechanisms:
                    revenue[name] += rev[name]
                    efficiency[name] += eff[name]
                if keep_instances:
                    records.extend(recs)

    n = Fraction(max(n_instances, 1))
    return TableResult(
        scenario=scenario,
        seed=seed,
        n_instances=n_instances,
        mechanisms=mechanisms,
        revenue={k: v / n for k, v in revenue.items()},
        efficiency={k: v / n for k, v in efficiency.items()},
        instances=records,
    )


# ---------------------------------------------------------------------------
# Worst-case efficiency-ratio scenarios
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RatioResult:
    """Winner sets of the three probe scenarios and the third scenario's
    efficiency ratio (achieved welfare over optimal welfare)."""

    mechanism: str
    m: int
    epsilon: Money
    scenarios: tuple
    ratio: Money

    def to_jsonable(self) -> dict:
        return {
            "mechanism": self.mechanism,
            "m": self.m,
            "epsilon": money_to_string(self.epsilon),
            "scenarios": [
                {
                    "agents": list(s["agents"]),
                    "winners": {a: list(b.items) for a, b in s["winners"].items()},
                    "welfare": money_to_string(s["welfare"]),
                }
                for s in self.scenarios
            ],
            "ratio": money_to_string(self.ratio),
            "ratio_float": float(self.ratio),
        }


def run_ratio_scenarios(mechanism: str, m: int, epsilon) -> RatioResult:
    """Probe profiles: one agent wants everything at value 1, each of m
    agents wants a single distinct item at value 1 - epsilon.

    Scenario 1: the all-items agent against one single-item agent.
    Scenario 2: two copies of the first single-item agent.
    Scenario 3: the all-items agent against all m single-item agents; its
    efficiency ratio (welfare achieved over the efficient optimum) is the
    reported worst-case figure.
    """
    eps = as_money(epsilon)
    if not (0 < eps < 1):
        raise ValueError("epsilon must lie strictly between 0 and 1")
    if m < 1:
        raise ValueError("m must be >= 1")
    theta_a = SingleMindedValuation(m, grand_bundle(m), 1)
    theta = [
        SingleMindedValuation(m, Bundle(1 << i, m), 1 - eps) for i in range(m)
    ]
    profiles = [
        Profile(agents=(("a", theta_a), ("b1", theta[0])), m=m),
        Profile(agents=(("b1", theta[0]), ("b2", theta[0])), m=m),
        Profile(
            agents=(("a", theta_a),) + tuple((f"b{i+1}", theta[i]) for i in range(m)),
            m=m,
        ),
    ]
    scenarios = []
    for profile in profiles:
        outcome = get_mechanism(mechanism).run(profile)
        welfare = sum((v.value(outcome.bundle(a)) for a, v in profile.agents), ZERO)
        scenarios.append(
            {
                "agents": profile.ids,
                "winners": outcome.winners(),
                "welfare": welfare,
            }
        )
    optimal = efficient_value(grand_bundle(m), [v for _, v in profiles[2].agents])
    ratio = scenarios[2]["welfare"] / optimal
    return RatioResult(
        mechanism=mechanism, m=m, epsilon=eps, scenarios=tuple(scenarios), ratio=ratio
    )


# ---------------------------------------------------------------------------
# Named regression fixtures
# ---------------------------------------------------------------------------


def _sm(labels: str, value, m: int) -> SingleMindedValuation:
    return SingleMindedValuation(m, Bundle.from_labels(labels, m), value)


def _fixture_example1() -> CheckReport:
    """Two items: a single-item bidder beats truthful reporting by adding a
    high second identity and withdrawing it, gaining exactly 1."""
    truth = _sm("A", 1, 2)
    others = (_sm("AB", 4, 2), _sm("B", 2, 2))
    mech = get_mechanism("vcg")
    base = truthful_utility(mech, truth, others)
    if base != 0:
        return CheckReport(False, {"truthful_utility": base, "expected": 0}, cases=1)
    pool = [_sm("A", 1, 2), _sm("B", 4, 2)]
    plan = find_fnpw_manipulation(mech, truth, others, pool, k_max=2, q_max=2)
    if plan is None or plan.gain != 1:
        return CheckReport(
            False,
            {"gain": None if plan is None else plan.gain, "expected_gain": 1},
            cases=2,
        )
    if list(plan.withdrawn) != [_sm("B", 4, 2)]:
        return CheckReport(False, {"withdrawn": list(plan.withdrawn)}, cases=3)
    pure = find_fnpw_manipulation(
        mech, truth, others, pool, k_max=2, allow_withdrawal=False
    )
    if pure is not None:
        return CheckReport(False, {"unexpected_pure_plan": pure.to_jsonable()}, cases=4)
    return CheckReport(True, cases=4, note="withdrawal gain 1; no pure false-name gain")


def _fixture_prop5_lds() -> CheckReport:
    """The 3-item leveled-division mechanism violates
    withdrawal-monotonicity on the 2.2/1.3/1.1/1.05/2.9 profile family."""
    from .axioms import check_withdrawal_monotonicity
    from .mechanisms import run_lds3

    others = (_sm("AB", "2.2", 3),)
    cases = 0
    expectations = [
        (_sm("A", "1.3", 3), "{A}"),
        (_sm("A", "1.1", 3), "{}"),
    ]
    for focal, label in expectations:
        cases += 1
        out = run_lds3(Profile(agents=(("i", focal), ("o", others[0])), m=3))
        if out.bundle("i").label() != label:
            return CheckReport(
                False, {"focal": focal, "bundle": out.bundle("i"), "expected": label}, cases=cases
            )
    cases += 1
    out = run_lds3(
        Profile(
            agents=(("i", _sm("A", "1.05", 3)), ("o", others[0]), ("a", _sm("BC", "2.9", 3))),
            m=3,
        )
    )
    if out.bundle("i").label() != "{A}":
        return CheckReport(False, {"bundle": out.bundle("i"), "expected": "{A}"}, cases=cases)
    pool = [
        _sm("A", "1.3", 3),
        _sm("A", "1.1", 3),
        _sm("A", "1.05", 3),
        _sm("BC", "2.9", 3),
    ]
    report = check_withdrawal_monotonicity(get_mechanism("lds3"), pool, others)
    cases += report.cases
    if report.passed:
        return CheckReport(
            False, {"expected": "withdrawal-monotonicity violation"}, cases=cases
        )
    witness = report.counterexample
    if witness["v_L"] != Fraction("1.1") or witness["v_U"] != Fraction("1.05"):
        return CheckReport(False, dict(witness), cases=cases)
    return CheckReport(True, cases=cases, note="witness 1.1 > 1.05 confirmed")


def _pointwise_equal(name_a: str, name_b: str, others_list: list) -> CheckReport:
    cases = 0
    for others in others_list:
        m = others[0].m if others else TABLE_ITEMS
        mech_a = get_mechanism(name_a)
        mech_b = get_mechanism(name_b)
        row_a = mech_a.price_row(m, others)
        row_b = mech_b.price_row(m, others)
        for mask in range(1 << m):
            cases += 1
            if row_a[mask] != row_b[mask]:
                return CheckReport(
                    False,
                    {
                        "others": list(others),
                        "S": Bundle(mask, m),
                        name_a: row_a[mask],
                        name_b: row_b[mask],
                    },
                    cases=cases,
                )
    return CheckReport(True, cases=cases)


def _fixture_prop11() -> CheckReport:
    """With two substitutable items the transform of the externality pricer
    coincides with item pricing, for one to four rivals."""
    rng = Random(1105)
    contexts = []
    for n in range(1, 5):
        for _ in range(40):
            contexts.append(
                tuple(generate("substitutable", 2, rng) for _ in range(n))
            )
    report = _pointwise_equal("amd:vcg", "mmvip", contexts)
    report.note = "amd:vcg vs mmvip on substitutable two-item contexts"
    return report


def _fixture_prop12() -> CheckReport:
    """On additive contexts the externality pricer, item pricing, and the
    transform all coincide."""
    rng = Random(1212)
    contexts = []
    for n in range(0, 5):
        for _ in range(25):
            contexts.append(tuple(generate("additive", 2, rng) for _ in range(n)))
    r1 = _pointwise_equal("vcg", "mmvip", contexts)
    if not r1:
        return r1
    r2 = _pointwise_equal("amd:vcg", "vcg", contexts)
    r2.cases += r1.cases
    r2.note = "vcg = mmvip = amd:vcg on additive contexts"
    return r2


def replay_fixture(name: str) -> CheckReport:
    """Run a named end-to-end construction and verify its known conclusion."""
    fixtures = {
        "example1": _fixture_example1,
        "prop5_lds": _fixture_prop5_lds,
        "prop11_amd_eq_mmvip": _fixture_prop11,
        "prop12_additive_coincide": _fixture_prop12,
    }
    if name not in fixtures:
        raise ValueError(f"unknown fixture {name!r}; choose from {FIXTURE_NAMES}")
    return fixtures[name]()
