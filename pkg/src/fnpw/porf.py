"""Price-oriented, rationing-free auction engine.

A mechanism is represented by its price function: the price an agent faces
for a bundle depends only on the other agents' reported types. The engine
hands each agent her full price row, lets her buy a utility-maximizing
bundle (ties: fewest items, then lexicographically smallest item set), and
verifies that no item is sold twice. A collision is reported as
InfeasibleAllocation; for a correct price function it never happens, so
the error doubles as a test signal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .domain import (
    Bundle,
    FnpwError,
    Money,
    Outcome,
    Profile,
    ZERO,
    check_caps,
    item_label,
)
from .valuation import ValuationSpec


class InfeasibleAllocation(FnpwError):
    """Two agents demanded the same item even after tie-breaking."""

    def __init__(self, item: int, agent_ids: Sequence[str]):
        self.item = item
        self.agent_ids = tuple(agent_ids)
        super().__init__(
            f"item {item_label(item)} demanded by agents {', '.join(self.agent_ids)}"
        )


class PriceFunction:
    """Interface for a PORF price function chi(S, others)."""

    name = "abstract"

    def price(self, s: Bundle, others: Sequence[ValuationSpec]) -> Money:
        raise NotImplementedError

    def price_row(self, m: int, others: Sequence[ValuationSpec]) -> tuple:
        """Prices of all 2^m bundles, indexed by bundle bitmask."""
        return tuple(self.price(Bundle(mask, m), others) for mask in range(1 << m))

    def resolve_tie(self, agent_id: str, profile: Profile, optimal: list[Bundle]) -> Bundle:
        """Pick among demand-optimal bundles; `optimal` is sorted by the
        default tie-break key, so returning optimal[0] keeps the default."""
        return optimal[0]

    def run(self, profile: Profile) -> Outcome:
        return run_auction(self, profile).outcome

    def __repr__(self) -> str:
        return f"<mechanism {self.name}>"


@dataclass
class MechanismRun:
    """One full auction: the profile, the outcome, and every price row."""

    profile: Profile
    outcome: Outcome
    price_rows: Mapping[str, tuple]

    def row(self, agent_id: str) -> tuple:
        return self.price_rows[agent_id]


def _optimal_bundles(v: ValuationSpec, row: Sequence[Money]) -> list[Bundle]:
    """All utility-maximizing bundles, sorted by the demand tie-break key."""
    table = v.table
    best = None
    arg: list[int] = []
    for mask in range(len(row)):
        u = table[mask] - row[mask]
        if best is None or u > best:
            best = u
            arg = [mask]
        elif u == best:
            arg.append(mask)
    bundles = [Bundle(mask, v.m) for mask in arg]
    bundles.sort(key=Bundle.tie_key)
    return bundles


def demand(v: ValuationSpec, prices: Mapping[Bundle, Money]) -> Bundle:
    """The bundle a price-taking agent buys from a full price map.

    Requires prices on all 2^m bundles with price(empty) = 0; the result
    therefore always has utility >= 0.
    """
    if len(prices) != 1 << v.m:
        raise ValueError(f"prices must cover all {1 << v.m} bundles")
    row: list[Money] = [ZERO] * (1 << v.m)
    for bundle, p in prices.items():
        row[bundle.mask] = p
    if row[0] != 0:
        raise ValueError("price of the empty bundle must be 0")
    return _optimal_bundles(v, row)[0]


def run_auction(mech: PriceFunction, profile: Profile) -> MechanismRun:
    """Run the PORF mechanism on a reported profile.

    Each agent's price row is computed from the others' reports only, so
    truthful reporting is dominant by construction. Raises
    InfeasibleAllocation if the chosen bundles collide.
    """
    check_caps(m=profile.m, n=len(profile))
    rows: dict[str, tuple] = {}
    chosen: dict[str, Bundle] = {}
    for agent_id, v in profile.agents:
        others = profile.others(agent_id)
        row = mech.price_row(profile.m, others)
        if row[0] != 0:
            raise ValueError(f"{mech.name}: price of the empty bundle must be 0")
        optimal = _optimal_bundles(v, row)
        pick = optimal[0] if len(optimal) == 1 else mech.resolve_tie(agent_id, profile, optimal)
        rows[agent_id] = row
        chosen[agent_id] = pick

    taken: dict[int, str] = {}
    for agent_id, bundle in chosen.items():
        for item in bundle:
            if item in taken:
                raise InfeasibleAllocation(item, sorted((taken[item], agent_id)))
            taken[item] = agent_id

    payments = {a: rows[a][b.mask] for a, b in chosen.items()}
    outcome = Outcome(allocation=chosen, payments=payments)
    return MechanismRun(profile=profile, outcome=outcome, price_rows=rows)


def allocation_rule(mech) -> "callable":
    """Adapt a mechanism to the allocation-rule view X(theta_i, theta_-i)
    used by the allocation-axiom checkers: callable(focal, others) -> Bundle."""

    def allocate(focal: ValuationSpec, others: Sequence[ValuationSpec]) -> Bundle:
        agents = [("_i", focal)] + [(f"_o{k}", v) for k, v in enumerate(others)]
        outcome = mech.run(Profile(agents=tuple(agents), m=focal.m))
        return outcome.bundle("_i")

    return allocate
