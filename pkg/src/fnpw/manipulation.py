"""Exhaustive search for beneficial false-name manipulations.

The manipulator replaces her single truthful report with a multiset of
identities drawn from a finite type pool. Withdrawn identities participate
in the auction but forfeit their items and payments afterwards; the
manipulator keeps the union of the kept identities' bundles and pays the
sum of their payments. A plan is returned only if it strictly beats the
truthful single-identity utility.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Optional, Sequence

from .domain import Bundle, CapExceeded, Money, Profile, ZERO, get_caps, money_to_string
from .porf import InfeasibleAllocation
from .valuation import ValuationSpec


@dataclass(frozen=True)
class ManipulationPlan:
    """A strictly beneficial multi-identity strategy."""

    kept: tuple
    withdrawn: tuple
    bundle: Bundle
    payment: Money
    gain: Money
    truthful: Money

    def __post_init__(self):
        if not self.kept:
            raise ValueError("a plan keeps at least one identity")

    @property
    def pure(self) -> bool:
        """True when nothing is withdrawn (a plain false-name plan)."""
        return not self.withdrawn

    def to_jsonable(self) -> dict:
        return {
            "kept": [v.to_jsonable() for v in self.kept],
            "withdrawn": [v.to_jsonable() for v in self.withdrawn],
            "bundle": list(self.bundle.items),
            "payment": money_to_string(self.payment),
            "gain": money_to_string(self.gain),
            "truthful_utility": money_to_string(self.truthful),
        }


def _profile(m: int, others: Sequence[ValuationSpec], extra: Sequence[tuple]) -> Profile:
    agents = tuple((f"o{k}", v) for k, v in enumerate(others)) + tuple(extra)
    return Profile(agents=agents, m=m)


def truthful_utility(mech, truth: ValuationSpec, others: Sequence[ValuationSpec]) -> Money:
    """Value minus payment when reporting the true type with one identity."""
    outcome = mech.run(_profile(truth.m, others, (("i", truth),)))
    return truth.value(outcome.bundle("i")) - outcome.payment("i")


def simulate_identities(
    mech,
    others: Sequence[ValuationSpec],
    kept: Sequence[ValuationSpec],
    withdrawn: Sequence[ValuationSpec],
) -> tuple[Bundle, Money]:
    """Run the auction with all identities present; return the union of the
    kept identities' bundles and the sum of their payments."""
    m = (list(kept) + list(others) + list(withdrawn))[0].m
    extra = tuple((f"f{k}", v) for k, v in enumerate(kept)) + tuple(
        (f"w{k}", v) for k, v in enumerate(withdrawn)
    )
    outcome = mech.run(_profile(m, others, extra))
    mask = 0
    payment = ZERO
    for k in range(len(kept)):
        mask |= outcome.bundle(f"f{k}").mask
        payment += outcome.payment(f"f{k}")
    return Bundle(mask, m), payment


def replay_gain(
    mech, truth: ValuationSpec, others: Sequence[ValuationSpec], plan: ManipulationPlan
) -> Money:
    """Recompute a plan's gain from a fresh auction run (soundness check)."""
    bundle, payment = simulate_identities(mech, others, plan.kept, plan.withdrawn)
    return truth.value(bundle) - payment - truthful_utility(mech, truth, others)


def find_fnpw_manipulation(
    mech,
    truth: ValuationSpec,
    others: Sequence[ValuationSpec],
    pool: Sequence[ValuationSpec],
    k_max: int = 2,
    q_max: int = 2,
    allow_withdrawal: bool = True,
    on_infeasible: str = "raise",
    total_max: Optional[int] = None,
) -> Optional[ManipulationPlan]:
    """Exhaustively search identity multisets from the pool.

    Identities split into kept (1..k_max) and withdrawn (0..q_max; forced 0
    when withdrawal is disabled). The truth itself always belongs to the
    search space, so None means the truthful single identity is optimal
    within the pool. Ties prefer fewer identities, then enumeration order.

    total_max, when given, caps the whole auction size
    (others + kept + withdrawn), which keeps searches comparable with
    fixed-size condition sweeps. on_infeasible: "raise" propagates engine
    collisions, "skip" discards the offending identity combination.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    if q_max < 0:
        raise ValueError("q_max must be >= 0")
    if on_infeasible not in ("raise", "skip"):
        raise ValueError("on_infeasible must be 'raise' or 'skip'")
    if not allow_withdrawal:
        q_max = 0
    if len(others) + k_max + q_max > get_caps().n_max and total_max is None:
        raise CapExceeded(
            f"search needs up to {len(others) + k_max + q_max} agents; "
            f"cap n_max={get_caps().n_max}"
        )
    budget = total_max if total_max is not None else len(others) + k_max + q_max
    if budget > get_caps().n_max:
        raise CapExceeded(f"total_max={budget} exceeds cap n_max={get_caps().n_max}")

    types: list[ValuationSpec] = []
    for v in (truth, *pool):
        if v not in types:
            types.append(v)

    baseline = truthful_utility(mech, truth, others)
    best: Optional[ManipulationPlan] = None
    for k in range(1, k_max + 1):
        if len(others) + k > budget:
            break
        for kept in combinations_with_replacement(types, k):
            for q in range(0, min(q_max, budget - len(others) - k) + 1):
                for withdrawn in combinations_with_replacement(types, q):
                    try:
                        bundle, payment = simulate_identities(mech, others, kept, withdrawn)
                    except InfeasibleAllocation:
                        if on_infeasible == "raise":
                            raise
                        continue
                    gain = truth.value(bundle) - payment - baseline
                    if gain <= 0:
                        continue
                    if (
                        best is None
                        or gain > best.gain
                        or (gain == best.gain and k + q < len(best.kept) + len(best.withdrawn))
                    ):
                        best = ManipulationPlan(
                            kept=kept,
                            withdrawn=withdrawn,
                            bundle=bundle,
                            payment=payment,
                            gain=gain,
                            truthful=baseline,
                        )
    return best
