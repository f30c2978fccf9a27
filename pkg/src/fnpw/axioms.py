"""Brute-force checkers for every axiom, each returning pass or a
re-verifiable counterexample certificate.

Universal quantifiers over the (infinite) type space are replaced by
finite type pools; every report carries the number of enumerated cases, so
"pass" always means "no violation in the swept universe". Failures carry
the exact quantified witnesses.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement, product
from typing import Iterable, Mapping, Optional, Sequence

from .domain import Bundle, CheckReport, Money, Profile, ZERO
from .porf import PriceFunction, run_auction
from .valuation import ValuationSpec, validate
from .welfare import efficient_value

__all__ = [
    "CheckReport",
    "TypePool",
    "check_dlb",
    "check_pia",
    "check_snsaw",
    "check_nsa",
    "check_nsaw",
    "check_weak_monotonicity",
    "check_subadditivity",
    "check_withdrawal_monotonicity",
    "check_submodularity",
    "check_scf_strategyproof",
    "check_scf_fnpw",
    "multisets",
]


@dataclass(frozen=True)
class TypePool:
    """A finite stand-in for the type space: the universe the checkers sweep."""

    types: tuple
    m: int

    def __post_init__(self):
        object.__setattr__(self, "types", tuple(self.types))
        for v in self.types:
            if v.m != self.m:
                raise ValueError("pool types must share the item count")
            report = validate(v)
            if not report:
                raise ValueError(f"invalid pool type {v!r}: {report.counterexample}")

    def __iter__(self):
        return iter(self.types)

    def __len__(self):
        return len(self.types)


def _pool_types(pool) -> tuple:
    return tuple(pool.types) if isinstance(pool, TypePool) else tuple(pool)


def multisets(types: Sequence, max_size: int, min_size: int = 0) -> Iterable[tuple]:
    """All multisets of the given types with min_size <= size <= max_size,
    in deterministic (size, lexicographic) order."""
    for size in range(min_size, max_size + 1):
        yield from combinations_with_replacement(types, size)


def _require_price_function(mech) -> PriceFunction:
    if not isinstance(mech, PriceFunction):
        raise TypeError(
            f"{getattr(mech, 'name', mech)!r} has no price function; "
            "this checker applies to price-function mechanisms only"
        )
    return mech


# ---------------------------------------------------------------------------
# Price-function conditions
# ---------------------------------------------------------------------------


def check_dlb(mech: PriceFunction, others: Sequence[ValuationSpec]) -> CheckReport:
    """Discounts for larger bundles: prices of two disjoint bundles sum to
    at least the price of their union."""
    _require_price_function(mech)
    if not others:
        m = None
        return CheckReport(True, cases=0, note="empty context: nothing to price")
    m = others[0].m
    row = mech.price_row(m, others)
    full = (1 << m) - 1
    cases = 0
    for s1 in range(full + 1):
        comp = full & ~s1
        s2 = comp
        while True:
            cases += 1
            if row[s1] + row[s2] < row[s1 | s2]:
                return CheckReport(
                    False,
                    {
                        "others": list(others),
                        "S1": Bundle(s1, m),
                        "S2": Bundle(s2, m),
                        "price(S1)": row[s1],
                        "price(S2)": row[s2],
                        "price(union)": row[s1 | s2],
                    },
                    cases=cases,
                )
            if not s2:
                break
            s2 = (s2 - 1) & comp
    return CheckReport(True, cases=cases)


def check_pia(
    mech: PriceFunction, others: Sequence[ValuationSpec], extra: ValuationSpec
) -> CheckReport:
    """Prices increase with agents: adding one agent never lowers a price."""
    _require_price_function(mech)
    m = extra.m
    before = mech.price_row(m, others)
    after = mech.price_row(m, tuple(others) + (extra,))
    cases = 0
    for mask in range(1 << m):
        cases += 1
        if after[mask] < before[mask]:
            return CheckReport(
                False,
                {
                    "others": list(others),
                    "extra": extra,
                    "S": Bundle(mask, m),
                    "price_before": before[mask],
                    "price_after": after[mask],
                },
                cases=cases,
            )
    return CheckReport(True, cases=cases)


def check_snsaw(mech: PriceFunction, pool, max_n: int) -> CheckReport:
    """Sufficient condition sweep: DLB and PIA over every multiset of pool
    types up to size max_n, with every pool type as the joining agent."""
    _require_price_function(mech)
    types = _pool_types(pool)
    cases = 0
    for others in multisets(types, max_n):
        sub = check_dlb(mech, others)
        cases += sub.cases
        if not sub:
            sub.cases = cases
            sub.note = "DLB violated"
            return sub
        for extra in types:
            sub = check_pia(mech, others, extra)
            cases += sub.cases
            if not sub:
                sub.cases = cases
                sub.note = "PIA violated"
                return sub
    return CheckReport(True, cases=cases)


def _nsaw_impl(mech: PriceFunction, agents: Sequence[ValuationSpec], allow_z: bool) -> CheckReport:
    _require_price_function(mech)
    agents = tuple(agents)
    if not agents:
        return CheckReport(True, cases=0, note="no agents")
    m = agents[0].m
    ids = tuple(f"a{k}" for k in range(len(agents)))
    profile = Profile(agents=tuple(zip(ids, agents)), m=m)
    run = run_auction(mech, profile)
    bundles = [run.outcome.bundle(i).mask for i in ids]
    payments = [run.outcome.payment(i) for i in ids]
    n = len(agents)
    cases = 0
    for y_mask in range(1, 1 << n):
        rest_pool = ((1 << n) - 1) & ~y_mask
        z_mask = 0
        while True:
            cases += 1
            lhs = ZERO
            union = 0
            for k in range(n):
                if y_mask >> k & 1:
                    lhs += payments[k]
                    union |= bundles[k]
            others = tuple(
                sorted(
                    (agents[k] for k in range(n) if not ((y_mask | z_mask) >> k & 1)),
                    key=lambda v: v.sort_key,
                )
            )
            rhs = mech.price(Bundle(union, m), others)
            if lhs < rhs:
                return CheckReport(
                    False,
                    {
                        "O": list(agents),
                        "Y": [k for k in range(n) if y_mask >> k & 1],
                        "Z": [k for k in range(n) if z_mask >> k & 1],
                        "won_bundles": [Bundle(b, m) for b in bundles],
                        "kept_price_sum": lhs,
                        "union_price": rhs,
                    },
                    cases=cases,
                )
            if not allow_z:
                break
            z_mask = (z_mask - rest_pool) & rest_pool
            if z_mask == 0:
                break
    return CheckReport(True, cases=cases)


def check_nsaw(mech: PriceFunction, agents: Sequence[ValuationSpec]) -> CheckReport:
    """No superadditive price increase with withdrawal: run the auction on
    O; for disjoint Y (kept) and Z (withdrawn), the kept winners' payments
    must cover the price of their combined winnings with Y and Z gone."""
    return _nsaw_impl(mech, agents, allow_z=True)


def check_nsa(mech: PriceFunction, agents: Sequence[ValuationSpec]) -> CheckReport:
    """The no-withdrawal restriction of check_nsaw (Z forced empty)."""
    return _nsaw_impl(mech, agents, allow_z=False)


# ---------------------------------------------------------------------------
# Allocation-rule conditions (apply to any mechanism with .run)
# ---------------------------------------------------------------------------


def _alloc(mech, focal: ValuationSpec, others: Sequence[ValuationSpec]) -> Bundle:
    agents = (("_i", focal),) + tuple((f"_o{k}", v) for k, v in enumerate(others))
    return mech.run(Profile(agents=agents, m=focal.m)).bundle("_i")


def check_weak_monotonicity(mech, pool, others: Sequence[ValuationSpec]) -> CheckReport:
    """v(t, X(t)) - v(t, X(t')) >= v(t', X(t)) - v(t', X(t')) for all t, t'."""
    types = _pool_types(pool)
    alloc = {t: _alloc(mech, t, others) for t in types}
    cases = 0
    for t in types:
        for t2 in types:
            cases += 1
            lhs = t.value(alloc[t]) - t.value(alloc[t2])
            rhs = t2.value(alloc[t]) - t2.value(alloc[t2])
            if lhs < rhs:
                return CheckReport(
                    False,
                    {
                        "theta": t,
                        "theta_prime": t2,
                        "X(theta)": alloc[t],
                        "X(theta_prime)": alloc[t2],
                        "others": list(others),
                    },
                    cases=cases,
                )
    return CheckReport(True, cases=cases)


def check_subadditivity(
    mech, pool, others: Sequence[ValuationSpec], k_max: int = 2
) -> CheckReport:
    """Splitting condition on the allocation rule: whenever k identities
    jointly reproduce X(theta_i) and each prime type theta'_il wins a
    superset of theta_il's bundle at equal own value (with theta'_i winning
    value 0 alone), the prime value of X(theta_i) is covered by the sum of
    the prime values of the split bundles. Premises are exact equalities."""
    types = _pool_types(pool)
    others = tuple(others)
    single = {t: _alloc(mech, t, others) for t in types}
    cases = 0

    group_runs: dict[tuple, dict] = {}

    def group_alloc(kept: tuple) -> dict:
        # all k identities present at once; returns index -> Bundle
        hit = group_runs.get(kept)
        if hit is None:
            agents = tuple((f"_k{k}", v) for k, v in enumerate(kept)) + tuple(
                (f"_o{k}", v) for k, v in enumerate(others)
            )
            out = mech.run(Profile(agents=agents, m=kept[0].m))
            hit = {k: out.bundle(f"_k{k}") for k in range(len(kept))}
            group_runs[kept] = hit
        return hit

    subst_runs: dict[tuple, Bundle] = {}

    def subst_alloc(kept: tuple, slot: int, prime: ValuationSpec) -> Bundle:
        key = (kept, slot, prime)
        hit = subst_runs.get(key)
        if hit is None:
            context = kept[:slot] + kept[slot + 1 :]
            hit = _alloc(mech, prime, context + others)
            subst_runs[key] = hit
        return hit

    for k in range(1, k_max + 1):
        for kept in product(types, repeat=k):
            bundles = group_alloc(kept)
            union = 0
            for b in bundles.values():
                union |= b.mask
            for t_i in types:
                if single[t_i].mask != union:
                    continue
                for t_i_prime in types:
                    if t_i_prime.value(single[t_i_prime]) != 0:
                        continue
                    for primes in product(types, repeat=k):
                        cases += 1
                        ok = True
                        for slot in range(k):
                            won = subst_alloc(kept, slot, primes[slot])
                            base = bundles[slot]
                            if not base.issubset(won):
                                ok = False
                                break
                            if primes[slot].value(won) != primes[slot].value(base):
                                ok = False
                                break
                        if not ok:
                            continue
                        lhs = t_i_prime.value(single[t_i])
                        rhs = sum(
                            (primes[slot].value(bundles[slot]) for slot in range(k)),
                            ZERO,
                        )
                        if lhs > rhs:
                            return CheckReport(
                                False,
                                {
                                    "theta_i": t_i,
                                    "theta_i_prime": t_i_prime,
                                    "identities": list(kept),
                                    "prime_identities": list(primes),
                                    "X(theta_i)": single[t_i],
                                    "split_bundles": [bundles[s] for s in range(k)],
                                    "lhs": lhs,
                                    "rhs": rhs,
                                    "others": list(others),
                                },
                                cases=cases,
                            )
    return CheckReport(True, cases=cases)


def check_withdrawal_monotonicity(
    mech, pool, others: Sequence[ValuationSpec]
) -> CheckReport:
    """If theta_L wins nothing alone and theta_U (with one extra agent
    present) wins exactly X(theta_i), then theta_L's value for X(theta_i)
    cannot exceed theta_U's."""
    types = _pool_types(pool)
    others = tuple(others)
    single = {t: _alloc(mech, t, others) for t in types}
    with_extra: dict[tuple, Bundle] = {}
    cases = 0
    for t_i in types:
        x_i = single[t_i]
        for t_l in types:
            if t_l.value(single[t_l]) != 0:
                continue
            for t_a in types:
                for t_u in types:
                    key = (t_u, t_a)
                    if key not in with_extra:
                        with_extra[key] = _alloc(mech, t_u, others + (t_a,))
                    if with_extra[key] != x_i:
                        continue
                    cases += 1
                    if t_l.value(x_i) > t_u.value(x_i):
                        return CheckReport(
                            False,
                            {
                                "theta_i": t_i,
                                "theta_L": t_l,
                                "theta_U": t_u,
                                "theta_a": t_a,
                                "X(theta_i)": x_i,
                                "v_L": t_l.value(x_i),
                                "v_U": t_u.value(x_i),
                                "others": list(others),
                            },
                            cases=cases,
                        )
    return CheckReport(True, cases=cases)


# ---------------------------------------------------------------------------
# Type-space and social-choice conditions
# ---------------------------------------------------------------------------


def check_submodularity(pool, max_n: int) -> CheckReport:
    """U(S1, Y) + U(S2, Y) >= U(S1 + S2, Y) + U(S1 & S2, Y) over all
    multisets Y from the pool up to size max_n and all bundle pairs."""
    types = _pool_types(pool)
    if not types:
        return CheckReport(True, cases=0, note="empty pool")
    m = types[0].m
    g = 1 << m
    cases = 0
    for y in multisets(types, max_n):
        for s1 in range(g):
            for s2 in range(g):
                cases += 1
                lhs = efficient_value(Bundle(s1, m), y) + efficient_value(Bundle(s2, m), y)
                rhs = efficient_value(Bundle(s1 | s2, m), y) + efficient_value(
                    Bundle(s1 & s2, m), y
                )
                if lhs < rhs:
                    return CheckReport(
                        False,
                        {
                            "Y": list(y),
                            "S1": Bundle(s1, m),
                            "S2": Bundle(s2, m),
                            "U(S1)+U(S2)": lhs,
                            "U(union)+U(intersection)": rhs,
                        },
                        cases=cases,
                    )
    return CheckReport(True, cases=cases)


def _scf_types(table: Mapping[tuple, object]) -> tuple:
    seen = []
    for profile in table:
        for t in profile:
            if t not in seen:
                seen.append(t)
    return tuple(sorted(seen, key=str))


def check_scf_strategyproof(
    table: Mapping[tuple, object],
    utilities: Mapping[tuple, Money],
    types: Optional[Sequence] = None,
) -> CheckReport:
    """A tabulated social choice function is strategy-proof iff every
    agent's outcome is her favorite among the outcomes she can reach by
    varying her own report (checked at every position of every profile)."""
    types = tuple(types) if types is not None else _scf_types(table)

    def util(t, outcome) -> Money:
        try:
            return utilities[(t, outcome)]
        except KeyError as exc:
            raise ValueError(f"incomplete utilities: missing {(t, outcome)!r}") from exc

    cases = 0
    for profile, chosen in table.items():
        for pos, t_i in enumerate(profile):
            cases += 1
            actual = util(t_i, chosen)
            for t_alt in types:
                alt_profile = profile[:pos] + (t_alt,) + profile[pos + 1 :]
                if alt_profile not in table:
                    raise ValueError(f"incomplete table: missing profile {alt_profile!r}")
                reachable = table[alt_profile]
                if util(t_i, reachable) > actual:
                    return CheckReport(
                        False,
                        {
                            "profile": list(profile),
                            "agent_position": pos,
                            "true_type": str(t_i),
                            "misreport": str(t_alt),
                            "honest_outcome": str(chosen),
                            "better_outcome": str(reachable),
                        },
                        cases=cases,
                    )
    return CheckReport(True, cases=cases)


DEMO_SCF_NAMES = ("majority", "two_threshold", "minority")


def build_demo_scf(name: str, max_agents: int = 4) -> tuple[dict, dict]:
    """Small tabulated social choice rules over two types, for the checkers.

    prefers-x ("px") values outcome x at 1 and y at 0; "py" the reverse.
    majority: x wins ties; two_threshold: x iff at least two agents report
    px; minority: the less-reported outcome wins, x on ties.
    """
    if name not in DEMO_SCF_NAMES:
        raise ValueError(f"unknown demo rule {name!r}; choose from {DEMO_SCF_NAMES}")
    types = ("px", "py")

    def choose(profile: tuple) -> str:
        nx = profile.count("px")
        ny = profile.count("py")
        if name == "majority":
            return "x" if nx >= ny else "y"
        if name == "two_threshold":
            return "x" if nx >= 2 else "y"
        return ("x" if nx <= ny else "y")  # minority, ties to x

    table: dict[tuple, str] = {}
    queue: list[tuple] = [()]
    for _ in range(max_agents):
        queue = [p + (t,) for p in queue for t in types]
        for p in queue:
            table[p] = choose(p)
    utilities = {
        ("px", "x"): Fraction(1),
        ("px", "y"): Fraction(0),
        ("py", "x"): Fraction(0),
        ("py", "y"): Fraction(1),
    }
    return table, utilities


def check_scf_fnpw(
    table: Mapping[tuple, object], types: Optional[Sequence] = None
) -> CheckReport:
    """False-name robustness of a tabulated social choice function: adding
    another agent never enlarges the set of outcomes an agent can reach."""
    types = tuple(types) if types is not None else _scf_types(table)
    rests = {profile[1:] for profile in table if profile} | {()}
    covered = {
        rest: frozenset(table[(t,) + rest] for t in types)
        for rest in rests
        if all((t,) + rest in table for t in types)
    }
    cases = 0
    for rest in sorted(covered, key=lambda r: (len(r), tuple(map(str, r)))):
        attainable = covered[rest]
        for t0 in types:
            extended = rest + (t0,)
            if extended not in covered:
                continue
            cases += 1
            grown = covered[extended] - attainable
            if grown:
                return CheckReport(
                    False,
                    {
                        "others": [str(t) for t in rest],
                        "added_type": str(t0),
                        "attainable_before": sorted(str(o) for o in attainable),
                        "attainable_after": sorted(str(o) for o in covered[extended]),
                        "escaped_outcome": sorted(str(o) for o in grown),
                    },
                    cases=cases,
                )
    return CheckReport(True, cases=cases)
