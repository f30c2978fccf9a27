"""Efficient-allocation oracle: exact winner determination by exhaustive search.

U(S, Y) is the best total value achievable by assigning the items of S to
the agents of Y (each item to at most one agent). The value query runs on
the integer kernels behind an LRU keyed by the canonicalized agent
multiset; the argmax companion additionally applies a fixed, documented
tie-break so that every fixture is reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import lcm
from typing import Mapping, Sequence

from . import _kernels
from .domain import Bundle, CapExceeded, Money, ZERO, get_caps
from .valuation import ValuationSpec


@dataclass(frozen=True)
class AllocationResult:
    """An efficient assignment: its total value and per-agent bundles."""

    total: Money
    assignment: Mapping[str, Bundle]

    def __post_init__(self):
        object.__setattr__(self, "assignment", dict(self.assignment))


def _canonical(agents: Sequence[ValuationSpec], m: int) -> tuple:
    for v in agents:
        if v.m != m:
            raise ValueError(f"mismatched item counts: valuation m={v.m}, bundle m={m}")
    if len(agents) > get_caps().n_max:
        raise CapExceeded(f"{len(agents)} agents exceed cap n_max={get_caps().n_max}")
    return tuple(sorted(agents, key=lambda v: v.sort_key))


@lru_cache(maxsize=1 << 17)
def _u(mask: int, vals: tuple) -> Fraction:
    if mask == 0 or not vals:
        return ZERO
    den = lcm(*(v.denominator for v in vals))
    tables = [v.int_table(den) for v in vals]
    return Fraction(_kernels.max_welfare(tables, mask), den)


def efficient_value(s: Bundle, agents: Sequence[ValuationSpec]) -> Money:
    """U(S, Y): max total value over disjoint assignments of S's items."""
    return _u(s.mask, _canonical(agents, s.m))


def clear_welfare_cache() -> None:
    _u.cache_clear()


def efficient_allocation(
    s: Bundle, agents: Sequence[tuple[str, ValuationSpec]]
) -> AllocationResult:
    """An assignment achieving efficient_value.

    Ties are broken deterministically: fewest total items assigned, then
    the lexicographically smallest list of (agent-id, bundle-index) winner
    pairs, with agents ordered by id.
    """
    _canonical([v for _, v in agents], s.m)
    order = sorted(agents, key=lambda av: av[0])
    tables = [v.table for _, v in order]
    n = len(order)
    memo: dict[tuple[int, int], tuple] = {}

    def best(idx: int, mask: int) -> tuple:
        # returns (total_value, item_count, winner_pairs, bundle_masks)
        if idx == n:
            return (ZERO, 0, (), ())
        key = (idx, mask)
        hit = memo.get(key)
        if hit is not None:
            return hit
        table = tables[idx]
        champion = None
        b = 0
        while True:
            rest = best(idx + 1, mask ^ b)
            pair = ((order[idx][0], b),) if b else ()
            cand = (
                table[b] + rest[0],
                b.bit_count() + rest[1],
                pair + rest[2],
                (b,) + rest[3],
            )
            if champion is None or _better(cand, champion):
                champion = cand
            if b == mask:
                break
            b = (b - mask) & mask  # next submask of mask in increasing order
        memo[key] = champion
        return champion

    total, _, _, masks = best(0, s.mask)
    assignment = {aid: Bundle(b, s.m) for (aid, _), b in zip(order, masks)}
    return AllocationResult(total=total, assignment=assignment)


def _better(a: tuple, b: tuple) -> bool:
    """Higher value, then fewer items, then smaller winner-pair list."""
    if a[0] != b[0]:
        return a[0] > b[0]
    if a[1] != b[1]:
        return a[1] < b[1]
    return a[2] < b[2]
