"""The mechanism zoo.

Price functions: VCG (rivals' externality), Set (grand-bundle Vickrey),
MB (minimal-bundle conflict pricing), MMVIP (maximum-marginal-value item
pricing), and the automated transform amd:<base> that lifts any feasible
price function to one robust against withdrawal by adding a
profile-dependent surcharge H to every nonempty bundle.

The three-item leveled-division mechanism (lds3) is a direct allocation
procedure rather than a price function; it shares the Outcome interface.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional, Sequence

from .domain import (
    Bundle,
    CapExceeded,
    Money,
    Outcome,
    Profile,
    ZERO,
    get_caps,
    grand_bundle,
)
from .porf import PriceFunction, run_auction
from .valuation import AdditiveValuation, ValuationSpec
from .welfare import efficient_value


class VcgPrice(PriceFunction):
    """chi(S, O) = U(G, O) - U(G without S, O): the externality S imposes."""

    name = "vcg"

    def price(self, s: Bundle, others: Sequence[ValuationSpec]) -> Money:
        if not s or not others:
            return ZERO
        g = grand_bundle(s.m)
        return efficient_value(g, others) - efficient_value(g - s, others)


class SetPrice(PriceFunction):
    """Grand-bundle Vickrey: every nonempty bundle costs the best rival's
    value for everything."""

    name = "set"

    def price(self, s: Bundle, others: Sequence[ValuationSpec]) -> Money:
        if not s:
            return ZERO
        full = (1 << s.m) - 1
        best = ZERO
        for j in others:
            v = j.value_mask(full)
            if v > best:
                best = v
        return best

    def resolve_tie(self, agent_id: str, profile: Profile, optimal: list[Bundle]) -> Bundle:
        # At an exact top-value tie the winner is indifferent between the
        # grand bundle and nothing; hand it to the lowest agent-id so the
        # bundle is still sold, as in a conventional Vickrey tie.
        g = grand_bundle(profile.m)
        if g in optimal:
            values = {a: v.value_mask(g.mask) for a, v in profile.agents}
            top = max(values.values())
            if top > 0 and values[agent_id] == top:
                if agent_id == min(a for a, v in values.items() if v == top):
                    return g
        return optimal[0]


class MbPrice(PriceFunction):
    """A bundle costs the highest-valued rival minimal bundle conflicting
    with it (a minimal bundle beats all of its proper subsets strictly)."""

    name = "mb"

    def price(self, s: Bundle, others: Sequence[ValuationSpec]) -> Money:
        if not s:
            return ZERO
        best = ZERO
        for j in others:
            c = j.minimal_conflict_value(s.mask)
            if c > best:
                best = c
        return best


class MmvipPrice(PriceFunction):
    """Item pricing: each item costs the maximum marginal value any rival
    could have for it, maximized over all bundles the rival might hold."""

    name = "mmvip"

    def price(self, s: Bundle, others: Sequence[ValuationSpec]) -> Money:
        if not s:
            return ZERO
        total = ZERO
        for item in s:
            best = ZERO
            for j in others:
                mm = j.marginal_max(item)
                if mm > best:
                    best = mm
            total += best
        return total


class AmdPrice(PriceFunction):
    """Automated transform: price(S, O) = base(S, O) + H(O) for nonempty S.

    H(O) is computed by dynamic programming over sub-multisets of O:
      h1 = max over disjoint S1, S2 of base(S1+S2) - base(S1) - base(S2)
      h2 = max over nonempty S, j in O of H(O-j) + base(S, O-j) - base(S, O)
      H(O) = max(h1, h2)
    which is exactly enough to restore the two superadditivity conditions
    (discounts for larger bundles; prices increase with agents).
    """

    def __init__(self, base: PriceFunction):
        if not isinstance(base, PriceFunction):
            raise TypeError("amd base must be a price function")
        self.base = base
        self.name = f"amd:{base.name}"
        self.memo: dict[tuple, Fraction] = {}
        self._rows: dict[tuple, tuple] = {}
        self._m: Optional[int] = None

    def _row(self, m: int, T: tuple) -> tuple:
        row = self._rows.get(T)
        if row is None:
            row = self.base.price_row(m, T)
            self._rows[T] = row
        return row

    def h(self, m: int, others: Sequence[ValuationSpec]) -> Money:
        if len(others) > get_caps().n_max:
            raise CapExceeded(
                f"{len(others)} agents exceed cap n_max={get_caps().n_max}"
            )
        if self._m is None:
            self._m = m
        elif self._m != m:
            raise ValueError("one AmdPrice instance serves a single item count")
        return self._h(m, tuple(sorted(others, key=lambda v: v.sort_key)))

    def _h(self, m: int, T: tuple) -> Fraction:
        hit = self.memo.get(T)
        if hit is not None:
            return hit
        full = (1 << m) - 1
        row = self._row(m, T)
        best = ZERO  # attained by S1 = S2 = empty
        for s1 in range(full + 1):
            comp = full & ~s1
            s2 = comp
            while True:
                gap = row[s1 | s2] - row[s1] - row[s2]
                if gap > best:
                    best = gap
                if not s2:
                    break
                s2 = (s2 - 1) & comp
        for idx in range(len(T)):
            if idx and T[idx] == T[idx - 1]:
                continue  # duplicate type: same sub-multiset
            sub = T[:idx] + T[idx + 1 :]
            row_sub = self._row(m, sub)
            h_sub = self._h(m, sub)
            for s in range(1, full + 1):
                gap = h_sub + row_sub[s] - row[s]
                if gap > best:
                    best = gap
        self.memo[T] = best
        return best

    def price(self, s: Bundle, others: Sequence[ValuationSpec]) -> Money:
        if not s:
            return ZERO
        T = tuple(sorted(others, key=lambda v: v.sort_key))
        return self._row(s.m, T)[s.mask] + self.h(s.m, T)


# ---------------------------------------------------------------------------
# Functional views of the zoo (thin wrappers over fresh instances)
# ---------------------------------------------------------------------------

_VCG = VcgPrice()
_SET = SetPrice()
_MB = MbPrice()
_MMVIP = MmvipPrice()


def price_vcg(s: Bundle, others: Sequence[ValuationSpec]) -> Money:
    return _VCG.price(s, others)


def price_set(s: Bundle, others: Sequence[ValuationSpec]) -> Money:
    return _SET.price(s, others)


def price_mb(s: Bundle, others: Sequence[ValuationSpec]) -> Money:
    return _MB.price(s, others)


def price_mmvip(s: Bundle, others: Sequence[ValuationSpec]) -> Money:
    return _MMVIP.price(s, others)


def amd_h(base: PriceFunction, others: Sequence[ValuationSpec], m: Optional[int] = None) -> Money:
    """The surcharge H(others) of the transform applied to ``base``.

    With an empty multiset and no m given this is 0, which is correct for
    every zoo base (their empty-context prices are all 0)."""
    if m is None:
        if not others:
            return ZERO
        m = others[0].m
    return AmdPrice(base).h(m, others)


def amd_price(base: PriceFunction, s: Bundle, others: Sequence[ValuationSpec]) -> Money:
    return AmdPrice(base).price(s, others)


# ---------------------------------------------------------------------------
# The three-item leveled-division mechanism (lds3)
# ---------------------------------------------------------------------------

_LDS3_GRAND_PRICE = Fraction(3)  # reserve 1 per item, three items
_AB, _C, _A, _BC = 0b011, 0b100, 0b001, 0b110
_DUMMY_ID = "__dummy__"


def _lds3_range(ids: Sequence[str]) -> list[dict]:
    """The allowed restricted-range assignments to real agents; whatever is
    left over goes to the dummy (valued 1 per item)."""
    out: list[dict] = [{}]
    for i in ids:
        for piece in (_AB, _C, _A, _BC):
            out.append({i: piece})
    for i in ids:
        for j in ids:
            if i == j:
                continue
            out.append({i: _AB, j: _C})
            out.append({i: _A, j: _BC})
    return out


def _lds3_welfare(alloc: dict, values: dict) -> Fraction:
    used = 0
    total = ZERO
    for i, mask in alloc.items():
        used |= mask
        total += values[i][mask]
    return total + (0b111 ^ used).bit_count()  # dummy picks up the rest at 1 each


def _lds3_best(ids: Sequence[str], values: dict) -> tuple[Fraction, dict]:
    champion = None
    champion_key = None
    for alloc in _lds3_range(ids):
        w = _lds3_welfare(alloc, values)
        items = sum(mask.bit_count() for mask in alloc.values())
        pairs = tuple(sorted(alloc.items()))
        key = (w, items, pairs)
        if champion is None or _lds3_better(key, champion_key):
            champion, champion_key = alloc, key
    return champion_key[0], champion


def _lds3_better(a: tuple, b: tuple) -> bool:
    if a[0] != b[0]:
        return a[0] > b[0]
    if a[1] != b[1]:
        return a[1] < b[1]
    return a[2] < b[2]


def _lds3_restricted_vcg(profile: Profile) -> tuple[dict, dict]:
    """Efficiency-maximizing choice over the restricted range with the
    dummy included, priced by the externality rule over the same range."""
    ids = list(profile.ids)
    values = {a: v.table for a, v in profile.agents}
    w_all, chosen = _lds3_best(ids, values)
    bundles: dict[str, Bundle] = {}
    payments: dict[str, Money] = {}
    for i, mask in chosen.items():
        if not mask:
            continue
        w_without, _ = _lds3_best([j for j in ids if j != i], values)
        pay = w_without - (w_all - values[i][mask])
        bundles[i] = Bundle(mask, 3)
        payments[i] = pay
    return bundles, payments


def run_lds3(profile: Profile) -> Outcome:
    """Three items, reserve price 1, divisions [{AB, C}, {A, BC}].

    If at least two agents value the grand bundle at 3 or more, it is sold
    whole by Vickrey. If none does, a dummy additive agent (1 per item)
    joins and the restricted-range externality mechanism runs. If exactly
    one does, she is the only winner and takes the better of buying
    everything at 3 (ties toward this) or her restricted-range result.
    """
    if profile.m != 3:
        raise ValueError("lds3 is defined for exactly 3 items")
    if len(profile) + 1 > get_caps().n_max:
        raise CapExceeded("profile plus dummy exceeds cap n_max")
    grand = grand_bundle(3)
    values = {a: v.value_mask(0b111) for a, v in profile.agents}
    high = [a for a in profile.ids if values[a] >= _LDS3_GRAND_PRICE]

    allocation = {a: Bundle.empty(3) for a in profile.ids}
    payments: dict[str, Money] = {a: ZERO for a in profile.ids}

    if len(high) >= 2:
        top = max(values.values())
        winner = min(a for a in profile.ids if values[a] == top)
        price = max(values[a] for a in profile.ids if a != winner)
        allocation[winner] = grand
        payments[winner] = price
        return Outcome(allocation=allocation, payments=payments)

    dummy = AdditiveValuation(3, [1, 1, 1])
    extended = Profile(agents=tuple(profile.agents) + ((_DUMMY_ID, dummy),), m=3)
    bundles, pays = _lds3_restricted_vcg(extended)

    if not high:
        for a in profile.ids:
            if a in bundles:
                allocation[a] = bundles[a]
                payments[a] = pays[a]
        return Outcome(allocation=allocation, payments=payments)

    winner = high[0]
    buy_utility = values[winner] - _LDS3_GRAND_PRICE
    alt_bundle = bundles.get(winner, Bundle.empty(3))
    alt_pay = pays.get(winner, ZERO)
    alt_utility = profile.valuation(winner).value(alt_bundle) - alt_pay
    if buy_utility >= alt_utility:
        allocation[winner] = grand
        payments[winner] = _LDS3_GRAND_PRICE
    else:
        allocation[winner] = alt_bundle
        payments[winner] = alt_pay
    return Outcome(allocation=allocation, payments=payments)


class Lds3Mechanism:
    """Outcome-level wrapper so lds3 plugs into the same search and checker
    machinery as the price-function zoo."""

    name = "lds3"

    def run(self, profile: Profile) -> Outcome:
        return run_lds3(profile)

    def __repr__(self) -> str:
        return "<mechanism lds3>"


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------

ZOO_NAMES = ("vcg", "set", "mb", "mmvip", "amd:vcg", "lds3")


def get_mechanism(name: str):
    """Fresh mechanism instance for a CLI identifier; "amd:<base>" composes."""
    if name == "lds3":
        return Lds3Mechanism()
    if name.startswith("amd:"):
        base = get_mechanism(name[len("amd:") :])
        if not isinstance(base, PriceFunction):
            raise ValueError(f"amd base {base.name!r} is not a price function")
        return AmdPrice(base)
    simple = {"vcg": VcgPrice, "set": SetPrice, "mb": MbPrice, "mmvip": MmvipPrice}
    if name in simple:
        return simple[name]()
    raise ValueError(f"unknown mechanism {name!r}")
