"""Agent types: valuation representations, validation, and random generators.

Every valuation exposes a full table over all 2^m bundles (one uniform
evaluation path) plus an integer-scaled view of that table used by the
winner-determination kernels. Two valuations are equal iff they define the
same value function over the same m, regardless of representation.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from random import Random
from typing import Any, Optional, Sequence

from . import _kernels
from .domain import (
    Bundle,
    CheckReport,
    Money,
    ZERO,
    as_money,
    check_caps,
    item_label,
    money_to_string,
)

_DYADIC_BITS = 53
_DYADIC_DEN = 1 << _DYADIC_BITS


class ValuationSpec:
    """Base class: a monotone valuation over bundles of m items."""

    kind = "abstract"

    def __init__(self, m: int):
        check_caps(m=m)
        self.m = int(m)
        self._table: Optional[tuple] = None
        self._den: Optional[int] = None
        self._int_tables: dict[int, tuple] = {}
        self._marginal_max: Optional[tuple] = None
        self._minimal: Optional[frozenset] = None
        self._minimal_conflict: Optional[tuple] = None
        self._sort_key = None
        self._hash: Optional[int] = None

    # -- evaluation -------------------------------------------------------

    def _build_table(self) -> tuple:
        raise NotImplementedError

    @property
    def table(self) -> tuple:
        """Values over all 2^m bundles, indexed by bundle bitmask."""
        if self._table is None:
            self._table = self._build_table()
        return self._table

    def value_mask(self, mask: int) -> Money:
        return self.table[mask]

    def value(self, s: Bundle) -> Money:
        if s.m != self.m:
            raise ValueError(f"mismatched item counts: bundle m={s.m}, valuation m={self.m}")
        return self.table[s.mask]

    # -- integer-scaled views for the kernels ------------------------------

    @property
    def denominator(self) -> int:
        if self._den is None:
            self._den = lcm(*(v.denominator for v in self.table))
        return self._den

    def int_table(self, den: int) -> tuple:
        """Numerators of the table over the common denominator ``den``."""
        cached = self._int_tables.get(den)
        if cached is None:
            cached = tuple(v.numerator * (den // v.denominator) for v in self.table)
            self._int_tables[den] = cached
        return cached

    def marginal_max(self, item: int) -> Money:
        """Max over S not containing the item of v(S + item) - v(S)."""
        if self._marginal_max is None:
            den = self.denominator
            tab = self.int_table(den)
            full = (1 << self.m) - 1
            self._marginal_max = tuple(
                Fraction(_kernels.max_marginal(tab, 1 << i, full), den)
                for i in range(self.m)
            )
        return self._marginal_max[item]

    def minimal_conflict_value(self, mask: int) -> Money:
        """Highest value among this agent's minimal bundles that intersect
        the given bundle bitmask (0 when none conflicts)."""
        if self._minimal_conflict is None:
            mins = [(b.mask, self.table[b.mask]) for b in minimal_bundles(self)]
            arr = [ZERO] * (1 << self.m)
            for smask in range(1, 1 << self.m):
                best = ZERO
                for bmask, val in mins:
                    if bmask & smask and val > best:
                        best = val
                arr[smask] = best
            self._minimal_conflict = tuple(arr)
        return self._minimal_conflict[mask]

    # -- identity -----------------------------------------------------------

    @property
    def sort_key(self) -> tuple:
        if self._sort_key is None:
            self._sort_key = (
                self.m,
                tuple((v.numerator, v.denominator) for v in self.table),
            )
        return self._sort_key

    def __eq__(self, other) -> bool:
        if not isinstance(other, ValuationSpec):
            return NotImplemented
        return self.m == other.m and self.table == other.table

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.sort_key)
        return self._hash

    # -- serialization ------------------------------------------------------

    def to_jsonable(self) -> dict:
        raise NotImplementedError

    def describe(self) -> str:
        raise NotImplementedError

    def __repr__(self) -> str:
        return self.describe()


class ExplicitValuation(ValuationSpec):
    """A valuation given as an explicit table over all 2^m bundles.

    The table is not required to be monotone at construction time so that
    validate() can report violations; mechanisms assume validated input.
    """

    kind = "explicit"

    def __init__(self, m: int, values: Sequence[Any]):
        super().__init__(m)
        if len(values) != 1 << m:
            raise ValueError(f"explicit table needs {1 << m} entries, got {len(values)}")
        self.values = tuple(as_money(v) for v in values)

    def _build_table(self) -> tuple:
        return self.values

    def to_jsonable(self) -> dict:
        return {
            "kind": self.kind,
            "m": self.m,
            "values": [money_to_string(v) for v in self.values],
        }

    def describe(self) -> str:
        cells = ", ".join(
            f"{Bundle(mask, self.m).label()}:{v}" for mask, v in enumerate(self.values)
        )
        return f"Explicit({cells})"


class AdditiveValuation(ValuationSpec):
    """Item-additive valuation: v(S) is the sum of per-item values."""

    kind = "additive"

    def __init__(self, m: int, per_item: Sequence[Any]):
        super().__init__(m)
        if len(per_item) != m:
            raise ValueError(f"need {m} per-item values, got {len(per_item)}")
        self.per_item = tuple(as_money(v) for v in per_item)

    def _build_table(self) -> tuple:
        table = [ZERO] * (1 << self.m)
        for mask in range(1, 1 << self.m):
            low = mask & -mask
            table[mask] = table[mask ^ low] + self.per_item[low.bit_length() - 1]
        return tuple(table)

    def to_jsonable(self) -> dict:
        return {
            "kind": self.kind,
            "m": self.m,
            "items": [money_to_string(v) for v in self.per_item],
        }

    def describe(self) -> str:
        return f"Additive({', '.join(str(v) for v in self.per_item)})"


class SingleMindedValuation(ValuationSpec):
    """Values a fixed target bundle (and its supersets) at one amount."""

    kind = "single_minded"

    def __init__(self, m: int, target: Bundle, amount: Any):
        super().__init__(m)
        if target.m != m:
            raise ValueError("target bundle must be over the same m")
        self.target = target
        self.amount = as_money(amount)

    def _build_table(self) -> tuple:
        want = self.target.mask
        return tuple(
            self.amount if mask & want == want and want else ZERO
            for mask in range(1 << self.m)
        )

    def to_jsonable(self) -> dict:
        return {
            "kind": self.kind,
            "m": self.m,
            "target": list(self.target.items),
            "value": money_to_string(self.amount),
        }

    def describe(self) -> str:
        return f"SingleMinded({self.target.label()}, {self.amount})"


def valuation_from_jsonable(obj: dict) -> ValuationSpec:
    """Inverse of to_jsonable for every valuation kind."""
    try:
        kind = obj["kind"]
        m = int(obj["m"])
        if kind == "explicit":
            return ExplicitValuation(m, [as_money(v) for v in obj["values"]])
        if kind == "additive":
            return AdditiveValuation(m, [as_money(v) for v in obj["items"]])
        if kind == "single_minded":
            target = Bundle.from_items([int(i) for i in obj["target"]], m)
            return SingleMindedValuation(m, target, as_money(obj["value"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"bad valuation document: {exc}") from exc
    raise ValueError(f"unknown valuation kind {obj.get('kind')!r}")


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def validate(v: ValuationSpec) -> CheckReport:
    """Check v(empty) = 0, nonnegativity, and free disposal over all bundles."""
    table = v.table
    cases = 0
    if table[0] != 0:
        return CheckReport(
            False, {"reason": "v(empty) != 0", "value": table[0]}, cases=1
        )
    for mask in range(1 << v.m):
        cases += 1
        if table[mask] < 0:
            return CheckReport(
                False,
                {"reason": "negative value", "bundle": Bundle(mask, v.m), "value": table[mask]},
                cases=cases,
            )
        for i in range(v.m):
            bit = 1 << i
            if mask & bit:
                continue
            cases += 1
            if table[mask] > table[mask | bit]:
                return CheckReport(
                    False,
                    {
                        "reason": "monotonicity violated",
                        "B1": Bundle(mask, v.m),
                        "B2": Bundle(mask | bit, v.m),
                        "v(B1)": table[mask],
                        "v(B2)": table[mask | bit],
                    },
                    cases=cases,
                )
    return CheckReport(True, cases=cases)


def marginal_value(v: ValuationSpec, s: Bundle, item: int) -> Money:
    """v(S + item) - v(S); requires the item not already in S."""
    if not 0 <= item < v.m:
        raise ValueError(f"item {item} out of range for m={v.m}")
    if item in s:
        raise ValueError(f"item {item_label(item)} already in {s.label()}")
    return v.value_mask(s.mask | (1 << item)) - v.value_mask(s.mask)


def minimal_bundles(v: ValuationSpec) -> set[Bundle]:
    """Nonempty bundles strictly more valuable than every proper subset."""
    if v._minimal is None:
        table = v.table
        found = []
        for mask in range(1, 1 << v.m):
            value = table[mask]
            sub = (mask - 1) & mask
            minimal = True
            while True:
                if table[sub] >= value:
                    minimal = False
                    break
                if not sub:
                    break
                sub = (sub - 1) & mask
            if minimal:
                found.append(Bundle(mask, v.m))
        v._minimal = frozenset(found)
    return set(v._minimal)


GENERATE_MODES = ("substitutable", "complementary", "additive", "single_minded")


def _uniform(rng: Random) -> Fraction:
    """A U(0,1) draw realized as a 53-bit dyadic rational."""
    return Fraction(rng.getrandbits(_DYADIC_BITS), _DYADIC_DEN)


def generate(mode: str, m: int, rng: Random) -> ValuationSpec:
    """Draw a random valuation. The two-item substitutable/complementary
    modes mirror the benchmark distributions: per-item values are U(0,1),
    the joint value is U(max, sum) resp. (sum)(1 + U(0,1))."""
    mode = mode.replace("-", "_")
    if mode == "substitutable":
        if m != 2:
            raise ValueError("substitutable mode is defined for m=2 only")
        va, vb = _uniform(rng), _uniform(rng)
        lo, hi = max(va, vb), va + vb
        vab = lo + _uniform(rng) * (hi - lo)
        return ExplicitValuation(2, [ZERO, va, vb, vab])
    if mode == "complementary":
        if m != 2:
            raise ValueError("complementary mode is defined for m=2 only")
        va, vb = _uniform(rng), _uniform(rng)
        vab = (va + vb) * (1 + _uniform(rng))
        return ExplicitValuation(2, [ZERO, va, vb, vab])
    if mode == "additive":
        return AdditiveValuation(m, [_uniform(rng) for _ in range(m)])
    if mode == "single_minded":
        target = Bundle(rng.randrange(1, 1 << m), m)
        return SingleMindedValuation(m, target, _uniform(rng))
    raise ValueError(f"unknown generate mode {mode!r}")
