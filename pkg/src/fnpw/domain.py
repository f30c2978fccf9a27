"""Core value types shared by every module.

Money is an exact rational (`fractions.Fraction`); no floating point ever
enters mechanism or checker logic. Bundles are bitmask-backed item sets,
profiles are ordered (agent-id, valuation) lists, and outcomes carry the
allocation and payments of one full mechanism run.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterator, Mapping, Optional, Sequence

Money = Fraction

ZERO = Fraction(0)


class FnpwError(Exception):
    """Base class for errors raised by this package."""


class CapExceeded(FnpwError):
    """An input exceeds the configured desk-scale size caps."""


# ---------------------------------------------------------------------------
# Size caps. Every algorithm here is exponential by design; the caps keep
# accidental blowups from hanging a session. Overridable via set_caps() or
# the FNPW_CAPS environment variable ("m_max=6,n_max=8,k_max=3,q_max=3").
# ---------------------------------------------------------------------------


@dataclass
class Caps:
    m_max: int = 6
    n_max: int = 8
    k_max: int = 3
    q_max: int = 3

    def __post_init__(self):
        for name in ("m_max", "n_max", "k_max"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.q_max < 0:
            raise ValueError("q_max must be >= 0")


_caps = Caps()


def get_caps() -> Caps:
    return _caps


def set_caps(caps: Caps) -> None:
    global _caps
    _caps = caps


def caps_from_string(text: str) -> Caps:
    """Parse "m_max=6,n_max=8" style overrides (unset fields keep defaults)."""
    values: dict[str, int] = {}
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        key, _, raw = part.partition("=")
        key = key.strip()
        if key not in ("m_max", "n_max", "k_max", "q_max"):
            raise ValueError(f"unknown cap {key!r}")
        values[key] = int(raw)
    return Caps(**values)


def load_caps_from_env() -> None:
    text = os.environ.get("FNPW_CAPS")
    if text:
        set_caps(caps_from_string(text))


def check_caps(m: Optional[int] = None, n: Optional[int] = None) -> None:
    caps = _caps
    if m is not None and m > caps.m_max:
        raise CapExceeded(f"m={m} exceeds cap m_max={caps.m_max}")
    if n is not None and n > caps.n_max:
        raise CapExceeded(f"n={n} exceeds cap n_max={caps.n_max}")


# ---------------------------------------------------------------------------
# Money
# ---------------------------------------------------------------------------

_DECIMAL_RE = re.compile(r"^[+-]?\d+(\.\d+)?$")
_RATIONAL_RE = re.compile(r"^[+-]?\d+/\d+$")


def money_from_decimal(text: str) -> Money:
    """Parse a finite decimal string ("2.2") into an exact rational."""
    if not isinstance(text, str) or not _DECIMAL_RE.match(text.strip()):
        raise ValueError(f"not a finite decimal: {text!r}")
    return Fraction(text.strip())


def money_from_string(text: str) -> Money:
    """Parse either a finite decimal ("1.285") or a "p/q" rational."""
    text = text.strip()
    if _DECIMAL_RE.match(text):
        return Fraction(text)
    if _RATIONAL_RE.match(text):
        return Fraction(text)
    raise ValueError(f"not an exact money literal: {text!r}")


def money_to_string(x: Money) -> str:
    """Serialize exactly: a finite decimal when the denominator is 2^a*5^b
    (with a, b <= 64), otherwise "p/q". Round-trips through
    money_from_string losslessly."""
    x = Fraction(x)
    den = x.denominator
    twos = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    fives = 0
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1 or twos > 64 or fives > 64:
        return f"{x.numerator}/{x.denominator}"
    digits = max(twos, fives)
    if digits == 0:
        return str(x.numerator)
    scaled = x.numerator * 10**digits // x.denominator
    sign = "-" if scaled < 0 else ""
    body = str(abs(scaled)).rjust(digits + 1, "0")
    return f"{sign}{body[:-digits]}.{body[-digits:]}"


def as_money(value: Any) -> Money:
    """Coerce int / Fraction / exact string into Money."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return money_from_string(value)
    raise TypeError(f"cannot convert {type(value).__name__} to Money exactly")


# ---------------------------------------------------------------------------
# Bundles
# ---------------------------------------------------------------------------


def item_label(index: int) -> str:
    """Display label for an item index: 0 -> A, 1 -> B, ..."""
    if 0 <= index < 26:
        return chr(ord("A") + index)
    return f"i{index}"


class Bundle:
    """An immutable subset of the m items, stored as a bitmask."""

    __slots__ = ("mask", "m", "_hash")

    def __init__(self, mask: int, m: int):
        if m < 0:
            raise ValueError("m must be >= 0")
        if not 0 <= mask < (1 << m):
            raise ValueError(f"mask {mask:#b} out of range for m={m}")
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "_hash", hash((mask, m)))

    def __setattr__(self, name, value):
        raise AttributeError("Bundle is immutable")

    @classmethod
    def from_items(cls, items: Sequence[int], m: int) -> "Bundle":
        mask = 0
        for i in items:
            if not 0 <= i < m:
                raise ValueError(f"item {i} out of range for m={m}")
            mask |= 1 << i
        return cls(mask, m)

    @classmethod
    def from_labels(cls, labels: str, m: int) -> "Bundle":
        """Parse "AB" style labels (A=item 0)."""
        return cls.from_items([ord(c) - ord("A") for c in labels], m)

    @classmethod
    def empty(cls, m: int) -> "Bundle":
        return cls(0, m)

    @property
    def items(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.m) if self.mask >> i & 1)

    def __contains__(self, item: int) -> bool:
        return 0 <= item < self.m and bool(self.mask >> item & 1)

    def __iter__(self) -> Iterator[int]:
        return iter(self.items)

    def __len__(self) -> int:
        return self.mask.bit_count()

    def __bool__(self) -> bool:
        return self.mask != 0

    def _check_same_m(self, other: "Bundle") -> None:
        if self.m != other.m:
            raise ValueError(f"mismatched item counts: {self.m} != {other.m}")

    def union(self, other: "Bundle") -> "Bundle":
        self._check_same_m(other)
        return Bundle(self.mask | other.mask, self.m)

    def intersection(self, other: "Bundle") -> "Bundle":
        self._check_same_m(other)
        return Bundle(self.mask & other.mask, self.m)

    def difference(self, other: "Bundle") -> "Bundle":
        self._check_same_m(other)
        return Bundle(self.mask & ~other.mask, self.m)

    __or__ = union
    __and__ = intersection
    __sub__ = difference

    def issubset(self, other: "Bundle") -> bool:
        self._check_same_m(other)
        return self.mask & ~other.mask == 0

    def isdisjoint(self, other: "Bundle") -> bool:
        self._check_same_m(other)
        return self.mask & other.mask == 0

    def complement(self) -> "Bundle":
        """Complement within the full item set G."""
        return Bundle(~self.mask & ((1 << self.m) - 1), self.m)

    def label(self) -> str:
        return "{" + ",".join(item_label(i) for i in self.items) + "}"

    def __repr__(self) -> str:
        return f"Bundle({self.label()}, m={self.m})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Bundle) and self.mask == other.mask and self.m == other.m
        )

    def __hash__(self) -> int:
        return self._hash

    def tie_key(self) -> tuple:
        """Demand tie-break key: fewest items, then lexicographic item order."""
        return (self.mask.bit_count(), self.items)


def grand_bundle(m: int) -> Bundle:
    return Bundle((1 << m) - 1, m)


def all_subsets(m: int) -> list[Bundle]:
    """All 2^m bundles in bundle-index (bitmask) order."""
    check_caps(m=m)
    return [Bundle(mask, m) for mask in range(1 << m)]


# ---------------------------------------------------------------------------
# Profiles and outcomes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Profile:
    """Ordered reported types: one (agent-id, valuation) pair per agent."""

    agents: tuple
    m: int

    def __post_init__(self):
        object.__setattr__(self, "agents", tuple((str(a), v) for a, v in self.agents))
        ids = [a for a, _ in self.agents]
        if len(set(ids)) != len(ids):
            raise ValueError("agent ids must be unique")
        for a, v in self.agents:
            if v.m != self.m:
                raise ValueError(f"agent {a}: valuation over m={v.m}, profile m={self.m}")

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(a for a, _ in self.agents)

    def __len__(self) -> int:
        return len(self.agents)

    def valuation(self, agent_id: str):
        for a, v in self.agents:
            if a == agent_id:
                return v
        raise KeyError(agent_id)

    def others(self, agent_id: str) -> tuple:
        """All valuations except agent_id's, as a canonically ordered multiset."""
        vals = [v for a, v in self.agents if a != agent_id]
        if len(vals) == len(self.agents):
            raise KeyError(agent_id)
        vals.sort(key=lambda v: v.sort_key)
        return tuple(vals)


@dataclass(frozen=True)
class Outcome:
    """Per-agent allocation and payments of a full mechanism run."""

    allocation: Mapping[str, Bundle]
    payments: Mapping[str, Money]

    def __post_init__(self):
        object.__setattr__(self, "allocation", dict(self.allocation))
        object.__setattr__(self, "payments", dict(self.payments))
        if set(self.allocation) != set(self.payments):
            raise ValueError("allocation and payments must cover the same agents")
        acc = 0
        for agent, bundle in self.allocation.items():
            if acc & bundle.mask:
                raise ValueError(f"overlapping bundles: item sold twice (agent {agent})")
            acc |= bundle.mask
            pay = self.payments[agent]
            if pay < 0:
                raise ValueError(f"negative payment for agent {agent}")
            if not bundle and pay != 0:
                raise ValueError(f"agent {agent} pays {pay} for the empty bundle")

    def bundle(self, agent_id: str) -> Bundle:
        return self.allocation[agent_id]

    def payment(self, agent_id: str) -> Money:
        return self.payments[agent_id]

    @property
    def revenue(self) -> Money:
        return sum(self.payments.values(), ZERO)

    def winners(self) -> dict[str, Bundle]:
        return {a: b for a, b in self.allocation.items() if b}

    def to_jsonable(self) -> dict:
        return {
            "allocation": {a: list(b.items) for a, b in sorted(self.allocation.items())},
            "payments": {a: money_to_string(p) for a, p in sorted(self.payments.items())},
        }


# ---------------------------------------------------------------------------
# Check reports (shared by the validators and every axiom checker)
# ---------------------------------------------------------------------------


@dataclass
class CheckReport:
    """Verdict of a brute-force check: pass, or a counterexample certificate.

    `cases` counts the quantifier instantiations actually enumerated, so a
    "pass" always reads as "no violation in the swept universe".
    """

    passed: bool
    counterexample: Optional[dict] = None
    cases: int = 0
    note: str = ""

    def __post_init__(self):
        if not self.passed and self.counterexample is None:
            raise ValueError("failing report requires a counterexample")

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def __bool__(self) -> bool:
        return self.passed

    def to_jsonable(self) -> dict:
        return {
            "verdict": self.verdict,
            "counterexample": _jsonify(self.counterexample),
            "stats": {"cases": self.cases},
            "note": self.note,
        }


def _jsonify(value):
    """Best-effort exact JSON encoding for counterexample payloads."""
    if value is None or isinstance(value, (bool, int, str)):
        return value
    if isinstance(value, Fraction):
        return money_to_string(value)
    if isinstance(value, Bundle):
        return list(value.items)
    if isinstance(value, dict):
        return {str(k): _jsonify(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonify(v) for v in value]
    if hasattr(value, "to_jsonable"):
        return value.to_jsonable()
    return repr(value)
