"""Shared builders and independent brute-force oracles for the test suite."""

from fractions import Fraction
from itertools import product

from fnpw import (
    AdditiveValuation,
    Bundle,
    ExplicitValuation,
    Profile,
    SingleMindedValuation,
)


def bundle(labels, m=2):
    return Bundle.from_labels(labels, m)


def sm(labels, value, m=2):
    return SingleMindedValuation(m, bundle(labels, m), value)


def additive(*values):
    return AdditiveValuation(len(values), list(values))


def explicit2(va, vb, vab):
    return ExplicitValuation(2, [0, va, vb, vab])


def profile(m, *pairs):
    return Profile(agents=tuple(pairs), m=m)


def example1_agents():
    """Three single-minded bidders over two items: the canonical withdrawal
    fixture (4 on both, 2 on the second item, 1 on the first)."""
    return sm("AB", 4), sm("B", 2), sm("A", 1)


def brute_welfare(s, vals):
    """Independent winner-determination oracle: enumerate every assignment
    of each item in s to one agent or to nobody."""
    items = list(s)
    n = len(vals)
    best = Fraction(0)
    for assign in product(range(n + 1), repeat=len(items)):
        got = [0] * n
        for item, who in zip(items, assign):
            if who < n:
                got[who] |= 1 << item
        total = sum((v.value_mask(g) for v, g in zip(vals, got)), Fraction(0))
        if total > best:
            best = total
    return best


def brute_marginal_max(v, item):
    """Independent oracle for the largest marginal value of one item."""
    best = None
    for mask in range(1 << v.m):
        if mask >> item & 1:
            continue
        d = v.value_mask(mask | (1 << item)) - v.value_mask(mask)
        if best is None or d > best:
            best = d
    return best
