# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled exact integer kernels.

Same contract as _pykernel: values are Python ints over a caller-managed
common denominator. Two C fast paths (int64 and 128-bit) cover every
desk-scale magnitude; anything larger, wider than 6 items, or with more
than 16 agents delegates to the pure-Python kernel, so results are always
exact.
"""

from . import _pykernel

cdef extern from *:
    ctypedef long long i128 "__int128"

DEF MAXCELLS = 64   # bundles for m <= 6
DEF MAXAGENTS = 16

# Sums stay below 2^63 resp. 2^127 for <= MAXAGENTS terms under these bounds.
_I64_BOUND = 1 << 58
_I128_BOUND = 1 << 120


cdef inline i128 _to_i128(object v):
    return (<i128>(<long long>(v >> 64)) << 64) | \
        <i128>(<unsigned long long>(v & 0xFFFFFFFFFFFFFFFF))


cdef inline object _from_i128(i128 x):
    cdef long long hi = <long long>(x >> 64)
    cdef unsigned long long lo = <unsigned long long>x
    return ((<object>hi) << 64) | (<object>lo)


cdef int _classify(tables, Py_ssize_t upto) except -1:
    """0: fits int64 path, 1: fits 128-bit path, 2: delegate."""
    cdef int tier = 0
    lo64 = -_I64_BOUND
    hi64 = _I64_BOUND
    lo128 = -_I128_BOUND
    hi128 = _I128_BOUND
    for table in tables:
        for idx in range(upto):
            v = table[idx]
            if lo64 < v < hi64:
                continue
            if lo128 < v < hi128:
                if tier == 0:
                    tier = 1
            else:
                return 2
    return tier


def max_welfare(tables, long mask):
    """Best total value from assigning disjoint sub-bundles of ``mask``."""
    cdef Py_ssize_t n = len(tables)
    if mask < 0 or mask >= MAXCELLS or n > MAXAGENTS:
        return _pykernel.max_welfare(tables, mask)
    cdef int tier = _classify(tables, mask + 1)
    if tier == 2:
        return _pykernel.max_welfare(tables, mask)
    if tier == 0:
        return _welfare_i64(tables, mask, n)
    return _welfare_i128(tables, mask, n)


cdef object _welfare_i64(tables, long mask, Py_ssize_t n):
    cdef long long dp[MAXCELLS]
    cdef long long ndp[MAXCELLS]
    cdef long long tab[MAXCELLS]
    cdef long long best, cand
    cdef long s, b, i
    cdef Py_ssize_t j
    for i in range(mask + 1):
        dp[i] = 0
    for j in range(n):
        table = tables[j]
        for i in range(mask + 1):
            tab[i] = <long long>table[i]
        s = mask
        while True:
            best = tab[0] + dp[s]
            b = s
            while b:
                cand = tab[b] + dp[s ^ b]
                if cand > best:
                    best = cand
                b = (b - 1) & s
            ndp[s] = best
            if s == 0:
                break
            s = (s - 1) & mask
        for i in range(mask + 1):
            dp[i] = ndp[i]
    return <object>dp[mask]


cdef object _welfare_i128(tables, long mask, Py_ssize_t n):
    cdef i128 dp[MAXCELLS]
    cdef i128 ndp[MAXCELLS]
    cdef i128 tab[MAXCELLS]
    cdef i128 best, cand
    cdef long s, b, i
    cdef Py_ssize_t j
    for i in range(mask + 1):
        dp[i] = 0
    for j in range(n):
        table = tables[j]
        for i in range(mask + 1):
            tab[i] = _to_i128(table[i])
        s = mask
        while True:
            best = tab[0] + dp[s]
            b = s
            while b:
                cand = tab[b] + dp[s ^ b]
                if cand > best:
                    best = cand
                b = (b - 1) & s
            ndp[s] = best
            if s == 0:
                break
            s = (s - 1) & mask
        for i in range(mask + 1):
            dp[i] = ndp[i]
    return _from_i128(dp[mask])


def max_marginal(table, long item_bit, long full_mask):
    """Max over S disjoint from the item of table[S | item] - table[S]."""
    if full_mask < 0 or full_mask >= MAXCELLS:
        return _pykernel.max_marginal(table, item_bit, full_mask)
    cdef int tier = _classify((table,), full_mask + 1)
    if tier == 2:
        return _pykernel.max_marginal(table, item_bit, full_mask)
    cdef long comp = full_mask & ~item_bit
    cdef long s = comp
    cdef long long tab64[MAXCELLS]
    cdef i128 tab128[MAXCELLS]
    cdef long long best64, d64
    cdef i128 best128, d128
    cdef long i
    if tier == 0:
        for i in range(full_mask + 1):
            tab64[i] = <long long>table[i]
        best64 = tab64[item_bit] - tab64[0]
        while True:
            d64 = tab64[s | item_bit] - tab64[s]
            if d64 > best64:
                best64 = d64
            if s == 0:
                break
            s = (s - 1) & comp
        return <object>best64
    for i in range(full_mask + 1):
        tab128[i] = _to_i128(table[i])
    best128 = tab128[item_bit] - tab128[0]
    while True:
        d128 = tab128[s | item_bit] - tab128[s]
        if d128 > best128:
            best128 = d128
        if s == 0:
            break
        s = (s - 1) & comp
    return _from_i128(best128)
