"""Pure-Python exact integer kernels.

These are the hot inner loops of the whole package: winner determination
and per-item marginal maxima over valuation tables that have been scaled
to integer numerators over a caller-managed common denominator. Working
on plain Python ints keeps every result exact at any magnitude; the
compiled twin in _ckernel.pyx implements the same contract with C
arithmetic fast paths.
"""


def max_welfare(tables, mask):
    """Best total value from assigning disjoint sub-bundles of ``mask``.

    ``tables[j][b]`` is agent j's integer value for the bundle with bitmask
    ``b``. Items outside ``mask`` are never assigned and agents may be left
    empty-handed. Runs the classic subset-convolution DP in O(n * 3^|mask|).
    """
    dp = [0] * (mask + 1)
    for table in tables:
        ndp = [0] * (mask + 1)
        s = mask
        while True:
            best = table[0] + dp[s]
            b = s
            while b:
                cand = table[b] + dp[s ^ b]
                if cand > best:
                    best = cand
                b = (b - 1) & s
            ndp[s] = best
            if not s:
                break
            s = (s - 1) & mask
        dp = ndp
    return dp[mask]


def max_marginal(table, item_bit, full_mask):
    """Max over S disjoint from the item of table[S | item] - table[S]."""
    comp = full_mask & ~item_bit
    best = None
    s = comp
    while True:
        d = table[s | item_bit] - table[s]
        if best is None or d > best:
            best = d
        if not s:
            break
        s = (s - 1) & comp
    return best
