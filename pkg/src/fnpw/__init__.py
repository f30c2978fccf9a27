"""Exact-arithmetic laboratory for false-name-proof combinatorial auctions.

Mechanisms (VCG, Set, MB, MMVIP, the 3-item leveled-division mechanism,
and the automated amd:<base> transform), brute-force axiom checkers with
counterexample certificates, an exhaustive false-name manipulation finder,
and a reproducible revenue/efficiency experiment harness. All mechanism
and checker arithmetic is exact rational.
"""

from .domain import (
    Bundle,
    CapExceeded,
    Caps,
    CheckReport,
    FnpwError,
    Money,
    Outcome,
    Profile,
    all_subsets,
    get_caps,
    grand_bundle,
    money_from_decimal,
    money_from_string,
    money_to_string,
    set_caps,
)
from .valuation import (
    AdditiveValuation,
    ExplicitValuation,
    SingleMindedValuation,
    ValuationSpec,
    generate,
    marginal_value,
    minimal_bundles,
    validate,
    valuation_from_jsonable,
)
from .welfare import AllocationResult, efficient_allocation, efficient_value
from .porf import (
    InfeasibleAllocation,
    MechanismRun,
    PriceFunction,
    demand,
    run_auction,
)
from .mechanisms import (
    AmdPrice,
    Lds3Mechanism,
    MbPrice,
    MmvipPrice,
    SetPrice,
    VcgPrice,
    ZOO_NAMES,
    amd_h,
    amd_price,
    get_mechanism,
    price_mb,
    price_mmvip,
    price_set,
    price_vcg,
    run_lds3,
)

__version__ = "0.1.0"
