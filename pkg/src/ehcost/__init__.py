"""Minimum-cost power scheduling for hybrid harvested/conventional energy links."""

__version__ = "0.1.0"

import types as _types

from ._accel import backend_name
from .core import (
    Allocation,
    Certificate,
    Instance,
    InstanceError,
    SolveResult,
    Violation,
    channel_inversion_power,
    check_feasible,
    drop_budget,
    evaluate_drop_set,
    greedy_allocate,
    is_feasible,
    leftover_storage,
    outage_indicator,
    total_cost,
    verify_greedy_kkt,
)
from .exact import (
    BudgetError,
    CapExceededError,
    forced_keep_slots,
    oracle_exhaustive,
    solve_drop_one,
    solve_keep_one,
    solve_pruned_search,
)
from .heuristics import certified_wcr, lpcr, random_drop, wcr, wcr_certificate
from .lp import LinearProgram, LpSolution, build_relaxation, fixed_drop_program, lower_bound, solve_lp
from .multicycle import (
    MultiCycleInstance,
    mc_lower_bound,
    mc_lpcr,
    mc_oracle,
    mc_random_drop,
    mc_wcr,
    mc_wcr_certificates,
    storage_sensitivity,
)
from .partialcesi import (
    ChannelDistribution,
    allocate_partial_cesi,
    outage_frequency,
    partial_cesi_power,
    quantile,
)

__all__ = sorted(
    name for name, value in globals().items() if not name.startswith("_") and not isinstance(value, _types.ModuleType)
)
