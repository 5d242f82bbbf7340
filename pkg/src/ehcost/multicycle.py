"""Multi-cycle scheduling: a drop budget per cycle, storage shared across cycles."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    Allocation,
    Instance,
    InstanceError,
    SolveResult,
    evaluate_drop_set,
    leftover_storage,
    total_cost,
)
from .exact import DEFAULT_CAP, oracle_exhaustive, search_drop_sets
from .heuristics import keyed_generator, lpcr, wcr_certificate, worst_channels
from .lp import _solve_relaxation, build_relaxation


@dataclass(frozen=True, eq=False)
class MultiCycleInstance:
    """``cycles`` consecutive blocks of ``slots_per_cycle`` slots, each allowed
    ``drops_per_cycle`` outages. Gains and arrivals span all cycles."""

    cycles: int
    slots_per_cycle: int
    drops_per_cycle: int
    rate: float
    noise: float
    price_conv: float
    price_renew: float
    gains: np.ndarray
    arrivals: np.ndarray
    initial_storage: float = 0.0

    def __post_init__(self):
        if self.cycles < 1 or self.slots_per_cycle < 1:
            raise InstanceError("need at least one cycle of at least one slot")
        if not 0 <= self.drops_per_cycle <= self.slots_per_cycle:
            raise InstanceError("drops_per_cycle must lie in 0..slots_per_cycle")
        # validation of the slot data is delegated to Instance
        flat = self.flat()
        if flat.n_slots != self.cycles * self.slots_per_cycle:
            raise InstanceError(
                f"expected {self.cycles * self.slots_per_cycle} slots, got {flat.n_slots}"
            )
        object.__setattr__(self, "gains", flat.gains)
        object.__setattr__(self, "arrivals", flat.arrivals)

    @property
    def n_slots(self) -> int:
        return self.cycles * self.slots_per_cycle

    def flat(self) -> Instance:
        """All cycles as one single-cycle instance (its epsilon is unused)."""
        return Instance(
            rate=self.rate,
            noise=self.noise,
            price_conv=self.price_conv,
            price_renew=self.price_renew,
            gains=self.gains,
            arrivals=self.arrivals,
            initial_storage=self.initial_storage,
        )

    def cycle_slice(self, j: int) -> slice:
        """0-based slot range of cycle ``j`` (0-based)."""
        return slice(j * self.slots_per_cycle, (j + 1) * self.slots_per_cycle)

    def cycle_instance(self, j: int, storage: float) -> Instance:
        """Cycle ``j`` on its own; callers pass ``drops_per_cycle`` explicitly."""
        sl = self.cycle_slice(j)
        return Instance(
            rate=self.rate,
            noise=self.noise,
            price_conv=self.price_conv,
            price_renew=self.price_renew,
            gains=self.gains[sl],
            arrivals=self.arrivals[sl],
            initial_storage=storage,
        )


def _clamp_leftover(value: float) -> float:
    if value < -1e-12:
        raise RuntimeError(f"negative leftover storage {value!r}")
    return max(value, 0.0)


def mc_lpcr(mci: MultiCycleInstance) -> SolveResult:
    """Cycle-by-cycle LPCR, each cycle seeded with the previous leftover."""
    storage = mci.initial_storage
    drops = []
    conv = []
    renew = []
    for j in range(mci.cycles):
        inst = mci.cycle_instance(j, storage)
        try:
            res = lpcr(inst, mci.drops_per_cycle)
        except RuntimeError as exc:
            raise RuntimeError(f"cycle {j + 1}: {exc}") from exc
        offset = j * mci.slots_per_cycle
        drops.extend(s + offset for s in res.drop_set)
        conv.append(res.allocation.conv)
        renew.append(res.allocation.renew)
        storage = _clamp_leftover(leftover_storage(inst, res.allocation))
    alloc = Allocation(np.concatenate(conv), np.concatenate(renew))
    return SolveResult(
        drop_set=frozenset(drops),
        allocation=alloc,
        total_cost=total_cost(mci.flat(), alloc),
        method="mc-lpcr",
    )


def mc_wcr(mci: MultiCycleInstance) -> SolveResult:
    """Drop the K weakest slots of every cycle, then one greedy pass overall."""
    drops = []
    for j in range(mci.cycles):
        sl = mci.cycle_slice(j)
        drops.extend((worst_channels(mci.gains[sl], mci.drops_per_cycle) + sl.start + 1).tolist())
    return evaluate_drop_set(mci.flat(), drops, method="mc-wcr")


def mc_random_drop(mci: MultiCycleInstance, seed: int = 0) -> SolveResult:
    """Baseline: K uniformly random slots per cycle, keyed like ``random_drop``."""
    rng = keyed_generator(seed, mci.flat().digest())
    drops = []
    for j in range(mci.cycles):
        start = mci.cycle_slice(j).start
        pick = rng.choice(mci.slots_per_cycle, size=mci.drops_per_cycle, replace=False)
        drops.extend((np.sort(pick) + start + 1).tolist())
    return evaluate_drop_set(mci.flat(), drops, method="mc-random")


def mc_wcr_certificates(mci: MultiCycleInstance, result: SolveResult) -> list:
    """Per-cycle WCR certificate, each cycle judged at its incoming storage."""
    storage = mci.initial_storage
    out = []
    for j in range(mci.cycles):
        sl = mci.cycle_slice(j)
        inst = mci.cycle_instance(j, storage)
        local = SolveResult(
            drop_set=frozenset(s - sl.start for s in result.drop_set if sl.start < s <= sl.stop),
            allocation=Allocation(result.allocation.conv[sl], result.allocation.renew[sl]),
            total_cost=0.0,
        )
        out.append(wcr_certificate(inst, local))
        storage = _clamp_leftover(leftover_storage(inst, local.allocation))
    return out


def mc_oracle(mci: MultiCycleInstance, cap: int = DEFAULT_CAP) -> SolveResult:
    """Exact optimum over exactly-K-per-cycle drop sets (cross product)."""
    pools = [list(range(mci.cycle_slice(j).start, mci.cycle_slice(j).stop)) for j in range(mci.cycles)]
    slots, count = search_drop_sets(mci.flat(), pools, [mci.drops_per_cycle] * mci.cycles, cap)
    return evaluate_drop_set(mci.flat(), [s + 1 for s in slots], candidates_examined=count, method="mc-oracle")


def mc_lower_bound(mci: MultiCycleInstance):
    """Relaxation of the whole multi-cycle program (one budget row per cycle)."""
    lp = build_relaxation(mci.flat(), mci.drops_per_cycle, cycle_length=mci.slots_per_cycle)
    return _solve_relaxation(lp, mci.n_slots)


def storage_sensitivity(instance: Instance, M=None, delta: float = 0.0, cap: int = DEFAULT_CAP):
    """Optimal cost at storage S and S + delta, and whether the drop is within (alpha - beta) * delta."""
    if delta < 0 or not math.isfinite(delta):
        raise ValueError("delta must be a finite non-negative number")
    v_s = oracle_exhaustive(instance, M, cap).total_cost
    v_sd = oracle_exhaustive(instance.replace(initial_storage=instance.initial_storage + delta), M, cap).total_cost
    bound = (instance.price_conv - instance.price_renew) * delta
    return v_s, v_sd, bool(v_s - v_sd <= bound + 1e-7)

