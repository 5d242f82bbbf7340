"""Problem data, cost/feasibility evaluation and greedy dual-source allocation.

Slot indices are 1-based wherever they cross the public API (drop sets,
``slot`` arguments, violation reports); arrays are 0-based internally.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional

import numpy as np

from . import kernels

FEAS_TOL = 1e-9
COST_RTOL = 1e-7

DropSet = frozenset


class InstanceError(ValueError):
    """Raised for malformed problem data."""


def _frozen_array(values, name, n=None):
    arr = np.array(values, dtype=np.float64, copy=True).reshape(-1)
    if n is not None and arr.shape[0] != n:
        raise InstanceError(f"{name} has length {arr.shape[0]}, expected {n}")
    if not np.all(np.isfinite(arr)):
        raise InstanceError(f"{name} contains non-finite values")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Instance:
    """One single-cycle scheduling problem.

    ``rate`` is in nats per channel use. ``price_conv`` must exceed
    ``price_renew``; ``initial_storage`` is harvested energy carried in
    from an earlier cycle (zero for a standalone problem).
    """

    rate: float
    noise: float
    price_conv: float
    price_renew: float
    gains: np.ndarray
    arrivals: np.ndarray
    initial_storage: float = 0.0
    epsilon: float = 0.0
    _p_inv: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        gains = _frozen_array(self.gains, "gains")
        n = gains.shape[0]
        if n < 1:
            raise InstanceError("an instance needs at least one slot")
        arrivals = _frozen_array(self.arrivals, "arrivals", n)
        for name in ("rate", "noise", "price_conv", "price_renew", "initial_storage", "epsilon"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise InstanceError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if self.rate < 0:
            raise InstanceError("rate must be non-negative")
        if self.noise <= 0:
            raise InstanceError("noise must be positive")
        if not self.price_conv > self.price_renew > 0:
            raise InstanceError("prices must satisfy price_conv > price_renew > 0")
        if np.any(gains <= 0):
            raise InstanceError("gains must be strictly positive")
        if np.any(arrivals < 0) or self.initial_storage < 0:
            raise InstanceError("arrivals and initial storage must be non-negative")
        if not 0 <= self.epsilon < 1:
            raise InstanceError("epsilon must lie in [0, 1)")
        object.__setattr__(self, "gains", gains)
        object.__setattr__(self, "arrivals", arrivals)
        p_inv = self.noise * math.expm1(self.rate) / gains
        p_inv.setflags(write=False)
        object.__setattr__(self, "_p_inv", p_inv)

    @property
    def n_slots(self) -> int:
        return self.gains.shape[0]

    @property
    def p_inv(self) -> np.ndarray:
        """Channel inversion power of every slot (read-only, 0-based)."""
        return self._p_inv

    @property
    def drop_budget(self) -> int:
        return drop_budget(self.n_slots, self.epsilon)

    def replace(self, **changes) -> "Instance":
        fields = dict(
            rate=self.rate,
            noise=self.noise,
            price_conv=self.price_conv,
            price_renew=self.price_renew,
            gains=self.gains,
            arrivals=self.arrivals,
            initial_storage=self.initial_storage,
            epsilon=self.epsilon,
        )
        fields.update(changes)
        return Instance(**fields)

    def digest(self) -> str:
        """Stable content hash, used to key per-instance random streams."""
        h = hashlib.sha256()
        header = np.array(
            [self.rate, self.noise, self.price_conv, self.price_renew, self.initial_storage, self.epsilon]
        )
        for arr in (header, self.gains, self.arrivals):
            h.update(np.ascontiguousarray(arr, dtype="<f8").tobytes())
        return h.hexdigest()


@dataclass(frozen=True, eq=False)
class Allocation:
    """Per-slot conventional and renewable power."""

    conv: np.ndarray
    renew: np.ndarray

    def __post_init__(self):
        conv = _frozen_array(self.conv, "conv")
        renew = _frozen_array(self.renew, "renew", conv.shape[0])
        object.__setattr__(self, "conv", conv)
        object.__setattr__(self, "renew", renew)

    def __len__(self):
        return self.conv.shape[0]

    @property
    def total(self) -> np.ndarray:
        return self.conv + self.renew


class Certificate(str, Enum):
    """Sufficient conditions under which worst-channel removal is optimal."""

    FULL_RENEWABLE_USE = "FullRenewableUse"
    NO_CONVENTIONAL = "NoConventional"
    NON_DECREASING_CHANNEL = "NonDecreasingChannel"

    def __str__(self):
        return self.value


@dataclass(frozen=True, eq=False)
class SolveResult:
    drop_set: frozenset
    allocation: Allocation
    total_cost: float
    candidates_examined: int = 1
    certificate: Optional[Certificate] = None
    method: str = ""

    @property
    def drops(self) -> tuple:
        return tuple(sorted(self.drop_set))


@dataclass(frozen=True)
class Violation:
    constraint: str  # "nonnegative-conv", "nonnegative-renew", "prefix-eh", "outage-budget"
    slot: Optional[int]
    excess: float

    def __str__(self):
        where = f" at slot {self.slot}" if self.slot is not None else ""
        return f"{self.constraint}{where} (excess {self.excess:.3g})"


# ---------------------------------------------------------------------------
# elementary evaluations
# ---------------------------------------------------------------------------


def _check_slot(instance: Instance, slot: int) -> int:
    if not 1 <= slot <= instance.n_slots:
        raise IndexError(f"slot {slot} outside 1..{instance.n_slots}")
    return slot - 1


def channel_inversion_power(instance: Instance, slot: int) -> float:
    """Smallest total power that lets ``slot`` meet the target rate."""
    return float(instance.p_inv[_check_slot(instance, slot)])


def outage_indicator(instance: Instance, allocation: Allocation, slot: int) -> int:
    i = _check_slot(instance, slot)
    if len(allocation) != instance.n_slots:
        raise ValueError("allocation length does not match the instance")
    power = allocation.conv[i] + allocation.renew[i]
    return int(power < instance.p_inv[i] - FEAS_TOL)


def drop_budget(n_slots: int, epsilon: float) -> int:
    """Number of slots allowed in outage, ``floor(n_slots * epsilon)``.

    Products within 1e-9 of an integer are snapped first so that e.g.
    200 * 0.3 yields 60 rather than 59.
    """
    if not 0 <= epsilon < 1:
        raise ValueError("epsilon must lie in [0, 1)")
    product = n_slots * epsilon
    nearest = round(product)
    if abs(product - nearest) <= 1e-9:
        return int(nearest)
    return int(math.floor(product))


def total_cost(instance: Instance, allocation: Allocation) -> float:
    if len(allocation) != instance.n_slots:
        raise ValueError("allocation length does not match the instance")
    return float(
        instance.price_conv * allocation.conv.sum() + instance.price_renew * allocation.renew.sum()
    )


def check_feasible(instance: Instance, allocation: Allocation, budget: Optional[int] = None) -> list:
    """List every violated constraint; an empty list means feasible.

    ``budget`` defaults to the instance's own drop budget.
    """
    n = instance.n_slots
    if len(allocation) != n:
        raise ValueError("allocation length does not match the instance")
    if budget is None:
        budget = instance.drop_budget
    out = []
    for name, arr in (("nonnegative-conv", allocation.conv), ("nonnegative-renew", allocation.renew)):
        for i in np.flatnonzero(arr < -FEAS_TOL):
            out.append(Violation(name, int(i) + 1, float(-arr[i])))
    slack = instance.initial_storage + np.cumsum(instance.arrivals) - np.cumsum(allocation.renew)
    for i in np.flatnonzero(slack < -FEAS_TOL):
        out.append(Violation("prefix-eh", int(i) + 1, float(-slack[i])))
    outages = int(np.count_nonzero(allocation.total < instance.p_inv - FEAS_TOL))
    if outages > budget:
        out.append(Violation("outage-budget", None, float(outages - budget)))
    return out


def is_feasible(instance: Instance, allocation: Allocation, budget: Optional[int] = None) -> bool:
    return not check_feasible(instance, allocation, budget)


# ---------------------------------------------------------------------------
# greedy allocation
# ---------------------------------------------------------------------------


def normalize_drop_set(instance: Instance, drop_set: Iterable[int]) -> frozenset:
    slots = frozenset(int(s) for s in drop_set)
    bad = [s for s in slots if not 1 <= s <= instance.n_slots]
    if bad:
        raise IndexError(f"drop set contains slots outside 1..{instance.n_slots}: {sorted(bad)}")
    return slots


def kept_demand(instance: Instance, drop_set: frozenset) -> np.ndarray:
    demand = np.array(instance.p_inv)
    if drop_set:
        demand[[s - 1 for s in drop_set]] = 0.0
    return demand


def greedy_allocate(instance: Instance, drop_set: Iterable[int]) -> Allocation:
    """Cost-minimal allocation for a fixed set of dropped slots.

    Dropped slots get nothing. Each kept slot draws harvested energy up to
    what is stored, and conventional energy covers the rest of its channel
    inversion power.
    """
    drop_set = normalize_drop_set(instance, drop_set)
    demand = kept_demand(instance, drop_set)
    renew = kernels.greedy_renew(demand, instance.arrivals, instance.initial_storage)
    conv = np.maximum(demand - renew, 0.0)
    return Allocation(conv=conv, renew=renew)


def evaluate_drop_set(instance: Instance, drop_set: Iterable[int], **meta) -> SolveResult:
    drop_set = normalize_drop_set(instance, drop_set)
    allocation = greedy_allocate(instance, drop_set)
    return SolveResult(
        drop_set=drop_set,
        allocation=allocation,
        total_cost=total_cost(instance, allocation),
        **meta,
    )


def leftover_storage(instance: Instance, allocation: Allocation) -> float:
    left = instance.initial_storage + instance.arrivals.sum() - allocation.renew.sum()
    # drift below zero is accumulated rounding, not energy
    return max(float(left), 0.0) if left > -1e-12 else float(left)


def verify_greedy_kkt(instance: Instance, drop_set: Iterable[int], allocation: Allocation) -> bool:
    """Check optimality of ``allocation`` for a fixed drop set through KKT.

    The renewable draw x solves min alpha*sum(c) - (alpha-beta)*sum(x) with
    0 <= x <= c (c = inversion power on kept slots, 0 on dropped ones) and
    prefix harvesting limits. Multipliers: gamma = 0; with K the last slot
    whose prefix limit is tight, mu_K = alpha-beta, lambda_i = alpha-beta
    for i > K and 0 otherwise (K = 0 when no limit is tight).
    """
    drop_set = normalize_drop_set(instance, drop_set)
    n = instance.n_slots
    if len(allocation) != n:
        raise ValueError("allocation length does not match the instance")
    c = kept_demand(instance, drop_set)
    x = allocation.renew
    tol = FEAS_TOL
    gap = instance.price_conv - instance.price_renew

    # primal feasibility, including that conventional power tops up exactly to c
    if np.any(x < -tol) or np.any(x > c + tol):
        return False
    if np.any(np.abs(allocation.conv + x - c) > tol) or np.any(allocation.conv < -tol):
        return False
    slack = instance.initial_storage + np.cumsum(instance.arrivals) - np.cumsum(x)
    if np.any(slack < -tol):
        return False

    tight = np.flatnonzero(np.abs(slack) <= tol)
    K = int(tight[-1]) + 1 if tight.size else 0  # 1-based, 0 = none

    lam = np.zeros(n)
    mu = np.zeros(n)
    gamma = np.zeros(n)
    lam[K:] = gap
    if K > 0:
        mu[K - 1] = gap

    if min(lam.min(), mu.min(), gamma.min()) < 0:
        return False
    # stationarity: -(alpha-beta) + lambda_i + sum_{j>=i} mu_j - gamma_i = 0
    tail_mu = np.cumsum(mu[::-1])[::-1]
    if np.any(np.abs(-gap + lam + tail_mu - gamma) > tol):
        return False
    # complementary slackness
    if np.any(np.abs(lam * (x - c)) > tol):
        return False
    if np.any(np.abs(mu * slack) > tol):
        return False
    if np.any(np.abs(gamma * x) > tol):
        return False
    return True
