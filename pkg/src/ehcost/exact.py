"""Exact drop-set solvers.

Every solver reduces to choosing which slots to drop and then applying the
greedy allocation. ``oracle_exhaustive`` enumerates all subsets; the others
restrict the enumeration to provably sufficient candidates.
"""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .core import Instance, evaluate_drop_set

DEFAULT_CAP = 2_000_000
TIE_RTOL = 1e-12


class CapExceededError(RuntimeError):
    """The requested enumeration is larger than the configured subset cap."""

    def __init__(self, count, cap):
        super().__init__(f"enumeration of {count} drop sets exceeds the cap of {cap} subsets")
        self.count = count
        self.cap = cap


class BudgetError(ValueError):
    """A specialised solver was called with a drop budget it does not handle."""


def _budget(instance: Instance, M: Optional[int]) -> int:
    if M is None:
        M = instance.drop_budget
    if not 0 <= M <= instance.n_slots:
        raise ValueError(f"drop count {M} outside 0..{instance.n_slots}")
    return int(M)


def _unrank_combination(pool: Sequence[int], k: int, rank: int) -> list:
    """The ``rank``-th k-subset of ``pool`` in lexicographic order."""
    out = []
    start = 0
    n = len(pool)
    for left in range(k, 0, -1):
        for i in range(start, n):
            block = math.comb(n - i - 1, left - 1)
            if rank < block:
                out.append(pool[i])
                start = i + 1
                break
            rank -= block
    return out


def search_drop_sets(instance: Instance, pools: Sequence[Sequence[int]], picks: Sequence[int], cap: int = DEFAULT_CAP):
    """Best drop set that takes ``picks[g]`` slots from each ``pools[g]``.

    Pools hold 0-based slot indices, are sorted, and are listed in time order.
    Returns ``(slots, count)`` where ``slots`` are 0-based; ties within a
    relative 1e-12 go to the lexicographically smallest drop set.
    """
    sizes = [len(p) for p in pools]
    counts = [math.comb(s, k) for s, k in zip(sizes, picks)]
    total = math.prod(counts)
    if total > cap:
        raise CapExceededError(total, cap)
    width = max(max(sizes, default=0), 1)
    pool_arr = np.full((len(pools), width), -1, dtype=np.int64)
    for g, pool in enumerate(pools):
        pool_arr[g, : len(pool)] = pool
    costs = np.empty(total)
    kernels.product_costs(
        np.ascontiguousarray(instance.p_inv),
        np.ascontiguousarray(instance.arrivals),
        instance.initial_storage,
        instance.price_conv,
        instance.price_renew,
        pool_arr,
        np.array(sizes, dtype=np.int64),
        np.array(picks, dtype=np.int64),
        costs,
    )
    best = costs.min()
    rank = int(np.argmax(costs <= best + TIE_RTOL * max(1.0, abs(best))))
    slots = []
    for g in range(len(pools) - 1, -1, -1):
        rank, local = divmod(rank, counts[g])
        slots = _unrank_combination(list(pools[g]), picks[g], local) + slots
    return slots, total


def oracle_exhaustive(instance: Instance, M: Optional[int] = None, cap: int = DEFAULT_CAP):
    """Minimum-cost drop set of size M by full enumeration."""
    M = _budget(instance, M)
    slots, count = search_drop_sets(instance, [list(range(instance.n_slots))], [M], cap)
    return evaluate_drop_set(instance, [s + 1 for s in slots], candidates_examined=count, method="oracle")


def _evaluate_candidates(instance: Instance, candidates, method, make_drop):
    best = None
    for slot in sorted(candidates):
        res = evaluate_drop_set(instance, make_drop(slot), candidates_examined=len(candidates), method=method)
        if best is None or res.total_cost < best.total_cost - TIE_RTOL * max(1.0, abs(best.total_cost)):
            best = res
    return best


def drop_one_candidates(p_inv: np.ndarray) -> list:
    """Record-holding slots scanned from the right (0-based, global max first).

    Each step takes the largest inversion power in the remaining prefix
    (ties to the later slot) and truncates the prefix at it.
    """
    out = []
    end = p_inv.shape[0]
    while end > 0:
        seg = p_inv[:end]
        idx = end - 1 - int(np.argmax(seg[::-1]))
        out.append(idx)
        end = idx
    return out


PRUNE_RULES = ("guarded", "arrival", "none")


def solve_drop_one(instance: Instance, prune: str = "guarded"):
    """Optimal schedule when exactly one slot may be dropped.

    Only slots whose inversion power exceeds every earlier slot's can be the
    optimal drop. Candidates other than the global maximum are then pruned:

    * ``"arrival"``: pruned when ``p_inv_i < T_i``. This can discard the
      optimum, because keeping slot i also drains storage that later slots
      would have used.
    * ``"guarded"`` (default): pruned only when ``p_inv_i < T_i`` and also
      ``alpha * p_inv_i <= beta * p_max``. The second inequality bounds the
      total cost of keeping i by the saving from dropping the maximum, so
      this prune is exact.
    * ``"none"``: every record holder is evaluated.
    """
    if prune not in PRUNE_RULES:
        raise ValueError(f"prune must be one of {PRUNE_RULES}")
    M = instance.drop_budget
    if M != 1:
        raise BudgetError(f"solve_drop_one needs a drop budget of 1, instance has {M}")
    p = instance.p_inv
    T = instance.arrivals
    cands = drop_one_candidates(p)
    top = cands[0]
    kept = [top]
    for i in cands[1:]:
        arrival_rule = p[i] < T[i]
        if prune == "arrival" and arrival_rule:
            continue
        if prune == "guarded" and arrival_rule and instance.price_conv * p[i] <= instance.price_renew * p[top]:
            continue
        kept.append(i)
    return _evaluate_candidates(instance, kept, "alg1", lambda i: [i + 1])


def keep_one_candidates(p_inv: np.ndarray) -> list:
    """Successive minima scanned forward (0-based, global min first).

    Each step takes the smallest inversion power among the remaining slots
    (ties to the earlier slot) and discards it and everything before it.
    """
    out = []
    start = 0
    n = p_inv.shape[0]
    while start < n:
        idx = start + int(np.argmin(p_inv[start:]))
        out.append(idx)
        start = idx + 1
    return out


def solve_keep_one(instance: Instance):
    """Optimal schedule when all but one slot may be dropped."""
    n = instance.n_slots
    M = instance.drop_budget
    if M != n - 1:
        raise BudgetError(f"solve_keep_one needs a drop budget of {n - 1}, instance has {M}")
    p = instance.p_inv
    cands = keep_one_candidates(p)
    energy = instance.initial_storage + np.cumsum(instance.arrivals)
    for pos, k in enumerate(cands):
        if energy[k] > p[k]:
            # slot k runs purely on harvested energy; later candidates need more
            cands = cands[: pos + 1]
            break
    everyone = set(range(1, n + 1))
    return _evaluate_candidates(instance, cands, "alg2", lambda k: everyone - {k + 1})


def forced_keep_slots(instance: Instance, M: Optional[int] = None) -> frozenset:
    """Slots preceded by at least M slots of strictly larger inversion power.

    Such a slot is never dropped at the optimum: exchanging it for one of its
    larger predecessors that is kept never raises the cost. Returned 1-based.
    """
    M = _budget(instance, M)
    if M == 0:
        return frozenset(range(1, instance.n_slots + 1))
    p = instance.p_inv
    out = set()
    for i in range(instance.n_slots):
        if np.count_nonzero(p[:i] > p[i]) >= M:
            out.add(i + 1)
    return frozenset(out)


def solve_pruned_search(instance: Instance, M: Optional[int] = None, cap: int = DEFAULT_CAP):
    """Exhaustive search over drop sets that avoid every forced-keep slot."""
    M = _budget(instance, M)
    forced = forced_keep_slots(instance, M) if M else frozenset()
    pool = [i for i in range(instance.n_slots) if i + 1 not in forced]
    slots, count = search_drop_sets(instance, [pool], [M], cap)
    return evaluate_drop_set(instance, [s + 1 for s in slots], candidates_examined=count, method="pruned")
