"""Polynomial-time drop-set heuristics and WCR optimality certificates."""

from __future__ import annotations

from typing import Optional

import numpy as np

from .core import FEAS_TOL, Certificate, Instance, SolveResult, evaluate_drop_set
from .lp import lower_bound


def _budget(instance: Instance, M: Optional[int]) -> int:
    if M is None:
        M = instance.drop_budget
    if not 0 <= M <= instance.n_slots:
        raise ValueError(f"drop count {M} outside 0..{instance.n_slots}")
    return int(M)


def lpcr_order(chi: np.ndarray, p_inv: np.ndarray) -> np.ndarray:
    """Slot order for LP rounding: chi descending, then p_inv descending, then index."""
    chi_q = np.round(np.asarray(chi, dtype=np.float64), 9)
    n = chi_q.shape[0]
    # lexsort keys run last-to-first
    return np.lexsort((np.arange(n), -p_inv, -chi_q))


def lpcr(instance: Instance, M: Optional[int] = None, chi: Optional[np.ndarray] = None) -> SolveResult:
    """Linear-programming-based channel removal.

    Drops the M slots with the largest relaxed outage indicator and greedily
    allocates the rest. Pass ``chi`` from an earlier ``lower_bound(instance, M)``
    call to skip the LP solve.
    """
    M = _budget(instance, M)
    if M == 0:
        return evaluate_drop_set(instance, (), method="lpcr")
    if chi is None:
        _, chi = lower_bound(instance, M)
    order = lpcr_order(chi, instance.p_inv)
    return evaluate_drop_set(instance, (order[:M] + 1).tolist(), method="lpcr")


def worst_channels(gains: np.ndarray, M: int) -> np.ndarray:
    """0-based indices of the M lowest gains; equal gains drop the earlier slot first."""
    order = np.lexsort((np.arange(gains.shape[0]), gains))
    return order[:M]


def wcr(instance: Instance, M: Optional[int] = None) -> SolveResult:
    """Worst-channel removal: drop the M weakest slots."""
    M = _budget(instance, M)
    drops = worst_channels(instance.gains, M)
    result = evaluate_drop_set(instance, (drops + 1).tolist(), method="wcr")
    return result


def keyed_generator(seed: int, digest: str) -> np.random.Generator:
    """Philox stream keyed by ``seed`` and the leading 64 bits of a hex digest."""
    key = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, int(digest[:16], 16)])
    return np.random.Generator(np.random.Philox(key))


def random_drop(instance: Instance, M: Optional[int] = None, seed: int = 0) -> SolveResult:
    """Baseline: a uniformly random drop set of size M.

    The stream is a counter-based Philox generator keyed by the seed and the
    instance content, so the draw is replayable from either alone.
    """
    M = _budget(instance, M)
    rng = keyed_generator(seed, instance.digest())
    drops = rng.choice(instance.n_slots, size=M, replace=False)
    return evaluate_drop_set(instance, (np.sort(drops) + 1).tolist(), method="random")


def wcr_certificate(instance: Instance, result: SolveResult) -> Optional[Certificate]:
    """First sufficient condition that proves a WCR result optimal, if any.

    Checked in order: all harvested energy (plus initial storage) consumed;
    no conventional energy used; gains non-decreasing over time.
    """
    alloc = result.allocation
    available = instance.initial_storage + float(instance.arrivals.sum())
    if abs(float(alloc.renew.sum()) - available) <= FEAS_TOL:
        return Certificate.FULL_RENEWABLE_USE
    if float(alloc.conv.sum()) <= FEAS_TOL:
        return Certificate.NO_CONVENTIONAL
    if np.all(np.diff(instance.gains) >= 0):
        return Certificate.NON_DECREASING_CHANNEL
    return None


def certified_wcr(instance: Instance, M: Optional[int] = None) -> SolveResult:
    """``wcr`` with its certificate attached."""
    res = wcr(instance, M)
    return SolveResult(
        drop_set=res.drop_set,
        allocation=res.allocation,
        total_cost=res.total_cost,
        candidates_examined=res.candidates_examined,
        certificate=wcr_certificate(instance, res),
        method=res.method,
    )
