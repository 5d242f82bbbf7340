"""Dense linear programming and the relaxation of the drop-set problem.

``solve_lp`` is a bounded-variable dual simplex on a full tableau. It
starts from the all-slack basis, which is dual feasible whenever every
cost is non-negative (the case for the relaxation); other columns are
parked at an upper bound, artificial if need be. Pivot choices are a pure
function of the input, so repeated solves return identical vertices.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .core import Instance, normalize_drop_set

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_PRIMAL_TOL = 1e-9
_PIVOT_TOL = 1e-9
_DUAL_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """minimize ``objective @ x`` s.t. ``A_ub @ x <= b_ub``, ``lower <= x <= upper``."""

    objective: np.ndarray
    A_ub: np.ndarray
    b_ub: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=np.float64).reshape(-1)
        n = c.shape[0]
        A = np.asarray(self.A_ub, dtype=np.float64)
        if A.size == 0:
            A = A.reshape(0, n)
        b = np.asarray(self.b_ub, dtype=np.float64).reshape(-1)
        lo = np.broadcast_to(np.asarray(self.lower, dtype=np.float64), (n,)).copy()
        hi = np.broadcast_to(np.asarray(self.upper, dtype=np.float64), (n,)).copy()
        if A.ndim != 2 or A.shape[1] != n:
            raise ValueError(f"constraint matrix must have {n} columns")
        if b.shape[0] != A.shape[0]:
            raise ValueError("right-hand side length differs from the number of rows")
        if not np.all(np.isfinite(lo)):
            raise ValueError("lower bounds must be finite")
        if np.any(lo > hi):
            raise ValueError("lower bound exceeds upper bound")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ValueError("objective and constraints must be finite")
        for name, arr in (("objective", c), ("A_ub", A), ("b_ub", b), ("lower", lo), ("upper", hi)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_vars(self) -> int:
        return self.objective.shape[0]

    @property
    def n_rows(self) -> int:
        return self.A_ub.shape[0]

    @classmethod
    def from_rows(cls, objective, rows, bounds):
        """Build from ``(coefficients, rhs)`` pairs and ``(lower, upper)`` pairs."""
        n = len(objective)
        A = np.array([r for r, _ in rows], dtype=np.float64).reshape(len(rows), n)
        b = np.array([rhs for _, rhs in rows], dtype=np.float64)
        lo = [lo for lo, _ in bounds]
        hi = [np.inf if hi is None else hi for _, hi in bounds]
        return cls(objective, A, b, lo, hi)

    def to_text(self) -> str:
        """Plain-text tableau dump for debugging."""
        buf = io.StringIO()
        buf.write(f"# LP: {self.n_vars} variables, {self.n_rows} rows\n")
        buf.write("min  " + " ".join(f"{v:.6g}" for v in self.objective) + "\n")
        for row, rhs in zip(self.A_ub, self.b_ub):
            buf.write("row  " + " ".join(f"{v:.6g}" for v in row) + f"  <= {rhs:.6g}\n")
        for j, (lo, hi) in enumerate(zip(self.lower, self.upper)):
            buf.write(f"x{j} in [{lo:.6g}, {hi:.6g}]\n")
        return buf.getvalue()


@dataclass(frozen=True, eq=False)
class LpSolution:
    x: Optional[np.ndarray]
    objective_value: float
    status: str
    iterations: int = 0


class _ArtificialBoundHit(Exception):
    pass


def _dual_simplex(c, A, b, upper, big):
    """Solve min c@y, A@y <= b, 0 <= y <= upper. Returns (status, y, iterations)."""
    m, n = A.shape
    total = n + m
    tab = np.zeros((m + 1, total))
    tab[:m, :n] = A
    tab[np.arange(m), n + np.arange(m)] = 1.0
    tab[m, :n] = c

    u = np.full(total, np.inf)
    u[:n] = upper
    artificial = np.zeros(total, dtype=bool)
    status = np.ones(total, dtype=np.int64)
    x = np.zeros(total)
    basis = np.arange(n, total)
    status[basis] = 0
    for j in range(n):
        if c[j] < 0:
            if not np.isfinite(u[j]):
                u[j] = big
                artificial[j] = True
            status[j] = 2
            x[j] = u[j]
    x[basis] = b - A @ x[:n]

    max_iter = 50 * total + 1000
    it = 0
    while True:
        while True:
            if it >= max_iter:
                raise RuntimeError(f"dual simplex exceeded {max_iter} iterations")
            xb = x[basis]
            ub = u[basis]
            below = -xb
            above = np.where(np.isfinite(ub), xb - ub, -np.inf)
            viol = np.maximum(below, above)
            r = int(np.argmax(viol)) if m else 0
            if m == 0 or viol[r] <= _PRIMAL_TOL:
                break
            increase = bool(below[r] >= above[r])
            row = tab[r]
            q = kernels.dual_ratio(row, tab[m], status, increase, _PIVOT_TOL)
            if q < 0:
                return INFEASIBLE, None, it
            target = 0.0 if increase else ub[r]
            step = (xb[r] - target) / row[q]
            x[basis] -= step * tab[:m, q]
            x[q] += step
            leaving = basis[r]
            x[leaving] = target
            status[leaving] = 1 if increase else 2
            basis[r] = q
            status[q] = 0
            kernels.pivot(tab, r, q)
            it += 1

        # columns resting on an artificial bound: free ones are moved back to
        # zero and the loop resumes; a still-profitable one means unbounded
        parked = np.flatnonzero(artificial & (status == 2))
        if parked.size == 0:
            break
        d = tab[m]
        if np.any(d[parked] < -_DUAL_TOL):
            raise _ArtificialBoundHit
        for j in parked:
            x[basis] += tab[:m, j] * x[j]
            x[j] = 0.0
            status[j] = 1
    basic_art = basis[artificial[basis]]
    if basic_art.size and np.any(x[basic_art] >= 0.5 * big):
        raise _ArtificialBoundHit

    # refresh basic values from the original columns to shed pivot round-off
    cols = np.hstack((A, np.eye(m)))
    nonbasic = status != 0
    rhs = b - cols[:, nonbasic] @ x[nonbasic]
    if m:
        try:
            x[basis] = np.linalg.solve(cols[:, basis], rhs)
        except np.linalg.LinAlgError:  # pragma: no cover - basis is nonsingular by construction
            pass
    return OPTIMAL, x[:n], it


def solve_lp(lp: LinearProgram) -> LpSolution:
    """Vertex-optimal solution of ``lp``; infeasible/unbounded are reported via status."""
    c = lp.objective
    A = lp.A_ub
    lo = lp.lower
    n, m = lp.n_vars, lp.n_rows
    b = lp.b_ub - A @ lo
    upper = lp.upper - lo

    # equilibrate rows; empty rows are either vacuous or contradictory
    scale = np.abs(A).max(axis=1) if m else np.zeros(0)
    empty = scale == 0
    if np.any(b[empty] < -_PRIMAL_TOL):
        return LpSolution(None, float("nan"), INFEASIBLE)
    keep = ~empty
    A_s = A[keep] / scale[keep, None]
    b_s = b[keep] / scale[keep]

    magnitude = max(1.0, float(np.abs(b_s).max(initial=0.0)), float(np.abs(upper[np.isfinite(upper)]).max(initial=0.0)))
    iterations = 0
    for big in (1e6 * magnitude, 1e12 * magnitude):
        try:
            status, y, it = _dual_simplex(c, A_s, b_s, upper, big)
            iterations += it
            break
        except _ArtificialBoundHit:
            continue
    else:
        return LpSolution(None, float("-inf"), UNBOUNDED, iterations)
    if status != OPTIMAL:
        return LpSolution(None, float("nan"), status, iterations)
    y = np.where((y < 0) & (y > -_PRIMAL_TOL), 0.0, y)
    y = np.where((y > upper) & (y < upper + _PRIMAL_TOL), upper, y)
    x = lo + y
    return LpSolution(x, float(c @ x), OPTIMAL, iterations)


# ---------------------------------------------------------------------------
# relaxation of the drop-set problem
# ---------------------------------------------------------------------------


def build_relaxation(instance: Instance, M: int, cycle_length: Optional[int] = None) -> LinearProgram:
    """Relaxed mixed-integer program with outage indicators in [0, 1].

    Variables are ``[conv_1..conv_N, renew_1..renew_N, chi_1..chi_N]``. Rows:
    N coverage rows ``-conv_i - renew_i - p_inv_i * chi_i <= -p_inv_i``,
    N prefix harvesting rows, then the outage budget ``sum chi <= M``. With
    ``cycle_length`` the budget row is repeated per cycle of that length.
    """
    N = instance.n_slots
    if cycle_length is None:
        cycle_length = N
    if cycle_length < 1 or N % cycle_length:
        raise ValueError("cycle_length must divide the number of slots")
    if not 0 <= M <= cycle_length:
        raise ValueError(f"drop count {M} outside 0..{cycle_length}")
    p = instance.p_inv
    cycles = N // cycle_length
    A = np.zeros((2 * N + cycles, 3 * N))
    idx = np.arange(N)
    A[idx, idx] = -1.0
    A[idx, N + idx] = -1.0
    A[idx, 2 * N + idx] = -p
    A[N + idx, N : 2 * N] = np.tril(np.ones((N, N)))
    for j in range(cycles):
        A[2 * N + j, 2 * N + j * cycle_length : 2 * N + (j + 1) * cycle_length] = 1.0
    b = np.concatenate((-p, instance.initial_storage + np.cumsum(instance.arrivals), np.full(cycles, float(M))))
    c = np.concatenate((np.full(N, instance.price_conv), np.full(N, instance.price_renew), np.zeros(N)))
    upper = np.concatenate((np.full(2 * N, np.inf), np.ones(N)))
    return LinearProgram(c, A, b, np.zeros(3 * N), upper)


def _solve_relaxation(lp: LinearProgram, N: int):
    sol = solve_lp(lp)
    if sol.status != OPTIMAL:
        raise RuntimeError(f"relaxation solve returned status {sol.status!r}")
    chi = np.clip(sol.x[2 * N :], 0.0, 1.0)
    return max(sol.objective_value, 0.0), chi


def lower_bound(instance: Instance, M: Optional[int] = None):
    """Optimal value of the relaxation and its outage indicators ``chi``."""
    if M is None:
        M = instance.drop_budget
    return _solve_relaxation(build_relaxation(instance, M), instance.n_slots)


def fixed_drop_program(instance: Instance, drop_set) -> LinearProgram:
    """The relaxation with every ``chi`` pinned to the given drop set."""
    drop_set = normalize_drop_set(instance, drop_set)
    N = instance.n_slots
    base = build_relaxation(instance, len(drop_set))
    chi = np.zeros(N)
    chi[[s - 1 for s in drop_set]] = 1.0
    lower = base.lower.copy()
    upper = base.upper.copy()
    lower[2 * N :] = chi
    upper[2 * N :] = chi
    return LinearProgram(base.objective, base.A_ub, base.b_ub, lower, upper)
