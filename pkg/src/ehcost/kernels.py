"""Hot numeric kernels, each with a numba implementation and a numpy twin.

The public names at the bottom (``greedy_renew``, ``product_costs``,
``pivot``, ``dual_ratio``) are bound to one backend at import time; the
``*_numba`` / ``*_numpy`` variants stay importable so tests and the
benchmark can compare them directly.

Indices inside this module are 0-based.
"""

import itertools

import numpy as np

from ._accel import USE_NUMBA, njit

# ---------------------------------------------------------------------------
# greedy renewable draw
# ---------------------------------------------------------------------------


@njit
def greedy_renew_numba(demand, arrivals, storage):
    n = demand.shape[0]
    renew = np.empty(n)
    s = storage
    for k in range(n):
        s += arrivals[k]
        r = demand[k] if demand[k] < s else s
        renew[k] = r
        s -= r
    return renew


def greedy_renew_numpy(demand, arrivals, storage):
    # Slot loop vectorised across leading (batch) axes; same arithmetic as the
    # numba loop, so both backends agree bitwise.
    demand = np.asarray(demand, dtype=np.float64)
    arrivals = np.asarray(arrivals, dtype=np.float64)
    renew = np.empty(demand.shape)
    s = np.full(demand.shape[:-1], float(storage))
    for k in range(demand.shape[-1]):
        s = s + arrivals[k]
        r = np.minimum(demand[..., k], s)
        renew[..., k] = r
        s = s - r
    return renew


# ---------------------------------------------------------------------------
# exhaustive drop-set costing
# ---------------------------------------------------------------------------
#
# ``pools`` is a (groups, width) int array of candidate slots per group padded
# with -1, ``pool_sizes`` the true lengths and ``picks`` how many slots to drop
# in each group.  Drop sets are visited in lexicographic order of their sorted
# slot list (first group most significant), and the cost of the greedy
# allocation for each is written to ``out``.


@njit
def product_costs_numba(p_inv, arrivals, storage, alpha, beta, pools, pool_sizes, picks, out):
    n = p_inv.shape[0]
    groups = pools.shape[0]
    width = 0
    for g in range(groups):
        if picks[g] > width:
            width = picks[g]
    pos = np.zeros((groups, max(width, 1)), dtype=np.int64)
    for g in range(groups):
        for j in range(picks[g]):
            pos[g, j] = j
    dropped = np.zeros(n, dtype=np.bool_)
    total_inv = 0.0
    for i in range(n):
        total_inv += p_inv[i]
    count = out.shape[0]
    for idx in range(count):
        for i in range(n):
            dropped[i] = False
        kept_inv = total_inv
        for g in range(groups):
            for j in range(picks[g]):
                slot = pools[g, pos[g, j]]
                dropped[slot] = True
                kept_inv -= p_inv[slot]
        s = storage
        used = 0.0
        for k in range(n):
            s += arrivals[k]
            if not dropped[k]:
                r = p_inv[k] if p_inv[k] < s else s
                used += r
                s -= r
        out[idx] = alpha * kept_inv - (alpha - beta) * used
        # advance the mixed-radix combination counter, last group fastest
        g = groups - 1
        while g >= 0:
            k_g = picks[g]
            size = pool_sizes[g]
            j = k_g - 1
            while j >= 0 and pos[g, j] == size - k_g + j:
                j -= 1
            if j >= 0:
                pos[g, j] += 1
                for t in range(j + 1, k_g):
                    pos[g, t] = pos[g, t - 1] + 1
                break
            for t in range(k_g):
                pos[g, t] = t
            g -= 1
    return out


def _iter_drop_masks(n, pools, pool_sizes, picks):
    per_group = [
        list(itertools.combinations(pools[g, : pool_sizes[g]].tolist(), int(picks[g])))
        for g in range(pools.shape[0])
    ]
    for choice in itertools.product(*per_group):
        yield [slot for combo in choice for slot in combo]


def product_costs_numpy(p_inv, arrivals, storage, alpha, beta, pools, pool_sizes, picks, out, chunk=8192):
    n = p_inv.shape[0]
    sets = _iter_drop_masks(n, pools, pool_sizes, picks)
    done = 0
    total = out.shape[0]
    while done < total:
        batch = list(itertools.islice(sets, min(chunk, total - done)))
        demand = np.broadcast_to(p_inv, (len(batch), n)).copy()
        for row, slots in enumerate(batch):
            demand[row, slots] = 0.0
        used = greedy_renew_numpy(demand, arrivals, storage).sum(axis=1)
        out[done : done + len(batch)] = alpha * demand.sum(axis=1) - (alpha - beta) * used
        done += len(batch)
    return out


# ---------------------------------------------------------------------------
# dense tableau simplex steps
# ---------------------------------------------------------------------------


@njit
def pivot_numba(tab, r, q):
    rows, cols = tab.shape
    inv = 1.0 / tab[r, q]
    for j in range(cols):
        tab[r, j] *= inv
    tab[r, q] = 1.0
    for i in range(rows):
        if i == r:
            continue
        f = tab[i, q]
        if f != 0.0:
            for j in range(cols):
                tab[i, j] -= f * tab[r, j]
            tab[i, q] = 0.0


def pivot_numpy(tab, r, q):
    tab[r] /= tab[r, q]
    tab[r, q] = 1.0
    col = tab[:, q].copy()
    col[r] = 0.0
    nz = np.flatnonzero(col)
    if nz.size:
        tab[nz] -= np.outer(col[nz], tab[r])
        tab[nz, q] = 0.0


# status codes: 0 basic, 1 at lower bound, 2 at upper bound
#
# Ratio-test rule shared by both backends: among eligible columns take those
# whose ratio |d_j / a_j| lies within a small window of the minimum, then the
# largest |a_j| (pivot stability), then the smallest index.


@njit
def dual_ratio_numba(row, d, status, increase, piv_tol):
    """Entering column for the bounded dual simplex ratio test, or -1."""
    m = row.shape[0]
    lo = np.inf
    for j in range(m):
        st = status[j]
        a = row[j]
        if st == 0:
            continue
        if increase:
            ok = (st == 1 and a < -piv_tol) or (st == 2 and a > piv_tol)
        else:
            ok = (st == 1 and a > piv_tol) or (st == 2 and a < -piv_tol)
        if ok:
            ratio = abs(d[j]) / abs(a)
            if ratio < lo:
                lo = ratio
    if lo == np.inf:
        return -1
    window = lo + 1e-11 * (1.0 + lo)
    best = -1
    best_mag = 0.0
    for j in range(m):
        st = status[j]
        a = row[j]
        if st == 0:
            continue
        if increase:
            ok = (st == 1 and a < -piv_tol) or (st == 2 and a > piv_tol)
        else:
            ok = (st == 1 and a > piv_tol) or (st == 2 and a < -piv_tol)
        if ok and abs(d[j]) / abs(a) <= window and abs(a) > best_mag:
            best = j
            best_mag = abs(a)
    return best


def dual_ratio_numpy(row, d, status, increase, piv_tol):
    if increase:
        ok = ((status == 1) & (row < -piv_tol)) | ((status == 2) & (row > piv_tol))
    else:
        ok = ((status == 1) & (row > piv_tol)) | ((status == 2) & (row < -piv_tol))
    cand = np.flatnonzero(ok)
    if cand.size == 0:
        return -1
    mags = np.abs(row[cand])
    ratios = np.abs(d[cand]) / mags
    lo = ratios.min()
    near = ratios <= lo + 1e-11 * (1.0 + lo)
    # argmax returns the first maximum, i.e. the smallest index among equals
    return int(cand[near][np.argmax(mags[near])])


if USE_NUMBA:
    greedy_renew = greedy_renew_numba
    product_costs = product_costs_numba
    pivot = pivot_numba
    dual_ratio = dual_ratio_numba
else:
    greedy_renew = greedy_renew_numpy
    product_costs = product_costs_numpy
    pivot = pivot_numpy
    dual_ratio = dual_ratio_numpy
