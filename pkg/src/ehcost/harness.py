"""Seeded Monte Carlo experiments written as CSV.

Each realization draws its own random stream from ``(seed, index)``, so a
realization can be recomputed alone and a parallel run aggregates to the
same bytes as a serial one: per-realization results are stacked in index
order before any averaging.
"""

from __future__ import annotations

import dataclasses
import hashlib
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from .core import Instance
from .exact import PRUNE_RULES, solve_drop_one, solve_keep_one
from .heuristics import lpcr, random_drop, wcr
from .lp import lower_bound
from .multicycle import MultiCycleInstance, mc_lower_bound, mc_lpcr, mc_random_drop, mc_wcr
from .partialcesi import ChannelDistribution, allocate_partial_cesi

EXPERIMENTS = ("search-count", "cost-vs-drops", "gap-to-bound", "multicycle-gap", "partial-cesi")
ZERO_BOUND = 1e-12


class ConfigError(ValueError):
    """Invalid experiment configuration."""


def _dists(specs) -> Tuple[ChannelDistribution, ...]:
    return tuple(d if isinstance(d, ChannelDistribution) else ChannelDistribution.parse(d) for d in specs)


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of one experiment.

    ``n_slots`` is the slot count per cycle (total for single-cycle runs).
    ``drops`` is the grid of drop counts, per cycle for ``multicycle-gap``;
    empty means every multiple of ``drop_step`` up to ``n_slots``.
    ``workers`` and ``output`` only affect how a run is executed, never
    what it produces, and are left out of the config hash.
    """

    experiment: str
    n_slots: int = 200
    realizations: int = 100
    seed: int = 0
    fading: ChannelDistribution = ChannelDistribution("exponential")
    arrival_high: float = 1.0
    rate: float = 1.0
    noise: float = 1.0
    alpha: float = 1.0
    beta: float = 0.2
    drops: Tuple[int, ...] = ()
    drop_step: int = 20
    cycles: int = 4
    n_grid: Tuple[int, ...] = (200,)
    families: Tuple[ChannelDistribution, ...] = _dists(("rayleigh", "nakagami", "lognormal"))
    prune: str = "guarded"
    eps: Tuple[float, ...] = tuple(round(0.05 * k, 2) for k in range(1, 11))
    arrival_highs: Tuple[float, ...] = (10.0, 50.0)
    workers: int = 1
    output: Optional[str] = field(default=None)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {', '.join(EXPERIMENTS)}")
        if self.realizations < 1:
            raise ConfigError("realizations must be at least 1")
        if self.n_slots < 1 or self.cycles < 1:
            raise ConfigError("n_slots and cycles must be at least 1")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.drop_step < 1:
            raise ConfigError("drop_step must be at least 1")
        if not self.arrival_high >= 0 or any(not b >= 0 for b in self.arrival_highs):
            raise ConfigError("arrival bounds must be non-negative")
        if not (self.alpha > self.beta > 0 and self.noise > 0 and self.rate >= 0):
            raise ConfigError("need alpha > beta > 0, noise > 0 and rate >= 0")
        if self.prune not in PRUNE_RULES:
            raise ConfigError(f"prune must be one of {', '.join(PRUNE_RULES)}")
        if self.experiment == "search-count" and any(n < 2 for n in self.n_grid):
            raise ConfigError("search-count needs N >= 2 at every grid point")
        if self.experiment == "partial-cesi" and (not self.eps or any(not 0 < e < 1 for e in self.eps)):
            raise ConfigError("eps grid must be non-empty and lie strictly inside (0, 1)")
        if any(not 0 <= m <= self.n_slots for m in self.drops):
            raise ConfigError(f"drop counts must lie in 0..{self.n_slots}")

    @property
    def drop_grid(self) -> Tuple[int, ...]:
        if self.drops:
            return tuple(self.drops)
        return tuple(range(self.drop_step, self.n_slots + 1, self.drop_step))

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def canonical_text(self) -> str:
        """Deterministic key=value rendering of every field that affects results."""
        lines = []
        for f in dataclasses.fields(self):
            if f.name in ("workers", "output"):
                continue
            lines.append(f"{f.name} = {_render(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()


def _render(value) -> str:
    if isinstance(value, tuple):
        sep = "; " if value and isinstance(value[0], ChannelDistribution) else ", "
        return sep.join(_render(v) for v in value)
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


# ---------------------------------------------------------------------------
# config files
# ---------------------------------------------------------------------------


def _int_list(text: str) -> Tuple[int, ...]:
    out = []
    for part in filter(None, (p.strip() for p in text.split(","))):
        if ":" in part:
            bits = [int(b) for b in part.split(":")]
            if len(bits) != 3 or bits[2] < 1:
                raise ValueError(f"range must be start:stop:step, got {part!r}")
            out.extend(range(bits[0], bits[1] + 1, bits[2]))
        else:
            out.append(int(part))
    return tuple(out)


def _float_list(text: str) -> Tuple[float, ...]:
    return tuple(float(p) for p in text.split(",") if p.strip())


_PARSERS: dict = {
    "experiment": str.strip,
    "n_slots": int,
    "realizations": int,
    "seed": int,
    "fading": ChannelDistribution.parse,
    "arrival_high": float,
    "rate": float,
    "noise": float,
    "alpha": float,
    "beta": float,
    "drops": _int_list,
    "drop_step": int,
    "cycles": int,
    "n_grid": _int_list,
    "families": lambda t: _dists(p for p in t.split(";") if p.strip()),
    "prune": str.strip,
    "eps": _float_list,
    "arrival_highs": _float_list,
    "workers": int,
    "output": str.strip,
}


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    """Read ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        key, sep, value = body.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(f"{source}:{lineno}: expected key = value")
        if key not in _PARSERS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = _PARSERS[key](value.strip())
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key}: {exc}") from None
    if "experiment" not in values:
        raise ConfigError(f"{source}: missing 'experiment'")
    try:
        return ExperimentConfig(**values)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), str(path))


# ---------------------------------------------------------------------------
# instance generation
# ---------------------------------------------------------------------------


def _stream(config: ExperimentConfig, index: int) -> np.random.Generator:
    return np.random.default_rng([config.seed, index])


def _draw(config: ExperimentConfig, index: int, n: int):
    rng = _stream(config, index)
    gains = config.fading.sample(rng, n)
    # arrivals scale a unit draw so every b sees the same underlying uniforms
    arrivals = config.arrival_high * rng.uniform(0.0, 1.0, n)
    return gains, arrivals


def sample_instance(config: ExperimentConfig, realization_index: int, epsilon: float = 0.0) -> Instance:
    """Realization ``realization_index`` of the configured single-cycle model."""
    gains, arrivals = _draw(config, realization_index, config.n_slots)
    return Instance(config.rate, config.noise, config.alpha, config.beta, gains, arrivals, epsilon=epsilon)


def sample_multicycle(config: ExperimentConfig, realization_index: int, drops_per_cycle: int = 0) -> MultiCycleInstance:
    gains, arrivals = _draw(config, realization_index, config.cycles * config.n_slots)
    return MultiCycleInstance(
        config.cycles, config.n_slots, drops_per_cycle,
        config.rate, config.noise, config.alpha, config.beta, gains, arrivals,
    )


# ---------------------------------------------------------------------------
# per-realization tasks (module level so they pickle)
# ---------------------------------------------------------------------------

COST_METHODS = ("bound", "lpcr", "wcr", "random")
GAP_METHODS = ("lpcr", "wcr")


def _sweep_single(config: ExperimentConfig, index: int) -> np.ndarray:
    inst = sample_instance(config, index)
    out = np.empty((len(config.drop_grid), len(COST_METHODS)))
    for row, M in enumerate(config.drop_grid):
        bound, chi = lower_bound(inst, M)
        out[row] = (
            bound,
            lpcr(inst, M, chi=chi).total_cost,
            wcr(inst, M).total_cost,
            random_drop(inst, M, seed=config.seed).total_cost,
        )
    return out


def _sweep_multi(config: ExperimentConfig, index: int) -> np.ndarray:
    base = sample_multicycle(config, index)
    out = np.empty((len(config.drop_grid), len(COST_METHODS)))
    for row, K in enumerate(config.drop_grid):
        mci = dataclasses.replace(base, drops_per_cycle=K)
        bound, _ = mc_lower_bound(mci)
        out[row] = (
            bound,
            mc_lpcr(mci).total_cost,
            mc_wcr(mci).total_cost,
            mc_random_drop(mci, seed=config.seed).total_cost,
        )
    return out


def _search_counts(config: ExperimentConfig, index: int) -> np.ndarray:
    out = np.empty((len(config.families), len(config.n_grid), 2))
    for a, fam in enumerate(config.families):
        for b, n in enumerate(config.n_grid):
            inst = sample_instance(config.replace(fading=fam, n_slots=n), index, epsilon=1.0 / n)
            out[a, b, 0] = solve_drop_one(inst, prune=config.prune).candidates_examined
            out[a, b, 1] = solve_keep_one(inst.replace(epsilon=(n - 1) / n)).candidates_examined
    return out


def _cesi_costs(config: ExperimentConfig, index: int) -> np.ndarray:
    rng = _stream(config, index)
    unit = rng.uniform(0.0, 1.0, config.n_slots)
    out = np.empty((len(config.eps), len(config.arrival_highs)))
    for a, eps in enumerate(config.eps):
        for b, high in enumerate(config.arrival_highs):
            _, out[a, b] = allocate_partial_cesi(
                config.fading, config.rate, config.noise, eps, high * unit, config.alpha, config.beta
            )
    return out


def _call(args):
    fn, config, index = args
    return fn(config, index)


def run_realizations(config: ExperimentConfig, task: Callable, workers: Optional[int] = None) -> np.ndarray:
    """Stack ``task(config, i)`` for every realization, in index order."""
    workers = config.workers if workers is None else workers
    jobs = [(task, config, i) for i in range(config.realizations)]
    if workers <= 1:
        results = [_call(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_call, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    return np.stack(results)


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Table:
    columns: Tuple[str, ...]
    rows: Tuple[tuple, ...]

    def column(self, name: str, **where) -> list:
        i = self.columns.index(name)
        keys = [(self.columns.index(k), v) for k, v in where.items()]
        return [r[i] for r in self.rows if all(r[j] == v for j, v in keys)]


@dataclass(frozen=True, eq=False)
class DropSweep:
    """Per-realization costs, shape (realizations, len(drops), len(COST_METHODS))."""

    drops: Tuple[int, ...]
    costs: np.ndarray

    def mean_cost(self, method: str) -> np.ndarray:
        return self.costs[:, :, COST_METHODS.index(method)].mean(axis=0)

    def gaps(self, method: str):
        """Mean gap per drop count and whether any realization had a zero bound."""
        bound = self.costs[:, :, 0]
        diff = self.costs[:, :, COST_METHODS.index(method)] - bound
        tiny = bound < ZERO_BOUND
        per = np.where(tiny, diff, diff / np.where(tiny, 1.0, bound))
        return per.mean(axis=0), tiny.any(axis=0)


def drop_sweep(config: ExperimentConfig, workers: Optional[int] = None) -> DropSweep:
    """Costs of every method at every drop count, single- or multi-cycle."""
    task = _sweep_multi if config.experiment == "multicycle-gap" else _sweep_single
    return DropSweep(config.drop_grid, run_realizations(config, task, workers))


def _require(config: ExperimentConfig, *kinds: str):
    if config.experiment not in kinds:
        raise ConfigError(f"expected experiment {' or '.join(kinds)}, got {config.experiment}")


def run_search_count(config: ExperimentConfig, workers: Optional[int] = None) -> Table:
    _require(config, "search-count")
    means = run_realizations(config, _search_counts, workers).mean(axis=0)
    rows = []
    for a, fam in enumerate(config.families):
        for b, n in enumerate(config.n_grid):
            rows.append((fam.label, n, "alg1", means[a, b, 0]))
            rows.append((fam.label, n, "alg2", means[a, b, 1]))
    return Table(("family", "N", "algorithm", "mean_candidates"), tuple(rows))


def run_cost_vs_drops(config: ExperimentConfig, workers: Optional[int] = None) -> Table:
    _require(config, "cost-vs-drops")
    sweep = drop_sweep(config, workers)
    means = {m: sweep.mean_cost(m) for m in COST_METHODS}
    rows = [(M, m, means[m][i]) for i, M in enumerate(sweep.drops) for m in COST_METHODS]
    return Table(("M", "method", "mean_cost"), tuple(rows))


def gap_table(sweep: DropSweep) -> Table:
    """Gap rows; ``gap_kind`` is ``absolute`` where some bound was zero."""
    cols = {m: sweep.gaps(m) for m in GAP_METHODS}
    rows = []
    for i, M in enumerate(sweep.drops):
        for m in GAP_METHODS:
            gap, absolute = cols[m]
            rows.append((M, m, gap[i], "absolute" if absolute[i] else "relative"))
    return Table(("M", "method", "mean_relative_gap", "gap_kind"), tuple(rows))


def run_gap_to_bound(config: ExperimentConfig, workers: Optional[int] = None) -> Table:
    _require(config, "gap-to-bound", "multicycle-gap")
    return gap_table(drop_sweep(config, workers))


def run_partial_cesi(config: ExperimentConfig, workers: Optional[int] = None) -> Table:
    _require(config, "partial-cesi")
    means = run_realizations(config, _cesi_costs, workers).mean(axis=0)
    rows = [(eps, high, means[a, b]) for b, high in enumerate(config.arrival_highs) for a, eps in enumerate(config.eps)]
    return Table(("eps", "arrival_high", "mean_cost"), tuple(rows))


RUNNERS = {
    "search-count": run_search_count,
    "cost-vs-drops": run_cost_vs_drops,
    "gap-to-bound": run_gap_to_bound,
    "multicycle-gap": run_gap_to_bound,
    "partial-cesi": run_partial_cesi,
}


def run_experiment(config: ExperimentConfig, workers: Optional[int] = None) -> Table:
    return RUNNERS[config.experiment](config, workers)


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------


def _cell(value) -> str:
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _lognormal_note(config: ExperimentConfig) -> str:
    laws = [config.fading] + list(config.families if config.experiment == "search-count" else [])
    parts = sorted({f"sigma2={d.sigma2:g},mu={d.log_location:.17g}" for d in laws if d.kind == "lognormal"})
    return "; ".join(parts) if parts else "none"


def format_csv(config: ExperimentConfig, table: Table) -> str:
    from . import __version__

    buf = io.StringIO()
    buf.write(
        f"# ehcost {__version__} experiment={config.experiment} seed={config.seed} "
        f"realizations={config.realizations} config_sha256={config.digest()}\n"
    )
    buf.write(f"# lognormal gains scaled to the configured mean: {_lognormal_note(config)}\n")
    buf.write(",".join(table.columns) + "\n")
    for row in table.rows:
        buf.write(",".join(_cell(v) for v in row) + "\n")
    return buf.getvalue()


def write_csv(path, config: ExperimentConfig, table: Table) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_csv(config, table))


def read_csv_rows(text: str) -> list:
    """Data rows of a CSV produced by ``format_csv`` (header comments skipped)."""
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    return [ln.split(",") for ln in lines[1:]]


# ---------------------------------------------------------------------------
# self test
# ---------------------------------------------------------------------------


def selftest(instances: int = 200, seed: int = 12345, stream=None) -> bool:
    """Randomized oracle-equivalence and KKT checks on small instances."""
    from .core import COST_RTOL, greedy_allocate, verify_greedy_kkt
    from .exact import oracle_exhaustive, solve_pruned_search
    from .lp import fixed_drop_program, solve_lp

    def close(a, b):
        return abs(a - b) <= COST_RTOL * max(1.0, abs(b))

    failures = {"alg1": 0, "alg2": 0, "pruned": 0, "kkt": 0, "fixed-lp": 0, "sandwich": 0}
    rng = np.random.default_rng(seed)
    for _ in range(instances):
        n = int(rng.integers(4, 11))
        inst = Instance(1.0, 1.0, 1.0, 0.2, rng.exponential(size=n), rng.uniform(size=n))
        if not close(solve_drop_one(inst.replace(epsilon=1 / n)).total_cost, oracle_exhaustive(inst, 1).total_cost):
            failures["alg1"] += 1
        if not close(solve_keep_one(inst.replace(epsilon=(n - 1) / n)).total_cost, oracle_exhaustive(inst, n - 1).total_cost):
            failures["alg2"] += 1
        M = int(rng.integers(0, n + 1))
        best = oracle_exhaustive(inst, M).total_cost
        if not close(solve_pruned_search(inst, M).total_cost, best):
            failures["pruned"] += 1
        lb, _ = lower_bound(inst, M)
        if not (lb <= best + COST_RTOL * max(1.0, best) and best <= min(lpcr(inst, M).total_cost, wcr(inst, M).total_cost) + COST_RTOL * max(1.0, best)):
            failures["sandwich"] += 1
        drop = (rng.permutation(n)[:M] + 1).tolist()
        alloc = greedy_allocate(inst, drop)
        if not verify_greedy_kkt(inst, drop, alloc):
            failures["kkt"] += 1
        sol = solve_lp(fixed_drop_program(inst, drop))
        greedy_cost = float(inst.price_conv * alloc.conv.sum() + inst.price_renew * alloc.renew.sum())
        if not close(sol.objective_value, greedy_cost):
            failures["fixed-lp"] += 1
    ok = not any(failures.values())
    if stream is not None:
        for name, count in failures.items():
            stream.write(f"{'PASS' if count == 0 else 'FAIL'} {name}: {instances - count}/{instances}\n")
    return ok


__all__ = [
    "EXPERIMENTS",
    "COST_METHODS",
    "GAP_METHODS",
    "ConfigError",
    "ExperimentConfig",
    "Table",
    "DropSweep",
    "parse_config",
    "load_config",
    "sample_instance",
    "sample_multicycle",
    "run_realizations",
    "drop_sweep",
    "gap_table",
    "run_search_count",
    "run_cost_vs_drops",
    "run_gap_to_bound",
    "run_partial_cesi",
    "run_experiment",
    "format_csv",
    "write_csv",
    "read_csv_rows",
    "selftest",
]
