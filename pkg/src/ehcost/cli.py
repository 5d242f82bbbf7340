"""Command-line entry point.

Exit status: 0 on success, 2 for invalid input, 3 when an exhaustive
search would exceed its subset cap, 1 for a failed self test.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__, backend_name
from .core import Instance, InstanceError
from .exact import DEFAULT_CAP, BudgetError, CapExceededError, oracle_exhaustive, solve_drop_one, solve_keep_one, solve_pruned_search
from .harness import ConfigError, load_config, run_experiment, selftest, write_csv, format_csv
from .heuristics import certified_wcr, lpcr, random_drop
from .io import read_instance, read_multicycle
from .lp import lower_bound
from .multicycle import mc_lower_bound, mc_lpcr, mc_oracle, mc_random_drop, mc_wcr, mc_wcr_certificates

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INPUT = 2
EXIT_CAP = 3

METHODS = ("oracle", "alg1", "alg2", "pruned", "lpcr", "wcr", "random")
MC_METHODS = ("oracle", "lpcr", "wcr", "random")


def _with_budget(inst: Instance, M: int) -> Instance:
    n = inst.n_slots
    if not 0 <= M < n:
        # epsilon must stay below 1, so M = N is passed to solvers directly
        return inst
    return inst.replace(epsilon=M / n)


def _solve_single(args) -> object:
    inst = read_instance(args.instance)
    M = inst.drop_budget if args.drops is None else args.drops
    if not 0 <= M <= inst.n_slots:
        raise ValueError(f"--drops must lie in 0..{inst.n_slots}")
    if args.method == "alg1":
        if M != 1:
            raise BudgetError(f"alg1 solves M = 1 only (got M = {M})")
        return solve_drop_one(_with_budget(inst, 1), prune=args.prune)
    if args.method == "alg2":
        if M != inst.n_slots - 1:
            raise BudgetError(f"alg2 solves M = N - 1 = {inst.n_slots - 1} only (got M = {M})")
        return solve_keep_one(_with_budget(inst, M))
    if args.method == "oracle":
        return oracle_exhaustive(inst, M, cap=args.cap)
    if args.method == "pruned":
        return solve_pruned_search(inst, M, cap=args.cap)
    if args.method == "lpcr":
        return lpcr(inst, M)
    if args.method == "wcr":
        return certified_wcr(inst, M)
    return random_drop(inst, M, seed=args.seed)


def _solve_multi(args):
    mci = read_multicycle(args.instance)
    if args.drops is not None and args.drops != mci.drops_per_cycle:
        raise ValueError("--drops cannot override K of a multi-cycle file")
    if args.method not in MC_METHODS:
        raise ValueError(f"multi-cycle files support methods {', '.join(MC_METHODS)}")
    if args.method == "oracle":
        return mc_oracle(mci, cap=args.cap), None
    if args.method == "lpcr":
        return mc_lpcr(mci), None
    if args.method == "random":
        return mc_random_drop(mci, seed=args.seed), None
    res = mc_wcr(mci)
    return res, mc_wcr_certificates(mci, res)


def _print_result(res, out, show_allocation: bool, certificates=None):
    out.write(f"method: {res.method}\n")
    out.write("drop_set: " + " ".join(str(s) for s in res.drops) + "\n")
    out.write(f"total_cost: {res.total_cost:.17g}\n")
    out.write(f"candidates_examined: {res.candidates_examined}\n")
    if res.certificate is not None:
        out.write(f"certificate: {res.certificate}\n")
    if certificates is not None:
        out.write("cycle_certificates: " + " ".join(str(c) if c else "none" for c in certificates) + "\n")
    if show_allocation:
        out.write("slot conv renew\n")
        for i, (c, r) in enumerate(zip(res.allocation.conv, res.allocation.renew), start=1):
            out.write(f"{i} {c:.17g} {r:.17g}\n")


def cmd_solve(args) -> int:
    if args.multicycle:
        res, certs = _solve_multi(args)
    else:
        res, certs = _solve_single(args), None
    _print_result(res, sys.stdout, args.show_allocation, certs)
    return EXIT_OK


def cmd_bound(args) -> int:
    if args.multicycle:
        mci = read_multicycle(args.instance)
        value, chi = mc_lower_bound(mci)
    else:
        inst = read_instance(args.instance)
        M = inst.drop_budget if args.drops is None else args.drops
        value, chi = lower_bound(inst, M)
    sys.stdout.write(f"lower_bound: {value:.17g}\n")
    if args.show_chi:
        sys.stdout.write("chi: " + " ".join(f"{c:.17g}" for c in chi) + "\n")
    return EXIT_OK


def cmd_experiment(args) -> int:
    config = load_config(args.config)
    if args.realizations is not None:
        config = config.replace(realizations=args.realizations)
    table = run_experiment(config, workers=args.workers)
    out = args.out or config.output
    if out:
        write_csv(out, config, table)
    else:
        sys.stdout.write(format_csv(config, table))
    return EXIT_OK


def cmd_selftest(args) -> int:
    sys.stdout.write(f"ehcost {__version__} ({backend_name()} kernels)\n")
    ok = selftest(instances=args.instances, seed=args.seed, stream=sys.stdout)
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ehcost", description="Energy-cost-optimal transmit scheduling under an outage budget.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one instance file")
    p.add_argument("instance")
    p.add_argument("--method", choices=METHODS, default="lpcr")
    p.add_argument("--drops", type=int, help="number of slots to drop (default: floor(N * epsilon))")
    p.add_argument("--seed", type=int, default=0, help="seed for --method random")
    p.add_argument("--prune", choices=("guarded", "arrival", "none"), default="guarded", help="candidate prune for alg1")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP, help="maximum number of drop sets to enumerate")
    p.add_argument("--multicycle", action="store_true", help="read a multi-cycle instance file")
    p.add_argument("--show-allocation", action="store_true")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bound", help="LP-relaxation lower bound")
    p.add_argument("instance")
    p.add_argument("--drops", type=int)
    p.add_argument("--multicycle", action="store_true")
    p.add_argument("--show-chi", action="store_true")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("experiment", help="run a Monte Carlo experiment and write CSV")
    p.add_argument("config")
    p.add_argument("--out", help="CSV path (default: config 'output' or stdout)")
    p.add_argument("--workers", type=int, help="worker processes (output is identical for any value)")
    p.add_argument("--realizations", type=int, help="override the configured realization count")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("selftest", help="randomized oracle-equivalence and KKT checks")
    p.add_argument("--instances", type=int, default=200)
    p.add_argument("--seed", type=int, default=12345)
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CapExceededError as exc:
        sys.stderr.write(f"ehcost: {exc}\n")
        return EXIT_CAP
    except (InstanceError, ConfigError, BudgetError, ValueError, OSError) as exc:
        sys.stderr.write(f"ehcost: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
