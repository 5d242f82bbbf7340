"""Plain-text instance files.

Single cycle::

    N R N0 alpha beta epsilon S0
    g_1 T_1
    ...
    g_N T_N

Multi-cycle files use the header ``Ncycles N K R N0 alpha beta`` followed
by ``Ncycles * N`` gain/arrival lines. ``#`` starts a comment anywhere on a
line; blank lines are ignored.
"""

from __future__ import annotations

import math
import os
from typing import Iterable, List, Tuple

from .core import Instance, InstanceError
from .multicycle import MultiCycleInstance


class InstanceFormatError(InstanceError):
    """Malformed instance file; ``line`` is the 1-based offending line."""

    def __init__(self, line: int, message: str, source: str = "<text>"):
        super().__init__(f"{source}:{line}: {message}")
        self.line = line
        self.source = source


def _records(text: str, source: str) -> List[Tuple[int, List[float]]]:
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        values = []
        for tok in body.split():
            try:
                v = float(tok)
            except ValueError:
                raise InstanceFormatError(lineno, f"not a number: {tok!r}", source) from None
            if math.isnan(v) or math.isinf(v):
                raise InstanceFormatError(lineno, f"non-finite value {tok!r}", source)
            if v < 0:
                raise InstanceFormatError(lineno, f"negative value {tok!r}", source)
            values.append(v)
        out.append((lineno, values))
    return out


def _count(value: float, lineno: int, what: str, source: str) -> int:
    if value != int(value):
        raise InstanceFormatError(lineno, f"{what} must be an integer, got {value:g}", source)
    return int(value)


def _slot_lines(records, n: int, header_line: int, source: str):
    body = records[1:]
    if len(body) != n:
        last = body[-1][0] if body else header_line
        raise InstanceFormatError(last, f"expected {n} gain/arrival lines, found {len(body)}", source)
    gains, arrivals = [], []
    for lineno, vals in body:
        if len(vals) != 2:
            raise InstanceFormatError(lineno, f"expected 'g T', got {len(vals)} fields", source)
        if vals[0] == 0:
            raise InstanceFormatError(lineno, "channel gain must be positive", source)
        gains.append(vals[0])
        arrivals.append(vals[1])
    return gains, arrivals


def _wrap(source: str, lineno: int, build):
    try:
        return build()
    except InstanceFormatError:
        raise
    except InstanceError as exc:
        raise InstanceFormatError(lineno, str(exc), source) from None


def parse_instance(text: str, source: str = "<text>") -> Instance:
    records = _records(text, source)
    if not records:
        raise InstanceFormatError(1, "empty instance file", source)
    lineno, head = records[0]
    if len(head) != 7:
        raise InstanceFormatError(lineno, f"header needs 7 fields 'N R N0 alpha beta epsilon S0', got {len(head)}", source)
    n = _count(head[0], lineno, "N", source)
    if n < 1:
        raise InstanceFormatError(lineno, "N must be at least 1", source)
    rate, noise, alpha, beta, eps, s0 = head[1:]
    gains, arrivals = _slot_lines(records, n, lineno, source)
    return _wrap(
        source,
        lineno,
        lambda: Instance(rate, noise, alpha, beta, gains, arrivals, initial_storage=s0, epsilon=eps),
    )


def parse_multicycle(text: str, source: str = "<text>") -> MultiCycleInstance:
    records = _records(text, source)
    if not records:
        raise InstanceFormatError(1, "empty instance file", source)
    lineno, head = records[0]
    if len(head) != 7:
        raise InstanceFormatError(lineno, f"header needs 7 fields 'Ncycles N K R N0 alpha beta', got {len(head)}", source)
    cycles = _count(head[0], lineno, "Ncycles", source)
    n = _count(head[1], lineno, "N", source)
    k = _count(head[2], lineno, "K", source)
    if cycles < 1 or n < 1:
        raise InstanceFormatError(lineno, "Ncycles and N must be at least 1", source)
    rate, noise, alpha, beta = head[3:]
    gains, arrivals = _slot_lines(records, cycles * n, lineno, source)
    return _wrap(source, lineno, lambda: MultiCycleInstance(cycles, n, k, rate, noise, alpha, beta, gains, arrivals))


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _slot_text(gains: Iterable[float], arrivals: Iterable[float]) -> str:
    return "".join(f"{_fmt(g)} {_fmt(t)}\n" for g, t in zip(gains, arrivals))


def format_instance(inst: Instance) -> str:
    head = " ".join(
        [str(inst.n_slots)]
        + [_fmt(v) for v in (inst.rate, inst.noise, inst.price_conv, inst.price_renew, inst.epsilon, inst.initial_storage)]
    )
    return "# N R N0 alpha beta epsilon S0\n" + head + "\n" + _slot_text(inst.gains, inst.arrivals)


def format_multicycle(mci: MultiCycleInstance) -> str:
    if mci.initial_storage:
        raise ValueError("the multi-cycle file format has no initial storage field")
    head = " ".join(
        [str(mci.cycles), str(mci.slots_per_cycle), str(mci.drops_per_cycle)]
        + [_fmt(v) for v in (mci.rate, mci.noise, mci.price_conv, mci.price_renew)]
    )
    return "# Ncycles N K R N0 alpha beta\n" + head + "\n" + _slot_text(mci.gains, mci.arrivals)


def read_instance(path) -> Instance:
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read(), os.fspath(path))


def read_multicycle(path) -> MultiCycleInstance:
    with open(path, encoding="utf-8") as fh:
        return parse_multicycle(fh.read(), os.fspath(path))


def write_instance(path, inst: Instance) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_instance(inst))


def write_multicycle(path, mci: MultiCycleInstance) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_multicycle(mci))
