"""Causal scheduling when only the fading law is known.

Every slot is given the same total power, the smallest one whose outage
probability under the gain distribution is at most ``eps``; harvested
energy is spent greedily and conventional energy covers the rest.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import optimize, special

from . import kernels
from .core import Allocation

KINDS = ("exponential", "gamma_nakagami", "lognormal")
_ALIASES = {
    "exp": "exponential",
    "exponential": "exponential",
    "rayleigh": "exponential",
    "nakagami": "gamma_nakagami",
    "gamma": "gamma_nakagami",
    "gamma_nakagami": "gamma_nakagami",
    "lognormal": "lognormal",
}


@dataclass(frozen=True)
class ChannelDistribution:
    """Power-gain law with a given mean.

    ``m`` is the Nakagami shape (the power gain is gamma(m, mean/m));
    ``sigma2`` is the variance of the underlying normal of the lognormal,
    whose location is set so that the mean gain equals ``mean``.
    """

    kind: str
    mean: float = 1.0
    m: Optional[float] = None
    sigma2: Optional[float] = None

    def __post_init__(self):
        kind = _ALIASES.get(self.kind)
        if kind is None:
            raise ValueError(f"unknown fading kind {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if not (self.mean > 0 and math.isfinite(self.mean)):
            raise ValueError("mean gain must be positive")
        if kind == "gamma_nakagami":
            m = 2.0 if self.m is None else float(self.m)
            if m <= 0:
                raise ValueError("Nakagami shape must be positive")
            object.__setattr__(self, "m", m)
        if kind == "lognormal":
            s2 = 1.0 if self.sigma2 is None else float(self.sigma2)
            if s2 <= 0:
                raise ValueError("lognormal sigma2 must be positive")
            object.__setattr__(self, "sigma2", s2)

    @classmethod
    def parse(cls, text: str) -> "ChannelDistribution":
        """Parse ``exp:mean=1``, ``nakagami:m=2,mean=1`` or ``lognormal:sigma2=1,mean=1``."""
        name, _, params = text.strip().partition(":")
        kwargs = {}
        for item in filter(None, (p.strip() for p in params.split(","))):
            key, sep, value = item.partition("=")
            if not sep or key.strip() not in ("mean", "m", "sigma2"):
                raise ValueError(f"bad fading parameter {item!r} in {text!r}")
            kwargs[key.strip()] = float(value)
        return cls(name.strip().lower(), **kwargs)

    def __str__(self):
        if self.kind == "exponential":
            return f"exp:mean={self.mean:g}"
        if self.kind == "gamma_nakagami":
            return f"nakagami:m={self.m:g},mean={self.mean:g}"
        return f"lognormal:sigma2={self.sigma2:g},mean={self.mean:g}"

    @property
    def label(self) -> str:
        return {"exponential": "rayleigh", "gamma_nakagami": "nakagami", "lognormal": "lognormal"}[self.kind]

    @property
    def log_location(self) -> float:
        """Mean of the underlying normal for the lognormal law."""
        return math.log(self.mean) - 0.5 * self.sigma2

    def cdf(self, x):
        x = np.asarray(x, dtype=np.float64)
        pos = np.maximum(x, 0.0)
        if self.kind == "exponential":
            out = -np.expm1(-pos / self.mean)
        elif self.kind == "gamma_nakagami":
            out = special.gammainc(self.m, pos * self.m / self.mean)
        else:
            with np.errstate(divide="ignore"):
                z = (np.log(pos) - self.log_location) / math.sqrt(self.sigma2)
            out = special.ndtr(z)
        return np.where(x > 0, out, 0.0)

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        if self.kind == "exponential":
            return rng.exponential(self.mean, size)
        if self.kind == "gamma_nakagami":
            return rng.gamma(self.m, self.mean / self.m, size)
        return rng.lognormal(self.log_location, math.sqrt(self.sigma2), size)


def quantile(dist: ChannelDistribution, eps: float) -> float:
    """Gain q with ``dist.cdf(q) == eps``.

    Closed form for the exponential law; otherwise a bracketed root search
    on [1e-12, mean * 1e6].
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie strictly between 0 and 1")
    if dist.kind == "exponential":
        return -dist.mean * math.log1p(-eps)
    lo, hi = 1e-12, dist.mean * 1e6
    f = lambda g: float(dist.cdf(g)) - eps  # noqa: E731
    if f(lo) > 0:
        return lo
    return optimize.brentq(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)


def partial_cesi_power(dist: ChannelDistribution, rate: float, noise: float, eps: float) -> float:
    """Per-slot total power that keeps the outage probability at ``eps``."""
    return noise * math.expm1(rate) / quantile(dist, eps)


def allocate_partial_cesi(
    dist: ChannelDistribution,
    rate: float,
    noise: float,
    eps: float,
    arrivals,
    price_conv: float,
    price_renew: float,
    initial_storage: float = 0.0,
):
    """Causal allocation and its cost for the given arrival sequence.

    Slot k's allocation depends only on arrivals up to k.
    """
    arrivals = np.asarray(arrivals, dtype=np.float64)
    if np.any(arrivals < 0) or not np.all(np.isfinite(arrivals)):
        raise ValueError("arrivals must be finite and non-negative")
    power = partial_cesi_power(dist, rate, noise, eps)
    demand = np.full(arrivals.shape[0], power)
    renew = kernels.greedy_renew(demand, np.ascontiguousarray(arrivals), float(initial_storage))
    conv = np.maximum(demand - renew, 0.0)
    alloc = Allocation(conv=conv, renew=renew)
    cost = float(price_conv * conv.sum() + price_renew * renew.sum())
    return alloc, cost


def outage_frequency(dist: ChannelDistribution, power: float, rate: float, noise: float, n_draws: int, rng) -> float:
    """Fraction of sampled gains for which ``power`` misses the target rate."""
    g = dist.sample(rng, n_draws)
    return float(np.mean(np.log1p(g * power / noise) < rate))

