"""Numeric checks of the limit behaviour of s_{r,n} for the dynamic families.

Everything here is a finite-n evaluation: closed forms for the dynamic
uniform, certified truncated sums for the geometric, and ratio bands that
should approach 1 along a grid of sample sizes.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .distributions import (
    DiscretePareto,
    DistributionSpec,
    DynamicGeometric,
    DynamicUniform,
    FixedGeometric,
    _floor_power,
)
from .numerics import gamma_function

_EXACT = 1e-12
_CHUNK = 1 << 14


class Regime(str, enum.Enum):
    NORMAL = "normal"
    POISSON = "poisson"
    VANISHING_SD = "vanishing_sd"
    UNKNOWN = "unknown"
    BOUNDED_OSCILLATING = "bounded_oscillating"


@dataclass(frozen=True)
class AsymptoticRegime:
    family: str
    params: dict = field(hash=False)
    r: int
    classification: Regime
    poisson_mean: Optional[float] = None


def _close(x: float, y: float) -> bool:
    return abs(x - y) <= _EXACT * max(1.0, abs(y))


def _uniform_regime(gamma: float, r: int) -> tuple[Regime, Optional[float]]:
    if gamma <= 0:
        return Regime.UNKNOWN, None
    if gamma < 1:
        return Regime.VANISHING_SD, None
    if _close(gamma, 1.0):
        return (Regime.NORMAL, None) if r == 0 else (Regime.UNKNOWN, None)
    if r == 0:
        return Regime.UNKNOWN, None
    edge = 1.0 + 1.0 / r
    if _close(gamma, edge):
        return Regime.POISSON, 1.0 / math.factorial(r + 1)
    if gamma < edge:
        return Regime.NORMAL, None
    return Regime.VANISHING_SD, None


def classify_regime(spec: DistributionSpec, r: int) -> AsymptoticRegime:
    """Which limit law the theory gives for T_r under ``spec``."""
    if r < 0:
        raise ValueError("r must be nonnegative")
    mean = None
    if isinstance(spec, DynamicUniform):
        family, params = "dunif", {"gamma": spec.gamma}
        regime, mean = _uniform_regime(spec.gamma, r)
    elif isinstance(spec, DynamicGeometric):
        # a_n = c n^beta with 0 < beta < 1 always has a_n -> inf and a_n / n -> 0
        family, params = "dgeom", {"c": spec.c, "beta": spec.beta}
        regime = Regime.NORMAL
    elif isinstance(spec, FixedGeometric):
        family, params = "geom", {"p": spec.p}
        regime = Regime.BOUNDED_OSCILLATING
    elif isinstance(spec, DiscretePareto):
        family, params = "pareto", {"alpha": spec.alpha}
        regime = Regime.NORMAL
    else:
        family, params = type(spec).__name__, dict(vars(spec))
        regime = Regime.UNKNOWN
    return AsymptoticRegime(family, params, r, regime, mean)


# -- dynamic uniform ---------------------------------------------------------


def uniform_s_squared_closed_form(gamma: float, n: int, r: int) -> float:
    """K (r+1+n/K) e^{-n/K} (n/K)^{r+1} / r!  with K = floor(n^gamma)."""
    K = _floor_power(n, gamma)
    x = n / K
    log_val = math.log(K) + math.log(r + 1 + x) - x + (r + 1) * math.log(x) - math.lgamma(r + 1)
    return math.exp(log_val)


def uniform_equivalent(gamma: float, n: int, r: int) -> float:
    """The stated asymptotic equivalent of s^2 (gamma = 1 or gamma > 1)."""
    if _close(gamma, 1.0):
        return n * (r + 2) / math.factorial(r) * math.exp(-1.0)
    if gamma > 1:
        return float(n) ** (r + 1 - gamma * r) * (r + 1) / math.factorial(r)
    raise ValueError(f"no asymptotic equivalent for gamma={gamma} (need gamma = 1 or gamma > 1)")


def uniform_asymptotic_ratio(gamma: float, r: int, n_grid: Sequence[int]) -> list[float]:
    """s^2(n) / equivalent(n) for each n in ``n_grid``."""
    return [uniform_s_squared_closed_form(gamma, n, r) / uniform_equivalent(gamma, n, r) for n in n_grid]


# -- geometric ---------------------------------------------------------------


def scale_from_p(p: float) -> float:
    return -1.0 / math.log1p(-p)


def p_from_scale(a: float) -> float:
    return -math.expm1(-1.0 / a)


def _log_expm1(y: float) -> float:
    return y + math.log1p(-math.exp(-y)) if y > 30 else math.log(math.expm1(y))


def _h_sum(a: float, n: int, eta: float, rtol: float = 1e-12) -> float:
    """sum_{l>=1} h_{n,eta}(l), h = g_eta(n f_n(l)), g_eta(x) = e^{-x} x^eta.

    Past the point where the consecutive-term ratio
    rho_l = exp(x_l (1 - e^{-1/a}) - eta/a) drops below 1 the ratios keep
    decreasing, so the tail is at most h(L) rho_L / (1 - rho_L).
    """
    log_nf1 = math.log(n) + _log_expm1(1.0 / a)  # log(n f_n(0))
    shrink = -math.expm1(-1.0 / a)
    total = 0.0
    start = 1
    while True:
        ell = np.arange(start, start + _CHUNK, dtype=float)
        log_x = log_nf1 - ell / a
        x = np.exp(log_x)
        with np.errstate(under="ignore"):
            h = np.exp(-x + eta * log_x)
        total += math.fsum(h)
        x_last, h_last = float(x[-1]), float(h[-1])
        rho = math.exp(x_last * shrink - eta / a)
        if rho < 1.0:
            tail = h_last * rho / (1.0 - rho)
            if tail <= rtol * total:
                return total
        start += _CHUNK


def geometric_s_squared_truncated(a: float, n: int, r: int) -> float:
    """s^2 for the geometric with scale ``a`` via the h-sum representation."""
    if not a > 0:
        raise ValueError("scale a must be positive")
    return ((r + 1) * _h_sum(a, n, r + 1) + _h_sum(a, n, r + 2)) / math.factorial(r)


def geometric_bounds(a: float, r: int) -> tuple[float, float]:
    """liminf / limsup bounds on s^2 for the geometric with scale ``a``."""
    if a < 0:
        raise ValueError("scale a must be nonnegative")
    slack = (r + 1) ** (r + 1) * math.exp(-r - 1) + (r + 2) ** (r + 2) * math.exp(-r - 2)
    lower = 2.0 * max(0.0, a * (r + 1) - slack)
    upper = 2.0 * a * (r + 1) + 2.0 * slack
    return lower, upper


def geometric_gamma_limit_ratio(a_rule: DynamicGeometric | Callable[[int], float], eta: float, n: int) -> float:
    """sum_l h_{n,eta}(l) / (a_n Gamma(eta))."""
    a_n = a_rule.scale(n) if isinstance(a_rule, DynamicGeometric) else float(a_rule(n))
    return _h_sum(a_n, n, eta) / (a_n * gamma_function(eta))


# -- tabulation for the CLI --------------------------------------------------

ASYMPTOTICS_COLUMNS = ("family", "params", "r", "n", "classification", "poisson_mean", "s_squared", "equivalent", "ratio", "bound_lower", "bound_upper")


def asymptotics_table(spec: DistributionSpec, r: int, n_grid: Sequence[int]) -> list[dict]:
    """One row per n: s^2, its asymptotic equivalent (where stated) and their ratio."""
    from .distributions import true_asymptotic_sd

    regime = classify_regime(spec, r)
    params = ";".join(f"{k}={v!r}" for k, v in regime.params.items())
    rows = []
    for n in n_grid:
        row = dict.fromkeys(ASYMPTOTICS_COLUMNS, "")
        row.update(
            family=regime.family,
            params=params,
            r=r,
            n=n,
            classification=regime.classification.value,
            poisson_mean="" if regime.poisson_mean is None else regime.poisson_mean,
        )
        if isinstance(spec, DynamicUniform):
            s2 = uniform_s_squared_closed_form(spec.gamma, n, r)
            row["s_squared"] = s2
            try:
                eq = uniform_equivalent(spec.gamma, n, r)
                row.update(equivalent=eq, ratio=s2 / eq)
            except ValueError:
                pass
        elif isinstance(spec, DynamicGeometric):
            a_n = spec.scale(n)
            s2 = geometric_s_squared_truncated(a_n, n, r)
            eq = 2.0 * a_n * (r + 1)
            row.update(s_squared=s2, equivalent=eq, ratio=s2 / eq)
        elif isinstance(spec, FixedGeometric):
            s2 = geometric_s_squared_truncated(spec.a, n, r)
            lo, hi = geometric_bounds(spec.a, r)
            row.update(s_squared=s2, bound_lower=lo, bound_upper=hi)
        else:
            row["s_squared"] = true_asymptotic_sd(spec, n, r) ** 2
        rows.append(row)
    return rows
