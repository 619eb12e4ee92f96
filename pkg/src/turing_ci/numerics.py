"""Special functions and quantiles used by the interval constructors."""

from __future__ import annotations

import math
from functools import lru_cache
from statistics import NormalDist

from scipy import special

_STD_NORMAL = NormalDist()


def _check_open_unit(p: float, name: str = "p") -> None:
    if not (0.0 < p < 1.0):
        raise ValueError(f"{name} must lie in the open interval (0, 1), got {p!r}")


def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def normal_quantile(p: float) -> float:
    """Inverse of the standard normal CDF."""
    _check_open_unit(p)
    return _STD_NORMAL.inv_cdf(p)


def gamma_function(x: float) -> float:
    if not x > 0:
        raise ValueError(f"gamma_function requires x > 0, got {x!r}")
    return math.gamma(x)


def regularized_lower_gamma(s: float, x: float) -> float:
    """P(s, x) = gamma(s, x) / Gamma(s)."""
    if not s > 0:
        raise ValueError(f"shape must be positive, got {s!r}")
    if x < 0:
        raise ValueError(f"x must be nonnegative, got {x!r}")
    if x == 0:
        return 0.0
    return float(special.gammainc(s, x))


def chi_squared_cdf(x: float, df: float) -> float:
    if x <= 0:
        return 0.0
    return regularized_lower_gamma(df / 2.0, x / 2.0)


def chi_squared_sf(x: float, df: float) -> float:
    if x <= 0:
        return 1.0
    return float(special.gammaincc(df / 2.0, x / 2.0))


@lru_cache(maxsize=4096)
def chi_squared_quantile(p: float, df: float) -> float:
    """The p-quantile of the chi-squared distribution with ``df`` degrees of freedom.

    Cached: the Poisson interval only ever asks for even integer ``df``, so a
    simulation run touches a handful of distinct arguments.
    """
    _check_open_unit(p)
    if not df > 0:
        raise ValueError(f"df must be positive, got {df!r}")
    return 2.0 * float(special.gammaincinv(df / 2.0, p))
