"""Confidence intervals for occupancy probabilities built from Turing's estimator.

All constructors are pure functions of scalars so the same code serves the
simulation harness and the attribution reports. Bounds are always clipped
to [0, 1]; the raw upper bound is kept in ``upper_unclipped`` for width
diagnostics.
"""

from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass
from typing import Optional

from . import numerics

RADICAND_TOL = 1e-12


class Method(str, enum.Enum):
    NORMAL = "normal"
    NORMAL_RATIO = "normal_ratio"
    POISSON = "poisson"
    ESTY = "esty"
    HEURISTIC = "heuristic"

    @classmethod
    def parse(cls, name: str | Method) -> Method:
        if isinstance(name, Method):
            return name
        key = name.strip().lower().replace("-", "_")
        aliases = {"ratio": "normal_ratio", "normalratio": "normal_ratio"}
        return cls(aliases.get(key, key))


METHOD_ORDER = tuple(Method)


@dataclass(frozen=True)
class CIConfig:
    alpha: float = 0.05
    V: float = 2.0

    def __post_init__(self):
        if not (0.0 < self.alpha < 1.0):
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        if not self.V > 0:
            raise ValueError(f"V must be positive, got {self.V!r}")


@dataclass(frozen=True)
class Interval:
    lower: float
    upper: float
    method: Method
    degenerate_point: bool = False
    clipped_low: bool = False
    clipped_high: bool = False
    chosen_method: Optional[Method] = None
    upper_unclipped: float = math.nan

    def __post_init__(self):
        if not (0.0 <= self.lower <= self.upper <= 1.0):
            raise ValueError(f"invalid interval [{self.lower}, {self.upper}]")
        if math.isnan(self.upper_unclipped):
            object.__setattr__(self, "upper_unclipped", self.upper)

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def width_unclipped(self) -> float:
        return self.upper_unclipped - self.lower

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper

    def as_row(self) -> dict:
        """The CSV column mapping for this interval."""
        return {
            "method": self.method.value,
            "lower": self.lower,
            "upper": self.upper,
            "degenerate": self.degenerate_point,
            "clipped_low": self.clipped_low,
            "clipped_high": self.clipped_high,
            "chosen_method": self.chosen_method.value if self.chosen_method else "",
        }


INTERVAL_COLUMNS = ("method", "lower", "upper", "degenerate", "clipped_low", "clipped_high", "chosen_method")


def _point_zero(method: Method) -> Interval:
    return Interval(0.0, 0.0, method, degenerate_point=True)


def z_value(alpha: float) -> float:
    return numerics.normal_quantile(1.0 - alpha / 2.0)


def _symmetric(T: float, half: float, method: Method) -> Interval:
    lo, hi = T - half, T + half
    clipped_low = T <= half
    clipped_high = hi >= 1.0
    return Interval(
        lower=0.0 if clipped_low else min(lo, 1.0),
        upper=1.0 if clipped_high else hi,
        method=method,
        clipped_low=clipped_low,
        clipped_high=clipped_high,
        upper_unclipped=max(hi, 0.0),
    )


def normal_ci(T: float, s_hat: float, n: int, alpha: float = 0.05) -> Interval:
    """T -/+ z * s_hat / n, the point {0} when s_hat = 0."""
    if s_hat == 0:
        return _point_zero(Method.NORMAL)
    return _symmetric(T, z_value(alpha) * s_hat / n, Method.NORMAL)


def normal_ratio_ci(T: float, s_hat: float, n: int, alpha: float = 0.05) -> Interval:
    """[T^2 / (T + h), T^2 / (T - h)] with h = z * s_hat / n."""
    if T == 0:
        return _point_zero(Method.NORMAL_RATIO)
    h = z_value(alpha) * s_hat / n
    lower = T * T / (T + h)
    if T <= h:
        return Interval(min(lower, 1.0), 1.0, Method.NORMAL_RATIO, clipped_high=True)
    upper = T * T / (T - h)
    if upper > 1.0:
        return Interval(min(lower, 1.0), 1.0, Method.NORMAL_RATIO, clipped_high=True, upper_unclipped=upper)
    return Interval(lower, upper, Method.NORMAL_RATIO)


def _count_from_estimate(T: float, n: int, r: int) -> int:
    k = round(n * T / (r + 1))
    if abs(n * T / (r + 1) - k) > 1e-6:
        raise ValueError(f"T={T} is not of the form (r+1)*k/n for n={n}, r={r}")
    return int(k)


def poisson_ci(T: float, n: int, r: int, alpha: float = 0.05) -> Interval:
    """Chi-squared interval for a Poisson mean, rescaled by (r+1)/n.

    Never degenerates: T = 0 gives [0, (r+1)/(2n) chi2(1-alpha/2, 2)].
    """
    k = _count_from_estimate(T, n, r)
    scale = (r + 1) / (2.0 * n)
    lower = scale * numerics.chi_squared_quantile(alpha / 2.0, 2 * k) if k > 0 else 0.0
    upper = scale * numerics.chi_squared_quantile(1.0 - alpha / 2.0, 2 * k + 2)
    if upper > 1.0:
        return Interval(min(lower, 1.0), 1.0, Method.POISSON, clipped_high=True, upper_unclipped=upper)
    return Interval(lower, upper, Method.POISSON)


def esty_ci(T: float, s_hat: float, N_next: int, n: int, alpha: float = 0.05) -> Interval:
    """T -/+ (z/n) sqrt(s_hat^2 - N_{r+1}^2 / n); clipping as in :func:`normal_ci`."""
    if s_hat == 0:
        return _point_zero(Method.ESTY)
    radicand = s_hat * s_hat - N_next * N_next / n
    if radicand < -RADICAND_TOL * max(1.0, s_hat * s_hat):
        raise ArithmeticError(f"negative Esty radicand {radicand} (s_hat={s_hat}, N={N_next}, n={n})")
    half = z_value(alpha) / n * math.sqrt(max(radicand, 0.0))
    return _symmetric(T, half, Method.ESTY)


def heuristic_ci(T: float, s_hat: float, N_next: int, n: int, r: int, config: CIConfig = CIConfig()) -> Interval:
    """Poisson interval when s_hat < V, Normal interval otherwise."""
    if s_hat < config.V:
        base = poisson_ci(T, n, r, config.alpha)
    else:
        base = normal_ci(T, s_hat, n, config.alpha)
    return dataclasses.replace(base, method=Method.HEURISTIC, chosen_method=base.method)


def build_interval(
    method: Method | str, T: float, s_hat: float, N_next: int, n: int, r: int, config: CIConfig = CIConfig()
) -> Interval:
    """Dispatch to the constructor for ``method``."""
    method = Method.parse(method)
    if method is Method.NORMAL:
        return normal_ci(T, s_hat, n, config.alpha)
    if method is Method.NORMAL_RATIO:
        return normal_ratio_ci(T, s_hat, n, config.alpha)
    if method is Method.POISSON:
        return poisson_ci(T, n, r, config.alpha)
    if method is Method.ESTY:
        return esty_ci(T, s_hat, N_next, n, config.alpha)
    return heuristic_ci(T, s_hat, N_next, n, r, config)
