"""The five discrete families used in the coverage study.

Every family resolves, at a given sample size ``n``, to one of three concrete
pmfs on the 1-based letters ``1, 2, ...``: uniform on ``{1..K}``, geometric
with success probability ``p``, or discrete Pareto with index ``alpha``.
Sums of the form ``sum_l F(p_l)`` over infinite supports are truncated with an
explicit tail bound (geometric) or a trapezoid tail with a convexity error
bound (Pareto).
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np
from scipy import integrate

from .profile import SampleProfile

log = logging.getLogger(__name__)

TAIL_RTOL = 1e-12
_CHUNK = 1 << 16
_MAX_TERMS = 1 << 31


def _fmt(x: float) -> str:
    s = repr(float(x))
    return s[:-2] if s.endswith(".0") else s


def _floor_power(n: int, gamma: float) -> int:
    """floor(n**gamma), robust to representation error at exact integers."""
    x = float(n) ** gamma
    k = round(x)
    if abs(x - k) <= 1e-9 * max(1.0, x):
        return int(k)
    return int(math.floor(x))


# -- concrete (resolved) families -------------------------------------------


@dataclass(frozen=True)
class FixedUniform:
    K: int

    def __post_init__(self):
        if int(self.K) != self.K or self.K < 1:
            raise ValueError(f"K must be a positive integer, got {self.K!r}")

    def resolve(self, n: int) -> FixedUniform:
        return self

    def text(self) -> str:
        return f"uniform:K={int(self.K)}"

    def pmf(self, letters):
        ell = np.asarray(letters, dtype=float)
        return np.where((ell >= 1) & (ell <= self.K), 1.0 / self.K, 0.0)

    def letters_from_uniforms(self, u: np.ndarray) -> np.ndarray:
        return np.clip(np.ceil(u * self.K), 1, self.K).astype(np.int64)

    def gap_masses(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        """P(lo < X < hi) for letter arrays lo < hi."""
        lo = np.maximum(np.asarray(lo, dtype=float), 0.0)
        hi = np.minimum(np.asarray(hi, dtype=float), self.K + 1.0)
        return np.maximum(hi - lo - 1.0, 0.0) / self.K

    def survival(self, ell: float) -> float:
        return max(self.K - ell, 0) / self.K


@dataclass(frozen=True)
class FixedGeometric:
    p: float

    def __post_init__(self):
        if not (0.0 < self.p < 1.0):
            raise ValueError(f"p must lie in (0, 1), got {self.p!r}")

    @classmethod
    def from_scale(cls, a: float) -> FixedGeometric:
        """Geometric with ``a = -1/log(1-p)``."""
        if not a > 0:
            raise ValueError(f"scale a must be positive, got {a!r}")
        return cls(p=-math.expm1(-1.0 / a))

    @property
    def log_q(self) -> float:
        return math.log1p(-self.p)

    @property
    def a(self) -> float:
        return -1.0 / self.log_q

    def resolve(self, n: int) -> FixedGeometric:
        return self

    def text(self) -> str:
        return f"geom:p={_fmt(self.p)}"

    def pmf(self, letters):
        ell = np.asarray(letters, dtype=float)
        with np.errstate(invalid="ignore"):
            val = self.p * np.exp((ell - 1.0) * self.log_q)
        return np.where(ell >= 1, val, 0.0)

    def letters_from_uniforms(self, u: np.ndarray) -> np.ndarray:
        return np.maximum(np.ceil(np.log(u) / self.log_q), 1).astype(np.int64)

    def gap_masses(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        return np.exp(lo * self.log_q) * -np.expm1((hi - lo - 1.0) * self.log_q)

    def survival(self, ell: float) -> float:
        return math.exp(float(ell) * self.log_q)


@dataclass(frozen=True)
class DiscretePareto:
    alpha: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha!r}")

    def resolve(self, n: int) -> DiscretePareto:
        return self

    def text(self) -> str:
        return f"pareto:alpha={_fmt(self.alpha)}"

    def pmf(self, letters):
        ell = np.asarray(letters, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = ell ** -self.alpha * -np.expm1(-self.alpha * np.log1p(1.0 / ell))
        return np.where(ell >= 1, val, 0.0)

    def letters_from_uniforms(self, u: np.ndarray) -> np.ndarray:
        with np.errstate(over="ignore"):
            y = np.floor(np.exp(-np.log(u) / self.alpha))
        # only reachable for alpha below ~0.053; such letters carry mass < 1e-300
        y = np.minimum(y, np.finfo(float).max)
        # letters past 2**62 stay as integral floats rather than overflow int64
        if y.size and y.max() < 2.0**62:
            return y.astype(np.int64)
        return y

    def gap_masses(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        lo1 = np.asarray(lo, dtype=float) + 1.0
        hi = np.asarray(hi, dtype=float)
        return lo1 ** -self.alpha * -np.expm1(-self.alpha * np.log1p((hi - lo1) / lo1))

    def survival(self, ell: float) -> float:
        return (float(ell) + 1.0) ** -self.alpha


# -- dynamic families --------------------------------------------------------


@dataclass(frozen=True)
class DynamicUniform:
    """Uniform on ``floor(n**gamma)`` letters."""

    gamma: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma!r}")

    def alphabet_size(self, n: int) -> int:
        return _floor_power(n, self.gamma)

    def resolve(self, n: int) -> FixedUniform:
        return FixedUniform(max(self.alphabet_size(n), 1))

    def text(self) -> str:
        return f"dunif:gamma={_fmt(self.gamma)}"


@dataclass(frozen=True)
class DynamicGeometric:
    """Geometric with scale ``a_n = c * n**beta``, i.e. ``p_n = 1 - exp(-1/a_n)``."""

    c: float = 0.25
    beta: float = 0.5

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError(f"c must be positive, got {self.c!r}")
        if not (0.0 < self.beta < 1.0):
            raise ValueError(f"beta must lie in (0, 1), got {self.beta!r}")

    def scale(self, n: int) -> float:
        return self.c * float(n) ** self.beta

    def resolve(self, n: int) -> FixedGeometric:
        return FixedGeometric.from_scale(self.scale(n))

    def text(self) -> str:
        return f"dgeom:c={_fmt(self.c)},beta={_fmt(self.beta)}"


DistributionSpec = Union[FixedUniform, DynamicUniform, FixedGeometric, DynamicGeometric, DiscretePareto]
Resolved = Union[FixedUniform, FixedGeometric, DiscretePareto]

_FAMILIES: dict[str, tuple[type, dict[str, Callable[[str], object]]]] = {
    "uniform": (FixedUniform, {"K": int}),
    "dunif": (DynamicUniform, {"gamma": float}),
    "geom": (FixedGeometric, {"p": float}),
    "dgeom": (DynamicGeometric, {"c": float, "beta": float}),
    "pareto": (DiscretePareto, {"alpha": float}),
}


def parse_spec(text: str) -> DistributionSpec:
    """Parse the canonical text form, e.g. ``geom:p=0.5`` or ``dgeom:c=0.25,beta=0.5``."""
    name, _, body = text.strip().partition(":")
    if name not in _FAMILIES:
        raise ValueError(f"unknown distribution family {name!r} in {text!r}")
    cls, fields = _FAMILIES[name]
    kwargs = {}
    for item in filter(None, (s.strip() for s in body.split(","))):
        key, eq, value = item.partition("=")
        if not eq or key not in fields:
            raise ValueError(f"bad parameter {item!r} for family {name!r}")
        try:
            kwargs[key] = fields[key](value)
        except ValueError:
            # allow K=1e3 style input
            kwargs[key] = fields[key](float(value))
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ValueError(f"missing parameters for {text!r}: {exc}") from None


def pmf(spec: DistributionSpec, n: int, letter) -> float:
    """Probability of ``letter`` under ``spec`` resolved at sample size ``n``."""
    return float(spec.resolve(n).pmf(letter))


# -- randomness --------------------------------------------------------------


@dataclass(frozen=True)
class RngStream:
    """Independent, reproducible random stream keyed by ``(master_seed, stream_index)``."""

    master_seed: int
    stream_index: int = 0

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(self.master_seed, spawn_key=(self.stream_index,))
        return np.random.Generator(np.random.PCG64(seq))


def open_uniforms(gen: np.random.Generator, size: int) -> np.ndarray:
    """Uniforms on the open interval (0, 1) with 53-bit resolution."""
    return (gen.integers(0, 1 << 53, size=size, dtype=np.int64) + 0.5) * 2.0**-53


def draw_sample(spec: DistributionSpec, n: int, rng: RngStream | np.random.Generator) -> np.ndarray:
    """``n`` iid letters from ``spec`` resolved at ``n`` by inverse transform."""
    if n < 1:
        raise ValueError(f"sample size must be >= 1, got {n}")
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    return spec.resolve(n).letters_from_uniforms(open_uniforms(gen, n))


# -- true occupancy probabilities -------------------------------------------


def _sorted_letters(profile: SampleProfile) -> tuple[np.ndarray, np.ndarray]:
    letters = np.asarray(profile.letters)
    if letters.dtype == object:
        letters = letters.astype(float)
    order = np.argsort(letters, kind="stable")
    return letters[order], profile.counts[order]


def missing_mass(dist: Resolved, letters: np.ndarray) -> float:
    """Total probability of letters absent from the sorted array ``letters``.

    Computed as a finite sum of gap masses between consecutive observed
    letters plus the tail beyond the largest one.
    """
    if letters.size == 0:
        return 1.0
    lo = np.concatenate(([0], letters[:-1]))
    gaps = dist.gap_masses(lo, letters)
    return float(math.fsum(gaps[gaps > 0])) + dist.survival(letters[-1])


def true_occupancy_probabilities(
    spec: DistributionSpec, n: int, profile: SampleProfile, r_values: Sequence[int]
) -> np.ndarray:
    """pi_r for each r in ``r_values`` (one pass over the profile)."""
    dist = spec.resolve(n)
    out = np.empty(len(r_values))
    letters = counts = probs = None
    for i, r in enumerate(r_values):
        if isinstance(dist, FixedUniform):
            if r == 0:
                out[i] = (dist.K - profile.distinct) / dist.K
            else:
                out[i] = profile.occupancy_count(r) / dist.K
            continue
        if letters is None:
            letters, counts = _sorted_letters(profile)
        if r == 0:
            out[i] = missing_mass(dist, letters)
        else:
            if probs is None:
                probs = dist.pmf(letters)
            out[i] = float(np.sum(probs[counts == r]))
    return out


def true_occupancy_probability(spec: DistributionSpec, n: int, profile: SampleProfile, r: int) -> float:
    return float(true_occupancy_probabilities(spec, n, profile, [r])[0])


# -- sums over the pmf -------------------------------------------------------


class _Term:
    """A summand ``F(p)`` with a tail bound for geometrically decaying ``p``."""

    def __call__(self, p: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def geometric_tail(self, p_last: float, q: float) -> float:
        """Upper bound on sum_{j>=1} |F(p_last q^j)|."""
        raise NotImplementedError


class _SdTerm(_Term):
    def __init__(self, n: int, r: int):
        self.n, self.r = n, r
        self.log_fact = math.lgamma(r + 1)

    def __call__(self, p):
        u = self.n * np.asarray(p, dtype=float)
        r = self.r
        with np.errstate(divide="ignore", under="ignore"):
            logs = -u + (r + 1) * np.log(u) - self.log_fact
            return np.where(u > 0, (r + 1 + u) * np.exp(logs), 0.0)

    def geometric_tail(self, p_last, q):
        # F(p) <= (r+1+u) u^{r+1} / r!, increasing in u = n p
        u, r = self.n * p_last, self.r
        qr = q ** (r + 1)
        return (r + 1 + u) * math.exp((r + 1) * math.log(u) - self.log_fact) * qr / (1 - qr)


class _BiasTerm(_Term):
    def __init__(self, n: int, r: int, modified: bool):
        self.n, self.r, self.modified = n, r, modified
        self.log_binom = math.lgamma(n + 1) - math.lgamma(r + 1) - math.lgamma(n - r + 1)
        self.shift = 0.0 if modified else r / n

    def __call__(self, p):
        p = np.asarray(p, dtype=float)
        n, r = self.n, self.r
        with np.errstate(divide="ignore", invalid="ignore", under="ignore"):
            logs = self.log_binom + (r + 1) * np.log(p)
            if n - r - 1 > 0:
                logs = logs + (n - r - 1) * np.log1p(-p)
            val = np.exp(logs) * (p - self.shift)
        return np.where(p > 0, np.nan_to_num(val, nan=0.0), 0.0)

    def geometric_tail(self, p_last, q):
        r = self.r
        q1, q2 = q ** (r + 1), q ** (r + 2)
        bound = math.exp(self.log_binom + (r + 2) * math.log(p_last)) * q2 / (1 - q2)
        if self.shift:
            bound += self.shift * math.exp(self.log_binom + (r + 1) * math.log(p_last)) * q1 / (1 - q1)
        return bound


def _geometric_series(dist: FixedGeometric, term: _Term) -> float:
    total = 0.0
    start = 1
    while start < _MAX_TERMS:
        ell = np.arange(start, start + _CHUNK, dtype=float)
        vals = term(dist.pmf(ell))
        total += math.fsum(vals)
        p_last = float(dist.pmf(ell[-1]))
        q = math.exp(dist.log_q)
        if p_last == 0.0:
            return total
        bound = term.geometric_tail(p_last, q)
        if bound <= TAIL_RTOL * abs(total):
            return total
        start += _CHUNK
    log.warning("geometric series not converged after %d terms", _MAX_TERMS)
    return total


def _pareto_series(dist: DiscretePareto, n: int, term: _Term) -> float:
    """Direct sum up to L-1 plus a trapezoid tail.

    Past L the summand is convex and monotone in the letter index, so
    sum_{l>=L} t(l) = int_L^inf t + t(L)/2 + E with |E| <= |t(L-1) - t(L)| / 8.
    """
    alpha = dist.alpha
    # smallest L with n * alpha * L^{-alpha-1} <= 1e-2
    L = max(1024, int(math.ceil((100.0 * n * alpha) ** (1.0 / (alpha + 1.0)))))
    L = min(L, _MAX_TERMS)
    head = 0.0
    for start in range(1, L, _CHUNK):
        ell = np.arange(start, min(start + _CHUNK, L), dtype=float)
        head += math.fsum(term(dist.pmf(ell)))

    def integrand(s: float) -> float:
        if s > 600.0:
            return 0.0
        x = L * math.exp(s)
        return float(term(dist.pmf(x))) * x

    tail_int, _ = integrate.quad(integrand, 0.0, np.inf, epsabs=0.0, epsrel=1e-13, limit=400)
    t_prev, t_L = (float(v) for v in term(dist.pmf(np.array([L - 1.0, float(L)]))))
    delta = t_prev - t_L
    total = head + tail_int + t_L / 2.0 + delta / 12.0
    if abs(delta) / 8.0 > TAIL_RTOL * abs(total) and abs(total) > 0:
        log.debug("pareto tail error bound %.3g exceeds tolerance", abs(delta) / 8.0)
    return total


def _sum_over_pmf(dist: Resolved, n: int, term: _Term) -> float:
    if isinstance(dist, FixedUniform):
        return dist.K * float(term(np.array(1.0 / dist.K)))
    if isinstance(dist, FixedGeometric):
        return _geometric_series(dist, term)
    return _pareto_series(dist, n, term)


def true_asymptotic_sd(spec: DistributionSpec, n: int, r: int) -> float:
    """s_r = sqrt(sum_l (r+1+n p_l) e^{-n p_l} (n p_l)^{r+1} / r!)."""
    if n < 1 or r < 0:
        raise ValueError(f"need n >= 1 and r >= 0, got n={n}, r={r}")
    return math.sqrt(max(_sum_over_pmf(spec.resolve(n), n, _SdTerm(n, r)), 0.0))


def analytic_bias(spec: DistributionSpec, n: int, r: int, modified: bool = False) -> float:
    """Exact E[T_r - pi_r]; with ``modified`` the bias of (r+1) N_{r+1} / (n-r)."""
    if n < 1 or not (0 <= r <= n - 1):
        raise ValueError(f"need n >= 1 and 0 <= r <= n-1, got n={n}, r={r}")
    return _sum_over_pmf(spec.resolve(n), n, _BiasTerm(n, r, modified))


class LindebergValue(NamedTuple):
    value: float
    degenerate: bool


def _letters_with_mass_at_least(dist: Resolved, threshold: float) -> np.ndarray:
    if isinstance(dist, FixedUniform):
        return np.arange(1, dist.K + 1, dtype=float) if 1.0 / dist.K >= threshold else np.empty(0)
    if isinstance(dist, FixedGeometric):
        if threshold > dist.p:
            return np.empty(0)
        top = 1 + math.log(threshold / dist.p) / dist.log_q
    else:
        if threshold > float(dist.pmf(1)):
            return np.empty(0)
        top = (dist.alpha / threshold) ** (1.0 / (dist.alpha + 1.0))
    ell = np.arange(1, int(top) + 3, dtype=float)
    return ell[dist.pmf(ell) >= threshold]


def lindeberg_statistic(spec: DistributionSpec, n: int, r: int, eps: float) -> LindebergValue:
    """s^{-2} sum_l e^{-n p_l} (n p_l)^{r+2} 1[n p_l >= eps s]."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps!r}")
    dist = spec.resolve(n)
    s = true_asymptotic_sd(spec, n, r)
    if s == 0.0:
        return LindebergValue(0.0, True)
    threshold = eps * s / n
    if isinstance(dist, FixedUniform):
        u = n / dist.K
        if u < eps * s:
            return LindebergValue(0.0, False)
        total = dist.K * math.exp(-u + (r + 2) * math.log(u))
    else:
        u = n * dist.pmf(_letters_with_mass_at_least(dist, threshold))
        u = u[u >= eps * s]
        total = math.fsum(np.exp(-u + (r + 2) * np.log(u))) if u.size else 0.0
    return LindebergValue(total / s**2, False)
