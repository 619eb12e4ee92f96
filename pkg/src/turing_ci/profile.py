"""Occupancy profiles of a sample and Turing's estimators built from them."""

from __future__ import annotations

import math
from collections import Counter
from collections.abc import Hashable, Iterable, Mapping
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType

import numpy as np


@dataclass(frozen=True)
class SampleProfile:
    """Letter counts ``y`` and occupancy counts ``N_r`` of one sample of size ``n``.

    ``letters`` and ``counts`` are parallel arrays over the distinct letters
    observed. ``occupancy`` only holds realized ``r`` (no zero entries); use
    :meth:`occupancy_count` for lookups that may miss.
    """

    n: int
    letters: np.ndarray
    counts: np.ndarray
    occupancy: Mapping[int, int] = field(repr=False)

    def occupancy_count(self, r: int) -> int:
        return self.occupancy.get(r, 0)

    @property
    def distinct(self) -> int:
        return len(self.counts)

    @cached_property
    def letter_counts(self) -> Mapping[Hashable, int]:
        return MappingProxyType(
            {_scalar(k): int(c) for k, c in zip(self.letters, self.counts)}
        )

    @classmethod
    def from_occupancy(cls, occupancy: Mapping[int, int]) -> SampleProfile:
        """Profile with synthetic letter ids ``0..D-1`` realizing ``occupancy``."""
        occ = {int(r): int(c) for r, c in occupancy.items() if c}
        if any(r < 1 or c < 0 for r, c in occ.items()):
            raise ValueError("occupancy keys must be >= 1 and counts >= 0")
        if not occ:
            raise ValueError("occupancy describes an empty sample")
        counts = np.repeat(
            np.fromiter(occ.keys(), dtype=np.int64),
            np.fromiter(occ.values(), dtype=np.int64),
        )
        n = int(counts.sum())
        letters = np.arange(len(counts), dtype=np.int64)
        return cls(n=n, letters=letters, counts=counts, occupancy=MappingProxyType(occ))


def _scalar(x):
    return x.item() if isinstance(x, np.generic) else x


def _occupancy_from_counts(counts: np.ndarray) -> Mapping[int, int]:
    rs, nr = np.unique(counts, return_counts=True)
    return MappingProxyType({int(r): int(c) for r, c in zip(rs, nr)})


def build_profile(sample: Iterable[Hashable] | np.ndarray) -> SampleProfile:
    """Count letters and occupancy numbers of ``sample``.

    Numeric numpy arrays go through a sort-based path; any other iterable of
    hashables is counted with a dictionary.
    """
    if isinstance(sample, np.ndarray) and sample.dtype.kind in "iuf":
        if sample.size == 0:
            raise ValueError("cannot profile an empty sample")
        letters, counts = np.unique(sample.ravel(), return_counts=True)
    else:
        tally = Counter(sample)
        if not tally:
            raise ValueError("cannot profile an empty sample")
        letters = np.empty(len(tally), dtype=object)
        letters[:] = list(tally.keys())
        counts = np.fromiter(tally.values(), dtype=np.int64, count=len(tally))
    counts = counts.astype(np.int64, copy=False)
    return SampleProfile(
        n=int(counts.sum()),
        letters=letters,
        counts=counts,
        occupancy=_occupancy_from_counts(counts),
    )


def _check_order(profile: SampleProfile, r: int, max_r: int) -> None:
    if not (0 <= r <= max_r):
        raise ValueError(f"r={r} out of range [0, {max_r}] for n={profile.n}")


def turing_estimate(profile: SampleProfile, r: int) -> float:
    """T_r = (r+1) N_{r+1} / n."""
    _check_order(profile, r, profile.n - 1)
    return (r + 1) * profile.occupancy_count(r + 1) / profile.n


def modified_turing_estimate(profile: SampleProfile, r: int) -> float:
    """T*_r = (r+1) N_{r+1} / (n - r)."""
    _check_order(profile, r, profile.n - 1)
    return (r + 1) * profile.occupancy_count(r + 1) / (profile.n - r)


def sd_estimate(profile: SampleProfile, r: int) -> float:
    """Plug-in estimate of the asymptotic sd of n (T_r - pi_r).

    Accepts r = n-1 as well, where N_{r+2} is necessarily 0.
    """
    _check_order(profile, r, profile.n - 1)
    n1 = profile.occupancy_count(r + 1)
    n2 = profile.occupancy_count(r + 2)
    return math.sqrt((r + 1) ** 2 * n1 + (r + 2) * (r + 1) * n2)
