"""Authorship attribution with detecting points.

Confidence intervals for the occupancy probabilities of a corpus are
compared against the detecting points D_r = A_r / n2 of a testing set,
where A_r counts testing tokens (with repetition) seen exactly r times in
the corpus.
"""

from __future__ import annotations

import json
import re
import unicodedata
from collections import Counter
from collections.abc import Hashable, Sequence
from dataclasses import asdict, dataclass, field

import numpy as np

from .distributions import RngStream
from .intervals import CIConfig, Interval, Method, build_interval
from .profile import build_profile, sd_estimate, turing_estimate

DEFAULT_MAX_R = 20
_URL = re.compile(r"^(https?://|www\.)|(^|[^\w])t\.co/", re.IGNORECASE)
_RETWEET = re.compile(r"^\s*RT @", re.IGNORECASE)
_KEEP_INTERIOR = {"'", "’", "-", "‐", "‑"}


@dataclass(frozen=True)
class TokenizerOptions:
    lowercase: bool = True
    strip_punctuation: bool = True
    strip_urls: bool = True
    drop_retweets: bool = True


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def _strip_punct(token: str) -> str:
    lo, hi = 0, len(token)
    while lo < hi and _is_punct(token[lo]):
        lo += 1
    while hi > lo and _is_punct(token[hi - 1]):
        hi -= 1
    return "".join(ch for ch in token[lo:hi] if ch in _KEEP_INTERIOR or not _is_punct(ch))


def tokenize_words(text: str, opts: TokenizerOptions = TokenizerOptions()) -> list[str]:
    """Preprocessed word strings of ``text``."""
    text = unicodedata.normalize("NFC", text)
    words = []
    for line in text.splitlines():
        if opts.drop_retweets and _RETWEET.match(line):
            continue
        for token in line.split():
            if opts.strip_urls and _URL.search(token):
                continue
            if opts.strip_punctuation:
                token = _strip_punct(token)
            if opts.lowercase:
                token = token.lower()
            if token:
                words.append(token)
    return words


def tokenize(text: str, opts: TokenizerOptions = TokenizerOptions()) -> tuple[np.ndarray, list[str]]:
    """Word ids and the id -> word table, ids interned in order of first use."""
    table: dict[str, int] = {}
    ids = [table.setdefault(w, len(table)) for w in tokenize_words(text, opts)]
    return np.asarray(ids, dtype=np.int64), list(table)


def detecting_points(corpus: Sequence[Hashable], testing: Sequence[Hashable], R: int) -> list[tuple[int, float]]:
    """(A_r, D_r) for r = 0..R."""
    if len(corpus) == 0 or len(testing) == 0:
        raise ValueError("corpus and testing set must be nonempty")
    if R < 0:
        raise ValueError("R must be nonnegative")
    counts = Counter(corpus)
    A = [0] * (R + 1)
    for word in testing:
        y = counts.get(word, 0)
        if y <= R:
            A[y] += 1
    n2 = len(testing)
    return [(a, a / n2) for a in A]


@dataclass(frozen=True)
class AttributionRow:
    r: int
    A_r: int
    D_r: float
    T_r: float
    s_hat: float
    interval: Interval
    inside: bool
    informational: bool = False


@dataclass(frozen=True)
class AttributionReport:
    n1: int
    n2: int
    R: int
    method: Method
    alpha: float
    rows: tuple[AttributionRow, ...]
    fraction_inside_excluding_r0: float
    threshold: float = 0.5
    metadata: dict = field(default_factory=dict, hash=False)

    @property
    def same_author(self) -> bool:
        return self.fraction_inside_excluding_r0 >= self.threshold

    def to_dict(self) -> dict:
        rows = []
        for row in self.rows:
            d = asdict(row)
            d["interval"] = row.interval.as_row()
            rows.append(d)
        return {
            "n1": self.n1,
            "n2": self.n2,
            "R": self.R,
            "method": self.method.value,
            "alpha": self.alpha,
            "threshold": self.threshold,
            "fraction_inside_excluding_r0": self.fraction_inside_excluding_r0,
            "same_author": self.same_author,
            "rows": rows,
            "metadata": self.metadata,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, default=str)

    def to_csv(self) -> str:
        lines = ["r,D_r,lower,upper,inside"]
        for row in self.rows:
            iv = row.interval
            lines.append(f"{row.r},{row.D_r:.9g},{iv.lower:.9g},{iv.upper:.9g},{str(row.inside).lower()}")
        return "\n".join(lines) + "\n"


def default_max_r(corpus: Sequence[Hashable]) -> int:
    """min(20, largest r with N_{r+1} > 0)."""
    top = max(Counter(corpus).values())
    return min(DEFAULT_MAX_R, top - 1)


def attribute_words(
    corpus: Sequence[Hashable],
    testing: Sequence[Hashable],
    R: int | None = None,
    method: Method | str = Method.NORMAL,
    alpha: float = 0.05,
    V: float = 2.0,
    threshold: float = 0.5,
) -> AttributionReport:
    """Compare detecting points of ``testing`` against intervals built from ``corpus``."""
    if len(corpus) == 0 or len(testing) == 0:
        raise ValueError("corpus and testing set must be nonempty")
    method = Method.parse(method)
    n1 = len(corpus)
    if R is None:
        R = default_max_r(corpus)
    if n1 <= R:
        raise ValueError(f"corpus of {n1} words is too small for R={R}")
    profile = build_profile(corpus)
    config = CIConfig(alpha, V)
    points = detecting_points(corpus, testing, R)
    rows = []
    for r, (a_r, d_r) in enumerate(points):
        T = turing_estimate(profile, r)
        s_hat = sd_estimate(profile, r)
        iv = build_interval(method, T, s_hat, profile.occupancy_count(r + 1), n1, r, config)
        rows.append(AttributionRow(r, a_r, d_r, T, s_hat, iv, iv.contains(d_r), informational=(r == 0)))
    scored = [row.inside for row in rows if row.r >= 1]
    fraction = sum(scored) / len(scored) if scored else float("nan")
    return AttributionReport(n1, len(testing), R, method, alpha, tuple(rows), fraction, threshold)


def attribute(
    corpus_text: str,
    testing_text: str,
    R: int | None = None,
    method: Method | str = Method.NORMAL,
    alpha: float = 0.05,
    opts: TokenizerOptions = TokenizerOptions(),
    V: float = 2.0,
    threshold: float = 0.5,
) -> AttributionReport:
    return attribute_words(
        tokenize_words(corpus_text, opts), tokenize_words(testing_text, opts), R, method, alpha, V, threshold
    )


def split_sample(words: Sequence, rng: RngStream | np.random.Generator) -> tuple[list, list]:
    """Random halves of sizes ceil(m/2) and floor(m/2), each keeping the original order."""
    m = len(words)
    if m < 2:
        raise ValueError("need at least two words to split")
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    chosen = np.zeros(m, dtype=bool)
    chosen[gen.permutation(m)[: (m + 1) // 2]] = True
    first = [w for w, c in zip(words, chosen) if c]
    second = [w for w, c in zip(words, chosen) if not c]
    return first, second
