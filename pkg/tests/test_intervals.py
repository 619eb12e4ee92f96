import math

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from oracles import chi2_quantile_bisect, normal_quantile_bisect
from turing_ci.intervals import (
    CIConfig,
    Interval,
    Method,
    build_interval,
    esty_ci,
    heuristic_ci,
    normal_ci,
    normal_ratio_ci,
    poisson_ci,
)
from turing_ci.profile import SampleProfile, sd_estimate, turing_estimate

Z = normal_quantile_bisect(0.975)


def test_normal_clipped_both_sides():
    iv = normal_ci(0.5, 2.0, 4)
    assert (iv.lower, iv.upper) == (0.0, 1.0)
    assert iv.clipped_low and iv.clipped_high


def test_normal_interior():
    iv = normal_ci(0.5, 0.5, 100)
    half = Z * 0.5 / 100
    assert iv.lower == pytest.approx(0.5 - half, abs=1e-12)
    assert iv.upper == pytest.approx(0.5 + half, abs=1e-12)
    assert (round(iv.lower, 4), round(iv.upper, 4)) == (0.4902, 0.5098)
    assert not (iv.clipped_low or iv.clipped_high)


def test_normal_zero_sd_is_point():
    iv = normal_ci(0.0, 0.0, 50)
    assert iv.degenerate_point and iv.width == 0.0 and iv.contains(0.0)


def test_normal_ratio_examples():
    iv = normal_ratio_ci(0.5, 2.0, 4)
    h = Z * 2.0 / 4
    assert iv.lower == pytest.approx(0.25 / (0.5 + h), abs=1e-12)
    assert iv.upper == 1.0 and iv.clipped_high
    iv = normal_ratio_ci(0.5, 0.5, 100)
    h = Z * 0.5 / 100
    assert iv.lower == pytest.approx(0.25 / (0.5 + h), abs=1e-12)
    assert iv.upper == pytest.approx(0.25 / (0.5 - h), abs=1e-12)
    assert iv.lower == pytest.approx(0.490389, abs=1e-6)
    assert iv.upper == pytest.approx(0.509996, abs=1e-6)
    assert normal_ratio_ci(0.0, 1.0, 10).degenerate_point


def test_poisson_zero_count_width():
    # T = 0: [0, (r+1)/(2n) chi2(0.975, 2)]
    iv = poisson_ci(0.0, 10**7, 3)
    assert iv.lower == 0.0
    assert iv.upper == pytest.approx(4 / (2 * 10**7) * chi2_quantile_bisect(0.975, 2), rel=1e-9)
    assert iv.upper == pytest.approx(1.4756e-6, rel=1e-4)
    assert not iv.degenerate_point


def test_poisson_general_count():
    n, r, k = 1000, 1, 7
    iv = poisson_ci((r + 1) * k / n, n, r)
    scale = (r + 1) / (2 * n)
    assert iv.lower == pytest.approx(scale * chi2_quantile_bisect(0.025, 2 * k), rel=1e-9)
    assert iv.upper == pytest.approx(scale * chi2_quantile_bisect(0.975, 2 * k + 2), rel=1e-9)


def test_poisson_clips_upper():
    iv = poisson_ci(0.5, 4, 0)
    assert iv.upper == 1.0 and iv.clipped_high
    assert iv.upper_unclipped == pytest.approx(1 / 8 * chi2_quantile_bisect(0.975, 6), rel=1e-9)


def test_poisson_rejects_off_lattice_estimate():
    with pytest.raises(ValueError):
        poisson_ci(0.123456, 10, 0)


def test_esty():
    iv = esty_ci(0.5, 2.0, 2, 4)
    assert (iv.lower, iv.upper) == (0.0, 1.0)
    iv = esty_ci(0.1, 20.0, 100, 1000)
    half = Z / 1000 * math.sqrt(400 - 100**2 / 1000)
    assert iv.upper - iv.lower == pytest.approx(2 * half, rel=1e-10)
    with pytest.raises(ArithmeticError):
        esty_ci(0.5, 1.0, 10, 4)


def test_heuristic_switch_and_tie():
    low_sd = heuristic_ci(0.0, 0.0, 0, 100, 0)
    assert low_sd.chosen_method is Method.POISSON and low_sd.method is Method.HEURISTIC
    assert not low_sd.degenerate_point and low_sd.upper > 0
    tie = heuristic_ci(0.02, 2.0, 2, 100, 0, CIConfig(V=2.0))
    assert tie.chosen_method is Method.NORMAL
    below = heuristic_ci(0.02, 1.99, 2, 100, 0, CIConfig(V=2.0))
    assert below.chosen_method is Method.POISSON


def test_config_and_interval_validation():
    with pytest.raises(ValueError):
        CIConfig(alpha=0.0)
    with pytest.raises(ValueError):
        CIConfig(V=0.0)
    with pytest.raises(ValueError):
        Interval(0.5, 0.4, Method.NORMAL)
    assert Method.parse("Normal-Ratio") is Method.NORMAL_RATIO
    with pytest.raises(ValueError):
        Method.parse("wilson")


@st.composite
def profiles(draw):
    occ = draw(st.dictionaries(st.integers(1, 6), st.integers(1, 40), min_size=1))
    prof = SampleProfile.from_occupancy(occ)
    r = draw(st.integers(0, min(prof.n - 1, 5)))
    return prof, r


@settings(max_examples=300, deadline=None)
@given(profiles(), st.sampled_from(list(Method)), st.floats(0.001, 0.5), st.floats(0.1, 10.0))
def test_interval_invariants(case, method, alpha, V):
    prof, r = case
    T = turing_estimate(prof, r)
    s = sd_estimate(prof, r)
    N = prof.occupancy_count(r + 1)
    iv = build_interval(method, T, s, N, prof.n, r, CIConfig(alpha, V))
    assert 0.0 <= iv.lower <= iv.upper <= 1.0
    assert iv.upper_unclipped >= iv.upper
    # every construction here contains its own point estimate
    assert iv.contains(T)
    if iv.degenerate_point:
        assert iv.lower == iv.upper == 0.0 and T == 0.0
    if method is Method.HEURISTIC:
        assert iv.chosen_method is (Method.POISSON if s < V else Method.NORMAL)


@settings(max_examples=200, deadline=None)
@given(profiles(), st.floats(0.001, 0.2), st.floats(0.001, 0.2))
def test_width_shrinks_with_alpha(case, a1, a2):
    prof, r = case
    lo_a, hi_a = sorted((a1, a2))
    T, s = turing_estimate(prof, r), sd_estimate(prof, r)
    for method in (Method.NORMAL, Method.POISSON, Method.ESTY):
        N = prof.occupancy_count(r + 1)
        wide = build_interval(method, T, s, N, prof.n, r, CIConfig(lo_a))
        narrow = build_interval(method, T, s, N, prof.n, r, CIConfig(hi_a))
        assert wide.lower <= narrow.lower + 1e-15 and narrow.upper <= wide.upper + 1e-15


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(0.01, 50.0), st.integers(1, 10**6))
def test_normal_symmetric_unless_clipped(T, s, n):
    iv = normal_ci(T, s, n)
    assume(not iv.clipped_low and not iv.clipped_high)
    assert T - iv.lower == pytest.approx(iv.upper - T, rel=1e-9, abs=1e-15)
