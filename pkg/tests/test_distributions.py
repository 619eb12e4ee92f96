import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import (
    bias_formula_uniform,
    enumerate_uniform,
    pareto_pmf_mp,
    s_squared_geometric_direct,
    s_squared_mpmath,
)
from turing_ci.distributions import (
    DiscretePareto,
    DynamicGeometric,
    DynamicUniform,
    FixedGeometric,
    FixedUniform,
    RngStream,
    analytic_bias,
    draw_sample,
    lindeberg_statistic,
    missing_mass,
    open_uniforms,
    parse_spec,
    pmf,
    true_asymptotic_sd,
    true_occupancy_probabilities,
)
from turing_ci.profile import build_profile

resolved = st.one_of(
    st.integers(1, 50).map(FixedUniform),
    st.floats(0.01, 0.95).map(FixedGeometric),
    st.floats(0.2, 3.0).map(DiscretePareto),
)
any_spec = st.one_of(
    resolved,
    st.floats(0.2, 2.0).map(DynamicUniform),
    st.builds(DynamicGeometric, st.floats(0.05, 2.0), st.floats(0.05, 0.95)),
)


@settings(max_examples=150, deadline=None)
@given(any_spec)
def test_text_roundtrip(spec):
    assert parse_spec(spec.text()) == spec


@pytest.mark.parametrize("text", ["", "foo:K=3", "uniform:K=0", "geom:p=1.5", "geom:q=0.5", "dgeom:c=1,beta=1", "uniform"])
def test_parse_rejects(text):
    with pytest.raises(ValueError):
        parse_spec(text)


def test_parse_accepts_scientific_K():
    assert parse_spec("uniform:K=1e3") == FixedUniform(1000)


def test_dynamic_resolution():
    assert DynamicUniform(1.5).resolve(10**4) == FixedUniform(10**6)
    assert DynamicUniform(0.5).resolve(10**4) == FixedUniform(100)
    assert DynamicUniform(1.4).alphabet_size(10**6) == math.floor(10**8.4)
    geo = DynamicGeometric(0.25, 0.5).resolve(10**6)
    assert geo.a == pytest.approx(250.0)


def test_pmf_values():
    assert pmf(FixedUniform(4), 10, 3) == 0.25
    assert pmf(FixedUniform(4), 10, 5) == 0.0
    assert pmf(FixedGeometric(0.5), 1, 3) == pytest.approx(0.125)
    assert pmf(DiscretePareto(1.0), 1, 1) == pytest.approx(0.5)
    assert pmf(DiscretePareto(1.0), 1, 3) == pytest.approx(1 / 3 - 1 / 4)


@settings(max_examples=100, deadline=None)
@given(resolved, st.integers(1, 200))
def test_pmf_plus_survival_is_one(dist, L):
    head = math.fsum(dist.pmf(np.arange(1, L + 1)))
    assert head + dist.survival(L) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(resolved, st.integers(0, 100), st.integers(1, 60))
def test_gap_masses_match_pmf(dist, lo, width):
    hi = lo + width
    direct = math.fsum(dist.pmf(np.arange(lo + 1, hi)))
    gap = float(dist.gap_masses(np.array([lo]), np.array([hi]))[0])
    assert gap == pytest.approx(direct, rel=1e-10, abs=1e-15)


@settings(max_examples=50, deadline=None)
@given(resolved, st.integers(1, 300), st.integers(0, 2**32))
def test_missing_mass_is_complement_of_observed(dist, n, seed):
    letters = np.unique(draw_sample(dist, n, RngStream(seed)))
    observed = math.fsum(dist.pmf(letters))
    assert missing_mass(dist, letters.astype(float)) == pytest.approx(1.0 - observed, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(resolved, st.integers(1, 300), st.integers(0, 2**32))
def test_occupancy_probabilities_partition_unity(dist, n, seed):
    prof = build_profile(draw_sample(dist, n, RngStream(seed)))
    rs = [0] + sorted(prof.occupancy)
    pis = true_occupancy_probabilities(dist, n, prof, rs)
    assert np.all(pis >= 0)
    assert math.fsum(pis) == pytest.approx(1.0, abs=1e-12)


def test_uniform_occupancy_closed_form():
    prof = build_profile(np.array([1, 1, 2, 3, 3, 3]))
    pis = true_occupancy_probabilities(FixedUniform(10), 6, prof, [0, 1, 2, 3, 4])
    np.testing.assert_allclose(pis, [0.7, 0.1, 0.1, 0.1, 0.0])


def test_streams_are_reproducible_and_distinct():
    a = draw_sample(FixedUniform(1000), 50, RngStream(7, 3))
    b = draw_sample(FixedUniform(1000), 50, RngStream(7, 3))
    c = draw_sample(FixedUniform(1000), 50, RngStream(7, 4))
    d = draw_sample(FixedUniform(1000), 50, RngStream(8, 3))
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)


def test_open_uniforms_avoid_endpoints():
    u = open_uniforms(np.random.default_rng(0), 10**5)
    assert u.min() > 0.0 and u.max() < 1.0


def test_pareto_extreme_uniform_gives_float_letters():
    # smallest open uniform is 2^-54: its letter 2^108 does not fit in int64
    letters = DiscretePareto(0.5).letters_from_uniforms(np.array([2.0**-54, 0.5]))
    assert letters.dtype == np.float64
    assert letters[0] == pytest.approx(2.0**108, rel=1e-12) and letters[1] == 4.0
    assert np.isfinite(DiscretePareto(0.01).letters_from_uniforms(np.array([2.0**-54]))).all()


@pytest.mark.parametrize("dist", [FixedUniform(20), FixedGeometric(0.3), DiscretePareto(1.0)])
def test_sampling_frequencies(dist):
    x = draw_sample(dist, 200_000, RngStream(11))
    for ell in (1, 2, 5):
        p = float(dist.pmf(ell))
        freq = np.mean(x == ell)
        assert abs(freq - p) <= 5 * math.sqrt(p * (1 - p) / x.size)


def test_sd_uniform_closed_form():
    # K = n = 100, r = 1: 100 * 3 e^{-1} = 300/e
    assert true_asymptotic_sd(FixedUniform(100), 100, 1) == pytest.approx(math.sqrt(300 / math.e), rel=1e-13)
    assert true_asymptotic_sd(FixedUniform(100), 100, 1) == pytest.approx(10.50542, abs=1e-5)


@pytest.mark.parametrize("p,n,r", [(0.5, 100, 0), (0.1, 1000, 1), (0.02, 10**4, 3)])
def test_sd_geometric_matches_mpmath(p, n, r):
    ref = s_squared_geometric_direct(p, n, r)
    assert true_asymptotic_sd(FixedGeometric(p), n, r) ** 2 == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("alpha,n,r", [(0.5, 100, 0), (1.0, 1000, 1), (1.5, 500, 2)])
def test_sd_pareto_matches_mpmath(alpha, n, r):
    ref = s_squared_mpmath(pareto_pmf_mp(alpha), n, r)
    assert true_asymptotic_sd(DiscretePareto(alpha), n, r) ** 2 == pytest.approx(ref, rel=1e-9)


@pytest.mark.parametrize("K,n", [(2, 2), (2, 4), (2, 6), (3, 5), (4, 4)])
@pytest.mark.parametrize("r", [0, 1])
def test_bias_matches_enumeration(K, n, r):
    e_T, e_pi = enumerate_uniform(K, n, r)
    exact = e_T - e_pi
    assert exact == bias_formula_uniform(K, n, r)
    assert analytic_bias(FixedUniform(K), n, r) == pytest.approx(float(exact), abs=1e-12)


def test_bias_reference_value():
    # K = 2, n = 4, r = 1: 4 * 2 * (1/2)^4 * (1/2 - 1/4) = 1/8
    assert analytic_bias(FixedUniform(2), 4, 1) == pytest.approx(0.125, abs=1e-15)


def test_modified_bias_geometric_against_direct_sum():
    n, r, p = 50, 2, 0.2
    ell = np.arange(1, 2000)
    pl = p * (1 - p) ** (ell - 1.0)
    direct = math.comb(n, r) * math.fsum(pl ** (r + 2) * (1 - pl) ** (n - r - 1))
    assert analytic_bias(FixedGeometric(p), n, r, modified=True) == pytest.approx(direct, rel=1e-12)


def test_bias_r0_is_nonnegative():
    # r = 0 bias is sum p^2 (1-p)^{n-1} >= 0
    for dist in (FixedUniform(30), FixedGeometric(0.2), DiscretePareto(0.8)):
        assert analytic_bias(dist, 40, 0) > 0


def test_lindeberg_values():
    assert lindeberg_statistic(FixedUniform(100), 100, 0, 0.01).value == pytest.approx(0.5)
    assert lindeberg_statistic(FixedUniform(100), 100, 0, 2.0).value == 0.0
    v = lindeberg_statistic(FixedGeometric(0.5), 10**4, 0, 0.05)
    assert not v.degenerate and 0 < v.value < 1


def test_lindeberg_decreases_in_eps():
    vals = [lindeberg_statistic(DiscretePareto(1.0), 10**4, 1, e).value for e in (0.01, 0.1, 1.0, 10.0)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))
