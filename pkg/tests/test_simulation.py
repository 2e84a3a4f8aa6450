from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import stats

from censored_ldp.asymptotics import W, WalkConfig, approx_interior
from censored_ldp.distributions import make_standardized_pareto, tail_V
from censored_ldp.errors import DomainError
from censored_ldp.simulation import (
    DEFAULT_SEED,
    MCConfig,
    default_seed,
    estimate_plain,
    estimate_stratified,
    oracle_W_simplex,
    simulate_uncensored_tail,
    stratum_weights,
)

PARETO3 = make_standardized_pareto(3.0)


@pytest.fixture(scope="module")
def small():
    # M / s_n is about 2.3: plain Monte Carlo resolves every x used below
    return WalkConfig(100, 50.0, PARETO3)


def test_weights_match_scipy_binomial():
    n, v = 10**4, 3e-4
    w, bound = stratum_weights(n, v, 8)
    assert np.allclose(w, stats.binom.pmf(np.arange(9), n, v), rtol=1e-12, atol=0)
    assert bound == pytest.approx((n * v) ** 9 / math.factorial(9))
    assert stats.binom.sf(8, n, v) <= bound


def test_weight_completeness_at_desk_scale():
    config = WalkConfig(10**4, 3000.0, PARETO3)
    w, bound = stratum_weights(config.n, tail_V(PARETO3, 0.1 * config.M), MCConfig().k_cap)
    assert math.fsum(w) >= 1 - 1e-12
    assert bound < 1e-12


def test_weights_reject_bad_input():
    with pytest.raises(DomainError):
        stratum_weights(10, 1.5, 3)


def test_seed_environment_override(monkeypatch):
    monkeypatch.delenv("CENSORED_LDP_SEED", raising=False)
    assert default_seed() == DEFAULT_SEED
    monkeypatch.setenv("CENSORED_LDP_SEED", "0x2a")
    assert default_seed() == 42
    assert MCConfig().seed == 42
    monkeypatch.setenv("CENSORED_LDP_SEED", "abc")
    with pytest.raises(DomainError):
        default_seed()


def test_mc_config_validation():
    for kwargs in ({"samples": 10}, {"y_factor": 1.0}, {"k_cap": -1}, {"workers": 0}, {"seed": -1}):
        with pytest.raises(DomainError):
            MCConfig(**kwargs)


def test_deterministic_across_workers_and_blocks(small):
    xs = [30.0, 50.0, 60.0]
    runs = [
        estimate_stratified(small, xs, MCConfig(samples=5000, seed=7, workers=w, block_size=b))
        for w, b in ((1, 256), (1, 5000), (3, 256), (8, 700))
    ]
    for other in runs[1:]:
        for a, b in zip(runs[0], other):
            assert a.p_hat == b.p_hat and a.std_err == b.std_err

    plain = [estimate_plain(small, xs, MCConfig(samples=5000, seed=7, workers=w, block_size=b)) for w, b in ((1, 64), (4, 1000))]
    assert [e.p_hat for e in plain[0]] == [e.p_hat for e in plain[1]]


def test_seed_changes_results(small):
    a = estimate_stratified(small, 60.0, MCConfig(samples=2000, seed=1))
    b = estimate_stratified(small, 60.0, MCConfig(samples=2000, seed=2))
    assert a.p_hat != b.p_hat


def test_stratified_agrees_with_plain(small):
    xs = [1.5 * small.s_n, 2 * small.s_n, small.M, 1.2 * small.M]
    strat = estimate_stratified(small, xs, MCConfig(samples=40000, seed=11))
    plain = estimate_plain(small, xs, MCConfig(samples=200000, seed=12))
    for a, b in zip(strat, plain):
        assert abs(a.p_hat - b.p_hat) <= 3 * math.hypot(a.std_err, b.std_err)
        # stratification must not be worse than plain sampling here
        assert a.std_err < b.std_err


def test_literal_scheme_without_bands_is_unbiased(small):
    x = 1.2 * small.M
    banded = estimate_stratified(small, x, MCConfig(samples=40000, seed=3))
    literal = estimate_stratified(small, x, MCConfig(samples=40000, seed=4, jump_bands=0))
    assert abs(banded.p_hat - literal.p_hat) <= 3 * math.hypot(banded.std_err, literal.std_err)


def test_censored_estimate_bounded_by_uncensored(small):
    xs = [20.0, 40.0, 70.0]
    cens = estimate_stratified(small, xs, MCConfig(samples=20000, seed=5))
    unc = simulate_uncensored_tail(small.n, xs, PARETO3, MCConfig(samples=20000, seed=5))
    for c, u in zip(cens, unc):
        assert c.p_hat <= u.p_hat + 3 * math.hypot(c.std_err, u.std_err)


def test_uncensored_tail_matches_single_jump_far_out():
    n, x = 100, 400.0
    est = simulate_uncensored_tail(n, x, PARETO3, MCConfig(samples=20000, seed=9))
    # one-big-jump heuristic: P(S_n > x) ~ n V(x) far in the tail
    assert est.p_hat / (n * tail_V(PARETO3, x)) == pytest.approx(1.0, abs=0.1)


def test_beyond_n_M_has_zero_probability(small):
    est = estimate_stratified(small, small.n * small.M + 1.0, MCConfig(samples=1000, seed=1))
    assert est.p_hat == 0.0


def test_debug_assertions_pass(small):
    estimate_stratified(small, [30.0, 60.0], MCConfig(samples=1000, seed=1, debug=True))
    estimate_plain(small, [30.0, 60.0], MCConfig(samples=1000, seed=1, debug=True))


def test_strata_breakdown(small):
    est = estimate_stratified(small, small.M, MCConfig(samples=20000, seed=6))
    assert len(est.strata) == MCConfig().k_cap + 1
    assert math.fsum(s.contribution for s in est.strata) == pytest.approx(est.p_hat, rel=1e-12)
    for s in est.strata:
        assert sum(s.by_top) == pytest.approx(s.cond_p, rel=1e-9, abs=1e-300)
    assert 0.0 <= est.top_share(1, 1) <= 1.0
    d = est.as_dict()
    assert d["method"] == "stratified" and len(d["strata"]) == len(est.strata)


def test_interior_point_resolved_at_desk_scale():
    # plain sampling would see about 0.4 hits in 10**5 walks at this x
    config = WalkConfig(10**4, 3000.0, PARETO3)
    x = 1.5 * config.M
    est = estimate_stratified(config, x, MCConfig(samples=1000, seed=8, k_cap=3))
    assert est.rel_se < 0.05
    assert est.p_hat / approx_interior(config, 2, x).value == pytest.approx(1.0, abs=0.15)


@pytest.mark.parametrize("k,z", [(1, 0.5), (2, 1.5), (3, 2.5)])
def test_simplex_oracle_agrees_with_recursion(k, z):
    value, se, bias = oracle_W_simplex(k, z, 3.0, samples=400_000, seed=21)
    assert bias == 0.0
    assert abs(value - W(k, z, 3.0)) <= 3.5 * se + 1e-12


def test_simplex_oracle_w1_is_exact():
    # with t_min = z every draw is a hit, so the estimate is the closed form
    value, se, _ = oracle_W_simplex(1, 0.5, 3.0, samples=1000, seed=1)
    assert value == pytest.approx(7.0, rel=1e-14) and se == 0.0


def test_oracle_truncation_bound_when_gap_tiny():
    value, se, bias = oracle_W_simplex(2, 1.0 + 1e-8, 3.0, samples=1000, seed=1)
    assert bias > 0.0


def test_oracle_domain():
    with pytest.raises(DomainError):
        oracle_W_simplex(2, 2.5, 3.0)
    with pytest.raises(DomainError):
        oracle_W_simplex(0, 0.5, 3.0)
