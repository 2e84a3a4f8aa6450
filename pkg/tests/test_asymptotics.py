from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from censored_ldp.asymptotics import (
    K_MAX,
    W,
    W1_closed,
    W2_closed,
    WalkConfig,
    approx_auto,
    approx_below,
    approx_interior,
    approx_near_multiple,
    capital_H,
    classify_regime,
    s_n,
)
from censored_ldp.distributions import make_standardized_pareto, tail_V
from censored_ldp.errors import DomainError, HardRegimeError, RangeError

PARETO3 = make_standardized_pareto(3.0)

# 30-digit quadrature of the defining recursion (mpmath), frozen
W2_REFERENCE = {
    (3.0, 1.25): 57.415724940084756,
    (3.0, 1.5): 6.2313925560359259,
    (3.0, 1.75): 0.59311238904778633,
    (2.5, 1.5): 3.4365599922367728,
    (4.0, 1.5): 17.776221597704143,
}
W3_REFERENCE = {(3.0, 2.5): 3.34649561667}


@pytest.fixture(scope="module")
def desk():
    return WalkConfig(10**4, 3000.0, PARETO3)


def test_scale_and_mass_reference_values(desk):
    assert s_n(10**4, 3.0) == pytest.approx(303.48542587702927, rel=1e-15)
    assert desk.Pi_n == pytest.approx(5.6923597311606371e-7, rel=1e-13)
    assert desk.censoring_ratio == pytest.approx(3000.0 / 303.48542587702927)


def test_config_rejects_bad_input():
    with pytest.raises(DomainError):
        WalkConfig(1, 10.0, PARETO3)
    with pytest.raises(DomainError):
        WalkConfig(100, -1.0, PARETO3)
    with pytest.raises(HardRegimeError):
        WalkConfig(10**4, 5.0, PARETO3)


def test_default_band_parameters(desk):
    assert desk.default_h == 0.2
    assert desk.default_eps == 0.4
    wide = WalkConfig(10**4, 100 * desk.s_n, PARETO3)
    assert wide.default_h == pytest.approx(0.04)
    assert wide.default_d == pytest.approx(4 * math.sqrt(10**4 * math.log(10**4)))
    assert not wide.soft_censoring_warning
    assert WalkConfig(10**4, 500.0, PARETO3).soft_censoring_warning


@pytest.mark.parametrize("alpha", [2.5, 3.0, 4.0])
def test_W1_closed_form(alpha):
    for z in (0.01, 0.3, 0.5, 0.97):
        assert W(1, z, alpha) == pytest.approx(W1_closed(z, alpha), rel=1e-12)
    assert W1_closed(0.5, 3.0) == 7.0


@pytest.mark.parametrize("key", sorted(W2_REFERENCE))
def test_W2_against_reference(key):
    alpha, z = key
    assert W(2, z, alpha) == pytest.approx(W2_REFERENCE[key], rel=1e-10)
    assert W2_closed(z, alpha) == pytest.approx(W2_REFERENCE[key], rel=1e-10)


def test_W3_against_reference_and_nested_quad():
    assert W(3, 2.5, 3.0) == pytest.approx(W3_REFERENCE[(3.0, 2.5)], rel=1e-10)

    def inner(u):
        return W2_closed(u, 3.0) if u < 2 else 0.0

    want, _ = integrate.quad(lambda t: 3.0 * inner(2.25 - t) * t**-4.0, 0.25, 1.0, points=[0.25], epsrel=1e-11, limit=200)
    assert W(3, 2.25, 3.0) == pytest.approx(want, rel=1e-8)


def test_W_domain():
    for k, z in ((1, 1.0), (2, 1.0), (2, 2.0), (3, 1.5), (-1, 0.5)):
        with pytest.raises(DomainError):
            W(k, z, 3.0)
    assert W(0, 0.5, 3.0) == 1.0
    with pytest.raises(DomainError):
        W(1, 0.5, 2.0)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_W_decreasing_and_vanishing_at_right_end(k):
    z = k - 1 + np.linspace(0.05, 0.999, 12)
    vals = np.array([W(k, float(v), 3.0) for v in z])
    assert np.all(np.diff(vals) < 0)
    assert vals[-1] < 1e-2 * vals[0]


@pytest.mark.parametrize("k", [1, 2, 3])
def test_left_end_power_law(k):
    # one coordinate just above d = z - k + 1, the other k - 1 pinned near 1:
    # W_k(k - 1 + d) grows like d**(k - 1 - alpha)
    near = W(k, k - 1 + 1e-3, 3.0)
    nearer = W(k, k - 1 + 1e-4, 3.0)
    assert math.log10(nearer / near) == pytest.approx(3.0 + 1 - k, abs=0.1)


@settings(max_examples=25, deadline=None)
@given(st.floats(min_value=1.02, max_value=1.98))
def test_W2_quadrature_matches_closed_form_anywhere(z):
    assert W(2, z, 3.0) == pytest.approx(W2_closed(z, 3.0), rel=1e-8)


def test_capital_H_values():
    n = 10**4
    assert capital_H(n, 0.0, PARETO3) == 0.5
    z = 250.0
    want = 0.5 * math.erfc(z / 100 / math.sqrt(2)) + n * tail_V(PARETO3, z)
    assert capital_H(n, z, PARETO3) == pytest.approx(want, rel=1e-14)
    # below sqrt(n) the jump term is off
    assert capital_H(n, 50.0, PARETO3) == pytest.approx(0.5 * math.erfc(0.5 / math.sqrt(2)), rel=1e-14)


def test_capital_H_single_discontinuity():
    n = 10**4
    root = 100.0
    step = capital_H(n, math.nextafter(root, math.inf), PARETO3) - capital_H(n, root, PARETO3)
    assert step == pytest.approx(n * tail_V(PARETO3, root), rel=1e-9)
    grid = np.linspace(1.0, 5000.0, 2001)
    grid = grid[np.abs(grid - root) > 0.1]
    jumps = [capital_H(n, g + 1e-6, PARETO3) - capital_H(n, g, PARETO3) for g in grid]
    assert max(abs(j) for j in jumps) < 1e-8


def test_below_terms_and_range(desk):
    a = approx_below(desk, 1.5 * desk.s_n)
    assert a.value == pytest.approx(capital_H(desk.n, 1.5 * desk.s_n, PARETO3))
    assert [label for label, _ in a.terms] == ["gaussian", "single_jump"]
    assert str(a.regime) == "BelowThreshold"
    assert str(approx_below(desk, 300.0).regime) == "Gaussian"
    with pytest.raises(RangeError):
        approx_below(desk, desk.M - desk.default_d + 1.0)
    with pytest.raises(RangeError):
        approx_below(desk, -1.0)


def test_near_multiple_is_scaled_H(desk):
    for k in (1, 2, 3):
        x = k * desk.M + 250.0
        a = approx_near_multiple(desk, k, x)
        want = desk.Pi_n**k / math.factorial(k) * capital_H(desk.n, 250.0, PARETO3)
        assert a.value == pytest.approx(want, rel=1e-13)
    # at x = kM the hybrid is 1/2
    a = approx_near_multiple(desk, 2, 2 * desk.M)
    assert a.value == pytest.approx(desk.Pi_n**2 / 4, rel=1e-14)
    with pytest.raises(RangeError):
        approx_near_multiple(desk, 1, 1.5 * desk.M)


def test_interior_k2_by_hand(desk):
    u = 1.5
    a = approx_interior(desk, 2, u * desk.M)
    want = desk.Pi_n**2 / 2 * (W2_REFERENCE[(3.0, 1.5)] + 2 * W1_closed(0.5, 3.0) + 1.0)
    assert a.value == pytest.approx(want, rel=1e-10)
    assert len(a.terms) == 3
    with pytest.raises(RangeError):
        approx_interior(desk, 2, 1.9 * desk.M)


def test_interior_decreasing_in_x(desk):
    xs = np.linspace(1.25, 1.75, 11) * desk.M
    vals = [approx_interior(desk, 2, float(x)).value for x in xs]
    assert np.all(np.diff(vals) < 0)


def test_classify_regime_partition(desk):
    tags = {
        100.0: "Gaussian",
        1000.0: "BelowThreshold",
        2000.0: "NearMultiple(1)",
        3000.0: "NearMultiple(1)",
        4500.0: "Interior(2)",
        6000.0: "NearMultiple(2)",
        10500.0: "Interior(4)",
    }
    for x, tag in tags.items():
        assert str(classify_regime(desk, x)) == tag
    # closed near-multiple bands
    assert str(classify_regime(desk, 1.4 * desk.M)) == "NearMultiple(1)"
    with pytest.raises(DomainError):
        classify_regime(desk, 100.0, eps=0.6, h=0.3)
    with pytest.raises(DomainError):
        classify_regime(desk, 0.0)


def test_approx_auto_dispatch_and_diagnostics(desk):
    a = approx_auto(desk, 4500.0)
    assert str(a.regime) == "Interior(2)" and len(a.terms) == 3 and not a.diagnostics
    b = approx_auto(desk, 1.3 * desk.M)
    assert str(b.regime) == "NearMultiple(1)"
    assert [label for label, _ in b.diagnostics] == ["interior_k=2"]
    assert b.diagnostics[0][1] == pytest.approx(approx_interior(desk, 2, 1.3 * desk.M).value)
    with pytest.raises(RangeError):
        approx_auto(desk, (K_MAX + 0.5) * desk.M)
    with pytest.raises(DomainError):
        approx_auto(desk, -5.0)


def test_approx_auto_interior_one_uses_hybrid():
    # with M = 2500 the gap between M - d and (1 - eps) M is (0.51 M, 0.6 M)
    config = WalkConfig(10**4, 2500.0, PARETO3)
    x = 0.55 * config.M
    a = approx_auto(config, x)
    assert str(a.regime) == "Interior(1)"
    assert a.value == pytest.approx(capital_H(config.n, x, PARETO3))
    assert a.diagnostics[0][0] == "interior_k=1"


def test_approximation_decreasing_across_regimes(desk):
    xs = np.linspace(0.7, 3.3, 60) * desk.M
    vals = np.array([approx_auto(desk, float(x)).value for x in xs])
    # non-increasing inside each integer cell; the formulas hand over at band edges
    for k in range(0, 3):
        cell = (xs / desk.M > k + 0.45) & (xs / desk.M < k + 1.4)
        assert np.all(np.diff(vals[cell]) <= 0)


def test_as_dict_round_trip(desk):
    d = approx_auto(desk, 4500.0).as_dict()
    assert d["regime"] == "Interior(2)"
    assert [t["label"] for t in d["terms"]] == ["j=0", "j=1", "j=2"]
