import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from randcomplex.thresholds import (
    betti_density_formula, c_d, ex_xT_bound, fixed_point_roots, gamma_d, log10_gap,
    poisson_tail, psi, regime_densities, t_fixed_point, t_sequence, threshold_table, x_star,
)

# printed table of threshold constants
GAMMA = {2: 2.455, 3: 3.089, 4: 3.509, 5: 3.822, 10: 4.749, 100: 7.555, 1000: 10.175}
CD = {2: 2.754, 3: 3.907, 4: 4.962, 5: 5.984}


def test_psi_values_and_domain():
    assert psi(1 / math.e, 2) == pytest.approx(1 / (1 - 1 / math.e) ** 2)
    assert psi(1 / math.e, 2) == pytest.approx(2.50265, abs=1e-5)
    assert psi(1 - 1e-9, 1) == pytest.approx(1.0, abs=1e-6)
    for bad in (0.0, 1.0, -0.5, 2.0):
        with pytest.raises(ValueError):
            psi(bad, 2)


@pytest.mark.parametrize("d,value", sorted(GAMMA.items()))
def test_gamma_table(d, value):
    assert abs(gamma_d(d) - value) <= 1e-3


@pytest.mark.parametrize("d,value", sorted(CD.items()))
def test_cd_table(d, value):
    assert abs(c_d(d) - value) <= 1e-3


@pytest.mark.parametrize("d", [2, 3, 4, 5, 10, 50])
def test_x_star_solves_its_equation(d):
    x = x_star(d)
    assert abs((d + 1) * (1 - x) + (1 + d * x) * math.log(x)) < 1e-8
    assert psi(x, d) == pytest.approx(c_d(d), rel=1e-10)


@pytest.mark.parametrize("d", [2, 3, 5, 8, 20])
def test_gamma_below_cd_below_d_plus_one(d):
    tb = threshold_table(d)
    assert tb.gamma_d < tb.c_d < d + 1
    # plain subtraction is only trustworthy while the gap is well above rounding
    if d <= 8:
        assert log10_gap(d) == pytest.approx(math.log10(d + 1 - tb.c_d), abs=1e-6)


def test_gamma_grows_like_log_d():
    ratios = [gamma_d(d) / math.log(d) for d in (10, 100, 1000, 10000)]
    assert all(b < a for a, b in zip(ratios, ratios[1:]))


def test_log10_gap_large_d_is_finite():
    assert log10_gap(10) == pytest.approx(-3.735, abs=2e-3)
    assert log10_gap(1000) == pytest.approx(-431.73, abs=0.01)


def test_t_sequence_and_fixed_point():
    ts = t_sequence(3.0, 2, 200)
    assert ts[0] == pytest.approx(math.exp(-3.0))
    assert np.all(np.diff(ts) >= 0)
    assert ts[-1] == pytest.approx(t_fixed_point(3.0, 2), abs=1e-10)
    assert t_fixed_point(3.0, 2) == pytest.approx(0.0781091, abs=1e-6)
    assert t_fixed_point(2.6, 2) == pytest.approx(0.158959, abs=1e-5)
    assert t_fixed_point(2.0, 2) == 1.0


def test_fixed_point_roots_count():
    assert fixed_point_roots(2.0, 2) == [1.0]
    assert len(fixed_point_roots(3.0, 2)) == 3
    g = gamma_d(2)
    r = fixed_point_roots(g, 2)
    assert r[-1] == 1.0 and len(r) >= 2


@settings(max_examples=40, deadline=None)
@given(st.floats(0.2, 8.0), st.integers(2, 6))
def test_fixed_point_is_a_root(c, d):
    t = t_fixed_point(c, d)
    assert abs(t - math.exp(-c * (1 - t) ** d)) < 1e-9
    assert 0 < t <= 1


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 6.0), st.integers(2, 5))
def test_regime_densities_invariants(c, d):
    r = regime_densities(c, d)
    for v in (r.core_dminus1_density, r.shadow_density, r.r_shadow_density):
        assert 0 <= v <= 1
    assert r.betti_density >= 0
    if c > c_d(d) + 1e-6:
        assert r.betti_density == pytest.approx(r.core_d_density - r.core_dminus1_density, abs=1e-12)
        assert r.r_shadow_density == r.shadow_density
    elif c < gamma_d(d):
        assert r.core_dminus1_density == 0 and r.core_d_density == 0 and r.shadow_density == 0


def test_densities_at_c3():
    r = regime_densities(3.0, 2)
    assert r.core_dminus1_density == pytest.approx(0.722740, abs=1e-6)
    assert r.core_d_density == pytest.approx(0.783499, abs=1e-6)
    assert r.betti_density == pytest.approx(0.0607591, abs=1e-6)
    assert r.shadow_density == pytest.approx((1 - t_fixed_point(3.0, 2)) ** 3)


def test_average_core_degree_is_d_plus_one_at_cd():
    for d in (2, 3, 4):
        assert regime_densities(c_d(d), d).avg_core_degree == pytest.approx(d + 1, abs=1e-6)
        assert regime_densities(c_d(d), d).boundary_point


def test_betti_density_vanishes_at_cd():
    for d in (2, 3):
        c = c_d(d)
        assert betti_density_formula(c, d, t_fixed_point(c, d)) == pytest.approx(0.0, abs=1e-9)


def test_ex_xT_bound():
    assert ex_xT_bound(2.0, 2) == pytest.approx(1 - 2 / 3)
    assert ex_xT_bound(3.0, 2) == pytest.approx(0.0607591, abs=1e-6)


def test_poisson_tail():
    assert poisson_tail(0, 2.0) == 1.0
    assert poisson_tail(1, 2.0) == pytest.approx(1 - math.exp(-2))
    assert poisson_tail(2, 0.0) == 0.0
