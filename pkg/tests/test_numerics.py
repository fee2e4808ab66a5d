import math

import numpy as np
import pytest
from scipy.integrate import quad

from stablemaps import numerics as N
from stablemaps.rng import stream


# ---------------------------------------------------------------------------
# scaled Bessel


def test_bessel_at_zero():
    assert N.bessel_i_scaled(0.0, 0.0) == 1.0
    assert N.bessel_i_scaled(0.7, 0.0) == 0.0
    with pytest.raises(ValueError):
        N.bessel_i_scaled(-0.2, 1.0)


def test_bessel_large_x_two_term_asymptotics():
    for nu in (0.6, 1.0, 1.4):
        lhs = N.bessel_i_scaled(nu, 1e3) * math.sqrt(2 * math.pi * 1e3)
        rhs = 1.0 - (4 * nu * nu - 1.0) / (8 * 1e3)
        assert abs(lhs - rhs) <= 1e-6


def test_bessel_against_series_oracle():
    # 60-term ascending series at moderate argument
    nu, x = 0.9, 5.0
    total = 0.0
    for k in range(60):
        total += (x / 2.0) ** (2 * k + nu) / (math.factorial(k) * math.gamma(nu + k + 1))
    assert N.bessel_i_scaled(nu, x) == pytest.approx(total * math.exp(-x), rel=1e-12)


def test_bessel_monotone_in_x():
    xs = np.linspace(0.1, 20, 50)
    vals = N.bessel_i_scaled(1.2, xs) * np.exp(xs)
    assert np.all(np.diff(vals) > 0)


# ---------------------------------------------------------------------------
# two-point residual


@pytest.mark.parametrize("alpha", [1.2, 1.3, 1.5, 1.7, 1.9])
def test_two_point_residual_vanishes_at_critical_c(alpha):
    res = N.two_point_residual(alpha, N.critical_bridge_constant(alpha))
    assert abs(res.value) <= 1e-6


@pytest.mark.parametrize("alpha", [1.3, 1.5, 1.8])
def test_two_point_residual_detects_perturbation(alpha):
    c = N.critical_bridge_constant(alpha)
    for factor in (0.9, 1.1):
        assert abs(N.two_point_residual(alpha, factor * c).value) > 1e-3


def test_two_point_residual_matches_gamma_form():
    # the hypergeometric connection formula gives the residual in closed
    # form for any c; quadrature must reproduce it
    for alpha, factor in ((1.3, 1.15), (1.5, 0.8), (1.7, 1.3)):
        c = factor * N.critical_bridge_constant(alpha)
        got = N.two_point_residual(alpha, c).value
        want = N.two_point_residual_gamma_form(alpha, c)
        assert got == pytest.approx(want, rel=5e-4)


def test_two_point_residual_domain():
    with pytest.raises(ValueError):
        N.two_point_residual(2.3, 0.3)
    with pytest.raises(ValueError):
        N.two_point_residual(1.5, -0.1)


# ---------------------------------------------------------------------------
# Bessel bridge functional


def test_bridge_functional_c_to_zero():
    # wide geometry: survival probability 1 - exp(-2 (x+a)(x+b)/ell) ~ 1
    val = N.bridge_functional(3.0, 0.0, 1.0, 0.5, 1e-12)
    assert val == pytest.approx(1.0, abs=1e-9)


def test_bridge_functional_monotone_in_c():
    vals = [N.bridge_functional(1.0, 0.0, 0.5, 1.0, c)
            for c in (0.05, 0.1, 0.2, 0.4, 0.8, 1.6)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_bridge_functional_domain():
    with pytest.raises(ValueError):
        N.bridge_functional(0.5, -1.0, 0.2, 1.0, 0.3)  # endpoint below -x
    with pytest.raises(ValueError):
        N.bridge_functional(1.0, 0.0, 0.5, -1.0, 0.3)


def test_bridge_functional_mc_agrees():
    closed = N.bridge_functional(1.0, 0.0, 0.5, 1.0, 0.375)
    mc, se = N.bridge_functional_mc(1.0, 0.0, 0.5, 1.0, 0.375, stream(42, 0),
                                    n_paths=40_000, n_steps=500)
    assert abs(mc - closed) <= 3.5 * se + 2e-3  # discretization allowance


# ---------------------------------------------------------------------------
# stable densities


def test_stable_zero_identity():
    for beta in (1.3, 1.5, 1.8):
        got = N.stable_density(beta, 1.0, 0.0)
        assert abs(got - 1.0 / abs(math.gamma(-1.0 / beta))) <= 1e-6
    # scaling: c^{1/beta} q_c(0) independent of c
    for c in (0.5, 2.0):
        got = c ** (1 / 1.5) * N.stable_density(1.5, c, 0.0)
        assert abs(got - 1.0 / abs(math.gamma(-2.0 / 3.0))) <= 1e-6


def test_zolotarev_duality():
    beta = 1.0 / 1.5
    for c in (0.5, 1.0, 1.5):
        for x in (0.5, 1.0, 2.0):
            lhs = N.stable_density(beta, c, x)
            rhs = (c / x) * N.stable_density(1.0 / beta, x, -c)
            assert abs(lhs - rhs) <= 1e-4 * max(1.0, lhs)


def test_one_sided_density_vanishes_left():
    assert N.stable_density(0.7, 1.0, -0.5) == 0.0
    assert N.stable_density(0.7, 1.0, 0.0) == 0.0


def test_one_sided_against_series():
    beta = 2.0 / 3.0
    for y in (0.8, 1.5, 3.0):
        series = sum((-1) ** (k + 1) * math.gamma(beta * k + 1)
                     / math.factorial(k) * math.sin(math.pi * beta * k)
                     * y ** (-beta * k - 1) for k in range(1, 80)) / math.pi
        assert N.stable_density(beta, 1.0, y) == pytest.approx(series, rel=1e-9)


def test_spectrally_positive_mass():
    val, _ = quad(lambda y: N.stable_density(1.5, 1.0, y), -8, 40, limit=300)
    tail, _ = quad(lambda y: N.stable_density(1.5, 1.0, y), 40, 4000, limit=300)
    assert val + tail == pytest.approx(1.0, abs=1e-4)


def test_left_tail_exponent():
    p = N.left_tail_exponent(1.5)
    assert abs(p - 3.0) / 3.0 <= 0.10


def test_stable_density_domain():
    with pytest.raises(ValueError):
        N.stable_density(1.0, 1.0, 0.5)
    with pytest.raises(ValueError):
        N.stable_density(1.5, -1.0, 0.5)


# ---------------------------------------------------------------------------
# bridge density and the buckle kernel


def test_bar_p_values():
    assert N.bar_p(2.0, 0.0) == pytest.approx(math.sqrt(math.pi / 4.0), rel=1e-14)
    mass, _ = quad(lambda z: N.bar_p(1.7, z), -25, 25, limit=200)
    assert mass == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(ValueError):
        N.bar_p(0.0, 0.1)


def test_gtilde_conventions_and_dichotomy():
    assert N.gtilde(1.3, 0.0, 0.7) == 0.0
    assert math.isfinite(N.gtilde(1.3, 0.5, 0.0))
    assert N.gtilde(1.6, 0.5, 0.0) == math.inf
    val = N.gtilde(1.5, 0.5, 0.3)
    assert 0.0 < val < math.inf
