import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lattice_casimir.force_extract import (Convention, DerivativeMethod, GeometryFactors, PowerLawFit,
                                           centered_difference_derivative, chain_force_closed_form,
                                           dimreg_plate_force, fit_power_law, spline_derivative,
                                           zeta_force_1d)
from lattice_casimir.lattice_modes import Family, LatticeGeometry
from lattice_casimir.zero_point import chain_closed_derivative, energy_curve, system_energy_chain_closed

SQUARE = LatticeGeometry(Family.SQUARE, 860, 860)
TRI = LatticeGeometry(Family.TRIANGULAR, 967, 967)
DIAG = LatticeGeometry(Family.SQUARE_DIAGONAL, 860, 860)
CHAIN = LatticeGeometry.chain(17620)


# --- derivatives --------------------------------------------------------------

@pytest.mark.parametrize("method", list(DerivativeMethod))
def test_cubic_reproduced(method):
    n = np.arange(1.0, 11.0)
    d = spline_derivative((n, n ** 2), method)
    np.testing.assert_allclose(d[:, 1], 2 * n, atol=1e-9)
    d3 = spline_derivative((n, n ** 3 - 4 * n), method)
    np.testing.assert_allclose(d3[:, 1], 3 * n ** 2 - 4, rtol=1e-9)


@pytest.mark.parametrize("method", list(DerivativeMethod))
def test_constant_has_zero_derivative(method):
    n = np.arange(5.0, 50.0, 5.0)
    d = spline_derivative((n, np.full_like(n, 7.25)), method)
    np.testing.assert_allclose(d[:, 1], 0.0, atol=1e-12)


def test_duplicate_n_rejected():
    with pytest.raises(ValueError, match="duplicate"):
        spline_derivative(([1.0, 2.0, 2.0, 3.0, 4.0], [1.0, 2.0, 3.0, 4.0, 5.0]))


def test_too_few_samples_rejected():
    with pytest.raises(ValueError):
        spline_derivative(([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]))


def test_chain_curve_derivative_tracks_analytic():
    ns = np.arange(600, 706, 5)
    u = np.array([system_energy_chain_closed(int(n), 17620) for n in ns])
    d = spline_derivative((ns, u))[:, 1]
    analytic = np.array([chain_closed_derivative(int(n), 17620) for n in ns])
    assert np.all(d > 0)
    assert np.all(np.diff(d) < 0)
    np.testing.assert_allclose(d, analytic, rtol=1e-5)


def test_centered_difference():
    d = centered_difference_derivative(lambda n: n ** 2, [3, 4, 5], 2)
    np.testing.assert_allclose(d[:, 1], [6, 8, 10])


# --- fits ---------------------------------------------------------------------

def planted(geom, C, b, ns, conv):
    # dU/dn for which the geometry conversion yields F = pre / (C * y**b)
    y = geom.step_perp * ns
    pre = math.pi if conv is Convention.ONE_D_WITH_PI else 1.0
    force = pre / (C * y ** b)
    return np.column_stack([ns, force / GeometryFactors.from_geometry(geom).force_scale])


def test_fit_synthetic_1d():
    ns = np.arange(600.0, 706.0, 5.0)
    fit = fit_power_law(np.column_stack([ns, math.pi / (24 * ns ** 2)]), CHAIN, Convention.ONE_D_WITH_PI)
    assert fit.A == pytest.approx(24.0, rel=1e-8)
    assert fit.b == pytest.approx(2.0, rel=1e-8)
    assert fit.max_abs_residual < 1e-12
    assert fit.slope == fit.b


def test_fit_synthetic_triangular():
    ns = np.arange(150.0, 191.0, 5.0)
    fit = fit_power_law(planted(TRI, 20.9, 3.0, ns, Convention.TWO_D_PER_LENGTH), TRI)
    assert fit.A == pytest.approx(20.9, rel=1e-8)
    assert fit.b == pytest.approx(3.0, rel=1e-8)
    assert fit.intercept == pytest.approx(math.log(20.9), rel=1e-12)


@settings(max_examples=60)
@given(st.sampled_from([CHAIN, SQUARE, DIAG, TRI]), st.floats(0.05, 2000.0), st.floats(0.5, 5.0))
def test_fit_round_trip(geom, C, b):
    ns = np.arange(150.0, 191.0, 5.0)
    conv = Convention.for_geometry(geom)
    fit = fit_power_law(planted(geom, C, b, ns, conv), geom)
    assert fit.A == pytest.approx(C, rel=1e-8)
    assert fit.b == pytest.approx(b, rel=1e-8)


@settings(max_examples=40)
@given(st.floats(1e-3, 1e3))
def test_scale_covariance(lam):
    n = np.arange(150.0, 191.0, 5.0)
    u = -1.0 / (2 * 20.9 * n ** 2) + 1e-3 / n ** 3
    base = fit_power_law(spline_derivative((n, u)), SQUARE)
    scaled = fit_power_law(spline_derivative((n, lam * u)), SQUARE)
    assert scaled.intercept == pytest.approx(base.intercept - math.log(lam), abs=1e-9)
    assert scaled.b == pytest.approx(base.b, abs=1e-12)


def test_fit_rejects_nonpositive():
    ns = np.arange(1.0, 6.0)
    with pytest.raises(ValueError, match="nonpositive"):
        fit_power_law(np.column_stack([ns, [1.0, -1.0, 1.0, 1.0, 1.0]]), SQUARE)


def test_fit_complex_log_when_allowed():
    ns = np.arange(1.0, 6.0)
    d = np.array([1.0, -0.5, 0.25, -0.2, 0.1])
    fit = fit_power_law(np.column_stack([ns, d]), SQUARE, allow_sign_change=True)
    assert fit.n_nonpositive == 2
    real_only = np.polyfit(np.log(ns), -np.log(np.abs(d)), 1)
    assert fit.b == pytest.approx(real_only[0], rel=1e-12)
    assert fit.imag_slope is not None


def test_fit_round_trips_through_dict():
    ns = np.arange(150.0, 191.0, 5.0)
    fit = fit_power_law(planted(TRI, 20.9, 3.0, ns, Convention.TWO_D_PER_LENGTH), TRI)
    assert PowerLawFit.from_dict(fit.to_dict()) == fit
    assert fit.force(10.0) == pytest.approx(-1 / (20.9 * 1000.0), rel=1e-8)


# --- pins against the reference fit listings ------------------------------------

def test_square_fit_matches_reference_listing():
    # local-cubic differentiation mimics the listing's interpolation:
    # reference line 3.03942 + 3.00405 k (5 decimal places)
    curve = energy_curve(SQUARE, 150, 190, 5)
    fit = fit_power_law(spline_derivative(curve, DerivativeMethod.LOCAL_CUBIC), SQUARE)
    assert fit.intercept == pytest.approx(3.03942, abs=5e-5)
    assert fit.slope == pytest.approx(3.00405, abs=5e-5)
    assert fit.A == pytest.approx(20.893, abs=2e-3)
    spline = fit_power_law(spline_derivative(curve), SQUARE)
    assert spline.intercept == pytest.approx(3.03942, abs=3e-3)
    assert spline.slope == pytest.approx(3.00405, abs=1e-3)


def test_spacetime_complex_fit_matches_reference_listing():
    # reference (garbled) line: (1.78087 - 10.6052 i) + (0.249346 + 1.7941 i) k
    geom = LatticeGeometry(Family.SPACETIME_SQUARE, 860, 860)
    curve = energy_curve(geom, 150, 190, 5)
    fit = fit_power_law(spline_derivative(curve, DerivativeMethod.LOCAL_CUBIC), geom,
                        allow_sign_change=True)
    assert fit.intercept == pytest.approx(1.78087, abs=5e-5)
    assert fit.imag_intercept == pytest.approx(-10.6052, abs=5e-4)
    assert fit.slope == pytest.approx(0.249346, abs=5e-6)
    assert fit.imag_slope == pytest.approx(1.7941, abs=5e-5)


# --- closed forms ---------------------------------------------------------------

def test_chain_force_values():
    assert chain_force_closed_form(1.0) == pytest.approx(-math.pi / 24, rel=1e-15)
    assert round(chain_force_closed_form(1.0), 5) == -0.13090
    assert chain_force_closed_form(2.0) == pytest.approx(-math.pi / 96, rel=1e-15)
    assert math.trunc(chain_force_closed_form(2.0) * 1e6) == -32724


def test_zeta_force():
    assert zeta_force_1d(1.0) == pytest.approx(-math.pi / 24, rel=1e-15)
    assert zeta_force_1d(2.0) / zeta_force_1d(1.0) == pytest.approx(0.25, rel=1e-15)
    x = np.linspace(0.1, 100, 500)
    np.testing.assert_allclose(zeta_force_1d(x), chain_force_closed_form(x), rtol=1e-15)


def test_closed_forms_reject_nonpositive():
    with pytest.raises(ValueError):
        zeta_force_1d(0.0)
    with pytest.raises(ValueError):
        chain_force_closed_form(-1.0)


@pytest.mark.parametrize("D,expected", [
    (1, -math.pi / 48),
    (2, -1.2020569031595942 / (16 * math.pi)),
    (3, -math.pi ** 2 / 960),
])
def test_dimreg_plate_force(D, expected):
    assert dimreg_plate_force(D, 1.0) == pytest.approx(expected, rel=1e-13)


def test_dimreg_scaling():
    assert dimreg_plate_force(2, 2.0) == pytest.approx(dimreg_plate_force(2, 1.0) / 8, rel=1e-14)
    with pytest.raises(ValueError):
        dimreg_plate_force(0, 1.0)
