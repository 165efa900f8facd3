import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lattice_casimir.kernels import RadicandError
from lattice_casimir.lattice_modes import (HAMILTONIAN_FAMILIES, Family, LatticeGeometry, Wavevector,
                                           dispersion, dispersion_grid, group_velocity, in_zone,
                                           mode_spectrum, omega_chain, omega_diagonal,
                                           omega_spacetime_square, omega_square, omega_triangular,
                                           quantized_wavevectors, zone_bounds)

SQ2, SQ3 = math.sqrt(2), math.sqrt(3)
zone = st.floats(-math.pi, math.pi, allow_nan=False)


# --- closed-form values -----------------------------------------------------

def test_omega_chain_values():
    assert omega_chain(0.0) == 0.0
    assert omega_chain(math.pi) == pytest.approx(2.0, abs=1e-15)
    assert omega_chain(math.pi / 2) == pytest.approx(math.sqrt(2), rel=1e-15)


def test_omega_chain_rejects_out_of_zone():
    with pytest.raises(ValueError, match="Brillouin"):
        omega_chain(3.5)


def test_omega_square_values():
    assert omega_square(0.0, 0.0) == 0.0
    assert omega_square(math.pi, math.pi) == pytest.approx(2 * SQ2, rel=1e-15)
    assert omega_square(1e-4, 0.0) == pytest.approx(1e-4, rel=1e-8)
    with pytest.raises(ValueError):
        omega_square(4.0, 0.0)


def test_omega_diagonal_values():
    assert omega_diagonal(0.0, 0.0) == 0.0
    assert omega_diagonal(0.0, SQ2 * math.pi / 2) == pytest.approx(2.0, rel=1e-15)
    k = np.array([1e-2, 2e-2])
    err = abs(omega_diagonal(*k) - np.hypot(*k))
    assert err < np.hypot(*k) ** 3


def test_omega_diagonal_is_rotated_square():
    rng = np.random.default_rng(1)
    kx, ky = rng.uniform(-math.pi, math.pi, (2, 200))
    par, perp = (kx - ky) / SQ2, (kx + ky) / SQ2
    np.testing.assert_allclose(omega_diagonal(par, perp), omega_square(kx, ky), rtol=1e-12, atol=1e-15)


def test_radicand_clamp_policy():
    # cos(x)cos(y) hitting 1 + 1e-16 must clamp, not raise
    assert omega_diagonal(1e-9, 0.0) >= 0.0
    with pytest.raises(RadicandError):
        from lattice_casimir.lattice_modes import _clamp_radicand
        _clamp_radicand(np.array([-1e-9]), "test")


def test_omega_triangular_values():
    assert omega_triangular(0.0, 0.0) == 0.0
    assert omega_triangular(math.pi, 0.0) == pytest.approx(4 / SQ3, rel=1e-14)


def test_omega_triangular_sixfold():
    rng = np.random.default_rng(2)
    k = rng.uniform(-2, 2, (2, 300))
    c, s = math.cos(math.pi / 3), math.sin(math.pi / 3)
    rot = np.array([[c, -s], [s, c]]) @ k
    np.testing.assert_allclose(omega_triangular(*rot), omega_triangular(*k), rtol=1e-12)


def test_omega_spacetime_values():
    assert omega_spacetime_square(0.0, 0.0) == 0.0
    assert omega_spacetime_square(math.pi / 2, math.pi / 2) == pytest.approx(math.pi, rel=1e-7)
    assert omega_spacetime_square(math.pi, 0.0) == pytest.approx(math.pi, rel=1e-7)


def test_omega_spacetime_cutoff_error():
    with pytest.raises(ValueError, match="cutoff"):
        omega_spacetime_square(2.0, 2.0)


# --- invariants ---------------------------------------------------------------

@settings(max_examples=200)
@given(zone, zone)
def test_evenness_and_square_symmetry(k1, k2):
    for fam in (Family.SQUARE, Family.SQUARE_DIAGONAL, Family.TRIANGULAR):
        a, b = dispersion(fam, k1, k2), dispersion(fam, -k1, -k2)
        assert a >= 0
        assert a == pytest.approx(b, rel=1e-12, abs=1e-15)
    assert omega_chain(k1) == pytest.approx(omega_chain(-k1), rel=1e-12, abs=1e-15)
    w = omega_square(k1, k2)
    assert omega_square(k2, k1) == pytest.approx(w, rel=1e-15, abs=1e-15)
    assert omega_square(-k1, k2) == pytest.approx(w, rel=1e-15, abs=1e-15)


@settings(max_examples=100)
@given(st.floats(0, 2 * math.pi), st.floats(0.01, 2.0))
def test_triangular_sixfold_property(theta, radius):
    k = np.array([radius * math.cos(theta), radius * math.sin(theta)])
    c, s = math.cos(math.pi / 3), math.sin(math.pi / 3)
    rk = np.array([[c, -s], [s, c]]) @ k
    assert omega_triangular(*rk) == pytest.approx(omega_triangular(*k), rel=1e-10)


@pytest.mark.parametrize("family", HAMILTONIAN_FAMILIES)
def test_continuum_limit_third_order(family):
    direction = np.array([0.6, 0.8])
    errs = []
    for kmag in (0.08, 0.04, 0.02, 0.01):
        k = kmag * direction
        w = dispersion(family, kmag, 0.0) if family is Family.CHAIN else dispersion(family, *k)
        errs.append(abs(w - kmag))
        assert errs[-1] / kmag ** 3 < 0.1
    ratios = [a / b for a, b in zip(errs, errs[1:])]
    for r in ratios:
        assert r == pytest.approx(8.0, rel=0.02)


@pytest.mark.parametrize("family", HAMILTONIAN_FAMILIES)
def test_group_speed_bounded(family):
    (a0, a1), (b0, b1) = zone_bounds(family)
    m = 200
    k1 = a0 + (np.arange(m) + 0.5) * (a1 - a0) / m
    if family is Family.CHAIN:
        vg = group_velocity(family, (k1,))
    else:
        k2 = b0 + (np.arange(m) + 0.5) * (b1 - b0) / m
        g1, g2 = np.meshgrid(k1, k2, indexing="ij")
        mask = in_zone(family, g1, g2)
        vg = group_velocity(family, (g1[mask], g2[mask]))
    assert np.max(vg) <= 1 + 1e-9


def test_group_velocity_limits():
    assert group_velocity(Family.SQUARE, Wavevector(1e-3, 0.0)) == pytest.approx(1.0, abs=1e-6)
    assert group_velocity(Family.SQUARE, Wavevector(math.pi, math.pi)) == pytest.approx(0.0, abs=1e-5)
    assert group_velocity(Family.CHAIN, Wavevector(math.pi)) == pytest.approx(0.0, abs=1e-5)
    assert group_velocity(Family.TRIANGULAR, Wavevector(1e-3, 0.0)) == pytest.approx(1.0, abs=1e-6)


# --- spectra -------------------------------------------------------------------

def test_mode_spectrum_chain():
    spec = mode_spectrum(LatticeGeometry.chain(10), 2)
    np.testing.assert_allclose(spec.frequencies, [1.0, math.sqrt(3)], rtol=1e-15)
    assert spec.index_bounds == (2, 1)


def test_mode_spectrum_square_small():
    spec = mode_spectrum(LatticeGeometry(Family.SQUARE, 2, 4), 1)
    np.testing.assert_allclose(spec.frequencies, [math.sqrt(6), math.sqrt(2)], rtol=1e-15)


@pytest.mark.parametrize("Nx,n", [(5, 3), (12, 7)])
def test_mode_spectrum_triangular_size(Nx, n):
    spec = mode_spectrum(LatticeGeometry(Family.TRIANGULAR, Nx, 20), n)
    assert len(spec) == Nx * n
    assert spec.index_bounds == (Nx, n)
    assert np.all(spec.frequencies >= 0)


def test_mode_spectrum_immutable():
    spec = mode_spectrum(LatticeGeometry(Family.SQUARE, 4, 6), 2)
    with pytest.raises(ValueError):
        spec.frequencies[0] = 1.0


def test_mode_spectrum_rejects_spacetime():
    with pytest.raises(ValueError):
        mode_spectrum(LatticeGeometry(Family.SPACETIME_SQUARE, 10, 10), 3)


def _fold(k):
    return k - 2 * math.pi * np.round(k / (2 * math.pi))


@pytest.mark.parametrize("family", [Family.CHAIN, Family.SQUARE, Family.SQUARE_DIAGONAL, Family.TRIANGULAR])
def test_spectrum_consistent_with_dispersion(family):
    geom = LatticeGeometry(family, 17, 40)
    n = 9
    spec = mode_spectrum(geom, n)
    k1, k2 = quantized_wavevectors(geom, n)
    if family is Family.CHAIN:
        expected = omega_chain(k1)
    elif family is Family.SQUARE:
        expected = omega_square(_fold(k1), _fold(k2))
    elif family is Family.SQUARE_DIAGONAL:
        expected = omega_diagonal(k1, k2)
    else:
        expected = omega_triangular(k1, k2)
    np.testing.assert_allclose(spec.frequencies, expected, rtol=1e-12, atol=1e-14)


def test_geometry_locked_factors():
    sq = LatticeGeometry(Family.SQUARE, 860, 860)
    assert (sq.step_perp, sq.barrier_length, sq.mode_overcount) == (1.0, 860.0, 1.0)
    dg = LatticeGeometry(Family.SQUARE_DIAGONAL, 860, 860)
    assert dg.step_perp == pytest.approx(SQ2 / 2)
    assert dg.barrier_length == pytest.approx(SQ2 / 2 * 860)
    assert dg.mode_overcount == 2.0
    tr = LatticeGeometry(Family.TRIANGULAR, 967, 967)
    assert (tr.step_perp, tr.barrier_length, tr.mode_overcount) == (pytest.approx(SQ3 / 2), 967.0, 1.0)
    ch = LatticeGeometry.chain(100)
    assert (ch.step_perp, ch.barrier_length, ch.mode_overcount) == (1.0, 1.0, 1.0)


@pytest.mark.parametrize("Nx,Ny", [(1, 10), (10, 1), (2.5, 10)])
def test_geometry_validation(Nx, Ny):
    with pytest.raises(ValueError):
        LatticeGeometry(Family.SQUARE, Nx, Ny)


# --- grids ---------------------------------------------------------------------

def test_square_grid_small():
    grid = dispersion_grid(Family.SQUARE, 3)
    assert len(grid) == 9
    corner = [om for k1, k2, om, vg, ok in grid.rows() if k1 == math.pi and k2 == math.pi]
    assert corner == [pytest.approx(2 * SQ2)]


def test_triangular_grid_zero_only_at_origin():
    grid = dispersion_grid(Family.TRIANGULAR, 41)
    zero = grid.omega < 1e-12
    assert np.all(np.hypot(grid.k1[zero], grid.k2[zero]) < 1e-12)
    assert zero.sum() == 1


def test_spacetime_grid_flags_domain():
    grid = dispersion_grid(Family.SPACETIME_SQUARE, 21)
    outside = ~grid.in_domain
    assert outside.any() and grid.in_domain.any()
    assert np.all(np.isnan(grid.omega[outside]))
    assert np.all(np.isfinite(grid.omega[grid.in_domain]))


def test_grid_csv(tmp_path):
    grid = dispersion_grid(Family.SQUARE, 4)
    path = tmp_path / "g.csv"
    grid.write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "k1,k2,omega,vg,in_domain"
    assert len(lines) == 17


def test_grid_rejects_spacetime_chain():
    with pytest.raises(ValueError):
        dispersion_grid(Family.SPACETIME_CHAIN, 10)
