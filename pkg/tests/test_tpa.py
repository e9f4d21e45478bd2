import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from etpa.errors import DomainError, InsufficientDataError
from etpa.tpa import (CollectionSetup, GaussianBeam, SampleCell, classical_tpa_rate,
                      enhancement_bound, etpa_rate, fit_collection_efficiency, focal_integral, qef,
                      qef_from_correlation_time)
from etpa.units import SpectralWidth, WidthKind

LAM = 1064e-9
RH6G_CELL = SampleCell.from_lab_units(10, 2, 9.4, 0.8)
REF_COL = CollectionSetup(0.019, 0.1)
SIGMA = SpectralWidth.from_fwhm_nm(40, 1064)


def quad_focal(beam, cell, offset):
    a, b = offset - cell.length / 2, offset + cell.length / 2
    zr = beam.rayleigh_range
    f = lambda z: 1.0 / beam.radius(z) ** 2
    pts = [beam.waist_position] if a < beam.waist_position < b else None
    val, _ = quad(f, a, b, points=pts, epsabs=0, epsrel=1e-13, limit=500)
    return val


@settings(max_examples=200, deadline=None)
@given(st.floats(0.5e-6, 50e-6), st.floats(400e-9, 2e-6), st.floats(1e-5, 0.05),
       st.floats(-0.02, 0.02), st.floats(-0.02, 0.02))
def test_focal_integral_matches_quadrature(w0, lam, length, waist, offset):
    beam = GaussianBeam(w0, lam, waist)
    cell = SampleCell(length, 1.0, 1.0)
    assert focal_integral(beam, cell, offset) == pytest.approx(quad_focal(beam, cell, offset),
                                                               rel=1e-9)


def test_infinite_cell_limit():
    beam = GaussianBeam(2e-6, LAM)
    # arctan tails of a cell 1e10 Rayleigh ranges long are below 1e-9
    cell = SampleCell(1e10 * beam.rayleigh_range, 1.0, 1.0)
    assert focal_integral(beam, cell) == pytest.approx(math.pi**2 / LAM, rel=1e-9)
    assert math.pi**2 / LAM == pytest.approx(9.276e6, rel=1e-4)


def test_two_rayleigh_range_cell():
    beam = GaussianBeam(3e-6, LAM)
    cell = SampleCell(2 * beam.rayleigh_range, 1.0, 1.0)
    assert focal_integral(beam, cell) == pytest.approx(math.pi / LAM * math.pi / 2, rel=1e-14)


def test_waist_far_outside_cell():
    beam = GaussianBeam(2e-6, LAM, waist_position=10.0)
    assert focal_integral(beam, SampleCell(1e-3, 1.0, 1.0)) < 1e-6 * math.pi**2 / LAM


def cgs_classical_rate(F, c_mM, sigma_gm, gamma, eta_det, eta_col, focal_per_m):
    """The same rate formula evaluated independently in CGS units."""
    n_per_cm3 = c_mM * 1e-3 * 6.02214076e23 / 1000.0  # mol/L -> molecules/cm^3
    sigma_cm4s = sigma_gm * 1e-50
    focal_per_cm = focal_per_m / 100.0
    return F**2 * n_per_cm3 * sigma_cm4s / math.pi * eta_col * eta_det * gamma * focal_per_cm


def test_classical_rate_reference_inputs():
    focal = 9.277e6
    got = classical_tpa_rate(4.0e9, RH6G_CELL, REF_COL, focal)
    want = cgs_classical_rate(4.0e9, 2, 9.4, 0.8, 0.1, 0.019, focal)
    assert got == pytest.approx(want, rel=1e-12)
    assert got == pytest.approx(8.13e-11, rel=1e-3)


def test_classical_rate_scaling():
    r1 = classical_tpa_rate(1e9, RH6G_CELL, REF_COL, 1e7)
    assert classical_tpa_rate(2e9, RH6G_CELL, REF_COL, 1e7) == pytest.approx(4 * r1)
    empty = SampleCell.from_lab_units(10, 0, 9.4, 0.8)
    assert classical_tpa_rate(2e9, empty, REF_COL, 1e7) == 0.0


def test_qef_reference():
    q = qef(SIGMA, 2.0e9)
    assert q == pytest.approx(16000, rel=0.1)
    sigma = 2 * math.pi * 299792458.0 * 40e-9 / LAM**2 / (2 * math.sqrt(2 * math.log(2)))
    assert q == pytest.approx(2 * sigma / (math.sqrt(math.pi) * 2.0e9), rel=1e-12)


def test_qef_identities():
    assert qef(SIGMA, 1.0e9) == pytest.approx(2 * qef(SIGMA, 2.0e9))
    sigma = SIGMA.to(WidthKind.STD_ANGULAR).value
    assert qef(sigma, 2e9) == pytest.approx(qef_from_correlation_time(1 / sigma, 2e9), rel=1e-12)
    with pytest.raises(DomainError):
        qef(SIGMA, 0.0)


def test_etpa_rate():
    c = classical_tpa_rate(4e9, RH6G_CELL, REF_COL, 1e7)
    assert etpa_rate(1.0, 4e9, RH6G_CELL, REF_COL, 1e7) == c
    assert etpa_rate(2.0, 4e9, RH6G_CELL, REF_COL, 1e7) == pytest.approx(2 * c)
    # a classical rate of 1.375e-10 with QEF 16,000 gives the quoted ETPA rate
    assert 16000 * 1.375e-10 == pytest.approx(2.2e-6, rel=1e-12)


def test_enhancement_bound_reference():
    b = enhancement_bound(0.7, 2.2e-6, 0.1, 0.3e-6)
    assert b.bound == pytest.approx(3.18e5, rel=1e-3)
    # independent quadrature sum of relative errors
    rel = math.sqrt((0.1 / 0.7) ** 2 + (0.3 / 2.2) ** 2)
    assert b.uncertainty == pytest.approx(0.7 / 2.2e-6 * rel, rel=1e-12)
    assert 0.5e5 <= b.uncertainty <= 0.8e5


def test_enhancement_bound_trivial():
    assert enhancement_bound(1e-6, 1e-6).bound == 1.0
    assert enhancement_bound(0.7, 2.2e-6).uncertainty == 0.0
    with pytest.raises(DomainError):
        enhancement_bound(0.7, 0.0)


def forward_rates(eta_col, fluxes, focal=1e7):
    col = CollectionSetup(eta_col, 0.1)
    return [classical_tpa_rate(F, RH6G_CELL, col, focal) for F in fluxes]


def test_collection_efficiency_roundtrip():
    F = np.geomspace(1e12, 1e14, 7)
    rows = list(zip(F, forward_rates(0.019, F)))
    eta, err = fit_collection_efficiency(rows, RH6G_CELL, REF_COL, 1e7)
    assert eta == pytest.approx(0.019, rel=1e-10)
    assert err == pytest.approx(0.0, abs=1e-12)


def test_collection_efficiency_equal_weights_same_as_unweighted():
    F = np.geomspace(1e12, 1e14, 5)
    y = forward_rates(0.019, F)
    e1, _ = fit_collection_efficiency(list(zip(F, y)), RH6G_CELL, REF_COL, 1e7)
    e2, _ = fit_collection_efficiency([(f, v, 3.0) for f, v in zip(F, y)], RH6G_CELL,
                                      REF_COL, 1e7)
    assert e1 == pytest.approx(e2, rel=1e-12)


def test_collection_efficiency_linear_in_rate():
    F = np.geomspace(1e12, 1e14, 5)
    y = forward_rates(0.019, F)
    e1, _ = fit_collection_efficiency(list(zip(F, y)), RH6G_CELL, REF_COL, 1e7)
    e3, _ = fit_collection_efficiency(list(zip(F, [3 * v for v in y])), RH6G_CELL, REF_COL, 1e7)
    assert e3 == pytest.approx(3 * e1, rel=1e-12)


def test_collection_efficiency_needs_two_fluxes():
    with pytest.raises(InsufficientDataError):
        fit_collection_efficiency([(1e12, 1.0)], RH6G_CELL, REF_COL, 1e7)


def test_domain_checks():
    with pytest.raises(DomainError):
        GaussianBeam(0.0, LAM)
    with pytest.raises(DomainError):
        SampleCell(1e-3, -1.0, 1.0)
    with pytest.raises(DomainError):
        CollectionSetup(1.5, 0.1)
