import math

import pytest
from hypothesis import given, strategies as st

from etpa.errors import DomainError
from etpa.source import (EppState, SpdcSource, correlation_time, is_isolated_pairs,
                         mean_pair_separation, mode_number, pair_rate)
from etpa.units import SpectralWidth, WidthKind

BW = SpectralWidth.from_fwhm_nm(40, 1064)


def make(sat=None):
    return SpdcSource(2.0e9, BW, 6.8e6, saturation_power=sat)


def test_pair_rate_at_one_watt():
    s = pair_rate(make(), 1.0)
    assert s.pair_flux == pytest.approx(2.0e9)
    assert s.photon_flux == pytest.approx(4.0e9)


def test_pair_rate_linear_below_saturation():
    assert pair_rate(make(), 0.5).pair_flux == pytest.approx(1.0e9)


def test_saturation_asymptote():
    assert pair_rate(make(sat=2.0), 100.0).pair_flux == pytest.approx(4.0e9, rel=1e-6)
    # small-power slope is unchanged
    assert pair_rate(make(sat=2.0), 1e-6).pair_flux == pytest.approx(2.0e3, rel=1e-6)


@given(st.floats(0, 50), st.floats(0, 50))
def test_saturated_rate_monotonic(p1, p2):
    lo, hi = sorted((p1, p2))
    src = make(sat=2.0)
    assert pair_rate(src, lo).pair_flux <= pair_rate(src, hi).pair_flux <= 4.0e9 * (1 + 1e-12)


def test_negative_power_rejected():
    with pytest.raises(DomainError):
        pair_rate(make(), -1.0)


def test_correlation_time_reference_bandwidth():
    tau = correlation_time(pair_rate(make(), 1.0))
    assert tau == pytest.approx(1 / 2.8266e13, rel=1e-4)
    assert tau == pytest.approx(35.4e-15, rel=2e-3)


def test_correlation_time_unit_and_scaling():
    assert correlation_time(SpectralWidth(1.0, WidthKind.STD_ANGULAR)) == pytest.approx(1.0)
    t1 = correlation_time(SpectralWidth(3e13, WidthKind.STD_ANGULAR))
    t2 = correlation_time(SpectralWidth(6e13, WidthKind.STD_ANGULAR))
    assert t2 == pytest.approx(t1 / 2)


def test_mode_number_reference():
    assert mode_number(BW.fwhm_frequency, 6.8e6) == pytest.approx(2.2e6, rel=0.05)


def test_mode_number_trivial():
    assert mode_number(5e6, 5e6) == pytest.approx(math.sqrt(2))
    assert mode_number(5e7, 5e6) == pytest.approx(10 * math.sqrt(2))


def test_pair_separation():
    assert mean_pair_separation(EppState(2.0e9, BW)) == pytest.approx(500e-12, rel=1e-15)
    assert mean_pair_separation(EppState(1.0, BW)) == 1.0
    with pytest.raises(DomainError):
        mean_pair_separation(EppState(0.0, BW))


def test_separation_over_correlation_time():
    s = EppState(2.0e9, BW)
    assert mean_pair_separation(s) / correlation_time(s) == pytest.approx(1.41e4, rel=0.01)


def test_isolation():
    assert is_isolated_pairs(EppState(2.0e9, BW))
    tau = correlation_time(BW)
    assert not is_isolated_pairs(EppState(1 / tau, BW))
    # boundary is inclusive
    assert is_isolated_pairs(EppState(1 / (100 * tau), BW))
