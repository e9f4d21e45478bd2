import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from etpa.errors import InsufficientDataError
from etpa.scaling import (DataSeries, PowerLawFit, Scaling, classify_scaling, dark_subtract,
                          fit_power_law, fit_subset, series_from_counts)


def exact(amplitude, exponent, xs):
    return DataSeries(tuple(xs), tuple(amplitude * x**exponent for x in xs), (0.0,) * len(xs))


def fake_fit(k, err):
    return PowerLawFit(1.0, k, err, np.diag([0.0, err**2]), 10)


def test_dark_subtract_values():
    s = dark_subtract(DataSeries((1.0, 2.0), (10.0, 100.0), (1.0, 1.0), duration=10.0,
                                 dark_rate=1.0))
    assert s.y == (9.0, 99.0)
    # signal and dark shot noise both over the same 10 s
    assert s.y_err[0] == pytest.approx(math.sqrt(11.0 * 10) / 10)


def test_dark_subtract_excludes_nonpositive():
    s = dark_subtract(DataSeries((1.0,), (0.5,), (0.1,), dark_rate=1.0))
    assert s.y == () and s.excluded == (0,)


def test_low_point_with_long_acquisition():
    # 0.7 /s net over 100 /s dark, 1800 s effective: just at the 3 sigma line
    T, dark, net = 1800.0, 100.0, 0.7
    s = series_from_counts([1.0], [(dark + net) * T], [T], [dark * T])
    assert s.y[0] == pytest.approx(net)
    assert s.y[0] / s.y_err[0] == pytest.approx(net * T / math.sqrt((2 * dark + net) * T))


def test_exact_quadratic():
    fit = fit_power_law(exact(3.0, 2.0, [1, 2, 4, 8]))
    assert fit.exponent == pytest.approx(2.0, rel=1e-10)
    assert fit.amplitude == pytest.approx(3.0, rel=1e-10)


def test_exact_linear():
    assert fit_power_law(exact(5.0, 1.0, [1, 3, 9])).exponent == pytest.approx(1.0, rel=1e-10)


@given(st.floats(1e-6, 1e6), st.floats(-3, 3),
       st.lists(st.floats(1e-3, 1e3), min_size=2, max_size=12, unique=True))
def test_noiseless_roundtrip(a, k, xs):
    xs = sorted(xs)
    if xs[-1] / xs[0] < 1.01:
        return
    fit = fit_power_law(exact(a, k, xs))
    assert fit.exponent == pytest.approx(k, rel=1e-10, abs=1e-10)
    assert fit.amplitude == pytest.approx(a, rel=1e-9)


def test_fixed_exponent_two_points():
    fit = fit_power_law(exact(7.0, 2.0, [2.0, 5.0]), fixed_exponent=2.0)
    assert fit.amplitude == pytest.approx(7.0, rel=1e-14)
    assert fit.fixed and fit.exponent_err == 0.0


def test_weighted_fit_ignores_high_noise_outlier():
    xs = [1.0, 2.0, 4.0, 8.0]
    ys = [x**2 for x in xs]
    ys[-1] *= 3.0
    errs = [1e-6, 1e-6, 1e-6, 1e6]
    fit = fit_power_law(DataSeries(tuple(xs), tuple(ys), tuple(errs)))
    assert fit.exponent == pytest.approx(2.0, abs=1e-6)


def test_mixed_zero_errors_rejected():
    with pytest.raises(ValueError):
        fit_power_law(DataSeries((1.0, 2.0, 3.0), (1.0, 2.0, 3.0), (0.0, 0.1, 0.1)))


def test_insufficient_points():
    with pytest.raises(InsufficientDataError):
        fit_power_law(exact(1.0, 1.0, [2.0]))
    with pytest.raises(InsufficientDataError):
        fit_power_law(DataSeries((2.0, 2.0), (1.0, 1.1), (0.1, 0.1)))


def test_fit_subset():
    s = exact(2.0, 1.0, [1, 2, 4, 8, 16])
    assert fit_subset(s, [0, 2, 4]).n_points_used == 3


@pytest.mark.parametrize("k,err,want", [(1.9725, 0.02, Scaling.QUADRATIC),
                                        (1.02, 0.02, Scaling.LINEAR),
                                        (1.5, 0.05, Scaling.MIXED),
                                        (1.5, 0.5, Scaling.INDETERMINATE),
                                        (3.0, 0.01, Scaling.INDETERMINATE)])
def test_classification(k, err, want):
    assert classify_scaling(fake_fit(k, err)) is want


def poisson_series(rng, a, k, xs, T):
    counts = rng.poisson(a * np.asarray(xs) ** k * T)
    return DataSeries.from_counts(xs, counts / T, T)


def test_exponent_interval_coverage():
    # 3 sigma intervals from shot-noise weights must cover the truth in
    # at least 99 % of replications
    rng = np.random.Generator(np.random.PCG64(2024))
    xs = list(np.geomspace(1, 10, 8))
    hits, n = 0, 400
    for _ in range(n):
        fit = fit_power_law(poisson_series(rng, 200.0, 1.5, xs, 5.0))
        hits += abs(fit.exponent - 1.5) <= 3 * fit.exponent_err
    assert hits / n >= 0.99


def test_validation():
    with pytest.raises(ValueError):
        DataSeries((0.0,), (1.0,), (0.1,))
    with pytest.raises(ValueError):
        DataSeries((1.0, 2.0), (1.0,), (0.1,))
