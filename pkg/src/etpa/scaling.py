"""Dark-count subtraction and shot-noise-weighted power-law fits on log-log axes.

A pure two-photon process scales with slope 2, a beam of pairs attenuated at
the pump scales with slope 1. ``classify_scaling`` tells the two apart at 3 sigma.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InsufficientDataError


@dataclass(frozen=True)
class DataSeries:
    x: tuple
    y: tuple
    y_err: tuple
    x_err: tuple = ()
    duration: float = 1.0
    dark_rate: float = 0.0
    excluded: tuple = ()  # indices of points dropped by dark_subtract

    def __post_init__(self):
        n = len(self.x)
        if len(self.y) != n or len(self.y_err) != n:
            raise ValueError("x, y and y_err must have equal lengths")
        if self.x_err and len(self.x_err) != n:
            raise ValueError("x_err must match x in length")
        if any(not xi > 0 for xi in self.x):
            raise ValueError("x values must be strictly positive")
        if any(e < 0 for e in self.y_err):
            raise ValueError("y_err must be >= 0")
        if not self.duration > 0:
            raise ValueError("duration must be > 0")

    @classmethod
    def from_counts(cls, x, rates, duration, dark_rate=0.0, x_err=()):
        """Series with shot-noise errors sqrt(y T) / T."""
        y = tuple(float(v) for v in rates)
        err = tuple(math.sqrt(max(v, 0.0) * duration) / duration for v in y)
        return cls(tuple(float(v) for v in x), y, err, tuple(x_err), duration, dark_rate)


@dataclass(frozen=True)
class PowerLawFit:
    """y = amplitude * x**exponent.

    ``covariance`` is over (ln amplitude, exponent).
    """

    amplitude: float
    exponent: float
    exponent_err: float
    covariance: np.ndarray = field(repr=False)
    n_points_used: int
    fixed: bool = False

    @property
    def amplitude_err(self):
        return self.amplitude * math.sqrt(self.covariance[0, 0])

    def __call__(self, x):
        return self.amplitude * np.asarray(x, dtype=float) ** self.exponent


class Scaling(enum.Enum):
    LINEAR = "linear"
    QUADRATIC = "quadratic"
    MIXED = "mixed"
    INDETERMINATE = "indeterminate"


def dark_subtract(series):
    """Subtract the dark rate, dropping points that end up at or below zero.

    The error of each kept point combines the signal and dark Poisson terms,
    both taken over the same ``duration``.
    """
    T, d = series.duration, series.dark_rate
    x, y, ye, xe, dropped = [], [], [], [], []
    for i, (xi, yi) in enumerate(zip(series.x, series.y)):
        net = yi - d
        if net <= 0:
            dropped.append(i)
            continue
        x.append(xi)
        y.append(net)
        ye.append(math.sqrt((yi + d) * T) / T)
        if series.x_err:
            xe.append(series.x_err[i])
    return DataSeries(tuple(x), tuple(y), tuple(ye), tuple(xe), T, 0.0,
                      series.excluded + tuple(dropped))


def series_from_counts(x, counts, durations, dark_counts=None, x_err=()):
    """Net-rate series from count totals with per-point durations.

    Same rule as ``dark_subtract``, applied row by row: net rate
    (N - N_dark) / T with error sqrt(N + N_dark) / T, points at or below zero
    excluded and listed in ``excluded``.
    """
    dark_counts = [0.0] * len(x) if dark_counts is None else list(dark_counts)
    xs, y, ye, xe, dropped = [], [], [], [], []
    for i, (xi, n, T, nd) in enumerate(zip(x, counts, durations, dark_counts)):
        net = (n - nd) / T
        if net <= 0:
            dropped.append(i)
            continue
        xs.append(float(xi))
        y.append(net)
        ye.append(math.sqrt(n + nd) / T)
        if x_err:
            xe.append(x_err[i])
    T_mean = float(np.mean(durations)) if len(durations) else 1.0
    return DataSeries(tuple(xs), tuple(y), tuple(ye), tuple(xe), T_mean, 0.0, tuple(dropped))


def _usable(series):
    x = np.asarray(series.x, dtype=float)
    y = np.asarray(series.y, dtype=float)
    e = np.asarray(series.y_err, dtype=float)
    keep = y > 0
    return x[keep], y[keep], e[keep]


def fit_power_law(series, fixed_exponent=None):
    """Weighted linear least squares of ln y on ln x.

    Weights are (y / y_err)**2, the first-order variance of ln y under shot
    noise. When every y_err is zero (noiseless data) the fit is unweighted and
    the covariance is scaled by the residual variance instead.
    """
    x, y, e = _usable(series)
    n = len(x)
    need = 2 if fixed_exponent is None else 1
    if n < need or (fixed_exponent is None and len(np.unique(x)) < 2):
        raise InsufficientDataError(f"need at least {need} usable points with distinct x, got {n}")
    lx, ly = np.log(x), np.log(y)

    if np.all(e == 0):
        w = np.ones(n)
        absolute = False
    elif np.any(e == 0):
        raise ValueError("y_err must be all zero or all positive")
    else:
        w = (y / e) ** 2
        absolute = True

    if fixed_exponent is not None:
        k = float(fixed_exponent)
        r = ly - k * lx
        c = np.sum(w * r) / np.sum(w)
        var_c = 1.0 / np.sum(w)
        if not absolute:
            dof = n - 1
            var_c *= np.sum(w * (r - c) ** 2) / dof if dof > 0 else 0.0
        cov = np.array([[var_c, 0.0], [0.0, 0.0]])
        return PowerLawFit(math.exp(c), k, 0.0, cov, n, fixed=True)

    A = np.column_stack([np.ones(n), lx])
    AtW = A.T * w
    cov = np.linalg.inv(AtW @ A)
    beta = cov @ (AtW @ ly)
    if not absolute:
        dof = n - 2
        resid = ly - A @ beta
        cov = cov * (np.sum(w * resid**2) / dof if dof > 0 else 0.0)
    cov = 0.5 * (cov + cov.T)
    return PowerLawFit(math.exp(beta[0]), float(beta[1]), math.sqrt(max(cov[1, 1], 0.0)), cov, n)


def fit_subset(series, indices, fixed_exponent=None):
    """Fit only the points at ``indices``."""
    idx = list(indices)
    pick = lambda seq: tuple(seq[i] for i in idx) if seq else ()
    sub = replace(series, x=pick(series.x), y=pick(series.y), y_err=pick(series.y_err),
                  x_err=pick(series.x_err), excluded=())
    return fit_power_law(sub, fixed_exponent)


def classify_scaling(fit, nsigma=3.0):
    tol = nsigma * fit.exponent_err
    near1 = abs(fit.exponent - 1.0) <= tol
    near2 = abs(fit.exponent - 2.0) <= tol
    if near1 and not near2:
        return Scaling.LINEAR
    if near2 and not near1:
        return Scaling.QUADRATIC
    if not near1 and not near2 and 1.0 < fit.exponent < 2.0:
        return Scaling.MIXED
    return Scaling.INDETERMINATE
