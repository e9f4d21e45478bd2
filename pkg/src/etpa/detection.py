"""Analytic loss and counting chain for a split pair beam.

Rates here are per second. A pair beam of flux R passing a transmission eta
keeps 2 R eta single photons but only R eta**2 intact pairs, which is why the
pair rate has to be measured in coincidence rather than inferred from power.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

from .errors import DomainError, InsufficientDataError
from .scaling import DataSeries, fit_power_law

LINEAR_WINDOW = (0.9, 1.1)


def _check_fraction(value, name, allow_zero=True):
    lo_ok = value >= 0 if allow_zero else value > 0
    if not (math.isfinite(value) and lo_ok and value <= 1):
        raise DomainError(f"{name} must lie in {'[' if allow_zero else '('}0, 1], got {value!r}")


@dataclass(frozen=True)
class LossElement:
    transmission: float

    def __post_init__(self):
        _check_fraction(self.transmission, "transmission")


@dataclass(frozen=True)
class DetectorModel:
    efficiency: float = 1.0
    dead_time: float = 0.0  # s
    dark_rate: float = 0.0  # counts / s

    def __post_init__(self):
        _check_fraction(self.efficiency, "detector efficiency")
        if not (self.dead_time >= 0 and self.dark_rate >= 0):
            raise DomainError("dead time and dark rate must be >= 0")


@dataclass(frozen=True)
class CountRecord:
    """One coincidence measurement, all rates in counts per second."""

    singles_a: float
    singles_b: float
    coincidences: float
    duration: float = 1.0  # s
    applied_attenuation: float = 1.0
    pump_power: float | None = None  # W
    unphysical: bool = False
    dark_clamped: bool = False
    accidentals: float = 0.0  # expected accidental coincidences per second, raw

    def __post_init__(self):
        if min(self.singles_a, self.singles_b, self.coincidences, self.accidentals) < 0:
            raise DomainError("rates must be >= 0")
        if not self.duration > 0:
            raise DomainError("duration must be > 0")
        _check_fraction(self.applied_attenuation, "applied attenuation", allow_zero=False)


@dataclass(frozen=True)
class PairRateBound:
    pairs_per_second: float
    uncertainty: float
    klyshko: tuple = (math.nan, math.nan)
    linear_indices: tuple = ()
    estimates: tuple = field(default=(), repr=False)  # per input record, pairs/s
    corrected: tuple = field(default=(), repr=False)  # CountRecords after correction


def propagate_loss(pair_flux, eta):
    """(single-photon rate, intact-pair rate) after a transmission ``eta``."""
    t = float(getattr(eta, "transmission", eta))
    _check_fraction(t, "transmission")
    return 2.0 * pair_flux * t, pair_flux * t * t


def per_photon_detection(pre_split, arm_a, arm_b, splitter_ratio=0.5):
    """Probability that one photon clicks detector A, and detector B."""
    return pre_split * splitter_ratio * arm_a, pre_split * (1.0 - splitter_ratio) * arm_b


def expected_rates(pair_rate, pre_split=1.0, arm_a=1.0, arm_b=1.0, splitter_ratio=0.5,
                   dark_a=0.0, dark_b=0.0, window=0.0):
    """Expected (singles_a, singles_b, true coincidences, accidentals) per second.

    Dead time is ignored; both photons of a pair routed to the same detector
    count as two clicks.
    """
    pa, pb = per_photon_detection(pre_split, arm_a, arm_b, splitter_ratio)
    sa = 2.0 * pair_rate * pa + dark_a
    sb = 2.0 * pair_rate * pb + dark_b
    true = 2.0 * pair_rate * pa * pb
    return sa, sb, true, sa * sb * window


def klyshko_efficiency(record):
    """Per-arm efficiencies (eta_a, eta_b) = (C / S_b, C / S_a)."""
    if not (record.singles_a > 0 and record.singles_b > 0):
        raise DomainError("Klyshko efficiency needs non-zero singles on both arms")
    return record.coincidences / record.singles_b, record.coincidences / record.singles_a


def subtract_dark(record, dark_a, dark_b=None):
    """Remove detector dark rates from the singles, clamping at zero."""
    dark_b = dark_a if dark_b is None else dark_b
    sa, sb = record.singles_a - dark_a, record.singles_b - dark_b
    clamped = sa < 0 or sb < 0
    if clamped:
        warnings.warn("dark subtraction drove a singles rate negative; clamped to zero",
                      stacklevel=2)
    return replace(record, singles_a=max(sa, 0.0), singles_b=max(sb, 0.0),
                   dark_clamped=record.dark_clamped or clamped)


def correct_for_attenuation(record):
    """Undo the applied attenuation: singles / eta, coincidences / eta**2.

    The returned record is flagged ``unphysical`` if the corrected
    coincidences exceed either corrected singles rate, the signature of
    accidental-dominated counting at heavy attenuation.
    """
    eta = record.applied_attenuation
    if not eta > 0:
        raise DomainError("applied attenuation must be > 0")
    sa, sb = record.singles_a / eta, record.singles_b / eta
    cc = record.coincidences / eta**2
    return replace(record, singles_a=sa, singles_b=sb, coincidences=cc,
                   applied_attenuation=1.0, unphysical=cc > sa or cc > sb)


def _coinc_series(records, durations):
    x = tuple(r.pump_power for r in records)
    y = tuple(r.coincidences for r in records)
    # shot noise on the raw count, scaled by the same correction as the rate
    err = tuple(math.sqrt(r.coincidences * T * a**2) / (T * a**2) if r.coincidences > 0 else 0.0
                for r, (T, a) in zip(records, durations))
    return DataSeries(x, y, err)


def linear_regime(corrected, raw, window=LINEAR_WINDOW, min_points=3):
    """Indices (into power order) of the longest low-power run with linear scaling.

    The run starts with the ``min_points`` lowest-power records, whose
    log-log exponent of corrected coincidences must lie inside ``window``.
    It grows one record at a time while the next record agrees with the
    extrapolated fit at 3 sigma and the refitted exponent stays in the
    window. It never passes a record flagged unphysical or one whose
    expected accidental count exceeds the shot noise of its coincidences,
    since attenuation correction amplifies accidentals by 1 / eta**2.
    """
    order = sorted(range(len(corrected)), key=lambda i: corrected[i].pump_power)
    usable = []
    for i in order:
        r = raw[i]
        n_c, n_acc = r.coincidences * r.duration, r.accidentals * r.duration
        if corrected[i].unphysical or corrected[i].coincidences <= 0 or n_acc > math.sqrt(n_c):
            break
        usable.append(i)
    if len(usable) < min_points:
        raise InsufficientDataError(
            f"need {min_points} linear-regime records, found {len(usable)} usable")

    def series(idx):
        recs = [corrected[i] for i in idx]
        meta = [(raw[i].duration, raw[i].applied_attenuation) for i in idx]
        return _coinc_series(recs, meta)

    lo, hi = window
    fit = fit_power_law(series(usable[:min_points]))
    if not lo <= fit.exponent <= hi:
        raise InsufficientDataError(
            f"lowest {min_points} records do not scale linearly "
            f"(exponent {fit.exponent:.3f} outside {window})")
    n = min_points
    while n < len(usable):
        cand = series([usable[n]])
        lx = math.log(cand.x[0])
        g = (1.0, lx)
        var_pred = sum(g[r] * fit.covariance[r, c] * g[c] for r in range(2) for c in range(2))
        sigma = math.sqrt(var_pred + (cand.y_err[0] / cand.y[0]) ** 2)
        resid = math.log(cand.y[0]) - math.log(fit.amplitude) - fit.exponent * lx
        if abs(resid) > 3.0 * sigma:
            break
        nxt = fit_power_law(series(usable[:n + 1]))
        if not lo <= nxt.exponent <= hi:
            break
        fit = nxt
        n += 1
    return tuple(usable[:n])


def bound_pair_rate(records, detector, detector_b=None, assume_linear=False):
    """Lower bound on the pair rate reaching the fiber.

    Singles are dark-subtracted, then every record is corrected for its
    attenuation. The Klyshko efficiencies come from the linear low-power
    records only; every other record has its coincidences re-estimated as
    singles times Klyshko efficiency. Estimates are divided by the detector
    efficiency and the maximum is returned with its shot-noise error.

    ``assume_linear`` skips the scaling test and treats every record as
    linear-regime, for data sets too short to fit.
    """
    records = list(records)
    if not assume_linear and any(r.pump_power is None for r in records):
        raise ValueError("every record needs a pump_power")
    det_b = detector if detector_b is None else detector_b
    eta_det = math.sqrt(detector.efficiency * det_b.efficiency)
    if not eta_det > 0:
        raise DomainError("detector efficiency must be > 0")

    corrected = [correct_for_attenuation(subtract_dark(r, detector.dark_rate, det_b.dark_rate))
                 for r in records]
    if assume_linear:
        lin = tuple(i for i, c in enumerate(corrected) if c.coincidences > 0)
        if not lin:
            raise InsufficientDataError("no records with coincidences")
    else:
        lin = linear_regime(corrected, records)

    # counts-weighted Klyshko efficiencies over the linear records
    c_sum = sum(corrected[i].coincidences * records[i].duration for i in lin)
    sa_sum = sum(corrected[i].singles_a * records[i].duration for i in lin)
    sb_sum = sum(corrected[i].singles_b * records[i].duration for i in lin)
    if not (sa_sum > 0 and sb_sum > 0):
        raise DomainError("zero singles in the linear regime")
    eta_a, eta_b = c_sum / sb_sum, c_sum / sa_sum
    raw_c = sum(records[i].coincidences * records[i].duration for i in lin)
    raw_s = sum((records[i].singles_a + records[i].singles_b) * records[i].duration for i in lin)
    rel_k2 = 1.0 / raw_c + 2.0 / raw_s

    estimates, errors = [], []
    for i, (r, c) in enumerate(zip(records, corrected)):
        if i in lin:
            est = c.coincidences / eta_det
            rel2 = 1.0 / (r.coincidences * r.duration)
        else:
            est = 0.5 * (eta_a * c.singles_b + eta_b * c.singles_a) / eta_det
            n_s = (r.singles_a + r.singles_b) * r.duration
            rel2 = rel_k2 + (1.0 / n_s if n_s > 0 else 0.0)
        estimates.append(est)
        errors.append(est * math.sqrt(rel2))

    k = max(range(len(estimates)), key=estimates.__getitem__)
    return PairRateBound(estimates[k], errors[k], (eta_a, eta_b), lin,
                         tuple(estimates), tuple(corrected))


def dead_time_response(true_rate, dead_time):
    """Measured rate of a non-paralyzable detector: R / (1 + R tau)."""
    if true_rate < 0 or dead_time < 0:
        raise DomainError("rate and dead time must be >= 0")
    if math.isinf(true_rate):
        return 1.0 / dead_time if dead_time > 0 else math.inf
    return true_rate / (1.0 + true_rate * dead_time)


def threshold_3sigma(dark_rate, duration):
    """Smallest net rate distinguishable from dark counts at 3 sigma."""
    if dark_rate < 0:
        raise DomainError("dark rate must be >= 0")
    if not duration > 0:
        raise DomainError("duration must be > 0")
    return 3.0 * math.sqrt(dark_rate * duration) / duration
