"""Two-photon absorption rates for classical light and for isolated photon pairs.

The detected fluorescence rate of a focused beam of photon flux F is

    F**2 * C * sigma2 / pi * eta_col * eta_det * gamma * integral(dz / w(z)**2)

and pairs multiply it by the quantum enhancement factor
QEF = 2 sigma / (sqrt(pi) F) with sigma the Gaussian standard deviation of
the pair spectrum in rad/s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InsufficientDataError
from .units import SpectralWidth, WidthKind, gm_to_si, millimolar_to_number_density

SQRT_PI = math.sqrt(math.pi)


@dataclass(frozen=True)
class GaussianBeam:
    waist_radius: float  # m
    wavelength: float  # m
    waist_position: float = 0.0  # m

    def __post_init__(self):
        if not (self.waist_radius > 0 and self.wavelength > 0):
            raise DomainError("waist radius and wavelength must be > 0")

    @property
    def rayleigh_range(self):
        return math.pi * self.waist_radius**2 / self.wavelength

    def radius(self, z):
        u = (np.asarray(z, dtype=float) - self.waist_position) / self.rayleigh_range
        return self.waist_radius * np.sqrt(1.0 + u * u)


@dataclass(frozen=True)
class SampleCell:
    length: float  # m
    concentration: float  # molecules / m^3
    sigma2: float  # m^4 s
    fluorescence_yield: float = 1.0

    def __post_init__(self):
        if not self.length > 0:
            raise DomainError("cell length must be > 0")
        if self.concentration < 0 or self.sigma2 < 0:
            raise DomainError("concentration and cross section must be >= 0")
        if not 0 <= self.fluorescence_yield <= 1:
            raise DomainError("fluorescence yield must lie in [0, 1]")

    @classmethod
    def from_lab_units(cls, length_mm, concentration_mM, sigma2_gm, fluorescence_yield):
        return cls(length_mm * 1e-3, millimolar_to_number_density(concentration_mM),
                   gm_to_si(sigma2_gm), fluorescence_yield)


@dataclass(frozen=True)
class CollectionSetup:
    eta_col: float
    eta_det: float

    def __post_init__(self):
        if not (0 <= self.eta_col <= 1 and 0 <= self.eta_det <= 1):
            raise DomainError("efficiencies must lie in [0, 1]")


@dataclass(frozen=True)
class EnhancementBound:
    threshold_rate: float
    predicted_etpa_rate: float
    bound: float
    uncertainty: float


def focal_integral(beam, cell, cell_center_offset=0.0):
    """Integral of 1 / w(z)**2 over the cell [1/m].

    The cell is centred at ``cell_center_offset`` on the beam axis. Uses
    z_R / w0**2 = pi / lambda, so the result never exceeds pi**2 / lambda.
    """
    zr = beam.rayleigh_range
    a = cell_center_offset - 0.5 * cell.length - beam.waist_position
    b = cell_center_offset + 0.5 * cell.length - beam.waist_position
    den = zr * zr + a * b
    if den > 0:
        # atan(b/zr) - atan(a/zr) in one step, no cancellation far from the waist
        angle = math.atan2((b - a) * zr, den)
    else:
        angle = math.atan(b / zr) - math.atan(a / zr)
    return math.pi / beam.wavelength * angle


def classical_tpa_rate(flux, cell, col, focal):
    """Detected fluorescence counts per second for uncorrelated light of flux [1/s]."""
    F = float(getattr(flux, "per_second", flux))
    if F < 0 or focal < 0:
        raise DomainError("flux and focal integral must be >= 0")
    return (F * F * cell.concentration * cell.sigma2 / math.pi
            * col.eta_col * col.eta_det * cell.fluorescence_yield * focal)


def qef(sigma_epp, flux):
    """Quantum enhancement factor 2 sigma / (sqrt(pi) F).

    ``sigma_epp`` is a SpectralWidth (converted to the standard deviation in
    rad/s) or a bare float already in that representation.
    """
    F = float(getattr(flux, "per_second", flux))
    if not F > 0:
        raise DomainError("QEF diverges at zero flux")
    if isinstance(sigma_epp, SpectralWidth):
        sigma = sigma_epp.to(WidthKind.STD_ANGULAR).value
    else:
        sigma = float(sigma_epp)
    if not sigma > 0:
        raise DomainError("bandwidth must be > 0")
    return 2.0 * sigma / (SQRT_PI * F)


def qef_from_correlation_time(tau_c, flux):
    F = float(getattr(flux, "per_second", flux))
    if not (F > 0 and tau_c > 0):
        raise DomainError("flux and correlation time must be > 0")
    return 2.0 / (SQRT_PI * F * tau_c)


def etpa_rate(qef_value, flux, cell, col, focal):
    return qef_value * classical_tpa_rate(flux, cell, col, focal)


def enhancement_bound(threshold, etpa, threshold_err=0.0, rate_err=0.0):
    """Largest extra enhancement compatible with seeing no signal above threshold."""
    if not etpa > 0:
        raise DomainError("predicted ETPA rate must be > 0")
    bound = threshold / etpa
    rel = math.hypot(threshold_err / threshold if threshold else 0.0, rate_err / etpa)
    return EnhancementBound(threshold, etpa, bound, abs(bound) * rel)


def fit_collection_efficiency(data, cell, col, focal):
    """Collection efficiency from classical TPA data via rate = a F**2.

    ``data`` holds (flux, rate) or (flux, rate, rate_err) rows. With errors
    the amplitude is a weighted least-squares estimate with absolute errors;
    without them it is unweighted and the error comes from the residuals.
    ``col.eta_col`` is ignored. Returns (eta_col, eta_col_err).
    """
    rows = [tuple(map(float, r)) for r in data]
    if len(rows) < 2 or len({r[0] for r in rows}) < 2:
        raise InsufficientDataError("need at least two distinct flux values")
    F = np.array([r[0] for r in rows])
    y = np.array([r[1] for r in rows])
    if np.any(y <= 0):
        raise DomainError("rates must be > 0")
    have_err = all(len(r) > 2 for r in rows)
    w = 1.0 / np.array([r[2] for r in rows]) ** 2 if have_err else np.ones(len(rows))
    F2 = F * F
    s = np.sum(w * F2 * F2)
    a = np.sum(w * F2 * y) / s
    if have_err:
        var_a = 1.0 / s
    else:
        dof = len(rows) - 1
        var_a = np.sum(w * (y - a * F2) ** 2) / dof / s
    scale = math.pi / (cell.concentration * cell.sigma2 * col.eta_det
                       * cell.fluorescence_yield * focal)
    return float(a * scale), float(math.sqrt(var_a) * scale)
