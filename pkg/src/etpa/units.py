"""Physical constants and the handful of unit conversions the toolkit needs.

Everything is SI internally. Lab units (nm, GM, mM) are accepted only by the
explicit converters below.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import DomainError


@dataclass(frozen=True)
class PhysicalConstants:
    h: float = 6.62607015e-34  # J s
    c: float = 299792458.0  # m / s
    N_A: float = 6.02214076e23  # 1 / mol


CONSTANTS = PhysicalConstants()

GM_CM4_S = 1e-50  # one Goeppert-Mayer unit in cm^4 s
CM4_TO_M4 = 1e-8

# Gaussian FWHM / standard deviation ratio
FWHM_PER_STD = 2.0 * math.sqrt(2.0 * math.log(2.0))


def _check_nonneg(value, name):
    if not math.isfinite(value) or value < 0:
        raise DomainError(f"{name} must be finite and >= 0, got {value!r}")


@dataclass(frozen=True)
class OpticalPower:
    watts: float

    def __post_init__(self):
        _check_nonneg(self.watts, "optical power")


@dataclass(frozen=True)
class PhotonFlux:
    per_second: float

    def __post_init__(self):
        _check_nonneg(self.per_second, "photon flux")


@dataclass(frozen=True)
class Wavelength:
    meters: float

    def __post_init__(self):
        if not (math.isfinite(self.meters) and self.meters > 0):
            raise DomainError(f"wavelength must be > 0, got {self.meters!r}")

    @classmethod
    def from_nm(cls, nm):
        return cls(nm * 1e-9)


def _as_float(x, attr):
    return float(getattr(x, attr, x))


def photon_energy(wavelength):
    """Energy of one photon [J]."""
    lam = _as_float(wavelength, "meters")
    if not lam > 0:
        raise DomainError(f"wavelength must be > 0, got {lam!r}")
    return CONSTANTS.h * CONSTANTS.c / lam


def power_to_flux(power, wavelength):
    """Photon flux [1/s] carried by an optical power [W] at ``wavelength`` [m].

    Both arguments may be plain floats (SI) or the wrapper types.
    """
    P = _as_float(power, "watts")
    _check_nonneg(P, "optical power")
    return P / photon_energy(wavelength)


def flux_to_power(flux, wavelength):
    F = _as_float(flux, "per_second")
    _check_nonneg(F, "photon flux")
    return F * photon_energy(wavelength)


class WidthKind(enum.Enum):
    FWHM_WAVELENGTH = "fwhm_wavelength"  # m
    FWHM_FREQUENCY = "fwhm_frequency"  # Hz
    FWHM_ANGULAR = "fwhm_angular"  # rad/s
    STD_ANGULAR = "std_angular"  # rad/s


@dataclass(frozen=True)
class SpectralWidth:
    """A Gaussian spectral width in one of several representations.

    ``center_wavelength`` [m] is only needed to move between the wavelength
    and frequency domains.
    """

    value: float
    kind: WidthKind
    center_wavelength: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.value) and self.value > 0):
            raise DomainError(f"spectral width must be > 0, got {self.value!r}")
        if self.center_wavelength is not None and not self.center_wavelength > 0:
            raise DomainError("center wavelength must be > 0")

    def to(self, kind):
        return convert_bandwidth(self, kind)

    @property
    def std_angular(self):
        return convert_bandwidth(self, WidthKind.STD_ANGULAR).value

    @property
    def fwhm_frequency(self):
        return convert_bandwidth(self, WidthKind.FWHM_FREQUENCY).value

    @classmethod
    def from_fwhm_nm(cls, fwhm_nm, center_nm):
        return cls(fwhm_nm * 1e-9, WidthKind.FWHM_WAVELENGTH, center_nm * 1e-9)


def _to_fwhm_frequency(w):
    if w.kind is WidthKind.FWHM_FREQUENCY:
        return w.value
    if w.kind is WidthKind.FWHM_ANGULAR:
        return w.value / (2.0 * math.pi)
    if w.kind is WidthKind.STD_ANGULAR:
        return w.value * FWHM_PER_STD / (2.0 * math.pi)
    if w.center_wavelength is None:
        raise DomainError("center wavelength required to convert a wavelength width")
    return CONSTANTS.c * w.value / w.center_wavelength**2


def _from_fwhm_frequency(nu, kind, center):
    if kind is WidthKind.FWHM_FREQUENCY:
        return nu
    if kind is WidthKind.FWHM_ANGULAR:
        return 2.0 * math.pi * nu
    if kind is WidthKind.STD_ANGULAR:
        return 2.0 * math.pi * nu / FWHM_PER_STD
    if center is None:
        raise DomainError("center wavelength required to convert to a wavelength width")
    return nu * center**2 / CONSTANTS.c


def convert_bandwidth(width, target):
    """Re-express ``width`` in representation ``target``.

    The wavelength/frequency step is the linearised map dnu = c dlambda / lambda0^2.
    """
    target = WidthKind(target)
    if width.kind is target:
        return width
    nu = _to_fwhm_frequency(width)
    value = _from_fwhm_frequency(nu, target, width.center_wavelength)
    return SpectralWidth(value, target, width.center_wavelength)


def gm_to_si(sigma2_gm):
    """Two-photon cross section from GM to SI [m^4 s].

    1 GM = 1e-50 cm^4 s = 1e-58 m^4 s.
    """
    if not (math.isfinite(sigma2_gm) and sigma2_gm >= 0):
        raise DomainError(f"cross section must be >= 0 GM, got {sigma2_gm!r}")
    return sigma2_gm * GM_CM4_S * CM4_TO_M4


def millimolar_to_number_density(c_mM):
    """Molecules per m^3 for a concentration in mmol/L (1 mM = 1 mol/m^3)."""
    if not (math.isfinite(c_mM) and c_mM >= 0):
        raise DomainError(f"concentration must be >= 0, got {c_mM!r}")
    return c_mM * CONSTANTS.N_A
