"""CW-pumped type-0 SPDC source: pair rate, bandwidth, mode count, isolation."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError
from .units import SpectralWidth, WidthKind


@dataclass(frozen=True)
class SpdcSource:
    pair_rate_per_watt: float  # pairs / s / W
    bandwidth: SpectralWidth
    pump_linewidth_fwhm: float  # Hz
    saturation_power: float | None = None  # W
    center_wavelength: float = 1064e-9  # m

    def __post_init__(self):
        if not (math.isfinite(self.pair_rate_per_watt) and self.pair_rate_per_watt >= 0):
            raise DomainError("pair_rate_per_watt must be >= 0")
        if not self.pump_linewidth_fwhm > 0:
            raise DomainError("pump linewidth must be > 0")
        if self.saturation_power is not None and not self.saturation_power > 0:
            raise DomainError("saturation_power must be > 0 when given")


@dataclass(frozen=True)
class EppState:
    """The photon-pair beam. Photon flux is always twice the pair flux."""

    pair_flux: float  # pairs / s
    sigma_epp: SpectralWidth

    def __post_init__(self):
        if not (math.isfinite(self.pair_flux) and self.pair_flux >= 0):
            raise DomainError("pair flux must be >= 0")

    @property
    def photon_flux(self):
        return 2.0 * self.pair_flux

    @property
    def correlation_time(self):
        return correlation_time(self)


def pair_rate(source, pump_power):
    """Pair flux produced at ``pump_power`` [W].

    Linear below saturation; with ``saturation_power`` set the rate approaches
    ``pair_rate_per_watt * saturation_power`` exponentially.
    """
    P = float(getattr(pump_power, "watts", pump_power))
    if not (math.isfinite(P) and P >= 0):
        raise DomainError(f"pump power must be >= 0, got {P!r}")
    if source.saturation_power is None:
        flux = source.pair_rate_per_watt * P
    else:
        Ps = source.saturation_power
        flux = source.pair_rate_per_watt * Ps * -math.expm1(-P / Ps)
    return EppState(flux, source.bandwidth)


def correlation_time(state):
    """1 / sigma with sigma the Gaussian standard deviation in rad/s."""
    sigma = state.sigma_epp if isinstance(state, EppState) else state
    return 1.0 / sigma.to(WidthKind.STD_ANGULAR).value


def mode_number(epp_bandwidth_fwhm, pump_linewidth_fwhm):
    """Schmidt-mode estimate sqrt(2) * (EPP FWHM) / (pump FWHM), both in Hz."""
    if not (epp_bandwidth_fwhm > 0 and pump_linewidth_fwhm > 0):
        raise DomainError("bandwidths must be > 0")
    return math.sqrt(2.0) * epp_bandwidth_fwhm / pump_linewidth_fwhm


def mean_pair_separation(state):
    flux = state.pair_flux if isinstance(state, EppState) else float(state)
    if not flux > 0:
        raise DomainError("pair flux must be > 0 for a finite separation")
    return 1.0 / flux


def is_isolated_pairs(state, ratio_threshold=100.0):
    """True when pairs are on average ``ratio_threshold`` correlation times apart."""
    if state.pair_flux == 0:
        return True
    return mean_pair_separation(state) / correlation_time(state) >= ratio_threshold
