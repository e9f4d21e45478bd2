"""Rate models, a photon-pair Monte Carlo and fitting tools for entangled
two-photon absorption (ETPA) experiments with CW-pumped SPDC sources."""

__version__ = "0.1.0"
