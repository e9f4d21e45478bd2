"""Discrete-event Monte Carlo of a split, lossy pair beam and two click detectors.

Pairs arrive as a homogeneous Poisson process and both photons of a pair share
one arrival time. Each photon independently survives the pre-split loss, is
routed to arm A with probability ``splitter_ratio`` and survives that arm.
Because every pair is classified independently, each outcome class (AA, AB,
BB, A only, B only) is itself a Poisson process, so only pairs that produce at
least one click are ever generated. Time is processed in blocks, with the
dead-time state and unmatched detections near a block edge carried forward,
so memory stays bounded for arbitrarily long runs.

RNG: numpy ``PCG64`` seeded with ``McConfig.seed``. Identical configs give
bit-identical results; sweep points get child seeds from ``SeedSequence``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numba
import numpy as np

from .detection import per_photon_detection
from .errors import DomainError

EVENTS_PER_BLOCK = 1 << 20


@dataclass(frozen=True)
class McConfig:
    pair_rate: float  # pairs / s
    duration: float  # s
    seed: int = 0
    pre_split_transmission: float = 1.0
    arm_transmission_a: float = 1.0
    arm_transmission_b: float = 1.0
    splitter_ratio: float = 0.5  # probability a photon exits towards A
    coincidence_window: float = 1e-9  # s, full width
    dead_time: float = 0.0  # s
    dark_rate_a: float = 0.0
    dark_rate_b: float = 0.0

    def __post_init__(self):
        for name in ("pre_split_transmission", "arm_transmission_a",
                     "arm_transmission_b", "splitter_ratio"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {v!r}")
        if not self.duration > 0:
            raise DomainError("duration must be > 0")
        if not self.coincidence_window > 0:
            raise DomainError("coincidence window must be > 0")
        if min(self.pair_rate, self.dead_time, self.dark_rate_a, self.dark_rate_b) < 0:
            raise DomainError("rates and dead time must be >= 0")
        if not math.isfinite(self.pair_rate * self.duration):
            raise DomainError("pair_rate * duration must be finite")
        if not 0 <= int(self.seed) < 2**64:
            raise DomainError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class McResult:
    singles_a: int
    singles_b: int
    coincidences: int
    accidental_estimate: float  # expected accidental counts over the run
    elapsed_simulated_time: float

    @property
    def singles_rate_a(self):
        return self.singles_a / self.elapsed_simulated_time

    @property
    def singles_rate_b(self):
        return self.singles_b / self.elapsed_simulated_time

    @property
    def coincidence_rate(self):
        return self.coincidences / self.elapsed_simulated_time


@numba.njit(cache=True, nogil=True)
def _dead_time_filter(t, tau, last):
    keep = np.empty(t.shape[0], dtype=np.bool_)
    for k in range(t.shape[0]):
        if t[k] - last >= tau:
            keep[k] = True
            last = t[k]
        else:
            keep[k] = False
    return keep, last


@numba.njit(cache=True, nogil=True)
def _match(a, b, half, cutoff):
    # greedy earliest-first pairing; each click joins at most one coincidence
    i = 0
    j = 0
    n = 0
    na = a.shape[0]
    nb = b.shape[0]
    while i < na and j < nb:
        ta = a[i]
        tb = b[j]
        if ta >= cutoff and tb >= cutoff:
            break
        d = ta - tb
        if abs(d) <= half:
            n += 1
            i += 1
            j += 1
        elif d < 0:
            i += 1
        else:
            j += 1
    while i < na and a[i] < cutoff:
        i += 1
    while j < nb and b[j] < cutoff:
        j += 1
    return n, i, j


def class_rates(cfg):
    """Rates [1/s] of the pair outcome classes AA, AB, BB, A-only, B-only."""
    pa, pb = per_photon_detection(cfg.pre_split_transmission, cfg.arm_transmission_a,
                                  cfg.arm_transmission_b, cfg.splitter_ratio)
    q = 1.0 - pa - pb
    R = cfg.pair_rate
    return {"AA": R * pa * pa, "AB": 2 * R * pa * pb, "BB": R * pb * pb,
            "A": 2 * R * pa * q, "B": 2 * R * pb * q}


def _draw(rng, rate, t0, dt):
    n = rng.poisson(rate * dt) if rate > 0 else 0
    return t0 + dt * rng.random(n)


def simulate_stream(cfg):
    rng = np.random.Generator(np.random.PCG64(int(cfg.seed)))
    rates = class_rates(cfg)
    per_second = (2 * rates["AA"] + rates["AB"] + rates["A"] + cfg.dark_rate_a
                  + 2 * rates["BB"] + rates["AB"] + rates["B"] + cfg.dark_rate_b)
    n_blocks = max(1, math.ceil(per_second * cfg.duration / EVENTS_PER_BLOCK))
    n_blocks = min(n_blocks, max(1, int(cfg.duration / (100 * cfg.coincidence_window))))
    dt = cfg.duration / n_blocks
    half = 0.5 * cfg.coincidence_window
    tau = cfg.dead_time

    last_a = last_b = -np.inf
    carry_a = carry_b = np.empty(0)
    n_a = n_b = n_c = 0
    for k in range(n_blocks):
        t0 = k * dt
        aa = _draw(rng, rates["AA"], t0, dt)
        ab = _draw(rng, rates["AB"], t0, dt)
        bb = _draw(rng, rates["BB"], t0, dt)
        a1 = _draw(rng, rates["A"], t0, dt)
        b1 = _draw(rng, rates["B"], t0, dt)
        da = _draw(rng, cfg.dark_rate_a, t0, dt)
        db = _draw(rng, cfg.dark_rate_b, t0, dt)
        ta = np.sort(np.concatenate([aa, aa, ab, a1, da]))
        tb = np.sort(np.concatenate([bb, bb, ab, b1, db]))
        if tau > 0:
            keep, last_a = _dead_time_filter(ta, tau, last_a)
            ta = ta[keep]
            keep, last_b = _dead_time_filter(tb, tau, last_b)
            tb = tb[keep]
        n_a += ta.size
        n_b += tb.size

        ta = np.concatenate([carry_a, ta])
        tb = np.concatenate([carry_b, tb])
        cutoff = np.inf if k == n_blocks - 1 else t0 + dt - half
        n, i, j = _match(ta, tb, half, cutoff)
        n_c += n
        carry_a, carry_b = ta[i:], tb[j:]

    T = cfg.duration
    acc = accidental_rate(n_a / T, n_b / T, cfg.coincidence_window) * T
    return McResult(int(n_a), int(n_b), int(n_c), acc, T)


def accidental_rate(singles_a, singles_b, window):
    """Accidental coincidences per second for uncorrelated streams, S_a S_b tau_w."""
    if min(singles_a, singles_b, window) < 0:
        raise DomainError("rates and window must be >= 0")
    return singles_a * singles_b * window


def child_seeds(seed, n):
    """``n`` independent 64-bit seeds derived from ``seed``."""
    children = np.random.SeedSequence(int(seed)).spawn(n)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]


def sweep_configs(cfg, knob, values):
    """One config per sweep value.

    ``pump`` multiplies the pair rate, ``attenuation`` multiplies the
    pre-split transmission (values must then lie in [0, 1]).
    """
    seeds = child_seeds(cfg.seed, len(values))
    out = []
    for v, s in zip(values, seeds):
        if knob == "pump":
            if v < 0:
                raise DomainError("pump scale must be >= 0")
            out.append(replace(cfg, pair_rate=cfg.pair_rate * v, seed=s))
        elif knob == "attenuation":
            out.append(replace(cfg, pre_split_transmission=cfg.pre_split_transmission * v, seed=s))
        else:
            raise ValueError(f"unknown sweep knob {knob!r}")
    return out


def run_configs(configs, workers=1):
    """Simulate every config; results keep input order whatever ``workers`` is."""
    if workers <= 1:
        return [simulate_stream(c) for c in configs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(simulate_stream, configs))


def scaling_sweep(cfg, knob, values, workers=1):
    """(value, coincidence rate) for each sweep value."""
    results = run_configs(sweep_configs(cfg, knob, values), workers)
    return [(v, r.coincidence_rate) for v, r in zip(values, results)]
