"""Mixed Poisson-Gaussian corruption and deterministic test phantoms.

The observation model is

    f = Poisson(eta * u) / eta + N(0, sigma^2)

applied independently per pixel, with no clamping of the result: negative
values from the Gaussian tail are part of the model.  ``eta`` scales the
photon count (larger = cleaner Poisson data) and ``sigma`` is the standard
deviation of the additive read-out noise.

Randomness is counter-based rather than stream-based: every random draw is a
pure function of ``(seed, pixel index, draw index)`` through the SplitMix64
finalizer.  The same seed therefore yields bit-identical corruption on every
platform and regardless of evaluation order, and changing one pixel's clean
value never perturbs another pixel's draws.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, ndtri

from .grid import DomainError, as_image

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_INC = np.uint64(0xD1342543DE82EF95)


@dataclass
class NoiseSpec:
    """Parameters of one synthetic corruption."""

    eta: float
    sigma: float
    seed: int = 0

    def __post_init__(self):
        if not self.eta > 0.0:
            raise ValueError("eta must be positive")
        if self.sigma < 0.0:
            raise ValueError("sigma must be nonnegative")


def _mix64(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer; uniformly scrambles uint64 counters."""
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def _uniforms(keys: np.ndarray, draw: np.ndarray) -> np.ndarray:
    """Uniform(0, 1) variates, strictly inside the open interval."""
    bits = _mix64(keys + (draw + np.uint64(1)) * _INC)
    return ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def _pixel_keys(seed: int, n: int) -> np.ndarray:
    idx = np.arange(1, n + 1, dtype=np.uint64)
    return _mix64(np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + idx * _GOLDEN)


def _poisson_inversion(mean, keys, draw0):
    """Sequential-search inversion; one uniform per pixel, means < 10 only."""
    u = _uniforms(keys, draw0)
    k = np.zeros(mean.shape, dtype=np.float64)
    p = np.exp(-mean)
    cdf = p.copy()
    active = u > cdf
    # mean < 10 puts the needed k far below this cap except with probability
    # on the order of the uniform's resolution (2^-53)
    for _ in range(400):
        if not active.any():
            break
        k[active] += 1.0
        p[active] *= mean[active] / k[active]
        cdf[active] += p[active]
        active = active & (u > cdf)
    return k


def _poisson_ptrs(mean, keys, draw0):
    """Transformed-rejection sampler for means >= 10 (two uniforms/attempt)."""
    m = mean
    log_m = np.log(m)
    b = 0.931 + 2.53 * np.sqrt(m)
    a = -0.059 + 0.02483 * b
    inv_alpha = 1.1239 + 1.1328 / (b - 3.4)
    v_r = 0.9277 - 3.6224 / (b - 2.0)

    k = np.zeros(m.shape, dtype=np.float64)
    draw = np.array(draw0, dtype=np.uint64, copy=True)
    pending = np.ones(m.shape, dtype=bool)
    while pending.any():
        u = _uniforms(keys[pending], draw[pending]) - 0.5
        v = _uniforms(keys[pending], draw[pending] + np.uint64(1))
        draw[pending] += np.uint64(2)

        us = 0.5 - np.abs(u)
        cand = np.floor((2.0 * a[pending] / us + b[pending]) * u + m[pending] + 0.43)
        accept = (us >= 0.07) & (v <= v_r[pending])
        plausible = (cand >= 0.0) & ((us >= 0.013) | (v <= us))
        with np.errstate(divide="ignore", invalid="ignore"):
            log_accept = np.log(
                v * inv_alpha[pending] / (a[pending] / (us * us) + b[pending])
            ) <= (cand * log_m[pending] - m[pending] - gammaln(cand + 1.0))
        accept = accept | (plausible & log_accept)

        idx = np.flatnonzero(pending)
        k[idx[accept]] = cand[accept]
        pending[idx[accept]] = False
    return k


def _poisson(mean: np.ndarray, keys: np.ndarray, draw0: np.ndarray) -> np.ndarray:
    counts = np.zeros_like(mean)
    small = (mean > 0.0) & (mean < 10.0)
    large = mean >= 10.0
    if small.any():
        counts[small] = _poisson_inversion(mean[small], keys[small], draw0[small])
    if large.any():
        counts[large] = _poisson_ptrs(mean[large], keys[large], draw0[large])
    return counts


def corrupt(u, spec: NoiseSpec) -> np.ndarray:
    """Draw one mixed Poisson-Gaussian observation of the clean image ``u``.

    Raises ``DomainError`` when ``u`` has negative entries (a Poisson rate
    cannot be negative).  The output is not clamped.
    """
    u = as_image(u)
    if np.min(u) < 0.0:
        raise DomainError("clean image must be nonnegative")
    n = u.size
    keys = _pixel_keys(spec.seed, n)
    flat = u.reshape(-1)

    # draw 0 of every pixel is the Gaussian; Poisson consumes draws 1, 2, ...
    gauss = ndtri(_uniforms(keys, np.zeros(n, dtype=np.uint64)))
    counts = _poisson(flat * spec.eta, keys, np.ones(n, dtype=np.uint64))
    f = counts / spec.eta + spec.sigma * gauss
    return f.reshape(u.shape)


def make_phantom(kind: str, width: int, height: int) -> np.ndarray:
    """Deterministic test image in [0, 1].

    Kinds: ``circles`` (disks of several intensities on a dim background),
    ``flat`` (constant 0.5), ``ramp`` (left-to-right 0..1), ``checker``
    (two-valued blocks).
    """
    if width < 8 or height < 8:
        raise ValueError("phantom dimensions must be at least 8")
    if kind == "flat":
        return np.full((height, width), 0.5)
    if kind == "ramp":
        return np.tile(np.linspace(0.0, 1.0, width), (height, 1))
    if kind == "checker":
        block = max(1, min(8, min(width, height) // 2))
        ii, jj = np.meshgrid(np.arange(height), np.arange(width), indexing="ij")
        return np.where((ii // block + jj // block) % 2 == 0, 0.25, 0.8)
    if kind == "circles":
        u = np.full((height, width), 0.1)
        yy, xx = np.meshgrid(np.arange(height), np.arange(width), indexing="ij")
        scale = min(width, height)
        disks = [
            (0.32, 0.30, 0.23, 1.00),
            (0.70, 0.28, 0.14, 0.55),
            (0.30, 0.72, 0.16, 0.75),
            (0.68, 0.70, 0.17, 0.35),
            (0.52, 0.50, 0.08, 0.90),
        ]
        for cx, cy, r, value in disks:
            mask = (xx - cx * width) ** 2 + (yy - cy * height) ** 2 <= (r * scale) ** 2
            u[mask] = value
        return u
    raise ValueError(f"unknown phantom kind: {kind!r}")
