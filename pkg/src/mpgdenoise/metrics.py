"""Reconstruction quality metrics and the model objective."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import convolve2d

from .grid import DomainError, ShapeMismatchError, total_variation

#: SNR values are capped here so an exact reconstruction reports a finite number.
SNR_CAP_DB = 300.0

#: standard deviation of the SSIM window (the window size is configurable,
#: its shape is not)
_SSIM_SIGMA = 1.5


def snr(u, truth) -> float:
    """Signal-to-noise ratio in dB: -10 log10(||u - truth||^2 / ||u||^2).

    The denominator is the energy of the reconstruction ``u`` itself.  An
    exact match returns the cap (300 dB) rather than infinity; an identically
    zero ``u`` is rejected since the ratio is undefined.
    """
    u = np.asarray(u, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if u.shape != truth.shape:
        raise ShapeMismatchError(f"shape mismatch: {u.shape} vs {truth.shape}")
    energy = float(np.sum(u * u))
    if energy == 0.0:
        raise DomainError("snr undefined for an identically zero reconstruction")
    err = float(np.sum((u - truth) ** 2))
    if err == 0.0:
        return SNR_CAP_DB
    return min(-10.0 * math.log10(err / energy), SNR_CAP_DB)


@dataclass
class SSIMConfig:
    window: int = 11
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float = 1.0

    def __post_init__(self):
        if self.window < 3 or self.window % 2 == 0:
            raise ValueError("window must be an odd integer >= 3")
        if not self.dynamic_range > 0.0:
            raise ValueError("dynamic_range must be positive")


def _gaussian_window(size: int) -> np.ndarray:
    half = (size - 1) / 2.0
    x = np.arange(size) - half
    g = np.exp(-(x**2) / (2.0 * _SSIM_SIGMA**2))
    k = np.outer(g, g)
    return k / k.sum()


def ssim(a, b, cfg: SSIMConfig | None = None) -> float:
    """Mean structural similarity over the valid (fully-windowed) region.

    Gaussian-weighted local statistics, the usual two stabilizing constants
    ``(k1 L)^2`` and ``(k2 L)^2``, and no padding: windows that would stick
    out of the image are dropped, so both dimensions must be at least the
    window size.  Larger is better; identical images score exactly 1.
    """
    if cfg is None:
        cfg = SSIMConfig()
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeMismatchError(f"shape mismatch: {a.shape} vs {b.shape}")
    if min(a.shape) < cfg.window:
        raise ValueError(
            f"image dims {a.shape} smaller than the {cfg.window}x{cfg.window} window"
        )
    kern = _gaussian_window(cfg.window)

    def smooth(x):
        return convolve2d(x, kern, mode="valid")

    mu_a = smooth(a)
    mu_b = smooth(b)
    var_a = smooth(a * a) - mu_a**2
    var_b = smooth(b * b) - mu_b**2
    cov = smooth(a * b) - mu_a * mu_b

    c1 = (cfg.k1 * cfg.dynamic_range) ** 2
    c2 = (cfg.k2 * cfg.dynamic_range) ** 2
    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2)
    return float(np.mean(num / den))


def objective_H(u, v, f, cfg) -> float:
    """Value of the denoising model at ``(u, v)`` given the observation ``f``.

    The three terms: quadratic fidelity ``(lambda1/2) ||f - v||^2`` between
    the observation and the Gaussian-part estimate, the Kullback-Leibler-type
    divergence ``lambda2 * sum(u - v log(u/v) - v)`` tying the Poisson-part
    estimate to ``v``, and the total variation of ``u``.  ``cfg`` supplies
    ``lambda1``, ``lambda2`` and the positivity floor ``epsilon``; a ``v``
    below the floor is infeasible and scores ``+inf``.  For reporting
    stability ``u`` is floored at 1e-12 inside the logarithm only.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    f = np.asarray(f, dtype=np.float64)
    if u.shape != v.shape or u.shape != f.shape:
        raise ShapeMismatchError("u, v, f must share one shape")
    if np.min(v) < cfg.epsilon:
        return math.inf
    gauss = 0.5 * cfg.lambda1 * float(np.sum((f - v) ** 2))
    log_ratio = np.log(np.maximum(u, 1e-12) / v)
    kl = cfg.lambda2 * float(np.sum(u - v * log_ratio - v))
    return gauss + kl + total_variation(u)
