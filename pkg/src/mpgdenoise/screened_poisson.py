"""Matrix-free conjugate gradients for the screened Poisson system.

The flux-split ADMM solver's image update has normal equations

    (alpha_w * I - alpha_p * Lap) u = rhs

with the discrete Laplacian from :mod:`mpgdenoise.grid`.  The operator is
symmetric positive definite for ``alpha_w > 0``, ``alpha_p >= 0`` (the
negative Laplacian is positive semidefinite by construction), so plain CG
applies.  Everything is matrix-free: the operator is applied through the
gradient/divergence composition, never assembled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import laplacian


@dataclass
class CGConfig:
    tol: float = 1e-8
    max_iters: int = 200

    def __post_init__(self):
        if not 0.0 < self.tol < 1.0:
            raise ValueError("tol must be in (0, 1)")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


class ConvergenceError(RuntimeError):
    """CG failed to reach the requested residual; carries the one it got."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


def solve_screened_poisson(rhs, alpha_w, alpha_p, cfg=None, x0=None):
    """Solve (alpha_w I - alpha_p Lap) u = rhs to relative residual cfg.tol.

    Args:
        rhs: right-hand side image (H, W).
        alpha_w: screening weight, must be > 0.
        alpha_p: diffusion weight, must be >= 0.
        cfg: CGConfig; defaults to ``CGConfig()``.
        x0: optional initial iterate (warm start); ``None`` means zero.

    Returns:
        The solution image.  Raises :class:`ConvergenceError` when the
        relative residual ||rhs - A u|| / ||rhs|| is still above ``cfg.tol``
        after ``cfg.max_iters`` iterations.
    """
    if cfg is None:
        cfg = CGConfig()
    if not alpha_w > 0.0:
        raise ValueError("alpha_w must be positive")
    if alpha_p < 0.0:
        raise ValueError("alpha_p must be nonnegative")
    rhs = np.asarray(rhs, dtype=np.float64)

    def apply_op(x):
        return alpha_w * x - alpha_p * laplacian(x)

    rhs_norm = float(np.sqrt(np.sum(rhs * rhs)))
    if rhs_norm == 0.0:
        return np.zeros_like(rhs)

    x = np.zeros_like(rhs) if x0 is None else np.array(x0, dtype=np.float64, copy=True)
    r = rhs - apply_op(x)
    rs = float(np.sum(r * r))
    if np.sqrt(rs) <= cfg.tol * rhs_norm:
        return x
    p = r.copy()
    for _ in range(cfg.max_iters):
        ap = apply_op(p)
        alpha = rs / float(np.sum(p * ap))
        x = x + alpha * p
        r = r - alpha * ap
        rs_new = float(np.sum(r * r))
        if np.sqrt(rs_new) <= cfg.tol * rhs_norm:
            return x
        p = r + (rs_new / rs) * p
        rs = rs_new
    raise ConvergenceError(
        f"CG stalled at relative residual {np.sqrt(rs) / rhs_norm:.3e} "
        f"after {cfg.max_iters} iterations (target {cfg.tol:.1e})",
        residual=float(np.sqrt(rs) / rhs_norm),
    )
