"""ADMM solvers for TV-regularized mixed Poisson-Gaussian denoising.

The model estimates a clean image ``u`` and the Gaussian-part intermediate
``v`` from an observation ``f``:

    H(u, v) = (lambda1/2) ||f - v||^2
            + lambda2 * sum_i (u_i - v_i log(u_i / v_i) - v_i)
            + TV(u),        subject to v_i >= epsilon > 0.

The coupling term is handled by substituting ``u = v .* w`` and treating the
bilinear relation as an ADMM constraint, which makes every subproblem either
a TV-L2 proximal step or a pointwise closed form:

* ``bca_solve`` splits only the bilinear constraint; its image update is a
  TV-L2 problem solved by the warm-started dual projection of
  :mod:`mpgdenoise.chambolle`.
* ``bcaf_solve`` additionally splits the image gradient (``p = grad u``), so
  its image update becomes a screened Poisson system solved by conjugate
  gradients and the TV term reduces to pointwise vector shrinkage.

Two single-fidelity baselines with the same trace interface are included:
``tv_l2_solve`` (quadratic fidelity) and ``tv_kl_solve`` (Poisson fidelity
via an ADMM split with a pointwise quadratic-root update).

All solvers stop when the relative step ``||u_k+1 - u_k|| / ||u_k||`` falls
to ``xi`` or after ``max_iters`` outer iterations, and return the estimate
together with a per-iteration list of :class:`TraceRecord`.

A known identity of the bilinear split: after every multiplier update,
``Lambda .* w = lambda2`` holds exactly (the w update picks the positive
root of a quadratic whose stationarity condition says precisely this).  The
trace reports the residual of that identity every iteration; it doubles as a
cheap self-check of the implementation.

The convergence theory for the bilinear split asks for a sufficiently large
penalty: with ``c`` a positive lower bound for the entries of ``w`` along
the iterations, the penalty should exceed
``max(sqrt(2) * lambda2 / (c^2 * epsilon), lambda2 * (1/c - 1)^2)``.
That is a sufficient condition only -- useful penalties are routinely far
below it -- so the solvers never enforce it.  :func:`alpha_condition`
evaluates it after the fact from a finished trace (the CLI echoes the
verdict into the trace header), and :func:`alpha_lower_bound` exposes the
raw bound.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .chambolle import ChambolleConfig, soft_threshold, tv_l2_denoise, tv_l2_energy
from .grid import (
    DomainError,
    as_image,
    divergence,
    gradient,
    ln,
    magnitude,
    total_variation,
)
from .metrics import objective_H, snr
from .screened_poisson import CGConfig, solve_screened_poisson


@dataclass
class SolverConfig:
    """Model weights and algorithm controls shared by all solvers.

    ``lambda1``/``lambda2`` weight the quadratic and Poisson fidelities;
    ``alpha`` is the ADMM penalty of the bilinear split (and the quadratic
    penalty of the TV+KL baseline), while ``alpha_w``/``alpha_p`` are the
    two penalties of the flux-split variant.  ``epsilon`` is the positivity
    floor on ``v``, ``xi`` the relative-step stopping tolerance.
    """

    lambda1: float
    lambda2: float
    alpha: float = 200.0
    alpha_w: float = 200.0
    alpha_p: float = 50.0
    epsilon: float = 1e-6
    xi: float = 5e-4
    max_iters: int = 1000
    chambolle: ChambolleConfig = field(default_factory=ChambolleConfig)
    cg: CGConfig = field(default_factory=CGConfig)

    def __post_init__(self):
        for name in ("lambda1", "lambda2", "alpha", "alpha_w", "alpha_p", "epsilon", "xi"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass
class SolverState:
    """Iterates of one ADMM run.

    ``lam_w`` is the multiplier of the bilinear constraint ``v .* w = u``;
    ``p``/``lam_p`` exist only in the flux-split variant; ``dual`` carries
    the warm-started TV dual field between image updates; ``iters`` counts
    completed outer iterations.
    """

    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    lam_w: np.ndarray
    p: np.ndarray | None = None
    lam_p: np.ndarray | None = None
    dual: np.ndarray | None = None
    iters: int = 0


@dataclass
class TraceRecord:
    """One outer iteration's diagnostics.

    ``objective`` is the model value H at the current ``(u, v)``;
    ``lagrangian`` the solver's own augmented Lagrangian; ``min_w``,
    ``identity_residual`` (sup-norm of ``lam_w .* w - lambda2``) and
    ``constraint_residual`` (relative ``||v .* w - u||``) apply to the
    bilinear solvers and are ``None`` for the baselines, as is ``snr`` when
    no ground truth was supplied.  ``seconds`` is wall time since the solve
    started, I/O excluded.
    """

    iter: int
    se: float
    objective: float
    lagrangian: float
    min_w: float | None
    identity_residual: float | None
    constraint_residual: float | None
    snr: float | None
    seconds: float


def alpha_lower_bound(lambda2: float, c: float, epsilon: float) -> float:
    """Penalty bound sufficient for convergence of the bilinear split."""
    if not c > 0.0:
        raise ValueError("c must be positive")
    return max(np.sqrt(2.0) * lambda2 / (c * c * epsilon), lambda2 * (1.0 / c - 1.0) ** 2)


def alpha_condition(alpha: float, lambda2: float, epsilon: float, trace) -> tuple[bool, float, float]:
    """Check the sufficient penalty condition against a finished run.

    ``c`` is taken as the smallest ``min_w`` observed along the trace.
    Returns ``(met, bound, c)``; purely advisory.
    """
    c = min(r.min_w for r in trace if r.min_w is not None)
    bound = alpha_lower_bound(lambda2, c, epsilon)
    return alpha > bound, bound, c


def _rel_step(u_new: np.ndarray, u_old: np.ndarray) -> float:
    den = float(np.linalg.norm(u_old))
    return float(np.linalg.norm(u_new - u_old)) / (den if den > 0.0 else 1.0)


def _rel_norm(num: np.ndarray, ref: np.ndarray) -> float:
    den = float(np.linalg.norm(ref))
    return float(np.linalg.norm(num)) / (den if den > 0.0 else 1.0)


# ---------------------------------------------------------------------------
# bilinear-constraint solver


def bca_init(f: np.ndarray) -> SolverState:
    """Start from the observation: u = v = f, w = 1, zero multiplier."""
    f = as_image(f)
    return SolverState(
        u=f.copy(),
        v=f.copy(),
        w=np.ones_like(f),
        lam_w=np.zeros_like(f),
        dual=np.zeros((2,) + f.shape),
    )


def bca_u_step(state: SolverState, f, cfg: SolverConfig) -> np.ndarray:
    """TV-L2 image update.

    Minimizes ``TV(u) + lambda2*sum(u) - <lam_w, u> + (alpha/2)||v.*w - u||^2``
    over ``u``, i.e. a TV proximal step at weight ``alpha`` around the target
    ``v .* w + lam_w/alpha - lambda2/alpha``.  The TV dual field is persisted
    into ``state.dual`` for the next warm start.
    """
    target = state.v * state.w + state.lam_w / cfg.alpha - cfg.lambda2 / cfg.alpha
    u, state.dual = tv_l2_denoise(target, cfg.alpha, cfg.chambolle, warm_dual=state.dual)
    return u


def _v_update(u, w, lam_w, f, cfg, alpha, first_iteration):
    log_w = ln(w)  # also rejects nonpositive w, which means a broken w update
    numer = cfg.lambda1 * f + cfg.lambda2 * log_w + alpha * w * u
    if first_iteration:
        # before the first multiplier update the identity lam_w .* w = lambda2
        # does not hold yet, so the full stationarity numerator is needed
        numer = numer + cfg.lambda2 - w * lam_w
    return np.maximum(cfg.epsilon, numer / (cfg.lambda1 + alpha * w * w))


def bca_v_step(state: SolverState, f, cfg: SolverConfig) -> np.ndarray:
    """Pointwise Gaussian-part update; expects ``state.u`` already advanced.

    Minimizer of the per-pixel strongly convex objective
    ``(lambda1/2)(f - v)^2 - lambda2*(v log w + v) + (alpha/2)(v w + lam_w/alpha - u)^2``
    clamped to the feasible set ``v >= epsilon``.
    """
    return _v_update(state.u, state.w, state.lam_w, f, cfg, cfg.alpha, state.iters == 0)


def _w_update(u, v, lam_w, lambda2, alpha):
    x = u - lam_w / alpha
    s = 4.0 * lambda2 * v / alpha
    root = np.sqrt(x * x + s)
    # the two expressions are algebraically equal; picking by the sign of x
    # avoids the catastrophic cancellation of (x + root) when x is negative
    return np.where(x >= 0.0, (x + root) / (2.0 * v), (2.0 * lambda2 / alpha) / (root - x))


def bca_w_step(state: SolverState, cfg: SolverConfig) -> np.ndarray:
    """Pointwise ratio update; expects ``state.u`` and ``state.v`` advanced.

    Positive root of ``alpha v w^2 + (lam_w - alpha u) w - lambda2 = 0`` per
    pixel (stationarity of ``-lambda2 v log w + (alpha/2)(v w + lam_w/alpha - u)^2``).
    Always strictly positive.
    """
    if np.min(state.v) < cfg.epsilon:
        raise DomainError("v entries below the positivity floor; v update is broken")
    return _w_update(state.u, state.v, state.lam_w, cfg.lambda2, cfg.alpha)


def bca_multiplier_step(state: SolverState, cfg: SolverConfig) -> np.ndarray:
    """Dual ascent on the bilinear constraint; expects u, v, w advanced."""
    return state.lam_w + cfg.alpha * (state.v * state.w - state.u)


def _bca_lagrangian(state, f, cfg):
    gap = state.v * state.w - state.u
    e = (
        0.5 * cfg.lambda1 * float(np.sum((f - state.v) ** 2))
        + cfg.lambda2 * float(np.sum(state.u - state.v * np.log(state.w) - state.v))
        + total_variation(state.u)
    )
    return e + float(np.sum(state.lam_w * gap)) + 0.5 * cfg.alpha * float(np.sum(gap * gap))


def bca_solve(f, cfg: SolverConfig, truth=None):
    """Run the bilinear-constraint solver on observation ``f``.

    Returns ``(u, trace)``.  ``truth``, when given, adds an SNR column to the
    trace.  Deterministic: identical inputs give bit-identical outputs.
    """
    f = as_image(f)
    state = bca_init(f)
    trace: list[TraceRecord] = []
    start = time.perf_counter()
    for k in range(1, cfg.max_iters + 1):
        u_prev = state.u
        state.u = bca_u_step(state, f, cfg)
        state.v = bca_v_step(state, f, cfg)
        state.w = bca_w_step(state, cfg)
        state.lam_w = bca_multiplier_step(state, cfg)
        state.iters = k

        se = _rel_step(state.u, u_prev)
        min_w = float(np.min(state.w))
        trace.append(
            TraceRecord(
                iter=k,
                se=se,
                objective=objective_H(state.u, state.v, f, cfg),
                lagrangian=_bca_lagrangian(state, f, cfg),
                min_w=min_w,
                identity_residual=float(
                    np.max(np.abs(state.lam_w * state.w - cfg.lambda2))
                ),
                constraint_residual=_rel_norm(state.v * state.w - state.u, state.u),
                snr=None if truth is None else snr(state.u, truth),
                seconds=time.perf_counter() - start,
            )
        )
        if se <= cfg.xi:
            break
    return state.u, trace


# ---------------------------------------------------------------------------
# flux-split variant (extra splitting p = grad u)


def bcaf_init(f: np.ndarray) -> SolverState:
    f = as_image(f)
    return SolverState(
        u=f.copy(),
        v=f.copy(),
        w=np.ones_like(f),
        lam_w=np.zeros_like(f),
        p=np.zeros((2,) + f.shape),
        lam_p=np.zeros((2,) + f.shape),
    )


def bcaf_u_step(state: SolverState, f, cfg: SolverConfig) -> np.ndarray:
    """Screened-Poisson image update, warm-started CG from the previous u.

    Normal equations of the u block:
    ``(alpha_w I - alpha_p Lap) u = -lambda2 + lam_w - div(lam_p) + alpha_w v.*w - alpha_p div(p)``.
    """
    rhs = (
        -cfg.lambda2
        + state.lam_w
        - divergence(state.lam_p)
        + cfg.alpha_w * state.v * state.w
        - cfg.alpha_p * divergence(state.p)
    )
    return solve_screened_poisson(rhs, cfg.alpha_w, cfg.alpha_p, cfg.cg, x0=state.u)


def bcaf_v_step(state: SolverState, f, cfg: SolverConfig) -> np.ndarray:
    """Same pointwise update as the bilinear solver, at penalty ``alpha_w``."""
    return _v_update(state.u, state.w, state.lam_w, f, cfg, cfg.alpha_w, state.iters == 0)


def bcaf_w_step(state: SolverState, cfg: SolverConfig) -> np.ndarray:
    if np.min(state.v) < cfg.epsilon:
        raise DomainError("v entries below the positivity floor; v update is broken")
    return _w_update(state.u, state.v, state.lam_w, cfg.lambda2, cfg.alpha_w)


def bcaf_p_step(state: SolverState, cfg: SolverConfig) -> np.ndarray:
    """Vector shrinkage of the gradient split; expects ``state.u`` advanced."""
    return soft_threshold(gradient(state.u) - state.lam_p / cfg.alpha_p, 1.0 / cfg.alpha_p)


def bcaf_multiplier_step(state: SolverState, cfg: SolverConfig):
    """Dual ascent on both constraints; expects u, v, w, p advanced."""
    lam_w = state.lam_w + cfg.alpha_w * (state.v * state.w - state.u)
    lam_p = state.lam_p + cfg.alpha_p * (state.p - gradient(state.u))
    return lam_w, lam_p


def _bcaf_lagrangian(state, f, cfg):
    gap_w = state.v * state.w - state.u
    gap_p = state.p - gradient(state.u)
    e = (
        0.5 * cfg.lambda1 * float(np.sum((f - state.v) ** 2))
        + cfg.lambda2 * float(np.sum(state.u - state.v * np.log(state.w) - state.v))
        + float(np.sum(magnitude(state.p)))
    )
    return (
        e
        + float(np.sum(state.lam_w * gap_w))
        + 0.5 * cfg.alpha_w * float(np.sum(gap_w * gap_w))
        + float(np.sum(state.lam_p * gap_p))
        + 0.5 * cfg.alpha_p * float(np.sum(gap_p * gap_p))
    )


def bcaf_solve(f, cfg: SolverConfig, truth=None):
    """Run the flux-split solver on observation ``f``; returns ``(u, trace)``."""
    f = as_image(f)
    state = bcaf_init(f)
    trace: list[TraceRecord] = []
    start = time.perf_counter()
    for k in range(1, cfg.max_iters + 1):
        u_prev = state.u
        state.u = bcaf_u_step(state, f, cfg)
        state.v = bcaf_v_step(state, f, cfg)
        state.w = bcaf_w_step(state, cfg)
        state.p = bcaf_p_step(state, cfg)
        state.lam_w, state.lam_p = bcaf_multiplier_step(state, cfg)
        state.iters = k

        se = _rel_step(state.u, u_prev)
        min_w = float(np.min(state.w))
        trace.append(
            TraceRecord(
                iter=k,
                se=se,
                objective=objective_H(state.u, state.v, f, cfg),
                lagrangian=_bcaf_lagrangian(state, f, cfg),
                min_w=min_w,
                identity_residual=float(
                    np.max(np.abs(state.lam_w * state.w - cfg.lambda2))
                ),
                constraint_residual=_rel_norm(state.v * state.w - state.u, state.u),
                snr=None if truth is None else snr(state.u, truth),
                seconds=time.perf_counter() - start,
            )
        )
        if se <= cfg.xi:
            break
    return state.u, trace


# ---------------------------------------------------------------------------
# single-fidelity baselines


def tv_l2_solve(f, lam: float, cfg: SolverConfig, truth=None):
    """TV denoising with quadratic fidelity ``(lam/2)||u - f||^2 + TV(u)``.

    One outer iteration is one warm-started block of ``cfg.chambolle``
    dual-projection steps, so the whole run composes into a single long
    high-accuracy solve while still emitting per-block trace records.
    """
    f = as_image(f)
    if not lam > 0.0:
        raise DomainError("fidelity weight must be positive")
    u_prev = f
    dual = None
    trace: list[TraceRecord] = []
    start = time.perf_counter()
    for k in range(1, cfg.max_iters + 1):
        u, dual = tv_l2_denoise(f, lam, cfg.chambolle, warm_dual=dual)
        se = _rel_step(u, u_prev)
        val = tv_l2_energy(u, f, lam)
        trace.append(
            TraceRecord(
                iter=k,
                se=se,
                objective=val,
                lagrangian=val,
                min_w=None,
                identity_residual=None,
                constraint_residual=None,
                snr=None if truth is None else snr(u, truth),
                seconds=time.perf_counter() - start,
            )
        )
        u_prev = u
        if se <= cfg.xi:
            break
    return u_prev, trace


def kl_z_update(u, mu, f, lam: float, rho: float):
    """Closed-form z step of the TV+KL split, entrywise.

    Positive root of the stationarity quadratic of
    ``lam*(z - f log z) + mu*(z - u) + (rho/2)(z - u)^2``;
    where ``f = 0`` the log term is absent and the root collapses to
    ``max(0, u - mu/rho - lam/rho)``.
    """
    t = u - mu / rho - lam / rho
    return 0.5 * (t + np.sqrt(t * t + 4.0 * lam * f / rho))


def tv_kl_solve(f, lam: float, cfg: SolverConfig, truth=None):
    """TV denoising with Poisson fidelity ``lam * sum(u - f log u) + TV(u)``.

    ADMM on the split ``z = u`` with penalty ``cfg.alpha``: the ``z`` update
    is the positive root of a pointwise quadratic, the ``u`` update a
    warm-started TV-L2 step at weight ``cfg.alpha``.  Requires ``f >= 0``.
    """
    f = as_image(f)
    if not lam > 0.0:
        raise DomainError("fidelity weight must be positive")
    if np.min(f) < 0.0:
        raise DomainError("Poisson fidelity needs a nonnegative observation")
    rho = cfg.alpha
    u = f.copy()
    z = f.copy()
    mu = np.zeros_like(f)
    dual = None
    trace: list[TraceRecord] = []
    start = time.perf_counter()
    for k in range(1, cfg.max_iters + 1):
        u_prev = u
        u, dual = tv_l2_denoise(z + mu / rho, rho, cfg.chambolle, warm_dual=dual)
        z = kl_z_update(u, mu, f, lam, rho)
        mu = mu + rho * (z - u)

        se = _rel_step(u, u_prev)
        log_u = np.log(np.maximum(u, 1e-12))
        val = lam * float(np.sum(u - np.where(f > 0.0, f * log_u, 0.0))) + total_variation(u)
        gap = z - u
        trace.append(
            TraceRecord(
                iter=k,
                se=se,
                objective=val,
                lagrangian=val
                + float(np.sum(mu * gap))
                + 0.5 * rho * float(np.sum(gap * gap)),
                min_w=None,
                identity_residual=None,
                constraint_residual=None,
                snr=None if truth is None else snr(u, truth),
                seconds=time.perf_counter() - start,
            )
        )
        if se <= cfg.xi:
            break
    return u, trace
