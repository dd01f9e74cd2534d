"""Discrete image grid: arrays, finite-difference operators, checked arithmetic.

Conventions used by every module in this package:

* an image is a 2-d ``float64`` array of shape ``(height, width)``, row-major,
  so ``u[i, j]`` is row ``i`` (y) and column ``j`` (x);
* a vector field (e.g. an image gradient) is a ``float64`` array of shape
  ``(2, height, width)`` where component ``0`` holds column (x) differences
  and component ``1`` holds row (y) differences.

The gradient uses forward differences with replicate boundary handling: the
difference at the far edge is zero.  The divergence is built to be the exact
negative adjoint of the gradient, ``<grad u, q> = -<u, div q>`` for every
``u`` and ``q``, which the dual-projection TV solver relies on.  The operator
norm of the gradient satisfies ``||grad||^2 <= 8``.
"""

from __future__ import annotations

import numpy as np


class ShapeMismatchError(ValueError):
    """Operands do not have the same shape."""


class DomainError(ValueError):
    """An entry is outside the mathematical domain of the operation."""


def as_image(a) -> np.ndarray:
    """Validate and convert ``a`` to a 2-d float64 image array.

    Raises ``ValueError`` for wrong dimensionality and ``DomainError`` for
    non-finite entries.  Always returns a float64 array (a copy only when a
    dtype conversion is needed).
    """
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"expected a non-empty 2-d image array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError("image contains non-finite entries")
    return arr


def zero_field(height: int, width: int) -> np.ndarray:
    """Zero vector field of shape (2, height, width)."""
    return np.zeros((2, height, width))


def gradient(u: np.ndarray) -> np.ndarray:
    """Forward-difference gradient; last row/column of differences are zero."""
    q = np.zeros((2,) + u.shape)
    q[0, :, :-1] = u[:, 1:] - u[:, :-1]
    q[1, :-1, :] = u[1:, :] - u[:-1, :]
    return q


def divergence(q: np.ndarray) -> np.ndarray:
    """Discrete divergence, the exact negative adjoint of :func:`gradient`.

    Backward differences in the interior; at the near edge the component
    itself, at the far edge its negation from one cell in.  The far-edge
    entry of ``q`` never contributes, mirroring the zero the gradient puts
    there.
    """
    qx, qy = q[0], q[1]
    h, w = qx.shape
    d = np.zeros_like(qx)
    if w > 1:
        d[:, 0] += qx[:, 0]
        d[:, 1 : w - 1] += qx[:, 1 : w - 1] - qx[:, 0 : w - 2]
        d[:, w - 1] += -qx[:, w - 2]
    if h > 1:
        d[0, :] += qy[0, :]
        d[1 : h - 1, :] += qy[1 : h - 1, :] - qy[0 : h - 2, :]
        d[h - 1, :] += -qy[h - 2, :]
    return d


def magnitude(q: np.ndarray) -> np.ndarray:
    """Pointwise Euclidean length of a vector field: sqrt(qx^2 + qy^2)."""
    return np.sqrt(q[0] ** 2 + q[1] ** 2)


def laplacian(u: np.ndarray) -> np.ndarray:
    """Discrete Laplacian, composed as divergence(gradient(u))."""
    return divergence(gradient(u))


def total_variation(u: np.ndarray) -> float:
    """Isotropic total variation: sum over pixels of |grad u|."""
    return float(magnitude(gradient(u)).sum())


# ---------------------------------------------------------------------------
# checked elementwise operations
#
# numpy would happily return inf/nan for the unchecked versions; inside the
# solvers a zero denominator or a nonpositive log argument always means an
# invariant was violated upstream, so these raise instead.


def _check_shapes(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ShapeMismatchError(f"shape mismatch: {a.shape} vs {b.shape}")


def add(a, b):
    _check_shapes(a, b)
    return a + b


def sub(a, b):
    _check_shapes(a, b)
    return a - b


def mul(a, b):
    """Hadamard (entrywise) product."""
    _check_shapes(a, b)
    return a * b


def div(a, b):
    """Entrywise quotient; zero denominators raise ``DomainError``."""
    _check_shapes(a, b)
    if np.any(b == 0.0):
        raise DomainError("division by zero entry")
    return a / b


def pixel_max(a, b):
    _check_shapes(a, b)
    return np.maximum(a, b)


def ln(a):
    """Entrywise natural log; nonpositive entries raise ``DomainError``."""
    if np.any(a <= 0.0):
        raise DomainError("log of nonpositive entry")
    return np.log(a)


def sqrt(a):
    """Entrywise square root; negative entries raise ``DomainError``."""
    if np.any(a < 0.0):
        raise DomainError("square root of negative entry")
    return np.sqrt(a)


def scale(a, s: float):
    return a * float(s)


def inner(a, b) -> float:
    """Euclidean inner product over all entries (fields included)."""
    _check_shapes(a, b)
    return float(np.sum(a * b))


def norm(a) -> float:
    """Euclidean (L2) norm over all entries."""
    return float(np.sqrt(np.sum(np.square(a))))


def min_entry(a) -> float:
    return float(np.min(a))
