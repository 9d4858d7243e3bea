"""
Kernels and a sequential minimal optimization solver for the soft-margin SVM dual.

.. autosummary::

    ~Kernel
    ~SmoResult
    ~kernel_eval
    ~kernel_matrix
    ~smo
"""

__all__ = """
    Kernel
    kernel_eval
    kernel_matrix
    smo
    SmoResult
""".split()

import enum
import logging
import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionMismatch
from .exceptions import NonConvergenceWarning

logger = logging.getLogger(__name__)

MIN_ALPHA_STEP = 1e-5


class Kernel(str, enum.Enum):
    RBF = "rbf"
    LINEAR = "linear"


def kernel_eval(kind, gamma: float, a, b) -> float:
    """``dot(a, b)`` for LINEAR, ``exp(-gamma * |a - b|²)`` for RBF."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionMismatch(f"kernel arguments differ in shape: {a.shape} vs {b.shape}")
    if Kernel(kind) == Kernel.LINEAR:
        return float(np.dot(a, b))
    diff = a - b
    return float(np.exp(-gamma * np.dot(diff, diff)))


def kernel_matrix(kind, gamma: float, A, B) -> np.ndarray:
    """Kernel between every row of ``A`` and every row of ``B``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape[1] != B.shape[1]:
        raise DimensionMismatch(f"kernel arguments have {A.shape[1]} and {B.shape[1]} columns")
    if Kernel(kind) == Kernel.LINEAR:
        return A @ B.T
    # explicit differences keep K symmetric with an exact unit diagonal
    sq = ((A[:, None, :] - B[None, :, :]) ** 2).sum(axis=-1)
    return np.exp(-gamma * sq)


@dataclass(frozen=True)
class SmoResult:
    alpha: np.ndarray
    intercept: float
    sweeps: int
    passes: int
    converged: bool


def _intercept(K, y, alpha, C):
    """
    Intercept from the KKT conditions at the final multipliers.

    Average over free multipliers; with none free, the midpoint of the
    interval the bounded ones allow.
    """
    g = K @ (alpha * y)
    eps = 1e-8 * C
    free = (alpha > eps) & (alpha < C - eps)
    if free.any():
        return float(np.mean(y[free] - g[free]))
    at_zero = alpha <= eps
    # alpha = 0 needs y*f >= 1; alpha = C needs y*f <= 1
    lower_mask = (at_zero & (y > 0)) | (~at_zero & (y < 0))
    upper_mask = (at_zero & (y < 0)) | (~at_zero & (y > 0))
    bounds = y - g
    lower = bounds[lower_mask].max() if lower_mask.any() else None
    upper = bounds[upper_mask].min() if upper_mask.any() else None
    if lower is None:
        return float(upper)
    if upper is None:
        return float(lower)
    return float((lower + upper) / 2.0)


def smo(
    K: np.ndarray,
    y: np.ndarray,
    C: float,
    tolerance: float = 1e-3,
    max_passes: int = 10,
    max_sweeps: int = 1000,
    rng: np.random.Generator = None,
) -> SmoResult:
    """
    Solve the dual for a precomputed kernel matrix ``K`` and labels ``y`` in {-1, +1}.

    Each sweep visits every multiplier that violates the KKT conditions by
    more than ``tolerance`` and pairs it with a randomly drawn partner.  The
    solver stops after ``max_passes`` consecutive sweeps without an update.
    Reaching ``max_sweeps`` first emits :class:`NonConvergenceWarning`.
    """
    rng = rng or np.random.default_rng(0)
    y = np.asarray(y, dtype=float)
    n = len(y)
    alpha = np.zeros(n)
    b = 0.0
    passes = sweeps = 0
    while passes < max_passes and sweeps < max_sweeps:
        sweeps += 1
        changed = 0
        for i in range(n):
            Ei = float(K[:, i] @ (alpha * y)) + b - y[i]
            if not ((y[i] * Ei < -tolerance and alpha[i] < C) or (y[i] * Ei > tolerance and alpha[i] > 0)):
                continue
            j = int(rng.integers(n - 1))
            j += j >= i
            Ej = float(K[:, j] @ (alpha * y)) + b - y[j]
            ai, aj = alpha[i], alpha[j]
            if y[i] != y[j]:
                low, high = max(0.0, aj - ai), min(C, C + aj - ai)
            else:
                low, high = max(0.0, ai + aj - C), min(C, ai + aj)
            if low >= high:
                continue
            eta = 2.0 * K[i, j] - K[i, i] - K[j, j]
            if eta >= 0:
                continue
            aj_new = float(np.clip(aj - y[j] * (Ei - Ej) / eta, low, high))
            if abs(aj_new - aj) < MIN_ALPHA_STEP:
                continue
            ai_new = float(np.clip(ai + y[i] * y[j] * (aj - aj_new), 0.0, C))
            b1 = b - Ei - y[i] * (ai_new - ai) * K[i, i] - y[j] * (aj_new - aj) * K[i, j]
            b2 = b - Ej - y[i] * (ai_new - ai) * K[i, j] - y[j] * (aj_new - aj) * K[j, j]
            if 0 < ai_new < C:
                b = b1
            elif 0 < aj_new < C:
                b = b2
            else:
                b = (b1 + b2) / 2.0
            alpha[i], alpha[j] = ai_new, aj_new
            changed += 1
        passes = passes + 1 if changed == 0 else 0

    converged = passes >= max_passes
    if not converged:
        message = f"SMO stopped after {sweeps} sweeps with {passes} quiet passes of {max_passes}"
        logger.warning(message)
        warnings.warn(NonConvergenceWarning(message, passes=passes), stacklevel=2)
    return SmoResult(alpha, _intercept(K, y, alpha, C), sweeps, passes, converged)
