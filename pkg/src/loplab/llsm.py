"""Logarithmic least squares weights for incomplete pairwise comparison matrices.

The normal equations of the log-residual objective restricted to known
entries form a graph Laplacian system ``L y = r``. For an ordinal matrix every
known ``log a_ij`` is ``+-log b``, so ``y = c log b`` where ``L c = rho`` and
``rho`` is out-degree minus in-degree. ``c`` is solved exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .pcm import DagPattern, GeneralPcm, LogWeights, NotConnected, Weights, is_weakly_connected
from .rational import solve_with_zero_sum

_NOT_UNIQUE = "comparison graph is not weakly connected; LLSM weights are not unique"


@dataclass(frozen=True)
class LaplacianSystem:
    L: np.ndarray
    r: tuple

    @property
    def n(self) -> int:
        return self.L.shape[0]


def laplacian(n: int, known: list[tuple[int, int]]) -> np.ndarray:
    """Integer Laplacian of the comparison graph; ``known`` holds 0-indexed pairs."""
    L = np.zeros((n, n), dtype=np.int64)
    for i, j in known:
        L[i, j] -= 1
        L[j, i] -= 1
        L[i, i] += 1
        L[j, j] += 1
    return L


def pattern_system(pattern: DagPattern) -> LaplacianSystem:
    """Laplacian system with the right-hand side in units of ``log b``."""
    known = [(i - 1, j - 1) for i, j in pattern.edges]
    return LaplacianSystem(laplacian(pattern.n, known), tuple(pattern.out_minus_in()))


def matrix_system(pcm: GeneralPcm) -> LaplacianSystem:
    r = [0.0] * pcm.n
    for (i, j), value in pcm.upper.items():
        lv = math.log(value)
        r[i] += lv
        r[j] -= lv
    return LaplacianSystem(laplacian(pcm.n, list(pcm.upper)), tuple(r))


def llsm_exact(pattern: DagPattern) -> LogWeights:
    if not pattern.is_weakly_connected():
        raise NotConnected(_NOT_UNIQUE)
    if pattern.n == 2:
        # one edge: c = (1/2, -1/2); the general path gives the same
        return LogWeights((Fraction(1, 2), Fraction(-1, 2)))
    system = pattern_system(pattern)
    coeffs = solve_with_zero_sum(system.L.tolist(), system.r)
    return LogWeights(tuple(coeffs))


def llsm_exact_edges(n: int, edges: list[tuple[int, int]]) -> LogWeights:
    """Exact coefficients for preferences ``i -> j`` (1-indexed) in any labeling, cycles allowed."""
    known = [(min(i, j) - 1, max(i, j) - 1) for i, j in edges]
    rho = [0] * n
    for i, j in edges:
        rho[i - 1] += 1
        rho[j - 1] -= 1
    if not is_weakly_connected(GeneralPcm(n, dict.fromkeys(known, 2))):
        raise NotConnected(_NOT_UNIQUE)
    return LogWeights(tuple(solve_with_zero_sum(laplacian(n, known).tolist(), rho)))


def llsm_log_weights(pcm: GeneralPcm) -> np.ndarray:
    """Mean-zero LLSM log-weights ``y`` in floating point."""
    if not is_weakly_connected(pcm):
        raise NotConnected(_NOT_UNIQUE)
    system = matrix_system(pcm)
    # L + 11^T is nonsingular on a connected graph and, since sum(r) = 0,
    # its solution is the mean-zero solution of L y = r
    y = np.linalg.solve(system.L + 1.0, np.array(system.r))
    return y - y.mean()


def llsm_float(pcm: GeneralPcm) -> Weights:
    y = llsm_log_weights(pcm)
    return Weights.normalized(np.exp(y - y.max()))


def llsm_objective(pcm: GeneralPcm, w: Weights | np.ndarray) -> float:
    """Sum over all ordered known pairs i != j of (log a_ij - log(w_i / w_j))^2."""
    w = np.asarray(w.values if isinstance(w, Weights) else w, dtype=float)
    if w.shape != (pcm.n,):
        raise ValueError(f"weight vector has length {w.size}, matrix has size {pcm.n}")
    logw = np.log(w)
    total = 0.0
    for (i, j), value in pcm.upper.items():
        total += (math.log(value) - (logw[i] - logw[j])) ** 2
    # each unordered pair appears twice with the same squared residual
    return 2.0 * total
