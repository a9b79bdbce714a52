"""Eigenvector method weights, optimal completion of incomplete matrices, and CR.

For an incomplete matrix the missing entries ``x_ij`` (and ``1/x_ij``) are
chosen to minimize the Perron eigenvalue. With ``t = log x`` the Perron root
is a convex function of ``t``, and strictly convex when the comparison graph
is weakly connected, so a damped Newton iteration with a monotone line
search finds the unique minimizer. Its optimality condition is

    x_ij ** 2 == (w_i * v_j) / (w_j * v_i)

with ``w`` / ``v`` the right / left Perron vectors of the completed matrix.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .llsm import llsm_log_weights
from .pcm import GeneralPcm, NotConnected, Weights, is_weakly_connected

POWER_TOL = 1e-14
POWER_MAX_ITER = 10**6
COMPLETION_TOL = 1e-12
STATIONARITY_TOL = 1e-10
MAX_SWEEPS = 10**4
MONOTONE_SLACK = 1e-13
NOISE_FLOOR = 1e-14

SAATY_SCALE = tuple([1.0 / k for k in range(9, 1, -1)] + [float(k) for k in range(1, 10)])
RANDOM_INDEX_BLOCK = 1000


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class PerronResult:
    lambda_max: float
    w: Weights
    iterations: int
    residual: float


@dataclass(frozen=True)
class CompletionResult:
    completed: GeneralPcm
    filled: dict
    lambda_max: float
    perron: PerronResult
    history: tuple = ()
    stationarity: float = 0.0
    sweeps: int = 0
    left: np.ndarray = field(default=None, repr=False)


def _as_positive_square(matrix) -> np.ndarray:
    if isinstance(matrix, GeneralPcm):
        if not matrix.is_complete:
            raise ValueError("matrix has missing entries; complete it first")
        matrix = matrix.to_array()
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("matrix must be square")
    if not np.all(a > 0):
        raise ValueError("all entries must be strictly positive")
    return a


def perron(matrix, tol: float = POWER_TOL, max_iter: int = POWER_MAX_ITER) -> PerronResult:
    """Dominant eigenpair of a positive matrix by power iteration from the uniform vector."""
    a = _as_positive_square(matrix)
    n = a.shape[0]
    w = np.full(n, 1.0 / n)
    lam = math.inf
    for it in range(1, max_iter + 1):
        z = a @ w
        lam_new = float(z.sum())  # sum(w) == 1, so this is the eigenvalue estimate
        z /= lam_new
        change = float(np.max(np.abs(z - w) / z))
        lam_change = abs(lam_new - lam) / lam_new
        w, lam = z, lam_new
        if change <= tol and lam_change <= tol:
            break
    else:
        raise ConvergenceError(f"power iteration did not converge in {max_iter} iterations")
    residual = float(np.max(np.abs(a @ w - lam * w)))
    return PerronResult(lam, Weights.normalized(w), it, residual)


def _perron_pair(a: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    """Perron root with right and left Perron vectors (both positive, sum 1)."""
    vals, vecs = np.linalg.eig(a)
    k = int(np.argmax(vals.real))
    w = np.abs(vecs[:, k].real)
    lvals, lvecs = np.linalg.eig(a.T)
    v = np.abs(lvecs[:, int(np.argmax(lvals.real))].real)
    return float(vals[k].real), w / w.sum(), v / v.sum()


class _Completion:
    """Perron root of the matrix as a function of the log missing entries."""

    def __init__(self, pcm: GeneralPcm):
        self.base = np.where(np.isnan(a := pcm.to_array()), 1.0, a)
        self.missing = pcm.missing_positions()
        self.rows = np.array([i for i, _ in self.missing])
        self.cols = np.array([j for _, j in self.missing])

    def matrix(self, t: np.ndarray) -> np.ndarray:
        a = self.base.copy()
        a[self.rows, self.cols] = np.exp(t)
        a[self.cols, self.rows] = np.exp(-t)
        return a

    def value(self, t: np.ndarray) -> float:
        return float(np.max(np.linalg.eigvals(self.matrix(t)).real))

    def gradient(self, t: np.ndarray) -> tuple[float, np.ndarray, np.ndarray, np.ndarray]:
        lam, w, v = _perron_pair(self.matrix(t))
        i, j = self.rows, self.cols
        x = np.exp(t)
        g = (v[i] * w[j] * x - v[j] * w[i] / x) / (v @ w)
        return lam, g, w, v

    def hessian(self, t: np.ndarray, step: float = 1e-5) -> np.ndarray:
        m = len(t)
        h = np.empty((m, m))
        for a in range(m):
            e = np.zeros(m)
            e[a] = step
            h[:, a] = (self.gradient(t + e)[1] - self.gradient(t - e)[1]) / (2 * step)
        return (h + h.T) / 2

    def stationarity(self, t: np.ndarray, w: np.ndarray, v: np.ndarray) -> float:
        i, j = self.rows, self.cols
        ratio = np.exp(2 * t) * v[i] * w[j] / (v[j] * w[i])
        return float(np.max(np.abs(ratio - 1))) if len(t) else 0.0

    def golden_sweep(self, t: np.ndarray, radius: float = 2.0, tol: float = 1e-12) -> np.ndarray:
        t = t.copy()
        invphi = (math.sqrt(5) - 1) / 2
        for a in range(len(t)):
            def f(s, a=a):
                u = t.copy()
                u[a] = s
                return self.value(u)

            lo, hi = t[a] - radius, t[a] + radius
            c, d = hi - invphi * (hi - lo), lo + invphi * (hi - lo)
            fc, fd = f(c), f(d)
            while hi - lo > tol:
                if fc < fd:
                    hi, d, fd = d, c, fc
                    c = hi - invphi * (hi - lo)
                    fc = f(c)
                else:
                    lo, c, fc = c, d, fd
                    d = lo + invphi * (hi - lo)
                    fd = f(d)
            best = (lo + hi) / 2
            if f(best) <= f(t[a]):
                t[a] = best
        return t


def em_complete(pcm: GeneralPcm, tol: float = COMPLETION_TOL, max_sweeps: int = MAX_SWEEPS,
                start: str = "llsm") -> CompletionResult:
    """Completion of ``pcm`` minimizing the Perron eigenvalue.

    ``start`` selects the initial guess for the missing entries: ``"llsm"``
    uses the ratios of the LLSM weights, ``"ones"`` sets them to 1. Each
    sweep is one Newton step with backtracking, so the eigenvalue never
    increases; a coordinate golden-section sweep takes over if Newton stalls
    away from a stationary point. Iteration stops once the eigenvalue moves
    less than ``tol`` and the optimality condition holds to 1e-10.
    """
    if pcm.is_complete:
        result = perron(pcm)
        return CompletionResult(pcm, {}, result.lambda_max, result, (result.lambda_max,))
    if not is_weakly_connected(pcm):
        raise NotConnected("comparison graph is not weakly connected; EM weights are not unique")
    problem = _Completion(pcm)
    if start == "llsm":
        y = llsm_log_weights(pcm)
        t = y[problem.rows] - y[problem.cols]
    elif start == "ones":
        t = np.zeros(len(problem.missing))
    else:
        raise ValueError(f"unknown start {start!r}")

    lam, g, w, v = problem.gradient(t)
    history = [lam]
    resid = problem.stationarity(t, w, v)
    sweeps = 0
    converged = resid <= STATIONARITY_TOL
    while not converged:
        if sweeps >= max_sweeps:
            raise ConvergenceError(f"completion did not converge in {max_sweeps} sweeps")
        sweeps += 1
        h = problem.hessian(t)
        try:
            evals = np.linalg.eigvalsh(h)
            shift = max(0.0, 1e-12 - evals.min())
            step = -np.linalg.solve(h + shift * np.eye(len(t)), g)
        except np.linalg.LinAlgError:
            step = -g
        slope = float(g @ step)
        alpha, accepted = 1.0, False
        while alpha > 1e-12:
            trial = t + alpha * step
            lam_trial = problem.value(trial)
            # eigenvalue rounding noise can swamp the predicted decrease near the optimum
            if lam_trial <= lam + 1e-4 * alpha * slope + NOISE_FLOOR * lam:
                accepted = True
                break
            alpha /= 2
        if accepted:
            t = trial
        else:
            trial = problem.golden_sweep(t)
            if problem.value(trial) <= lam:
                t = trial
        lam_new, g, w, v = problem.gradient(t)
        if lam_new > history[-1] + MONOTONE_SLACK * history[-1]:
            raise ConvergenceError("Perron root increased during completion")
        resid = problem.stationarity(t, w, v)
        converged = abs(lam - lam_new) < tol and resid <= STATIONARITY_TOL
        if not accepted and not converged and abs(lam - lam_new) == 0:
            raise ConvergenceError(f"completion stalled with stationarity residual {resid:.3g}")
        lam = lam_new
        history.append(lam)

    x = np.exp(t)
    filled = {pos: float(val) for pos, val in zip(problem.missing, x)}
    completed = pcm.with_entries(filled)
    result = perron(completed)
    return CompletionResult(completed, filled, result.lambda_max, result, tuple(history), resid, sweeps, v)


def em_weights(pcm: GeneralPcm) -> Weights:
    return em_complete(pcm).perron.w


def cr_index(matrix, random_excess: float) -> float:
    """Consistency ratio ``(lambda_max - n) / random_excess``.

    ``random_excess`` is the mean random Perron root minus n, e.g.
    ``estimate_random_index(n, ...) - n``.
    """
    if not random_excess > 0:
        raise ValueError(f"random index excess must be positive, got {random_excess}")
    a = _as_positive_square(matrix)
    lam = perron(a).lambda_max
    return max(lam - a.shape[0], 0.0) / random_excess


def _random_block(n: int, size: int, seed_seq: np.random.SeedSequence) -> float:
    rng = np.random.default_rng(seed_seq)
    scale = np.array(SAATY_SCALE)
    iu = np.triu_indices(n, 1)
    draws = scale[rng.integers(0, len(scale), size=(size, len(iu[0])))]
    a = np.ones((size, n, n))
    a[:, iu[0], iu[1]] = draws
    a[:, iu[1], iu[0]] = 1.0 / draws
    w = np.full((size, n), 1.0 / n)
    lam = np.full(size, np.inf)
    for _ in range(POWER_MAX_ITER):
        z = np.einsum("bij,bj->bi", a, w)
        lam_new = z.sum(axis=1)
        z /= lam_new[:, None]
        change = np.max(np.abs(z - w) / z, axis=1)
        lam_change = np.abs(lam_new - lam) / lam_new
        w, lam = z, lam_new
        if np.all(change <= POWER_TOL) and np.all(lam_change <= POWER_TOL):
            break
    else:
        raise ConvergenceError("batched power iteration did not converge")
    return float(lam.sum())


def estimate_random_index(n: int, samples: int, seed: int = 0, workers: int = 1) -> float:
    """Mean Perron root of random reciprocal matrices over the 17-value Saaty scale.

    Samples are drawn with numpy's PCG64 in blocks of 1000; block ``k`` uses
    the ``k``-th child of ``SeedSequence(seed)``, and block sums are added in
    block order, so the result does not depend on ``workers``.
    """
    if n < 3:
        raise ValueError("random index needs n >= 3")
    if samples < 1:
        raise ValueError("need at least one sample")
    sizes = [RANDOM_INDEX_BLOCK] * (samples // RANDOM_INDEX_BLOCK)
    if samples % RANDOM_INDEX_BLOCK:
        sizes.append(samples % RANDOM_INDEX_BLOCK)
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    if workers > 1 and len(sizes) > 1:
        with ProcessPoolExecutor(workers) as pool:
            sums = list(pool.map(_random_block, [n] * len(sizes), sizes, children))
    else:
        sums = [_random_block(n, size, child) for size, child in zip(sizes, children)]
    total = 0.0
    for s in sums:
        total += s
    return total / samples
