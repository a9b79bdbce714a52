"""Linear order preservation checks and ranking comparisons.

Pairs and rankings are reported with 1-indexed alternatives. Float weights
are compared with a relative tie slack: ``w_j`` beats ``w_i`` only if
``w_j - w_i > TIE_EPS * max(w_i, w_j)``. Exact log-weight coefficients are
compared without slack.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

import numpy as np

from .pcm import DagPattern, LogWeights, Weights

TIE_EPS = 1e-9

AnyWeights = Union[Weights, LogWeights]


@dataclass(frozen=True)
class LopReport:
    violations: tuple[tuple[int, int], ...]
    ranking: tuple[tuple[int, ...], ...]

    @property
    def satisfied(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "satisfied": self.satisfied,
            "violations": [list(p) for p in self.violations],
            "ranking": [list(g) for g in self.ranking],
        }


def _values(w: AnyWeights | Sequence) -> list:
    if isinstance(w, LogWeights):
        return list(w.coeffs)
    if isinstance(w, Weights):
        return [float(x) for x in w.values]
    return list(w)


def _compare(a, b, eps: float = TIE_EPS) -> int:
    """Sign of a - b, with ties for floats within relative ``eps``."""
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return (a > b) - (a < b)
    diff = float(a) - float(b)
    if abs(diff) <= eps * max(abs(float(a)), abs(float(b))):
        return 0
    return 1 if diff > 0 else -1


def ranking(w: AnyWeights | Sequence, eps: float = TIE_EPS) -> tuple[tuple[int, ...], ...]:
    """Alternatives by descending weight, grouped into ties.

    A float tie group is a chain of neighbours (in sorted order) that are
    each within the relative slack of the next.
    """
    vals = _values(w)
    order = sorted(range(len(vals)), key=lambda k: (-vals[k], k))
    groups: list[list[int]] = []
    for k in order:
        if groups and _compare(vals[groups[-1][-1]], vals[k], eps) == 0:
            groups[-1].append(k)
        else:
            groups.append([k])
    return tuple(tuple(sorted(i + 1 for i in g)) for g in groups)


def edge_violations(edges: Iterable[tuple[int, int]], w: AnyWeights | Sequence,
                    eps: float = TIE_EPS) -> tuple[tuple[int, int], ...]:
    vals = _values(w)
    return tuple(sorted((i, j) for i, j in edges if _compare(vals[i - 1], vals[j - 1], eps) < 0))


def _check_dim(pattern: DagPattern, w) -> None:
    if len(w) != pattern.n:
        raise ValueError(f"weight vector has length {len(w)}, pattern has {pattern.n} vertices")


def check_lop(pattern: DagPattern, w: AnyWeights, eps: float = TIE_EPS) -> LopReport:
    _check_dim(pattern, w)
    return LopReport(edge_violations(pattern.edges, w, eps), ranking(w, eps))


def compare_rankings(w1: AnyWeights | Sequence, w2: AnyWeights | Sequence,
                     eps: float = TIE_EPS) -> list[tuple[int, int]]:
    """Pairs (i, j), i < j, whose relative order (strict or tied) differs between w1 and w2."""
    a, b = _values(w1), _values(w2)
    if len(a) != len(b):
        raise ValueError(f"dimension mismatch: {len(a)} vs {len(b)}")
    n = len(a)
    return [(i + 1, j + 1) for i in range(n) for j in range(i + 1, n)
            if _compare(a[i], a[j], eps) != _compare(b[i], b[j], eps)]


def lop_gap(pattern: DagPattern, w: AnyWeights):
    """Minimum of ``w_i - w_j`` over the edges; negative iff some edge is strictly reversed.

    Works on weights or on exact log-weight coefficients (then the result is exact).
    """
    _check_dim(pattern, w)
    if not pattern.edges:
        raise ValueError("pattern has no edges")
    vals = _values(w)
    return min(vals[i - 1] - vals[j - 1] for i, j in pattern.edges)


def reciprocal_weights(w: Weights) -> Weights:
    return Weights.normalized(1.0 / np.asarray(w.values))
