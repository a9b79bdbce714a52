"""A family of DAGs on which the LLSM order reversal between 1 and 2 grows without bound.

Vertices 1 and 2 plus ``m`` clusters ``C_1..C_m`` of ``k`` vertices each;
``C_i = {(i-1)k + 3, ..., ik + 2}``. Edges: 1 -> 2, 1 -> C_m, 2 -> C_1 and
C_i -> C_{i+1} (complete bipartite between consecutive clusters).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .pcm import DagPattern
from .rational import solve_with_zero_sum


@dataclass(frozen=True)
class FamilyParams:
    k: int
    m: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"cluster size k must be >= 1, got {self.k}")
        if self.m < 2:
            raise ValueError(f"cluster count m must be >= 2, got {self.m}")

    @property
    def n(self) -> int:
        return self.k * self.m + 2

    @property
    def edge_count(self) -> int:
        return 1 + 2 * self.k + (self.m - 1) * self.k ** 2

    def cluster(self, i: int) -> range:
        """Vertices of cluster ``i`` (1-based), 1-indexed."""
        return range((i - 1) * self.k + 3, i * self.k + 3)


def generate_family(p: FamilyParams) -> DagPattern:
    edges = [(1, 2)]
    edges += [(1, v) for v in p.cluster(p.m)]
    edges += [(2, v) for v in p.cluster(1)]
    for i in range(1, p.m):
        edges += [(u, v) for u in p.cluster(i) for v in p.cluster(i + 1)]
    return DagPattern(p.n, edges)


def family_gap_closed_form(p: FamilyParams) -> Fraction:
    """(y_1 - y_2) / log b for the family member."""
    k, m = p.k, p.m
    return Fraction(-k * k * (m - 1) + 2 * k + m - 1, k * k + 2 * k + m - 1)


def reduced_system(p: FamilyParams) -> tuple[list[list[int]], list[int]]:
    """Per-vertex normal equations after collapsing each cluster to one unknown.

    Unknowns are ordered ``y_1, y_2, y_C1, ..., y_Cm``.
    """
    k, m = p.k, p.m
    size = m + 2
    c = lambda i: i + 1  # column of y_Ci  # noqa: E731
    rows, rhs = [], []

    def equation(coeffs: dict[int, int], value: int) -> None:
        row = [0] * size
        for col, coef in coeffs.items():
            row[col] += coef
        rows.append(row)
        rhs.append(value)

    equation({0: k + 1, 1: -1, c(m): -k}, k + 1)
    equation({1: k + 1, 0: -1, c(1): -k}, k - 1)
    equation({c(1): k + 1, 1: -1, c(2): -k}, k - 1)
    for i in range(2, m):
        equation({c(i): 2 * k, c(i - 1): -k, c(i + 1): -k}, 0)
    equation({c(m): k + 1, 0: -1, c(m - 1): -k}, -(k + 1))
    return rows, rhs


def family_gap_via_reduced_system(p: FamilyParams) -> Fraction:
    rows, rhs = reduced_system(p)
    # the zero-sum constraint counts every cluster unknown k times
    y = solve_with_zero_sum(rows, rhs, weights=[1, 1] + [p.k] * p.m)
    return y[0] - y[1]
