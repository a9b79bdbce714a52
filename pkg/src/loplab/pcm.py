"""Pairwise comparison matrices, DAG comparison patterns and their text formats.

Vertices are 1-indexed in patterns, reports and text I/O. Matrix positions
inside :class:`GeneralPcm` are 0-indexed, like the numpy arrays they map to.
"""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

Number = Union[int, float, Fraction]

RECIPROCITY_TOL = 1e-9
WEIGHT_SUM_TOL = 1e-12


class NotConnected(ValueError):
    """The comparison graph is not weakly connected, so weights are not unique."""


class ParseError(ValueError):
    pass


def upper_positions(n: int) -> list[tuple[int, int]]:
    """Upper-triangular positions (1-indexed) in canonical row-major order."""
    return [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]


@dataclass(frozen=True)
class DagPattern:
    """A DAG on vertices 1..n in topological labeling: every edge (i, j) has i < j.

    Edge (i, j) means alternative i is preferred to alternative j.
    """

    n: int
    edges: tuple[tuple[int, int], ...]

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()):
        if n < 2:
            raise ValueError(f"need at least 2 vertices, got n={n}")
        normalized = set()
        for i, j in edges:
            i, j = int(i), int(j)
            if not (1 <= i < j <= n):
                raise ValueError(f"edge ({i}, {j}) must satisfy 1 <= i < j <= {n}")
            normalized.add((i, j))
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "edges", tuple(sorted(normalized)))

    @property
    def pattern_id(self) -> int:
        """Bit k is set iff the k-th upper-triangular position (row-major) is an edge."""
        index = {pos: k for k, pos in enumerate(upper_positions(self.n))}
        return sum(1 << index[e] for e in self.edges)

    @classmethod
    def from_id(cls, n: int, pattern_id: int) -> "DagPattern":
        positions = upper_positions(n)
        if not 0 <= pattern_id < (1 << len(positions)):
            raise ValueError(f"pattern id {pattern_id} out of range for n={n}")
        return cls(n, [pos for k, pos in enumerate(positions) if pattern_id >> k & 1])

    def out_minus_in(self) -> list[int]:
        """Out-degree minus in-degree of every vertex (0-indexed list)."""
        rho = [0] * self.n
        for i, j in self.edges:
            rho[i - 1] += 1
            rho[j - 1] -= 1
        return rho

    def undirected_adjacency(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in self.edges:
            adj[i - 1].append(j - 1)
            adj[j - 1].append(i - 1)
        return adj

    def is_weakly_connected(self) -> bool:
        return _connected(self.undirected_adjacency())


@dataclass(frozen=True)
class OrdinalPcm:
    pattern: DagPattern
    b: Number

    def __post_init__(self):
        if not self.b > 1:
            raise ValueError(f"preference intensity must exceed 1, got b={self.b}")


@dataclass(frozen=True)
class GeneralPcm:
    """Incomplete positive reciprocal matrix.

    Only the strictly upper triangle is stored (0-indexed ``(i, j)`` with
    ``i < j``); the lower triangle is the exact reciprocal and the diagonal is 1.
    """

    n: int
    upper: Mapping[tuple[int, int], Number] = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"need at least 2 alternatives, got n={self.n}")
        clean = {}
        for (i, j), value in self.upper.items():
            if not (0 <= i < j < self.n):
                raise ValueError(f"position ({i}, {j}) is not strictly upper triangular")
            if not value > 0 or (isinstance(value, float) and not math.isfinite(value)):
                raise ValueError(f"entry ({i + 1}, {j + 1}) must be positive and finite")
            clean[(i, j)] = value
        object.__setattr__(self, "upper", MappingProxyType(clean))

    @classmethod
    def from_array(cls, a: np.ndarray, tol: float = RECIPROCITY_TOL) -> "GeneralPcm":
        """Build from a square array using NaN for missing entries."""
        a = np.asarray(a, dtype=float)
        n = a.shape[0]
        if a.shape != (n, n):
            raise ValueError("matrix must be square")
        upper = {}
        for i in range(n):
            if a[i, i] != 1:
                raise ValueError(f"diagonal entry ({i + 1}, {i + 1}) must be 1")
            for j in range(i + 1, n):
                x, y = a[i, j], a[j, i]
                if np.isnan(x) != np.isnan(y):
                    raise ValueError(f"entries ({i + 1}, {j + 1}) and ({j + 1}, {i + 1}) must be missing together")
                if np.isnan(x):
                    continue
                if x <= 0 or y <= 0:
                    raise ValueError(f"entry ({i + 1}, {j + 1}) must be positive")
                if abs(x * y - 1) > tol:
                    raise ValueError(f"entries ({i + 1}, {j + 1}) and ({j + 1}, {i + 1}) are not reciprocal")
                upper[(i, j)] = float(x)
        return cls(n, upper)

    def get(self, i: int, j: int) -> Number | None:
        if i == j:
            return 1
        if i < j:
            return self.upper.get((i, j))
        value = self.upper.get((j, i))
        return None if value is None else _reciprocal(value)

    def is_known(self, i: int, j: int) -> bool:
        return i == j or (min(i, j), max(i, j)) in self.upper

    @property
    def is_complete(self) -> bool:
        return len(self.upper) == self.n * (self.n - 1) // 2

    def missing_positions(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.n) for j in range(i + 1, self.n) if (i, j) not in self.upper]

    def to_array(self) -> np.ndarray:
        a = np.full((self.n, self.n), np.nan)
        np.fill_diagonal(a, 1.0)
        for (i, j), value in self.upper.items():
            a[i, j] = float(value)
            a[j, i] = 1.0 / float(value)
        return a

    def with_entries(self, extra: Mapping[tuple[int, int], Number]) -> "GeneralPcm":
        merged = dict(self.upper)
        merged.update(extra)
        return GeneralPcm(self.n, merged)

    def neighbours(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for i, j in self.upper:
            adj[i].append(j)
            adj[j].append(i)
        return adj


@dataclass(frozen=True)
class Weights:
    """Strictly positive weight vector normalized to sum 1."""

    values: np.ndarray

    def __post_init__(self):
        w = np.array(self.values, dtype=float)
        if w.ndim != 1 or w.size < 2:
            raise ValueError("weights must be a vector of length >= 2")
        if not np.all(w > 0):
            raise ValueError("weights must be strictly positive")
        if abs(w.sum() - 1) > WEIGHT_SUM_TOL:
            raise ValueError(f"weights must sum to 1, got {w.sum()!r}")
        w.flags.writeable = False
        object.__setattr__(self, "values", w)

    @classmethod
    def normalized(cls, raw: Sequence[float] | np.ndarray) -> "Weights":
        w = np.asarray(raw, dtype=float)
        return cls(w / w.sum())

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, k):
        return self.values[k]


@dataclass(frozen=True)
class LogWeights:
    """Exact coefficients ``c`` with log-weights ``y_i = c_i * log b`` and sum(c) == 0."""

    coeffs: tuple[Fraction, ...]

    def __post_init__(self):
        c = tuple(Fraction(x) for x in self.coeffs)
        if sum(c) != 0:
            raise ValueError("log-weight coefficients must sum to 0")
        object.__setattr__(self, "coeffs", c)

    def __len__(self) -> int:
        return len(self.coeffs)

    def __getitem__(self, k):
        return self.coeffs[k]

    @property
    def common_denominator(self) -> int:
        return math.lcm(*(c.denominator for c in self.coeffs))

    def numerators(self) -> list[int]:
        d = self.common_denominator
        return [int(c * d) for c in self.coeffs]

    def to_weights(self, b: float) -> Weights:
        y = np.array([float(c) for c in self.coeffs]) * math.log(b)
        return Weights.normalized(np.exp(y - y.max()))


def _reciprocal(value: Number) -> Number:
    if isinstance(value, (int, Fraction)):
        return 1 / Fraction(value)
    return 1.0 / value


def _connected(adj: list[list[int]]) -> bool:
    seen = {0}
    queue = deque([0])
    while queue:
        u = queue.popleft()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return len(seen) == len(adj)


def realize(pcm: OrdinalPcm) -> GeneralPcm:
    b = Fraction(pcm.b) if isinstance(pcm.b, int) else pcm.b
    return GeneralPcm(pcm.pattern.n, {(i - 1, j - 1): b for i, j in pcm.pattern.edges})


def is_weakly_connected(pcm: GeneralPcm) -> bool:
    return _connected(pcm.neighbours())


def _matches(value: Number, target: Number) -> bool:
    if isinstance(value, float) or isinstance(target, float):
        return math.isclose(float(value), float(target), rel_tol=RECIPROCITY_TOL)
    return Fraction(value) == Fraction(target)


def preference_edges(pcm: GeneralPcm, b: Number) -> list[tuple[int, int]]:
    """Directed edges (1-indexed) of an ordinal matrix: (i, j) whenever a_ij == b.

    Raises ValueError if a known entry is neither b nor 1/b.
    """
    if not b > 1:
        raise ValueError(f"preference intensity must exceed 1, got b={b}")
    edges = []
    for (i, j), value in sorted(pcm.upper.items()):
        if _matches(value, b):
            edges.append((i + 1, j + 1))
        elif _matches(value, _reciprocal(b)):
            edges.append((j + 1, i + 1))
        else:
            raise ValueError(f"entry ({i + 1}, {j + 1}) = {value} is not b={b} or 1/b")
    return edges


def linear_order_permutation(pcm: GeneralPcm, b: Number) -> tuple[int, ...] | None:
    """Permutation ``sigma`` (0-indexed) with ``c_ij = a[sigma[i], sigma[j]]`` = b above the diagonal.

    Kahn's algorithm, always taking the smallest available vertex, so an
    already sorted matrix yields the identity. None if the preferences cycle.
    """
    n = pcm.n
    succ: list[list[int]] = [[] for _ in range(n)]
    indeg = [0] * n
    for i, j in preference_edges(pcm, b):
        succ[i - 1].append(j - 1)
        indeg[j - 1] += 1
    ready = [v for v in range(n) if indeg[v] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        u = heapq.heappop(ready)
        order.append(u)
        for v in succ[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                heapq.heappush(ready, v)
    return tuple(order) if len(order) == n else None


def permute(pcm: GeneralPcm, sigma: Sequence[int]) -> GeneralPcm:
    """Matrix ``c_ij = a[sigma[i], sigma[j]]``."""
    upper = {}
    for i in range(pcm.n):
        for j in range(i + 1, pcm.n):
            value = pcm.get(sigma[i], sigma[j])
            if value is not None:
                upper[(i, j)] = value
    return GeneralPcm(pcm.n, upper)


def pattern_of(pcm: GeneralPcm, b: Number) -> DagPattern:
    """The DAG pattern of an ordinal matrix that is already in topological labeling."""
    edges = preference_edges(pcm, b)
    if any(i > j for i, j in edges):
        raise ValueError("matrix is not in topological labeling; permute it first")
    return DagPattern(pcm.n, edges)


def ordinal_intensity(pcm: GeneralPcm) -> Number | None:
    """The common b > 1 if every known entry is b or 1/b, else None."""
    b = None
    for value in pcm.upper.values():
        candidate = value if value > 1 else (_reciprocal(value) if value < 1 else None)
        if candidate is None:
            return None
        if b is None:
            b = candidate
        elif not _matches(candidate, b):
            return None
    return b


def elementwise_power(pcm: GeneralPcm, h: float) -> GeneralPcm:
    if not h > 0:
        raise ValueError(f"exponent must be positive, got h={h}")
    if h == 1:
        return pcm
    upper = {}
    for pos, value in pcm.upper.items():
        if isinstance(h, int) and isinstance(value, (int, Fraction)):
            upper[pos] = Fraction(value) ** h
        else:
            upper[pos] = float(value) ** h
    return GeneralPcm(pcm.n, upper)


# ---------------------------------------------------------------------------
# text formats


def _parse_entry(token: str) -> Number | None:
    if token == "*":
        return None
    try:
        if "/" in token:
            num, den = token.split("/")
            return Fraction(int(num), int(den))
        if any(ch in token for ch in ".eE") or token.lower() in ("inf", "nan"):
            return float(token)
        return Fraction(int(token))
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad matrix entry {token!r}") from exc


def _format_entry(value: Number) -> str:
    if isinstance(value, (int, Fraction)):
        value = Fraction(value)
        return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
    return repr(float(value))


def parse_matrix(text: str) -> GeneralPcm:
    """Parse whitespace-separated rows; entries are decimals, ``p/q`` fractions or ``*``."""
    rows = [line.split() for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#")]
    n = len(rows)
    if n < 2:
        raise ParseError("matrix needs at least 2 rows")
    for k, row in enumerate(rows):
        if len(row) != n:
            raise ParseError(f"row {k + 1} has {len(row)} entries, expected {n}")
    cells = [[_parse_entry(tok) for tok in row] for row in rows]
    upper = {}
    for i in range(n):
        if cells[i][i] is None or cells[i][i] != 1:
            raise ParseError(f"diagonal entry ({i + 1}, {i + 1}) must be 1")
        for j in range(i + 1, n):
            x, y = cells[i][j], cells[j][i]
            if (x is None) != (y is None):
                raise ParseError(f"entries ({i + 1}, {j + 1}) and ({j + 1}, {i + 1}) must be missing together")
            if x is None:
                continue
            if x <= 0 or y <= 0 or not math.isfinite(x) or not math.isfinite(y):
                raise ParseError(f"entries ({i + 1}, {j + 1}) and ({j + 1}, {i + 1}) must be positive and finite")
            if abs(float(x) * float(y) - 1) > RECIPROCITY_TOL:
                raise ParseError(f"entries ({i + 1}, {j + 1}) = {x} and ({j + 1}, {i + 1}) = {y} are not reciprocal")
            upper[(i, j)] = x
    return GeneralPcm(n, upper)


def render_matrix(pcm: GeneralPcm) -> str:
    rows = []
    for i in range(pcm.n):
        cells = []
        for j in range(pcm.n):
            value = pcm.get(i, j)
            cells.append("*" if value is None else _format_entry(value))
        rows.append(" ".join(cells))
    return "\n".join(rows) + "\n"


def parse_pattern(text: str) -> DagPattern:
    """First line ``n``, then one ``i j`` edge per line (1-indexed, i < j)."""
    lines = [line.split() for line in text.splitlines() if line.strip() and not line.lstrip().startswith("#")]
    if not lines or len(lines[0]) != 1:
        raise ParseError("pattern must start with a line holding n")
    try:
        n = int(lines[0][0])
        edges = []
        for parts in lines[1:]:
            if len(parts) != 2:
                raise ParseError(f"bad edge line {' '.join(parts)!r}")
            edges.append((int(parts[0]), int(parts[1])))
    except ValueError as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(str(exc)) from exc
    try:
        return DagPattern(n, edges)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc


def render_pattern(pattern: DagPattern) -> str:
    return "\n".join([str(pattern.n)] + [f"{i} {j}" for i, j in pattern.edges]) + "\n"


def render_dot(pattern: DagPattern, name: str = "G") -> str:
    lines = [f"digraph {name} {{"]
    lines += [f"  {v};" for v in range(1, pattern.n + 1)]
    lines += [f"  {i} -> {j};" for i, j in pattern.edges]
    lines.append("}")
    return "\n".join(lines) + "\n"
