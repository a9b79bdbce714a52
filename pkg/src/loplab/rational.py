"""Gaussian elimination over the rationals."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence


DENSE_LIMIT = 40


class SingularSystem(ArithmeticError):
    pass


def _as_int(v) -> int | None:
    if isinstance(v, int):
        return v
    if isinstance(v, Fraction) and v.denominator == 1:
        return v.numerator
    return None


def _solve_integer(a: list[list[int]], n: int) -> list[Fraction]:
    # fraction-free (Bareiss) elimination; every division below is exact
    prev = 1
    for col in range(n):
        pivot = max(range(col, n), key=lambda r: abs(a[r][col]))
        if a[pivot][col] == 0:
            raise SingularSystem(f"no pivot in column {col}")
        a[col], a[pivot] = a[pivot], a[col]
        prow = a[col]
        p = prow[col]
        for r in range(col + 1, n):
            row = a[r]
            f = row[col]
            for k in range(col + 1, n + 1):
                row[k] = (p * row[k] - f * prow[k]) // prev
            row[col] = 0
        prev = p
    x = [Fraction(0)] * n
    for r in range(n - 1, -1, -1):
        row = a[r]
        acc = Fraction(row[n])
        for k in range(r + 1, n):
            if row[k]:
                acc -= row[k] * x[k]
        x[r] = acc / row[r]
    return x


def _solve_sparse(matrix: Sequence[Sequence], rhs: Sequence, n: int) -> list[Fraction]:
    # rows as {column: value}; only nonzeros are touched, so banded systems stay cheap
    rows = [{k: Fraction(v) for k, v in enumerate(row) if v} for row in matrix]
    b = [Fraction(r) for r in rhs]
    by_col: dict[int, set[int]] = {}
    for r, row in enumerate(rows):
        for k in row:
            by_col.setdefault(k, set()).add(r)
    order = []
    done: set[int] = set()
    for col in range(n):
        candidates = [r for r in by_col.get(col, ()) if r not in done]
        if not candidates:
            raise SingularSystem(f"no pivot in column {col}")
        pivot = max(candidates, key=lambda r: (abs(rows[r][col]), -r))
        done.add(pivot)
        order.append(pivot)
        prow, pval = rows[pivot], rows[pivot][col]
        for r in candidates:
            if r == pivot:
                continue
            row = rows[r]
            factor = row[col] / pval
            for k, v in prow.items():
                new = row.get(k, 0) - factor * v
                if new:
                    if k not in row:
                        by_col.setdefault(k, set()).add(r)
                    row[k] = new
                else:
                    row.pop(k, None)
                    by_col[k].discard(r)
            b[r] -= factor * b[pivot]
    x = [Fraction(0)] * n
    for col in range(n - 1, -1, -1):
        r = order[col]
        row = rows[r]
        acc = b[r] - sum(v * x[k] for k, v in row.items() if k != col)
        x[col] = acc / row[col]
    return x


def solve(matrix: Sequence[Sequence], rhs: Sequence) -> list[Fraction]:
    """Solve ``matrix @ x = rhs`` exactly, pivoting on the largest absolute value.

    Small integer systems use fraction-free elimination; larger ones use
    sparse rational elimination.
    """
    n = len(matrix)
    if len(rhs) != n or any(len(row) != n for row in matrix):
        raise ValueError("system must be square")
    if n > DENSE_LIMIT:
        return _solve_sparse(matrix, rhs, n)
    ints = [[_as_int(v) for v in row] + [_as_int(r)] for row, r in zip(matrix, rhs)]
    if all(None not in row for row in ints):
        return _solve_integer(ints, n)
    a = [[Fraction(v) for v in row] + [Fraction(r)] for row, r in zip(matrix, rhs)]
    for col in range(n):
        pivot = max(range(col, n), key=lambda r: abs(a[r][col]))
        if a[pivot][col] == 0:
            raise SingularSystem(f"no pivot in column {col}")
        a[col], a[pivot] = a[pivot], a[col]
        prow = a[col]
        inv = 1 / prow[col]
        for r in range(col + 1, n):
            row = a[r]
            factor = row[col] * inv
            if factor:
                for k in range(col, n + 1):
                    row[k] -= factor * prow[k]
    x = [Fraction(0)] * n
    for r in range(n - 1, -1, -1):
        acc = a[r][n] - sum(a[r][k] * x[k] for k in range(r + 1, n))
        x[r] = acc / a[r][r]
    return x


def solve_with_zero_sum(matrix: Sequence[Sequence], rhs: Sequence, weights: Sequence | None = None) -> list[Fraction]:
    """Solve a rank-deficient system whose kernel is the all-ones direction.

    The last unknown is eliminated through ``sum(weights[i] * x[i]) == 0``,
    the last equation is dropped, and afterwards checked against the solution.
    """
    n = len(matrix)
    weights = [1] * n if weights is None else list(weights)
    last = n - 1
    wl = weights[last]
    # substitute x_last = -sum_{i<last} weights[i] x_i / wl and clear the denominator
    reduced = [[row[k] * wl - row[last] * weights[k] for k in range(last)] for row in matrix[:last]]
    head = solve(reduced, [r * wl for r in rhs[:last]])
    x_last = -sum(w * v for w, v in zip(weights, head)) / Fraction(wl)
    x = head + [x_last]
    check = sum(matrix[last][k] * x[k] for k in range(n))
    if check != rhs[last]:
        raise SingularSystem("dropped equation is not satisfied; system is inconsistent")
    return x
