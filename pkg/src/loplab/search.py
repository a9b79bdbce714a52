"""Exhaustive search over labeled DAG comparison patterns.

A pattern on ``n`` vertices is an integer id whose bit ``k`` marks the
``k``-th upper-triangular position in row-major order as a known comparison.
The id space ``[0, 2**(n(n-1)/2))`` is cut into contiguous chunks; each chunk
is filtered (edge count, weak connectedness) and solved in numpy batches.

LLSM: a float pre-screen flags patterns with an edge gap below 1e-6, and
only those are re-solved in exact rational arithmetic. EM: every candidate is
completed for each intensity in the b grid and the rankings are compared.

Chunks can run in worker processes. Each finished chunk is journaled as a
``done <start_id> <end_id>`` line (half-open range) after its hits are
appended to the output file, so an interrupted run resumes where it stopped.
"""

from __future__ import annotations

import itertools
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from . import jsonfmt
from .em import em_weights
from .llsm import llsm_exact
from .lop import compare_rankings, edge_violations
from .pcm import DagPattern, OrdinalPcm, realize, upper_positions

log = logging.getLogger(__name__)

SCREEN_GAP = 1e-6
DEFAULT_B_GRID = tuple(range(2, 10))
DEFAULT_CHUNK_BITS = 16


@dataclass(frozen=True)
class SearchTask:
    n: int
    method: str = "llsm"
    edge_count_range: tuple[int, int] | None = None
    b_values: tuple = DEFAULT_B_GRID
    require_connected: bool = True
    edges_only: bool = False

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"need n >= 2, got {self.n}")
        if self.method not in ("llsm", "em"):
            raise ValueError(f"method must be 'llsm' or 'em', got {self.method!r}")
        if any(not b > 1 for b in self.b_values):
            raise ValueError("all b values must exceed 1")
        if self.method == "em" and len(self.b_values) < 2:
            raise ValueError("EM reversal search needs at least two b values")

    @property
    def id_count(self) -> int:
        return 1 << (self.n * (self.n - 1) // 2)


@dataclass
class SearchHit:
    pattern_id: int
    n: int
    edges: list
    violations: list = field(default_factory=list)
    coeffs: list | None = None
    weights: dict | None = None
    flipped: list = field(default_factory=list)
    method: str = "llsm"

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    @property
    def pattern(self) -> DagPattern:
        return DagPattern(self.n, [tuple(e) for e in self.edges])

    def to_dict(self) -> dict:
        d = {"method": self.method, "pattern_id": self.pattern_id, "n": self.n,
             "edge_count": self.edge_count, "edges": [list(e) for e in self.edges],
             "violations": [list(p) for p in self.violations]}
        if self.coeffs is not None:
            d["coeffs"] = [str(c) for c in self.coeffs]
        if self.weights is not None:
            d["b_values"] = list(self.weights)
            d["weights"] = {str(b): list(w) for b, w in self.weights.items()}
            d["flipped"] = [list(p) for p in self.flipped]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SearchHit":
        weights = None
        if "weights" in d:
            weights = {b: d["weights"][str(b)] for b in d["b_values"]}
        coeffs = [Fraction(c) for c in d["coeffs"]] if "coeffs" in d else None
        return cls(d["pattern_id"], d["n"], [tuple(e) for e in d["edges"]],
                   [tuple(p) for p in d["violations"]], coeffs, weights,
                   [tuple(p) for p in d.get("flipped", [])], d["method"])


@dataclass
class SearchResult:
    task: SearchTask
    hits: list
    scanned: int = 0
    connected: int = 0

    @property
    def min_edge_count(self) -> int | None:
        return min((h.edge_count for h in self.hits), default=None)

    def summary(self) -> dict:
        return {"n": self.task.n, "method": self.task.method, "scanned": self.scanned,
                "connected": self.connected, "hits": len(self.hits),
                "min_edge_count": self.min_edge_count,
                "isomorphism_classes": len({canonical_id(h.pattern) for h in self.hits})}


# ---------------------------------------------------------------------------
# vectorized pattern machinery


def _positions0(n: int) -> tuple[np.ndarray, np.ndarray]:
    pos = upper_positions(n)
    return np.array([i - 1 for i, _ in pos]), np.array([j - 1 for _, j in pos])


def _bits(ids: np.ndarray, npos: int) -> np.ndarray:
    return ((ids[:, None] >> np.arange(npos, dtype=np.int64)) & 1).astype(bool)


def _popcount(ids: np.ndarray, npos: int) -> np.ndarray:
    if hasattr(np, "bitwise_count"):
        return np.bitwise_count(ids)
    count = np.zeros(ids.shape, dtype=np.int64)
    for k in range(npos):
        count += (ids >> k) & 1
    return count


def _connected_mask(bits: np.ndarray, n: int) -> np.ndarray:
    I, J = _positions0(n)
    reach = np.zeros((len(bits), n, n), dtype=np.float32)
    reach[:, I, J] = bits
    reach[:, J, I] = bits
    reach[:, np.arange(n), np.arange(n)] = 1
    steps = 1
    while steps < n - 1:
        reach = (reach @ reach > 0).astype(np.float32)
        steps *= 2
    return reach[:, 0, :].all(axis=1)


def candidate_ids(n: int, start: int, stop: int, edge_count_range=None,
                  require_connected: bool = True) -> tuple[np.ndarray, int]:
    """Ids in ``[start, stop)`` passing the filters, and how many passed the edge filter."""
    npos = n * (n - 1) // 2
    ids = np.arange(start, stop, dtype=np.int64)
    if edge_count_range is not None:
        lo, hi = edge_count_range
        pc = _popcount(ids, npos)
        ids = ids[(pc >= lo) & (pc <= hi)]
    scanned = len(ids)
    if require_connected and len(ids):
        ids = ids[_connected_mask(_bits(ids, npos), n)]
    return ids, scanned


def enumerate_patterns(n: int, edge_count_range=None, require_connected: bool = False) -> Iterator[DagPattern]:
    """Every subset of the upper-triangular positions, in ascending id order, after filters."""
    total = 1 << (n * (n - 1) // 2)
    step = 1 << DEFAULT_CHUNK_BITS
    for start in range(0, total, step):
        ids, _ = candidate_ids(n, start, min(total, start + step), edge_count_range, require_connected)
        for pid in ids.tolist():
            yield DagPattern.from_id(n, pid)


def llsm_float_batch(bits: np.ndarray, n: int) -> np.ndarray:
    """Mean-zero LLSM coefficients (units of log b) for a batch of connected patterns."""
    I, J = _positions0(n)
    batch = len(bits)
    f = bits.astype(float)
    L = np.ones((batch, n, n))  # the all-ones shift makes the connected Laplacian invertible
    L[:, I, J] -= f
    L[:, J, I] -= f
    incidence = np.zeros((len(I), n))
    incidence[np.arange(len(I)), I] = 1
    incidence[np.arange(len(I)), J] = -1
    degree = f @ np.abs(incidence)
    L[:, np.arange(n), np.arange(n)] += degree
    rho = f @ incidence
    return np.linalg.solve(L, rho[..., None])[..., 0]


def _llsm_chunk(task: SearchTask, ids: np.ndarray) -> list[SearchHit]:
    n = task.n
    npos = n * (n - 1) // 2
    if not len(ids):
        return []
    bits = _bits(ids, npos)
    c = llsm_float_batch(bits, n)
    I, J = _positions0(n)
    gaps = np.where(bits, c[:, I] - c[:, J], np.inf)
    flagged = ids[gaps.min(axis=1) < SCREEN_GAP]
    hits = []
    for pid in flagged.tolist():
        pattern = DagPattern.from_id(n, pid)
        coeffs = llsm_exact(pattern)
        bad = edge_violations(pattern.edges, coeffs)
        if bad:
            hits.append(SearchHit(pid, n, list(pattern.edges), list(bad), list(coeffs.coeffs), method="llsm"))
    return hits


def em_flips(pattern: DagPattern, b_values: Sequence, edges_only: bool = False):
    """EM weights per b and the pairs whose relative order differs between some two b values."""
    weights = {b: em_weights(realize(OrdinalPcm(pattern, b))) for b in b_values}
    flipped: set = set()
    for w1, w2 in itertools.combinations(weights.values(), 2):
        flipped.update(compare_rankings(w1, w2))
    if edges_only:
        flipped &= set(pattern.edges)
    return weights, sorted(flipped)


def _em_chunk(task: SearchTask, ids: np.ndarray) -> list[SearchHit]:
    hits = []
    for pid in ids.tolist():
        pattern = DagPattern.from_id(task.n, pid)
        weights, flipped = em_flips(pattern, task.b_values, task.edges_only)
        if flipped:
            violations = sorted({v for w in weights.values() for v in edge_violations(pattern.edges, w)})
            hits.append(SearchHit(pid, task.n, list(pattern.edges), violations,
                                  weights={b: [float(x) for x in w.values] for b, w in weights.items()},
                                  flipped=flipped, method="em"))
    return hits


def scan_chunk(task: SearchTask, start: int, stop: int) -> tuple[int, int, list[SearchHit]]:
    """Solve one id range; returns (scanned, connected, hits)."""
    ids, scanned = candidate_ids(task.n, start, stop, task.edge_count_range, task.require_connected)
    if task.require_connected:
        todo = ids
    else:
        # disconnected patterns have no unique weights; they are counted but never solved
        todo = ids[_connected_mask(_bits(ids, task.n * (task.n - 1) // 2), task.n)] if len(ids) else ids
    hits = _llsm_chunk(task, todo) if task.method == "llsm" else _em_chunk(task, todo)
    return scanned, len(todo), hits


# ---------------------------------------------------------------------------
# journal / resume


def read_journal(path: Path) -> set[tuple[int, int]]:
    done = set()
    if path.exists():
        for line in path.read_text().splitlines():
            parts = line.split()
            if len(parts) == 3 and parts[0] == "done":
                done.add((int(parts[1]), int(parts[2])))
    return done


def read_hits(path: Path) -> list[SearchHit]:
    if not path.exists():
        return []
    return [SearchHit.from_dict(json.loads(line)) for line in path.read_text().splitlines() if line.strip()]


def write_hits(path: Path, hits: Sequence[SearchHit]) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text("".join(jsonfmt.dumps(h.to_dict()) + "\n" for h in hits))
    tmp.replace(path)


def default_workers() -> int:
    env = os.environ.get("LOPLAB_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_search(task: SearchTask, workers: int = 1, out: str | Path | None = None,
               journal: str | Path | None = None, chunk_bits: int = DEFAULT_CHUNK_BITS,
               stop_after: int | None = None) -> SearchResult:
    """Scan every pattern id for ``task``; hits are returned in ascending id order.

    ``journal`` enables resume: chunks already recorded there are not solved
    again and their hits are taken from ``out``. ``stop_after`` stops after
    that many newly solved chunks, which simulates an interrupted run.
    """
    total = task.id_count
    size = 1 << chunk_bits
    chunks = [(s, min(total, s + size)) for s in range(0, total, size)]
    out = Path(out) if out else None
    journal = Path(journal) if journal else None
    done = read_journal(journal) if journal else set()
    if done and out is None:
        raise ValueError("resuming from a journal needs the hit file of the earlier run")

    hits: list[SearchHit] = []
    if done:
        hits = [h for h in read_hits(out) if any(s <= h.pattern_id < e for s, e in done)]
        write_hits(out, hits)
    elif out is not None:
        out.write_text("")
        if journal is not None:
            journal.write_text("")

    result = SearchResult(task, [])
    pending = []
    for s, e in chunks:
        if (s, e) in done:
            ids, scanned = candidate_ids(task.n, s, e, task.edge_count_range, True)
            result.scanned += scanned
            result.connected += len(ids)
        else:
            pending.append((s, e))
    if stop_after is not None:
        pending = pending[:stop_after]

    def record(start, stop, scanned, connected, chunk_hits):
        result.scanned += scanned
        result.connected += connected
        hits.extend(chunk_hits)
        if out is not None:
            with out.open("a") as fh:
                for h in chunk_hits:
                    fh.write(jsonfmt.dumps(h.to_dict()) + "\n")
        if journal is not None:
            with journal.open("a") as fh:
                fh.write(f"done {start} {stop}\n")

    if workers > 1 and len(pending) > 1:
        with ProcessPoolExecutor(workers) as pool:
            futures = [(s, e, pool.submit(scan_chunk, task, s, e)) for s, e in pending]
            for s, e, fut in futures:
                record(s, e, *fut.result())
    else:
        for s, e in pending:
            record(s, e, *scan_chunk(task, s, e))
            log.debug("chunk %d-%d done, %d hits so far", s, e, len(hits))

    hits.sort(key=lambda h: h.pattern_id)
    result.hits = hits
    if out is not None:
        write_hits(out, hits)
    return result


def search_llsm_violations(task: SearchTask, **kwargs) -> list[SearchHit]:
    if task.method != "llsm":
        raise ValueError("task method must be 'llsm'")
    return run_search(task, **kwargs).hits


def search_em_reversals(task: SearchTask, **kwargs) -> list[SearchHit]:
    if task.method != "em":
        raise ValueError("task method must be 'em'")
    return run_search(task, **kwargs).hits


def replay(hit: SearchHit) -> bool:
    """Re-run the recorded method on the recorded pattern and compare the findings."""
    pattern = hit.pattern
    if hit.method == "llsm":
        coeffs = llsm_exact(pattern)
        return list(edge_violations(pattern.edges, coeffs)) == [tuple(p) for p in hit.violations]
    _, flipped = em_flips(pattern, list(hit.weights), edges_only=False)
    recorded = {tuple(p) for p in hit.flipped}
    return bool(recorded) and recorded <= set(flipped)


# ---------------------------------------------------------------------------
# isomorphism classes


def _linear_extensions(n: int, edges: Sequence[tuple[int, int]]) -> Iterator[list[int]]:
    preds = [0] * n
    for i, j in edges:
        preds[j - 1] |= 1 << (i - 1)

    def extend(order: list[int], placed: int):
        if len(order) == n:
            yield order
            return
        for v in range(n):
            if not placed >> v & 1 and preds[v] & ~placed == 0:
                yield from extend(order + [v], placed | 1 << v)

    yield from extend([], 0)


def canonical_id(pattern: DagPattern) -> int:
    """Smallest pattern id over all relabelings that keep the labeling topological.

    Two patterns share a canonical id iff they are isomorphic as DAGs.
    """
    n = pattern.n
    index = {pos: k for k, pos in enumerate(upper_positions(n))}
    best = None
    for order in _linear_extensions(n, pattern.edges):
        new_label = {v: k + 1 for k, v in enumerate(order)}
        pid = 0
        for i, j in pattern.edges:
            pid |= 1 << index[(new_label[i - 1], new_label[j - 1])]
        if best is None or pid < best:
            best = pid
    return best
