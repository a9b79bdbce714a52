import random
from pathlib import Path

import pytest

from loplab.pcm import DagPattern, parse_matrix, parse_pattern, upper_positions

DATA = Path(__file__).parent / "data"


def load_pattern(name: str) -> DagPattern:
    return parse_pattern((DATA / name).read_text())


def load_matrix(name: str):
    return parse_matrix((DATA / name).read_text())


def random_pattern(rng: random.Random, n: int, p: float = 0.5) -> DagPattern:
    return DagPattern(n, [pos for pos in upper_positions(n) if rng.random() < p])


def random_connected_pattern(rng: random.Random, n: int, p: float = 0.5) -> DagPattern:
    while True:
        pattern = random_pattern(rng, n, p)
        if pattern.is_weakly_connected():
            return pattern


def union_find_connected(n: int, edges) -> bool:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in edges:
        parent[find(i - 1)] = find(j - 1)
    return len({find(v) for v in range(n)}) == 1


@pytest.fixture
def reversal7():
    return load_pattern("reversal7.pattern")


@pytest.fixture
def reversal8a():
    return load_pattern("reversal8a.pattern")


@pytest.fixture
def reversal8b():
    return load_pattern("reversal8b.pattern")


@pytest.fixture
def family_b3():
    return load_matrix("family_k2_m3_b3.matrix")


@pytest.fixture
def family_b4():
    return load_matrix("family_k2_m3_b4.matrix")
