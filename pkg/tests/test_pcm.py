import math
import random
from fractions import Fraction

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_pattern, union_find_connected
from loplab.pcm import (DagPattern, GeneralPcm, LogWeights, OrdinalPcm, ParseError, Weights,
                        elementwise_power, is_weakly_connected, linear_order_permutation, ordinal_intensity,
                        parse_matrix, parse_pattern, pattern_of, permute, preference_edges, realize,
                        render_matrix, render_pattern, upper_positions)


def test_upper_positions_row_major():
    assert upper_positions(4) == [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]


def test_pattern_id_roundtrip_and_bit_order():
    p = DagPattern(4, [(1, 2), (3, 4)])
    assert p.pattern_id == 0b100001
    assert DagPattern.from_id(4, p.pattern_id) == p


@pytest.mark.parametrize("edges", [[(2, 1)], [(1, 1)], [(1, 5)]])
def test_pattern_rejects_non_topological_edges(edges):
    with pytest.raises(ValueError):
        DagPattern(4, edges)


def test_n_one_rejected():
    with pytest.raises(ValueError):
        DagPattern(1)
    with pytest.raises(ValueError):
        GeneralPcm(1)


def test_ordinal_needs_b_above_one():
    with pytest.raises(ValueError):
        OrdinalPcm(DagPattern(2, [(1, 2)]), 1)


def test_realize_entries(reversal7):
    a = realize(OrdinalPcm(reversal7, 2))
    assert a.get(0, 1) == 2 and a.get(1, 0) == Fraction(1, 2)
    assert a.get(0, 2) is None
    assert a.get(3, 3) == 1
    assert len(a.upper) == 11


def test_general_pcm_is_read_only():
    a = GeneralPcm(3, {(0, 1): 2.0})
    with pytest.raises(TypeError):
        a.upper[(0, 2)] = 3.0


def test_from_array_nan_missing():
    arr = np.array([[1, 2, np.nan], [0.5, 1, 4], [np.nan, 0.25, 1]])
    a = GeneralPcm.from_array(arr)
    assert a.missing_positions() == [(0, 2)]
    np.testing.assert_array_equal(np.isnan(a.to_array()), np.isnan(arr))


def test_from_array_rejects_non_reciprocal():
    with pytest.raises(ValueError):
        GeneralPcm.from_array(np.array([[1, 2], [0.4, 1]]))


def test_weights_invariants():
    w = Weights.normalized([1, 2, 3])
    assert abs(w.values.sum() - 1) <= 1e-12
    with pytest.raises(ValueError):
        Weights(np.array([0.5, 0.5, 0.0]))
    with pytest.raises(ValueError):
        Weights(np.array([0.5, 0.6]))
    with pytest.raises(ValueError):
        w.values[0] = 1.0


def test_log_weights_sum_zero():
    lw = LogWeights([Fraction(1, 2), Fraction(-1, 2)])
    assert lw.common_denominator == 2 and lw.numerators() == [1, -1]
    with pytest.raises(ValueError):
        LogWeights([Fraction(1), Fraction(1)])


def test_connectivity_examples():
    assert not is_weakly_connected(realize(OrdinalPcm(DagPattern(4), 2)))
    assert is_weakly_connected(realize(OrdinalPcm(DagPattern(4, [(1, 2), (2, 3), (3, 4)]), 2)))
    assert not is_weakly_connected(realize(OrdinalPcm(DagPattern(4, [(1, 2), (3, 4)]), 2)))


def test_connectivity_against_union_find():
    rng = random.Random(7)
    for _ in range(500):
        n = rng.randint(2, 8)
        p = random_pattern(rng, n, rng.choice([0.15, 0.3, 0.5]))
        assert is_weakly_connected(realize(OrdinalPcm(p, 3))) == union_find_connected(n, p.edges)


def test_linear_order_identity_for_patterns(reversal7):
    assert linear_order_permutation(realize(OrdinalPcm(reversal7, 2)), 2) == tuple(range(7))


def test_linear_order_three_cycle():
    cyc = GeneralPcm(3, {(0, 1): 2, (1, 2): 2, (0, 2): Fraction(1, 2)})
    assert linear_order_permutation(cyc, 2) is None


def test_linear_order_reversed_chain_matches_topological_sort():
    n = 5
    chain = GeneralPcm(n, {(i, i + 1): Fraction(1, 3) for i in range(n - 1)})
    sigma = linear_order_permutation(chain, 3)
    g = nx.DiGraph([(j + 1, i + 1) for i, j in chain.upper])
    assert [v + 1 for v in sigma] == list(nx.lexicographical_topological_sort(g))
    relabeled = permute(chain, sigma)
    assert all(v == 3 for v in relabeled.upper.values())


def test_linear_order_random_relabelings():
    rng = random.Random(11)
    for _ in range(200):
        n = rng.randint(2, 7)
        p = random_pattern(rng, n)
        perm = list(range(n))
        rng.shuffle(perm)
        shuffled = permute(realize(OrdinalPcm(p, 2)), perm)
        sigma = linear_order_permutation(shuffled, 2)
        assert sigma is not None
        back = permute(shuffled, sigma)
        assert all(v == 2 for v in back.upper.values())
        g = nx.DiGraph()
        g.add_nodes_from(range(n))
        g.add_edges_from((i - 1, j - 1) for i, j in preference_edges(shuffled, 2))
        assert nx.is_directed_acyclic_graph(g)


def test_pattern_of_and_intensity(reversal7):
    a = realize(OrdinalPcm(reversal7, 5))
    assert ordinal_intensity(a) == 5
    assert pattern_of(a, 5) == reversal7
    assert ordinal_intensity(GeneralPcm(3, {(0, 1): 2, (1, 2): 3})) is None


def test_preference_edges_rejects_other_values():
    with pytest.raises(ValueError):
        preference_edges(GeneralPcm(3, {(0, 1): 2, (1, 2): 3}), 2)


def test_elementwise_power_maps_b3_to_b4(family_b3, family_b4):
    h = math.log(4) / math.log(3)
    powered = elementwise_power(family_b3, h)
    np.testing.assert_allclose(np.nan_to_num(powered.to_array()), np.nan_to_num(family_b4.to_array()),
                               rtol=1e-12)


def test_elementwise_power_rejects_non_positive():
    with pytest.raises(ValueError):
        elementwise_power(GeneralPcm(2, {(0, 1): 2.0}), 0)


@pytest.mark.parametrize("h", [0.5, 2, 3])
def test_elementwise_power_inverse(h):
    rng = np.random.default_rng(3)
    for _ in range(50):
        n = int(rng.integers(2, 7))
        upper = {(i, j): float(np.exp(rng.normal())) for i in range(n) for j in range(i + 1, n)
                 if rng.random() < 0.6}
        a = GeneralPcm(n, upper)
        back = elementwise_power(elementwise_power(a, h), 1 / h)
        for pos, value in a.upper.items():
            assert abs(float(back.upper[pos]) - value) <= 1e-12 * max(1.0, value)


def test_example_layout_parses():
    text = "1 * 2 3\n* 1 1/2 *\n1/2 2 1 4\n1/3 * 1/4 1\n"
    a = parse_matrix(text)
    assert a.n == 4
    assert a.missing_positions() == [(0, 1), (1, 3)]
    assert len(a.missing_positions()) * 2 == 4


def test_parse_render_roundtrip_canonical():
    text = "1 * 2 3\n* 1 1/2 *\n1/2 2 1 4\n1/3 * 1/4 1\n"
    assert render_matrix(parse_matrix(text)) == text


def test_decimal_below_diagonal_replaced_by_exact_reciprocal():
    a = parse_matrix("1 0.3\n3.3333333333 1\n")
    assert a.get(1, 0) == 1 / 0.3


@pytest.mark.parametrize("text", [
    "1 2\n3 1\n",            # not reciprocal
    "2 2\n1/2 1\n",          # bad diagonal
    "1 2 3\n1/2 1\n",        # ragged
    "1 -2\n-1/2 1\n",        # non-positive
    "1 *\n1/2 1\n",          # one-sided missing
    "1 x\n1 1\n",            # junk
])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_matrix(text)


def test_pattern_text_roundtrip(reversal7):
    assert parse_pattern(render_pattern(reversal7)) == reversal7
    with pytest.raises(ParseError):
        parse_pattern("3\n2 1\n")
    with pytest.raises(ParseError):
        parse_pattern("")


fractions = st.fractions(min_value=Fraction(1, 30), max_value=30, max_denominator=30)


@settings(max_examples=150, deadline=None)
@given(st.integers(2, 6).flatmap(lambda n: st.tuples(
    st.just(n), st.lists(st.one_of(st.none(), fractions), min_size=n * (n - 1) // 2,
                         max_size=n * (n - 1) // 2))))
def test_rational_roundtrip_property(case):
    n, values = case
    upper = {pos: v for pos, v in zip([(i - 1, j - 1) for i, j in upper_positions(n)], values)
             if v is not None}
    a = GeneralPcm(n, upper)
    text = render_matrix(a)
    assert parse_matrix(text) == a
    assert render_matrix(parse_matrix(text)) == text


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 7).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, (1 << (n * (n - 1) // 2)) - 1))))
def test_realize_then_linear_order_is_identity(case):
    n, pid = case
    p = DagPattern.from_id(n, pid)
    assert linear_order_permutation(realize(OrdinalPcm(p, 2)), 2) == tuple(range(n))
    assert is_weakly_connected(realize(OrdinalPcm(p, 2))) == union_find_connected(n, p.edges)
