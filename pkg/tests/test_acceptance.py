"""Acceptance gate: one PASS/FAIL line per criterion, each at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -s`` (the lines are printed even without ``-s``).
"""

import math
import random
import time
from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import minimize, minimize_scalar

from conftest import load_matrix, load_pattern, random_connected_pattern
from loplab.em import em_complete, em_weights
from loplab.family import (FamilyParams, family_gap_closed_form, family_gap_via_reduced_system,
                           generate_family)
from loplab.llsm import llsm_exact, llsm_float, llsm_log_weights
from loplab.lop import check_lop, compare_rankings, ranking
from loplab.pcm import GeneralPcm, OrdinalPcm, Weights, elementwise_power, realize
from loplab.search import SearchTask, default_workers, run_search

FAMILY_EM_B3 = (0.2404, 0.2442, 0.1481, 0.1481, 0.0729, 0.0729, 0.0367, 0.0367)
FAMILY_EM_B4 = (0.2828, 0.2656, 0.1404, 0.1404, 0.0594, 0.0594, 0.0260, 0.0260)


@pytest.fixture
def verdict(capsys):
    def emit(label: str, ok: bool, detail: str = "") -> None:
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {label}: {detail}")
        assert ok, f"criterion {label} failed: {detail}"
    return emit


def frac(nums, den):
    return tuple(Fraction(x, den) for x in nums)


def test_criterion_1_exact_llsm_seven(verdict):
    p = load_pattern("reversal7.pattern")
    coeffs = llsm_exact(p)
    best = math.inf
    for _ in range(50):
        start = time.perf_counter()
        llsm_exact(p)
        best = min(best, time.perf_counter() - start)
    exact = coeffs.coeffs == frac([34, 36, 24, 1, -14, -42, -39], 49)
    verdict("1", exact and best < 1e-3,
            f"coefficients {coeffs.numerators()}/{coeffs.common_denominator}, best runtime {best * 1e3:.3f} ms")


def test_criterion_2_exact_llsm_eight(verdict):
    a = llsm_exact(load_pattern("reversal8a.pattern"))
    b = llsm_exact(load_pattern("reversal8b.pattern"))
    ok = (a.coeffs == frac([95, 103, 43, 43, -17, -65, -113, -89], 128)
          and b.coeffs == frac([71, 95, 47, -1, 7, -53, -53, -113], 128))
    verdict("2", ok, f"a = {a.numerators()}/{a.common_denominator}, b = {b.numerators()}/{b.common_denominator}")


def test_criterion_3_em_b3(verdict):
    w = em_weights(load_matrix("family_k2_m3_b3.matrix"))
    err = float(np.max(np.abs(w.values - FAMILY_EM_B3)))
    verdict("3", err <= 5e-5 and w[0] < w[1], f"max deviation {err:.2e}, w1 = {w[0]:.6f} < w2 = {w[1]:.6f}")


def test_criterion_4_em_b4(verdict):
    w3 = em_weights(load_matrix("family_k2_m3_b3.matrix"))
    w4 = em_weights(load_matrix("family_k2_m3_b4.matrix"))
    err = float(np.max(np.abs(w4.values - FAMILY_EM_B4)))
    flips = compare_rankings(w3, w4)
    verdict("4", err <= 5e-5 and w4[0] > w4[1] and flips == [(1, 2)],
            f"max deviation {err:.2e}, w1 = {w4[0]:.6f} > w2 = {w4[1]:.6f}, flips {flips}")


@pytest.mark.slow
def test_criterion_5_llsm_minimality(verdict):
    workers = default_workers()
    small = {n: run_search(SearchTask(n), workers=workers) for n in range(2, 7)}
    seven = run_search(SearchTask(7), workers=workers, chunk_bits=18)
    summary = seven.summary()
    example = load_pattern("reversal7.pattern").pattern_id
    ok = (all(not r.hits for r in small.values()) and small[6].scanned == 32768
          and len(seven.hits) >= 10 and seven.min_edge_count == 11
          and example in {h.pattern_id for h in seven.hits})
    verdict("5", ok, f"n = 2..6 hits {[len(r.hits) for r in small.values()]} "
                     f"(n = 6 scanned {small[6].scanned}); n = 7 labeled hits {summary['hits']}, "
                     f"isomorphism classes {summary['isomorphism_classes']}, "
                     f"min edges {summary['min_edge_count']}, example found {example in {h.pattern_id for h in seven.hits}}")


@pytest.mark.slow
def test_criterion_6_eight_vertices_ten_edges(verdict):
    result = run_search(SearchTask(8, edge_count_range=(10, 10)), workers=default_workers(), chunk_bits=20)
    ids = {h.pattern_id for h in result.hits}
    a = load_pattern("reversal8a.pattern").pattern_id
    b = load_pattern("reversal8b.pattern").pattern_id
    summary = result.summary()
    verdict("6", a in ids and b in ids,
            f"{summary['hits']} labeled hits ({summary['isomorphism_classes']} classes) among "
            f"{summary['connected']} connected 10-edge patterns; a found {a in ids}, b found {b in ids}")


def test_criterion_7a_three_way_agreement(verdict):
    bad = []
    for k in range(1, 6):
        for m in range(2, 9):
            p = FamilyParams(k, m)
            c = llsm_exact(generate_family(p))
            if not family_gap_closed_form(p) == family_gap_via_reduced_system(p) == c[0] - c[1]:
                bad.append((k, m))
    verdict("7a", not bad, f"closed form = reduced system = full solve on 35 (k, m) pairs; mismatches {bad}")


def test_criterion_7b_signs(verdict):
    values = {km: family_gap_closed_form(FamilyParams(*km)) for km in ((2, 2), (3, 2), (2, 3))}
    ok = values[(2, 2)] > 0 and values[(3, 2)] < 0 and values[(2, 3)] < 0
    verdict("7b", ok, ", ".join(f"(k, m) = {km}: {v}" for km, v in values.items()))


def test_criterion_7c_k2_m1000(verdict):
    p = FamilyParams(2, 1000)
    value = family_gap_closed_form(p)
    solved = family_gap_via_reduced_system(p)
    verdict("7c", value == solved and value < -100,
            f"k = 2, m = 1000 gives {value} ~ {float(value):.4f} (reduced system {solved}); required < -100")


def test_criterion_8_scaling_and_ranking(verdict):
    rng = random.Random(2024)
    worst, rank_mismatch = 0.0, 0
    for _ in range(1000):
        p = random_connected_pattern(rng, rng.randint(2, 7), rng.choice([0.3, 0.5, 0.8]))
        base = realize(OrdinalPcm(p, 2))
        y = llsm_log_weights(base)
        for h in (0.5, 2, 3):
            worst = max(worst, float(np.max(np.abs(llsm_log_weights(elementwise_power(base, h)) - h * y))))
        rankings = {ranking(llsm_float(realize(OrdinalPcm(p, b)))) for b in (2, 3, 9)}
        rank_mismatch += len(rankings) != 1
    verdict("8", worst <= 1e-10 and rank_mismatch == 0,
            f"max scaling deviation {worst:.2e} over h in (0.5, 2, 3); patterns with b-dependent ranking {rank_mismatch}")


@pytest.mark.slow
def test_criterion_9a_em_six_vertices_five_edges(verdict):
    result = run_search(SearchTask(6, method="em", edge_count_range=(5, 5)), workers=default_workers(),
                        chunk_bits=12)
    verdict("9a", len(result.hits) >= 1,
            f"{len(result.hits)} reversal hits among {result.connected} connected 5-edge patterns "
            f"({result.scanned} with 5 edges), b grid 2..9")


@pytest.mark.slow
def test_criterion_9b_em_up_to_five_vertices(verdict):
    hits = {n: len(run_search(SearchTask(n, method="em"), workers=default_workers(), chunk_bits=8).hits)
            for n in range(2, 6)}
    verdict("9b", all(v == 0 for v in hits.values()), f"hits per n {hits}")


def _llsm_descent(a: GeneralPcm) -> np.ndarray:
    pairs = [(i, j, math.log(v)) for (i, j), v in a.upper.items()]

    def f(z):
        y = np.append(z, 0.0)
        return sum((lv - (y[i] - y[j])) ** 2 for i, j, lv in pairs)

    return np.append(minimize(f, np.zeros(a.n - 1), method="BFGS", options={"gtol": 1e-12}).x, 0.0)


def _golden(a: GeneralPcm) -> float:
    (i, j), = a.missing_positions()
    base = np.nan_to_num(a.to_array(), nan=1.0)

    def lam(t):
        m = base.copy()
        m[i, j], m[j, i] = math.exp(t), math.exp(-t)
        return max(np.linalg.eigvals(m).real)

    return float(minimize_scalar(lam, bracket=(-10.0, 0.0, 10.0), method="golden", tol=1e-12).fun)


def test_criterion_10_solver_properties(verdict):
    rng = random.Random(10)
    nrng = np.random.default_rng(10)
    lam_ok = mono_ok = True
    worst_resid = literal_resid = 0.0
    for _ in range(100):
        p = random_connected_pattern(rng, rng.randint(3, 7), rng.choice([0.3, 0.5, 0.7]))
        res = em_complete(realize(OrdinalPcm(p, rng.choice([2, 3, 5, 9]))))
        h = res.history
        lam_ok &= res.lambda_max >= p.n - 1e-12
        mono_ok &= all(h[k + 1] <= h[k] + 1e-13 * h[k] for k in range(len(h) - 1))
        worst_resid = max(worst_resid, res.stationarity)
        w = res.perron.w.values
        for (i, j), x in res.filled.items():
            literal_resid = max(literal_resid, abs(x * w[j] / w[i] - 1))

    oracle_llsm = 0.0
    for _ in range(100):
        n = rng.randint(2, 4)
        p = random_connected_pattern(rng, n)
        a = GeneralPcm(n, {(i - 1, j - 1): float(np.exp(nrng.normal())) for i, j in p.edges})
        y, z = llsm_log_weights(a), _llsm_descent(a)
        oracle_llsm = max(oracle_llsm, float(np.max(np.abs(np.subtract.outer(y, y) - np.subtract.outer(z, z)))))

    oracle_em = 0.0
    for _ in range(100):
        n = int(nrng.integers(3, 5))
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        drop = pairs[int(nrng.integers(len(pairs)))]
        a = GeneralPcm(n, {q: float(np.exp(nrng.normal())) for q in pairs if q != drop})
        oracle_em = max(oracle_em, abs(em_complete(a).lambda_max - _golden(a)))

    uniform_ok = True
    for _ in range(100):
        p = random_connected_pattern(rng, rng.randint(2, 8))
        uniform_ok &= check_lop(p, Weights.normalized(np.ones(p.n))).satisfied

    ok = (lam_ok and mono_ok and worst_resid <= 1e-8 and oracle_llsm <= 1e-6 and oracle_em <= 1e-8
          and uniform_ok)
    verdict("10", ok, f"lambda >= n {lam_ok}, monotone {mono_ok}, completion residual {worst_resid:.1e} "
                      f"(ratio residual |x w_j / w_i - 1| {literal_resid:.2e}, informational), "
                      f"LLSM oracle {oracle_llsm:.1e}, golden oracle {oracle_em:.1e}, uniform LOP {uniform_ok}")
