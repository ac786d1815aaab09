"""Acceptance criteria, one test per criterion, at their stated tolerances.

Each test prints one PASS/FAIL line (visible with -s or in captured output).
Criterion 8's d=1 sub-check carries a strict xfail: the deviation of the
closed-form integral ratio from 1/2 at n = 10^4 is exactly
1/(4 log n) - 1/(4 n^2 log n) = 0.027142, which exceeds the stated 0.02
window for every implementation; the remaining dimensions pass.
"""

import math
import time

import pytest

from bwbounds import PrecisionContext, named_fixture, parse_exponents
from bwbounds.selftest import (
    bound_sweep,
    check_beta_oracle,
    check_bw_validation,
    check_combinatorics,
    check_golden_scan,
    check_integral_ratio,
    check_lemma_dist_sweep,
    check_lower_growth,
    check_resonance_mechanism,
    check_sandwich,
    check_sum_vs_integral_grid,
    check_upper_growth,
)
from bwbounds.asymptotics import integral_I


@pytest.fixture(scope="module")
def ctx():
    return PrecisionContext()


@pytest.fixture(scope="module")
def sweeps(ctx):
    golden = named_fixture("golden")
    pair = parse_exponents("sqrt2m1,sqrt3m1")
    t0 = time.time()
    d1 = bound_sweep(golden, range(2, 21), ctx)
    d2 = bound_sweep(pair, range(2, 9), ctx)
    elapsed = time.time() - t0
    print(f"\n[info] bound sweeps d=1 n=2..20 and d=2 n=2..8 took {elapsed:.1f}s")
    assert elapsed < 300, "criterion 3 runtime budget exceeded"
    return d1, d2


def report(result):
    print(f"[{'PASS' if result.passed else 'FAIL'}] {result.name}: "
          f"{result.detail} ({result.seconds:.2f}s)")
    return result


def test_criterion_1_combinatorics_exact():
    r = report(check_combinatorics(max_n=6, max_d=4))
    assert r.passed, r.detail
    assert r.seconds < 1.0


def test_criterion_2_beta_oracle():
    r = report(check_beta_oracle(max_n=3))
    assert r.passed, r.detail
    assert r.seconds < 10.0


def test_criterion_3_sandwich(sweeps):
    r = report(check_sandwich(list(sweeps)))
    assert r.passed, r.detail


def test_criterion_4_upper_growth(sweeps):
    d1, d2 = sweeps
    r = report(
        check_upper_growth(d1, d2, range(5, 13), range(13, 21), range(3, 7), range(7, 9))
    )
    assert r.passed, r.detail


def test_criterion_5_lower_growth(ctx):
    r = report(check_lower_growth(ctx, n_values=(30, 40, 50, 75, 100)))
    assert r.passed, r.detail


def test_criterion_6_resonance_mechanism(ctx):
    r = report(check_resonance_mechanism(ctx, golden_Q=10_000))
    assert r.passed, r.detail


def test_criterion_7_distance_product_sweep(ctx):
    r = report(check_lemma_dist_sweep(ctx, count=10_000))
    assert r.passed, r.detail
    assert r.seconds < 30.0


def test_criterion_8_integral_ratio(ctx):
    r = report(check_integral_ratio(ctx, n=10_000, dims=(2, 3, 4)))
    assert r.passed, r.detail


@pytest.mark.xfail(
    strict=True,
    reason="the d=1 ratio deviation at n=10^4 is 1/(4 log n) = 0.0271 > 0.02 "
    "for the exact closed form; unattainable as stated",
)
def test_criterion_8_integral_ratio_d1_window(ctx):
    n = 10**4
    ratio = float(integral_I(n, 1, ctx)) / (n**2 * math.log(n))
    dev = abs(ratio - 0.5)
    print(f"[FAIL] integral_ratio_d1_window: deviation {dev:.6f} > 0.02")
    assert dev <= 0.02


def test_criterion_9_sum_vs_integral(ctx):
    r = report(check_sum_vs_integral_grid(ctx, dims=(1, 2, 3), ns=(10, 100, 1000)))
    assert r.passed, r.detail


def test_criterion_10_growth_validation(ctx):
    r = report(check_bw_validation(ctx, n_polys=100, n_points=20))
    assert r.passed, r.detail


def test_criterion_11_golden_scan(ctx):
    r = report(check_golden_scan(ctx, Q=10_000))
    assert r.passed, r.detail
    assert r.seconds < 30.0
