"""Nearest-integer scans, the W statistic, and Liouville fixtures."""

import math

import pytest
from gmpy2 import mpfr, mpq

from bwbounds import (
    IndependenceViolation,
    PrecisionContext,
    ResonanceRecord,
    TowerOverflow,
    liouville_fixture,
    nearest_int_dist,
    parse_exponents,
    scan,
    w_statistic,
)
from bwbounds.diophantine import (
    _nearest_int_exact,
    liouville_steps,
    liouville_tower,
)
from bwbounds.numerics import RealInterval
from bwbounds.errors import PrecisionExhausted


def test_nearest_int_dist_trivial(ctx):
    f = ctx.field
    p, dist = nearest_int_dist(f.make(mpq(23, 10)), f)
    assert p == 2 and float(f.mid(dist)) == pytest.approx(0.3)
    p, dist = nearest_int_dist(f.make(mpq(-17, 10)), f)
    assert p == -2 and float(f.mid(dist)) == pytest.approx(0.3)
    p, dist = nearest_int_dist(f.make(5), f)
    assert p == 5 and float(dist.hi) == 0.0


def test_nearest_int_dist_clips_at_half(ctx):
    f = ctx.field
    _, dist = nearest_int_dist(f.make(mpq(1, 2)), f)
    assert float(dist.hi) <= 0.5


def test_nearest_int_dist_rejects_wide_interval(ctx):
    f = ctx.field
    wide = RealInterval(mpfr(0), mpfr(1))
    with pytest.raises(PrecisionExhausted):
        nearest_int_dist(wide, f)


def test_scan_rational_violation(ctx):
    with pytest.raises(IndependenceViolation) as err:
        scan(parse_exponents("1/2"), 2, "all", ctx)
    assert abs(err.value.q[0]) == 2


def test_scan_rational_violation_at_denominator(ctx):
    # any rational p/q trips once the scan reaches its denominator
    with pytest.raises(IndependenceViolation):
        scan(parse_exponents("3/7"), 7, "all", ctx)
    profile = scan(parse_exponents("3/7"), 6, "all", ctx)
    assert len(profile.records) == 6


def test_scan_golden_minima_match_fibonacci(ctx, golden):
    profile = scan(golden, 1000, "all", ctx)
    runs = [r.norm for r in profile.running_minima()]
    fib = [1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233, 377, 610, 987]
    assert runs == fib
    for rec in profile.running_minima():
        if rec.norm >= 5:
            v = float(rec.dist.hi) * rec.norm
            assert 0.44 <= v <= 0.51


def test_scan_d2_minima_match_doubled_precision_oracle(root_pair):
    ctx = PrecisionContext()
    big = PrecisionContext(mantissa_bits=512)
    a = scan(root_pair, 25, "all", ctx)
    b = scan(root_pair, 25, "all", big)
    for ra, rb in zip(a.records, b.records):
        assert ra.q == rb.q and ra.p == rb.p
        assert float(ra.dist.hi) == pytest.approx(float(rb.dist.hi), rel=1e-12)
    assert float(a.mu_hat) >= 2.0  # Dirichlet floor for d = 2


def test_scan_nonneg_cone_minima_dominate_all_cone(root_pair, ctx):
    allc = scan(root_pair, 20, "all", ctx)
    nn = scan(root_pair, 20, "nonneg", ctx)
    for ra, rn in zip(allc.records, nn.records):
        assert float(rn.dist.hi) >= float(ra.dist.lo) - 1e-30


def test_scan_mu_hat_monotone_in_depth(ctx, golden):
    mus = [float(scan(golden, Q, "all", ctx).mu_hat) for Q in (10, 50, 200)]
    assert mus[0] <= mus[1] <= mus[2]


def test_dirichlet_sanity(ctx, golden):
    # for every Q some q <= Q has <q x> < 1/Q
    for Q in (5, 20, 100, 500):
        profile = scan(golden, Q, "all", ctx)
        best = min(float(r.dist.hi) for r in profile.records)
        assert best < 1.0 / Q


def test_scan_ties_break_lexicographically(ctx, golden):
    profile = scan(golden, 5, "all", ctx)
    # <q x> = <-q x>, so the lex-smaller (negative) member wins every tie
    for rec in profile.records:
        assert rec.q[0] < 0


def test_w_statistic_formula(ctx):
    f = ctx.field
    rec = ResonanceRecord(
        q=(2,), p=0, dist=f.exp(f.make(-16)), norm=2
    )
    val = w_statistic(rec, 1, f)
    assert float(val) == pytest.approx(16.0 / (4 * math.log(2)), rel=1e-12)


def test_w_statistic_worst_case_small(ctx):
    f = ctx.field
    rec = ResonanceRecord(q=(3,), p=1, dist=f.make(mpq(1, 2)), norm=3)
    val = w_statistic(rec, 1, f)
    assert 0 < float(val) <= math.log(2) / (9 * math.log(3)) + 1e-12


def test_w_statistic_rejects_unit_norm(ctx):
    f = ctx.field
    rec = ResonanceRecord(q=(1,), p=1, dist=f.make(mpq(1, 3)), norm=1)
    with pytest.raises(ValueError):
        w_statistic(rec, 1, f)


def test_w_statistic_liouville_fixture_tail(ctx):
    # <4x> for liouville(2,3) is the exact k >= 2 tail, 2^-62 (1 + 2^-65472)
    x = liouville_fixture(2, 3)
    profile = scan(x, 8, "nonneg", ctx)
    rec = profile.record_at(4)
    assert float(rec.w_stat) > 1
    assert float(rec.w_stat) == pytest.approx(62 / 32, rel=1e-6)


def test_liouville_tower_and_budget():
    assert liouville_tower(3) == [2, 64, 65536]
    with pytest.raises(TowerOverflow):
        liouville_tower(4)


def test_liouville_fixture_k1_is_rational():
    x = liouville_fixture(2, 1)
    assert x.entries[0] == mpq(1, 4)
    with pytest.raises(IndependenceViolation):
        scan(x, 4, "all", PrecisionContext())


def test_liouville_fixture_k2_exact_distance():
    x = liouville_fixture(2, 2)
    assert x.entries[0] == mpq(1, 4) + mpq(1, 2**64)
    p, dist = _nearest_int_exact(4 * x.entries[0])
    assert p == 1 and dist == mpq(1, 2**62)


def test_liouville_fixture_k3_tail_certificate():
    steps = liouville_steps(2, 3)
    step2 = steps[1]
    assert step2["q"] == 2**64
    # <2^64 x> equals the k = 3 tail, certified below 2^-(a_3 - 65)
    assert step2["dist"] == mpq(2**64, 2**65536)
    assert step2["dist"] < mpq(1, 2 ** (65536 - 65))


def test_scan_sets_q_checked(ctx):
    x = parse_exponents("sqrt2m1")
    assert x.q_checked == 0
    scan(x, 50, "all", ctx)
    assert x.q_checked == 50
    scan(x, 20, "nonneg", ctx)  # nonneg cone must not extend the certificate
    assert x.q_checked == 50


def test_profile_csv_shape(ctx, golden):
    profile = scan(golden, 10, "all", ctx)
    rows = profile.csv_rows()
    assert len(rows) == 10
    header = profile.csv_header(1)
    assert header == ["norm", "q1", "p", "dist_lo", "dist_hi", "w_stat"]
    assert rows[0][-1] == ""  # no W statistic at norm 1
