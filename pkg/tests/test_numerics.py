"""Interval arithmetic and log-domain magnitude tests."""

import math

import numpy as np
import pytest
from gmpy2 import mpfr, mpq

from bwbounds import LogMagnitude, PrecisionContext, RealInterval, interval_field, log_sum
from bwbounds.errors import PrecisionExhausted
from bwbounds.numerics import certify_sign, exact_abs, exact_neg


def test_log_sum_small_integers():
    f = interval_field(256)
    vals = [LogMagnitude.from_interval(f, f.make(2)), LogMagnitude.from_interval(f, f.make(3))]
    out = log_sum(vals, f)
    assert out.sign == 1
    assert out.value.contains(f.make(6).lo) or abs(float(f.mid(out.value)) - math.log(6)) < 1e-70
    assert float(f.mid(out.value)) == pytest.approx(math.log(6), abs=1e-15)


def test_log_sum_empty_product():
    f = interval_field(256)
    out = log_sum([], f)
    assert not out.is_zero
    assert out.sign == 1
    assert out.value.lo == 0 == out.value.hi


def test_log_sum_thousand_halves_direct_product_oracle():
    # direct product at 4096 bits: 0.5^1000 = 2^-1000 exactly
    f = interval_field(256)
    big = interval_field(4096)
    half = LogMagnitude.from_interval(f, f.make(mpq(1, 2)))
    out = log_sum([half] * 1000, f)
    direct = big.near.exp(big.near.mul(1000, big.near.log(mpfr("0.5", precision=4096))))
    assert float(direct) == pytest.approx(2.0**-1000)
    target = big.near.mul(-1000, big.near.log(mpfr(2, precision=4096)))
    assert out.value.lo <= target <= out.value.hi


def test_log_sum_zero_sentinel():
    f = interval_field(128)
    vals = [LogMagnitude.from_interval(f, f.make(2)), LogMagnitude.ZERO]
    assert log_sum(vals, f).is_zero


def test_log_sum_signs():
    f = interval_field(128)
    neg = LogMagnitude.from_interval(f, f.make(-3))
    pos = LogMagnitude.from_interval(f, f.make(2))
    assert log_sum([neg, pos], f).sign == -1
    assert log_sum([neg, neg], f).sign == 1


def test_outward_rounding_product_contains_exact():
    f = interval_field(96)
    big = interval_field(512)
    rng = np.random.default_rng(42)
    for _ in range(200):
        a = mpq(int(rng.integers(-(2**50), 2**50)), int(rng.integers(1, 2**50)))
        b = mpq(int(rng.integers(-(2**50), 2**50)), int(rng.integers(1, 2**50)))
        prod = f.mul(f.make(a), f.make(b))
        exact = big.near.mul(big.near.add(mpfr(0), a), big.near.add(mpfr(0), b))
        assert prod.lo <= exact <= prod.hi


def test_log_sum_many_terms_relative_error():
    bits = 256
    f = interval_field(bits)
    big = interval_field(4 * bits)
    rng = np.random.default_rng(7)
    k = 10_000
    terms = []
    log_direct = mpfr(0, precision=4 * bits)
    for _ in range(k):
        v = mpq(int(rng.integers(1, 2**30)), int(rng.integers(1, 2**30)))
        terms.append(LogMagnitude.from_interval(f, f.make(v)))
        log_direct = big.near.add(log_direct, big.near.log(big.make(v).lo))
    out = log_sum(terms, f)
    err = abs(float(f.mid(out.value) - log_direct))
    scale = max(1.0, abs(float(log_direct)))
    assert err / scale <= k * 2.0 ** (1 - bits)
    # the enclosure contains the high-precision reference (comparison is exact)
    assert out.value.lo <= log_direct <= out.value.hi


def test_interval_sign_and_division_guard():
    f = interval_field(128)
    straddle = RealInterval(mpfr(-1), mpfr(1))
    assert straddle.sign() == 0
    with pytest.raises(ZeroDivisionError):
        f.div(f.make(1), straddle)


def test_square_of_straddling_interval_is_nonnegative():
    f = interval_field(128)
    sq = f.square(RealInterval(mpfr(-2), mpfr(3)))
    assert sq.lo >= 0
    assert sq.hi >= 9


def test_trig_enclosures_contain_true_values():
    f = interval_field(128)
    big = interval_field(512)
    for val in (0.0, 0.5, 1.7, 3.14159, 100.25, -7.3):
        exact = mpq(int(val * 2**40), 2**40)
        iv = f.make(exact)
        c, s = f.cos(iv), f.sin(iv)
        ref_c = big.near.cos(big.make(exact).lo)
        ref_s = big.near.sin(big.make(exact).lo)
        assert c.lo <= ref_c <= c.hi
        assert s.lo <= ref_s <= s.hi
        assert -1 <= float(c.lo) and float(c.hi) <= 1


def test_exact_neg_and_abs_keep_precision():
    x = mpfr("0.123456789012345678901234567890123456789", precision=256)
    assert exact_neg(x).precision == 256
    assert mpq(exact_neg(x)) == -mpq(x)
    assert mpq(exact_abs(exact_neg(x))) == mpq(x)


def test_escalation_resolves_tiny_signs():
    ctx = PrecisionContext(mantissa_bits=64, max_escalations=4)
    tiny = mpq(1, 2**200)

    def evaluate(bits):
        f = interval_field(bits)
        # 1 + tiny - 1 straddles zero until the precision covers 200 bits
        return f.sub(f.add(f.make(1), f.make(tiny)), f.make(1))

    assert certify_sign(evaluate, ctx) == 1


def test_escalation_raises_definitively_on_exact_zero():
    ctx = PrecisionContext(mantissa_bits=64, max_escalations=2)

    def evaluate(bits):
        f = interval_field(bits)
        return f.sub(f.make(1), f.make(1))

    with pytest.raises(PrecisionExhausted):
        certify_sign(evaluate, ctx)


def test_precision_context_rejects_small_mantissa():
    with pytest.raises(ValueError):
        PrecisionContext(mantissa_bits=32)
