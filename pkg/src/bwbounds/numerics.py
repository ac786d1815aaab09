"""Arbitrary-precision scalars, outward-rounded intervals, and log-domain magnitudes.

Every certified quantity in the package is represented as a ``RealInterval``
whose endpoints are MPFR floats (via gmpy2) rounded outward.  Products of many
near-unit factors are carried in the log domain as ``LogMagnitude`` values so
that magnitudes like exp(n^(d+1) log n) never overflow the exponent range.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, replace
from fractions import Fraction

import gmpy2
from gmpy2 import mpfr, mpq

from .errors import PrecisionExhausted

Scalar = mpfr  # an arbitrary-precision real with a huge exponent range

_CTX_OPTS = dict(
    trap_underflow=False,
    trap_overflow=False,
    trap_inexact=False,
    trap_invalid=False,
    trap_erange=False,
    trap_divzero=False,
)


@functools.lru_cache(maxsize=64)
def _gmp_contexts(bits: int):
    down = gmpy2.context(precision=bits, round=gmpy2.RoundDown, **_CTX_OPTS)
    up = gmpy2.context(precision=bits, round=gmpy2.RoundUp, **_CTX_OPTS)
    near = gmpy2.context(precision=bits, round=gmpy2.RoundToNearest, **_CTX_OPTS)
    return down, up, near


def exact_neg(x: mpfr) -> mpfr:
    """Negation at the operand's own precision (always exact).

    Bare ``-x`` and ``abs(x)`` on mpfr round through the thread context, which
    silently truncates high-precision values; certified code must use these
    helpers or an explicit rounding context instead.
    """
    return _gmp_contexts(x.precision)[2].minus(x)


def exact_abs(x: mpfr) -> mpfr:
    return exact_neg(x) if x < 0 else x


@dataclass(frozen=True)
class PrecisionContext:
    """Working precision and escalation policy plus default sampling sizes."""

    mantissa_bits: int = 256
    max_escalations: int = 3
    circle_samples: int = 4096
    torus_samples: int = 4096
    certify_top_k: int = 24
    dim_budget: int = 3000
    seed: int = 2718

    def __post_init__(self):
        if self.mantissa_bits < 64:
            raise ValueError("mantissa_bits must be at least 64")

    def with_bits(self, bits: int) -> "PrecisionContext":
        return replace(self, mantissa_bits=bits)

    def escalation_bits(self):
        """Yield mantissa_bits, then doubled values, max_escalations times."""
        bits = self.mantissa_bits
        for _ in range(self.max_escalations + 1):
            yield bits
            bits *= 2

    @property
    def field(self) -> "IntervalField":
        return interval_field(self.mantissa_bits)


DEFAULT_CONTEXT = PrecisionContext()


class RealInterval:
    """Closed interval [lo, hi] with MPFR endpoints; operations round outward."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo: mpfr, hi: mpfr):
        if lo > hi:
            raise ValueError(f"interval endpoints out of order: [{lo}, {hi}]")
        self.lo = lo
        self.hi = hi

    def __repr__(self):
        return f"RealInterval({self.lo!r}, {self.hi!r})"

    def contains_zero(self) -> bool:
        return self.lo <= 0 <= self.hi

    def sign(self) -> int:
        """+1 or -1 when certified, 0 when the interval straddles zero."""
        if self.lo > 0:
            return 1
        if self.hi < 0:
            return -1
        return 0

    def strictly_positive(self) -> bool:
        return self.lo > 0

    def contains(self, value) -> bool:
        return self.lo <= value <= self.hi

    def encloses(self, other: "RealInterval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi


class IntervalField:
    """Interval operations at a fixed mantissa precision.

    `down`, `up`, and `near` are gmpy2 contexts reused for every operation;
    explicit directed rounding keeps each endpoint a one-sided bound.
    """

    def __init__(self, bits: int):
        self.bits = bits
        self.down, self.up, self.near = _gmp_contexts(bits)

    # ---- construction -------------------------------------------------

    def make(self, value) -> RealInterval:
        """Tight enclosure of an exact value (int, rational, mpfr, or str)."""
        if isinstance(value, RealInterval):
            return value
        if isinstance(value, Fraction):
            value = mpq(value.numerator, value.denominator)
        if isinstance(value, float):
            value = mpfr(value)  # floats are dyadic, hence exact
        lo = mpfr(value, precision=self.bits, context=self.down)
        hi = mpfr(value, precision=self.bits, context=self.up)
        return RealInterval(lo, hi)

    def interval(self, lo, hi) -> RealInterval:
        return RealInterval(
            mpfr(lo, precision=self.bits, context=self.down),
            mpfr(hi, precision=self.bits, context=self.up),
        )

    def zero(self) -> RealInterval:
        z = mpfr(0)
        return RealInterval(z, z)

    def scalar(self, value) -> mpfr:
        if isinstance(value, Fraction):
            value = mpq(value.numerator, value.denominator)
        return mpfr(value, precision=self.bits, context=self.near)

    # ---- arithmetic ----------------------------------------------------

    def add(self, a: RealInterval, b: RealInterval) -> RealInterval:
        return RealInterval(self.down.add(a.lo, b.lo), self.up.add(a.hi, b.hi))

    def sub(self, a: RealInterval, b: RealInterval) -> RealInterval:
        return RealInterval(self.down.sub(a.lo, b.hi), self.up.sub(a.hi, b.lo))

    def neg(self, a: RealInterval) -> RealInterval:
        return RealInterval(exact_neg(a.hi), exact_neg(a.lo))

    def mul(self, a: RealInterval, b: RealInterval) -> RealInterval:
        d, u = self.down, self.up
        lo = min(d.mul(a.lo, b.lo), d.mul(a.lo, b.hi), d.mul(a.hi, b.lo), d.mul(a.hi, b.hi))
        hi = max(u.mul(a.lo, b.lo), u.mul(a.lo, b.hi), u.mul(a.hi, b.lo), u.mul(a.hi, b.hi))
        return RealInterval(lo, hi)

    def div(self, a: RealInterval, b: RealInterval) -> RealInterval:
        if b.contains_zero():
            raise ZeroDivisionError("interval denominator contains zero")
        d, u = self.down, self.up
        lo = min(d.div(a.lo, b.lo), d.div(a.lo, b.hi), d.div(a.hi, b.lo), d.div(a.hi, b.hi))
        hi = max(u.div(a.lo, b.lo), u.div(a.lo, b.hi), u.div(a.hi, b.lo), u.div(a.hi, b.hi))
        return RealInterval(lo, hi)

    def abs(self, a: RealInterval) -> RealInterval:
        if a.lo >= 0:
            return a
        if a.hi <= 0:
            return RealInterval(exact_neg(a.hi), exact_neg(a.lo))
        return RealInterval(mpfr(0), max(exact_neg(a.lo), a.hi))

    def square(self, a: RealInterval) -> RealInterval:
        aa = self.abs(a)
        return RealInterval(self.down.mul(aa.lo, aa.lo), self.up.mul(aa.hi, aa.hi))

    def sqrt(self, a: RealInterval) -> RealInterval:
        if a.lo < 0:
            raise ValueError("sqrt of an interval with negative part")
        return RealInterval(self.down.sqrt(a.lo), self.up.sqrt(a.hi))

    def log(self, a: RealInterval) -> RealInterval:
        if a.lo <= 0:
            raise ValueError("log requires a strictly positive interval")
        return RealInterval(self.down.log(a.lo), self.up.log(a.hi))

    def exp(self, a: RealInterval) -> RealInterval:
        return RealInterval(self.down.exp(a.lo), self.up.exp(a.hi))

    def pow_int(self, a: RealInterval, k: int) -> RealInterval:
        """a**k for k >= 0 by binary powering (interval mul handles signs)."""
        if k < 0:
            raise ValueError("negative exponent")
        result = self.make(1)
        base = a
        while k:
            if k & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            k >>= 1
        return result

    def cos(self, a: RealInterval) -> RealInterval:
        return self._lipschitz_trig(self.down.cos, self.up.cos, a)

    def sin(self, a: RealInterval) -> RealInterval:
        return self._lipschitz_trig(self.down.sin, self.up.sin, a)

    def _lipschitz_trig(self, fn_down, fn_up, a: RealInterval) -> RealInterval:
        # |f(t) - f(a.lo)| <= |t - a.lo| <= w for f in {sin, cos}, so padding
        # the endpoint values by the width is sound at any width; wide inputs
        # just degrade to the trivial enclosure [-1, 1].
        one = mpfr(1)
        neg_one = mpfr(-1)
        w = self.up.sub(a.hi, a.lo)
        if w >= 2:
            return RealInterval(neg_one, one)
        lo = self.down.sub(min(fn_down(a.lo), fn_down(a.hi)), w)
        hi = self.up.add(max(fn_up(a.lo), fn_up(a.hi)), w)
        return RealInterval(max(lo, neg_one), min(hi, one))

    def pi(self) -> RealInterval:
        return RealInterval(self.down.const_pi(), self.up.const_pi())

    def two_pi(self) -> RealInterval:
        p = self.pi()
        return RealInterval(self.down.mul(p.lo, 2), self.up.mul(p.hi, 2))

    # ---- measurements ---------------------------------------------------

    def mid(self, a: RealInterval) -> mpfr:
        return self.near.div(self.near.add(a.lo, a.hi), 2)

    def width(self, a: RealInterval) -> mpfr:
        return self.up.sub(a.hi, a.lo)

    def hull(self, a: RealInterval, b: RealInterval) -> RealInterval:
        return RealInterval(min(a.lo, b.lo), max(a.hi, b.hi))

    def max(self, a: RealInterval, b: RealInterval) -> RealInterval:
        return RealInterval(max(a.lo, b.lo), max(a.hi, b.hi))


@functools.lru_cache(maxsize=64)
def interval_field(bits: int) -> IntervalField:
    return IntervalField(bits)


class ComplexBox:
    """Rectangular complex enclosure: re and im are RealIntervals."""

    __slots__ = ("re", "im")

    def __init__(self, re: RealInterval, im: RealInterval):
        self.re = re
        self.im = im

    def __repr__(self):
        return f"ComplexBox(re={self.re!r}, im={self.im!r})"

    def mid(self, field: IntervalField) -> complex:
        return complex(field.mid(self.re), field.mid(self.im))


def cbox(field: IntervalField, value) -> ComplexBox:
    """Enclosure of a python/gmpy complex-like value."""
    if isinstance(value, ComplexBox):
        return value
    if isinstance(value, complex):
        return ComplexBox(field.make(value.real), field.make(value.imag))
    if isinstance(value, tuple) and len(value) == 2:
        return ComplexBox(field.make(value[0]), field.make(value[1]))
    return ComplexBox(field.make(value), field.zero())


def cadd(field: IntervalField, a: ComplexBox, b: ComplexBox) -> ComplexBox:
    return ComplexBox(field.add(a.re, b.re), field.add(a.im, b.im))


def cmul(field: IntervalField, a: ComplexBox, b: ComplexBox) -> ComplexBox:
    re = field.sub(field.mul(a.re, b.re), field.mul(a.im, b.im))
    im = field.add(field.mul(a.re, b.im), field.mul(a.im, b.re))
    return ComplexBox(re, im)

def cpow_int(field: IntervalField, a: ComplexBox, k: int) -> ComplexBox:
    if k < 0:
        raise ValueError("negative exponent")
    result = ComplexBox(field.make(1), field.zero())
    base = a
    while k:
        if k & 1:
            result = cmul(field, result, base)
        base = cmul(field, base, base)
        k >>= 1
    return result


def cabs(field: IntervalField, a: ComplexBox) -> RealInterval:
    mag2 = field.add(field.square(a.re), field.square(a.im))
    return field.sqrt(mag2)


def cexp(field: IntervalField, a: ComplexBox) -> ComplexBox:
    r = field.exp(a.re)
    return ComplexBox(field.mul(r, field.cos(a.im)), field.mul(r, field.sin(a.im)))


def unit_circle_point(field: IntervalField, angle: RealInterval) -> ComplexBox:
    """Enclosure of exp(i * angle)."""
    return ComplexBox(field.cos(angle), field.sin(angle))


class LogMagnitude:
    """Natural log of a positive magnitude, plus the sign of the signed value.

    The zero magnitude is the distinct ``LogMagnitude.ZERO`` sentinel; it never
    appears as a log value.  Multiplying magnitudes adds the log enclosures and
    multiplies the signs.
    """

    __slots__ = ("value", "sign", "_zero")

    ZERO: "LogMagnitude"

    def __init__(self, value: RealInterval | None, sign: int = 1, _zero: bool = False):
        if not _zero and value is None:
            raise ValueError("non-sentinel LogMagnitude needs a value")
        if sign not in (-1, 1):
            raise ValueError("sign must be +1 or -1")
        self.value = value
        self.sign = sign
        self._zero = _zero

    @property
    def is_zero(self) -> bool:
        return self._zero

    def __repr__(self):
        if self._zero:
            return "LogMagnitude.ZERO"
        return f"LogMagnitude({self.value!r}, sign={self.sign:+d})"

    @classmethod
    def one(cls, field: IntervalField) -> "LogMagnitude":
        return cls(field.zero(), 1)

    @classmethod
    def from_interval(cls, field: IntervalField, iv: RealInterval) -> "LogMagnitude":
        """Log magnitude of a certified-sign interval value."""
        s = iv.sign()
        if s == 0:
            raise ValueError("interval sign not certified")
        return cls(field.log(field.abs(iv)), s)

    def magnitude(self, field: IntervalField) -> RealInterval:
        if self._zero:
            return field.zero()
        return field.exp(self.value)


LogMagnitude.ZERO = LogMagnitude(None, 1, _zero=True)


def log_sum(values, field: IntervalField) -> LogMagnitude:
    """Log magnitude of the product of the inputs (empty product is 1).

    Any zero-sentinel input makes the result the zero sentinel.  The log
    enclosure accumulates at most one outward rounding per input.
    """
    lo = mpfr(0)
    hi = mpfr(0)
    sign = 1
    for v in values:
        if v.is_zero:
            return LogMagnitude.ZERO
        lo = field.down.add(lo, v.value.lo)
        hi = field.up.add(hi, v.value.hi)
        sign *= v.sign
    return LogMagnitude(RealInterval(lo, hi), sign)


def certify_sign(evaluate, ctx: PrecisionContext) -> int:
    """Certified sign of ``evaluate(bits) -> RealInterval`` with escalation.

    Retries with doubled precision while the enclosure straddles zero; raises
    PrecisionExhausted once the escalation budget is spent.
    """
    last_bits = ctx.mantissa_bits
    for bits in ctx.escalation_bits():
        last_bits = bits
        iv = evaluate(bits)
        s = iv.sign()
        if s != 0:
            return s
    raise PrecisionExhausted(f"sign undecided after escalation to {last_bits} bits")


def decimal_str(x: mpfr) -> str:
    """Decimal rendering that round-trips at the value's own precision."""
    return str(x)
