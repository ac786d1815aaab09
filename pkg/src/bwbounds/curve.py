"""The exponential curve, its frequency sets, and certified sup-norms on it.

The curve attached to exponents x = (x_1, ..., x_d) is the image of the closed
unit disk under z -> (e^z, e^(x_1 z), ..., e^(x_d z)).  Exponent entries are
stored as exact rationals: named irrational fixtures are realized as correctly
rounded dyadics at the working precision, so every certified statement refers
to an exactly known vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Sequence

import gmpy2
import numpy as np
from gmpy2 import mpfr, mpq

from .errors import IndependenceViolation, PrecisionExhausted
from .numerics import (
    ComplexBox,
    IntervalField,
    LogMagnitude,
    PrecisionContext,
    RealInterval,
    cabs,
    cadd,
    cbox,
    cexp,
    cmul,
)
from .polynomials import Poly, eval_poly, iter_simplex


@dataclass
class ExponentVector:
    """Exact exponent vector with max-norm at most 1.

    ``q_checked`` caches the largest scan depth at which no integer relation
    q . x in Z with 0 < max|q| <= q_checked was found.
    """

    entries: tuple
    descriptor: str = ""
    q_checked: int = 0

    def __post_init__(self):
        self.entries = tuple(mpq(e) for e in self.entries)
        for e in self.entries:
            if abs(e) > 1:
                raise ValueError(f"exponent entry {e} exceeds max-norm 1")
        if not self.descriptor:
            self.descriptor = ",".join(str(e) for e in self.entries)

    @property
    def d(self) -> int:
        return len(self.entries)

    def dot(self, q: Sequence[int]) -> mpq:
        """Exact q . x."""
        acc = mpq(0)
        for qi, xi in zip(q, self.entries):
            acc += qi * xi
        return acc

    def floats(self) -> np.ndarray:
        return np.array([float(e) for e in self.entries])


def _dyadic_sqrt(value: int, bits: int) -> mpq:
    near = gmpy2.context(precision=bits, round=gmpy2.RoundToNearest)
    return mpq(near.sqrt(mpfr(value)))


def named_fixture(name: str, bits: int = 256) -> ExponentVector:
    """Named one-dimensional fixtures rendered as exact dyadics at ``bits``."""
    name = name.strip()
    if name == "golden":
        x = (_dyadic_sqrt(5, bits) - 1) / 2
    elif name == "sqrt2m1":
        x = _dyadic_sqrt(2, bits) - 1
    elif name == "sqrt3m1":
        x = _dyadic_sqrt(3, bits) - 1
    else:
        raise ValueError(f"unknown fixture {name!r}")
    return ExponentVector((x,), descriptor=name)


def _parse_component(text: str, bits: int) -> tuple[mpq, str]:
    text = text.strip()
    if text in ("golden", "sqrt2m1", "sqrt3m1"):
        return named_fixture(text, bits).entries[0], text
    if text.startswith("liouville(") and text.endswith(")"):
        from .diophantine import liouville_fixture

        args = text[len("liouville(") : -1].split(",")
        base, k_max = int(args[0]), int(args[1])
        return liouville_fixture(base, k_max).entries[0], text
    frac = Fraction(text)
    return mpq(frac.numerator, frac.denominator), text


def _split_components(text: str) -> list[str]:
    """Split on commas that are not inside parentheses."""
    parts = []
    depth = 0
    current = []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(current))
            current = []
        else:
            current.append(ch)
    parts.append("".join(current))
    return [p for p in parts if p.strip()]


def parse_exponents(text: str, bits: int = 256) -> ExponentVector:
    """Parse a comma-separated exponent descriptor.

    Components may be fixture names (golden, sqrt2m1, sqrt3m1,
    liouville(base,k)), exact rationals like 1/7, or decimal literals.
    """
    entries = []
    for part in _split_components(text):
        value, _ = _parse_component(part, bits)
        entries.append(value)
    return ExponentVector(tuple(entries), descriptor=text.strip())


@dataclass
class FrequencySet:
    """Exponents lambda(j0, j) = j0 + j . x for all multi-indices of degree <= n."""

    n: int
    x: ExponentVector
    indices: list = dc_field(default_factory=list)
    lambdas: list = dc_field(default_factory=list)  # exact mpq, aligned with indices
    min_gap: RealInterval | None = None

    def as_intervals(self, field: IntervalField) -> list[RealInterval]:
        return [field.make(v) for v in self.lambdas]


def frequencies(n: int, x: ExponentVector, ctx: PrecisionContext = None) -> FrequencySet:
    """Compute all frequencies and certify that they are pairwise distinct.

    Raises IndependenceViolation, naming the integer relation, when two
    frequencies coincide (exact rational comparison, no precision limit).
    """
    from .numerics import DEFAULT_CONTEXT

    ctx = ctx or DEFAULT_CONTEXT
    indices = list(iter_simplex(n, x.d))
    lambdas = [mpq(idx.j0) + x.dot(idx.j) for idx in indices]
    order = sorted(range(len(lambdas)), key=lambda i: lambdas[i])
    best_gap = None
    for a, b in zip(order, order[1:]):
        gap = lambdas[b] - lambdas[a]
        if gap == 0:
            ia, ib = indices[a], indices[b]
            q = tuple(jb - ja for ja, jb in zip(ia.j, ib.j))
            raise IndependenceViolation(q, -(ib.j0 - ia.j0))
        if best_gap is None or gap < best_gap:
            best_gap = gap
    fs = FrequencySet(n=n, x=x, indices=indices, lambdas=lambdas)
    if best_gap is not None:
        fs.min_gap = ctx.field.make(best_gap)
    else:
        fs.min_gap = ctx.field.zero()
    return fs


def poly_frequencies(P: Poly, x: ExponentVector) -> list[mpq]:
    """Exact frequency of each term of P, aligned with P.terms()."""
    return [mpq(idx.j0) + x.dot(idx.j) for idx in P.coeffs]


def eval_curve(P: Poly, x: ExponentVector, z, field: IntervalField) -> ComplexBox:
    """Certified enclosure of P(e^z, e^(x_1 z), ..., e^(x_d z))."""
    zbox = cbox(field, z)
    acc = ComplexBox(field.zero(), field.zero())
    for (idx, (re, im)), lam in zip(P.terms(), poly_frequencies(P, x)):
        lam_iv = field.make(lam)
        arg = ComplexBox(field.mul(lam_iv, zbox.re), field.mul(lam_iv, zbox.im))
        term = cmul(field, ComplexBox(field.make(re), field.make(im)), cexp(field, arg))
        acc = cadd(field, acc, term)
    return acc


def _curve_values_float(P: Poly, x: ExponentVector, thetas: np.ndarray) -> np.ndarray:
    """Float64 |f(e^(i theta))| row per theta (heuristic prescan only)."""
    lams = np.array([float(v) for v in poly_frequencies(P, x)])
    _, carr = P.coeff_array()
    out = np.empty(len(thetas))
    block = 8192
    for start in range(0, len(thetas), block):
        th = thetas[start : start + block]
        zz = np.exp(1j * th)[:, None] * lams[None, :]
        out[start : start + block] = np.abs(np.exp(zz) @ carr)
    return out


def _coeff_magnitudes(P: Poly, field: IntervalField) -> list[RealInterval]:
    mags = []
    for re, im in P.coeffs.values():
        box = ComplexBox(field.make(re), field.make(im))
        mags.append(cabs(field, box))
    return mags


def _series_sup_bound(P: Poly, x: ExponentVector, field: IntervalField) -> mpfr:
    """Upper bound for sup |f| on |z| <= 1 via the power series of f at 0.

    sum_t |m_t| / t! with m_t = sum_j c_j lambda_j^t: the moments are
    computed exactly up to T (beyond the term count plus the largest
    frequency, where vanishing-order cancellation matters), and the
    remainder is closed with the analytic bound |m_t| <= sum|c| nbar^t,
    iterated until it is negligible against the accumulated sum.
    """
    lams = poly_frequencies(P, x)
    if not lams:
        return mpfr(0)
    up = field.up
    lam_ivs = [field.make(v) for v in lams]
    lam_max = max(abs(v) for v in lams)
    nbar = float(lam_max) if lam_max else 0.0
    coeffs = [(field.make(re), field.make(im)) for re, im in P.coeffs.values()]
    sum_c = mpfr(0)
    for mag in _coeff_magnitudes(P, field):
        sum_c = up.add(sum_c, mag.hi)
    lam_hi = field.abs(field.make(lam_max)).hi

    # exact moments continue until the crude per-term bound sum|c| nbar^t/t!
    # is negligible against the accumulated sum; past 2 nbar the ratio of
    # consecutive crude terms is below 1/2, so the remainder closes with a
    # factor of 2
    t_min = max(64, math.ceil(2 * nbar) + 1, len(lams) + 1)
    cap = 4096
    all_real = all(im == 0 for _, im in P.coeffs.values())
    monotone = all(v >= 0 for v in lams)
    powers = [field.make(1) for _ in lams]
    total = mpfr(0)
    fact = gmpy2.mpz(1)
    crude = sum_c  # sum|c| nbar^t / t! at the current t
    t = 0
    down = field.down
    while True:
        if t:
            fact *= t
            if monotone:
                powers = [
                    RealInterval(down.mul(p.lo, l.lo), up.mul(p.hi, l.hi))
                    for p, l in zip(powers, lam_ivs)
                ]
            else:
                powers = [field.mul(p, l) for p, l in zip(powers, lam_ivs)]
            crude = up.div(up.mul(crude, lam_hi), t)
        m_re = field.zero()
        for (cre, _), p in zip(coeffs, powers):
            m_re = field.add(m_re, field.mul(cre, p))
        if all_real:
            mag = field.abs(m_re)
        else:
            m_im = field.zero()
            for (_, cim), p in zip(coeffs, powers):
                m_im = field.add(m_im, field.mul(cim, p))
            mag = field.sqrt(field.add(field.square(m_re), field.square(m_im)))
        total = up.add(total, up.div(mag.hi, fact))
        t += 1
        if t >= t_min:
            crude_next = up.div(up.mul(crude, lam_hi), t)
            if t >= cap or crude_next <= down.mul(total, mpfr(2) ** -30):
                remainder = up.mul(2, crude_next)
                break
    return up.add(total, remainder)


def _derivative_bound(P: Poly, x: ExponentVector, field: IntervalField) -> tuple[mpfr, mpfr]:
    """(L, S) with L >= sup |d/dtheta f(e^(i theta))| and S >= sum |c| e^|lambda|."""
    up = field.up
    L = mpfr(0)
    S = mpfr(0)
    for mag, lam in zip(_coeff_magnitudes(P, field), poly_frequencies(P, x)):
        lam_hi = field.abs(field.make(lam)).hi
        e_lam = up.exp(lam_hi)
        S = up.add(S, up.mul(mag.hi, e_lam))
        L = up.add(L, up.mul(mag.hi, up.mul(lam_hi, e_lam)))
    return L, S


def k_norm(
    P: Poly,
    x: ExponentVector,
    ctx: PrecisionContext = None,
    M: int | None = None,
) -> RealInterval:
    """Certified enclosure [lo, hi] of the curve sup-norm of P.

    ``lo`` is a certified value of |f| at one of M equispaced circle points
    (the sup over |z| <= 1 is attained on |z| = 1 since f is entire).  ``hi``
    is the smaller of the sampling bound lo_all + L pi / M, with L a bound on
    the derivative along the circle, and a power-series tail bound; both are
    valid upper bounds for the sup.  With M=None the sample count starts at
    the context default and doubles (up to 4 times) until the enclosure is
    tighter than 2^-30 relative or stops improving.
    """
    from .numerics import DEFAULT_CONTEXT

    ctx = ctx or DEFAULT_CONTEXT
    field = ctx.field
    if P.is_zero():
        return field.zero()
    auto = M is None
    M = ctx.circle_samples if auto else M
    if M < 8:
        raise ValueError("need at least 8 circle samples")

    L, S = _derivative_bound(P, x, field)
    series_hi = _series_sup_bound(P, x, field)
    up, down = field.up, field.down
    # float64 error envelope for the sampled maximum, relative to S: argument
    # and angle rounding contribute |lambda| 2^-50, exp a few ulp, and the
    # accumulation k 2^-53; 2^-36 covers k <= 10^4 terms and |lambda| <= 10^3
    env = up.mul(S, mpfr(2) ** -36)
    pi_hi = field.pi().hi

    lo = mpfr(0)
    hi = None
    doublings = 0
    while True:
        thetas = 2 * np.pi * np.arange(M) / M
        vals = _curve_values_float(P, x, thetas)
        order = np.argsort(vals)[::-1][: ctx.certify_top_k]
        for k in order:
            turn = Fraction(int(k), M)
            angle = field.mul(field.two_pi(), field.make(mpq(turn.numerator, turn.denominator)))
            w = ComplexBox(field.cos(angle), field.sin(angle))
            acc = ComplexBox(field.zero(), field.zero())
            for (idx, (re, im)), lam in zip(P.terms(), poly_frequencies(P, x)):
                lam_iv = field.make(lam)
                arg = ComplexBox(field.mul(lam_iv, w.re), field.mul(lam_iv, w.im))
                term = cmul(field, ComplexBox(field.make(re), field.make(im)), cexp(field, arg))
                acc = cadd(field, acc, term)
            mag = cabs(field, acc)
            if mag.lo > lo:
                lo = mag.lo
        float_max = float(vals.max())
        if math.isfinite(float_max):
            sampled_hi = up.add(up.add(mpfr(float_max), env), up.div(up.mul(L, pi_hi), M))
            hi = min(sampled_hi, series_hi)
        else:
            hi = series_hi
        if not auto:
            break
        width = up.sub(hi, lo)
        if doublings >= 4 or (lo > 0 and width <= down.mul(lo, mpfr(2) ** -30)):
            break
        M *= 2
        doublings += 1
    if hi < lo:
        hi = lo
    return RealInterval(lo, hi)


def _log_plus_max_modulus(z, field: IntervalField) -> RealInterval:
    """Enclosure of log+ max_i |z_i| for a point z in C^(d+1)."""
    m = None
    for coord in z:
        mag = cabs(field, cbox(field, coord))
        m = mag if m is None else field.max(m, mag)
    one = mpfr(1)
    lo = field.down.log(m.lo) if m.lo > one else mpfr(0)
    hi = field.up.log(m.hi) if m.hi > one else mpfr(0)
    return RealInterval(lo, hi)


def bw_check(
    P: Poly,
    x: ExponentVector,
    z,
    e_upper: LogMagnitude,
    ctx: PrecisionContext = None,
    _k_enclosure: RealInterval | None = None,
) -> bool:
    """Check |P(z)| <= ||P||_K exp(e_upper) exp(n log+ max |z_i|).

    A certified upper bound e_upper for the extremal exponent must make this
    hold for every polynomial of degree <= n.  Returns a certified boolean,
    escalating precision while the comparison is undecided.  Callers probing
    many points of one polynomial may pass a precomputed k_norm enclosure.
    """
    from .numerics import DEFAULT_CONTEXT

    ctx = ctx or DEFAULT_CONTEXT
    for bits in ctx.escalation_bits():
        sub = ctx.with_bits(bits)
        field = sub.field
        lhs = cabs(field, eval_poly(P, z, field))
        kn = _k_enclosure if _k_enclosure is not None else k_norm(P, x, sub)
        lp = _log_plus_max_modulus(z, field)
        n_iv = field.make(P.n)
        exp_lo = field.down.exp(field.down.add(e_upper.value.lo, field.down.mul(n_iv.lo, lp.lo)))
        exp_hi = field.up.exp(field.up.add(e_upper.value.hi, field.up.mul(n_iv.hi, lp.hi)))
        rhs_lo = field.down.mul(kn.lo, exp_lo)
        rhs_hi = field.up.mul(kn.hi, exp_hi)
        if lhs.hi <= rhs_lo:
            return True
        if lhs.lo > rhs_hi:
            return False
    raise PrecisionExhausted("bw_check comparison undecided at maximum precision")
