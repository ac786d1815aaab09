"""Frequency-difference product tables and the certified upper bound pipeline.

For a degree bound n and exponent vector x, beta(l, m) is the product over
all other admissible multi-indices (j0, j) of (l - j0) + (m - j) . x.  The
smallest |beta| controls how large a coefficient of a polynomial that is
small on the curve can get, which yields a fully certified upper bound on
the extremal exponent.
"""

from __future__ import annotations

from dataclasses import dataclass

import gmpy2
from gmpy2 import mpfr, mpq

from .curve import ExponentVector
from .errors import BudgetExceeded, IndependenceViolation
from .numerics import (
    IntervalField,
    LogMagnitude,
    PrecisionContext,
    RealInterval,
)
from .polynomials import MultiIndex, dim_pn, iter_simplex


class _DiffLogCache:
    """log |delta0 + delta . x| keyed by the integer difference vector.

    Factors of every beta product depend only on the difference of two
    multi-indices, so a table over the difference lattice turns the quadratic
    product work into a linear number of certified log evaluations.
    """

    def __init__(self, x: ExponentVector, field: IntervalField):
        self.x = x
        self.field = field
        self._store: dict[tuple, tuple[RealInterval, int]] = {}

    def get(self, delta0: int, delta: tuple[int, ...]) -> tuple[RealInterval, int]:
        key = (delta0, delta)
        hit = self._store.get(key)
        if hit is not None:
            return hit
        value = mpq(delta0) + self.x.dot(delta)
        if value == 0:
            raise IndependenceViolation(delta, -delta0)
        sign = 1 if value > 0 else -1
        log_iv = self.field.log(self.field.make(abs(value)))
        self._store[key] = (log_iv, sign)
        return log_iv, sign


def beta_log(
    lm: MultiIndex,
    n: int,
    x: ExponentVector,
    ctx: PrecisionContext = None,
    _cache: _DiffLogCache | None = None,
) -> LogMagnitude:
    """Certified log magnitude and sign of beta(l, m).

    The product runs over every multi-index of degree <= n except (l, m);
    each factor's sign is exact because x is exact, and an exactly zero
    factor raises IndependenceViolation naming the integer relation.
    """
    from .numerics import DEFAULT_CONTEXT

    ctx = ctx or DEFAULT_CONTEXT
    if lm.degree > n:
        raise ValueError("index degree exceeds n")
    field = ctx.field
    cache = _cache or _DiffLogCache(x, field)
    lo = mpfr(0)
    hi = mpfr(0)
    sign = 1
    down, up = field.down, field.up
    for other in iter_simplex(n, x.d):
        if other == lm:
            continue
        delta0 = lm.j0 - other.j0
        delta = tuple(a - b for a, b in zip(lm.j, other.j))
        log_iv, s = cache.get(delta0, delta)
        lo = down.add(lo, log_iv.lo)
        hi = up.add(hi, log_iv.hi)
        sign *= s
    return LogMagnitude(RealInterval(lo, hi), sign)


@dataclass
class BetaTable:
    """All beta log magnitudes for one (n, x) plus the certified minimum."""

    n: int
    d: int
    entries: dict  # MultiIndex -> LogMagnitude
    min_index: MultiIndex
    min_value: LogMagnitude

    def csv_rows(self) -> list[list[str]]:
        rows = []
        for idx, lm in self.entries.items():
            rows.append(
                [str(idx.j0)]
                + [str(v) for v in idx.j]
                + [str(lm.value.lo), str(lm.value.hi), f"{lm.sign:+d}"]
            )
        return rows

    @staticmethod
    def csv_header(d: int) -> list[str]:
        return ["l"] + [f"m{i+1}" for i in range(d)] + ["log_beta_lo", "log_beta_hi", "sign"]


def beta_table(
    n: int,
    x: ExponentVector,
    ctx: PrecisionContext = None,
    force_budget: bool = False,
) -> BetaTable:
    """Full beta table with the minimum of log |beta| over all indices.

    Work grows with dim^2; tables beyond the context dim budget are refused
    unless ``force_budget`` is set.
    """
    from .numerics import DEFAULT_CONTEXT

    ctx = ctx or DEFAULT_CONTEXT
    dim = dim_pn(n, x.d)
    if dim > ctx.dim_budget and not force_budget:
        raise BudgetExceeded(
            f"dim {dim} exceeds the budget {ctx.dim_budget}; pass force_budget to override"
        )
    field = ctx.field
    cache = _DiffLogCache(x, field)
    entries: dict[MultiIndex, LogMagnitude] = {}
    min_idx = None
    min_lm = None
    for lm_idx in iter_simplex(n, x.d):
        lm = beta_log(lm_idx, n, x, ctx, _cache=cache)
        entries[lm_idx] = lm
        if min_lm is None or lm.value.lo < min_lm.value.lo:
            min_idx, min_lm = lm_idx, lm
    return BetaTable(n=n, d=x.d, entries=entries, min_index=min_idx, min_value=min_lm)


def lemma_dist_rhs(xa: int, yb: int, alpha, ctx: PrecisionContext = None) -> LogMagnitude:
    """Certified log of <alpha> ((y - x) / 2e)^(y - x), with 0^0 = 1.

    This is a lower bound for log prod_{j=xa..yb} |j - alpha| whenever alpha
    is not an integer; an integer alpha yields the zero sentinel.
    """
    from .numerics import DEFAULT_CONTEXT

    ctx = ctx or DEFAULT_CONTEXT
    if xa > yb:
        raise ValueError("need xa <= yb")
    field = ctx.field
    if isinstance(alpha, RealInterval):
        alpha_iv = alpha
    else:
        alpha_iv = field.make(mpq(alpha))
    from .diophantine import nearest_int_dist

    _, dist = nearest_int_dist(alpha_iv, field)
    if dist.hi == 0:
        return LogMagnitude.ZERO
    if dist.lo <= 0:
        # alpha could be an integer at this precision; treat as zero magnitude
        return LogMagnitude.ZERO
    total = field.log(dist)
    k = yb - xa
    if k > 0:
        k_iv = field.make(k)
        two_e = field.mul(field.make(2), field.exp(field.make(1)))
        term = field.mul(k_iv, field.sub(field.log(k_iv), field.log(two_e)))
        total = field.add(total, term)
    return LogMagnitude(total, 1)


def prop_beta_rhs(n: int, d: int, C, ctx: PrecisionContext = None) -> mpfr:
    """Reference lower-bound shape n^(d+1) log n / (d+1)! - C n^(d+1)."""
    from .numerics import DEFAULT_CONTEXT

    ctx = ctx or DEFAULT_CONTEXT
    if n < 2:
        raise ValueError("need n >= 2")
    near = ctx.field.near
    n_pow = gmpy2.mpz(n) ** (d + 1)
    main = near.div(near.mul(n_pow, near.log(mpfr(n))), gmpy2.fac(d + 1))
    return near.sub(main, near.mul(C, n_pow))


def cert_upper(
    n: int,
    x: ExponentVector,
    ctx: PrecisionContext = None,
    table: BetaTable | None = None,
) -> LogMagnitude:
    """Certified upper bound for the extremal exponent at degree n.

    Every polynomial of degree <= n that is bounded by 1 on the curve has
    polydisk norm at most exp of this value.  The bound is
    N log(N + n) + log(N + 1) - min log |beta| with N = dim - 1, assembled
    with upward rounding (the meaningful bound is the .hi endpoint).
    """
    from .numerics import DEFAULT_CONTEXT

    ctx = ctx or DEFAULT_CONTEXT
    field = ctx.field
    if n == 0:
        return LogMagnitude(field.zero(), 1)
    if table is None:
        table = beta_table(n, x, ctx)
    N = dim_pn(n, x.d) - 1
    up, down = field.up, field.down
    hi = up.sub(
        up.add(up.mul(N, up.log(mpfr(N + n))), up.log(mpfr(N + 1))),
        table.min_value.value.lo,
    )
    lo = down.sub(
        down.add(down.mul(N, down.log(mpfr(N + n))), down.log(mpfr(N + 1))),
        table.min_value.value.hi,
    )
    return LogMagnitude(RealInterval(min(lo, hi), hi), 1)


def expand_frequency_poly(lm: MultiIndex, n: int, x: ExponentVector) -> list[mpq]:
    """Exact coefficients a_t of prod_{(j0,j) != lm} (t - lambda(j0,j)).

    Exact rational expansion for small n; evaluating it at lambda(lm)
    reproduces beta(lm), which cross-checks the log-domain pipeline.
    """
    coeffs = [mpq(1)]
    for other in iter_simplex(n, x.d):
        if other == lm:
            continue
        root = mpq(other.j0) + x.dot(other.j)
        nxt = [mpq(0)] * (len(coeffs) + 1)
        for i, c in enumerate(coeffs):
            nxt[i + 1] += c
            nxt[i] -= c * root
        coeffs = nxt
    return coeffs


def fiber_product_check(
    lm: MultiIndex, n: int, x: ExponentVector, ctx: PrecisionContext = None
) -> list[tuple]:
    """Per-fiber comparison of exact sub-products against lemma_dist_rhs.

    For each j != m, the exact product over j0 of |(l - j0) + (m - j) . x|
    must be at least the certified bound of the matching integer range.
    Returns tuples (j, exact_product, rhs_logmag).
    """
    from .numerics import DEFAULT_CONTEXT

    ctx = ctx or DEFAULT_CONTEXT
    results = []
    js_seen = set()
    for other in iter_simplex(n, x.d):
        if other.j in js_seen or other.j == lm.j:
            continue
        js_seen.add(other.j)
        alpha = -(x.dot(tuple(m - j for m, j in zip(lm.j, other.j))))
        jlen = sum(other.j)
        lo_j0 = lm.j0 - (n - jlen)
        hi_j0 = lm.j0
        prod = mpq(1)
        for j0 in range(0, n - jlen + 1):
            prod *= abs(mpq(lm.j0 - j0) - alpha)
        rhs = lemma_dist_rhs(lo_j0, hi_j0, alpha, ctx)
        results.append((other.j, prod, rhs))
    return results
