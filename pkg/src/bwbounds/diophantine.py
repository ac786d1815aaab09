"""Distance-to-nearest-integer scans, exponent estimates, and the W statistic.

Exponent vectors are exact rationals, so every nearest-integer distance is an
exact rational as well; shells are prescanned in float64 for speed and every
reported minimum is confirmed in exact arithmetic.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field as dc_field

import gmpy2
import numpy as np
from gmpy2 import mpfr, mpq

from .curve import ExponentVector
from .errors import IndependenceViolation, PrecisionExhausted, TowerOverflow
from .numerics import IntervalField, PrecisionContext, RealInterval, exact_neg

TOWER_BIT_BUDGET = 100_000


def _nearest_int_exact(v: mpq) -> tuple[int, mpq]:
    """Nearest integer to an exact rational and the exact distance."""
    t = v + mpq(1, 2)
    p = t.numerator // t.denominator  # floor
    return int(p), abs(v - p)


def nearest_int_dist(t: RealInterval, field: IntervalField) -> tuple[int, RealInterval]:
    """Nearest integer to the midpoint and an enclosure of the distance.

    The distance enclosure is intersected with [0, 1/2]; an interval wider
    than 1/4 cannot resolve the nearest integer and is rejected.
    """
    if field.width(t) >= mpq(1, 4):
        raise PrecisionExhausted("interval too wide to locate the nearest integer")
    mid = field.mid(t)
    p, _ = _nearest_int_exact(mpq(mid))
    diff = field.abs(field.sub(t, field.make(p)))
    half = field.make(mpq(1, 2))
    return p, RealInterval(min(diff.lo, half.lo), min(diff.hi, half.hi))


@dataclass
class ResonanceRecord:
    """Integer vector q with its nearest integer p and distance enclosure."""

    q: tuple[int, ...]
    p: int
    dist: RealInterval
    norm: int
    w_stat: mpfr | None = None

    def dist_exact(self, x: ExponentVector) -> mpq:
        _, dist = _nearest_int_exact(x.dot(self.q))
        return dist


@dataclass
class DiophantineProfile:
    """Per-norm minima of <q . x> up to depth Q plus fitted exponent data."""

    x_descriptor: str
    Q: int
    cone: str
    records: list = dc_field(default_factory=list)  # one ResonanceRecord per norm
    mu_hat: mpfr | None = None
    eps_hat: mpfr | None = None
    mu_at_least_d: bool = True

    def record_at(self, norm: int) -> ResonanceRecord:
        return self.records[norm - 1]

    def running_minima(self) -> list[ResonanceRecord]:
        """Records that strictly improve the smallest distance seen so far."""
        out = []
        best = None
        for rec in self.records:
            d = rec.dist.hi
            if best is None or d < best:
                out.append(rec)
                best = d
        return out

    def csv_rows(self) -> list[list[str]]:
        rows = []
        for rec in self.records:
            rows.append(
                [str(rec.norm)]
                + [str(v) for v in rec.q]
                + [str(rec.p), str(rec.dist.lo), str(rec.dist.hi)]
                + [str(rec.w_stat) if rec.w_stat is not None else ""]
            )
        return rows

    @staticmethod
    def csv_header(d: int) -> list[str]:
        return ["norm"] + [f"q{i+1}" for i in range(d)] + ["p", "dist_lo", "dist_hi", "w_stat"]


def w_statistic(rec: ResonanceRecord, d: int, field: IntervalField) -> mpfr:
    """Certified lower bound (-log dist_hi) / (norm^(d+1) log norm), norm >= 2."""
    if rec.norm < 2:
        raise ValueError("w statistic needs norm at least 2")
    if not rec.dist.hi > 0:
        raise ValueError("w statistic needs a positive distance")
    num = exact_neg(field.up.log(rec.dist.hi))  # -log dist_hi rounded down
    den = field.up.mul(rec.norm ** (d + 1), field.up.log(mpfr(rec.norm)))
    return field.down.div(num, den)


def _shell_iter_exact(d: int, t: int, cone: str):
    """All q with max-norm exactly t in the requested cone."""
    if d == 1:
        if cone == "nonneg":
            yield (t,)
        else:
            yield (-t,)
            yield (t,)
        return
    if cone == "nonneg":
        rng = range(0, t + 1)
    else:
        rng = range(-t, t + 1)
    for q in itertools.product(rng, repeat=d):
        if max(abs(v) for v in q) == t:
            yield q


def _scan_exact(x: ExponentVector, Q: int, cone: str):
    """Exhaustive exact per-shell minima (used for small enumerations)."""
    minima = []
    for t in range(1, Q + 1):
        best = None
        for q in _shell_iter_exact(x.d, t, cone):
            p, dist = _nearest_int_exact(x.dot(q))
            if dist == 0:
                raise IndependenceViolation(q, p)
            key = (dist, q)
            if best is None or key < best:
                best = key
        dist, q = best
        p, _ = _nearest_int_exact(x.dot(q))
        minima.append((t, q, p, dist))
    return minima


def _scan_prefiltered(x: ExponentVector, Q: int, cone: str):
    """Float64 shell prescan with exact confirmation of the candidates."""
    d = x.d
    if cone == "nonneg":
        axes = [np.arange(0, Q + 1)] * d
    else:
        axes = [np.arange(-Q, Q + 1)] * d
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
    norms = np.abs(grid).max(axis=1)
    keep = norms > 0
    grid, norms = grid[keep], norms[keep]
    dots = grid @ x.floats()
    dist_f = np.abs(dots - np.rint(dots))
    # float64 error envelope for q . x with exact-rational x
    margin = (norms.astype(float) * d + 4.0) * 2.0**-50

    minima = []
    for t in range(1, Q + 1):
        mask = norms == t
        shell_dists = dist_f[mask]
        shell_qs = grid[mask]
        cut = shell_dists.min() + 2 * margin[mask][0]
        cand_idx = np.nonzero(shell_dists <= cut)[0]
        if len(cand_idx) > 64:
            best = None
            for row in shell_qs:
                q = tuple(int(v) for v in row)
                p, dist = _nearest_int_exact(x.dot(q))
                if dist == 0:
                    raise IndependenceViolation(q, p)
                key = (dist, q)
                if best is None or key < best:
                    best = key
        else:
            best = None
            for i in cand_idx:
                q = tuple(int(v) for v in shell_qs[i])
                p, dist = _nearest_int_exact(x.dot(q))
                if dist == 0:
                    raise IndependenceViolation(q, p)
                key = (dist, q)
                if best is None or key < best:
                    best = key
        dist, q = best
        p, _ = _nearest_int_exact(x.dot(q))
        minima.append((t, q, p, dist))
    return minima


def scan(
    x: ExponentVector,
    Q: int,
    cone: str = "all",
    ctx: PrecisionContext = None,
) -> DiophantineProfile:
    """Per-norm minima of <q . x> for 1 <= max|q| <= Q in the chosen cone.

    ``cone`` is "all" (q in Z^d, q != 0) or "nonneg" (componentwise q >= 0).
    Ties at a norm break by lexicographic order of q.  Raises
    IndependenceViolation when some q . x is exactly an integer.
    """
    from .numerics import DEFAULT_CONTEXT

    ctx = ctx or DEFAULT_CONTEXT
    if Q < 1:
        raise ValueError("scan depth must be at least 1")
    if cone not in ("all", "nonneg"):
        raise ValueError("cone must be 'all' or 'nonneg'")
    field = ctx.field
    span = Q + 1 if cone == "nonneg" else 2 * Q + 1
    total = span**x.d
    if total <= 100_000:
        minima = _scan_exact(x, Q, cone)
    else:
        minima = _scan_prefiltered(x, Q, cone)

    records = []
    for t, q, p, dist in minima:
        iv = field.make(dist)
        rec = ResonanceRecord(q=tuple(int(v) for v in q), p=p, dist=iv, norm=t)
        if t >= 2:
            rec.w_stat = w_statistic(rec, x.d, field)
        records.append(rec)

    profile = DiophantineProfile(x_descriptor=x.descriptor, Q=Q, cone=cone, records=records)
    near = field.near
    mu = None
    for rec in records:
        if rec.norm < 2:
            continue
        val = near.div(exact_neg(near.log(rec.dist.hi)), near.log(mpfr(rec.norm)))
        if mu is None or val > mu:
            mu = val
    profile.mu_hat = mu
    if mu is not None:
        eps = None
        for rec in records:
            val = near.mul(rec.dist.hi, near.exp(near.mul(mu, near.log(mpfr(rec.norm)))))
            if eps is None or val < eps:
                eps = val
        profile.eps_hat = eps
        profile.mu_at_least_d = mu >= x.d
    if cone == "all":
        x.q_checked = max(x.q_checked, Q)
    return profile


def liouville_tower(k_max: int) -> list[int]:
    """Exponents a_1 = 2, a_(k+1) = 16 a_k^2, capped by the bit budget."""
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    tower = [2]
    while len(tower) < k_max:
        nxt = 16 * tower[-1] ** 2
        if nxt > TOWER_BIT_BUDGET:
            raise TowerOverflow(
                f"exponent {nxt} exceeds the {TOWER_BIT_BUDGET}-bit fixture budget"
            )
        tower.append(nxt)
    return tower


def liouville_fixture(base: int, k_max: int) -> ExponentVector:
    """Fixture x = sum_k base^(-a_k) admitting very close integer multiples.

    The partial-sum denominators q = base^(a_k) satisfy <q x> = q * tail,
    which shrinks super-polynomially in q.  k_max = 1 degenerates to the
    rational 1/base^2 and is only useful for violation tests.
    """
    if base < 2:
        raise ValueError("base must be at least 2")
    tower = liouville_tower(k_max)
    if tower[-1] * math.log2(base) > TOWER_BIT_BUDGET:
        raise TowerOverflow("fixture denominator exceeds the bit budget")
    x = mpq(0)
    for a in tower:
        x += mpq(1, gmpy2.mpz(base) ** a)
    return ExponentVector((x,), descriptor=f"liouville({base},{k_max})")


def liouville_steps(base: int, k_max: int) -> list[dict]:
    """Documented certified distances <q x> at q = base^(a_k) for each step."""
    tower = liouville_tower(k_max)
    x = liouville_fixture(base, k_max).entries[0]
    steps = []
    for k, a in enumerate(tower, start=1):
        q = gmpy2.mpz(base) ** a
        p, dist = _nearest_int_exact(q * x)
        steps.append({"k": k, "a_k": a, "q": q, "p": p, "dist": dist})
    return steps
