"""Multi-index polynomials in d+1 complex variables with polydisk norm bounds."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from gmpy2 import mpfr, mpq

from .numerics import (
    ComplexBox,
    IntervalField,
    PrecisionContext,
    cabs,
    cadd,
    cbox,
    cmul,
    cpow_int,
    unit_circle_point,
)


class MultiIndex(NamedTuple):
    """Exponent of a monomial z0^j0 * z1^j1 * ... * zd^jd."""

    j0: int
    j: tuple[int, ...]

    @property
    def degree(self) -> int:
        return self.j0 + sum(self.j)

    def grlex_key(self):
        return (self.degree, (self.j0,) + self.j)


def iter_simplex(n: int, d: int) -> Iterable[MultiIndex]:
    """All multi-indices with j0 + |j| <= n in graded lexicographic order."""

    def compositions(total, parts):
        if parts == 1:
            yield (total,)
            return
        for first in range(total + 1):
            for rest in compositions(total - first, parts - 1):
                yield (first,) + rest

    out = []
    for deg in range(n + 1):
        for combo in compositions(deg, d + 1):
            out.append(MultiIndex(combo[0], combo[1:]))
    out.sort(key=MultiIndex.grlex_key)
    return out


def dim_pn(n: int, d: int) -> int:
    """Number of monomials of total degree <= n in d+1 variables."""
    if n < 0 or d < 1:
        raise ValueError("need n >= 0 and d >= 1")
    return math.comb(n + d + 1, d + 1)


class Poly:
    """Polynomial of degree <= n in d+1 variables; coefficients are mpfr pairs.

    Coefficient values are exact once stored: every certified statement about
    the polynomial refers to exactly these dyadic coefficients.
    """

    def __init__(self, n: int, d: int, coeffs: dict[MultiIndex, tuple[mpfr, mpfr]]):
        self.n = n
        self.d = d
        for idx in coeffs:
            if len(idx.j) != d or idx.degree > n or idx.j0 < 0 or min(idx.j, default=0) < 0:
                raise ValueError(f"multi-index {idx} out of range for (n={n}, d={d})")
        self.coeffs = dict(sorted(coeffs.items(), key=lambda kv: kv[0].grlex_key()))

    @classmethod
    def from_dict(cls, n: int, d: int, entries: dict) -> "Poly":
        coeffs = {}
        for key, val in entries.items():
            idx = key if isinstance(key, MultiIndex) else MultiIndex(key[0], tuple(key[1]))
            if isinstance(val, tuple):
                re, im = mpfr(val[0]), mpfr(val[1])
            elif isinstance(val, complex):
                re, im = mpfr(val.real), mpfr(val.imag)
            else:
                re, im = mpfr(val), mpfr(0)
            coeffs[idx] = (re, im)
        return cls(n, d, coeffs)

    @classmethod
    def one(cls, d: int) -> "Poly":
        return cls(0, d, {MultiIndex(0, (0,) * d): (mpfr(1), mpfr(0))})

    def __len__(self):
        return len(self.coeffs)

    def is_zero(self) -> bool:
        return all(re == 0 and im == 0 for re, im in self.coeffs.values())

    def terms(self):
        return self.coeffs.items()

    # ---- serialization --------------------------------------------------

    def to_records(self) -> list[tuple]:
        """Rows (j0, j, re, im) with full-precision decimal strings."""
        return [(idx.j0, idx.j, str(re), str(im)) for idx, (re, im) in self.coeffs.items()]

    @classmethod
    def from_records(cls, n: int, d: int, records) -> "Poly":
        coeffs = {}
        for j0, j, re, im in records:
            coeffs[MultiIndex(int(j0), tuple(int(v) for v in j))] = (mpfr(re), mpfr(im))
        return cls(n, d, coeffs)

    # ---- float views for heuristics -------------------------------------

    def coeff_array(self) -> tuple[list[MultiIndex], np.ndarray]:
        idxs = list(self.coeffs)
        arr = np.array([complex(float(re), float(im)) for re, im in self.coeffs.values()])
        return idxs, arr


def eval_poly(P: Poly, w: Sequence, field: IntervalField) -> ComplexBox:
    """Certified enclosure of P(w) for a point w in C^(d+1)."""
    if len(w) != P.d + 1:
        raise ValueError("point dimension mismatch")
    boxes = [cbox(field, coord) for coord in w]
    acc = ComplexBox(field.zero(), field.zero())
    for idx, (re, im) in P.terms():
        term = ComplexBox(field.make(re), field.make(im))
        term = cmul(field, term, cpow_int(field, boxes[0], idx.j0))
        for jv, box in zip(idx.j, boxes[1:]):
            if jv:
                term = cmul(field, term, cpow_int(field, box, jv))
        acc = cadd(field, acc, term)
    return acc


def polydisk_upper(P: Poly, field: IntervalField) -> mpfr:
    """Upper bound sum |c| for the polydisk sup norm, rounded up."""
    up = field.up
    total = mpfr(0)
    for re, im in P.coeffs.values():
        mag2 = up.add(up.mul(re, re), up.mul(im, im))
        total = up.add(total, up.sqrt(mag2))
    return total


def torus_point(field: IntervalField, turns: Sequence) -> list[ComplexBox]:
    """Point on the unit torus from exact angle fractions (multiples of 2*pi)."""
    two_pi = field.two_pi()
    coords = []
    for u in turns:
        if isinstance(u, float):
            u = Fraction(u).limit_denominator(1 << 60)
        frac = mpq(u.numerator, u.denominator) if isinstance(u, Fraction) else mpq(u)
        angle = field.mul(two_pi, field.make(frac))
        coords.append(unit_circle_point(field, angle))
    return coords


def eval_on_torus(P: Poly, turns: Sequence, field: IntervalField) -> ComplexBox:
    """Certified P at the torus point exp(2*pi*i*turns).

    Each monomial is one unit-circle exponential at the exact angle
    j . turns, which keeps enclosures tight at any degree.
    """
    two_pi = field.two_pi()
    acc = ComplexBox(field.zero(), field.zero())
    uvals = []
    for u in turns:
        if isinstance(u, float):
            u = Fraction(u).limit_denominator(1 << 60)
        uvals.append(mpq(u.numerator, u.denominator) if isinstance(u, Fraction) else mpq(u))
    for idx, (re, im) in P.terms():
        phase = idx.j0 * uvals[0]
        for jv, u in zip(idx.j, uvals[1:]):
            phase += jv * u
        angle = field.mul(two_pi, field.make(phase))
        mono = unit_circle_point(field, angle)
        term = cmul(field, ComplexBox(field.make(re), field.make(im)), mono)
        acc = cadd(field, acc, term)
    return acc


def _torus_values_float(P: Poly, samples: list[tuple]) -> np.ndarray:
    """Float64 |P| at torus points given by angle fractions (heuristic only)."""
    _, carr = P.coeff_array()
    exps = np.array([[idx.j0, *idx.j] for idx in P.coeffs], dtype=np.float64)
    uarr = np.array([[float(u) for u in s] for s in samples], dtype=np.float64)
    phases = uarr @ exps.T  # samples x terms, in turns
    vals = np.exp(2j * np.pi * phases) @ carr
    return np.abs(vals)


def polydisk_lower(P: Poly, samples: Sequence[Sequence], ctx: PrecisionContext) -> mpfr:
    """Certified lower bound for the polydisk sup norm from torus samples.

    Samples are angle tuples in turns (coordinate k on the circle is
    exp(2*pi*i*u_k)).  Large sample sets are prescanned in float64 and only
    the strongest candidates are evaluated in certified arithmetic; the
    result is always a sound lower bound for max over the sample set, hence
    for the polydisk norm.
    """
    field = ctx.field
    samples = [tuple(s) for s in samples]
    if not samples:
        raise ValueError("need at least one sample")
    if P.is_zero():
        return mpfr(0)
    if len(samples) > ctx.certify_top_k:
        vals = _torus_values_float(P, samples)
        order = np.argsort(vals)[::-1]
        candidates = [samples[i] for i in order[: ctx.certify_top_k]]
    else:
        candidates = samples
    best = mpfr(0)
    for s in candidates:
        mag = cabs(field, eval_on_torus(P, s, field))
        if mag.lo > best:
            best = mag.lo
    return best


def default_torus_samples(d: int, ctx: PrecisionContext) -> list[tuple]:
    """Fixed-seed pseudo-random torus angles plus the (+-1, ...) corners."""
    rng = np.random.default_rng(ctx.seed)
    count = ctx.torus_samples
    grid = rng.integers(0, 1 << 53, size=(count, d + 1))
    samples = [tuple(Fraction(int(v), 1 << 53) for v in row) for row in grid]
    corners = []

    def corner_rec(prefix):
        if len(prefix) == d + 1:
            corners.append(tuple(prefix))
            return
        for half in (Fraction(0), Fraction(1, 2)):
            corner_rec(prefix + [half])

    corner_rec([])
    return corners + samples
