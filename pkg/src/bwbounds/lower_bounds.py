"""Certified lower bounds: universal, vanishing-order, resonance, and search.

All three mechanisms produce witnesses whose polydisk-to-curve norm ratio is
certified by interval arithmetic, so heuristic search quality never affects
soundness.  The vanishing-order construction solves the moment system
sum_i c_i lambda_i^t = 0 (t < N) through its divided-difference closed form:
the kernel coefficients are reciprocals of the frequency-difference products
already tabulated for the upper bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import gmpy2
import numpy as np
from gmpy2 import mpfr, mpq

from .curve import ExponentVector, frequencies, k_norm, poly_frequencies
from .diophantine import _nearest_int_exact, scan
from .errors import IndependenceViolation, PrecisionExhausted
from .numerics import (
    PrecisionContext,
    RealInterval,
    exact_abs,
    exact_neg,
)
from .polynomials import (
    MultiIndex,
    Poly,
    default_torus_samples,
    dim_pn,
    iter_simplex,
    polydisk_lower,
)
from .upper_bounds import BetaTable, beta_table, cert_upper


def universal_lower(n: int, d: int, ctx: PrecisionContext = None) -> mpfr:
    """Exponent lower bound valid for every admissible exponent vector.

    Equals max(0, N log(N/n) - N) with N = dim - 1; the maximum of
    N log r - n r over r >= 1 sits at r = N/n, and the clamp at 0 is the
    constant polynomial.  Rounded down.
    """
    from .numerics import DEFAULT_CONTEXT

    ctx = ctx or DEFAULT_CONTEXT
    if n < 1:
        return mpfr(0)
    down = ctx.field.down
    N = dim_pn(n, d) - 1
    if N <= n:
        return mpfr(0)
    val = down.mul(N, down.sub(down.log(down.div(mpfr(N), n)), 1))
    return max(mpfr(0), val)


def main_term(n: int, d: int, ctx: PrecisionContext = None) -> mpfr:
    """Reference growth term n^(d+1) log n / ((d-1)! (d+1))."""
    from .numerics import DEFAULT_CONTEXT

    ctx = ctx or DEFAULT_CONTEXT
    if n <= 1:
        return mpfr(0)
    near = ctx.field.near
    n_pow = gmpy2.mpz(n) ** (d + 1)
    return near.div(near.mul(n_pow, near.log(mpfr(n))), gmpy2.fac(d - 1) * (d + 1))


# ---------------------------------------------------------------------------
# vanishing-order polynomials
# ---------------------------------------------------------------------------


def _internal_bits(table: BetaTable, lambdas: dict, N: int, ctx: PrecisionContext) -> int:
    """Working precision for kernel coefficients and residual certification.

    Accounts for the largest |c_i| lambda_i^t encountered in the moment sums
    (S bits) plus enough headroom that the series bound can resolve the true
    curve norm, roughly min log beta - log N!.
    """
    min_lo = float(table.min_value.value.lo)
    s_bits = 0.0
    for idx, lm in table.entries.items():
        log2_c = (min_lo - float(lm.value.hi)) / math.log(2)
        lam = abs(float(lambdas[idx]))
        if lam > 1:
            cand = log2_c + (N - 1) * math.log2(lam)
        else:
            cand = log2_c
        s_bits = max(s_bits, cand)
    log_fac = math.lgamma(N + 1)
    target = max(
        ctx.mantissa_bits // 2 + 96,
        int((log_fac - min_lo) / math.log(2)) + 64,
    )
    target = min(target, 6000)
    bits = int(s_bits) + target + 96
    bits = max(bits, ctx.mantissa_bits)
    return ((bits + 63) // 64) * 64


def vanishing_poly(
    n: int,
    x: ExponentVector,
    ctx: PrecisionContext = None,
    table: BetaTable | None = None,
) -> Poly:
    """Nonzero degree-n polynomial whose pullback vanishes to order >= N at 0.

    Kernel vector of the N x (N+1) moment system sum_i c_i lambda_i^t = 0 for
    t < N, realized through divided differences: c_i is proportional to the
    reciprocal of prod_{k != i} (lambda_i - lambda_k), which is exactly the
    frequency-difference product of index i.  Coefficients are normalized so
    max |c| = 1 and the residuals |f^(t)(0)| are certified below
    2^(-mantissa_bits/2) * sum |c| before returning.
    """
    from .numerics import DEFAULT_CONTEXT

    ctx = ctx or DEFAULT_CONTEXT
    d = x.d
    N = dim_pn(n, d) - 1
    if N < 1:
        return Poly.one(d)
    frequencies(n, x, ctx)  # certifies pairwise-distinct frequencies
    if table is None:
        table = beta_table(n, x, ctx)
    lambdas = {idx: mpq(idx.j0) + x.dot(idx.j) for idx in table.entries}
    bits = _internal_bits(table, lambdas, N, ctx)

    tol_shift = ctx.mantissa_bits // 2
    for attempt in range(ctx.max_escalations + 1):
        work = ctx.with_bits(bits)
        hi_table = beta_table(n, x, work) if bits > ctx.mantissa_bits else table
        field = work.field
        near = field.near
        min_lm = hi_table.min_value
        min_mid = field.mid(min_lm.value)
        coeffs = {}
        for idx, lm in hi_table.entries.items():
            mag = near.exp(near.sub(min_mid, field.mid(lm.value)))
            sign = lm.sign * min_lm.sign
            coeffs[idx] = (near.mul(sign, mag), mpfr(0))
        P = Poly(n, d, coeffs)
        resid = vanishing_residuals(P, x, work)
        sum_c = mpfr(0)
        for re, _ in coeffs.values():
            sum_c = field.down.add(sum_c, exact_abs(re))
        tol = field.down.mul(sum_c, mpfr(2) ** (-tol_shift))
        worst = max((r.hi for r in resid), default=mpfr(0))
        if worst <= tol:
            return P
        bits *= 2
    raise PrecisionExhausted(
        f"vanishing residuals stayed above tolerance at {bits // 2} bits"
    )


def vanishing_residuals(P: Poly, x: ExponentVector, ctx: PrecisionContext) -> list:
    """Certified |f^(t)(0)| = |sum_i c_i lambda_i^t| for t = 0 .. N-1."""
    field = ctx.field
    N = dim_pn(P.n, P.d) - 1
    lams = poly_frequencies(P, x)
    abs_lams = [field.make(abs(v)) for v in lams]  # mpq abs is exact
    signs = [1 if v >= 0 else -1 for v in lams]
    cs = [(exact_abs(re), 1 if re >= 0 else -1) for re, _ in P.coeffs.values()]
    out = []
    pow_lo = [mpfr(1)] * len(lams)
    pow_hi = [mpfr(1)] * len(lams)
    down, up = field.down, field.up
    for t in range(N):
        if t:
            for i, al in enumerate(abs_lams):
                pow_lo[i] = down.mul(pow_lo[i], al.lo)
                pow_hi[i] = up.mul(pow_hi[i], al.hi)
        acc_lo = mpfr(0)
        acc_hi = mpfr(0)
        for i, (c_abs, c_sign) in enumerate(cs):
            s = c_sign if t % 2 == 0 else c_sign * signs[i]
            # term = s * |c| * |lambda|^t with |lambda|^t in [pow_lo, pow_hi]
            if s > 0:
                t_lo = down.mul(c_abs, pow_lo[i])
                t_hi = up.mul(c_abs, pow_hi[i])
            else:
                t_lo = exact_neg(up.mul(c_abs, pow_hi[i]))
                t_hi = exact_neg(down.mul(c_abs, pow_lo[i]))
            acc_lo = down.add(acc_lo, t_lo)
            acc_hi = up.add(acc_hi, t_hi)
        out.append(field.abs(RealInterval(min(acc_lo, acc_hi), max(acc_lo, acc_hi))))
    return out


# ---------------------------------------------------------------------------
# ratio certification and resonance witnesses
# ---------------------------------------------------------------------------


def lower_from_poly(
    P: Poly,
    x: ExponentVector,
    ctx: PrecisionContext = None,
    samples=None,
) -> mpfr:
    """Certified exponent lower bound log(polydisk lower / curve upper).

    Any nonzero polynomial witnesses the ratio of its polydisk norm to its
    curve norm; rounding is outward on both sides and the result clamps at 0.
    """
    from .numerics import DEFAULT_CONTEXT

    ctx = ctx or DEFAULT_CONTEXT
    if P.is_zero():
        raise ValueError("need a nonzero polynomial")
    coeff_bits = max((v[0].precision for v in P.coeffs.values()), default=ctx.mantissa_bits)
    eval_ctx = ctx if coeff_bits <= ctx.mantissa_bits else ctx.with_bits(
        ((coeff_bits + 63) // 64) * 64
    )
    field = eval_ctx.field
    if samples is None:
        samples = default_torus_samples(x.d, ctx)
    pl = polydisk_lower(P, samples, eval_ctx)
    kn = k_norm(P, x, eval_ctx)
    if not pl > 0 or not kn.hi > 0:
        return mpfr(0)
    val = field.down.sub(field.down.log(pl), field.up.log(kn.hi))
    return max(mpfr(0), val)


def resonance_poly(q, x: ExponentVector) -> tuple[int, Poly]:
    """Two-monomial witness for an integer vector q with q . x near an integer.

    For p = nearest integer of q . x the witness is z0^p - prod z_l^(q_l)
    when p >= 0, and z0^(-p) prod z_l^(q_l) - 1 when p < 0; both have
    polydisk norm exactly 2.
    """
    q = tuple(int(v) for v in q)
    if any(v < 0 for v in q) or all(v == 0 for v in q):
        raise ValueError("q must be nonnegative and nonzero")
    p, _ = _nearest_int_exact(x.dot(q))
    d = x.d
    zeros = (0,) * d
    if p >= 0:
        n = max(p, sum(q))
        coeffs = {
            MultiIndex(p, zeros): (mpfr(1), mpfr(0)),
            MultiIndex(0, q): (mpfr(-1), mpfr(0)),
        }
    else:
        n = -p + sum(q)
        coeffs = {
            MultiIndex(-p, q): (mpfr(1), mpfr(0)),
            MultiIndex(0, zeros): (mpfr(-1), mpfr(0)),
        }
    return n, Poly(n, d, coeffs)


def resonance_lower(q, x: ExponentVector, ctx: PrecisionContext = None) -> tuple[int, mpfr]:
    """Degree and certified lower bound from the two-monomial witness at q.

    The pullback satisfies |f| <= 2 e^n <q . x> on the disk, so the exponent
    at degree n = max(|p|, sum q) is at least -n - log <q . x>; clamped at 0.
    For p < 0 the constant-term witness gives the sharper -log <q . x>.
    """
    from .numerics import DEFAULT_CONTEXT

    ctx = ctx or DEFAULT_CONTEXT
    q = tuple(int(v) for v in q)
    if any(v < 0 for v in q) or all(v == 0 for v in q):
        raise ValueError("q must be nonnegative and nonzero")
    p, dist = _nearest_int_exact(x.dot(q))
    if dist == 0:
        raise IndependenceViolation(q, p)
    field = ctx.field
    dist_hi = field.make(dist).hi
    neg_log = exact_neg(field.up.log(dist_hi))  # -log rounded down
    if p >= 0:
        n = max(p, sum(q))
        val = field.down.sub(neg_log, n)
    else:
        n = -p + sum(q)
        val = neg_log
    return n, max(mpfr(0), val)


# ---------------------------------------------------------------------------
# coefficient-space search
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 4
    iterations: int = 24
    coords_per_iter: int = 8
    float_samples: int = 1024
    circle_samples: int = 1024
    seed: int = 2718


def _float_objective_matrices(n, d, x, cfg):
    idxs = list(iter_simplex(n, d))
    exps = np.array([[i.j0, *i.j] for i in idxs], dtype=np.float64)
    rng = np.random.default_rng(cfg.seed)
    u = rng.random((cfg.float_samples, d + 1))
    torus = np.exp(2j * np.pi * (u @ exps.T))
    lams = np.array([float(i.j0) + float(x.dot(i.j)) for i in idxs])
    theta = 2 * np.pi * np.arange(cfg.circle_samples) / cfg.circle_samples
    circle = np.exp(np.exp(1j * theta)[:, None] * lams[None, :])
    return idxs, torus, circle, rng


def _float_ratio(c, torus, circle):
    num = np.abs(torus @ c).max()
    den = np.abs(circle @ c).max()
    if den <= 0 or not np.isfinite(den):
        return 0.0
    return num / den


def optimizer_lower(
    n: int,
    x: ExponentVector,
    ctx: PrecisionContext = None,
    cfg: OptimizerConfig | None = None,
    warm: list | None = None,
) -> tuple[mpfr, Poly]:
    """Best certified exponent lower bound from a coefficient-space search.

    Multi-start coordinate ascent on the float64 ratio of sampled polydisk
    and curve norms, warm-started from the vanishing-order witness and the
    best scanned resonance witness.  Only certified values are returned: the
    final bound is the max of the certified candidate ratios, the warm-start
    values, and the universal bound, so the search can only help.

    ``warm`` optionally carries pre-certified (value, Poly) pairs to avoid
    recomputing pipeline values.
    """
    from .numerics import DEFAULT_CONTEXT

    ctx = ctx or DEFAULT_CONTEXT
    cfg = cfg or OptimizerConfig(seed=ctx.seed)
    d = x.d
    if n == 0:
        return mpfr(0), Poly.one(d)

    best_val = universal_lower(n, d, ctx)
    best_poly = Poly.one(d)
    starts: list[np.ndarray] = []

    if warm is None:
        warm = []
        vp = vanishing_poly(n, x, ctx)
        warm.append((lower_from_poly(vp, x, ctx), vp))
        try:
            profile = scan(x, max(1, n // d), cone="nonneg", ctx=ctx)
            res_candidates = [r.q for r in profile.records]
        except IndependenceViolation:
            res_candidates = []
        best_res = None
        for q in res_candidates:
            nq, rp = resonance_poly(q, x)
            if nq <= n:
                _, val = resonance_lower(q, x, ctx)
                if best_res is None or val > best_res[0]:
                    best_res = (val, rp)
        if best_res is not None:
            warm.append(best_res)

    idxs, torus, circle, rng = _float_objective_matrices(n, d, x, cfg)
    pos = {idx: i for i, idx in enumerate(idxs)}

    for val, poly in warm:
        if val > best_val:
            best_val, best_poly = val, poly
        c = np.zeros(len(idxs), dtype=complex)
        ok = True
        for idx, (re, im) in poly.terms():
            fre, fim = float(re), float(im)
            if not (np.isfinite(fre) and np.isfinite(fim)):
                ok = False
                break
            c[pos[idx]] = complex(fre, fim)
        if ok and np.abs(c).max() > 0:
            starts.append(c / np.abs(c).max())

    while len(starts) < cfg.restarts:
        c = rng.standard_normal(len(idxs)) + 1j * rng.standard_normal(len(idxs))
        starts.append(c / np.abs(c).max())

    best_float = None
    for c0 in starts[: cfg.restarts]:
        c = c0.copy()
        fval = _float_ratio(c, torus, circle)
        step = 0.25
        for _ in range(cfg.iterations):
            improved = False
            coords = rng.integers(0, len(c), size=min(cfg.coords_per_iter, len(c)))
            for k in coords:
                for delta in (step, -step, step * 1j, -step * 1j):
                    trial = c.copy()
                    trial[k] += delta * max(1.0, abs(trial[k]))
                    tval = _float_ratio(trial, torus, circle)
                    if tval > fval:
                        c, fval = trial, tval
                        improved = True
            if not improved:
                step *= 0.5
                if step < 1e-4:
                    break
        if best_float is None or fval > best_float[0]:
            best_float = (fval, c)

    if best_float is not None and np.isfinite(best_float[1]).all():
        c = best_float[1]
        scale = np.abs(c).max()
        if scale > 0:
            c = c / scale
            coeffs = {
                idxs[i]: (mpfr(float(c[i].real)), mpfr(float(c[i].imag)))
                for i in range(len(idxs))
                if c[i] != 0
            }
            if coeffs:
                cand = Poly(n, d, coeffs)
                val = lower_from_poly(cand, x, ctx)
                if val > best_val:
                    best_val, best_poly = val, cand
    return best_val, best_poly


# ---------------------------------------------------------------------------
# combined report
# ---------------------------------------------------------------------------


@dataclass
class BoundReport:
    """Certified lower and upper bounds for one (n, x) with reference values."""

    n: int
    d: int
    x_descriptor: str
    precision_bits: int
    lower_universal: mpfr = None
    lower_vanishing: mpfr = None
    lower_resonance: mpfr | None = None
    resonance_q: tuple | None = None
    lower_optimizer: mpfr = None
    upper_cert: mpfr = None
    asymptote: mpfr = None

    def best_lower(self) -> mpfr:
        vals = [self.lower_universal, self.lower_vanishing, self.lower_optimizer]
        if self.lower_resonance is not None:
            vals.append(self.lower_resonance)
        return max(vals)

    def to_json_dict(self) -> dict:
        def num(v):
            return {"value": str(v), "bits": self.precision_bits}

        out = {
            "n": self.n,
            "d": self.d,
            "x": self.x_descriptor,
            "lower_universal": num(self.lower_universal),
            "lower_vanishing": num(self.lower_vanishing),
            "lower_optimizer": num(self.lower_optimizer),
            "upper_cert": num(self.upper_cert),
            "asymptote": num(self.asymptote),
        }
        if self.lower_resonance is not None:
            out["lower_resonance"] = num(self.lower_resonance)
            out["resonance_q"] = list(self.resonance_q)
        return out

    CSV_FIELDS = (
        "n",
        "d",
        "x",
        "lower_universal",
        "lower_vanishing",
        "lower_resonance",
        "resonance_q",
        "lower_optimizer",
        "upper_cert",
        "asymptote",
    )

    def csv_row(self) -> list[str]:
        return [
            str(self.n),
            str(self.d),
            self.x_descriptor,
            str(self.lower_universal),
            str(self.lower_vanishing),
            str(self.lower_resonance) if self.lower_resonance is not None else "",
            " ".join(map(str, self.resonance_q)) if self.resonance_q else "",
            str(self.lower_optimizer),
            str(self.upper_cert),
            str(self.asymptote),
        ]


def compute_bound_report(
    n: int,
    x: ExponentVector,
    ctx: PrecisionContext = None,
    optimizer_cfg: OptimizerConfig | None = None,
    samples=None,
    force_budget: bool = False,
) -> BoundReport:
    """Assemble every bound for one degree into a BoundReport."""
    from .numerics import DEFAULT_CONTEXT

    ctx = ctx or DEFAULT_CONTEXT
    d = x.d
    report = BoundReport(
        n=n, d=d, x_descriptor=x.descriptor, precision_bits=ctx.mantissa_bits
    )
    report.lower_universal = universal_lower(n, d, ctx)
    report.asymptote = main_term(n, d, ctx)
    if samples is None:
        samples = default_torus_samples(d, ctx)

    if n == 0:
        zero = mpfr(0)
        report.lower_vanishing = zero
        report.lower_optimizer = zero
        report.upper_cert = zero
        return report

    frequencies(n, x, ctx)
    table = beta_table(n, x, ctx, force_budget=force_budget)
    report.upper_cert = cert_upper(n, x, ctx, table).value.hi

    vp = vanishing_poly(n, x, ctx, table=table)
    report.lower_vanishing = lower_from_poly(vp, x, ctx, samples)

    warm = [(report.lower_vanishing, vp)]
    best_res = None
    profile = scan(x, max(1, n // d), cone="nonneg", ctx=ctx)
    for rec in profile.records:
        nq, rp = resonance_poly(rec.q, x)
        if nq > n:
            continue
        _, val = resonance_lower(rec.q, x, ctx)
        if best_res is None or val > best_res[0]:
            best_res = (val, rp, rec.q)
    if best_res is not None:
        report.lower_resonance = best_res[0]
        report.resonance_q = best_res[2]
        warm.append((best_res[0], best_res[1]))

    report.lower_optimizer, _ = optimizer_lower(
        n, x, ctx, cfg=optimizer_cfg, warm=warm
    )
    return report
