"""Universal, vanishing-order, resonance, and search lower bounds."""

import math

import pytest
from gmpy2 import mpq

from bwbounds import (
    MultiIndex,
    OptimizerConfig,
    Poly,
    PrecisionContext,
    cert_upper,
    compute_bound_report,
    dim_pn,
    iter_simplex,
    liouville_fixture,
    lower_from_poly,
    main_term,
    optimizer_lower,
    parse_exponents,
    resonance_lower,
    resonance_poly,
    universal_lower,
    vanishing_poly,
    vanishing_residuals,
)
from bwbounds.curve import poly_frequencies
from bwbounds.diophantine import _nearest_int_exact
from bwbounds.upper_bounds import beta_table


def test_universal_lower_small_degrees_clamp(ctx):
    assert float(universal_lower(1, 1, ctx)) == 0.0  # 2 log 2 - 2 < 0
    assert float(universal_lower(2, 1, ctx)) == 0.0  # 5 log 2.5 - 5 < 0


def test_universal_lower_n10(ctx):
    v = float(universal_lower(10, 1, ctx))
    assert v == pytest.approx(65 * math.log(6.5) - 65, rel=1e-12)


def test_universal_lower_monotone(ctx):
    vals = [float(universal_lower(n, 1, ctx)) for n in range(3, 101)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_main_term_values(ctx):
    assert float(main_term(10, 1, ctx)) == pytest.approx(100 * math.log(10) / 2)
    assert float(main_term(2, 2, ctx)) == pytest.approx(8 * math.log(2) / 3)
    # d = 1 coefficient is 1/2
    assert float(main_term(7, 1, ctx)) == pytest.approx(49 * math.log(7) * 0.5)


def test_vanishing_poly_hand_kernel(ctx, golden):
    # frequencies {0, x, 1}: kernel is proportional to (x-1, 1, -x) in
    # graded-lex coefficient order (1, z1, z0)
    P = vanishing_poly(1, golden, ctx)
    x = golden.entries[0]
    c = {idx: mpq(re) for idx, (re, im) in P.terms()}
    c0 = c[MultiIndex(0, (0,))]
    c1 = c[MultiIndex(0, (1,))]
    cz = c[MultiIndex(1, (0,))]
    # cross-ratios against the hand solution (x-1, -x, 1) for (1, z0, z1)
    scale = c1 / 1  # hand kernel has coefficient 1 on z1
    assert abs(c0 / scale - (x - 1)) < mpq(1, 2**200)
    assert abs(cz / scale - (-x)) < mpq(1, 2**200)
    # normalization: the largest magnitude is exactly 1
    assert max(abs(v) for v in c.values()) == 1


def test_vanishing_poly_scale_invariant_normalization(ctx, golden):
    a = vanishing_poly(3, golden, ctx)
    b = vanishing_poly(3, golden, PrecisionContext(mantissa_bits=320))
    ca = {idx: mpq(re) for idx, (re, _) in a.terms()}
    cb = {idx: mpq(re) for idx, (re, _) in b.terms()}
    assert max(abs(v) for v in ca.values()) == 1
    assert max(abs(v) for v in cb.values()) == 1
    for idx in ca:
        assert abs(ca[idx] - cb[idx]) < mpq(1, 2**150)


def test_vanishing_residuals_n3_d2(root_pair):
    ctx = PrecisionContext(mantissa_bits=512)
    P = vanishing_poly(3, root_pair, ctx)
    res = vanishing_residuals(P, root_pair, ctx)
    assert len(res) == dim_pn(3, 2) - 1
    assert max(float(r.hi) for r in res) <= 2.0**-200


def test_vanishing_matches_elimination_oracle(ctx, golden):
    # independent kernel via exact fraction-free Gaussian elimination
    n = 2
    fs_lams = [mpq(i.j0) + golden.dot(i.j) for i in iter_simplex(n, 1)]
    N = len(fs_lams) - 1
    rows = [[lam**t for lam in fs_lams] for t in range(N)]
    # eliminate exactly over the rationals
    cols = list(range(N + 1))
    mat = [row[:] for row in rows]
    piv_cols = []
    r = 0
    for c_idx in range(N + 1):
        piv = None
        for rr in range(r, N):
            if mat[rr][c_idx] != 0:
                piv = rr
                break
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        piv_cols.append(c_idx)
        for rr in range(N):
            if rr != r and mat[rr][c_idx] != 0:
                factor = mat[rr][c_idx] / mat[r][c_idx]
                mat[rr] = [a - factor * b for a, b in zip(mat[rr], mat[r])]
        r += 1
        if r == N:
            break
    free = [c for c in range(N + 1) if c not in piv_cols][0]
    kernel = [mpq(0)] * (N + 1)
    kernel[free] = mpq(1)
    for rr in reversed(range(len(piv_cols))):
        c_idx = piv_cols[rr]
        s = sum(mat[rr][c2] * kernel[c2] for c2 in range(N + 1) if c2 != c_idx)
        kernel[c_idx] = -s / mat[rr][c_idx]
    top = max(abs(v) for v in kernel)
    kernel = [v / top for v in kernel]

    P = vanishing_poly(n, golden, ctx)
    ours = [mpq(re) for _, (re, _) in P.terms()]
    ratio = None
    for a, b in zip(kernel, ours):
        if a != 0 and b != 0:
            ratio = b / a
            break
    for a, b in zip(kernel, ours):
        assert abs(b - ratio * a) < mpq(1, 2**150)


def test_vanishing_leading_moment_equals_min_beta(ctx, golden):
    # with normalization c = beta_min / beta_i, the N-th moment is beta_min
    n = 3
    table = beta_table(n, golden, ctx)
    P = vanishing_poly(n, golden, ctx, table=table)
    N = dim_pn(n, 1) - 1
    lams = poly_frequencies(P, golden)
    moment = mpq(0)
    for (idx, (re, _)), lam in zip(P.terms(), lams):
        moment += mpq(re) * lam**N
    f = ctx.field
    expected_mag = f.exp(table.min_value.value)
    slack = mpq(1, 2**100)
    lo_q, hi_q = mpq(expected_mag.lo), mpq(expected_mag.hi)
    assert lo_q * (1 - slack) <= abs(moment) <= hi_q * (1 + slack)


def test_lower_from_poly_constant_clamps(ctx, golden):
    assert float(lower_from_poly(Poly.one(1), golden, ctx)) == 0.0


def test_lower_from_poly_resonance_value(ctx):
    # liouville(2,2) at q = 4: the bound is at least -n - log <q x>
    x = liouville_fixture(2, 2)
    q = (4,)
    n, P = resonance_poly(q, x)
    _, dist = _nearest_int_exact(x.dot(q))
    target = -n - math.log(float(dist))
    got = float(lower_from_poly(P, x, ctx))
    assert got >= target


def test_lower_from_poly_vanishing_beats_universal(ctx, golden):
    P = vanishing_poly(6, golden, ctx)
    got = float(lower_from_poly(P, golden, ctx))
    assert got >= float(universal_lower(6, 1, ctx)) - 1.0


def test_resonance_lower_clamps_and_values(ctx):
    x49 = parse_exponents("0.49")
    n, bound = resonance_lower((1,), x49, ctx)
    assert n == 1 and float(bound) == 0.0  # -1 - log 0.49 < 0

    x001 = parse_exponents("0.001")
    n, bound = resonance_lower((1,), x001, ctx)
    assert n == 1
    assert float(bound) == pytest.approx(-1 - math.log(0.001), rel=1e-9)


def test_resonance_lower_liouville_beats_reference(ctx):
    x = liouville_fixture(2, 2)
    n, bound = resonance_lower((4,), x, ctx)
    assert n == 4
    assert float(bound) == pytest.approx(62 * math.log(2) - 4, rel=1e-9)
    assert float(bound) >= 2 * float(main_term(4, 1, ctx))


def test_resonance_lower_negative_entry_witness(ctx):
    # negative exponent entry gives p < 0; the constant-term witness applies
    x = parse_exponents("-0.9")
    q = (2,)
    n, bound = resonance_lower(q, x, ctx)
    p, dist = _nearest_int_exact(x.dot(q))
    assert p < 0
    assert n == -p + 2
    assert float(bound) == pytest.approx(max(0.0, -math.log(float(dist))), rel=1e-9)
    nq, P = resonance_poly(q, x)
    assert nq == n
    from bwbounds.polynomials import polydisk_upper

    assert float(polydisk_upper(P, ctx.field)) == pytest.approx(2.0)


def test_resonance_trivial_q_sanity_ceiling(ctx, golden):
    n, bound = resonance_lower((1,), golden, ctx)
    _, dist = _nearest_int_exact(golden.dot((1,)))
    assert float(bound) <= float(universal_lower(n, 1, ctx)) + abs(math.log(float(dist)))


def test_optimizer_degree_zero(ctx, golden):
    bound, witness = optimizer_lower(0, golden, ctx)
    assert float(bound) == 0.0
    assert len(witness) == 1


def test_optimizer_keeps_best_warm_start(ctx, golden):
    cfg = OptimizerConfig(restarts=2, iterations=6, seed=1)
    vp = vanishing_poly(4, golden, ctx)
    warm_val = lower_from_poly(vp, golden, ctx)
    bound, _ = optimizer_lower(4, golden, ctx, cfg=cfg, warm=[(warm_val, vp)])
    assert float(bound) >= float(warm_val) - 1e-6
    assert float(bound) >= float(universal_lower(4, 1, ctx)) - 1e-6


def test_optimizer_within_sandwich(ctx, golden):
    cfg = OptimizerConfig(restarts=2, iterations=8, seed=3)
    bound, witness = optimizer_lower(6, golden, ctx, cfg=cfg)
    assert float(universal_lower(6, 1, ctx)) - 1e-9 <= float(bound)
    assert float(bound) <= float(cert_upper(6, golden, ctx).value.hi)
    assert not witness.is_zero()


def test_bound_report_fields_and_sandwich(ctx, golden):
    rep = compute_bound_report(5, golden, ctx)
    assert rep.n == 5 and rep.d == 1
    assert float(rep.best_lower()) <= float(rep.upper_cert)
    assert float(rep.lower_universal) >= 0
    assert float(rep.asymptote) == pytest.approx(float(main_term(5, 1, ctx)))
    doc = rep.to_json_dict()
    assert doc["n"] == 5
    assert set(doc["lower_vanishing"]) == {"value", "bits"}
    row = rep.csv_row()
    assert len(row) == len(rep.CSV_FIELDS)


def test_bound_report_degree_zero(ctx, golden):
    rep = compute_bound_report(0, golden, ctx)
    assert float(rep.upper_cert) == 0.0
    assert float(rep.best_lower()) == 0.0
