"""Acceptance suite: one test and one PASS/FAIL line per criterion."""

import random
import time
from fractions import Fraction

from mpmath import mp

from classical import gauss_connection, random_order_two
from hyperconnect.cli import QUINTIC_STRUCTURE, _quartic_symbolic, quintic_structure_value
from hyperconnect.connection import (
    buehring_A,
    buehring_expansion,
    connection_matrix_closed,
    gp_basis_matrix,
    h_coeff,
    h_series,
    identity_residuals,
    normalized_pfq,
    taylor_shift_coefficient,
)
from hyperconnect.equation import QUARTIC, QUINTIC, BuehringParameters, buehring_params, new_equation
from hyperconnect.frobenius import preset_basis
from hyperconnect.numerics import PoleError
from hyperconnect.oracle import cross_point_consistency, numeric_connection
from hyperconnect.series_engine import (
    ConvergenceError,
    dixon_3f2,
    gauss_2f1_at_unity,
    gp_at_zero,
    lavoie_3f2_variant,
    pfq,
    threeF2_at_unity,
)

F = Fraction
D, N = 60, 400


def tiny(e):
    return mp.mpf(10) ** -e


def fmt(x):
    return mp.nstr(x, 3)


def max_abs(M, R, n):
    return max(abs(M[i, j] - R[i, j]) for i in range(n) for j in range(n))


def test_criterion_1_quartic(report_criterion):
    mp.dps = D
    t0 = time.perf_counter()
    closed = connection_matrix_closed(QUARTIC, digits=D)
    seconds = time.perf_counter() - t0
    oracle = numeric_connection(QUARTIC, digits=D, order=N)
    symbolic = _quartic_symbolic()
    d_symbolic = max_abs(closed.matrix, symbolic, 3)
    d_oracle = closed.max_delta(oracle)
    zeros = max(abs(closed.matrix[i, j]) for i, j in ((0, 2), (1, 2), (2, 1)))
    ok = d_symbolic < tiny(30) and d_oracle < tiny(30) and zeros < tiny(30) and seconds < 60
    report_criterion(1, ok, f"vs symbolic {fmt(d_symbolic)}, vs oracle {fmt(d_oracle)}, zeros {fmt(zeros)} (< 1e-30); {seconds:.1f} s (< 60 s)")
    assert ok


def test_criterion_2_quintic(report_criterion):
    mp.dps = D
    t0 = time.perf_counter()
    closed = connection_matrix_closed(QUINTIC, digits=D)
    seconds = time.perf_counter() - t0
    oracle = numeric_connection(QUINTIC, digits=D, order=N)
    delta = closed.max_delta(oracle)
    structural = max(abs(oracle.matrix[i, j] - quintic_structure_value(v)) for (i, j), v in QUINTIC_STRUCTURE.items())
    ok = delta < tiny(8) and structural < tiny(30) and seconds < 600
    report_criterion(2, ok, f"closed vs oracle {fmt(delta)} (< 1e-8), oracle structure {fmt(structural)} (< 1e-30); {seconds:.0f} s (< 600 s)")
    assert ok


def test_criterion_3_identity(report_criterion):
    rows = [identity_residuals(m, tiny(20)) for m in range(3)]
    ok = all(r["residual"] < tiny(6) for r in rows)
    text = "; ".join(
        f"m={r['m']}: |Im k - pi h| {fmt(r['residual'])}, |Im k - pi|h|| {fmt(r['residual_abs'])}, |Im k + pi h| {fmt(r['residual_negated'])}"
        for r in rows
    )
    report_criterion(3, ok, text + " (threshold 1e-6)")
    assert ok


def test_criterion_4_goldens(report_criterion):
    def column(name, point, j, count, start=0):
        fm = preset_basis(name, point, start + count)
        return [fm.columns[j].coeffs[k][0] for k in range(start, start + count)]

    checks = [
        (column("quartic", 0, 0, 3, 1), [F(3, 32), F(315, 8192), F(5775, 262144)]),
        (column("quintic", 0, 0, 2, 1), [F(24, 625), F(4536, 390625)]),
        (column("quintic", 1, 1, 2, 2), [F(7, 10), F(41, 75)]),
    ]
    ok = all(got == want and all(isinstance(x, Fraction) for x in got) for got, want in checks)
    report_criterion(4, ok, "; ".join(f"{[str(x) for x in got]} vs {[str(x) for x in want]}" for got, want in checks))
    assert ok


def _fraction(rng, low, high, denominators=(3, 13)):
    d = rng.randint(*denominators)
    return F(rng.randint(int(low * d) + 1, int(high * d) - 1), d)


def _nonresonant_order_three(rng):
    while True:
        alpha = [_fraction(rng, 0, 2) for _ in range(3)]
        gamma = [_fraction(rng, -0.9, 0.9) for _ in range(2)]
        eq = new_equation(alpha, gamma)
        p = buehring_params(eq)
        diffs = [x - y for x in eq.gamma for y in eq.gamma if x is not y]
        if any(d.denominator == 1 for d in diffs) or p.c.denominator == 1:
            continue
        if p.c <= 0 or min(p.a) <= 0 or any(x.denominator == 1 and x <= 0 for x in p.b):
            continue
        return eq, p


def test_criterion_5_two_branch_expansion(report_criterion):
    mp.dps = D
    rng = random.Random("criterion-5")
    z = mp.mpf("0.9")
    worst = mp.mpf(0)
    for _ in range(20):
        eq, p = _nonresonant_order_three(rng)
        a = buehring_expansion(p, z, 36, tiny(26))
        b = normalized_pfq(p, z, tiny(40))
        worst = max(worst, abs(a - b))
    ok = worst < tiny(20)
    report_criterion(5, ok, f"20 random equations, worst |two-branch - direct| at z = 0.9 is {fmt(worst)} (< 1e-20)")
    assert ok


def test_criterion_6_resonant_overlap(report_criterion):
    mp.dps = D
    z = mp.mpf("0.9")
    a = h_series(QUARTIC, z, 41, tiny(30))
    b = gp_at_zero(QUARTIC, 2, 600).evaluate(z)
    delta = abs(a - b)
    ok = delta < tiny(15)
    report_criterion(6, ok, f"|h series (m <= 40) - G_2 residues| at z = 0.9 is {fmt(delta)} (< 1e-15)")
    assert ok


def _nonpositive_int(x):
    return x.denominator == 1 and x <= 0


def _admissible(upper, lower, excess):
    return not any(_nonpositive_int(x) for x in list(upper) + list(lower)) and sum(lower) - sum(upper) >= excess


def _identity_cases(rng, count):
    """(name, upper, lower, closed value) for each identity family."""
    out = []
    builders = {
        "gauss": lambda a: ([a[0], a[1]], [a[2]], lambda: gauss_2f1_at_unity(a[0], a[1], a[2])),
        "dixon": lambda a: ([a[0], a[1], a[2]], [1 + a[0] - a[1], 1 + a[0] - a[2]], lambda: dixon_3f2(*a)),
        "lavoie-1": lambda a: ([a[0], a[1], a[2]], [a[0] - a[1], 1 + a[0] - a[2]], lambda: lavoie_3f2_variant(1, *a)),
        "lavoie-2": lambda a: ([a[0], a[1], a[2]], [2 + a[0] - a[1], 1 + a[0] - a[2]], lambda: lavoie_3f2_variant(2, *a)),
    }
    for name, build in builders.items():
        found = 0
        while found < count:
            a = [_fraction(rng, -2, 4, (2, 12)) for _ in range(3)]
            upper, lower, value = build(a)
            if not _admissible(upper, lower, F(1, 3)):
                continue
            try:
                v = value()
            except (PoleError, ConvergenceError):
                continue
            if v == 0:
                # a vanishing Gamma quotient has no relative error to measure
                continue
            out.append((name, upper, lower, v))
            found += 1
    return out


def test_criterion_7_identity_suite(report_criterion):
    mp.dps = 40
    rng = random.Random("criterion-7")
    cases = _identity_cases(rng, 100)
    golden = gauss_2f1_at_unity(F(1, 5), F(2, 5), F(4, 5))
    worst = {"golden": abs(golden - 2 * mp.cos(mp.pi / 5)) / golden}
    for name, upper, lower, value in cases:
        if len(upper) == 2:
            direct = pfq(upper, lower, 1, tiny(26)).value
        else:
            direct = threeF2_at_unity(upper, lower, tiny(26), closed_form=False).value
        rel = abs(direct - value) / abs(value)
        worst[name] = max(worst.get(name, mp.mpf(0)), rel)
    ok = all(v < tiny(20) for v in worst.values())
    text = ", ".join(f"{k} {fmt(v)}" for k, v in worst.items())
    report_criterion(7, ok, f"100 sets per family, worst relative error: {text} (< 1e-20)")
    assert ok


def test_criterion_8_properties(report_criterion):
    rng = random.Random("criterion-8")
    a0_ok = 0
    while a0_ok < 100:
        n = rng.choice((3, 4))
        a = tuple(_fraction(rng, -2, 3) for _ in range(n))
        b = tuple(_fraction(rng, -2, 3) for _ in range(n - 1))
        try:
            value = buehring_A(BuehringParameters(a, b, sum(b) - sum(a)), 0)
        except PoleError:
            continue
        if value != 1:
            break
        a0_ok += 1
    parts = [f"A(0) = 1 on {a0_ok}/100 sets"]
    ok = a0_ok == 100

    tri = True
    for q in range(2, 7):
        M = gp_basis_matrix(new_equation(["1/7"] * q, [0] * q), q)
        tri &= all(abs(M[p, p]) > 0 for p in range(q))
        tri &= all(M[p, j] == 0 for p in range(q) for j in range(p + 1, q))
    parts.append(f"basis change triangular with nonzero diagonal for q <= 6: {tri}")
    ok &= tri

    eq = new_equation(["1/3", "1/2", "3/4"], ["1/4", "1/4"])
    shift = max(abs(h_coeff(eq, m).value - taylor_shift_coefficient(eq, 2, 1, m)) for m in range(4))
    parts.append(f"Taylor shift n=3 p=2 m<=3 {fmt(shift)} (< 1e-15)")
    ok &= shift < tiny(15)

    mp.dps = D
    spread = max(cross_point_consistency(numeric_connection(eq, digits=D, order=N)) for eq in (QUARTIC, QUINTIC))
    parts.append(f"oracle cross-point {fmt(spread)} (< 1e-30)")
    ok &= spread < tiny(30)
    report_criterion(8, ok, "; ".join(parts))
    assert ok


def test_criterion_9_order_two(report_criterion):
    worst = mp.mpf(0)
    for eq in random_order_two(20, "criterion-9"):
        mp.dps = D
        M = numeric_connection(eq, digits=D, order=N)
        mp.dps = D + 10
        worst = max(worst, max_abs(M.matrix, gauss_connection(eq), 2))
    ok = worst < tiny(40)
    report_criterion(9, ok, f"20 samples, worst delta to Gamma quotients {fmt(worst)} (< 1e-40)")
    assert ok
