import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp

from hyperconnect.equation import QUARTIC, QUINTIC, new_equation
from hyperconnect.frobenius import preset_basis
from hyperconnect.numerics import PoleError, to_mp
from hyperconnect.series_engine import (
    ConvergenceError,
    Family,
    SeriesError,
    accelerate,
    closed_form_3f2,
    dixon_3f2,
    gauss_2f1_at_unity,
    gp_at_zero,
    lavoie_3f2_variant,
    pfq,
    resonant_y_at_zero,
    slater_expand,
    threeF2_at_unity,
)

F = Fraction


def test_zero_upper_parameter_truncates():
    assert pfq([0, F(1, 3)], [F(1, 2)], F(9, 10)).value == 1


def test_log_series_at_one_half():
    assert abs(pfq([1, 1], [2], F(1, 2), mp.mpf(10) ** -29).value - 2 * mp.log(2)) < mp.mpf(10) ** -28


def test_terminating_3f2_inside_second_buehring_number():
    r = threeF2_at_unity([F(1, 5), F(1, 5), -1], [F(3, 5), F(-2, 5)])
    assert abs(r.value - mp.mpf(7) / 6) < mp.mpf(10) ** -28


def test_lower_parameter_pole_and_divergence_are_reported():
    with pytest.raises(PoleError):
        pfq([1], [-2], F(1, 2))
    with pytest.raises(ConvergenceError):
        pfq([1, 1, 1], [1, 1], 1)
    with pytest.raises(ConvergenceError):
        gauss_2f1_at_unity(1, 1, F(3, 2))


@given(
    st.lists(st.fractions(-3, 3, max_denominator=9), min_size=3, max_size=3),
    st.lists(st.fractions(F(1, 9), 4, max_denominator=9), min_size=2, max_size=2),
    st.fractions(F(-9, 10), F(9, 10), max_denominator=10),
)
@settings(max_examples=40, deadline=None)
def test_pfq_in_disk_matches_mpmath(a, b, z):
    got = pfq(a, b, z, mp.mpf(10) ** -28).value
    ref = mpmath.hyper([to_mp(x) for x in a], [to_mp(x) for x in b], to_mp(z))
    assert abs(got - ref) < mp.mpf(10) ** -25 * max(1, abs(ref))


def test_gauss_golden_ratio_case():
    v = gauss_2f1_at_unity(F(1, 5), F(2, 5), F(4, 5))
    assert abs(v - 2 * mp.cos(mp.pi / 5)) < mp.mpf(10) ** -28
    assert gauss_2f1_at_unity(0, F(2, 5), F(4, 5)) == 1


def test_dixon_trivial_and_quartic_case():
    assert dixon_3f2(F(1, 3), F(1, 7), 0) == 1
    # Gamma(1/4) Gamma(1/2)^2 / Gamma(3/4) * F equals Gamma(1/2) * A / 2
    A = mp.gamma(mp.mpf(1) / 8) * mp.gamma(mp.mpf(3) / 8) / (mp.gamma(mp.mpf(5) / 8) * mp.gamma(mp.mpf(7) / 8))
    f = dixon_3f2(F(1, 4), F(1, 2), F(1, 4))
    lhs = mp.gamma(mp.mpf(1) / 4) * mp.pi / mp.gamma(mp.mpf(3) / 4) * f
    assert abs(lhs - mp.sqrt(mp.pi) * A / 2) < mp.mpf(10) ** -27


def test_closed_form_recognition_by_shape():
    name, _ = closed_form_3f2([F(1, 4), F(1, 2), F(1, 4)], [F(3, 4), 1])
    assert name == "dixon"
    assert closed_form_3f2([F(1, 3), F(1, 7), F(2, 9)], [F(5, 4), F(7, 6)]) is None


def test_accelerated_sum_of_zeta_two():
    r = accelerate(lambda k: mp.mpf(1) / (k + 1) ** 2, [Family(1)], mp.mpf(10) ** -25)
    assert r.accelerated
    assert abs(r.value - mp.pi**2 / 6) < mp.mpf(10) ** -24


def test_accelerated_sum_with_logarithmic_tail():
    # sum log(k+2)/(k+2)^2 = -zeta'(2)
    r = accelerate(lambda k: mp.log(k + 2) / (k + 2) ** 2, [Family(1, 1)], mp.mpf(10) ** -22)
    assert abs(r.value + mp.zeta(2, derivative=1)) < mp.mpf(10) ** -20


def _admissible_3f2(rng, shape):
    while True:
        a1, a2, a3 = (F(rng.randint(-20, 30), rng.randint(2, 12)) for _ in range(3))
        try:
            if shape == "dixon":
                val = dixon_3f2(a1, a2, a3)
                lower = [1 + a1 - a2, 1 + a1 - a3]
            else:
                val = lavoie_3f2_variant(shape, a1, a2, a3)
                lower = [a1 - a2 + 2 * (shape - 1), 1 + a1 - a3]
        except (PoleError, ConvergenceError):
            continue
        if any(x.denominator == 1 and x <= 0 for x in lower + [a1, a2, a3]):
            continue
        if sum(lower) - a1 - a2 - a3 < F(1, 2):
            continue
        return [a1, a2, a3], lower, val


@pytest.mark.parametrize("shape", ["dixon", 1, 2])
def test_closed_forms_match_accelerated_summation(shape):
    rng = random.Random(f"identity-{shape}")
    for _ in range(8):
        a, b, val = _admissible_3f2(rng, shape)
        direct = threeF2_at_unity(a, b, mp.mpf(10) ** -24, closed_form=False).value
        assert abs(direct - val) < mp.mpf(10) ** -20 * max(1, abs(val)), (a, b)


def test_slater_one_term_matches_binomial_form():
    # int Gamma(a+t) Gamma(b-t) z^t = Gamma(a+b) z^b (1+z)^(-a-b)
    a, b, z = F(1, 3), F(2, 7), mp.mpf("0.4")
    v = slater_expand([a], [b], [], [], z=z, tol=mp.mpf(10) ** -29)
    ref = mp.gamma(to_mp(a + b)) * z ** to_mp(b) * (1 + z) ** (-to_mp(a + b))
    assert abs(v - ref) < mp.mpf(10) ** -27


def test_slater_two_term_matches_quadrature():
    a, b, c = [F(1, 5), F(2, 3)], [F(2, 5), F(3, 5)], [F(9, 4)]
    z = mp.mpf("0.3")
    v = slater_expand(a, b, c, [], z=z)

    def integrand(y):
        t = mp.mpc(0, y)
        out = z**t / mp.gamma(to_mp(c[0]) + t)
        for x in a:
            out *= mp.gamma(to_mp(x) + t)
        for x in b:
            out *= mp.gamma(to_mp(x) - t)
        return out

    ref = mp.quad(integrand, [-mp.inf, 0, mp.inf]) / (2 * mp.pi)
    assert abs(v - ref) < mp.mpf(10) ** -20


def test_slater_rejects_integer_spaced_poles():
    with pytest.raises(SeriesError):
        slater_expand([F(1, 3)], [F(2, 5), F(7, 5)], [], [], z=mp.mpf("0.2"))


@pytest.mark.parametrize("eq", [QUARTIC, new_equation(["1/3", "1/2", "3/4"], ["1/7", "2/5"])])
@pytest.mark.parametrize("p", [1, 2, 3])
def test_gp_at_zero_matches_meijer_g(eq, p):
    z = mp.mpf("0.3")
    G = gp_at_zero(eq, p, 120).evaluate(z)
    ref = mpmath.meijerg(
        [[1 - to_mp(a) for a in eq.alpha], []],
        [[to_mp(g) for g in eq.gamma[:p]], [to_mp(g) for g in eq.gamma[p:]]],
        z * mp.expjpi(p - 2),
    )
    # mpmath puts the argument e^(-i pi) z on the other sheet; compare moduli and the real part
    assert abs(abs(G) - abs(ref)) < mp.mpf(10) ** -20 * abs(ref)
    assert abs(G.real - ref.real) < mp.mpf(10) ** -20 * abs(ref)


def test_gp_at_zero_nonresonant_p1_is_prefactored_pfq():
    eq = new_equation(["1/3", "1/2", "3/4"], ["1/7", "2/5"])
    z = mp.mpf("0.3")
    g1 = eq.gamma[0]
    a = [x + g1 for x in eq.alpha]
    b = [1 - g + g1 for g in eq.gamma[1:]]
    pre = mp.expjpi(to_mp(-g1))
    for x in a:
        pre *= mp.gamma(to_mp(x))
    for x in b:
        pre *= mp.rgamma(to_mp(x))
    G = gp_at_zero(eq, 1, 80)
    assert abs(G.coefficient(g1, 0, 0) - pre) < mp.mpf(10) ** -25
    ref = pre * z ** to_mp(g1) * pfq(a, b, z, mp.mpf(10) ** -29).value
    assert abs(G.evaluate(z) - ref) < mp.mpf(10) ** -25


def test_quartic_gp_relations_to_preset_basis():
    mp.dps = 40
    z = mp.mpf("0.3")
    P = preset_basis("quartic", 0, 200, numeric=True).evaluate(z)
    g = mp.gamma(mp.mpf(1) / 4) * mp.gamma(mp.mpf(1) / 2) * mp.gamma(mp.mpf(3) / 4)
    assert abs(gp_at_zero(QUARTIC, 1, 200).evaluate(z) - g * P[0, 0]) < mp.mpf(10) ** -30
    assert abs(gp_at_zero(QUARTIC, 2, 200).evaluate(z) / (2j * mp.pi) + g * P[0, 1]) < mp.mpf(10) ** -30


def test_quintic_g4_relation_to_preset_basis():
    mp.dps = 40
    z = mp.mpf("0.3")
    P = preset_basis("quintic", 0, 200, numeric=True).evaluate(z)
    lhs = gp_at_zero(QUINTIC, 4, 200).evaluate(z) / (2j * mp.pi) ** 3
    rhs = (4 * mp.pi**2 / mp.sqrt(5)) * (P[0, 3] / 5 - P[0, 2] / 5 + P[0, 1])
    assert abs(lhs - rhs) < mp.mpf(10) ** -28 * abs(rhs)


@pytest.mark.parametrize("eq", [QUARTIC, QUINTIC])
def test_resonant_basis_change_reproduces_gp(eq):
    """G_p = e^(-2 pi i g1) e^(i pi sum g) (2 pi i)^(p-1) sum_j (-1)^(p-j) binom(p-1, p-j) y_j^*."""
    from math import comb

    z = mp.mpf("0.4")
    ys = [resonant_y_at_zero(eq, j, 150).evaluate(z) for j in range(1, eq.n + 1)]
    for p in range(1, eq.n + 1):
        G = gp_at_zero(eq, p, 150).evaluate(z)
        rhs = (2j * mp.pi) ** (p - 1) * sum((-1) ** (p - j) * comb(p - 1, p - j) * ys[j - 1] for j in range(1, p + 1))
        assert abs(G - rhs) < mp.mpf(10) ** -15 * abs(G)
