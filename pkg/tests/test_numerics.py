from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp

from hyperconnect import numerics as nm

rationals = st.fractions(min_value=Fraction(-15, 2), max_value=Fraction(25, 2), max_denominator=40).filter(
    lambda x: not (x.denominator == 1 and x <= 0)
)


@given(rationals)
@settings(max_examples=60, deadline=None)
def test_gamma_agrees_with_mpmath(x):
    mp.dps = 40
    assert abs(nm.gamma(x) - mpmath.gamma(nm.to_mp(x))) <= mp.mpf(10) ** -35 * abs(mpmath.gamma(nm.to_mp(x)))


@given(rationals)
@settings(max_examples=40, deadline=None)
def test_digamma_and_trigamma_agree_with_mpmath(x):
    mp.dps = 40
    z = nm.to_mp(x)
    assert abs(nm.digamma(x) - mpmath.digamma(z)) < mp.mpf(10) ** -33 * max(1, abs(mpmath.digamma(z)))
    assert abs(nm.polygamma(1, x) - mpmath.psi(1, z)) < mp.mpf(10) ** -33 * max(1, abs(mpmath.psi(1, z)))


def test_gamma_of_complex_argument():
    z = mp.mpc("0.3", "2.5")
    assert abs(nm.gamma(z) - mpmath.gamma(z)) < mp.mpf(10) ** -27


def test_reflection_value_at_minus_half():
    assert abs(nm.gamma(Fraction(-1, 2)) + 2 * mp.sqrt(mp.pi)) < mp.mpf(10) ** -28


def test_gamma_pole_raises_and_rgamma_vanishes():
    with pytest.raises(nm.PoleError):
        nm.gamma(-3)
    assert nm.rgamma(-3) == 0


def test_pochhammer_is_exact_on_rationals():
    assert nm.pochhammer(Fraction(1, 2), 3) == Fraction(15, 8)
    assert nm.pochhammer(-2, 3) == 0
    assert nm.pochhammer(Fraction(7, 3), 0) == 1


def test_unit_phase_exact_at_quarter_turns():
    assert nm.unit_phase(Fraction(1, 2)) == mp.mpc(0, 1)
    assert nm.unit_phase(-1) == mp.mpc(-1, 0)
    assert abs(nm.unit_phase(Fraction(1, 5)) - mp.expjpi(mp.mpf(1) / 5)) < mp.mpf(10) ** -28


def test_parse_rational_accepts_common_spellings():
    assert nm.parse_rational("3/8") == Fraction(3, 8)
    assert nm.parse_rational("0.25") == Fraction(1, 4)
    assert nm.parse_rational(4) == 4
    for bad in ("", "x/2", "1/0", True, 0.5j):
        with pytest.raises(ValueError):
            nm.parse_rational(bad)


def test_resolve_digits_reads_environment(monkeypatch):
    monkeypatch.setenv(nm.DIGITS_ENV, "45")
    assert nm.resolve_digits() == 45
    assert nm.resolve_digits(80) == 80
    monkeypatch.delenv(nm.DIGITS_ENV)
    assert nm.resolve_digits() == nm.DEFAULT_DIGITS
    with pytest.raises(nm.PrecisionError):
        nm.resolve_digits(5)


def test_working_precision_adds_guard_digits_and_restores():
    before = mp.dps
    with nm.working_precision(40) as d:
        assert d == 40
        assert mp.dps == 40 + nm.GUARD_DIGITS
    assert mp.dps == before


def test_series_helpers_invert_and_exponentiate():
    a = [mp.mpf(1), mp.mpf(2), mp.mpf(-1), mp.mpf(3)]
    inv = nm.series_inv(a, 3)
    prod = nm.series_mul(a, inv, 3)
    assert abs(prod[0] - 1) < mp.mpf(10) ** -28
    assert all(abs(c) < mp.mpf(10) ** -28 for c in prod[1:4])
    e = nm.series_exp([0, 1], 5)
    assert all(abs(e[k] - 1 / mp.factorial(k)) < mp.mpf(10) ** -28 for k in range(6))


def test_gamma_jet_matches_derivatives():
    x = Fraction(1, 3)
    jet = nm.gamma_jet(x, 3)
    for k in range(4):
        d = mpmath.diff(mpmath.gamma, nm.to_mp(x), k) / mp.factorial(k)
        assert abs(jet[k] - d) < mp.mpf(10) ** -20


def test_gamma_pole_jet_is_regular_part_at_pole():
    # eps * Gamma(-2 - eps) near eps = 0
    mp.dps = 40
    jet = nm.gamma_pole_jet(2, 2)
    eps = mp.mpf(10) ** -8
    exact = eps * mpmath.gamma(-2 - eps)
    approx = jet[0] + jet[1] * eps + jet[2] * eps**2
    assert abs(exact - approx) < mp.mpf(10) ** -22


@given(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6))
@settings(max_examples=50, deadline=None)
def test_complex_json_round_trip_is_stable(re, im):
    z = mp.mpc(re, im)
    first = nm.complex_to_json(z, 30)
    again = nm.complex_to_json(nm.complex_from_json(first), 30)
    assert first == again
