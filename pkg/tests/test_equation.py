from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperconnect.equation import (
    QUARTIC,
    QUINTIC,
    EquationError,
    buehring_params,
    equation_from_dict,
    local_exponents,
    new_equation,
    operator_polynomials,
    resonance_classes,
)


def test_quintic_summary():
    assert QUINTIC.n == 4
    assert QUINTIC.beta == 1
    assert QUINTIC.resonance_classes() == [(0, 1, 2, 3)]
    assert local_exponents(QUINTIC, 1) == [0, 1, 2, 1]


def test_quartic_summary():
    assert QUARTIC.beta == Fraction(1, 2)
    p = buehring_params(QUARTIC)
    assert p.a == (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4))
    assert p.b == (1, 1)
    assert p.c == Fraction(1, 2)


def test_gamma_defaults_and_trailing_zero():
    assert new_equation(["1/3", "2/3"]).gamma == (0, 0)
    assert new_equation(["1/3", "2/3"], ["1/2"]).gamma == (Fraction(1, 2), 0)
    with pytest.raises(EquationError):
        new_equation(["1/3", "2/3"], ["1/2", "1/4"])


def test_malformed_input_is_rejected():
    with pytest.raises(EquationError):
        new_equation(["1/3"])
    with pytest.raises(EquationError):
        new_equation(["a", "1/2"])
    with pytest.raises(EquationError):
        equation_from_dict({"gamma": ["0"]})
    with pytest.raises(EquationError):
        equation_from_dict({"alpha": "1/2"})


def test_resonance_classes_group_integer_differences():
    g = [Fraction(1, 3), Fraction(0), Fraction(4, 3), Fraction(2), Fraction(1, 2)]
    assert resonance_classes(g) == [(0, 2), (1, 3), (4,)]


def test_dict_round_trip():
    eq = new_equation(["1/5", "7/3", "-1/2"], ["1/4", "2/3"])
    assert equation_from_dict(eq.to_dict()) == eq


fr = st.fractions(min_value=-3, max_value=3, max_denominator=12)


@given(st.lists(fr, min_size=2, max_size=6), st.data())
@settings(max_examples=60, deadline=None)
def test_operator_roots_are_local_exponents(alpha, data):
    gamma = data.draw(st.lists(fr, min_size=len(alpha) - 1, max_size=len(alpha) - 1))
    eq = new_equation(alpha, gamma)
    p0, pinf = operator_polynomials(eq)

    def ev(poly, x):
        return sum(c * x**k for k, c in enumerate(poly))

    for g in eq.gamma:
        assert ev(p0, g) == 0
    for a in eq.alpha:
        assert ev(pinf, -a) == 0
    assert eq.beta == eq.n - 1 - sum(eq.alpha) - sum(eq.gamma)
    assert buehring_params(eq).c == eq.beta
