"""Reference formulas shared by several test modules."""

import random
from fractions import Fraction

from mpmath import mp

from hyperconnect.equation import new_equation


def gauss_connection(eq):
    """Connection matrix of an order-two equation from Gauss's Gamma quotients.

    Column order follows the canonical bases: exponents (gamma_1, 0) at z = 0
    and (0, beta) at z = 1.
    """
    a, b = eq.alpha
    g = eq.gamma[0]
    M = mp.matrix(2, 2)
    for j, (e, other) in enumerate(((g, 0), (0, g))):
        A, B, C = a + e, b + e, 1 + e - other
        A, B, C = (mp.mpf(x.numerator) / x.denominator for x in (A, B, C))
        M[0, j] = mp.gamma(C) * mp.gamma(C - A - B) * mp.rgamma(C - A) * mp.rgamma(C - B)
        M[1, j] = mp.gamma(C) * mp.gamma(A + B - C) * mp.rgamma(A) * mp.rgamma(B)
    return M


def _fraction(rng, low, high):
    d = rng.randint(3, 17)
    return Fraction(rng.randint(low * d + 1, high * d - 1), d)


def random_order_two(count, seed="order-two"):
    """Nonresonant order-two equations with no integer exponent differences."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        a = [_fraction(rng, 0, 2) for _ in range(2)]
        g = _fraction(rng, -1, 1)
        beta = 1 - a[0] - a[1] - g
        quantities = [g, beta] + [x + g for x in a] + a
        if any(x.denominator == 1 for x in quantities):
            continue
        out.append(new_equation(a, [g]))
    return out
