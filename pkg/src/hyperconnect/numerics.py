"""Working-precision arithmetic and the Gamma-family special functions.

Values are mpmath ``mpf``/``mpc`` numbers.  Exponents and anything that must
be compared exactly are kept as :class:`fractions.Fraction`.  Public entry
points that produce numbers accept a ``digits`` argument and run under
:func:`working_precision`, which adds guard digits on top of the requested
decimal precision.

The Gamma, digamma and polygamma kernels below use the Stirling asymptotic
expansion after shifting the argument to the right; mpmath supplies only the
multiprecision carrier and elementary functions.
"""

from __future__ import annotations

import math
import os
from contextlib import contextmanager
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Iterator, Sequence, Union

import mpmath
from mpmath import mp

ExactRational = Fraction
PrecComplex = mpmath.mpc

Number = Union[int, Fraction, float, complex, "mpmath.mpf", "mpmath.mpc"]

DEFAULT_DIGITS = 60
MIN_DIGITS = 20
GUARD_DIGITS = 10
DIGITS_ENV = "HYPERCONNECT_DIGITS"


class PrecisionError(ValueError):
    """Raised for a working precision below the supported minimum."""


class PoleError(ValueError):
    """Raised when a Gamma-family function is evaluated at a pole."""


def resolve_digits(digits: int | None = None) -> int:
    """Return the effective decimal precision.

    An explicit argument wins, then the ``HYPERCONNECT_DIGITS`` environment
    variable, then the library default of 60.
    """
    if digits is None:
        env = os.environ.get(DIGITS_ENV)
        digits = int(env) if env else DEFAULT_DIGITS
    digits = int(digits)
    if digits < MIN_DIGITS:
        raise PrecisionError(f"working precision must be at least {MIN_DIGITS} digits, got {digits}")
    return digits


@contextmanager
def working_precision(digits: int | None = None, guard: int = GUARD_DIGITS) -> Iterator[int]:
    """Run the body at ``digits + guard`` decimal digits; yields ``digits``."""
    d = resolve_digits(digits)
    with mp.workdps(d + guard):
        yield d


def parse_rational(value) -> Fraction:
    """Parse ``"p/q"``, an integer string, a decimal string, or a number into a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValueError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, Rational):
        return Fraction(value.numerator, value.denominator)
    if isinstance(value, str):
        text = value.strip()
        if not text:
            raise ValueError("empty rational")
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational number: {value!r}") from exc
    raise ValueError(f"not a rational number: {value!r}")


def to_mp(x: Number):
    """Convert ``x`` to an mpmath number at the current precision."""
    if isinstance(x, (mpmath.mpf, mpmath.mpc)):
        return x
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return mp.mpf(x.numerator)
        return mp.mpf(x.numerator) / x.denominator
    if isinstance(x, complex):
        return mp.mpc(x)
    return mp.mpf(x)


def is_nonpositive_integer(x) -> bool:
    if isinstance(x, Fraction):
        return x.denominator == 1 and x <= 0
    if isinstance(x, int):
        return x <= 0
    z = to_mp(x)
    if isinstance(z, mpmath.mpc):
        if z.imag != 0:
            return False
        z = z.real
    return z <= 0 and mpmath.isint(z)


def _as_integer(x) -> int | None:
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else None
    return None


@lru_cache(maxsize=None)
def _bernoulli_even(count: int) -> tuple:
    """Exact B_2, B_4, ..., B_{2*count}."""
    # Akiyama-Tanigawa would also do; the classical recurrence is fast enough
    # for the few hundred numbers any practical precision needs.
    b = [Fraction(1)]
    for m in range(1, 2 * count + 1):
        s = Fraction(0)
        binom = 1
        for k in range(m):
            s += binom * b[k]
            binom = binom * (m + 1 - k) // (k + 1)
        b.append(-s / (m + 1))
    return tuple(b[2 * j] for j in range(1, count + 1))


def _bernoulli(j: int) -> Fraction:
    """B_{2j} for j >= 1."""
    count = 32
    while count < j:
        count *= 2
    return _bernoulli_even(count)[j - 1]


def _shift_target() -> float:
    # Stirling terms bottom out near exp(-2*pi*|z|); this radius keeps the
    # smallest term below the working epsilon.
    return max(12.0, 0.4 * mp.dps + 4)


def _shift_count(z) -> int:
    target = _shift_target()
    re = float(z.real) if isinstance(z, mpmath.mpc) else float(z)
    im = float(z.imag) if isinstance(z, mpmath.mpc) else 0.0
    if re > 0 and math.hypot(re, im) >= target and re >= 0.5 * target:
        return 0
    return max(0, int(math.ceil(target - re)))


def _check_pole(x, name: str) -> None:
    if is_nonpositive_integer(x):
        raise PoleError(f"{name} has a pole at {x}")


def _cached_on_rationals(func):
    """Memoise on exact rational arguments at the current precision."""
    cache: dict = {}

    def wrapper(*args):
        if all(isinstance(a, (int, Fraction)) for a in args):
            key = (mp.prec,) + tuple(Fraction(a) for a in args)
            hit = cache.get(key)
            if hit is None:
                if len(cache) > 200000:
                    cache.clear()
                hit = cache[key] = func(*args)
            return hit
        return func(*args)

    wrapper.__name__ = func.__name__
    wrapper.__doc__ = func.__doc__
    wrapper.__wrapped__ = func
    return wrapper


@_cached_on_rationals
def log_gamma(x: Number):
    """Principal branch of log Gamma; real negative arguments take the upper-half-plane limit."""
    _check_pole(x, "log_gamma")
    z = to_mp(x)
    n = _shift_count(z)
    eps = mp.mpf(2) ** (-mp.prec - 8)
    if n:
        w = z + n
        prod = mp.mpf(1)
        arg_sum = 0.0
        for k in range(n):
            t = z + k
            prod *= t
            if isinstance(t, mpmath.mpc):
                arg_sum += math.atan2(float(t.imag), float(t.real))
            elif t < 0:
                arg_sum += math.pi
        log_prod = mp.log(prod)
        winding = round((arg_sum - float(mp.im(log_prod))) / (2 * math.pi))
        if winding:
            log_prod += 2j * mp.pi * winding
    else:
        w = z
        log_prod = 0
    s = (w - mp.mpf(1) / 2) * mp.log(w) - w + mp.log(2 * mp.pi) / 2
    inv = 1 / w
    inv2 = inv * inv
    power = inv
    j = 1
    while True:
        b = _bernoulli(j)
        term = to_mp(b) / (2 * j * (2 * j - 1)) * power
        s += term
        if abs(term) < eps * max(1, abs(s)):
            break
        power *= inv2
        j += 1
        if j > 4 * mp.dps + 40:
            break
    return s - log_prod


@_cached_on_rationals
def gamma(x: Number):
    """Gamma function; exact for positive integers, reflection for Re x < 1/2."""
    _check_pole(x, "gamma")
    k = _as_integer(x)
    if k is not None and k > 0:
        return mp.mpf(math.factorial(k - 1))
    z = to_mp(x)
    re = z.real if isinstance(z, mpmath.mpc) else z
    if re < mp.mpf(1) / 2:
        # reflection keeps relative accuracy on the left half-plane
        return mp.pi / (mp.sinpi(z) * gamma(1 - z))
    g = mp.exp(log_gamma(z))
    if not isinstance(z, mpmath.mpc):
        return g.real if isinstance(g, mpmath.mpc) else g
    return g


def rgamma(x: Number):
    """Reciprocal Gamma, zero at the poles."""
    if is_nonpositive_integer(x):
        return mp.mpf(0)
    return 1 / gamma(x)


@_cached_on_rationals
def digamma(x: Number):
    """psi(x) = (log Gamma)'(x)."""
    _check_pole(x, "digamma")
    z = to_mp(x)
    n = _shift_count(z)
    acc = mp.mpf(0)
    for k in range(n):
        acc += 1 / (z + k)
    w = z + n
    eps = mp.mpf(2) ** (-mp.prec - 8)
    inv2 = 1 / (w * w)
    power = inv2
    s = mp.log(w) - 1 / (2 * w)
    j = 1
    while True:
        term = to_mp(_bernoulli(j)) / (2 * j) * power
        s -= term
        if abs(term) < eps * max(1, abs(s)):
            break
        power *= inv2
        j += 1
        if j > 4 * mp.dps + 40:
            break
    return s - acc


@_cached_on_rationals
def polygamma(order: int, x: Number):
    """k-th derivative of digamma."""
    if order < 0:
        raise ValueError("polygamma order must be non-negative")
    if order == 0:
        return digamma(x)
    _check_pole(x, "polygamma")
    z = to_mp(x)
    n = _shift_count(z)
    k = order
    sign = -1 if k % 2 else 1
    kfact = math.factorial(k)
    acc = mp.mpf(0)
    for j in range(n):
        acc += 1 / (z + j) ** (k + 1)
    acc *= sign * kfact
    w = z + n
    eps = mp.mpf(2) ** (-mp.prec - 8)
    s = math.factorial(k - 1) / w**k + mp.mpf(kfact) / (2 * w ** (k + 1))
    inv2 = 1 / (w * w)
    power = 1 / w ** (k + 2)
    j = 1
    while True:
        coeff = to_mp(_bernoulli(j)) * math.factorial(2 * j + k - 1) / math.factorial(2 * j)
        term = coeff * power
        s += term
        if abs(term) < eps * max(1, abs(s)):
            break
        power *= inv2
        j += 1
        if j > 4 * mp.dps + 40:
            break
    # psi^(k)(w) = (-1)^(k+1) * s ; step back to z with the recurrence
    return -sign * s - acc


def pochhammer(a: Number, k: int):
    """Rising factorial (a)_k; exact when ``a`` is a Fraction or int."""
    if k < 0:
        raise ValueError("pochhammer index must be non-negative")
    if isinstance(a, (int, Fraction)):
        r = Fraction(1)
        for j in range(k):
            r *= a + j
        return r
    z = to_mp(a)
    r = mp.mpf(1)
    for j in range(k):
        r *= z + j
    return r


def unit_phase(r) -> "mpmath.mpc":
    """e^{i pi r} for a rational ``r``; exact at multiples of 1/2."""
    r = parse_rational(r)
    reduced = r - 2 * (r.numerator // (2 * r.denominator))
    # reduced lies in [0, 2)
    exact = {Fraction(0): (1, 0), Fraction(1, 2): (0, 1), Fraction(1): (-1, 0), Fraction(3, 2): (0, -1)}
    if reduced in exact:
        re, im = exact[reduced]
        return mp.mpc(re, im)
    x = to_mp(reduced)
    return mp.mpc(mp.cospi(x), mp.sinpi(x))


def phase(x: Number):
    """e^{i pi x}, routed through :func:`unit_phase` for exact rationals."""
    if isinstance(x, (int, Fraction)):
        return unit_phase(x)
    z = to_mp(x)
    return mp.expjpi(z)


# ----------------------------------------------------------------------------
# truncated power series helpers (lists of coefficients, lowest order first)


def series_mul(a: Sequence, b: Sequence, order: int) -> list:
    out = [mp.mpf(0)] * (order + 1)
    for i, ai in enumerate(a[: order + 1]):
        if ai == 0:
            continue
        for j, bj in enumerate(b[: order + 1 - i]):
            out[i + j] += ai * bj
    return out


def series_exp(a: Sequence, order: int) -> list:
    """exp of a series with a[0] arbitrary."""
    a = list(a[: order + 1]) + [mp.mpf(0)] * max(0, order + 1 - len(a))
    out = [mp.mpf(0)] * (order + 1)
    out[0] = mp.exp(a[0])
    # f' = a' f
    for n in range(1, order + 1):
        s = mp.mpf(0)
        for k in range(1, n + 1):
            s += k * a[k] * out[n - k]
        out[n] = s / n
    return out


def series_inv(a: Sequence, order: int) -> list:
    a = list(a[: order + 1]) + [mp.mpf(0)] * max(0, order + 1 - len(a))
    out = [mp.mpf(0)] * (order + 1)
    out[0] = 1 / a[0]
    for n in range(1, order + 1):
        s = mp.mpf(0)
        for k in range(1, n + 1):
            s += a[k] * out[n - k]
        out[n] = -s * out[0]
    return out


def log_gamma_jet(a: Number, order: int) -> list:
    """Taylor coefficients of t -> log Gamma(a+t) at t=0 up to ``order``."""
    _check_pole(a, "log_gamma_jet")
    out = [log_gamma(a)]
    if order >= 1:
        out.append(digamma(a))
    for k in range(2, order + 1):
        out.append(polygamma(k - 1, a) / math.factorial(k))
    return out


def gamma_jet(a: Number, order: int) -> list:
    """Taylor coefficients of t -> Gamma(a+t) at a regular point."""
    lj = log_gamma_jet(a, order)
    tail = [mp.mpf(0)] + lj[1:]
    out = series_exp(tail, order)
    g = gamma(a)
    return [g * c for c in out]


def rgamma_jet(a: Number, order: int) -> list:
    """Taylor coefficients of t -> 1/Gamma(a+t); valid at the poles of Gamma too."""
    if is_nonpositive_integer(a):
        # 1/Gamma(-m+t) = (-1)^m m! ... use 1/Gamma(x) = Gamma(1-x) sin(pi x)/pi
        m = -int(a)
        g = gamma_jet(1 + m, order)  # Gamma(1 - (-m + t)) = Gamma(1 + m - t)
        g = [c * (-1) ** k for k, c in enumerate(g)]
        sin_jet = [mp.mpf(0)] * (order + 1)
        # sin(pi(-m + t)) = (-1)^m sin(pi t)
        for k in range(1, order + 1, 2):
            sin_jet[k] = (-1) ** m * (-1) ** ((k - 1) // 2) * mp.pi**k / math.factorial(k)
        prod = series_mul(g, sin_jet, order)
        return [c / mp.pi for c in prod]
    lj = log_gamma_jet(a, order)
    neg = [mp.mpf(0)] + [-c for c in lj[1:]]
    out = series_exp(neg, order)
    g = rgamma(a)
    return [g * c for c in out]


def taylor_jet_gamma(a: Number, order: int):
    """Expansion of Gamma(a+t) about t = 0.

    Returns ``(pole_order, coefficients)``.  At a regular point the pole order
    is 0 and the coefficients are the Taylor jet.  At ``a = -m`` the pole order
    is 1 and the coefficients are those of ``t * Gamma(-m + t)``, whose constant
    term is the residue ``(-1)^m / m!``.
    """
    if order < 0:
        raise ValueError("order must be non-negative")
    if is_nonpositive_integer(a):
        m = -int(a)
        # t Gamma(-m + t) = Gamma(1 + t) / ((t - 1)(t - 2)...(t - m))
        g = gamma_jet(1, order)
        denom = [mp.mpf(1)] + [mp.mpf(0)] * order
        for j in range(1, m + 1):
            denom = series_mul(denom, [mp.mpf(-j), mp.mpf(1)], order)
        return 1, series_mul(g, series_inv(denom, order), order)
    return 0, gamma_jet(a, order)


def gamma_pole_jet(m: int, order: int) -> list:
    """Coefficients of ``t * Gamma(-m - t)`` in ``t``; the pole sits at t = 0.

    Gamma(-m - t) = (-1)^(m+1) * (pi / sin(pi t)) / Gamma(1 + m + t).
    """
    # pi t / sin(pi t) as a series
    sin_over = [mp.mpf(0)] * (order + 2)
    for k in range(0, order + 2, 2):
        sin_over[k] = (-1) ** (k // 2) * mp.pi**k / math.factorial(k + 1)
    inv = series_inv(sin_over, order)
    r = rgamma_jet(1 + m, order)
    sign = -1 if m % 2 == 0 else 1
    return [sign * c for c in series_mul(inv, r, order)]


def complex_to_json(z, digits: int) -> dict:
    z = mp.mpc(z)
    return {"re": mpmath.nstr(z.real, digits, strip_zeros=False), "im": mpmath.nstr(z.imag, digits, strip_zeros=False)}


def complex_from_json(obj) -> "mpmath.mpc":
    return mp.mpc(mp.mpf(obj["re"]), mp.mpf(obj["im"]))
