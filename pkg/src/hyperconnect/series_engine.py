"""Hypergeometric sums, closed-form evaluations at unity and Barnes residue sums.

Slowly convergent sums at z = 1 decay algebraically.  Their partial sums obey

    S - S_N ~ sum_i sum_j sum_r c_ijr N^(-sigma_i - j) (log N)^r,

with exponents sigma_i that are known from the parameters.  ``accelerate``
fits that expansion by least squares on a geometric grid of N and checks the
result against a second grid and a shorter expansion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import Callable, Sequence

import mpmath
from mpmath import mp

from .equation import HypergeometricEquation, resonance_classes
from .frobenius import LogPowerSeries
from .numerics import (
    PoleError,
    gamma,
    gamma_jet,
    gamma_pole_jet,
    is_nonpositive_integer,
    rgamma,
    rgamma_jet,
    series_exp,
    series_inv,
    series_mul,
    to_mp,
    unit_phase,
)

GUARD = 20
# tails decaying faster than k^-(1+DIRECT_SIGMA) are summed without extrapolation
DIRECT_SIGMA = 20


class SeriesError(ValueError):
    """Invalid input for a summation or identity."""


class ConvergenceError(SeriesError):
    """The requested sum diverges or cannot be accelerated to the tolerance."""


@dataclass(frozen=True)
class SumResult:
    value: object
    tail_estimate: object
    terms_used: int
    accelerated: bool
    method: str = "direct"
    converged: bool = True
    digits_lost: float = 0.0


def default_tol():
    return mp.mpf(10) ** (-mp.dps + 5)


def _is_zero_rational(x) -> bool:
    return isinstance(x, (int, Fraction)) and x == 0


def _re(x):
    x = to_mp(x)
    return x.real if isinstance(x, mpmath.mpc) else x


# ----------------------------------------------------------------------------
# lattice extrapolation


@dataclass(frozen=True)
class Family:
    """Tail family N^(-sigma - j) (log N)^r for j >= 0, r <= log_power."""

    sigma: object
    log_power: int = 0


def families_from_exponents(exponents: Sequence, log_power: int = 0) -> list[Family]:
    """Merge exponents that differ by integers; each extra member adds a log power."""
    groups: list[list] = []
    for e in exponents:
        for g in groups:
            d = e - g[0]
            if isinstance(d, Fraction) and d.denominator == 1:
                g.append(e)
                break
        else:
            groups.append([e])
    out = []
    for g in groups:
        base = min(g, key=lambda x: _re(x))
        out.append(Family(base, log_power + len(g) - 1))
    return out


def _basis(families: Sequence[Family], depth: int) -> list[tuple]:
    return [(f.sigma, j, r) for f in families for j in range(depth) for r in range(f.log_power + 1)]


def _grid(top: int, count: int, low_ratio: float = 0.25) -> list[int]:
    low = max(4, int(top * low_ratio))
    if count <= 1:
        return [top]
    pts = []
    for i in range(count):
        n = int(round(low * (top / low) ** (i / (count - 1))))
        if not pts or n > pts[-1]:
            pts.append(n)
    return pts


def lattice_fit(partial_sums: Sequence, families: Sequence[Family], depth: int, top: int | None = None):
    """Least-squares estimate of lim S_N from S_N = S + sum of family terms.

    ``partial_sums[N - 1]`` is the sum of the first N terms.
    """
    top = top or len(partial_sums)
    # the design matrix is Vandermonde-like; solve with spare digits and let
    # the caller's cross-checks expose any amplified noise
    with mp.extradps(mp.dps):
        return _lattice_solve(partial_sums, families, depth, top)


def _lattice_solve(partial_sums, families, depth, top):
    basis = _basis(families, depth)
    nb = len(basis) + 1
    pts = _grid(top, nb + 4)
    if len(pts) < nb:
        raise ConvergenceError("not enough terms for the requested extrapolation depth")
    A = mp.matrix(len(pts), nb)
    b = mp.matrix(len(pts), 1)
    scale = mp.mpf(top)
    for i, n in enumerate(pts):
        x = mp.mpf(n) / scale
        ln = mp.log(n)
        A[i, 0] = 1
        for c, (sigma, j, r) in enumerate(basis):
            A[i, c + 1] = mp.power(x, -(to_mp(sigma) + j)) * ln**r
        b[i] = partial_sums[n - 1]
    if any(isinstance(v, mpmath.mpc) for v in b):
        re = mp.matrix([[v.real if isinstance(v, mpmath.mpc) else v] for v in b])
        im = mp.matrix([[v.imag if isinstance(v, mpmath.mpc) else 0] for v in b])
        xr, _ = mp.qr_solve(A, re)
        xi, _ = mp.qr_solve(A, im)
        return mp.mpc(xr[0], xi[0])
    x, _ = mp.qr_solve(A, b)
    return x[0]


def _depth_for(families: Sequence[Family], top: int, tol) -> int:
    """Expansion depth whose truncation error at the low end of the grid is near tol."""
    low = max(4, top // 4)
    smallest = min(float(_re(f.sigma)) for f in families)
    need = -float(mp.log(tol)) / math.log(low) - smallest
    depth = max(2, int(math.ceil(need)) + 1)
    per = sum(f.log_power + 1 for f in families)
    cap = max(2, min(48, top // 3) // max(per, 1))
    return min(depth, cap)


def accelerate(
    term: Callable[[int], object],
    families: Sequence[Family],
    tol=None,
    start: int = 60,
    max_terms: int = 1200,
    guard: int = GUARD,
) -> SumResult:
    """Sum ``term(k)`` for k >= 0 by lattice extrapolation of the partial sums.

    The estimate is accepted when a fit on a second, shorter grid and a fit
    with one order less agree with it within ``tol`` (relative to max(1, |S|)).
    """
    tol = tol if tol is not None else default_tol()
    out_prec = mp.prec
    terms: list = []
    partial: list = []
    total = 0
    K = start
    best = None
    peak = mp.mpf(0)
    sig_min = min((float(_re(f.sigma)) for f in families), default=0.0)
    with mp.extradps(guard):
        while True:
            while len(terms) < K:
                t = term(len(terms))
                terms.append(t)
                total += t
                partial.append(total)
                peak = max(peak, abs(t))
            size = max(1, abs(partial[-1]))
            # sum_{k>K} k^(-sigma-1) is about K^(-sigma)/sigma
            raw_tail = abs(terms[-1]) * K / max(1, sig_min)
            if raw_tail < tol * size * mp.mpf("1e-3"):
                value, err, method, accel = partial[-1], raw_tail, "direct", False
            elif sig_min > DIRECT_SIGMA:
                value, err, method, accel = partial[-1], raw_tail, "direct", False
            else:
                depth = _depth_for(families, K, tol / 10)
                v1 = lattice_fit(partial, families, depth, K)
                v2 = lattice_fit(partial, families, depth, int(K * 0.7))
                v3 = lattice_fit(partial, families, max(1, depth - 1), K)
                value = v1
                err = max(abs(v1 - v2), abs(v1 - v3))
                method, accel = "lattice", True
            if best is None or err < best[1]:
                best = (value, err, method, accel)
            if err <= tol * size:
                break
            if K >= max_terms:
                value, err, method, accel = best
                with mp.workprec(out_prec):
                    return SumResult(+value, err, len(terms), accel, method, False, _lost(peak, value))
            K = min(max_terms, int(K * 1.6))
    with mp.workprec(out_prec):
        return SumResult(+value, err, len(terms), accel, method, True, _lost(peak, value))


def _lost(peak, value) -> float:
    """Decimal digits cancelled between the largest term and the sum."""
    if peak == 0:
        return 0.0
    if value == 0:
        return float(mp.dps)
    return max(0.0, float(mp.log10(peak / abs(value))))


def levin_estimate(partial_sums: Sequence, variant: str = "u"):
    """Levin-type estimate of the limit (mpmath implementation)."""
    with mp.extradps(mp.dps):
        L = mp.levin(method="levin", variant=variant)
        v, e = L.update_psum(list(partial_sums))
    return +v, e


def wynn_epsilon(partial_sums: Sequence):
    """Last diagonal entry of Wynn's epsilon table (mpmath ``shanks``)."""
    table = mp.shanks(list(partial_sums))
    row = table[-1]
    return row[-1], abs(row[-1] - row[-3]) if len(row) >= 3 else mp.inf


# ----------------------------------------------------------------------------
# generalized hypergeometric series


def _check_lower(b: Sequence) -> None:
    for x in b:
        if is_nonpositive_integer(x):
            raise PoleError(f"lower parameter {x} is a non-positive integer")


def _terminating_index(a: Sequence) -> int | None:
    """Smallest m with -m among the upper parameters, if any."""
    best = None
    for x in a:
        if is_nonpositive_integer(x):
            m = -int(x)
            best = m if best is None else min(best, m)
    return best


def _ratio(a, b, k):
    num = mp.mpf(1)
    for x in a:
        num *= x + k
    den = mp.mpf(k + 1)
    for x in b:
        den *= x + k
    return num / den


def _terminating_sum(a, b, z, m):
    """Finite sum with precision raised until cancellation is under control."""
    extra = 0
    while True:
        with mp.extradps(extra):
            am = [to_mp(x) for x in a]
            bm = [to_mp(x) for x in b]
            zm = to_mp(z)
            t = mp.mpf(1)
            s = mp.mpf(1)
            big = mp.mpf(1)
            for k in range(m):
                t *= _ratio(am, bm, k) * zm
                s += t
                big = max(big, abs(t))
            lost = float(mp.log10(big / abs(s))) if s != 0 else float(mp.log10(big)) + mp.dps
        if lost <= extra + 3 or extra > 4000:
            return +s
        extra = int(lost) + 10


def pfq(a: Sequence, b: Sequence, z, tol=None) -> SumResult:
    """sum_k prod (a)_k / prod (b)_k z^k / k!.

    Terminating series are summed exactly in floating point; |z| < 1 directly;
    z = 1 with positive excess sum(b) - sum(a) by lattice extrapolation.
    """
    _check_lower(b)
    tol = tol if tol is not None else default_tol()
    m = _terminating_index(a)
    if m is not None:
        return SumResult(_terminating_sum(a, b, z, m), mp.mpf(0), m + 1, False, "terminating")
    zm = to_mp(z)
    if any(_is_zero_rational(x) for x in a):
        return SumResult(mp.mpf(1), mp.mpf(0), 1, False, "terminating")
    p, q = len(a), len(b)
    if p > q + 1:
        raise ConvergenceError("series with more than q+1 upper parameters diverges")
    if abs(zm) < 1 or p <= q:
        return _direct_sum(a, b, zm, tol)
    if zm == 1:
        s = sum(to_mp(x) for x in b) - sum(to_mp(x) for x in a)
        if _re(s) <= 0:
            raise ConvergenceError(f"series at z = 1 needs positive excess, got {mpmath.nstr(s, 8)}")
        return unity_sum(a, b, tol)
    raise ConvergenceError("only |z| < 1 or z = 1 is supported")


def _direct_sum(a, b, z, tol) -> SumResult:
    with mp.extradps(10):
        am = [to_mp(x) for x in a]
        bm = [to_mp(x) for x in b]
        zabs = abs(z)
        t = mp.mpf(1)
        s = mp.mpf(1)
        k = 0
        while True:
            t *= _ratio(am, bm, k) * z
            s += t
            k += 1
            r = abs(_ratio(am, bm, k) * z)
            if r < 1 and abs(t) * r / (1 - min(r, zabs + (1 - zabs) / 2)) <= tol * abs(s):
                break
            if k > 200000:
                raise ConvergenceError("direct summation did not converge")
    return SumResult(+s, abs(t), k + 1, False, "direct")


def _peak_digits(a: Sequence, b: Sequence, limit: int = 20000) -> int:
    """log10 of the largest term of the series at z = 1, from a float scan."""
    af = [complex(to_mp(x)) for x in a]
    bf = [complex(to_mp(x)) for x in b]
    log_t = 0.0
    peak = 0.0
    for k in range(limit):
        num = 1.0
        for x in af:
            num *= abs(x + k)
        den = float(k + 1)
        for x in bf:
            den *= abs(x + k)
        if num == 0.0:
            break
        log_t += math.log10(num / den)
        peak = max(peak, log_t)
        if num < den and log_t < peak - 5:
            break
    return int(peak)


def unity_sum(a: Sequence, b: Sequence, tol=None) -> SumResult:
    """Non-terminating p+1Fp at 1 via lattice extrapolation with the excess as exponent."""
    s = sum(b) - sum(a) if all(isinstance(x, (int, Fraction)) for x in list(a) + list(b)) else (
        sum(to_mp(x) for x in b) - sum(to_mp(x) for x in a)
    )
    fam = [Family(s, 0)]
    extra = _peak_digits(a, b)
    while True:
        with mp.extradps(extra):
            am = [to_mp(x) for x in a]
            bm = [to_mp(x) for x in b]
            state = {"t": None}

            def term(k):
                # sequential access only
                if k == 0:
                    state["t"] = mp.mpf(1)
                else:
                    state["t"] = state["t"] * _ratio(am, bm, k - 1)
                return state["t"]

            res = accelerate(term, fam, tol)
        # a large negative upper parameter makes early terms huge; redo with
        # enough digits to absorb the cancellation
        if res.digits_lost <= extra + GUARD - 5 or extra > 4000:
            return SumResult(+res.value, res.tail_estimate, res.terms_used, res.accelerated, res.method, res.converged, res.digits_lost)
        extra = int(res.digits_lost) + 10


# ----------------------------------------------------------------------------
# closed forms at unity


def gauss_2f1_at_unity(a, b, c):
    """Gamma(c) Gamma(c-a-b) / (Gamma(c-a) Gamma(c-b))."""
    if is_nonpositive_integer(c):
        raise PoleError("lower parameter is a non-positive integer")
    if _is_zero_rational(a) or _is_zero_rational(b):
        return mp.mpf(1)
    s = c - a - b
    if _re(s) <= 0:
        raise ConvergenceError("Gauss summation needs Re(c - a - b) > 0")
    return gamma(c) * gamma(s) * rgamma(c - a) * rgamma(c - b)


def _half(x):
    return x / 2 if isinstance(x, (int, Fraction)) else to_mp(x) / 2


def dixon_3f2(a1, a2, a3):
    """Well-poised 3F2(a1, a2, a3; 1+a1-a2, 1+a1-a3; 1)."""
    if _is_zero_rational(a2) or _is_zero_rational(a3):
        return mp.mpf(1)
    s = 2 + a1 - 2 * a2 - 2 * a3
    if _re(s) <= 0:
        raise ConvergenceError("Dixon sum diverges: need Re(2 + a1 - 2 a2 - 2 a3) > 0")
    h = _half(a1)
    num = [1 + h, 1 + h - a2 - a3, 1 + a1 - a2, 1 + a1 - a3]
    den = [1 + a1, 1 + a1 - a2 - a3, 1 + h - a2, 1 + h - a3]
    return _gamma_quotient(num, den)


def _gamma_quotient(num, den):
    out = mp.mpf(1)
    for x in num:
        out *= gamma(x)
    for x in den:
        out *= rgamma(x)
    return out


def lavoie_3f2_variant(kind: int, a1, a2, a3):
    """Lavoie-type contiguous neighbours of the Dixon sum, kind in {1, 2}.

    Kind 1 has lower parameters (a1-a2, 1+a1-a3), kind 2 has (2+a1-a2, 1+a1-a3).
    """
    h = _half(a1)
    half = Fraction(1, 2)
    if kind == 1:
        s = 1 + a1 - 2 * a2 - 2 * a3
        if _re(s) <= 0:
            raise ConvergenceError("series diverges for these parameters")
        pre = mp.power(2, -2 * to_mp(a3)) * _gamma_quotient(
            [a1 - a2, a1 - a3 + 1], [a1 - 2 * a3 + 1, a1 - a2 - a3 + 1]
        )
        t1 = _gamma_quotient([h - a3 + half, h - a2 - a3 + 1], [h + half, h - a2])
        t2 = _gamma_quotient([h - a3 + 1, h - a2 - a3 + half], [h, h - a2 + half])
        return pre * (t1 + t2)
    if kind == 2:
        s = 3 + a1 - 2 * a2 - 2 * a3
        if _re(s) <= 0:
            raise ConvergenceError("series diverges for these parameters")
        pre = mp.power(2, 1 - 2 * to_mp(a2)) * _gamma_quotient(
            [a1 - a3 + 1, a1 - a2 + 2, a2 - 1], [a1 - 2 * a2 + 2, a1 - a2 - a3 + 2, a2]
        )
        t1 = _gamma_quotient([h - a2 + Fraction(3, 2), h - a3 - a2 + 2], [h + half, h - a3 + 1])
        t2 = _gamma_quotient([h - a2 + 1, h - a3 - a2 + Fraction(3, 2)], [h, h - a3 + half])
        return pre * (t2 - t1)
    raise SeriesError("kind must be 1 or 2")


def closed_form_3f2(a: Sequence, b: Sequence):
    """Recognise a Dixon or Lavoie shape up to parameter permutations.

    Returns ``(name, value)`` or ``None``.  Matching is exact, so the parameters
    should be rationals.
    """
    if len(a) != 3 or len(b) != 2:
        return None
    if not all(isinstance(x, (int, Fraction)) for x in list(a) + list(b)):
        return None
    a = [Fraction(x) for x in a]
    b = sorted(Fraction(x) for x in b)
    for a1, a2, a3 in permutations(a):
        shapes = (
            ("dixon", (1 + a1 - a2, 1 + a1 - a3), lambda: dixon_3f2(a1, a2, a3)),
            ("lavoie-1", (a1 - a2, 1 + a1 - a3), lambda: lavoie_3f2_variant(1, a1, a2, a3)),
            ("lavoie-2", (2 + a1 - a2, 1 + a1 - a3), lambda: lavoie_3f2_variant(2, a1, a2, a3)),
        )
        for name, lower, value in shapes:
            if sorted(lower) == b:
                try:
                    return name, value()
                except (PoleError, ConvergenceError):
                    continue
    return None


def _thomae(a, b):
    """Best single Thomae step: (prefactor, new_a, new_b, new_excess) or None."""
    s = b[0] + b[1] - a[0] - a[1] - a[2]
    best = None
    for i in range(3):
        x = a[i]
        others = [a[j] for j in range(3) if j != i]
        if _re(x) <= _re(s) + Fraction(1, 2):
            continue
        new_a = [b[0] - x, b[1] - x, s]
        new_b = [s + others[0], s + others[1]]
        if any(is_nonpositive_integer(y) for y in new_b + [x]):
            continue
        if best is None or _re(x) > _re(best[0]):
            best = (x, others, new_a, new_b)
    if best is None:
        return None
    x, others, new_a, new_b = best
    pre = _gamma_quotient([b[0], b[1], s], [x, s + others[0], s + others[1]])
    return pre, new_a, new_b, x


def threeF2_at_unity(a: Sequence, b: Sequence, tol=None, closed_form: bool = True) -> SumResult:
    """3F2(a; b; 1): exact shapes, terminating sums, or accelerated summation."""
    if len(a) != 3 or len(b) != 2:
        raise SeriesError("need three upper and two lower parameters")
    _check_lower(b)
    if _terminating_index(a) is not None or any(_is_zero_rational(x) for x in a):
        return pfq(a, b, 1, tol)
    if closed_form:
        hit = closed_form_3f2(a, b)
        if hit is not None:
            return SumResult(hit[1], mp.mpf(0), 0, False, hit[0])
    s = b[0] + b[1] - a[0] - a[1] - a[2]
    if _re(s) <= 0:
        raise ConvergenceError("3F2 at 1 needs positive excess")
    step = _thomae(list(a), list(b))
    if step is not None:
        pre, na, nb, _ = step
        res = pfq(na, nb, 1, tol)
        return SumResult(pre * res.value, abs(pre) * res.tail_estimate, res.terms_used, res.accelerated, "thomae+" + res.method, res.converged)
    return pfq(a, b, 1, tol)


# ----------------------------------------------------------------------------
# Barnes integrals by residues


def slater_expand(a: Sequence, b: Sequence, c: Sequence, d: Sequence, z=None, log_z=None, side: str = "b", tol=None):
    """Residue sum of the Barnes integral

        int dt/(2 pi i) prod Gamma(a+t) prod Gamma(b-t) / (prod Gamma(c+t) prod Gamma(d-t)) z^t.

    ``side="b"`` closes on the poles of Gamma(b - t) (powers z^b), ``side="a"``
    on those of Gamma(a + t) (powers z^-a).  ``log_z`` fixes the branch;
    the argument of the hypergeometric factors is (-1)^(q+s) z or (-1)^(p+r)/z.
    """
    if log_z is None:
        if z is None:
            raise SeriesError("give z or log_z")
        log_z = mp.log(to_mp(z))
    log_z = to_mp(log_z)
    p, q, r, s = len(a), len(b), len(c), len(d)
    if side == "b":
        poles, ups, opp_up, opp_den = b, a, c, d
        count_check = q + r >= p + s
        sign = (-1) ** (q + s)
    elif side == "a":
        poles, ups, opp_up, opp_den = a, b, d, c
        count_check = p + s >= q + r
        sign = (-1) ** (p + r)
    else:
        raise SeriesError("side must be 'a' or 'b'")
    if not count_check:
        raise ConvergenceError("residue series on this side diverges")
    pool = list(poles) + list(opp_up)
    for i, x in enumerate(pool):
        for y in pool[i + 1 :]:
            dlt = x - y
            if (isinstance(dlt, Fraction) and dlt.denominator == 1) or (not isinstance(dlt, Fraction) and mp.isint(to_mp(dlt))):
                raise SeriesError("pole parameters differ by an integer; residues are not simple")
    arg = mp.exp(log_z) * sign if side == "b" else sign / mp.exp(log_z)
    if side == "b" and abs(arg - 1) < mp.eps * 8:
        arg = 1
    if side == "a" and abs(arg - 1) < mp.eps * 8:
        arg = 1
    if arg == 1:
        excess = sum(to_mp(x) for x in list(c) + list(d)) - sum(to_mp(x) for x in list(a) + list(b))
        if _re(excess) <= 0:
            raise ConvergenceError("Barnes integral at |z| = 1 needs a positive excess")
    total = 0
    for m, x in enumerate(poles):
        if side == "b":
            pref = mp.exp(to_mp(x) * log_z)
            num = [ai + x for ai in a] + [bj - x for j, bj in enumerate(b) if j != m]
            den = [ck + x for ck in c] + [dl - x for dl in d]
            upper = [ai + x for ai in a] + [1 + x - dl for dl in d]
            lower = [ck + x for ck in c] + [1 + x - bj for j, bj in enumerate(b) if j != m]
        else:
            pref = mp.exp(-to_mp(x) * log_z)
            num = [ai - x for j, ai in enumerate(a) if j != m] + [bj + x for bj in b]
            den = [ck - x for ck in c] + [dl + x for dl in d]
            upper = [bj + x for bj in b] + [1 + x - ck for ck in c]
            lower = [dl + x for dl in d] + [1 + x - ai for j, ai in enumerate(a) if j != m]
        coeff = _gamma_quotient(num, den)
        if coeff == 0:
            continue
        if arg == 1 and len(upper) == 3 and len(lower) == 2:
            f = threeF2_at_unity(upper, lower, tol).value
        else:
            f = pfq(upper, lower, arg, tol).value
        total += pref * coeff * f
    return total


# ----------------------------------------------------------------------------
# G_p at z = 0 by residues


class _Laurent:
    """Truncated Laurent series sum_{i} c_i e^(v + i), kept to a fixed length."""

    __slots__ = ("v", "c")

    def __init__(self, v: int, c: list):
        self.v = v
        self.c = c

    def times_linear(self, const):
        """Multiply by (const + e)."""
        if const == 0:
            return _Laurent(self.v + 1, list(self.c))
        k = to_mp(const)
        n = len(self.c)
        out = [k * self.c[i] + (self.c[i - 1] if i else 0) for i in range(n)]
        return _Laurent(self.v, out)

    def over_linear(self, const):
        """Divide by (const + e)."""
        if const == 0:
            return _Laurent(self.v - 1, list(self.c))
        k = to_mp(const)
        n = len(self.c)
        out = [mp.mpf(0)] * n
        # (const + e) * out = c
        for i in range(n):
            out[i] = (self.c[i] - (out[i - 1] if i else 0)) / k
        return _Laurent(self.v, out)


def _gamma_laurent(x, sign: int, length: int) -> _Laurent:
    """Gamma(x + sign*e) as a Laurent series in e."""
    if is_nonpositive_integer(x):
        m = -int(x)
        if sign < 0:
            return _Laurent(-1, gamma_pole_jet(m, length - 1))
        # Gamma(-m + e) = (e Gamma(-m + e)) / e; e Gamma(-m+e) = -(-e) Gamma(-m - (-e))
        jet = gamma_pole_jet(m, length - 1)
        return _Laurent(-1, [-c * (-1) ** i for i, c in enumerate(jet)])
    jet = gamma_jet(x, length - 1)
    if sign < 0:
        jet = [c * (-1) ** i for i, c in enumerate(jet)]
    return _Laurent(0, jet)


def _rgamma_laurent(x, length: int) -> _Laurent:
    """1/Gamma(x + e)."""
    jet = rgamma_jet(x, length - 1)
    if is_nonpositive_integer(x):
        # leading coefficient vanishes: shift valuation
        return _Laurent(1, jet[1:] + [mp.mpf(0)])
    return _Laurent(0, jet)


def _laurent_product(factors: Sequence[_Laurent], length: int) -> _Laurent:
    v = sum(f.v for f in factors)
    acc = [mp.mpf(1)] + [mp.mpf(0)] * (length - 1)
    for f in factors:
        acc = series_mul(acc, f.c, length - 1)
    return _Laurent(v, acc)


@dataclass
class GpExpansion:
    """A residue expansion near z = 0 as a sum of log-power series, one per exponent class."""

    p: int
    series: list  # LogPowerSeries with point 0

    def evaluate(self, z):
        return sum(s.evaluate(z) for s in self.series)

    def coefficient(self, base, k: int, r: int):
        """Coefficient of z^(base+k) (log z)^r / r!."""
        for s in self.series:
            if s.exponent == base:
                return s.coefficient(k, r)
        return mp.mpf(0)


def _initial_factor(kind: str, x, t0, length: int) -> _Laurent:
    if kind == "g+":
        return _gamma_laurent(x + t0, +1, length)
    if kind == "g-":
        return _gamma_laurent(x - t0, -1, length)
    return _rgamma_laurent(x + t0, length)


def _step_factor(kind: str, f: _Laurent, x, t0) -> _Laurent:
    """Move a factor from t0 - 1 to t0."""
    if kind == "g+":
        # Gamma(x + t0 + e) = (x + t0 - 1 + e) Gamma(x + t0 - 1 + e)
        return f.times_linear(x + t0 - 1)
    if kind == "g-":
        # Gamma(x - t0 - e) = Gamma(x - t0 + 1 - e) / (x - t0 - e)
        g = f.over_linear(t0 - x)
        return _Laurent(g.v, [-c for c in g.c])
    # 1/Gamma(x + t0 + e) = 1/((x + t0 - 1 + e) Gamma(x + t0 - 1 + e))
    return f.over_linear(x + t0 - 1)


def _right_residues(factors, bases, order: int, length: int, phase=0, extra: _Laurent | None = None, scale=1):
    """Log-power series from -scale * sum of residues of z^t e^(i pi phase t) prod(factors).

    ``factors`` holds (kind, x) with kind "g+" for Gamma(x+t), "g-" for
    Gamma(x-t) and "r+" for 1/Gamma(x+t); ``bases`` are the class exponents
    whose right-hand lattices t = base + k carry the poles.
    """
    out = []
    for base in bases:
        coeffs = []
        state = None
        for k in range(order):
            t0 = base + k
            if state is None:
                state = [_initial_factor(kind, x, t0, length) for kind, x in factors]
            else:
                state = [_step_factor(kind, f, x, t0) for (kind, x), f in zip(factors, state)]
            for (kind, _), f in zip(factors, state):
                if kind == "g+" and f.v < 0:
                    raise PoleError("a Gamma(x + t) factor has a pole on the right of the contour")
            parts = list(state) + ([extra] if extra is not None else [])
            prod = _laurent_product(parts, length)
            mu = -prod.v
            row = []
            if mu > 0:
                q = prod.c
                if phase != 0:
                    ph = series_exp([mp.mpf(0), 1j * mp.pi * phase], length - 1)
                    lead = unit_phase(phase * t0) if isinstance(t0, Fraction) else mp.expjpi(phase * to_mp(t0))
                    q = series_mul(q, [lead * c for c in ph], length - 1)
                for r in range(mu):
                    row.append(-scale * q[mu - 1 - r])
            coeffs.append(row)
        width = max((len(rw) for rw in coeffs), default=1)
        width = max(width, 1)
        coeffs = [rw + [mp.mpf(0)] * (width - len(rw)) for rw in coeffs]
        out.append(LogPowerSeries(0, base, coeffs))
    return out


def gp_at_zero(eq: HypergeometricEquation, p: int, order: int = 40) -> GpExpansion:
    """Residue expansion of G_p at z = 0, closing the contour to the right.

    G_p(z) = int dt/(2 pi i) e^(i pi (p-2) t) z^t prod_j Gamma(alpha_j + t)
             prod_{h<=p} Gamma(gamma_h - t) / prod_{j>p} Gamma(1 - gamma_j + t),

    and each pole t0 contributes -Res, a polynomial in log z times z^t0.
    """
    n = eq.n
    if not 1 <= p <= n:
        raise SeriesError(f"p must lie in 1..{n}")
    alpha, gam = eq.alpha, eq.gamma
    factors = [("g+", a) for a in alpha] + [("g-", gam[h]) for h in range(p)] + [("r+", 1 - gam[j]) for j in range(p, n)]
    bases = [min(gam[h] for h in cls) for cls in resonance_classes(gam) if any(h < p for h in cls)]
    return GpExpansion(p, _right_residues(factors, bases, order, p + 2, phase=p - 2))


def resonant_y_at_zero(eq: HypergeometricEquation, j: int, order: int = 40) -> GpExpansion:
    """The logarithmic solution y_j^* of the leading resonance class near z = 0.

    y_j^*(z) = int dt z^t f_n(t) / (1 - e^(2 pi i (t - gamma_1)))^j, with the
    same orientation as the G_p integrals, so that y_1^* = e^(i pi gamma_1) G_1.
    """
    n = eq.n
    cls = resonance_classes(eq.gamma)[0]
    if j < 1 or j > len(cls):
        raise SeriesError(f"j must lie in 1..{len(cls)} for this resonance class")
    g1 = eq.gamma[0]
    length = j + n + 2
    # (1 - e^(2 pi i e))^(-j) = (-2 pi i e)^(-j) (sum_r (2 pi i e)^r / (r+1)!)^(-j)
    tpi = 2j * mp.pi
    base_series = [tpi**r / mp.factorial(r + 1) for r in range(length)]
    inv = series_inv(base_series, length - 1)
    powered = [mp.mpf(1)] + [mp.mpf(0)] * (length - 1)
    for _ in range(j):
        powered = series_mul(powered, inv, length - 1)
    extra = _Laurent(-j, [c * (-tpi) ** (-j) for c in powered])
    factors = [("g+", a) for a in eq.alpha] + [("r+", 1 - g) for g in eq.gamma]
    base = min(eq.gamma[h] for h in cls)
    if (base - g1).denominator != 1:
        raise SeriesError("class base is not an integer shift of gamma_1")
    return GpExpansion(j, _right_residues(factors, [base], order, length, extra=extra, scale=2j * mp.pi))
