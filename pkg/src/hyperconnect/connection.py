"""Closed-form connection coefficients and the 0 -> 1 connection matrix.

The matrix is assembled in the canonical Frobenius coordinates of both
points.  For a list of solutions F (G_1, G_2, ... and the special solution
xi at z = 1), K holds their coordinates at z = 1, read off from the
coefficient families below, and T their coordinates at z = 0, read off from
the residue expansions.  Then Phi0_can = Phi1_can K T^-1, and the preset
bases follow from the normalizations of both fundamental matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

import mpmath
from mpmath import mp

from .equation import BuehringParameters, HypergeometricEquation, QUARTIC, QUINTIC, buehring_params, resonance_classes
from .frobenius import FundamentalMatrix, frobenius_basis, preset_basis
from .numerics import (
    PoleError,
    digamma,
    gamma,
    is_nonpositive_integer,
    pochhammer,
    resolve_digits,
    rgamma,
    series_inv,
    series_mul,
    to_mp,
    unit_phase,
    working_precision,
)
from .oracle import ConnectionMatrix
from .series_engine import (
    Family,
    SumResult,
    accelerate,
    default_tol,
    families_from_exponents,
    gp_at_zero,
    pfq,
    resonant_y_at_zero,
    threeF2_at_unity,
)


class ClosedFormError(ValueError):
    """The configuration lies outside the implemented closed-form coverage."""


@dataclass
class CoefficientTable:
    family: str
    indices: list
    values: list
    tail_estimates: list
    details: dict = field(default_factory=dict)


def _as_params(params) -> BuehringParameters:
    if isinstance(params, HypergeometricEquation):
        return buehring_params(params)
    return params


def _frac(x) -> bool:
    return isinstance(x, (int, Fraction))


# ----------------------------------------------------------------------------
# Buehring numbers A^(n)(k)


class BuehringSequence:
    """A^(n)(k) for k = 0, 1, ... built incrementally at the current precision.

    n = 3: (b2-a3)_k (b1-a3)_k / k!.
    n = 4: (s0)_k sum_j (b1-a3)_(k-j)/(k-j)! (b3-a4)_j (b2-a4)_j / ((s0)_j j!),
    with s0 = b3 + b2 - a4 - a3.
    """

    def __init__(self, params: BuehringParameters):
        params = _as_params(params)
        n = len(params.a)
        if n not in (3, 4):
            raise ClosedFormError(f"A^(n)(k) is implemented for n = 3 and 4, not n = {n}")
        self.n = n
        a, b = params.a, params.b
        if n == 3:
            self.u = to_mp(b[1] - a[2])
            self.v = to_mp(b[0] - a[2])
        else:
            self.s0 = to_mp(b[2] + b[1] - a[3] - a[2])
            self.p1 = to_mp(b[0] - a[2])
            self.x = to_mp(b[2] - a[3])
            self.y = to_mp(b[1] - a[3])
            if is_nonpositive_integer(b[2] + b[1] - a[3] - a[2]):
                raise PoleError("b3 + b2 - a4 - a3 is a non-positive integer")
            self._P1 = [mp.mpf(1)]
            self._P2 = [mp.mpf(1)]
            self._s0k = [mp.mpf(1)]
        self.values = [mp.mpf(1)]

    def __getitem__(self, k: int):
        while len(self.values) <= k:
            self._extend()
        return self.values[k]

    def _extend(self) -> None:
        k = len(self.values)
        if self.n == 3:
            self.values.append(self.values[-1] * (self.u + k - 1) * (self.v + k - 1) / k)
            return
        j = k - 1
        self._P1.append(self._P1[-1] * (self.p1 + j) / k)
        self._P2.append(self._P2[-1] * (self.x + j) * (self.y + j) / ((self.s0 + j) * k))
        self._s0k.append(self._s0k[-1] * (self.s0 + j))
        conv = mp.fsum(self._P1[k - i] * self._P2[i] for i in range(k + 1))
        self.values.append(self._s0k[-1] * conv)


def buehring_A(params, k: int):
    """A^(n)(k) for n in {3, 4}."""
    if k < 0:
        raise ValueError("k must be non-negative")
    return BuehringSequence(params)[k]


def _tail_exponents(params: BuehringParameters, shift) -> list:
    return [params.a[j] + shift for j in range(2, len(params.a))]


# ----------------------------------------------------------------------------
# g_m, l_m, q_m, w_m


def g_coeff(params, m: int, branch: str = "0", tol=None) -> SumResult:
    """g_m(0) or g_m(c) of the two-branch expansion when c is not an integer."""
    params = _as_params(params)
    a, c = params.a, params.c
    if _frac(c) and Fraction(c).denominator == 1:
        raise ClosedFormError("c is an integer; use lqw_coeffs")
    a1, a2 = a[0], a[1]
    if branch == "c":
        ell = c
    elif branch == "0":
        ell = 0
        for x in _tail_exponents(params, m):
            if mpmath.re(to_mp(x)) <= 0:
                raise ClosedFormError("g_m(0) needs Re(a_j + m) > 0 for j >= 3")
    else:
        raise ValueError("branch must be '0' or 'c'")
    pre = (-1) ** m * gamma(a1 + ell + m) * gamma(a2 + ell + m) * gamma(c - 2 * ell - m)
    pre *= rgamma(c + a1) * rgamma(c + a2) / mp.factorial(m)
    if len(a) == 3 and branch == "0":
        res = threeF2_at_unity([c - m, params.b[1] - a[2], params.b[0] - a[2]], [a1 + c, a2 + c], tol)
        return SumResult(pre * res.value, abs(pre) * res.tail_estimate, res.terms_used, res.accelerated, res.method, res.converged)
    seq = BuehringSequence(params)
    top = c - ell - m
    cm, c1, c2 = to_mp(top), to_mp(c + a1), to_mp(c + a2)
    if branch == "c" or is_nonpositive_integer(top):
        stop = m if branch == "c" else -int(top)
        total = mp.mpf(0)
        t = mp.mpf(1)
        for k in range(stop + 1):
            total += t * seq[k]
            t *= (cm + k) / ((c1 + k) * (c2 + k))
        return SumResult(pre * total, mp.mpf(0), stop + 1, False, "terminating")
    state = {"t": mp.mpf(1)}

    def term(k):
        if k == 0:
            state["t"] = mp.mpf(1)
        else:
            state["t"] *= (cm + k - 1) / ((c1 + k - 1) * (c2 + k - 1))
        return state["t"] * seq[k]

    res = accelerate(term, families_from_exponents(_tail_exponents(params, m)), _relative(tol, pre))
    return SumResult(pre * res.value, abs(pre) * res.tail_estimate, res.terms_used, res.accelerated, res.method, res.converged)


def _relative(tol, pre):
    tol = tol if tol is not None else default_tol()
    return tol


@dataclass(frozen=True)
class LQW:
    l: object
    q: object
    w: object
    tail_estimate: object


def lqw_coeffs(params, c0: int, m: int, tol=None) -> LQW:
    """(l_m, q_m, w_m) of the logarithmic expansion when c = c0 is a non-negative integer.

    l_m is only defined for m < c0 and is returned as None otherwise.
    """
    params = _as_params(params)
    if params.c != c0 or c0 < 0:
        raise ClosedFormError(f"c = {params.c} does not equal the non-negative integer {c0}")
    a1, a2 = params.a[0], params.a[1]
    seq = BuehringSequence(params)
    A1, A2 = to_mp(a1 + c0), to_mp(a2 + c0)
    err = mp.mpf(0)

    l_val = None
    if m < c0:
        for x in _tail_exponents(params, m):
            if mpmath.re(to_mp(x)) <= 0:
                raise ClosedFormError("l_m needs Re(a_j + m) > 0 for j >= 3")
        pre = (-1) ** m * gamma(a1 + m) * gamma(a2 + m) * gamma(c0 - m) * rgamma(c0 + a1) * rgamma(c0 + a2) / mp.factorial(m)
        st = {"t": mp.mpf(1)}

        def lterm(k):
            if k == 0:
                st["t"] = mp.mpf(1)
            else:
                st["t"] *= (c0 - m + k - 1) / ((A1 + k - 1) * (A2 + k - 1))
            return st["t"] * seq[k]

        res = accelerate(lterm, families_from_exponents(_tail_exponents(params, m)), tol)
        l_val = pre * res.value
        err = max(err, abs(pre) * res.tail_estimate)

    pref = pochhammer(A1, m) * pochhammer(A2, m) / (mp.factorial(c0 + m) * mp.factorial(m))
    finite_q = mp.mpf(0)
    finite_w = mp.mpf(0)
    for k in range(m + 1):
        t = to_mp(pochhammer(-m, k)) / (pochhammer(A1, k) * pochhammer(A2, k)) * seq[k]
        finite_q += t
        finite_w += t * (digamma(1 + m - k) + digamma(1 + c0 + m) - digamma(a1 + c0 + m) - digamma(a2 + c0 + m))
    q_val = (-1) ** (c0 + 1) * pref * finite_q

    for x in _tail_exponents(params, m + c0):
        if mpmath.re(to_mp(x)) <= 0:
            raise ClosedFormError("w_m needs Re(c0 + a_j + m) > 0 for j >= 3")
    st2 = {"t": None}

    def wterm(i):
        k = m + 1 + i
        if i == 0:
            st2["t"] = mp.factorial(k - m - 1) / (pochhammer(A1, k) * pochhammer(A2, k))
        else:
            st2["t"] *= (k - m - 1) / ((A1 + k - 1) * (A2 + k - 1))
        return st2["t"] * seq[k]

    res = accelerate(wterm, families_from_exponents(_tail_exponents(params, m + c0)), tol)
    tail_pref = (-1) ** (c0 + m) * pochhammer(A1, m) * pochhammer(A2, m) / mp.factorial(c0 + m)
    w_val = (-1) ** c0 * pref * finite_w + tail_pref * res.value
    err = max(err, abs(tail_pref) * res.tail_estimate)
    return LQW(l_val, q_val, w_val, err)


# ----------------------------------------------------------------------------
# h_m and k_m


def _require_leading_pair(eq: HypergeometricEquation) -> None:
    cls = resonance_classes(eq.gamma)[0]
    if len(cls) < 2 or tuple(cls[:2]) != (0, 1):
        raise ClosedFormError("gamma_1 and gamma_2 must lie in one resonance class")


def h_coeff(eq: HypergeometricEquation, m: int, tol=None) -> SumResult:
    """Coefficient of (1-z)^m in z^(-gamma_1) G_2(z) for n = 3 or n = 4."""
    _require_leading_pair(eq)
    al, ga = eq.alpha, eq.gamma
    if eq.n == 3:
        pre = gamma(al[0] + ga[0]) * gamma(al[1] + ga[0]) * gamma(al[2] + ga[0])
        pre *= gamma(al[0] + ga[1] + m) * gamma(al[1] + ga[1] + m)
        pre *= rgamma(al[0] + al[1] + ga[0] + ga[1] + m) * rgamma(1 + ga[0] - ga[2]) / mp.factorial(m)
        res = threeF2_at_unity(
            [al[0] + ga[0], al[1] + ga[0], 1 - al[2] - ga[2]],
            [al[0] + al[1] + ga[0] + ga[1] + m, 1 + ga[0] - ga[2]],
            tol,
        )
        return SumResult(pre * res.value, abs(pre) * res.tail_estimate, res.terms_used, res.accelerated, res.method, res.converged)
    if eq.n != 4:
        raise ClosedFormError("h_m is implemented for n = 3 and n = 4")
    pre = gamma(al[2] + ga[0]) * gamma(al[3] + ga[0]) * gamma(al[0] + ga[1] + m) * gamma(al[1] + ga[1] + m)
    pre *= rgamma(1 - ga[2] + ga[0]) * rgamma(1 - ga[3] + ga[0]) / mp.factorial(m)
    x1, x2 = to_mp(al[0] + ga[0]), to_mp(al[1] + ga[0])
    lo = to_mp(al[0] + al[1] + ga[0] + ga[1] + m)
    upper = [al[2] + ga[0], al[3] + ga[0]]
    lower = [1 - ga[2] + ga[0], 1 - ga[3] + ga[0]]
    lead = gamma(x1) * gamma(x2) * rgamma(lo)
    st = {"t": None}

    def term(ell):
        if ell == 0:
            st["t"] = lead
        else:
            st["t"] *= (x1 + ell - 1) * (x2 + ell - 1) / ((lo + ell - 1) * ell)
        return st["t"] * pfq([-ell] + upper, lower, 1).value

    fam = families_from_exponents([m + ga[1] + ga[0] + al[2], m + ga[1] + ga[0] + al[3]])
    res = accelerate(term, fam, tol)
    return SumResult(pre * res.value, abs(pre) * res.tail_estimate, res.terms_used, res.accelerated, res.method, res.converged)


def k_coeff(eq: HypergeometricEquation, m: int, tol=None) -> SumResult:
    """Coefficient of (1-z)^m in z^(-gamma_1) G_3(z) for n = 4."""
    if eq.n != 4:
        raise ClosedFormError("k_m is implemented for n = 4 only")
    cls = resonance_classes(eq.gamma)[0]
    if len(cls) < 3 or tuple(cls[:3]) != (0, 1, 2):
        raise ClosedFormError("gamma_1, gamma_2, gamma_3 must lie in one resonance class")
    al, ga = eq.alpha, eq.gamma
    a1, a2, a3, a4 = al
    g1, g2, g3, g4 = ga
    if (a2 - a3).denominator == 1:
        raise ClosedFormError("alpha_2 - alpha_3 is an integer: the residues are not simple")
    if mpmath.re(to_mp(a1 + g3 + m)) <= 0:
        raise ClosedFormError("k_m needs Re(alpha_1 + gamma_3 + m) > 0")
    # the outer extrapolation amplifies noise in its terms
    inner_tol = (tol if tol is not None else default_tol()) * mp.mpf("1e-12")
    pre = gamma(a1 + g2) * gamma(a2 + g3 + m) * gamma(a3 + g3 + m) * gamma(a4 + g1)
    pre *= rgamma(1 - a4 - g4) / mp.factorial(m)

    def branch(x, y):
        """Coefficient data of the pole series at s = -x; y is the other alpha."""
        phase = unit_phase(-x)
        const = phase * gamma(y - x) * gamma(g1 + x) * rgamma(y + g3 + m)
        return x, y, const

    branches = [branch(a2, a3), branch(a3, a2)]
    u1, u2, lo = to_mp(a1 + g1), to_mp(1 - a4 - g4), to_mp(1 - g4 + g1)
    lead = gamma(a1 + g1) * gamma(1 - a4 - g4) * rgamma(1 - g4 + g1)
    st = {"t": None}

    def term(ell):
        if ell == 0:
            st["t"] = lead
        else:
            st["t"] *= (u1 + ell - 1) * (u2 + ell - 1) / ((lo + ell - 1) * ell)
        total = 0
        for x, y, const in branches:
            ratio = gamma(g2 + ell + x) * rgamma(a1 + x + g1 + g2 + ell)
            f = threeF2_at_unity([g1 + x, g2 + ell + x, 1 - y - g3 - m], [1 + x - y, a1 + x + g1 + g2 + ell], inner_tol)
            total += const * ratio * f.value
        return st["t"] * total

    fam = [Family(a4 + g1, 1)]
    res = accelerate(term, fam, tol)
    return SumResult(pre * res.value, abs(pre) * res.tail_estimate, res.terms_used, res.accelerated, res.method, res.converged)


def identity_residuals(m: int, tol=None) -> dict:
    """|Im k_m - pi h_m| and |Im k_m - pi |h_m|| for the quintic parameters.

    |Im k_m + pi h_m| is included as well, since the computed k_m and h_m
    satisfy the identity with that sign.
    """
    k = k_coeff(QUINTIC, m, tol).value
    h = h_coeff(QUINTIC, m, tol).value
    imk = mpmath.im(k)
    return {
        "m": m,
        "k": k,
        "h": h,
        "residual": abs(imk - mp.pi * h),
        "residual_abs": abs(imk - mp.pi * abs(h)),
        "residual_negated": abs(imk + mp.pi * h),
    }


# ----------------------------------------------------------------------------
# xi and the G_p <-> y_j^* basis change


@dataclass
class XiContinuationData:
    """xi = sum_j coefficients[j] y_j^*; psi data only in the resonant case."""

    coefficients: list
    resonant: bool
    q: int = 0
    psi_zeros: list = field(default_factory=list)
    psi_poles: list = field(default_factory=list)
    psi_prefactor: object = None
    psi_taylor: list = field(default_factory=list)  # psi^(r)(x0) / r!
    unverified: bool = False


def _psi_taylor(zeros, poles, prefactor, x0, count: int) -> list:
    """Taylor coefficients of prefactor * prod(x - zeros) / prod(x - poles) at x0."""
    num = [mp.mpf(1)]
    for zr in zeros:
        num = series_mul(num, [x0 - zr, mp.mpf(1)], count)
    den = [mp.mpf(1)]
    for pl in poles:
        den = series_mul(den, [x0 - pl, mp.mpf(1)], count)
    out = series_mul(num, series_inv(den, count), count)
    out = (out + [mp.mpf(0)] * (count + 1))[: count + 1]
    return [prefactor * c for c in out]


def xi_continuation(eq: HypergeometricEquation) -> XiContinuationData:
    """Coefficients of the special solution xi at z = 1 in the basis y_j^* at z = 0.

    The leading resonance class must be gamma_1..gamma_q.  The psi prefactor is
    -e^(-i pi beta); see the decisions ledger for the sign.
    """
    beta = eq.beta
    if beta.denominator == 1 and beta < 0:
        raise ClosedFormError("beta is a negative integer: the eta solution is not supported")
    n = eq.n
    al, ga = eq.alpha, eq.gamma
    classes = resonance_classes(ga)
    gb = gamma(beta + 1)

    def nonres_coeff(j):
        num = mp.mpf(1)
        for k in range(n):
            if k != j:
                num *= gamma(ga[k] - ga[j])
        for k in range(n):
            num *= rgamma(1 - al[k] - ga[j])
        return num

    if all(len(c) == 1 for c in classes):
        return XiContinuationData([gb * nonres_coeff(j) for j in range(n)], False)
    lead = classes[0]
    q = len(lead)
    if tuple(lead) != tuple(range(q)) or any(len(c) > 1 for c in classes[1:]):
        raise ClosedFormError("only a single leading resonance class gamma_1..gamma_q is supported")
    x0 = unit_phase(2 * ga[0])
    zeros = [unit_phase(-2 * a) for a in al]
    poles = [unit_phase(2 * ga[k]) for k in range(q, n)]
    prefactor = -unit_phase(-beta)
    taylor = _psi_taylor(zeros, poles, prefactor, x0, q)
    coeffs = []
    for j in range(1, q + 1):
        # psi^(q-j)(x0) / (q-j)! is the Taylor coefficient
        coeffs.append(gb / (2j * mp.pi) * (-1) ** j * taylor[q - j])
    for j in range(q, n):
        coeffs.append(nonres_coeff(j) / mp.pi)
    return XiContinuationData(coeffs, True, q, zeros, poles, prefactor, taylor, unverified=q < n)


def gp_basis_change(eq: HypergeometricEquation, p: int) -> list:
    """Row (A_p1, ..., A_pp) with G_p = sum_j A_pj y_j^*."""
    ga = eq.gamma
    classes = resonance_classes(ga)
    if all(len(c) == 1 for c in classes):
        if not 1 <= p <= eq.n:
            raise ValueError(f"p must lie in 1..{eq.n}")
        row = []
        for j in range(p):
            v = unit_phase((p - 1) * ga[j])
            for k in range(p):
                if k != j:
                    v *= mp.pi / mp.sinpi(to_mp(ga[j] - ga[k]))
            row.append(v)
        return row
    lead = classes[0]
    q = len(lead)
    if tuple(lead) != tuple(range(q)):
        raise ClosedFormError("the leading resonance class must be gamma_1..gamma_q")
    if not 1 <= p <= q:
        raise ValueError(f"p must lie in 1..{q}")
    ph = unit_phase(-2 * ga[0]) * unit_phase(sum(ga[:p]))
    return [ph * (2j * mp.pi) ** (p - 1) * (-1) ** (p - j) * comb(p - 1, p - j) for j in range(1, p + 1)]


def gp_basis_matrix(eq: HypergeometricEquation, size: int):
    """Lower-triangular matrix whose row p-1 is gp_basis_change(eq, p), padded with zeros."""
    M = mp.matrix(size, size)
    for p in range(1, size + 1):
        for j, v in enumerate(gp_basis_change(eq, p)):
            M[p - 1, j] = v
    return M


# ----------------------------------------------------------------------------
# assembly


def _slot_coordinates(fm: FundamentalMatrix, expansion) -> list:
    """Canonical coordinates of a solution given by its local expansion.

    ``expansion(base, k, r)`` returns the coefficient of x^(base+k) L^r/r!.
    """
    return [expansion(base, k, r) for (_, base, k, r) in fm.slots]


def _preset_coordinates(fm: FundamentalMatrix):
    """P with (preset columns) = (canonical columns) * P."""
    n = fm.n
    J = mp.matrix(n, n)
    for i in range(n):
        for j in range(n):
            J[i, j] = to_mp(fm.to_jordan[i][j])
    return J * fm.C()


def _shift_series(coeffs: list, gamma1) -> list:
    """Multiply sum_m u_m y^m by z^gamma1 = (1-y)^gamma1."""
    if gamma1 == 0:
        return coeffs
    out = []
    for m in range(len(coeffs)):
        s = 0
        for i in range(m + 1):
            s += coeffs[m - i] * mpmath.binomial(to_mp(gamma1), i) * (-1) ** i
        out.append(s)
    return out


def _expansion_at_one(branches: dict):
    """branches maps exponent base -> {(k, r): coefficient}."""

    def get(base, k, r):
        return branches.get(base, {}).get((k, r), mp.mpf(0))

    return get


def _classify(eq: HypergeometricEquation, preset: str | None) -> str:
    if preset in ("quartic", "quintic"):
        return preset
    if preset is not None:
        raise ClosedFormError(f"unknown preset {preset!r}")
    if eq == QUARTIC:
        return "quartic"
    if eq == QUINTIC:
        return "quintic"
    classes = resonance_classes(eq.gamma)
    beta_int = eq.beta.denominator == 1
    if eq.n == 3 and all(len(c) == 1 for c in classes) and not beta_int:
        return "nonresonant3"
    if eq.n in (3, 4) and all(g == 0 for g in eq.gamma) and not beta_int:
        return f"mum{eq.n}"
    raise ClosedFormError(
        "oracle only: closed forms cover the quartic and quintic presets, nonresonant n = 3 with c not an integer, "
        "and gamma = 0 with n = 3 or 4 and beta not an integer"
    )


def _coordinates_at_zero(eq, fm0, kind: str, order: int):
    """Columns of T: canonical z = 0 coordinates of each solution in the list."""
    n = eq.n
    cols = []
    if kind == "nonresonant3":
        al, ga = eq.alpha, eq.gamma
        for j in range(n):
            fj = mp.mpf(1)
            for a in al:
                fj *= gamma(a + ga[j])
            for g in ga:
                fj *= rgamma(1 - g + ga[j])
            col = [fj if (base == ga[j] and k == 0 and r == 0) else mp.mpf(0) for (_, base, k, r) in fm0.slots]
            cols.append(col)
        return cols
    need = n + 2
    for p in range(1, n):
        G = gp_at_zero(eq, p, need)
        cols.append(_slot_coordinates(fm0, G.coefficient))
    xi = xi_continuation(eq)
    ys = [resonant_y_at_zero(eq, j, need) for j in range(1, n + 1)]
    col = [mp.mpf(0)] * n
    for j, cf in enumerate(xi.coefficients):
        c = _slot_coordinates(fm0, ys[j].coefficient)
        col = [col[i] + cf * c[i] for i in range(n)]
    cols.append(col)
    return cols


def _coordinates_at_one(eq, fm1, kind: str, tol):
    """Columns of K and the largest reported tail estimate."""
    n = eq.n
    cols = []
    err = mp.mpf(0)
    beta = eq.beta
    if kind == "nonresonant3":
        al, ga = eq.alpha, eq.gamma
        for j in range(n):
            a = tuple(x + ga[j] for x in al)
            b = tuple(1 - ga[k] + ga[j] for k in range(n) if k != j)
            params = BuehringParameters(a, b, sum(b) - sum(a))
            hol = []
            for m in range(n - 1):
                r = g_coeff(params, m, "0", tol)
                hol.append(r.value)
                err = max(err, r.tail_estimate)
            sing = g_coeff(params, 0, "c", tol).value
            hol = _shift_series(hol, ga[j])
            cols.append(_slot_coordinates(fm1, _expansion_at_one({0: {(m, 0): hol[m] for m in range(n - 1)}, beta: {(0, 0): sing}})))
        return cols, err
    params = buehring_params(eq)
    if kind == "quintic":
        lqw0 = lqw_coeffs(params, 1, 0, tol)
        lqw1 = lqw_coeffs(params, 1, 1, tol)
        err = max(err, lqw0.tail_estimate, lqw1.tail_estimate)
        g1 = {(0, 0): lqw0.l, (1, 0): lqw0.w, (1, 1): lqw0.q, (2, 0): lqw1.w, (2, 1): lqw1.q}
        cols.append(_slot_coordinates(fm1, _expansion_at_one({0: g1})))
    else:
        hol = []
        for m in range(n - 1):
            r = g_coeff(params, m, "0", tol)
            hol.append(r.value)
            err = max(err, r.tail_estimate)
        sing = g_coeff(params, 0, "c", tol).value
        cols.append(_slot_coordinates(fm1, _expansion_at_one({0: {(m, 0): hol[m] for m in range(n - 1)}, beta: {(0, 0): sing}})))
    families = [h_coeff] + ([k_coeff] if n == 4 else [])
    for fam in families:
        vals = []
        for m in range(n - 1):
            r = fam(eq, m, tol)
            vals.append(r.value)
            err = max(err, r.tail_estimate)
        cols.append(_slot_coordinates(fm1, _expansion_at_one({0: {(m, 0): vals[m] for m in range(n - 1)}})))
    if beta.denominator != 1:
        cols.append([mp.mpf(1) if base == beta and k == 0 and r == 0 else mp.mpf(0) for (_, base, k, r) in fm1.slots])
    else:
        col = _xi_jordan_column(fm1)
        cols.append(col)
    return cols, err


def _xi_jordan_column(fm1: FundamentalMatrix) -> list:
    """Canonical coordinates of the log-free solution heading the beta Jordan block."""
    beta = fm1.eq.beta
    n = fm1.n
    for j in range(n):
        if fm1.R[j][j] == beta and (j + 1 >= n or fm1.R[j][j + 1] != 0):
            # bottom of a chain of length > 1 starting at exponent beta
            return [to_mp(fm1.to_jordan[i][j]) for i in range(n)]
    raise ClosedFormError("no logarithmic Jordan chain at the exponent beta")


CLOSED_FORM_DIGITS = 20


def closed_form_tol(digits: int):
    """Default target of the accelerated sums: 10^-min(digits, 20).

    The slow algebraic tails make full working precision impractically
    expensive, and twenty digits leave ample margin over the oracle checks.
    """
    return mp.mpf(10) ** (-min(digits, CLOSED_FORM_DIGITS))


def connection_matrix_closed(
    eq: HypergeometricEquation,
    preset: str | None = None,
    digits: int | None = None,
    tol=None,
) -> ConnectionMatrix:
    """M with Phi0(z) = Phi1(1 - z) M from the closed-form coefficient families."""
    kind = _classify(eq, preset)
    d = resolve_digits(digits)
    with working_precision(d):
        tol = tol if tol is not None else closed_form_tol(d)
        order = eq.n + 4
        if kind in ("quartic", "quintic"):
            fm0 = preset_basis(kind, 0, order)
            fm1 = preset_basis(kind, 1, order)
        else:
            fm0 = frobenius_basis(eq, 0, order)
            fm1 = frobenius_basis(eq, 1, order)
        T = _columns_to_matrix(_coordinates_at_zero(eq, fm0, kind, order))
        Kcols, err = _coordinates_at_one(eq, fm1, kind, tol)
        K = _columns_to_matrix(Kcols)
        M_can = K * mp.inverse(T)
        P0 = _preset_coordinates(fm0)
        P1 = _preset_coordinates(fm1)
        M = mp.inverse(P1) * M_can * P0
        scale = max(abs(x) for x in M)
        error = err * max(1, scale)
    with mp.workdps(d + 10):
        return ConnectionMatrix(+M, "closed-form", error, d, {"kind": kind})


def _columns_to_matrix(cols: list):
    n = len(cols)
    M = mp.matrix(n, n)
    for j, c in enumerate(cols):
        for i in range(n):
            M[i, j] = c[i]
    return M


# ----------------------------------------------------------------------------
# tables and checks built on the families


def coefficient_table(eq: HypergeometricEquation, family: str, indices, tol=None, c0: int | None = None) -> CoefficientTable:
    """Values of one coefficient family over a range of indices."""
    indices = list(indices)
    values, tails = [], []
    params = buehring_params(eq)
    for m in indices:
        if family == "A":
            values.append(buehring_A(params, m))
            tails.append(mp.mpf(0))
            continue
        if family in ("l", "q", "w"):
            c = params.c if c0 is None else c0
            if not (_frac(c) and Fraction(c).denominator == 1):
                raise ClosedFormError("the l/q/w families need an integer c")
            r = lqw_coeffs(params, int(c), m, tol)
            values.append({"l": r.l, "q": r.q, "w": r.w}[family])
            tails.append(r.tail_estimate)
            continue
        if family == "g":
            r = g_coeff(params, m, "0", tol)
        elif family == "h":
            r = h_coeff(eq, m, tol)
        elif family == "k":
            r = k_coeff(eq, m, tol)
        else:
            raise ValueError(f"unknown family {family!r}")
        values.append(r.value)
        tails.append(r.tail_estimate)
    return CoefficientTable(family, indices, values, tails)


def buehring_expansion(params, z, terms: int, tol=None):
    """Two-branch expansion of prod Gamma(a)/prod Gamma(b) nF(n-1)(a; b; z) near z = 1.

    sum_m g_m(0) (1-z)^m + (1-z)^c sum_m g_m(c) (1-z)^m, truncated after ``terms`` terms.
    """
    params = _as_params(params)
    y = 1 - to_mp(z)
    hol = mp.mpf(0)
    sing = mp.mpf(0)
    for m in range(terms):
        hol += g_coeff(params, m, "0", tol).value * y**m
        sing += g_coeff(params, m, "c", tol).value * y**m
    return hol + mp.power(y, to_mp(params.c)) * sing


def normalized_pfq(params, z, tol=None):
    """prod Gamma(a)/prod Gamma(b) nF(n-1)(a; b; z) by direct summation (|z| < 1)."""
    params = _as_params(params)
    pre = mp.mpf(1)
    for a in params.a:
        pre *= gamma(a)
    for b in params.b:
        pre *= rgamma(b)
    return pre * pfq(list(params.a), list(params.b), z, tol).value


def h_series(eq: HypergeometricEquation, z, terms: int, tol=None):
    """z^gamma_1 sum_{m < terms} h_m (1-z)^m, the expansion of G_2 near z = 1."""
    y = 1 - to_mp(z)
    total = mp.mpf(0)
    for m in range(terms):
        total += h_coeff(eq, m, tol).value * y**m
    return mp.power(to_mp(z), to_mp(eq.gamma[0])) * total


def taylor_shift_coefficient(eq: HypergeometricEquation, p: int, q: int, m: int):
    """Coefficient of (1-z)^m in z^(-gamma_q) G_p(z) from G_p at shifted gamma_q, z = 1.

    Differentiating z^(t - gamma_q) gives (gamma_q - t)_m.  For q <= p it merges
    with Gamma(gamma_q - t); for q > p it comes from 1/Gamma(1 - gamma_q + t)
    and brings a factor (-1)^m.
    """
    from .oracle import gp_by_quadrature

    if not 1 <= q <= eq.n:
        raise ValueError(f"q must lie in 1..{eq.n}")
    shifted = list(eq.gamma)
    shifted[q - 1] = shifted[q - 1] + m
    sign = (-1) ** m if q > p else 1
    return sign * gp_by_quadrature(eq.alpha, shifted, p, 1) / mp.factorial(m)
