"""Local solutions at z = 0 and z = 1 by the Frobenius method.

The hypergeometric operator is rewritten around the chosen point in Euler
form ``sum_j x^j R_j(theta_x)`` with ``x = z`` or ``x = 1 - z``.  Solutions are
truncated series ``x^e * sum_k c_k(L) x^k`` where each ``c_k`` is a polynomial
in ``L = log x`` stored in the basis ``L^r / r!``.

For every class of local exponents differing by integers the recurrence
introduces one free parameter per root of the indicial polynomial.  Setting a
single parameter to one gives the *canonical* basis: each solution has
coefficient 1 at its own slot ``x^(e0+k) L^r/r!`` and 0 at the slots of the
others.  The preset fundamental matrices use a Jordan basis on which
``d/dL`` acts as the nilpotent part of the exponent matrix; it is built from
the canonical one by an exact change of basis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import mpmath
from mpmath import mp

from .equation import HypergeometricEquation, local_exponents, operator_polynomials, elementary_symmetric
from .numerics import to_mp


class FrobeniusError(ValueError):
    pass


# ----------------------------------------------------------------------------
# polynomials in theta (coefficient lists, lowest degree first)


def _padd(p, q):
    out = [Fraction(0)] * max(len(p), len(q))
    for i, c in enumerate(p):
        out[i] += c
    for i, c in enumerate(q):
        out[i] += c
    return _trim(out)


def _pmul(p, q):
    if not p or not q:
        return []
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return _trim(out)


def _trim(p):
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def taylor_shift(p, e):
    """Coefficients of p(e + t) in t."""
    out = list(p)
    n = len(out)
    for i in range(n):
        for j in range(n - 2, i - 1, -1):
            out[j] += e * out[j + 1]
    return out


def poly_eval(p, x):
    acc = 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


class ThetaOperator:
    """Finite sum of ``x^i P_i(theta)`` with Laurent powers of x."""

    def __init__(self, terms: dict[int, list] | None = None):
        self.terms = {i: _trim(p) for i, p in (terms or {}).items() if _trim(p)}

    @classmethod
    def constant(cls, c) -> "ThetaOperator":
        return cls({0: [Fraction(c)]})

    @classmethod
    def theta(cls) -> "ThetaOperator":
        return cls({0: [Fraction(0), Fraction(1)]})

    @classmethod
    def x_power(cls, i: int, c=1) -> "ThetaOperator":
        return cls({i: [Fraction(c)]})

    def __add__(self, other: "ThetaOperator") -> "ThetaOperator":
        out = dict(self.terms)
        for i, p in other.terms.items():
            out[i] = _padd(out.get(i, []), p)
        return ThetaOperator(out)

    def __neg__(self) -> "ThetaOperator":
        return ThetaOperator({i: [-c for c in p] for i, p in self.terms.items()})

    def __sub__(self, other: "ThetaOperator") -> "ThetaOperator":
        return self + (-other)

    def __mul__(self, other: "ThetaOperator") -> "ThetaOperator":
        # x^a P(theta) x^c Q(theta) = x^(a+c) P(theta + c) Q(theta)
        out: dict[int, list] = {}
        for a, p in self.terms.items():
            for c, q in other.terms.items():
                term = _pmul(taylor_shift(p, Fraction(c)), q)
                out[a + c] = _padd(out.get(a + c, []), term)
        return ThetaOperator(out)

    def euler_form(self) -> list[list[Fraction]]:
        """[R_0, R_1, ...] after dividing by the lowest power of x."""
        if not self.terms:
            raise FrobeniusError("zero operator")
        low = min(self.terms)
        high = max(self.terms)
        return [self.terms.get(i, []) for i in range(low, high + 1)]


def local_operator(eq: HypergeometricEquation, point: int) -> list[list[Fraction]]:
    """Euler-form polynomials of the equation in x = z (point 0) or x = 1 - z (point 1)."""
    p_gamma, q_alpha = operator_polynomials(eq)
    if point == 0:
        return [p_gamma, [-c for c in q_alpha]]
    if point != 1:
        raise FrobeniusError(f"unsupported point {point}")
    # theta_z = (1 - 1/y) theta_y and z = 1 - y
    theta_z = ThetaOperator({0: [Fraction(0), Fraction(1)], -1: [Fraction(0), Fraction(-1)]})
    z = ThetaOperator({0: [Fraction(1)], 1: [Fraction(-1)]})

    def apply_poly(coeffs):
        acc = ThetaOperator()
        for c in reversed(coeffs):
            acc = acc * theta_z + ThetaOperator.constant(c)
        return acc

    op = apply_poly(p_gamma) - z * apply_poly(q_alpha)
    return op.euler_form()


def theta_operator_at(point: int):
    """theta_z in the local variable of ``point`` as an Euler-form ThetaOperator."""
    if point == 0:
        return ThetaOperator.theta()
    return ThetaOperator({0: [Fraction(0), Fraction(1)], -1: [Fraction(0), Fraction(-1)]})


def root_multiplicity(poly, e) -> int:
    shifted = taylor_shift(poly, e)
    m = 0
    while m < len(shifted) and shifted[m] == 0:
        m += 1
    return m


# ----------------------------------------------------------------------------
# log-power series


@dataclass
class LogPowerSeries:
    """``x^exponent * sum_k sum_r coeffs[k][r] x^k L^r / r!`` with x = z or 1 - z."""

    point: int
    exponent: Fraction
    coeffs: list

    @property
    def order(self) -> int:
        return len(self.coeffs)

    @property
    def log_width(self) -> int:
        return max((len(c) for c in self.coeffs), default=0)

    def coefficient(self, k: int, r: int = 0):
        if 0 <= k < len(self.coeffs) and r < len(self.coeffs[k]):
            return self.coeffs[k][r]
        return 0

    def map(self, f) -> "LogPowerSeries":
        return LogPowerSeries(self.point, self.exponent, [[f(c) for c in row] for row in self.coeffs])

    def numeric(self) -> "LogPowerSeries":
        return self.map(to_mp)

    def theta(self) -> "LogPowerSeries":
        """Apply theta_z = z d/dz."""
        width = self.log_width
        g = []
        for k, row in enumerate(self.coeffs):
            row = list(row) + [0] * (width - len(row))
            e = self.exponent + k
            g.append([e * row[r] + (row[r + 1] if r + 1 < width else 0) for r in range(width)])
        if self.point == 0:
            return LogPowerSeries(0, self.exponent, g)
        # theta_z = theta_y - y^{-1} theta_y
        out = []
        zero = [0] * width
        for j in range(len(g)):
            prev = g[j - 1] if j >= 1 else zero
            out.append([prev[r] - g[j][r] for r in range(width)])
        return LogPowerSeries(1, self.exponent - 1, out)

    def local_variable(self, z):
        return z if self.point == 0 else 1 - z

    def evaluate(self, z, log_x=None):
        """Value at global coordinate ``z``; ``log_x`` overrides the branch of log x."""
        x = self.local_variable(to_mp(z))
        if log_x is None:
            log_x = mp.log(x)
        width = self.log_width
        total = 0
        lpow = mp.mpf(1)
        for r in range(width):
            acc = 0
            for row in reversed(self.coeffs):
                c = row[r] if r < len(row) else 0
                acc = acc * x + c
            total += acc * lpow / math.factorial(r)
            lpow *= log_x
        return total * mp.power(x, to_mp(self.exponent))

    def tail_estimate(self, z):
        """Magnitude of the last retained term, a rough truncation indicator."""
        x = abs(self.local_variable(to_mp(z)))
        row = self.coeffs[-1]
        lx = abs(mp.log(x)) if x else 0
        s = sum(abs(to_mp(c)) * lx**r / math.factorial(r) for r, c in enumerate(row))
        return s * x ** (len(self.coeffs) - 1 + to_mp(self.exponent))


def combine(series: Sequence[LogPowerSeries], weights: Sequence) -> LogPowerSeries:
    """Linear combination of series sharing point and exponent."""
    base = series[0]
    order = min(s.order for s in series)
    width = max(s.log_width for s in series)
    out = []
    for k in range(order):
        row = [0] * width
        for s, w in zip(series, weights):
            if w == 0:
                continue
            for r, c in enumerate(s.coeffs[k]):
                row[r] += w * c
        out.append(row)
    return LogPowerSeries(base.point, base.exponent, out)


# ----------------------------------------------------------------------------
# the recurrence


@dataclass
class ExponentClass:
    """Roots of the indicial polynomial that differ by integers."""

    base: Fraction
    roots: list  # exponents in the order they appear in the local exponent list

    @property
    def size(self) -> int:
        return len(self.roots)


def exponent_classes(exponents: Sequence[Fraction]) -> list[ExponentClass]:
    classes: list[ExponentClass] = []
    for e in exponents:
        for cls in classes:
            if (e - cls.roots[0]).denominator == 1:
                cls.roots.append(e)
                break
        else:
            classes.append(ExponentClass(e, [e]))
    for cls in classes:
        cls.base = min(cls.roots)
    return classes


@dataclass
class ClassSolution:
    """Canonical solutions of one exponent class."""

    base: Fraction
    slots: list  # (k, r) per parameter
    series: list  # LogPowerSeries per parameter, all with exponent = base


def solve_class(R: list, cls: ExponentClass, order: int, numeric: bool = False) -> ClassSolution:
    """Run the Frobenius recurrence for one class up to x^(base + order - 1)."""
    width = cls.size
    R0 = R[0]
    J = len(R) - 1
    conv = to_mp if numeric else (lambda c: c)
    zero = mp.mpf(0) if numeric else Fraction(0)

    slots: list = []
    # c[k][r] is a list of parameter coefficients (length = number of params)
    nparams = cls.size
    c: list = []
    for k in range(order):
        e = cls.base + k
        # rhs = -sum_j R_j(e - j + N) c_{k-j}
        rhs = [[zero] * nparams for _ in range(width)]
        for j in range(1, min(k, J) + 1):
            if not R[j]:
                continue
            t = [conv(x) for x in taylor_shift(R[j], e - j)]
            prev = c[k - j]
            for r in range(width):
                acc = rhs[r]
                for m, tm in enumerate(t):
                    if tm == 0 or r + m >= width:
                        continue
                    src = prev[r + m]
                    for p in range(nparams):
                        if src[p]:
                            acc[p] -= tm * src[p]
        t0 = taylor_shift(R0, e)
        mu = 0
        while mu < len(t0) and t0[mu] == 0:
            mu += 1
        t0n = [conv(x) for x in t0]
        ck = [[zero] * nparams for _ in range(width)]
        if not numeric:
            for r in range(width - mu, width):
                if any(rhs[r]):
                    raise FrobeniusError("log width too small for this exponent class")
        lead = t0n[mu]
        for r in range(width - 1 - mu, -1, -1):
            row = list(rhs[r])
            for m in range(mu + 1, len(t0n)):
                if r + m < width and t0n[m]:
                    src = ck[r + m]
                    for p in range(nparams):
                        if src[p]:
                            row[p] -= t0n[m] * src[p]
            ck[r + mu] = [x / lead for x in row]
        for r in range(mu):
            idx = len(slots)
            if idx >= nparams:
                raise FrobeniusError("more free parameters than indicial roots")
            slots.append((k, r))
            ck[r][idx] = conv(Fraction(1))
        c.append(ck)
    if len(slots) != nparams:
        raise FrobeniusError(f"expansion order {order} too small to reach every exponent of the class")
    series = []
    for p in range(nparams):
        coeffs = [[c[k][r][p] for r in range(width)] for k in range(order)]
        series.append(LogPowerSeries(-1, cls.base, coeffs))
    return ClassSolution(cls.base, slots, series)


# ----------------------------------------------------------------------------
# exact linear algebra on small Fraction matrices


def _rank(vectors: list[list[Fraction]]) -> int:
    rows = [list(v) for v in vectors]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for col in range(ncols):
        piv = next((i for i in range(rank, len(rows)) if rows[i][col] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i][col] != 0:
                f = rows[i][col] / rows[rank][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
    return rank


def frac_inverse(m: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(m)
    a = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(m)]
    for col in range(n):
        piv = next(i for i in range(col, n) if a[i][col] != 0)
        a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        a[col] = [x / p for x in a[col]]
        for i in range(n):
            if i != col and a[i][col] != 0:
                f = a[i][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[col])]
    return [row[n:] for row in a]


@dataclass
class JordanBlock:
    exponent: Fraction
    vectors: list  # canonical coordinates, bottom (log-free) first


def jordan_chains(sol: ClassSolution) -> list[JordanBlock]:
    """Chains of d/dL inside one class, following the preset ordering.

    Heads are taken greedily from canonical solutions sorted by decreasing log
    power and then decreasing slot; each head contributes its full chain.
    Blocks are ordered by exponent, each listed log-free member first.
    """
    m = len(sol.slots)
    index = {s: i for i, s in enumerate(sol.slots)}

    def d_log(vec):
        out = [Fraction(0)] * m
        for p, w in enumerate(vec):
            if w == 0:
                continue
            ser = sol.series[p]
            for q, (k, r) in enumerate(sol.slots):
                out[q] += w * Fraction(ser.coefficient(k, r + 1))
        return out

    order = sorted(range(m), key=lambda p: (-sol.slots[p][1], -sol.slots[p][0]))
    span: list = []
    blocks: list[JordanBlock] = []
    for p in order:
        head = [Fraction(int(i == p)) for i in range(m)]
        if span and _rank(span + [head]) == len(span):
            continue
        chain = [head]
        while True:
            nxt = d_log(chain[-1])
            if not any(nxt):
                break
            chain.append(nxt)
        if _rank(span + chain) != len(span) + len(chain):
            raise FrobeniusError("could not complete a Jordan basis")
        span.extend(chain)
        blocks.append(JordanBlock(sol.base + sol.slots[p][0], list(reversed(chain))))
    blocks.sort(key=lambda b: b.exponent)
    _ = index
    return blocks


# ----------------------------------------------------------------------------
# fundamental matrices


@dataclass
class FundamentalMatrix:
    """Phi(x) = S(x) x^R C at z = 0 or z = 1, stored through its first row.

    ``columns`` holds the first row of S x^R, that is the basis solutions in the
    Jordan ordering.  Row i of Phi is theta_z^i of row 0.  ``canonical`` holds
    the canonical solutions and ``to_jordan`` the exact matrix with
    ``columns = canonical * to_jordan``.  ``normalization`` maps the Jordan
    basis to the preset one (it includes any rescaling of log x).
    """

    eq: HypergeometricEquation
    point: int
    order: int
    columns: list
    R: list
    canonical: list
    slots: list  # (class index, base exponent, k, r) per canonical solution
    to_jordan: list
    normalization: Callable | None = None
    label: str = "canonical"
    _rows: list = field(default_factory=list, repr=False)

    @property
    def n(self) -> int:
        return self.eq.n

    def C(self):
        """Normalization matrix at the current precision (identity if none)."""
        if self.normalization is None:
            return mp.eye(self.n)
        return self.normalization()

    def rows(self) -> list:
        if not self._rows:
            rows = [list(self.columns)]
            for _ in range(1, self.n):
                rows.append([s.theta() for s in rows[-1]])
            self._rows = rows
        return self._rows

    def basis_values(self, z):
        """n x n matrix of theta^i applied to the Jordan basis, before normalization."""
        rows = self.rows()
        out = mp.matrix(self.n, self.n)
        x = to_mp(z) if self.point == 0 else 1 - to_mp(z)
        log_x = mp.log(x)
        for i in range(self.n):
            for j in range(self.n):
                out[i, j] = rows[i][j].evaluate(z, log_x)
        return out

    def evaluate(self, z):
        return self.basis_values(z) * self.C()

    def S_series(self, j: int) -> tuple[Fraction, list]:
        """(exponent, coefficients) of the first-row entry S_{1j} as a power series.

        With rho the exponent of column j, S_{1j} = x^{-rho} * (log-free part of column j).
        """
        col = self.columns[j]
        rho = self.R[j][j]
        shift = col.exponent - rho
        if shift.denominator != 1:
            raise FrobeniusError("column exponent is not aligned with R")
        s = int(shift)
        coeffs = [col.coefficient(k, 0) for k in range(col.order)]
        if s >= 0:
            coeffs = [0] * s + coeffs
        else:
            if any(coeffs[: -s]):
                raise FrobeniusError("negative powers in S")
            coeffs = coeffs[-s:]
        return rho, coeffs

    def tail_estimate(self, z):
        return max(s.tail_estimate(z) for row in self.rows() for s in row)

    def companion_residual(self, z):
        """max |theta Phi - A Phi| using the last row of theta applied once more."""
        rows = self.rows()
        vals = self.basis_values(z)
        A = companion_matrix(self.eq, z)
        extra = [rows[-1][j].theta().evaluate(z) for j in range(self.n)]
        worst = mp.mpf(0)
        for j in range(self.n):
            for i in range(self.n):
                lhs = vals[i + 1, j] if i + 1 < self.n else extra[j]
                rhs = sum(A[i, k] * vals[k, j] for k in range(self.n))
                worst = max(worst, abs(lhs - rhs))
        return worst


def companion_matrix(eq: HypergeometricEquation, z):
    """A(z) with theta Y = A Y for Y = (y, theta y, ..., theta^(n-1) y)."""
    n = eq.n
    z = to_mp(z)
    A = mp.matrix(n, n)
    for i in range(n - 1):
        A[i, i + 1] = 1
    for k in range(n):
        # theta^n y = sum_k (z q_k - p_k)/(1 - z) theta^k y
        p_k = (-1) ** (n - k) * elementary_symmetric(eq.gamma, n - k)
        q_k = elementary_symmetric(eq.alpha, n - k)
        A[n - 1, k] = (z * to_mp(q_k) - to_mp(p_k)) / (1 - z)
    return A


def _class_order_needed(R0, cls: ExponentClass) -> int:
    return int(max(cls.roots) - cls.base) + 1


def frobenius_basis(
    eq: HypergeometricEquation,
    point: int,
    order: int,
    numeric: bool = False,
    normalization: Callable | None = None,
    label: str = "canonical",
) -> FundamentalMatrix:
    """Truncated fundamental system at ``point`` with ``order`` terms per class.

    ``numeric`` runs the long recurrence in working-precision floats; the
    Jordan structure is always computed exactly from the leading terms.
    """
    if point not in (0, 1):
        raise FrobeniusError(f"unsupported point {point}")
    R = local_operator(eq, point)
    exps = local_exponents(eq, point)
    if len(R[0]) - 1 != eq.n:
        raise FrobeniusError("indicial polynomial has the wrong degree")
    for e in exps:
        if poly_eval(R[0], e) != 0:
            raise FrobeniusError(f"{e} is not a local exponent at {point}")
    classes = exponent_classes(exps)
    columns: list = []
    canonical: list = []
    slots: list = []
    exps_R: list = []
    blocks_all: list = []
    offset = 0
    for ci, cls in enumerate(classes):
        need = _class_order_needed(R[0], cls) + 1
        exact = solve_class(R, cls, need)
        sol = solve_class(R, cls, max(order, need), numeric=numeric)
        for s in sol.series:
            s.point = point
        blocks = jordan_chains(exact)
        for b in blocks:
            blocks_all.append((offset, b))
        for p, (k, r) in enumerate(sol.slots):
            slots.append((ci, cls.base, k, r))
        canonical.extend(sol.series)
        offset += len(sol.series)
    m = len(canonical)
    to_jordan = [[Fraction(0)] * m for _ in range(m)]
    R_mat = [[Fraction(0)] * m for _ in range(m)]
    col = 0
    for off, block in blocks_all:
        start = col
        for vec in block.vectors:
            weights = [Fraction(0)] * m
            for i, w in enumerate(vec):
                weights[off + i] = w
                to_jordan[off + i][col] = w
            members = [canonical[i] for i in range(m) if weights[i] != 0]
            ws = [weights[i] for i in range(m) if weights[i] != 0]
            if not numeric:
                columns.append(combine(members, ws))
            else:
                columns.append(combine(members, [to_mp(w) for w in ws]))
            R_mat[col][col] = block.exponent
            if col > start:
                R_mat[col - 1][col] = Fraction(1)
            col += 1
    return FundamentalMatrix(eq, point, order, columns, R_mat, canonical, slots, to_jordan, normalization, label)


# ----------------------------------------------------------------------------
# preset normalizations


def _nilpotent_log_scale(R, lam):
    """exp(-lam * N) for the nilpotent part N of R."""
    n = len(R)
    N = mp.matrix(n, n)
    for i in range(n):
        for j in range(n):
            if i != j:
                N[i, j] = to_mp(R[i][j])
    out = mp.eye(n)
    term = mp.eye(n)
    for k in range(1, n + 1):
        term = term * N * (-lam) / k
        out += term
    return out


def quartic_normalization(point: int, R) -> Callable:
    if point == 0:

        def build():
            tpi = 2j * mp.pi
            C0 = mp.matrix([[1, 0, mp.mpf(1) / 4], [0, 1 / tpi, 0], [0, 0, 1 / tpi**2]])
            return _nilpotent_log_scale(R, 4 * mp.log(4)) * C0

        return build

    def build1():
        return mp.eye(3)

    return build1


def quintic_normalization(point: int, R) -> Callable:
    if point == 0:

        def build():
            tpi = 2j * mp.pi
            D = mp.diag([1, 1 / tpi, 1 / tpi**2, 1 / tpi**3])
            B = mp.matrix(
                [
                    [1, 0, mp.mpf(-25) / 12, 200 * mp.zeta(3) / tpi**3],
                    [0, 1, mp.mpf(5) / 2, mp.mpf(-25) / 12],
                    [0, 0, 5, 0],
                    [0, 0, 0, -5],
                ]
            )
            return _nilpotent_log_scale(R, 5 * mp.log(5)) * D * B

        return build

    def build1():
        return mp.eye(4) * (mp.sqrt(5) / (4 * mp.pi**2))

    return build1


PRESET_NORMALIZATIONS = {"quartic": quartic_normalization, "quintic": quintic_normalization}


def preset_basis(name: str, point: int, order: int, numeric: bool = False) -> FundamentalMatrix:
    from .equation import QUARTIC, QUINTIC

    eq = {"quartic": QUARTIC, "quintic": QUINTIC}.get(name)
    if eq is None:
        raise FrobeniusError(f"unknown preset {name!r}")
    fm = frobenius_basis(eq, point, order, numeric=numeric, label=name)
    fm.normalization = PRESET_NORMALIZATIONS[name](point, fm.R)
    return fm


def theta_apply(series: LogPowerSeries) -> LogPowerSeries:
    return series.theta()
