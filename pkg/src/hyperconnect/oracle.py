"""Connection matrices from overlapping truncated Frobenius expansions.

Both local fundamental systems converge on 0 < z < 1, so at any sample point
M10 = Phi1(1 - z)^{-1} Phi0(z).  Several sample points give independent
estimates; their spread is reported as the error estimate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import mpmath
from mpmath import mp

from .equation import HypergeometricEquation, QUARTIC, QUINTIC
from .frobenius import FundamentalMatrix, frobenius_basis, preset_basis
from .numerics import resolve_digits, to_mp, working_precision

DEFAULT_ORDER = 400
DEFAULT_POINTS = ("0.3", "0.5", "0.7")


class OracleError(ValueError):
    pass


@dataclass
class ConnectionMatrix:
    """n x n matrix with M[i][j] expressing Phi0 column j in Phi1 columns."""

    matrix: object  # mpmath matrix
    method: str
    error_estimate: object
    digits: int
    details: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.matrix.rows

    def entry(self, i: int, j: int):
        return self.matrix[i, j]

    def max_delta(self, other: "ConnectionMatrix | object"):
        m = other.matrix if isinstance(other, ConnectionMatrix) else other
        return max(abs(self.matrix[i, j] - m[i, j]) for i in range(self.n) for j in range(self.n))

    def to_json(self, digits: int | None = None) -> dict:
        from .numerics import complex_to_json

        d = digits or self.digits
        return {
            "n": self.n,
            "method": self.method,
            "error_estimate": mpmath.nstr(self.error_estimate, 5),
            "matrix": [[complex_to_json(self.matrix[i, j], d) for j in range(self.n)] for i in range(self.n)],
        }


def systems_for(eq: HypergeometricEquation, order: int, preset: str | None = None, numeric: bool = True):
    """(Phi0, Phi1) for an equation; presets attach their fixed normalizations."""
    if preset is None:
        if eq == QUARTIC:
            preset = "quartic"
        elif eq == QUINTIC:
            preset = "quintic"
    if preset:
        return preset_basis(preset, 0, order, numeric=numeric), preset_basis(preset, 1, order, numeric=numeric)
    return frobenius_basis(eq, 0, order, numeric=numeric), frobenius_basis(eq, 1, order, numeric=numeric)


def matrix_at(phi0: FundamentalMatrix, phi1: FundamentalMatrix, z):
    z = to_mp(z)
    A0 = phi0.evaluate(z)
    A1 = phi1.evaluate(z)
    return mp.inverse(A1) * A0


def numeric_connection(
    eq: HypergeometricEquation,
    digits: int | None = None,
    order: int = DEFAULT_ORDER,
    points: Sequence = DEFAULT_POINTS,
    preset: str | None = None,
    systems: tuple | None = None,
) -> ConnectionMatrix:
    """Connection matrix from series overlap; error estimate = spread across points."""
    if len(points) < 1:
        raise OracleError("need at least one sample point")
    d = resolve_digits(digits)
    with working_precision(d):
        for p in points:
            zp = to_mp(p)
            if not (0 < zp < 1):
                raise OracleError(f"sample point {p} must lie strictly between 0 and 1")
        phi0, phi1 = systems if systems is not None else systems_for(eq, order, preset)
        mats = [matrix_at(phi0, phi1, p) for p in points]
        ref = mats[0]
        for m in mats[1:]:
            ref = ref + m
        ref = ref / len(mats)
        spread = _max_pairwise(mats)
        tails = max(max(phi0.tail_estimate(p), phi1.tail_estimate(p)) for p in points)
        err = max(spread, tails)
        if spread > mp.mpf(10) ** (-mp.mpf(d) / 4):
            raise OracleError(
                f"sample points disagree by {mpmath.nstr(spread, 5)}; raise the series order (now {order})"
            )
    with mp.workdps(d + 10):
        return ConnectionMatrix(
            +ref,
            "oracle",
            err,
            d,
            {"points": [str(p) for p in points], "order": order, "spread": spread, "tail": tails, "per_point": mats},
        )


def _max_pairwise(mats) -> object:
    worst = mp.mpf(0)
    for a in range(len(mats)):
        for b in range(a + 1, len(mats)):
            A, B = mats[a], mats[b]
            for i in range(A.rows):
                for j in range(A.cols):
                    worst = max(worst, abs(A[i, j] - B[i, j]))
    return worst


def cross_point_consistency(mats) -> object:
    """Largest entrywise deviation among matrices computed at different points.

    Accepts a list of matrices or a ConnectionMatrix from ``numeric_connection``.
    """
    if isinstance(mats, ConnectionMatrix):
        mats = mats.details["per_point"]
    return _max_pairwise(list(mats))


def gp_by_quadrature(alpha: Sequence, gamma: Sequence, p: int, z, line=None):
    """G_p(z) from its Barnes integral along the vertical line Re t = line.

    G_p(z) = (1/2 pi) int dy e^(i pi (p-2) t) z^t prod Gamma(alpha_j + t)
             prod_{h<=p} Gamma(gamma_h - t) / prod_{j>p} Gamma(1 - gamma_j + t),  t = line + i y.

    Independent of the residue expansions; ``gamma`` need not end in 0.  The
    default line lies midway between the two pole families.
    """
    al = [to_mp(a) for a in alpha]
    ga = [to_mp(g) for g in gamma]
    if not 1 <= p <= len(ga):
        raise OracleError(f"p must lie in 1..{len(ga)}")
    left = max(mpmath.re(-a) for a in al)
    right = min(mpmath.re(g) for g in ga[:p])
    if left >= right:
        raise OracleError("the two pole families are not separated by a vertical line")
    c = to_mp(line) if line is not None else (left + right) / 2
    zm = to_mp(z)
    log_z = mp.log(zm)

    def integrand(y):
        t = mp.mpc(c, y)
        v = mp.exp(1j * mp.pi * (p - 2) * t + t * log_z)
        for a in al:
            v *= mp.gamma(a + t)
        for g in ga[:p]:
            v *= mp.gamma(g - t)
        for g in ga[p:]:
            v *= mp.rgamma(1 - g + t)
        return v

    return mp.quad(integrand, [-mp.inf, -10, 0, 10, mp.inf]) / (2 * mp.pi)


CALIBRATION_TARGETS = {
    # structural zeros and simple entries, as (preset, row, col, value builder)
    "quartic.M[1][3]": ("quartic", 0, 2, lambda: mp.mpf(0)),
    "quartic.M[2][3]": ("quartic", 1, 2, lambda: mp.mpf(0)),
    "quartic.M[3][2]": ("quartic", 2, 1, lambda: mp.mpf(0)),
    "quartic.M[3][3]": ("quartic", 2, 2, lambda: -1 / (mp.sqrt(2) * mp.pi)),
    "quartic.M[3][1]": ("quartic", 2, 0, lambda: -2 / (mp.sqrt(2) * mp.pi)),
    "quintic.q0-slot": ("quintic", 2, 0, lambda: mp.mpf(1)),
    "quintic.M[2][4]": ("quintic", 1, 3, lambda: 2j * mp.pi),
    "quintic.M[1][4]": ("quintic", 0, 3, lambda: mp.mpf(0)),
    "quintic.M[3][2]": ("quintic", 2, 1, lambda: mp.mpf(0)),
    "quintic.M[3][3]": ("quintic", 2, 2, lambda: mp.mpf(0)),
    "quintic.M[3][4]": ("quintic", 2, 3, lambda: mp.mpf(0)),
    "quintic.M[4][4]": ("quintic", 3, 3, lambda: mp.mpf(0)),
}


def calibrate_target(name: str, digits: int | None = None, order: int = DEFAULT_ORDER) -> dict:
    """Oracle value of a single structural entry, with its reference value for comparison."""
    if name not in CALIBRATION_TARGETS:
        raise OracleError(f"unknown calibration target {name!r}; known: {sorted(CALIBRATION_TARGETS)}")
    preset, i, j, reference = CALIBRATION_TARGETS[name]
    eq = QUARTIC if preset == "quartic" else QUINTIC
    cm = numeric_connection(eq, digits=digits, order=order, preset=preset)
    d = cm.digits
    with mp.workdps(d + 10):
        value = cm.matrix[i, j]
        expected = mp.mpc(reference())
        return {"target": name, "oracle": value, "reference": expected, "delta": abs(value - expected), "error_estimate": cm.error_estimate}
