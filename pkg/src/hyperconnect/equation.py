"""The generalized hypergeometric equation of order n and its exponent data.

The operator is

    theta * prod_{j<n} (theta - gamma_j)  -  z * prod_j (theta + alpha_j),

with theta = z d/dz and gamma_n = 0.  All exponents are exact rationals, so
resonance (integer differences) is decided exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .numerics import parse_rational, to_mp


class EquationError(ValueError):
    """Malformed or unsupported equation data."""


@dataclass(frozen=True)
class BuehringParameters:
    """Parameters of nF_{n-1}(a; b; z) attached to an equation.

    a_j = alpha_j, b_j = 1 - gamma_j for j < n, and c = sum(b) - sum(a).
    """

    a: tuple
    b: tuple
    c: Fraction

    def as_mp(self):
        return [to_mp(x) for x in self.a], [to_mp(x) for x in self.b], to_mp(self.c)


@dataclass(frozen=True)
class HypergeometricEquation:
    alpha: tuple
    gamma: tuple

    def __post_init__(self):
        if len(self.alpha) < 2:
            raise EquationError("order must be at least 2")
        if len(self.alpha) != len(self.gamma):
            raise EquationError(f"order mismatch: {len(self.alpha)} alpha values, {len(self.gamma)} gamma values")
        if self.gamma[-1] != 0:
            raise EquationError("the last gamma value must be 0")

    @property
    def n(self) -> int:
        return len(self.alpha)

    @property
    def beta(self) -> Fraction:
        """Exponent of the non-holomorphic solution at z = 1."""
        return self.n - 1 - sum(self.alpha) - sum(self.gamma)

    def resonance_classes(self) -> list[tuple[int, ...]]:
        return resonance_classes(self.gamma)

    @property
    def is_resonant(self) -> bool:
        return any(len(c) > 1 for c in self.resonance_classes())

    def local_exponents(self, point: int) -> list[Fraction]:
        return local_exponents(self, point)

    def buehring(self) -> BuehringParameters:
        return buehring_params(self)

    def to_dict(self) -> dict:
        return {"alpha": [str(a) for a in self.alpha], "gamma": [str(g) for g in self.gamma]}

    def __str__(self) -> str:
        a = ", ".join(str(x) for x in self.alpha)
        g = ", ".join(str(x) for x in self.gamma)
        return f"alpha=({a}) gamma=({g})"


def new_equation(alpha: Iterable, gamma: Iterable | None = None) -> HypergeometricEquation:
    """Build and validate an equation; ``gamma`` may omit the trailing 0."""
    try:
        a = tuple(parse_rational(x) for x in alpha)
        g = tuple(parse_rational(x) for x in (gamma if gamma is not None else []))
    except ValueError as exc:
        raise EquationError(str(exc)) from exc
    if gamma is None:
        g = (Fraction(0),) * len(a)
    elif len(g) == len(a) - 1:
        g = g + (Fraction(0),)
    return HypergeometricEquation(a, g)


def equation_from_dict(data: dict) -> HypergeometricEquation:
    if not isinstance(data, dict) or "alpha" not in data:
        raise EquationError("equation JSON needs an 'alpha' list")
    alpha = data["alpha"]
    gamma = data.get("gamma")
    if not isinstance(alpha, list) or (gamma is not None and not isinstance(gamma, list)):
        raise EquationError("'alpha' and 'gamma' must be lists")
    return new_equation(alpha, gamma)


def is_integer(x: Fraction) -> bool:
    return x.denominator == 1


def resonance_classes(gamma: Sequence[Fraction]) -> list[tuple[int, ...]]:
    """Maximal groups of 0-based indices whose gamma values differ by integers.

    Classes are listed in order of their first member.
    """
    classes: list[list[int]] = []
    for i, g in enumerate(gamma):
        for cls in classes:
            if is_integer(g - gamma[cls[0]]):
                cls.append(i)
                break
        else:
            classes.append([i])
    return [tuple(c) for c in classes]


def local_exponents(eq: HypergeometricEquation, point: int) -> list[Fraction]:
    if point == 0:
        return list(eq.gamma)
    if point == 1:
        return [Fraction(k) for k in range(eq.n - 1)] + [eq.beta]
    raise EquationError(f"unsupported singular point {point!r}; use 0 or 1")


def buehring_params(eq: HypergeometricEquation) -> BuehringParameters:
    a = tuple(eq.alpha)
    b = tuple(1 - g for g in eq.gamma[:-1])
    return BuehringParameters(a, b, sum(b) - sum(a))


def operator_polynomials(eq: HypergeometricEquation) -> tuple[list[Fraction], list[Fraction]]:
    """Coefficients (lowest degree first) of prod(x - gamma_j) and prod(x + alpha_j)."""

    def from_roots(roots):
        poly = [Fraction(1)]
        for r in roots:
            nxt = [Fraction(0)] * (len(poly) + 1)
            for i, c in enumerate(poly):
                nxt[i + 1] += c
                nxt[i] -= r * c
            poly = nxt
        return poly

    return from_roots(eq.gamma), from_roots([-a for a in eq.alpha])


def elementary_symmetric(values: Sequence[Fraction], k: int) -> Fraction:
    """e_k of the given values."""
    e = [Fraction(1)] + [Fraction(0)] * len(values)
    for v in values:
        for j in range(len(values), 0, -1):
            e[j] += e[j - 1] * v
    return e[k] if 0 <= k <= len(values) else Fraction(0)


QUARTIC = new_equation(["1/4", "1/2", "3/4"], ["0", "0", "0"])
QUINTIC = new_equation(["1/5", "2/5", "3/5", "4/5"], ["0", "0", "0", "0"])
