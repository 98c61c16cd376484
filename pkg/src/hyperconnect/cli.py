"""``hyperconnect`` command line: analysis, local bases and connection matrices.

Every command prints one JSON document tagged ``"schema": "hyperconnect/1"``.
Exit codes: 0 success, 2 parse error, 3 unsupported configuration, 4 a
requested check failed.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

import mpmath
from mpmath import mp

from . import __version__
from .connection import (
    ClosedFormError,
    buehring_A,
    connection_matrix_closed,
    g_coeff,
    h_coeff,
    identity_residuals,
    k_coeff,
    lqw_coeffs,
)
from .equation import QUARTIC, QUINTIC, EquationError, HypergeometricEquation, buehring_params, equation_from_dict
from .frobenius import FrobeniusError, frobenius_basis, preset_basis
from .numerics import PoleError, PrecisionError, complex_to_json, resolve_digits, working_precision
from .oracle import DEFAULT_ORDER, ConnectionMatrix, OracleError, numeric_connection
from .series_engine import SeriesError

SCHEMA = "hyperconnect/1"
EXIT_OK, EXIT_PARSE, EXIT_UNSUPPORTED, EXIT_CHECK = 0, 2, 3, 4
PRESETS = {"quartic": QUARTIC, "quintic": QUINTIC}
IDENTITY_THRESHOLD = "1e-6"


class UsageError(Exception):
    """Bad input that argparse itself cannot catch."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _rational(x: Fraction) -> str:
    return str(x)


def _num(x, digits: int) -> dict:
    return complex_to_json(x, digits)


def _real(x, digits: int = 5) -> str:
    return mpmath.nstr(x, digits)


def load_equation(source: str) -> tuple[HypergeometricEquation, str | None]:
    """A preset name or a path to an equation JSON file."""
    if source in PRESETS:
        return PRESETS[source], source
    path = Path(source)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise UsageError(f"no such equation file: {source}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{source} is not valid JSON: {exc}") from exc
    if isinstance(data, dict) and "equation" in data:
        data = data["equation"]
    eq = equation_from_dict(data)
    preset = next((name for name, e in PRESETS.items() if e == eq), None)
    return eq, preset


def _equation_summary(eq: HypergeometricEquation) -> dict:
    params = buehring_params(eq)
    return {
        "alpha": [_rational(a) for a in eq.alpha],
        "gamma": [_rational(g) for g in eq.gamma],
        "n": eq.n,
        "beta": _rational(eq.beta),
        "c": _rational(params.c),
    }


def _matrix_json(cm: ConnectionMatrix, digits: int) -> dict:
    out = cm.to_json(digits)
    out["details"] = {k: v for k, v in cm.details.items() if isinstance(v, (str, int, list)) and k != "per_point"}
    return out


# ----------------------------------------------------------------------------
# commands


def cmd_analyze(args, digits):
    eq, preset = load_equation(args.equation)
    exps0 = eq.local_exponents(0)
    exps1 = eq.local_exponents(1)
    report = {
        "equation": _equation_summary(eq),
        "preset": preset,
        "exponents": {"0": [_rational(e) for e in exps0], "1": [_rational(e) for e in exps1], "infinity": [_rational(a) for a in eq.alpha]},
        "resonance_classes": [[i + 1 for i in cls] for cls in eq.resonance_classes()],
        "resonant": eq.is_resonant,
    }
    return report, EXIT_OK


def cmd_frobenius(args, digits):
    eq, preset = load_equation(args.equation)
    name = args.preset or None
    if name is not None and PRESETS[name] != eq:
        raise UsageError(f"preset {name} does not match the equation")
    fm = preset_basis(name, args.point, args.order) if name else frobenius_basis(eq, args.point, args.order)
    columns = []
    for j, col in enumerate(fm.columns):
        coeffs = [[_rational(Fraction(c)) for c in row] for row in col.coeffs]
        columns.append({"index": j + 1, "exponent": _rational(col.exponent), "coefficients": coeffs})
    report = {
        "equation": _equation_summary(eq),
        "point": args.point,
        "order": args.order,
        "variable": "z" if args.point == 0 else "1-z",
        "R": [[_rational(x) for x in row] for row in fm.R],
        "columns": columns,
        "normalization": name or "canonical",
        "note": "coefficients[k][r] multiplies x^(exponent+k) log(x)^r / r!",
    }
    if name:
        with working_precision(digits):
            C = fm.C()
            report["C"] = [[_num(C[i, j], digits) for j in range(eq.n)] for i in range(eq.n)]
    return report, EXIT_OK


def cmd_connect(args, digits):
    eq, preset = load_equation(args.equation)
    report = {"equation": _equation_summary(eq), "preset": preset, "digits": digits}
    tol = mp.mpf(args.tol) if args.tol else None
    closed = oracle = None
    if args.method in ("closed", "both"):
        t0 = time.perf_counter()
        closed = connection_matrix_closed(eq, preset, digits, tol)
        report["closed"] = _matrix_json(closed, digits)
        report["closed"]["seconds"] = round(time.perf_counter() - t0, 3)
    if args.method in ("oracle", "both"):
        t0 = time.perf_counter()
        oracle = numeric_connection(eq, digits, args.order, preset=preset)
        report["oracle"] = _matrix_json(oracle, digits)
        report["oracle"]["seconds"] = round(time.perf_counter() - t0, 3)
    if closed is not None and oracle is not None:
        with mp.workdps(digits + 10):
            deltas = [[_real(abs(closed.matrix[i, j] - oracle.matrix[i, j])) for j in range(eq.n)] for i in range(eq.n)]
            report["delta"] = {"entries": deltas, "max": _real(closed.max_delta(oracle))}
    return report, EXIT_OK


def _quartic_symbolic():
    A = mp.gamma(mp.mpf(1) / 8) * mp.gamma(mp.mpf(3) / 8) / (mp.gamma(mp.mpf(5) / 8) * mp.gamma(mp.mpf(7) / 8))
    s2p = mp.sqrt(2) * mp.pi
    ipi = 1j * mp.pi
    return mp.matrix(
        [
            [A / (2 * s2p), -A / (4 * ipi), 0],
            [(2 / s2p) * (3 * A / 64 + 1 / A), -(1 / ipi) * (3 * A / 64 - 1 / A), 0],
            [-2 / s2p, 0, -1 / s2p],
        ]
    )


QUINTIC_STRUCTURE = {
    (2, 0): 1,
    (2, 1): 0,
    (2, 2): 0,
    (2, 3): 0,
    (1, 3): "2pi i",
    (0, 3): 0,
    (3, 3): 0,
}


def quintic_structure_value(v):
    return 2j * mp.pi if v == "2pi i" else mp.mpf(v)


def cmd_reproduce(args, digits):
    name = args.preset
    eq = PRESETS[name]
    checks = []
    t0 = time.perf_counter()
    closed = connection_matrix_closed(eq, name, digits)
    t_closed = time.perf_counter() - t0
    oracle = numeric_connection(eq, digits, args.order, preset=name)
    with mp.workdps(digits + 10):
        delta = closed.max_delta(oracle)
        if name == "quartic":
            bound = mp.mpf(10) ** -30
            checks.append({"check": "closed vs oracle", "value": _real(delta), "bound": "1e-30", "pass": bool(delta < bound)})
            symbolic = _quartic_symbolic()
            gd = max(abs(closed.matrix[i, j] - symbolic[i, j]) for i in range(3) for j in range(3))
            checks.append({"check": "closed vs symbolic entries", "value": _real(gd), "bound": "1e-30", "pass": bool(gd < bound)})
        else:
            bound = mp.mpf(10) ** -8
            checks.append({"check": "closed vs oracle", "value": _real(delta), "bound": "1e-8", "pass": bool(delta < bound)})
            sd = max(abs(oracle.matrix[i, j] - quintic_structure_value(v)) for (i, j), v in QUINTIC_STRUCTURE.items())
            checks.append({"check": "oracle structural entries", "value": _real(sd), "bound": "1e-30", "pass": bool(sd < mp.mpf(10) ** -30)})
    report = {
        "preset": name,
        "digits": digits,
        "closed": _matrix_json(closed, digits),
        "oracle": _matrix_json(oracle, digits),
        "seconds_closed": round(t_closed, 3),
        "checks": checks,
        "pass": all(c["pass"] for c in checks),
    }
    return report, EXIT_OK if report["pass"] else EXIT_CHECK


def _index_range(text: str) -> list[int]:
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            return list(range(int(lo), int(hi) + 1))
        return [int(text)]
    except ValueError as exc:
        raise UsageError(f"bad index range {text!r}; use m or lo..hi") from exc


def cmd_check_identity(args, digits):
    threshold = mp.mpf(args.threshold)
    rows = []
    with working_precision(digits):
        tol = mp.mpf(10) ** -min(digits, 20)
        for m in _index_range(args.m):
            r = identity_residuals(m, tol)
            rows.append(
                {
                    "m": m,
                    "k": _num(r["k"], digits),
                    "h": _num(r["h"], digits),
                    "abs(Im k - pi h)": _real(r["residual"]),
                    "abs(Im k - pi abs(h))": _real(r["residual_abs"]),
                    "abs(Im k + pi h)": _real(r["residual_negated"]),
                    "pass": bool(r["residual"] < threshold),
                }
            )
    report = {"preset": args.preset, "threshold": args.threshold, "rows": rows, "pass": all(r["pass"] for r in rows)}
    return report, EXIT_OK if report["pass"] else EXIT_CHECK


FAMILY_FORMULAS = {
    "A": "Buehring numbers A(k), finite sums for n = 3 and n = 4",
    "g": "two-branch coefficients g_m(0), g_m(c) for c not an integer",
    "lqw": "logarithmic coefficients l_m, q_m, w_m for integer c = c0 >= 0",
    "h": "Taylor coefficients at z = 1 of z^(-gamma_1) G_2",
    "k": "Taylor coefficients at z = 1 of z^(-gamma_1) G_3 (n = 4)",
}


def cmd_coeff(args, digits):
    eq, preset = load_equation(args.equation)
    m = args.index
    with working_precision(digits):
        tol = mp.mpf(args.tol) if args.tol else mp.mpf(10) ** -min(digits, 20)
        params = buehring_params(eq)
        values = {}
        tail = mp.mpf(0)
        if args.family == "A":
            values["A"] = buehring_A(params, m)
        elif args.family == "g":
            r0 = g_coeff(params, m, "0", tol)
            rc = g_coeff(params, m, "c", tol)
            values["g(0)"], values["g(c)"] = r0.value, rc.value
            tail = max(r0.tail_estimate, rc.tail_estimate)
        elif args.family == "lqw":
            c = params.c
            if c.denominator != 1 or c < 0:
                raise ClosedFormError("the l/q/w family needs c to be a non-negative integer")
            r = lqw_coeffs(params, int(c), m, tol)
            values = {"l": r.l, "q": r.q, "w": r.w}
            tail = r.tail_estimate
        elif args.family == "h":
            r = h_coeff(eq, m, tol)
            values["h"], tail = r.value, r.tail_estimate
        else:
            r = k_coeff(eq, m, tol)
            values["k"], tail = r.value, r.tail_estimate
        report = {
            "equation": _equation_summary(eq),
            "family": args.family,
            "index": m,
            "formula": FAMILY_FORMULAS[args.family],
            "values": {k: (None if v is None else _num(v, digits)) for k, v in values.items()},
            "tail_estimate": _real(tail),
        }
    return report, EXIT_OK


# ----------------------------------------------------------------------------
# entry points


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hyperconnect", description="Connection matrices of generalized hypergeometric equations.")
    p.add_argument("--version", action="version", version=f"hyperconnect {__version__}")
    p.add_argument("--digits", type=int, default=None, help="working digits (default: $HYPERCONNECT_DIGITS or 60)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analyze", help="exponents, beta, c and resonance classes")
    a.add_argument("equation", help="equation JSON file or preset name")

    f = sub.add_parser("frobenius", help="local series coefficients at 0 or 1")
    f.add_argument("equation")
    f.add_argument("--point", type=int, choices=(0, 1), default=0)
    f.add_argument("--order", type=int, default=8)
    f.add_argument("--preset", choices=sorted(PRESETS))

    c = sub.add_parser("connect", help="the 0 -> 1 connection matrix")
    c.add_argument("equation")
    c.add_argument("--method", choices=("closed", "oracle", "both"), default="both")
    c.add_argument("--order", type=int, default=DEFAULT_ORDER)
    c.add_argument("--tol", default=None)

    r = sub.add_parser("reproduce", help="closed forms against the oracle for a preset")
    r.add_argument("preset", choices=sorted(PRESETS))
    r.add_argument("--order", type=int, default=DEFAULT_ORDER)

    i = sub.add_parser("check-identity", help="compare Im k_m with pi h_m")
    i.add_argument("preset", choices=["quintic"])
    i.add_argument("--m", default="0..2")
    i.add_argument("--threshold", default=IDENTITY_THRESHOLD)

    k = sub.add_parser("coeff", help="a single coefficient of one family")
    k.add_argument("equation")
    k.add_argument("--family", choices=("A", "g", "lqw", "h", "k"), required=True)
    k.add_argument("--index", type=int, default=0)
    k.add_argument("--tol", default=None)

    for sp in (a, f, c, r, i, k):
        sp.add_argument("--digits", type=int, default=argparse.SUPPRESS)
    return p


COMMANDS = {
    "analyze": cmd_analyze,
    "frobenius": cmd_frobenius,
    "connect": cmd_connect,
    "reproduce": cmd_reproduce,
    "check-identity": cmd_check_identity,
    "coeff": cmd_coeff,
}


def run(argv: list[str]) -> tuple[dict, int]:
    """Execute one command; returns the JSON report and the exit code."""
    base = {"schema": SCHEMA, "command": list(argv)}
    try:
        args = build_parser().parse_args(argv)
        digits = resolve_digits(args.digits)
        if args.command in ("frobenius",) and args.order < 1:
            raise UsageError("--order must be positive")
        t0 = time.perf_counter()
        with mp.workdps(digits):
            report, code = COMMANDS[args.command](args, digits)
        base.update(report)
        base["seconds"] = round(time.perf_counter() - t0, 3)
        base["exit_code"] = code
        return base, code
    except (UsageError, EquationError, PrecisionError) as exc:
        base.update({"error": str(exc), "exit_code": EXIT_PARSE})
        return base, EXIT_PARSE
    except (ClosedFormError, OracleError, FrobeniusError, SeriesError, PoleError) as exc:
        base.update({"error": str(exc), "exit_code": EXIT_UNSUPPORTED})
        return base, EXIT_UNSUPPORTED


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if argv in ([], ["-h"], ["--help"]) or argv == ["--version"]:
        try:
            build_parser().parse_args(argv or ["--help"])
        except SystemExit as exc:
            return int(exc.code or 0)
    report, code = run(argv)
    stream = sys.stdout if code in (EXIT_OK, EXIT_CHECK) else sys.stderr
    print(json.dumps(report, indent=2), file=stream)
    return code


if __name__ == "__main__":
    sys.exit(main())
