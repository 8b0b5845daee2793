"""Command-line front end.

Exit codes: 0 when every check passes, 1 when a mathematical violation is
found, 2 on usage or input errors. Output goes to stdout unless ``-o`` is
given; files are written only after the computation succeeded.
"""

from __future__ import annotations

import argparse
import math
import sys
from typing import Optional, Sequence

import numpy as np

from . import constants as const
from . import inequality_checks as ic
from .formats import (
    FormatError,
    key_values,
    plot_data,
    profile_csv_text,
    read_profile_csv,
    report_plot_data,
    report_tsv,
    tsv_table,
)
from .needle import (
    NeedleDensity,
    density_from_config,
    needle_isoperimetric,
    needle_profile,
    parse_config,
    read_density_csv,
)
from .profiles import ConeModel, GridSpec, SpaceForm, sample_profile
from .tubular import EXTERIOR, INTERIOR, TubeBoundInput, model_ball_tube_oracle, tube_perimeter_bound, tube_volume_bound

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2
ORACLE_RTOL = 1e-10


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # pragma: no cover - exercised via main
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _finite(text: str) -> float:
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not math.isfinite(x):
        raise argparse.ArgumentTypeError(f"not finite: {text!r}")
    return x


def _grid(text: str) -> GridSpec:
    try:
        return GridSpec.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _points(text: str) -> np.ndarray:
    """``start:stop:count`` (inclusive, uniform) or a single number."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            pts = np.array([float(parts[0])])
        elif len(parts) == 3:
            a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
            if n < 1:
                raise ValueError
            if n == 1:
                pts = np.array([a])
            else:
                i = np.arange(n, dtype=float)
                pts = ((n - 1 - i) * a + i * b) / (n - 1)
        else:
            raise ValueError
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected start:stop:count or a number, got {text!r}") from None
    if not np.all(np.isfinite(pts)):
        raise argparse.ArgumentTypeError(f"non-finite points in {text!r}")
    return pts


def _add_output(p: argparse.ArgumentParser, formats: bool = False) -> None:
    p.add_argument("-o", "--output", help="write to this file instead of stdout")
    if formats:
        p.add_argument("--format", choices=("tsv", "plot-data"), default="tsv", help="report layout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="isoprofile",
        description="Isoperimetric profiles of model spaces, comparison bounds and inequality checks.",
        allow_abbrev=False,
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    mp = sub.add_parser(
        "model-profile",
        allow_abbrev=False,
        help="sample the exact profile of a space form or cone",
        description=(
            "Write the profile CSV (header v,I) of a model space: the space form of constant "
            "sectional curvature K/(N-1) (geodesic balls, I = area(r(v))) when --K is given, or the "
            "Euclidean cone with asymptotic volume ratio --avr, I = N (omega_N avr)^(1/N) v^((N-1)/N)."
        ),
    )
    mp.add_argument("--N", type=_finite, required=True, help="dimension parameter N > 1")
    src = mp.add_mutually_exclusive_group(required=True)
    src.add_argument("--K", type=_finite, help="Ricci lower bound of the space form")
    src.add_argument("--avr", type=_finite, help="asymptotic volume ratio of the cone, in (0, 1]")
    mp.add_argument("--grid", type=_grid, required=True, help="uniform:a:b:n or geometric:a:b:n")
    _add_output(mp)

    ck = sub.add_parser(
        "check",
        allow_abbrev=False,
        help="check a differential inequality on a profile CSV",
        description="Run one checker on a sampled profile. Exit 0 if every point passes, 1 otherwise.",
    )
    cks = ck.add_subparsers(dest="checker", metavar="CHECKER", parser_class=_Parser)
    cks.required = True

    def checker(name: str, help_text: str, desc: str) -> argparse.ArgumentParser:
        p = cks.add_parser(name, allow_abbrev=False, help=help_text, description=desc)
        p.add_argument("csv", help="profile CSV with header v,I")
        return p

    bp = checker(
        "bp",
        "-I'' I >= K + I'^2/(N-1)",
        "Second-order inequality -I'' I >= K + (I')^2/(N-1) satisfied by profiles of spaces with "
        "Ricci >= K and dimension <= N; equality for space forms.",
    )
    bp.add_argument("--K", type=_finite, required=True)
    bp.add_argument("--N", type=_finite, required=True)
    bp.add_argument("--tol", type=_finite)
    bp.add_argument("--method", choices=("central", "touching"), default="central")
    _add_output(bp, formats=True)

    by = checker(
        "bayle",
        "inequality for xi = I^(alpha/(alpha-1))",
        "-xi'' >= alpha/(alpha-1) xi^((2-alpha)/alpha) ((1/(N-1) - 1/(alpha-1)) I'^2 + K) for "
        "xi = I^(alpha/(alpha-1)), alpha >= N. At alpha = N: -psi'' >= K N/(N-1) psi^((2-N)/N) "
        "with psi = I^(N/(N-1)).",
    )
    by.add_argument("--K", type=_finite, required=True)
    by.add_argument("--N", type=_finite, required=True)
    by.add_argument("--alpha", type=_finite, help="exponent alpha >= N (default N)")
    by.add_argument("--tol", type=_finite)
    by.add_argument("--method", choices=("central", "touching"), default="central")
    _add_output(by, formats=True)

    cc = checker(
        "concavity",
        "concavity of I^(N/(N-1)) - C v^((2+N)/N)",
        "Midpoint concavity on (0, v1] of eta = I^(N/(N-1)) - C v^((2+N)/N) or of "
        "eta_tilde = I - C v^((1+N)/N). C defaults to the constant derived from --K (and --theta when N > 2).",
    )
    cc.add_argument("--N", type=_finite, required=True)
    cc.add_argument("--C", type=_finite)
    cc.add_argument("--K", type=_finite)
    cc.add_argument("--theta", type=_finite)
    cc.add_argument("--variant", choices=("eta", "eta_tilde"), default="eta")
    cc.add_argument("--v1", type=_finite)
    cc.add_argument("--tol", type=_finite)
    _add_output(cc, formats=True)

    rt = checker(
        "ratio",
        "theta <= I(v)/v^((N-1)/N) <= C1 on (0, v1]",
        "Two-sided small-volume bound theta v^((N-1)/N) <= I(v) <= C1 v^((N-1)/N) for v <= v1.",
    )
    rt.add_argument("--N", type=_finite, required=True)
    rt.add_argument("--theta", type=_finite, required=True)
    rt.add_argument("--C1", type=_finite, default=math.inf)
    rt.add_argument("--v1", type=_finite, required=True)
    rt.add_argument("--tol", type=_finite, default=0.0)
    _add_output(rt, formats=True)

    sa = checker(
        "subadd",
        "strict subadditivity I(a+b) < I(a) + I(b)",
        "Strict subadditivity I(a+b) < I(a) + I(b) - tol max I over grid pairs with a + b <= eps.",
    )
    sa.add_argument("--eps", type=_finite, required=True)
    sa.add_argument("--tol", type=_finite, default=1e-9)
    _add_output(sa)

    asy = checker(
        "asymptotics",
        "lim I'(v) v^(1/N) / lim I(v) v^(-(N-1)/N) = (N-1)/N",
        "Estimate theta = lim I(v)/v^((N-1)/N) and the limit of the right derivative times v^(1/N) "
        "as v -> 0; their ratio should be (N-1)/N. Needs a geometric grid reaching small volumes.",
    )
    asy.add_argument("--N", type=_finite, required=True)
    asy.add_argument("--rtol", type=_finite, default=0.02, help="allowed relative deviation of the ratio")
    _add_output(asy)

    tb = sub.add_parser(
        "tube",
        allow_abbrev=False,
        help="tube perimeter and volume bounds, or the model-ball oracle",
        description=(
            "Perimeter of the t-enlargement <= J_{c,K,N}(t) per0 and its volume <= per0 int_0^t J, "
            "with J_{c,K,N} = (s_{K/(N-1), -c/(N-1)})_+^(N-1). With --oracle, compare "
            "area(r+t)/area(r) with J_{c,K,N}(t) for model balls (exact equality)."
        ),
    )
    tb.add_argument("--oracle", action="store_true")
    tb.add_argument("--per0", type=_finite)
    tb.add_argument("--c", type=_finite)
    tb.add_argument("--K", type=_finite, required=True)
    tb.add_argument("--N", type=_finite, required=True)
    tb.add_argument("--r", type=_points, help="radius or radius grid (oracle mode)")
    tb.add_argument("--t", type=_points, required=True, help="t or t-grid start:stop:count")
    tb.add_argument("--side", choices=(EXTERIOR, INTERIOR), default=EXTERIOR)
    _add_output(tb, formats=True)

    nd = sub.add_parser(
        "needle",
        allow_abbrev=False,
        help="weighted isoperimetric problem on a segment",
        description=(
            "Least weighted perimeter of unions of at most m intervals of given weighted length on "
            "[a, b] with density h. Closed forms: s_lambda, h = scale s_{k,lambda}(t - origin)^(N-1); "
            "sin_k, h = scale sin_k(t - origin)^(N-1). Endpoints of the segment carry no perimeter."
        ),
    )
    dens = nd.add_mutually_exclusive_group()
    dens.add_argument("--config", help="key=value file with family, k, lambda, N, scale, a, b")
    dens.add_argument("--csv", help="sampled density CSV with header t,h (uniform t)")
    dens.add_argument("--family", choices=("s_lambda", "sin_k"), help="closed-form density family")
    nd.add_argument("--k", type=_finite, default=0.0, help="curvature parameter k of the family")
    nd.add_argument("--lambda", dest="lam", type=_finite, default=0.0, help="lambda of s_{k,lambda}")
    nd.add_argument("--N", type=_finite, help="exponent: h = g^(N-1)")
    nd.add_argument("--K", type=_finite, help="curvature bound recorded in profile metadata")
    nd.add_argument("--scale", type=_finite, default=1.0, help="positive multiplier of the density")
    nd.add_argument("--a", type=_finite, help="left end of the segment")
    nd.add_argument("--b", type=_finite, help="right end of the segment")
    nd.add_argument("--origin", type=_finite, help="argument shift of the family (default a)")
    what = nd.add_mutually_exclusive_group(required=True)
    what.add_argument("--v", type=_finite, help="single volume")
    what.add_argument("--profile", action="store_true", help="emit a profile CSV over --grid")
    nd.add_argument("--grid", type=_grid, help="volume grid for --profile")
    nd.add_argument("--n", type=int, default=2000, help="number of equal-mass cells (>= 100)")
    nd.add_argument("--m", type=int, default=2, help="maximal number of intervals")
    _add_output(nd)

    cb = sub.add_parser(
        "combine",
        allow_abbrev=False,
        help="min-plus combination of profiles on a common grid",
        description=(
            "Generalized profile of a disjoint union: min over v_1 + ... + v_m = v of sum_j I_j(v_j), "
            "each part taken in one of the inputs. Splits prefer fewer parts, then smaller volumes."
        ),
    )
    cb.add_argument("csv", nargs="+")
    cb.add_argument("--max-parts", type=int, default=2)
    _add_output(cb)

    cs = sub.add_parser("constants", allow_abbrev=False, help="explicit constants")
    css = cs.add_subparsers(dest="constant", metavar="CONSTANT", parser_class=_Parser)
    css.required = True
    c1 = css.add_parser(
        "concavity",
        allow_abbrev=False,
        help="C making I^(N/(N-1)) - C v^((2+N)/N) concave",
        description="C = -K for N = 2, C = -K N^3 theta^((2-N)/(N-1)) / (2 (N-1)(N+2)) for N > 2; K <= 0.",
    )
    c1.add_argument("--K", type=_finite, required=True)
    c1.add_argument("--N", type=_finite, required=True)
    c1.add_argument("--theta", type=_finite)
    c2 = css.add_parser(
        "diameter",
        allow_abbrev=False,
        help="diameter bound for an isoperimetric region of small volume",
        description=(
            "r0 = omega_N^(-1/N) min(v1^(1/N), theta vE/(4 IvE), theta/(4 C1 vE^(1/N))), "
            "diam <= 4 (8N)^N vE / (theta^N r0^(N-1)). C1 defaults to IvE / vE^((N-1)/N)."
        ),
    )
    for flag in ("--N", "--theta", "--v1", "--vE", "--IvE"):
        c2.add_argument(flag, type=_finite, required=True)
    c2.add_argument("--C1", type=_finite)
    c3 = css.add_parser(
        "avr",
        allow_abbrev=False,
        help="diameter bound for K = 0 and Euclidean volume growth",
        description="diam <= C_tilde vE^(1/N) for every isoperimetric region when K = 0 and AVR = A > 0.",
    )
    for flag in ("--N", "--A", "--vE"):
        c3.add_argument(flag, type=_finite, required=True)
    c4 = css.add_parser(
        "nbar",
        allow_abbrev=False,
        help="bound 1 + V/eps on the number of pieces",
        description="floor(1 + V/eps): pieces of volume >= eps inside total volume V.",
    )
    c4.add_argument("--V", type=_finite, required=True)
    c4.add_argument("--eps", type=_finite, required=True)
    return parser


# ---------------------------------------------------------------------------
# commands; each returns (text, exit_code)


def cmd_model_profile(args) -> tuple[str, int]:
    if args.K is not None:
        source = SpaceForm.from_KN(args.K, args.N)
    else:
        source = ConeModel(args.N, args.avr)
    return profile_csv_text(sample_profile(source, args.grid)), EXIT_OK


def _report_text(report: ic.CheckReport, fmt: str) -> str:
    return report_plot_data(report) if fmt == "plot-data" else report_tsv(report)


def cmd_check(args) -> tuple[str, int]:
    p = read_profile_csv(args.csv)
    name = args.checker
    if name == "bp":
        report = ic.check_bp(p, args.K, args.N, args.tol, args.method)
    elif name == "bayle":
        alpha = args.N if args.alpha is None else args.alpha
        report = ic.check_bayle(p, args.K, args.N, alpha, args.tol, args.method)
    elif name == "concavity":
        C = args.C
        if C is None:
            if args.K is None:
                raise UsageError("concavity needs --C or --K")
            C = ic.choose_concavity_constant(args.K, args.N, args.theta)
        report = ic.check_concavity_transform(p, args.N, C, args.variant, args.v1, args.tol)
    elif name == "ratio":
        report = ic.check_ratio_bounds(p, args.N, args.theta, args.C1, args.v1, args.tol)
    elif name == "subadd":
        ok, witness = ic.check_strict_subadditivity(p, args.eps, args.tol)
        pairs = [("strictly_subadditive", ok), ("eps", args.eps), ("tol", args.tol)]
        if witness is not None:
            pairs += [("witness_a", witness[0]), ("witness_b", witness[1])]
        return key_values(pairs), EXIT_OK if ok else EXIT_VIOLATION
    else:
        res = ic.check_derivative_asymptotics(p, args.N)
        expected = (args.N - 1.0) / args.N
        ok = abs(res.ratio_of_limits / expected - 1.0) <= args.rtol
        text = key_values(
            [
                ("theta_est", res.theta_est),
                ("slope_limit_est", res.slope_limit_est),
                ("ratio_of_limits", res.ratio_of_limits),
                ("expected_ratio", expected),
                ("within_rtol", ok),
            ]
        )
        return text, EXIT_OK if ok else EXIT_VIOLATION
    return _report_text(report, args.format), EXIT_OK if report.ok else EXIT_VIOLATION


def cmd_tube(args) -> tuple[str, int]:
    if np.any(args.t < 0):
        raise UsageError("t must be non-negative")
    if args.oracle:
        if args.r is None:
            raise UsageError("--oracle needs --r")
        form = SpaceForm.from_KN(args.K, args.N)
        rows = [model_ball_tube_oracle(form, float(r), float(t)) for r in args.r for t in args.t]
        worst_ok = all(row.gap <= ORACLE_RTOL * max(row.rhs, 1.0) for row in rows)
        if args.format == "plot-data":
            text = plot_data([(f"gap r={r:.17g}", [x.t for x in rows if x.r == r], [x.gap for x in rows if x.r == r]) for r in args.r])
        else:
            text = tsv_table(
                ("K", "N", "r", "t", "lhs", "rhs", "gap"),
                [(x.K, x.N, x.r, x.t, x.lhs, x.rhs, x.gap) for x in rows],
            )
        return text, EXIT_OK if worst_ok else EXIT_VIOLATION
    if args.per0 is None or args.c is None:
        raise UsageError("tube bounds need --per0 and --c")
    inp = TubeBoundInput(args.per0, args.c, args.K, args.N)
    ts = [float(t) for t in args.t]
    per = [tube_perimeter_bound(inp, t, args.side) for t in ts]
    vol = [tube_volume_bound(inp, t, args.side) for t in ts]
    if args.format == "plot-data":
        return plot_data([("perimeter_bound", ts, per), ("volume_bound", ts, vol)]), EXIT_OK
    return tsv_table(("t", "perimeter_bound", "volume_bound"), zip(ts, per, vol)), EXIT_OK


def _needle_density(args) -> NeedleDensity:
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            return density_from_config(parse_config(fh.read()))
    if args.csv:
        if args.N is None:
            raise UsageError("sampled densities need --N")
        return read_density_csv(args.csv, args.N, args.K)
    if args.family is None:
        raise UsageError("give --family, --config or --csv")
    for flag in ("N", "a", "b"):
        if getattr(args, flag) is None:
            raise UsageError(f"--{flag} is required with --family")
    return NeedleDensity.closed_form(
        args.family, args.k, args.N, args.a, args.b, lam=args.lam, scale=args.scale, origin=args.origin, K=args.K
    )


def cmd_needle(args) -> tuple[str, int]:
    h = _needle_density(args)
    if args.profile:
        if args.grid is None:
            raise UsageError("--profile needs --grid")
        return profile_csv_text(needle_profile(h, args.grid, args.n, args.m)), EXIT_OK
    res = needle_isoperimetric(h, args.v, args.n, args.m)
    intervals = ";".join(f"[{a:.17g},{b:.17g}]" for a, b in res.intervals)
    return (
        key_values(
            [
                ("value", res.value),
                ("intervals", intervals),
                ("volume", res.volume),
                ("requested_volume", res.requested_volume),
                ("slack", res.slack),
                ("single_interval_value", res.single_interval_value),
                ("budget_exceeded", res.budget_exceeded),
            ]
        ),
        EXIT_OK,
    )


def cmd_combine(args) -> tuple[str, int]:
    profiles = [read_profile_csv(path) for path in args.csv]
    table = ic.minplus_table(profiles, args.max_parts)
    rows = [(v, val, s.describe()) for v, val, s in zip(table.volumes, table.values, table.splits)]
    return tsv_table(("v", "value", "split"), rows), EXIT_OK


def cmd_constants(args) -> tuple[str, int]:
    which = args.constant
    if which == "concavity":
        C = ic.choose_concavity_constant(args.K, args.N, args.theta)
        return key_values([("K", args.K), ("N", args.N), ("theta", args.theta), ("C", C)]), EXIT_OK
    if which == "diameter":
        C1 = args.C1 if args.C1 is not None else args.IvE / args.vE ** ((args.N - 1.0) / args.N)
        consts = const.SmallVolumeConstants(args.theta, args.v1, C1)
        res = const.diameter_bound(args.N, consts, args.vE, args.IvE)
        return (
            key_values(
                [
                    ("N", args.N),
                    ("theta", args.theta),
                    ("v1", args.v1),
                    ("C1", C1),
                    ("vE", args.vE),
                    ("IvE", args.IvE),
                    ("r0", res.r0),
                    ("branch", res.branch),
                    ("diameter_bound", res.bound),
                    ("small_volume_constant", res.small_volume_constant),
                    ("simplified_bound", res.simplified),
                    ("vbar", res.vbar),
                ]
            ),
            EXIT_OK,
        )
    if which == "avr":
        bound = const.avr_diameter_bound(args.N, args.A, args.vE)
        return key_values([("N", args.N), ("A", args.A), ("vE", args.vE), ("diameter_bound", bound)]), EXIT_OK
    nbar = const.decomposition_count_bound(args.V, args.eps)
    return key_values([("V", args.V), ("eps", args.eps), ("nbar", nbar)]), EXIT_OK


COMMANDS = {
    "model-profile": cmd_model_profile,
    "check": cmd_check,
    "tube": cmd_tube,
    "needle": cmd_needle,
    "combine": cmd_combine,
    "constants": cmd_constants,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        text, code = COMMANDS[args.command](args)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (UsageError, FormatError, ValueError, OSError, ArithmeticError) as exc:
        print(f"isoprofile: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    out = getattr(args, "output", None)
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
