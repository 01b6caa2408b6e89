"""Command-line front end.

Exit codes: 0 success, 2 usage or parameter error, 3 data error (sign files,
malformed input), 4 resource budget exceeded.
"""
from __future__ import annotations

import argparse
import math
import sys
from fractions import Fraction

from . import report
from .dyadic import count_shapes, enumerate_shapes
from .errors import (GridTooLargeError, InstanceTooLargeError, ModeError, ParameterError,
                     SignFileError, SmallBallError)
from .grid import cell_budget, lp_norm, moment
from .riesz import certificate, derive_params, lemma_checks, lp_growth_scan, tail_profile
from .search import (SCALING_COLUMNS, exhaustive_min, local_search, scaling_study,
                     summarize_scaling)
from .signs import SignAssignment, random_signs
from .sums import build_hyperbolic_sum, build_rfunction, canonical_m


class UsageError(SmallBallError):
    pass


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def _p_list(text: str) -> list:
    out = []
    for t in text.split(","):
        t = t.strip().lower()
        if not t:
            continue
        if t in ("inf", "infinity", "oo"):
            out.append(math.inf)
        else:
            v = float(t)
            out.append(int(v) if v.is_integer() else v)
    return out


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not an exact rational: {text!r}") from None


def _float_list(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _add_signs(p: argparse.ArgumentParser, required=True):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--seed", type=int, help="generate signs with xoshiro256** from this seed")
    g.add_argument("--signs", metavar="FILE", help="load signs from a sign file")


def _add_nd(p, n_required=True):
    p.add_argument("--n", type=int, required=n_required, help="scale budget |r| = n")
    p.add_argument("--d", type=int, required=True, help="dimension")


def _add_params(p):
    p.add_argument("--a", type=_fraction, default=Fraction(1), help="small constant a (default 1)")
    p.add_argument("--kappa", type=_fraction, default=None, help="kappa in (0, 1/(2d)); default 1/(4d)")
    p.add_argument("--q", type=int, default=None, help="block count override")
    p.add_argument("--rho-tilde", type=_fraction, default=None,
                   help="exact rational replacement for rho-tilde, e.g. 1/16 (enables rational mode)")
    p.add_argument("--mode", choices=("auto", "rational", "float"), default="auto")


def _out(p, *names):
    for name in names:
        p.add_argument(f"--{name}", metavar="FILE", default=None,
                       help=f"write {name.upper()} output here instead of stdout")


def _signs(args, n=None, d=None) -> SignAssignment:
    if args.signs:
        alpha = SignAssignment.load(args.signs)
        want = (n if n is not None else args.n, d if d is not None else args.d)
        if want[0] is not None and (alpha.n, alpha.d) != want:
            raise SignFileError(f"sign file is for n={alpha.n}, d={alpha.d}, "
                                f"requested n={want[0]}, d={want[1]}")
        return alpha
    if args.n is None:
        raise UsageError("--n is required with --seed")
    return random_signs(args.seed, args.n, args.d)


def _emit(text: str, path: str | None, stdout):
    if path:
        report.write_text(path, text)
    else:
        stdout.write(text)


def _params(args, alpha):
    try:
        return derive_params(alpha.n, alpha.d, a=args.a, kappa=args.kappa,
                             q_override=args.q, rho_tilde_rational=args.rho_tilde)
    except ParameterError as exc:
        if "override" in str(exc) and args.q is None:
            raise ParameterError(f"{exc} (try --q 1 or --q 2)") from None
        raise


def _mode(args):
    return None if args.mode == "auto" else args.mode


# commands

def cmd_shapes(args, out):
    shapes = enumerate_shapes(args.n, args.d)
    if args.format == "json":
        out.write(report.to_json({"n": args.n, "d": args.d, "count": len(shapes),
                                  "shapes": [list(r) for r in shapes]}))
    else:
        for r in shapes:
            out.write(" ".join(str(k) for k in r) + "\n")
        out.write(f"# count {len(shapes)}\n")


def cmd_eval(args, out):
    alpha = _signs(args)
    f = build_rfunction(args.shape, alpha) if args.shape else build_hyperbolic_sum(alpha)
    m = canonical_m(alpha.n)
    if args.dump:
        rows = [{"cell": i, "value": int(v)} for i, v in enumerate(f.flat)]
        report.write_text(args.dump, report.to_csv(rows, ["cell", "value"]))
    for point in args.point or []:
        x = _float_list(point)
        if len(x) != alpha.d or not all(0 <= t < 1 for t in x):
            raise UsageError(f"point {point!r} must have {alpha.d} coordinates in [0, 1)")
        idx = tuple(int(t * (1 << m)) for t in x)
        out.write(f"{point} {f.cell(*idx)}\n")
    if not args.point and not args.dump:
        out.write(f"max_abs {report.fmt(f.max_abs())}\nmin {report.fmt(f.min())}\n")


def cmd_norms(args, out):
    alpha = _signs(args)
    H = build_hyperbolic_sum(alpha)
    rows = []
    for p in args.p:
        rows.append({"p": p, "norm": lp_norm(H, p),
                     "moment": moment(H, p) if p != math.inf and float(p).is_integer() else None})
    if math.inf not in args.p:
        rows.append({"p": math.inf, "norm": lp_norm(H, math.inf), "moment": None})
    text = report.to_csv(rows, ["p", "norm", "moment"])
    text += f"# l2_squared {report.fmt(moment(H, 2))} shapes {count_shapes(alpha.n, alpha.d)}\n"
    _emit(text, args.csv, out)


def cmd_certificate(args, out):
    alpha = _signs(args)
    P = _params(args, alpha)
    cert = certificate(P, alpha, _mode(args))
    _emit(cert.to_json(), args.json, out)
    if args.csv:
        report.write_text(args.csv, report.to_csv(cert.block_rows()))
    residual = max((abs(r) for r in cert.identity_residuals), default=0)
    tag = "exact" if cert.mode == "rational" else "float"
    summary = (
        f"bound {report.fmt(cert.bound)} <= linf {cert.linf_exact} "
        f"(l2 floor {report.fmt(cert.l2_floor)}, n^eta {report.fmt(cert.diagnostics['n_eta'])})\n"
        f"identity residual: {report.fmt(residual)} ({tag})\n"
    )
    (sys.stderr if not args.json else out).write(summary)


def cmd_lemma(args, out):
    alpha = _signs(args)
    P = _params(args, alpha)
    rows = lemma_checks(P, alpha, args.p, _mode(args))
    _emit(report.to_csv(rows, ["quantity", "block", "p", "value", "exact"]), args.csv, out)


def cmd_tails(args, out):
    alpha = _signs(args)
    P = _params(args, alpha)
    blocks = [args.block] if args.block else range(1, P.q + 1)
    rows = [row for t in blocks for row in tail_profile(t, P, alpha, args.x)]
    _emit(report.to_csv(rows, ["block", "x", "measure", "measure_float", "gaussian_ref"]),
          args.csv, out)


def cmd_lp_scan(args, out):
    alpha = _signs(args)
    f = build_rfunction(args.shape, alpha) if args.shape else build_hyperbolic_sum(alpha)
    res = lp_growth_scan(f, args.p)
    text = report.to_csv(res["table"], ["p", "norm"])
    text += f"# slope {report.fmt(res['slope'])} intercept {report.fmt(res['intercept'])}\n"
    _emit(text, args.csv, out)


def cmd_search(args, out):
    if args.strategy == "exhaustive":
        res = exhaustive_min(args.n, args.d, cap=args.cap)
    else:
        if args.seed is None:
            raise UsageError("--seed is required for local search")
        res = local_search(args.n, args.d, args.strategy, args.seed, args.budget, args.restarts,
                           workers=args.threads)
    _emit(res.dumps(), args.output, out)
    if args.output:
        out.write(f"best_value {res.best_value} evaluations {res.evaluations}\n")


def cmd_scaling(args, out):
    n_range = range(args.n_min, args.n_max + 1)
    rows = scaling_study(args.d, n_range, args.trials, args.seed, args.strategy, args.budget)
    _emit(report.to_csv(rows, SCALING_COLUMNS), args.csv, out)
    summary = summarize_scaling(rows)
    if args.summary:
        report.write_text(args.summary, report.to_json(summary))
    if args.svg:
        table = summary["table"]
        d = args.d
        from .riesz import theorem_exponent
        series = {
            "median random": [(t["n"], t["median_random"]) for t in table],
            "median searched": [(t["n"], t["median_searched"]) for t in table],
            "n^((d-1)/2)": [(t["n"], t["n"] ** ((d - 1) / 2)) for t in table],
            "n^(d/2)": [(t["n"], t["n"] ** (d / 2)) for t in table],
            "n^eta(d)": [(t["n"], t["n"] ** theorem_exponent(d)) for t in table],
        }
        report.write_text(args.svg, report.svg_loglog(series, title=f"sup norm of H, d={d}",
                                                      ylabel="||H||_inf"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="smallball", description=__doc__.splitlines()[0])
    parser.add_argument("--cell-budget", type=int, default=None, help="maximum grid cells")
    parser.add_argument("--threads", type=int, default=1, help="worker cap for parallel restarts")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("shapes", help="list shape vectors r with |r| = n")
    _add_nd(p)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_shapes)

    p = sub.add_parser("eval", help="evaluate H (or one r-function) at points")
    _add_nd(p, n_required=False)
    _add_signs(p)
    p.add_argument("--shape", type=_int_list, default=None, help="evaluate f_r instead of H")
    p.add_argument("--point", action="append", help="comma-separated coordinates in [0,1)")
    p.add_argument("--dump", metavar="FILE", help="write every cell value as CSV")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("norms", help="L^p norms of H; columns p,norm,moment")
    _add_nd(p, n_required=False)
    _add_signs(p)
    p.add_argument("--p", type=_p_list, default=[1, 2, 4, math.inf])
    _out(p, "csv")
    p.set_defaults(func=cmd_norms)

    p = sub.add_parser("certificate", help="Riesz-product lower bound for ||H||_inf")
    _add_nd(p, n_required=False)
    _add_signs(p)
    _add_params(p)
    _out(p, "json", "csv")
    p.set_defaults(func=cmd_certificate)

    p = sub.add_parser("lemma", help="CSV columns quantity,block,p,value,exact")
    _add_nd(p, n_required=False)
    _add_signs(p)
    _add_params(p)
    p.add_argument("--p", type=_p_list, default=[1, 2, 4, math.inf])
    _out(p, "csv")
    p.set_defaults(func=cmd_lemma)

    p = sub.add_parser("tails", help="CSV columns block,x,measure,measure_float,gaussian_ref")
    _add_nd(p, n_required=False)
    _add_signs(p)
    _add_params(p)
    p.add_argument("--block", type=int, default=None)
    p.add_argument("--x", type=_float_list, default=[0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0])
    _out(p, "csv")
    p.set_defaults(func=cmd_tails)

    p = sub.add_parser("lp-scan", help="CSV columns p,norm plus fitted slope of log norm vs log p")
    _add_nd(p, n_required=False)
    _add_signs(p)
    p.add_argument("--shape", type=_int_list, default=None)
    p.add_argument("--p", type=_p_list, default=[2, 4, 6, 8])
    _out(p, "csv")
    p.set_defaults(func=cmd_lp_scan)

    p = sub.add_parser("search", help="minimize ||H||_inf over sign assignments")
    _add_nd(p)
    p.add_argument("--strategy", choices=("exhaustive", "hillclimb", "anneal"), default="anneal")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--budget", type=int, default=1000, help="evaluations per restart")
    p.add_argument("--restarts", type=int, default=1)
    p.add_argument("--cap", type=int, default=16, help="exhaustive sign-count cap")
    _out(p, "output")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("scaling", help="CSV columns " + ",".join(SCALING_COLUMNS))
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n-min", type=int, required=True)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--strategy", choices=("anneal", "hillclimb", "exhaustive", "none"),
                   default="anneal")
    p.add_argument("--budget", type=int, default=200)
    _out(p, "csv", "svg", "summary")
    p.set_defaults(func=cmd_scaling)
    return parser


def main(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.cell_budget:
            with cell_budget(args.cell_budget):
                args.func(args, stdout)
        else:
            args.func(args, stdout)
    except (GridTooLargeError, InstanceTooLargeError) as exc:
        return _fail(exc, 4)
    except (UsageError, ParameterError, ModeError) as exc:
        return _fail(exc, 2)
    except (SmallBallError, OSError, ValueError) as exc:
        return _fail(exc, 3)
    return 0


def _fail(exc, code) -> int:
    sys.stderr.write(f"smallball: error: {exc}\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
