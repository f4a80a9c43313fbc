"""Command-line front end. Every subcommand prints JSON (or CSV) to stdout.

Exit status: 0 success, 1 usage error, 2 domain error, 3 budget exhausted.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from typing import Optional, Sequence

from . import algebraic, approx, density, expansion, experiment
from ._mp import to_decimal
from .errors import BetaError, BudgetExceeded, BudgetExhaustedNoMilestone

EXIT_USAGE = 1
EXIT_DOMAIN = 2
EXIT_BUDGET = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _common(p: argparse.ArgumentParser, beta: bool = True):
    if beta:
        src = p.add_mutually_exclusive_group()
        src.add_argument("--beta", help="decimal beta in (1, 2)")
        src.add_argument("--beta-poly", help='polynomial whose root in (1, 2) is beta, e.g. "x^2-2"')
    p.add_argument("--precision", type=int, default=expansion.DEFAULT_PRECISION, metavar="BITS")
    p.add_argument("--budget", type=int, default=expansion.DEFAULT_BUDGET, metavar="N")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", choices=("json", "csv"), default="json")


def _psi_args(p: argparse.ArgumentParser, required: bool = True):
    p.add_argument("--psi", required=required,
                   help="geometric:R | scaled_geometric:A:R | corollary | constant:A")
    p.add_argument("--transform", action="append", default=[], metavar="KIND:VALUE",
                   help="cap:K2, cap:auto or scale:K; applied in the order given")
    p.add_argument("--cap-k2", metavar="K2|auto", help="shorthand for a final --transform cap:K2")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="betaapprox", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("certify", help="certify a Garsia number")
    p.add_argument("polynomial")
    _common(p, beta=False)

    p = sub.add_parser("roots", help="all roots with error radii")
    p.add_argument("polynomial")
    _common(p, beta=False)

    p = sub.add_parser("expand", help="greedy/lazy prefixes or the Psi-good construction")
    p.add_argument("mode", choices=("greedy", "lazy", "construct"))
    p.add_argument("--x", required=True)
    p.add_argument("--n", type=int, required=True, help="number of digits (depth budget)")
    p.add_argument("--milestones", type=int, default=3)
    p.add_argument("--strategy", choices=(approx.BACKTRACK, approx.FIRST), default=approx.BACKTRACK)
    _psi_args(p, required=False)
    _common(p)

    p = sub.add_parser("prefixes", help="list or count n-prefixes")
    p.add_argument("action", choices=("list", "count"))
    p.add_argument("--x", required=True)
    p.add_argument("--n", type=int, required=True)
    _common(p)

    p = sub.add_parser("mingap", help="best level-n approximation from below")
    p.add_argument("--x", required=True)
    p.add_argument("--n", type=int, required=True)
    _common(p)

    p = sub.add_parser("hits", help="levels where x is Psi-approximable")
    p.add_argument("--x", required=True)
    p.add_argument("--n-lo", type=int, required=True)
    p.add_argument("--n-hi", type=int, required=True)
    p.add_argument("--mode", choices=("one-sided", "two-sided"), default="one-sided")
    p.add_argument("--engine", choices=("fast", "exact"), default="fast")
    _psi_args(p)
    _common(p)

    p = sub.add_parser("coverage", help="Monte Carlo hit fraction over a level window")
    p.add_argument("--n-lo", type=int, required=True)
    p.add_argument("--n-hi", type=int, required=True)
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--mode", choices=("one-sided", "two-sided"), default="one-sided")
    p.add_argument("--plot-data", action="store_true", help="emit (n, per-level hit rate) CSV")
    _psi_args(p)
    _common(p)

    p = sub.add_parser("density", help="Bernoulli convolution density estimates")
    p.add_argument("method", choices=("prefix", "mc", "compare"))
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--grid", type=int, default=201)
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--bins", type=int, default=100)
    p.add_argument("--series-depth", type=int)
    _common(p)

    p = sub.add_parser("unique", help="finite-depth uniqueness of the expansion")
    p.add_argument("--x", required=True)
    p.add_argument("--n", type=int, required=True)
    _common(p)

    p = sub.add_parser("psi", help="evaluate Psi, its decay constants or partial sums")
    p.add_argument("action", choices=("eval", "decay", "sum"))
    p.add_argument("--n", type=int, help="level (eval) or number of terms (sum)")
    p.add_argument("--m", type=int, help="shift for decay constants")
    p.add_argument("--n-max", type=int, default=64)
    _psi_args(p)
    _common(p)
    return parser


def _context(args) -> expansion.BetaContext:
    if args.beta_poly:
        cert = algebraic.certify_garsia(args.beta_poly, args.precision)
        if isinstance(cert, algebraic.GarsiaCertificate):
            return expansion.BetaContext.from_certificate(cert)
        print(f"warning: no Garsia certificate applies ({cert.code}: {cert.detail})", file=sys.stderr)
        return expansion.BetaContext.from_polynomial(args.beta_poly, args.precision)
    if args.beta:
        return expansion.BetaContext.from_value(args.beta, args.precision)
    raise UsageError("one of --beta or --beta-poly is required")


def _transforms(args) -> list[str]:
    extra = [f"{approx.CAP}:{args.cap_k2}"] if args.cap_k2 else []
    return list(args.transform) + extra


def parse_psi(text: str, transforms: Sequence[str], ctx: Optional[expansion.BetaContext]) -> approx.PsiSpec:
    parts = text.split(":")
    fam = parts[0].upper()
    try:
        if fam == approx.GEOMETRIC and len(parts) == 2:
            psi = approx.PsiSpec.geometric(parts[1])
        elif fam == approx.SCALED_GEOMETRIC and len(parts) == 3:
            psi = approx.PsiSpec.scaled_geometric(parts[1], parts[2])
        elif fam == approx.COROLLARY and len(parts) == 1:
            psi = approx.PsiSpec.corollary()
        elif fam == approx.CONSTANT and len(parts) == 2:
            psi = approx.PsiSpec.constant(parts[1])
        else:
            raise UsageError(f"bad --psi value {text!r}")
        for t in transforms:
            kind, _, value = t.partition(":")
            if kind == approx.CAP:
                if value == "auto":
                    if ctx is None or ctx.certificate is None:
                        raise UsageError("cap:auto needs a certified --beta-poly source")
                    psi = psi.cap(ctx.certificate.k2)
                else:
                    psi = psi.cap(value)
            elif kind == approx.SCALE:
                psi = psi.scale(int(value))
            else:
                raise UsageError(f"bad --transform value {t!r}")
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return psi


def _csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _emit(out, payload, fmt: str, csv_text: Optional[str] = None):
    if fmt == "csv" and csv_text is not None:
        out.write(csv_text)
    else:
        out.write(json.dumps(payload, indent=2) + "\n")


def _run(args, out) -> int:
    cmd = args.command
    bits = args.precision
    if cmd == "certify":
        result = algebraic.certify_garsia(args.polynomial, bits)
        _emit(out, result.to_json(), "json")
        return 0 if isinstance(result, algebraic.GarsiaCertificate) else EXIT_DOMAIN
    if cmd == "roots":
        roots = algebraic.all_roots(algebraic.parse_polynomial(args.polynomial), bits)
        payload = {"polynomial": args.polynomial, "precision_bits": bits, "roots": roots.to_json()}
        rows = [(r["re"], r["im"], r["radius"]) for r in payload["roots"]]
        _emit(out, payload, args.output, _csv(("re", "im", "radius"), rows))
        return 0

    # psi needs beta only for cap:auto
    ctx = _context(args) if cmd != "psi" or args.beta or args.beta_poly else None
    if ctx is not None and ctx.precision_bits < 64:
        raise UsageError("precision must be at least 64 bits")

    if cmd == "expand":
        if args.mode == "construct":
            if not args.psi:
                raise UsageError("expand construct needs --psi")
            psi = parse_psi(args.psi, _transforms(args), ctx)
            result = approx.construct_expansion(args.x, psi, args.n, args.milestones, ctx,
                                                args.budget, args.strategy)
            payload = {"x": args.x, "psi": psi.to_json(), **result.to_json(bits)}
            rows = [(m["depth"], m["gap"]) for m in payload["milestones"]]
            _emit(out, payload, args.output, _csv(("depth", "gap"), rows))
        else:
            d = expansion.extremal_expansion(args.x, args.n, args.mode.upper(), ctx)
            check = expansion.is_prefix(args.x, d, ctx)
            payload = {"x": args.x, "mode": args.mode.upper(), "digits": expansion.digits_str(d),
                       "gap": to_decimal(check.gap, bits)}
            _emit(out, payload, args.output, _csv(("digits", "gap"), [(payload["digits"], payload["gap"])]))
        return 0
    if cmd == "prefixes":
        if args.action == "count":
            count = expansion.count_prefixes(args.x, args.n, ctx, args.budget)
            _emit(out, {"x": args.x, "n": args.n, "count": count}, args.output, _csv(("count",), [(count,)]))
        else:
            ps = expansion.enumerate_prefixes(args.x, args.n, ctx, args.budget)
            payload = ps.to_json()
            rows = [(e["digits"], e["gap"]) for e in payload["entries"]]
            _emit(out, payload, args.output, _csv(("digits", "gap"), rows))
        return 0
    if cmd == "mingap":
        mg = expansion.min_gap(args.x, args.n, ctx, args.budget)
        payload = {"x": args.x, "n": args.n, "gap": to_decimal(mg.gap, bits),
                   "digits": expansion.digits_str(mg.digits)}
        _emit(out, payload, args.output, _csv(("gap", "digits"), [(payload["gap"], payload["digits"])]))
        return 0
    if cmd == "hits":
        psi = parse_psi(args.psi, _transforms(args), ctx)
        mode = approx.TWO_SIDED if args.mode == "two-sided" else approx.ONE_SIDED
        records = approx.level_report(args.x, psi, (args.n_lo, args.n_hi), mode, ctx,
                                      args.engine, args.budget)
        hits = [approx.HitRecord(r.n, r.gap, r.digits, r.psi_n, mode == approx.TWO_SIDED, r.side)
                for r in records if r.hit]
        _emit(out, [h.to_json(bits) for h in hits], args.output, approx.levels_to_csv(records))
        return 0
    if cmd == "coverage":
        psi = parse_psi(args.psi, _transforms(args), ctx)
        mode = approx.TWO_SIDED if args.mode == "two-sided" else approx.ONE_SIDED
        report = experiment.coverage_experiment(ctx, psi, (args.n_lo, args.n_hi), args.samples,
                                                args.seed, mode, args.budget)
        if args.plot_data:
            out.write(report.to_csv())
        else:
            rows = experiment.contrast_summary([report])
            _emit(out, report.to_json(), args.output, experiment.summary_to_csv(rows))
        return 0
    if cmd == "density":
        if args.method == "prefix":
            est = density.estimate_density_prefix(ctx, args.n, args.grid, args.budget)
        elif args.method == "mc":
            est = density.estimate_density_mc(ctx, args.samples, args.bins, args.seed, args.series_depth)
        else:
            a = density.estimate_density_prefix(ctx, args.n, args.grid, args.budget)
            b = density.estimate_density_mc(ctx, args.samples, args.bins, args.seed, args.series_depth)
            cmp = density.compare_densities(a, b)
            payload = {"prefix": a.params, "mc": b.params, **cmp.to_json()}
            _emit(out, payload, args.output, _csv(("l1", "sup"), [(cmp.l1, cmp.sup)]))
            return 0
        _emit(out, est.to_json(), args.output, est.to_csv())
        return 0
    if cmd == "unique":
        verdict = expansion.unique_to_depth(args.x, args.n, ctx)
        payload = {"x": args.x, "n": args.n, **verdict.to_json()}
        _emit(out, payload, args.output, _csv(("status", "branch_depth"), [(verdict.status, verdict.branch_depth)]))
        return 0
    if cmd == "psi":
        psi = parse_psi(args.psi, _transforms(args), ctx)
        if args.action == "eval":
            if args.n is None:
                raise UsageError("psi eval needs --n")
            value = approx.psi_eval(psi, args.n, bits)
            payload = {"psi": psi.to_json(), "n": args.n, "value": to_decimal(value, bits)}
        elif args.action == "decay":
            if args.m is None:
                raise UsageError("psi decay needs --m")
            payload = {"psi": psi.to_json(), "m": args.m, "n_max": args.n_max,
                       "C_m": approx.decay_constant(psi, args.m, args.n_max)}
        else:
            if args.n is None:
                raise UsageError("psi sum needs --n")
            ps = approx.divergence_partial_sum(psi, args.n)
            payload = {"psi": psi.to_json(), "N": args.n, **ps.to_json()}
        _emit(out, payload, "json")
        return 0
    raise UsageError(f"unknown command {cmd!r}")


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _run(args, out)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BudgetExceeded, BudgetExhaustedNoMilestone) as exc:
        print(f"error: {exc.code}: {exc.detail}", file=sys.stderr)
        return EXIT_BUDGET
    except BetaError as exc:
        print(f"error: {exc.code}: {exc.detail}", file=sys.stderr)
        return EXIT_DOMAIN
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    raise SystemExit(main())
