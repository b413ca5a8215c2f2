"""Command line front end.

    logkernel field  --d -23
    logkernel wk     --d -3 --i 1 --r 1
    logkernel scan   --dmin 2 --dmax 50 --report reflection --csv
    logkernel cubic  --conductor 91 --i 1
    logkernel lambda module.json --levels 3
    logkernel check  --samples 20 --seed 1

Exit codes: 0 when every reported structure is stabilized, 2 when some
structure is not (a legitimate outcome for surveys), 3 on invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Any, Callable, Sequence

from .codescent import (LambdaPresentation, capitulation_kernel, iwasawa_invariants,
                        level_quotient, twisted_coinvariants)
from .errors import InvalidInput, LogKernelError, PrecisionExhausted, ResourceLimit, Unsupported
from .logarith import PRECISION_CAP, AbelianGroupStructure, log_class_data, log_class_group
from .quadfield import RATIONAL, class_group, is_squarefree, make_field, squarefree_part
from .wildkernel import (cor14_triviality, corestriction_surjectivity, cubic_field, cubic_fields,
                         cubic_log_ramification, genus_rank_lower_bound, logarithmic_class_group,
                         reflection_check, wk_structure)

EXIT_OK, EXIT_FAIL, EXIT_NOT_STABILIZED, EXIT_INVALID = 0, 1, 2, 3

JSON_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "logkernel structure record",
    "type": "object",
    "required": ["d", "ell", "precision_used", "exponents", "stabilized", "certificate", "source_field"],
    "properties": {
        "d": {"type": "integer"},
        "ell": {"type": "integer", "minimum": 3},
        "precision_used": {"type": "integer", "minimum": 1},
        "exponents": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "stabilized": {"type": "boolean"},
        "certificate": {"type": "boolean"},
        "source_field": {"type": "string"},
    },
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def precision_cap() -> int:
    raw = os.environ.get("LOGKERNEL_MAX_PRECISION")
    if not raw:
        return PRECISION_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise InvalidInput(f"LOGKERNEL_MAX_PRECISION={raw!r} is not an integer") from None
    if cap < 4:
        raise InvalidInput("LOGKERNEL_MAX_PRECISION must be at least 4")
    return cap


def field_name(d: int) -> str:
    return "Q" if d == 1 else f"Q(sqrt({d}))"


def record(d: int, s: AbelianGroupStructure, source_d: int, **extra) -> dict:
    out = {"d": d, "ell": s.ell, "precision_used": s.precision_used, "exponents": list(s.exponents),
           "stabilized": s.stabilized, "certificate": s.finiteness_certificate,
           "source_field": field_name(source_d)}
    out.update(extra)
    return out


def _emit(rows: list[dict], fmt: str, out, summary: dict | None = None, columns: Sequence[str] | None = None):
    if fmt == "json":
        doc: Any = {"rows": rows}
        if summary is not None:
            doc["summary"] = summary
        out.write(json.dumps(doc, sort_keys=True, indent=1) + "\n")
        return
    if fmt == "csv":
        columns = list(columns or (rows[0].keys() if rows else JSON_SCHEMA["required"]))
        w = csv.writer(out, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(r.get(c)) for c in columns])
        if summary is not None:
            for k in sorted(summary):
                out.write(f"# {k}: {_cell(summary[k])}\n")
        return
    for r in rows:
        out.write("  ".join(f"{k}={_cell(v)}" for k, v in r.items()) + "\n")
    if summary is not None:
        for k in sorted(summary):
            out.write(f"{k}: {_cell(summary[k])}\n")


def _cell(v) -> str:
    if isinstance(v, (list, tuple)):
        return "[" + " ".join(str(x) for x in v) + "]"
    if isinstance(v, bool):
        return "true" if v else "false"
    return "" if v is None else str(v)


# ---------------------------------------------------------------------------
# commands


def cmd_field(args, out) -> int:
    d = args.d
    K = make_field(d)
    cl = class_group(K)
    k_struct = log_class_group(K, args.ell, args.precision, cap=args.cap)
    rows = [record(d, k_struct, d, role="k", class_group=list(cl.invariants))]
    if d != -3:
        ds = squarefree_part(-3 * d)
        Ks = RATIONAL if ds == 1 else make_field(ds)
        s2 = log_class_group(Ks, args.ell, args.precision, cap=args.cap)
        rows.append(record(d, s2, ds, role="k*", class_group=list(class_group(Ks).invariants)))
    _emit(rows, args.format, out)
    return EXIT_OK if all(r["stabilized"] for r in rows) else EXIT_NOT_STABILIZED


def cmd_wk(args, out) -> int:
    rep = wk_structure(args.d, args.i, args.r, args.ell, args.precision, args.cap)
    row = record(args.d, rep.quotient_structure, rep.source_d, i=args.i, r=args.r,
                 component=rep.character, full_candidate=list(rep.full_candidate.exponents),
                 full_equals_wk_only_under_finiteness_hypotheses=rep.full_needs_hypotheses,
                 twist=rep.twist)
    _emit([row], args.format, out)
    return EXIT_OK if rep.stabilized else EXIT_NOT_STABILIZED


def _scan_row(job: tuple) -> dict | None:
    kind, d, ell, m, cap, i = job
    if kind == "reflection":
        r = reflection_check(d, ell, m, cap)
        return record(d, r.structure_k, d, mirror_d=r.d_star,
                      mirror_exponents=list(r.structure_k_star.exponents),
                      rank_k=r.rank_k, rank_k_star=r.rank_k_star, delta=r.delta,
                      holds=r.inequality_holds, mirror_holds=r.mirror_inequality_holds,
                      stabilized_both=r.stabilized)
    if kind == "triviality":
        rep = wk_structure(d, i, 1, ell, m, cap)
        return record(d, rep.quotient_structure, rep.source_d, i=i,
                      trivial=rep.quotient_structure.is_trivial)
    if kind == "gross":
        s = logarithmic_class_group(d, ell, m, cap)
        return record(d, s, d)
    raise InvalidInput(f"unknown report {kind!r}")


def cmd_scan(args, out) -> int:
    if args.dmax - args.dmin > 10**6:
        raise ResourceLimit("scan range too large")
    jobs, skipped, out_of_frame = [], 0, 0
    for d in range(args.dmin, args.dmax + 1):
        if d in (0, 1):
            continue
        if not is_squarefree(d):
            skipped += 1
            continue
        if args.report == "reflection" and (d < 2 or d == 3):
            out_of_frame += 1
            continue
        jobs.append((args.report, d, args.ell, args.precision, args.cap, args.i))
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as ex:
            rows = list(ex.map(_scan_row, jobs, chunksize=8))
    else:
        rows = [_scan_row(j) for j in jobs]
    rows.sort(key=lambda r: r["d"])
    stab_key = "stabilized_both" if args.report == "reflection" else "stabilized"
    not_stab = sum(1 for r in rows if not r[stab_key])
    summary = {"rows": len(rows), "skipped_non_squarefree": skipped, "not_stabilized": not_stab}
    if args.report == "reflection":
        summary["out_of_frame"] = out_of_frame
        summary["inequality_0<=rg(k)-rg(k*)<=1_held"] = sum(r["holds"] for r in rows)
        summary["inequality_held_for_every_row"] = all(r["holds"] for r in rows)
        summary["mirror_inequality_0<=rg(k*)-rg(k)<=1_held"] = sum(r["mirror_holds"] for r in rows)
    if args.report == "gross":
        summary["finiteness_certified"] = sum(r["certificate"] for r in rows)
    if args.report == "triviality":
        summary["trivial"] = sum(r["trivial"] for r in rows)
    if args.format == "csv" and rows:
        columns = list(rows[0].keys())
    else:
        columns = None
    _emit(rows, args.format, out, summary, columns)
    return EXIT_NOT_STABILIZED if not_stab else EXIT_OK


def _parse_poly(text: str | None) -> list[int] | None:
    if text is None:
        return None
    try:
        return [int(t) for t in text.replace(" ", "").split(",")]
    except ValueError:
        raise InvalidInput(f"cannot read polynomial coefficients {text!r}") from None


def cmd_cubic(args, out) -> int:
    coeffs = _parse_poly(args.poly)
    if coeffs is not None:
        fields = [cubic_field(args.conductor, coeffs=coeffs)]
    elif args.all:
        fields = cubic_fields(args.conductor)
    else:
        fields = [cubic_field(args.conductor, args.index)]
    rows = []
    for N in fields:
        prof = cubic_log_ramification(N, args.precision or 8)
        row = {"conductor": N.conductor, "polynomial": list(N.coeffs), "ramified": list(N.ramified),
               "log_ramified": prof.sorted(), "split_in_L": sorted(prof.split_in_L), "i": args.i}
        if args.i % 2:
            dec = cor14_triviality(N, args.i, args.precision or 8)
            row.update(trivial=dec.trivial, witness=dec.witness, reason=dec.reason)
        cs = corestriction_surjectivity(N, args.i, args.precision or 8)
        row.update(corestriction_surjective=cs.surjective, corestriction_reason=cs.reason,
                   genus_bound=genus_rank_lower_bound(prof.log_ramified, args.i))
        rows.append(row)
    _emit(rows, args.format, out)
    return EXIT_OK


def cmd_lambda(args, out) -> int:
    try:
        with open(args.file, encoding="utf-8") as fh:
            X = LambdaPresentation.from_text(fh.read())
    except OSError as exc:
        raise InvalidInput(f"cannot read {args.file}: {exc}") from None
    if X.ell != args.ell and args.ell_given:
        raise InvalidInput(f"file is over ell = {X.ell}, --ell says {args.ell}")
    prec = args.precision or X.precision
    rows = []
    stable = True
    for n in range(args.levels + 1):
        s = level_quotient(X, n, prec)
        stable &= s.stabilized
        row = {"level": n, "exponents": list(s.exponents), "stabilized": s.stabilized,
               "size_exponent": s.order_exponent}
        if args.j:
            row["capitulation"] = list(capitulation_kernel(X, n, args.j, prec).exponents)
        rows.append(row)
    inv = iwasawa_invariants(X, levels=range(args.levels + 1))
    summary = {"mu": inv.mu, "lambda": inv.lam, "char_poly": list(inv.char_poly),
               "nu_table": [list(p) for p in inv.nu_table]}
    if args.kappa is not None:
        tw = {}
        for i in range(args.imin, args.imax + 1):
            t = twisted_coinvariants(X, i, args.kappa, prec)
            tw[str(i)] = {"exponents": list(t.structure.exponents), "finite": t.finite}
        summary["twisted"] = tw
    _emit(rows, args.format, out, summary)
    return EXIT_OK if stable else EXIT_NOT_STABILIZED


def cmd_check(args, out) -> int:
    """Randomized consistency checks of the logarithmic engine."""
    rng = random.Random(args.seed)
    pool = [d for d in range(-400, 401) if d not in (0, 1) and is_squarefree(d)]
    sample = sorted(rng.sample(pool, min(args.samples, len(pool))))
    rows, ok = [], True
    for d in sample:
        K = make_field(d)
        base = log_class_group(K, args.ell, args.precision, cap=args.cap)
        data = log_class_data(K, args.ell, base.precision_used)
        pf = all(v == 0 for v in data.product_formula_residues())
        scale = {p: 1 + args.ell * rng.randrange(1, 50) for p in data.places}
        resc = log_class_group(K, args.ell, base.precision_used, fixed_precision=True,
                               degree_units=scale).exponents == base.exponents
        mono = log_class_group(K, args.ell, base.precision_used + 2, fixed_precision=True).exponents == base.exponents
        row = {"d": d, "exponents": list(base.exponents), "product_formula": pf,
               "rescaling": resc, "monotone": mono}
        ok &= pf and resc and mono
        rows.append(row)
    _emit(rows, args.format, out, {"seed": args.seed, "all_passed": ok})
    return EXIT_OK if ok else EXIT_FAIL


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--ell", type=int, default=None, help="odd prime (default 3)")
    common.add_argument("--precision", type=int, default=None, help="starting ell-adic precision")
    fmt = common.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="format", action="store_const", const="json")
    fmt.add_argument("--csv", dest="format", action="store_const", const="csv")
    common.add_argument("--seed", type=int, default=0)
    common.set_defaults(format="table")

    p = _Parser(prog="logkernel", description="Logarithmic classes and wild kernels of quadratic fields.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    f = sub.add_parser("field", parents=[common], help="logarithmic class groups of k and its mirror")
    f.add_argument("--d", type=int, required=True)
    f.set_defaults(func=cmd_field)

    w = sub.add_parser("wk", parents=[common], help="exponent-3 quotient of WK_2i(Q(sqrt d))")
    w.add_argument("--d", type=int, required=True)
    w.add_argument("--i", type=int, default=0)
    w.add_argument("--r", type=int, default=1)
    w.set_defaults(func=cmd_wk)

    s = sub.add_parser("scan", parents=[common], help="survey a range of d")
    s.add_argument("--dmin", type=int, required=True)
    s.add_argument("--dmax", type=int, required=True)
    s.add_argument("--report", choices=("reflection", "triviality", "gross"), default="reflection")
    s.add_argument("--i", type=int, default=0, help="twist for the triviality report")
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_scan)

    c = sub.add_parser("cubic", parents=[common], help="cyclic cubic fields of a given conductor")
    c.add_argument("--conductor", type=int, required=True)
    c.add_argument("--poly", help="coefficients a,b,c of x^3 + a x^2 + b x + c")
    c.add_argument("--index", type=int, default=0)
    c.add_argument("--all", action="store_true")
    c.add_argument("--i", type=int, default=1)
    c.set_defaults(func=cmd_cubic)

    lam = sub.add_parser("lambda", parents=[common], help="levels, invariants and twists of a Lambda-module")
    lam.add_argument("file")
    lam.add_argument("--levels", type=int, default=2)
    lam.add_argument("--j", type=int, default=0, help="capitulation depth (0: skip)")
    lam.add_argument("--kappa", type=int, default=None, help="kappa(gamma), = 1 mod ell")
    lam.add_argument("--imin", type=int, default=-4)
    lam.add_argument("--imax", type=int, default=4)
    lam.set_defaults(func=cmd_lambda)

    k = sub.add_parser("check", parents=[common], help="randomized engine self-checks")
    k.add_argument("--samples", type=int, default=10)
    k.set_defaults(func=cmd_check)
    return p


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    args.ell_given = args.ell is not None
    args.ell = args.ell or 3
    try:
        args.cap = precision_cap()
        if args.precision is not None and args.precision < 4:
            raise InvalidInput("--precision must be at least 4")
        return args.func(args, out)
    except (InvalidInput, Unsupported, ResourceLimit) as exc:
        print(f"logkernel: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except PrecisionExhausted as exc:
        print(f"logkernel: not stabilized: {exc}", file=sys.stderr)
        return EXIT_NOT_STABILIZED


if __name__ == "__main__":
    sys.exit(main())
