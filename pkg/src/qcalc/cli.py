"""Command-line front end: ``eval``, ``verify``, ``probe`` and ``list``.

Exit codes: 0 verified (or a successful evaluation), 1 usage or
configuration error, 2 violated, 3 inconclusive or a failed computation.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from typing import Dict, List, Optional, Sequence

from .errors import ConfigParseError, DomainError, EmptyGridAfterPoleFilter, ModeMismatch, QCalcError
from .identities import IDENTITIES, IdentityReport, Status, probe_identity, verify
from .qhyper import SeriesSpec, dphi, phi
from .scalar import Mode, QContext, TruncationPolicy, format_scalar, parse_scalar

EXIT_OK, EXIT_CONFIG, EXIT_VIOLATED, EXIT_INCONCLUSIVE = 0, 1, 2, 3
_EXIT = {Status.VERIFIED: EXIT_OK, Status.VIOLATED: EXIT_VIOLATED,
         Status.INCONCLUSIVE: EXIT_INCONCLUSIVE}

_QPOW_RE = re.compile(r"^\s*q\s*\^\s*\(?\s*([+-]?\d+)\s*\)?\s*$")
_RANGE_RE = re.compile(r"^\s*([+-]?\d+)\s*\.\.\s*([+-]?\d+)\s*$")
_INT_PARAMS = ("n", "k")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


# -- parsing ------------------------------------------------------------------

def parse_value(text: str, ctx: Optional[QContext] = None):
    """A scalar literal, or ``q^m`` (needs ``ctx``)."""
    m = _QPOW_RE.match(text)
    if m:
        if ctx is None:
            raise ConfigParseError(f"{text!r} needs a value of q")
        return ctx.qpow(int(m.group(1)))
    return parse_scalar(text, ctx)


def parse_list(text: str, ctx: Optional[QContext] = None) -> list:
    text = text.strip()
    if not text:
        return []
    return [parse_value(t, ctx) for t in text.split(",")]


def parse_int_values(text: str) -> List[int]:
    """``0..8`` (inclusive) or a comma list of integers."""
    out: List[int] = []
    for part in text.split(","):
        m = _RANGE_RE.match(part)
        if m:
            lo, hi = int(m.group(1)), int(m.group(2))
            if hi < lo:
                raise ConfigParseError(f"empty range {part!r}")
            out.extend(range(lo, hi + 1))
            continue
        try:
            out.append(int(part))
        except ValueError:
            raise ConfigParseError(f"expected an integer or a..b range, got {part!r}") from None
    return out


def parse_grid(text: str, ctx: Optional[QContext] = None) -> Dict[str, list]:
    """``"a=1/3,-3/2;c=1/5;q=1/2,2/5"`` into a name -> values map."""
    grid: Dict[str, list] = {}
    if not text or not text.strip():
        return grid
    for chunk in text.split(";"):
        if not chunk.strip():
            continue
        if "=" not in chunk:
            raise ConfigParseError(f"grid entry {chunk!r} needs name=values")
        name, values = (s.strip() for s in chunk.split("=", 1))
        if not name:
            raise ConfigParseError(f"grid entry {chunk!r} has no name")
        if name in _INT_PARAMS:
            vals = parse_int_values(values)
        else:
            vals = [parse_scalar(v.strip(), ctx) for v in values.split(",") if v.strip()]
        if not vals:
            raise ConfigParseError(f"grid list for {name!r} is empty")
        grid[name] = vals
    return grid


def build_context(args, q="1/2", u="1") -> QContext:
    mode = Mode(args.mode)
    if mode is Mode.FLOAT and args.prec < 64:
        raise ConfigParseError("precision must be at least 64 bits in float mode")
    policy = TruncationPolicy(max_terms=args.terms, rel_tol=args.tol, stall_window=args.stall)
    return QContext(q=q, u=u, mode=mode, prec=args.prec, truncation=policy)


# -- serialisation --------------------------------------------------------------

def _s(x) -> Optional[str]:
    if x is None:
        return None
    if isinstance(x, int) and not isinstance(x, bool):
        return str(x)
    return format_scalar(x)


def report_dict(report: IdentityReport) -> dict:
    cases = []
    for c in report.cases:
        entry = {
            "params": {k: _s(v) for k, v in c.params.items()},
            "lhs": _s(c.lhs),
            "rhs": _s(c.rhs),
            "residual": _s(c.residual),
            "tail_budget": _s(c.tail_budget),
        }
        if c.error is not None:
            entry["error"] = c.error
        cases.append(entry)
    return {
        "identity": report.identity_id,
        "mode": report.mode.value,
        "precision_bits": report.precision_bits,
        "cases": cases,
        "max_residual": _s(report.max_residual),
        "skipped_poles": report.skipped_poles,
        "status": report.status.value,
    }


def report_markdown(report: IdentityReport) -> str:
    d = report_dict(report)
    lines = [f"# {d['identity']}", "",
             "| field | value |", "|---|---|",
             f"| mode | {d['mode']} |",
             f"| precision_bits | {d['precision_bits'] if d['precision_bits'] is not None else '-'} |",
             f"| cases | {len(d['cases'])} |",
             f"| skipped_poles | {d['skipped_poles']} |",
             f"| max_residual | {d['max_residual']} |",
             f"| status | {d['status']} |", ""]
    if d["cases"]:
        lines += ["| params | lhs | rhs | residual | tail_budget |", "|---|---|---|---|---|"]
        for c in d["cases"]:
            params = ", ".join(f"{k}={v}" for k, v in c["params"].items())
            if "error" in c:
                lines.append(f"| {params} | error: {c['error']} | | | |")
            else:
                lines.append(f"| {params} | {c['lhs']} | {c['rhs']} | {c['residual']} | "
                             f"{c['tail_budget'] if c['tail_budget'] is not None else '-'} |")
    return "\n".join(lines) + "\n"


def _emit(text: str, args) -> None:
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


# -- commands -------------------------------------------------------------------

def _grid_for(args, ident, ctx) -> Dict[str, list]:
    grid = parse_grid(args.grid, ctx)
    for name in _INT_PARAMS:
        value = getattr(args, name, None)
        if value is not None:
            grid[name] = parse_int_values(value)
    unknown = [n for n in grid if n not in ident.params]
    if unknown:
        raise ConfigParseError(f"identity {ident.identity_id!r} has no parameter(s) {unknown}; "
                               f"expected {list(ident.params)}")
    merged = dict(ident.default_grid)
    merged.update(grid)
    return merged


def cmd_eval(args) -> int:
    ctx = build_context(args, q=args.q, u=args.u)
    spec = SeriesSpec(tuple(parse_list(args.upper, ctx)), tuple(parse_list(args.lower, ctx)),
                      parse_value(args.z, ctx))
    fn = phi if args.series == "phi" else dphi
    try:
        res = fn(spec, ctx)
    except QCalcError as exc:
        sys.stderr.write(f"{type(exc).__name__}: {exc}\n")
        return EXIT_INCONCLUSIVE
    out = {
        "series": args.series,
        "upper": [_s(a) for a in spec.upper],
        "lower": [_s(b) for b in spec.lower],
        "z": _s(spec.z),
        "q": _s(ctx.q),
        "u": _s(ctx.u),
        "mode": ctx.mode.value,
        "precision_bits": None if ctx.exact else ctx.prec,
        "value": _s(res.value),
        "terms_used": res.terms_used,
        "terminated": res.terminated.value,
        "tail_estimate": _s(res.tail_estimate),
        "round_error": _s(res.round_error),
    }
    if args.format == "json":
        _emit(_dump(out), args)
    else:
        rows = "\n".join(f"| {k} | {v} |" for k, v in out.items())
        _emit(f"# {args.series}\n\n| field | value |\n|---|---|\n{rows}\n", args)
    return EXIT_OK


def _identity(args):
    if args.identity not in IDENTITIES:
        raise ConfigParseError(f"unknown identity {args.identity!r}; choose from {sorted(IDENTITIES)}")
    return IDENTITIES[args.identity]


def cmd_verify(args) -> int:
    ident = _identity(args)
    ctx = build_context(args)
    grid = _grid_for(args, ident, ctx)
    try:
        report = verify(ident.identity_id, ctx, grid, perturb=args.perturb, threads=args.threads)
    except EmptyGridAfterPoleFilter:
        raise
    except QCalcError as exc:
        sys.stderr.write(f"{type(exc).__name__}: {exc}\n")
        return EXIT_INCONCLUSIVE
    text = _dump(report_dict(report)) if args.format == "json" else report_markdown(report)
    _emit(text, args)
    if args.output:
        print(f"{report.identity_id}: {report.status.value} (max_residual {_s(report.max_residual)})")
    return _EXIT[report.status]


def cmd_probe(args) -> int:
    ident = _identity(args)
    ctx = build_context(args)
    grid = _grid_for(args, ident, ctx)
    try:
        reports = probe_identity(ident.identity_id, ctx, grid, threads=args.threads)
    except EmptyGridAfterPoleFilter:
        raise
    except QCalcError as exc:
        sys.stderr.write(f"{type(exc).__name__}: {exc}\n")
        return EXIT_INCONCLUSIVE
    if args.format == "json":
        out = {"identity": ident.identity_id,
               "variants": {name: report_dict(r) for name, r in reports.items()}}
        text = _dump(out)
    else:
        head = ["# probe: " + ident.identity_id, "", "| variant | status | max_residual | cases |",
                "|---|---|---|---|"]
        head += [f"| {name} | {r.status.value} | {_s(r.max_residual)} | {len(r.cases)} |"
                 for name, r in reports.items()]
        text = "\n".join(head) + "\n\n" + "\n".join(report_markdown(r) for r in reports.values())
    _emit(text, args)
    statuses = [r.status for r in reports.values()]
    if Status.VERIFIED in statuses:
        return EXIT_OK
    if all(s is Status.VIOLATED for s in statuses):
        return EXIT_VIOLATED
    return EXIT_INCONCLUSIVE


def cmd_list(args) -> int:
    for name in sorted(IDENTITIES):
        ident = IDENTITIES[name]
        variants = f" [variants: {', '.join(ident.variants)}]" if ident.variants else ""
        print(f"{name}({', '.join(ident.params)}): {ident.summary}{variants}")
    return EXIT_OK


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--mode", choices=[m.value for m in Mode], default="float")
    p.add_argument("--prec", type=int, default=128, help="float precision in bits (>= 64)")
    p.add_argument("--terms", type=int, default=500, help="maximum series terms")
    p.add_argument("--tol", default="1e-30", help="relative stopping tolerance")
    p.add_argument("--stall", type=int, default=3, help="consecutive small terms before stopping")
    p.add_argument("--format", choices=["json", "md"], default="json")
    p.add_argument("--output", help="write the report here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qcalc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ev = sub.add_parser("eval", help="evaluate r_phi_s or the deformed r_Phi_s")
    ev.add_argument("series", choices=["phi", "dphi"])
    ev.add_argument("--upper", default="", help="comma list; q^m tokens allowed")
    ev.add_argument("--lower", default="", help="comma list; q^m tokens allowed")
    ev.add_argument("--q", required=True)
    ev.add_argument("--z", required=True)
    ev.add_argument("--u", default="1", help="deformation (dphi only)")
    _common(ev)
    ev.set_defaults(func=cmd_eval)

    for name, func, text in (("verify", cmd_verify, "run a named identity over a grid"),
                             ("probe", cmd_probe, "compare alternative forms of an identity")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--identity", required=True)
        p.add_argument("--grid", default="", help='e.g. "a=1/3,-3/2;c=1/5;q=1/2,2/5"')
        p.add_argument("--n", help="integer list or a..b range")
        p.add_argument("--k", help="integer list or a..b range")
        p.add_argument("--threads", type=int, default=1)
        _common(p)
        if name == "verify":
            p.add_argument("--perturb", action="store_true",
                           help="multiply every right-hand side by 1+q^10")
        p.set_defaults(func=func)

    ls = sub.add_parser("list", help="list the registered identities")
    ls.set_defaults(func=cmd_list)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigParseError, ModeMismatch, DomainError, EmptyGridAfterPoleFilter, ValueError) as exc:
        sys.stderr.write(f"configuration error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
