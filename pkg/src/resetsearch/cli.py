"""Command-line front end.

Subcommands: eval, expect, optimize, simulate, growth, dump-config.
Exit codes: 0 ok, 2 parse error, 3 numeric failure, 4 non-finite objective.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
import warnings
from typing import Any, Sequence

from .analysis import (estimate_growth, expected_search_time, optimize_constant_rate,
                       optimize_family)
from .errors import BoxExhausted, NonFinite, ParseError, ResetSearchError
from .hitting import expected_hitting, expected_hitting_interval, expected_hitting_many
from .model import Interval, ModelSpec, parse_rate, parse_support, parse_target
from .montecarlo import SimConfig, simulate_hitting

EXIT_OK, EXIT_PARSE, EXIT_NUMERIC, EXIT_NONFINITE = 0, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ParseError(message)


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]
    except ValueError as exc:
        raise ParseError(f"expected a comma-separated list of numbers, got {text!r}") from exc


def _model_args(p: argparse.ArgumentParser, target: bool = True) -> None:
    p.add_argument("--model", help="model JSON file; flags override its fields")
    p.add_argument("--D", type=float, help="diffusion coefficient")
    p.add_argument("--rate", help="rate mini-syntax, e.g. constant:2 or quad:m=3,gamma=1")
    if target:
        p.add_argument("--target", help="target law, e.g. exp2:beta=1 or triangular:A=1")
    p.add_argument("--support", help="full, interval:A=1 or interval:L1=1,L2=2")


def _io_args(p: argparse.ArgumentParser, csv_ok: bool = False) -> None:
    p.add_argument("--format", choices=["json", "csv"] if csv_ok else ["json"], default="json")
    p.add_argument("--output", "-o", help="write to this path instead of stdout")
    p.add_argument("--dump-config", action="store_true",
                   help="print the resolved model JSON instead of running")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="resetsearch", description="Search times for diffusions with resetting.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", help="E_0 T_a for a list of targets")
    _model_args(p, target=False)
    p.add_argument("--a", required=True, type=_floats, help="targets, comma separated")
    p.add_argument("--phi", choices=["phi3", "phi1"], default="phi3")
    p.add_argument("--X", type=float, help="numeric domain half-width for tabulated rates")
    _io_args(p, csv_ok=True)

    p = sub.add_parser("expect", help="target-averaged search time")
    _model_args(p)
    p.add_argument("--X", type=float)
    _io_args(p)

    p = sub.add_parser("optimize", help="minimize the search time over a rate family")
    _model_args(p)
    p.add_argument("--family", choices=["constant", "quad"], default="constant")
    _io_args(p)

    p = sub.add_parser("simulate", help="Monte Carlo estimate of E_0 T_a")
    _model_args(p, target=False)
    p.add_argument("--a", required=True, type=float)
    p.add_argument("--n", type=int, default=200_000)
    p.add_argument("--dt", type=float, default=1e-4)
    p.add_argument("--t-max", type=float, default=1000.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-bridge", action="store_true")
    p.add_argument("--strict", action="store_true", help="fail on excess censoring")
    p.add_argument("--backend", choices=["compiled", "python"])
    _io_args(p)

    p = sub.add_parser("growth", help="fit the growth of E_0 T_a in |a|")
    _model_args(p, target=False)
    p.add_argument("--a", required=True, type=_floats)
    p.add_argument("--fit", choices=["power", "logpoly"], default="power")
    p.add_argument("--l", type=float, default=0.0, help="exponent l for logpoly (q = l+1)")
    p.add_argument("--X", type=float)
    _io_args(p)

    p = sub.add_parser("dump-config", help="print the resolved model JSON")
    _model_args(p)
    p.add_argument("--output", "-o")
    return ap


def resolve_model(args) -> ModelSpec:
    """Merge a model file with command-line overrides."""
    base: dict[str, Any] = {}
    if getattr(args, "model", None):
        try:
            with open(args.model, encoding="utf-8") as fh:
                base = ModelSpec.from_json(fh.read()).to_dict()
        except OSError as exc:
            raise ParseError(f"cannot read model file: {exc}") from exc
    D = args.D if args.D is not None else base.get("D")
    if D is None:
        raise ParseError("D is required (--D or a model file)")
    spec = ModelSpec.from_dict({**base, "D": D})
    rate = parse_rate(args.rate, D) if args.rate else spec.rate
    target = spec.target
    if getattr(args, "target", None):
        target = parse_target(args.target)
    support = parse_support(args.support) if args.support else spec.support
    return ModelSpec(float(D), rate, target, support)


def _need(value, what: str):
    if value is None:
        raise ParseError(f"{what} is required")
    return value


def _fmt(v: float) -> str:
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(float(v))


def cmd_eval(args, spec: ModelSpec) -> tuple[Any, int]:
    rate = _need(spec.rate, "--rate")
    rows = []
    if isinstance(spec.support, Interval):
        res = [expected_hitting_interval(rate, spec.D, spec.support.L1, spec.support.L2, a)
               for a in args.a]
    elif args.phi == "phi1" or args.X is not None:
        res = expected_hitting_many(rate, spec.D, args.a, phi=args.phi, X=args.X)
    else:
        res = [expected_hitting(rate, spec.D, a) for a in args.a]
    for r in res:
        rows.append({"a": r.a, "finite": r.finite,
                     "value": r.value if r.finite else math.inf,
                     # a = 0 has E = 0, log E = -inf: reported as null
                     "log_value": r.log_value if r.finite and r.a != 0 else None,
                     "method": r.method,
                     "error_estimate": r.error_estimate})
    return rows, EXIT_OK


def cmd_expect(args, spec: ModelSpec) -> tuple[Any, int]:
    obj = expected_search_time(_need(spec.rate, "--rate"), spec.D, _need(spec.target, "--target"),
                               spec.support, X=args.X)
    return obj.to_dict(), EXIT_OK if obj.finite else EXIT_NONFINITE


def cmd_optimize(args, spec: ModelSpec) -> tuple[Any, int]:
    mu = _need(spec.target, "--target")
    if args.family == "constant":
        rep = optimize_constant_rate(spec.D, mu, spec.support)
    else:
        try:
            rep = optimize_family(spec.D, mu, support=spec.support)
        except BoxExhausted as exc:
            out = exc.report.to_dict()
            out["warning"] = str(exc)
            return out, EXIT_OK
    out = rep.to_dict()
    if "x" in rep.params:
        out["x_star"] = rep.params["x"]
    out["r_star" if args.family == "constant" else "params_star"] = (
        rep.params["r"] if args.family == "constant" else rep.params)
    return out, EXIT_OK


def cmd_simulate(args, spec: ModelSpec) -> tuple[Any, int]:
    cfg = SimConfig(dt=args.dt, n_paths=args.n, t_max=args.t_max, seed=args.seed,
                    bridge_correction=not args.no_bridge, strict=args.strict,
                    backend=args.backend)
    est = simulate_hitting(_need(spec.rate, "--rate"), spec.D, args.a, spec.support, cfg)
    d = est.to_dict()
    return {k: d[k] for k in ("mean", "stderr", "censored_fraction", "n", "seed", "dt", "t_max",
                              "biased_low")}, EXIT_OK


def cmd_growth(args, spec: ModelSpec) -> tuple[Any, int]:
    fit = estimate_growth(_need(spec.rate, "--rate"), spec.D, args.a, args.fit, args.l, args.X)
    out = fit.to_dict()
    out["table"] = [{"a": a, "log_value": lv} for a, lv in fit.table]
    return out, EXIT_OK


_COMMANDS = {"eval": cmd_eval, "expect": cmd_expect, "optimize": cmd_optimize,
             "simulate": cmd_simulate, "growth": cmd_growth}


def _jsonable(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else {"finite": False}
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item"):
        return _jsonable(obj.item())
    return obj


def _render(payload, fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        cols = ["a", "value", "log_value", "method", "error_estimate"]
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for row in payload:
            lv = row["log_value"]
            w.writerow([repr(row["a"]), _fmt(row["value"]),
                        _csv_log(row, lv), row["method"],
                        _fmt(row["error_estimate"])])
        return buf.getvalue()
    if isinstance(payload, list):
        payload = [_row_json(r) for r in payload]
    # json.dumps writes floats with repr: shortest round-trip, up to 17 digits
    return json.dumps(_jsonable(payload), indent=2) + "\n"


def _csv_log(row: dict, lv) -> str:
    if lv is not None:
        return _fmt(lv)
    return "inf" if not row["finite"] else "-inf"


def _row_json(row: dict) -> dict:
    if row.get("finite", True):
        return row
    return {"a": row["a"], "finite": False, "method": row["method"]}


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


_NEG_LIST = re.compile(r"^-(\d|\.\d)")


def _join_negative_values(argv: Sequence[str]) -> list[str]:
    """Let ``--a -2,3`` through: argparse takes "-2,3" for an option."""
    out: list[str] = []
    it = iter(argv)
    for tok in it:
        if tok == "--a":
            nxt = next(it, None)
            if nxt is not None and _NEG_LIST.match(nxt):
                out.append(f"--a={nxt}")
                continue
            out.append(tok)
            if nxt is not None:
                out.append(nxt)
            continue
        out.append(tok)
    return out


def main(argv: Sequence[str] | None = None) -> int:
    argv = _join_negative_values(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
        spec = resolve_model(args)
        if args.command == "dump-config" or getattr(args, "dump_config", False):
            _emit(spec.to_json() + "\n", args.output)
            return EXIT_OK
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            payload, code = _COMMANDS[args.command](args, spec)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        _emit(_render(payload, getattr(args, "format", "json")), args.output)
        return code
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except NonFinite as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONFINITE
    except (ResetSearchError, ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
