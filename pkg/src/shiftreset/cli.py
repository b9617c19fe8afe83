"""Command-line entry point: ``shiftreset <command> ...``.

Exit codes: 0 success or positive verdict, 1 negative verdict, 2 usage or
input error, 3 unknown or timeout.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from . import axioms, bisim, cps, lts, reduction, testgen
from .syntax import OpenTermError, ParseError, pretty, term

OK, NEGATIVE, USAGE, UNKNOWN = 0, 1, 2, 3

GRAMMAR = r"""term grammar:
  t ::= x | \x. t | t t | S k. t | <t> | (t)
  \ may be written λ, <t> may be written ⟨t⟩, `shift k. t` is S k. t
  application is left-associative; a binder extends as far right as possible
  abbreviations: i = \x.x   w = \x.x x   omega = w w
  contexts (pool files) use @ for the hole, e.g. "i @" or "@ (w w)"
  comments start with -- and run to the end of the line"""

DEFAULT_FUEL = {"reduce": 1000, "eval": 1000, "lts": 1000, "bisim": 500, "cps-equiv": 5000, "fuzz": 200}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n\n{GRAMMAR}\n")
        sys.exit(USAGE)


def _common() -> argparse.ArgumentParser:
    # SUPPRESS keeps a subcommand's defaults from hiding flags given before it.
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--json", action="store_true", default=argparse.SUPPRESS, help="machine-readable output")
    p.add_argument("--fuel", type=int, default=argparse.SUPPRESS, help="step budget")
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = _Parser(
        prog="shiftreset",
        description="Reduction, transitions, bisimulation, CPS and equational proofs for shift/reset.",
        epilog=GRAMMAR,
        formatter_class=argparse.RawDescriptionHelpFormatter,
        parents=[common],
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name: str, help: str, *terms: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help, parents=[common], epilog=GRAMMAR,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        for t in terms:
            p.add_argument(t)
        return p

    command("parse", "parse and pretty-print a term", "term")
    command("reduce", "reduce a closed term", "term").add_argument(
        "--trace", action="store_true", help="print every step with its rule"
    )
    command("eval", "evaluate a closed term to a value, a stuck term or a timeout", "term")
    command("lts", "list the transitions a closed term can take", "term").add_argument(
        "--derive", action="store_true", help="print the inference tree of the internal step"
    )
    p = command("bisim", "play the bounded bisimulation game", "t0", "t1")
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--pool", help="JSON file with probe values and contexts")
    command("cps", "print the CPS translation", "term")
    command("cps-equiv", "compare CPS normal forms", "t0", "t1")
    command("prove", "search for an equational derivation", "t0", "t1").add_argument(
        "--budget", type=int, default=10_000, help="expanded-node limit"
    )
    p = command("fuzz", "differential tests on generated terms")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--check", choices=["lts", "stuck", "cps-sound", "all"], default="all")
    p.add_argument("--max-size", type=int, default=testgen.GenConfig().max_size)
    return parser


# Commands -------------------------------------------------------------------


class _Out:
    def __init__(self, as_json: bool):
        self.as_json = as_json

    def emit(self, data: dict, text: str) -> None:
        print(json.dumps(data, ensure_ascii=False) if self.as_json else text)


def _observable_json(obs: reduction.Observable) -> dict:
    return {"result": obs.kind, "term": pretty(obs.term), "steps": obs.steps}


def _observable_code(obs: reduction.Observable) -> int:
    return UNKNOWN if obs.kind == "timeout" else OK


def _parse_cmd(args, out: _Out) -> int:
    t = term(args.term)
    out.emit({"term": pretty(t), "closed": t.closed, "free": sorted(t.free_vars)}, pretty(t))
    return OK


def _reduce_cmd(args, out: _Out) -> int:
    t = term(args.term)
    steps = reduction.trace(t, args.fuel)
    obs = reduction.final_observable(t, steps)
    if out.as_json:
        data = {"trace": [{"term": pretty(u), "rule": r} for u, r in steps], **_observable_json(obs)}
        out.emit(data if args.trace else _observable_json(obs), "")
    else:
        if args.trace:
            print(f"   {pretty(t)}")
            for u, rule in steps:
                print(f"-> {pretty(u)}   [{rule}]")
        print(f"{obs.kind} after {obs.steps} steps: {pretty(obs.term)}")
    return _observable_code(obs)


def _eval_cmd(args, out: _Out) -> int:
    obs = reduction.evaluate(term(args.term), args.fuel)
    out.emit(_observable_json(obs), f"{obs.kind}: {pretty(obs.term)}")
    return _observable_code(obs)


_ACCEPTS = {"none": "no probes", "value": "value probes", "context": "context probes"}


def _lts_cmd(args, out: _Out) -> int:
    t = term(args.term)
    info = lts.available(t)
    tau = info["tau"]
    d = lts.derive(t) if args.derive else None
    data = {"term": pretty(t), "tau": None if tau is None else pretty(tau), "accepts": info["accepts"]}
    if d is not None:
        data["derivation"] = d.rules()
    lines = [f"tau: {'-' if tau is None else pretty(tau)}", f"accepts: {_ACCEPTS[info['accepts']]}"]
    if d is not None:
        lines.append(d.render())
    out.emit(data, "\n".join(lines))
    return OK


def _bisim_cmd(args, out: _Out) -> int:
    t0, t1 = term(args.t0), term(args.t1)
    if args.pool:
        with open(args.pool, encoding="utf-8") as f:
            pool = bisim.load_pool(f.read(), args.depth, args.fuel)
    else:
        pool = bisim.default_pool()
    pool = pool.with_bounds(args.depth, args.fuel)
    v = bisim.check(t0, t1, pool)
    if isinstance(v, bisim.Distinguished):
        out.emit(
            {"verdict": v.kind, "reason": v.reason, "trace": [str(l) for l in v.trace]},
            f"distinguished ({v.reason})\ntrace: {bisim.format_trace(v.trace)}",
        )
        return NEGATIVE
    out.emit(
        {"verdict": v.kind, "depth": v.depth, "pool": v.pool},
        f"bisimilar up to depth {v.depth} (pool {v.pool})",
    )
    return OK


def _cps_cmd(args, out: _Out) -> int:
    t = term(args.term)
    c = cps.cps_translate(t)
    out.emit({"term": pretty(t), "cps": pretty(c)}, pretty(c))
    return OK


def _cps_equiv_cmd(args, out: _Out) -> int:
    v = cps.cps_equiv(term(args.t0), term(args.t1), args.fuel)
    if isinstance(v, cps.Equivalent):
        out.emit({"verdict": v.kind, "normal_forms": [pretty(v.normal_form)] * 2}, f"Equivalent\n{pretty(v.normal_form)}")
        return OK
    if isinstance(v, cps.NotEquivalent):
        nfs = [pretty(n) for n in v.normal_forms]
        out.emit({"verdict": v.kind, "normal_forms": nfs}, "NotEquivalent\n" + "\n".join(nfs))
        return NEGATIVE
    sides = ", ".join(("left", "right")[i] for i in v.timed_out)
    out.emit({"verdict": v.kind, "timed_out": list(v.timed_out)}, f"Unknown (fuel exhausted: {sides})")
    return UNKNOWN


def _prove_cmd(args, out: _Out) -> int:
    stats = axioms.SearchStats()
    proof = axioms.prove_equal(term(args.t0), term(args.t1), args.budget, stats=stats)
    if proof is None:
        out.emit({"verdict": "unknown", "expanded": stats.expanded}, "unknown")
        return UNKNOWN
    steps = [
        {"path": list(m.path), "axiom": m.axiom.value, "direction": m.direction.value, "result": pretty(m.result)}
        for m in proof.steps
    ]
    out.emit({"verdict": "proved", "steps": steps, "expanded": stats.expanded}, "\n".join(proof.lines()) or "(identical)")
    return OK


def _fuzz_cmd(args, out: _Out) -> int:
    cfg = testgen.GenConfig(max_size=args.max_size, seed=args.seed)
    names = list(testgen.CHECKS) if args.check == "all" else [args.check]
    report = {"checked": 0, "failures": [], "rule_coverage": {}}
    for name in names:
        kw = {"fuel": args.fuel} if name != "cps-sound" else {}
        r = testgen.CHECKS[name](args.n, cfg, **kw)
        report["checked"] = r["checked"]
        report["failures"] += [{"check": name, **f} for f in r["failures"]]
        report["rule_coverage"].update(r["rule_coverage"])
    if out.as_json:
        out.emit(report, "")
    else:
        print(f"checked {report['checked']} terms ({', '.join(names)}), {len(report['failures'])} failures")
        for k, v in report["rule_coverage"].items():
            print(f"  {k:14} {v}")
        for f in report["failures"]:
            print(json.dumps(f, ensure_ascii=False))
    return NEGATIVE if report["failures"] else OK


COMMANDS = {
    "parse": _parse_cmd,
    "reduce": _reduce_cmd,
    "eval": _eval_cmd,
    "lts": _lts_cmd,
    "bisim": _bisim_cmd,
    "cps": _cps_cmd,
    "cps-equiv": _cps_equiv_cmd,
    "prove": _prove_cmd,
    "fuzz": _fuzz_cmd,
}


def run(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    args.json = getattr(args, "json", False)
    args.fuel = getattr(args, "fuel", DEFAULT_FUEL.get(args.command, 1000))
    args.seed = getattr(args, "seed", 0)
    if args.fuel < 0:
        return _input_error("fuel must be non-negative")
    try:
        return COMMANDS[args.command](args, _Out(args.json))
    except (ParseError, OpenTermError, axioms.SideConditionError) as e:
        return _input_error(str(e))
    except (ValueError, OSError) as e:
        return _input_error(str(e))
    except RecursionError:
        print("error: term too deeply nested", file=sys.stderr)
        return UNKNOWN


def _input_error(message: str) -> int:
    print(f"error: {message}\n\n{GRAMMAR}", file=sys.stderr)
    return USAGE


def main() -> None:
    sys.exit(run())
