"""Command-line entry point: ``qubolin <subcommand> [flags]``.

Exit status: 0 on success, 1 when a verification or suite check fails,
2 on usage errors (bad flags, unknown models, unreadable instances).
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import acceptance
from .bnb import solve_milp
from .catalog import (CatalogError, ModelId, WeightMode, WeightSet, build, catalog,
                      parse_name)
from .harness import default_jobs, emit_csv, emit_jsonl, run_grid, weights_for_mode
from .instances import (BalanceRule, GenerationExhausted, GeneratorConfig, InstanceParseError,
                        generate_balanced, generate_uniform, load_instance, parse_orlib,
                        save_canonical)
from .lpformat import export_lp, export_mps
from .model import count_by_tag, count_general_constraints
from .oracle import CapExceeded, Verdict, brute_force_opt, counterexample_search, verify_model
from .qubo import QuboInstance
from .simplex import solve_lp


class UsageError(Exception):
    pass


def _fmt(v) -> str:
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(v)


def _write(args, text: str):
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _instance(args) -> QuboInstance:
    if not args.instance:
        raise UsageError("--instance is required")
    try:
        return load_instance(args.instance[0] if isinstance(args.instance, list) else args.instance)
    except (OSError, InstanceParseError, KeyError, ValueError) as e:
        raise UsageError(f"--instance: {e}") from None


def _model(args) -> ModelId:
    if not args.model:
        raise UsageError("--model is required")
    name = args.model[0] if isinstance(args.model, list) else args.model
    try:
        mid = parse_name(name)
    except CatalogError as e:
        raise UsageError(f"--model: {e}") from None
    if mid.known_invalid and not args.allow_invalid:
        raise UsageError(f"--model: {mid.name} is known to be invalid; add --allow-invalid")
    return mid


def _weights(args, mid: ModelId, inst: QuboInstance) -> WeightSet:
    source = getattr(args, "weights", None) or "unit"
    if source in ("unit", "dual-exact", "dual-safe"):
        return weights_for_mode(mid, inst, WeightMode(source))
    try:
        return WeightSet.from_jsonable(json.loads(Path(source).read_text(encoding="utf-8")))
    except (OSError, ValueError) as e:
        raise UsageError(f"--weights: {e}") from None


def _built(args, lp_study: bool = False):
    inst = _instance(args)
    mid = _model(args)
    w = _weights(args, mid, inst)
    relax = lp_study or getattr(args, "relax", False)
    try:
        m = build(mid, inst, w, allow_invalid=args.allow_invalid, lp_study=relax)
    except CatalogError as e:
        raise UsageError(str(e)) from None
    return inst, mid, m


# --- subcommands ------------------------------------------------------------------------------

def cmd_generate(args) -> int:
    if args.n is None:
        raise UsageError("--n is required")
    try:
        if args.balanced:
            cfg = GeneratorConfig(n=args.n, seed=args.seed, balance=BalanceRule(args.balanced),
                                  max_attempts=args.max_attempts)
            inst, trace = generate_balanced(cfg)
            sys.stderr.write(f"accepted after {trace.attempts} attempt(s)\n")
        else:
            inst = generate_uniform(args.n, density=args.density, seed=args.seed)
    except ValueError as e:
        raise UsageError(str(e)) from None
    except GenerationExhausted as e:
        sys.stderr.write(f"{e}\n")
        return 1
    _write(args, save_canonical(inst))
    return 0


def cmd_parse(args) -> int:
    if not args.instance:
        raise UsageError("--instance is required")
    try:
        insts = parse_orlib(Path(args.instance[0]).read_text(encoding="utf-8"))
    except (OSError, InstanceParseError) as e:
        raise UsageError(f"--instance: {e}") from None
    _write(args, "".join(save_canonical(i) for i in insts))
    return 0


def cmd_build(args) -> int:
    _, mid, m = _built(args)
    if args.format in ("lp", "mps"):
        _write(args, export_lp(m) if args.format == "lp" else export_mps(m))
        return 0
    lines = [f"model {mid.name}", f"variables {len(m.variables)}",
             f"constraints {count_general_constraints(m)}"]
    lines += [f"  {tag.value} {k}" for tag, k in sorted(count_by_tag(m).items(), key=lambda t: t[0].value)]
    _write(args, "\n".join(lines) + "\n")
    return 0


def cmd_export(args) -> int:
    if args.format not in ("lp", "mps"):
        args.format = "lp"
    return cmd_build(args)


def cmd_solve_lp(args) -> int:
    _, _, m = _built(args, lp_study=True)
    res = solve_lp(m)
    if not res.optimal:
        _write(args, f"{res.status.value}\n")
        return 1
    out = [_fmt(res.objective)]
    if args.verbose:
        out += [f"{k} {_fmt(v)}" for k, v in res.primal.items()]
        out += [f"dual {k} {_fmt(v)}" for k, v in res.duals.items()]
    _write(args, "\n".join(out) + "\n")
    return 0


def cmd_solve_milp(args) -> int:
    inst, _, m = _built(args)
    start = None
    if args.start_x:
        start = tuple(int(t) for t in args.start_x.split(","))
        if len(start) != inst.n or set(start) - {0, 1}:
            raise UsageError("--start-x needs n comma-separated 0/1 values")
    res = solve_milp(m, inst, time_limit=args.time_limit, node_limit=args.node_limit,
                     stop_after_incumbents=args.stop_after, start_x=start,
                     progress=sys.stderr if args.verbose else None)
    out = [f"status {res.status.value}", f"model_objective {_fmt(res.model_objective)}",
           f"recomputed_objective {res.recomputed_objective}", f"best_bound {_fmt(res.best_bound)}",
           f"nodes {res.nodes}"]
    if res.x is not None:
        out.append("x " + " ".join(map(str, res.x)))
    _write(args, "\n".join(out) + "\n")
    return 0


def cmd_oracle(args) -> int:
    inst = _instance(args)
    try:
        r = brute_force_opt(inst)
    except CapExceeded as e:
        raise UsageError(str(e)) from None
    out = [f"optimum {r.value}"] + ["argmax " + " ".join(map(str, x)) for x in r.argmax]
    if r.truncated:
        out.append("argmax list truncated")
    _write(args, "\n".join(out) + "\n")
    return 0


def cmd_verify(args) -> int:
    mid = _model(args)
    if args.search:
        rep = counterexample_search(mid, seed=args.seed, max_instances=args.search,
                                    time_budget=args.time_limit)
    else:
        inst = _instance(args)
        if getattr(args, "weights", None) not in (None, "unit"):
            w = _weights(args, mid, inst)
            rep = verify_model(mid, [inst], w, seed=args.seed, time_limit=args.time_limit)
        else:
            rep = verify_model(mid, [inst], seed=args.seed, time_limit=args.time_limit)
    _write(args, rep.summary() + "\n")
    return 1 if rep.verdict is Verdict.INVALID_WITNESS else 0


def cmd_compare(args) -> int:
    if not args.instance:
        raise UsageError("--instance is required")
    insts = []
    for source in args.instance:
        try:
            insts.append(load_instance(source))
        except (OSError, InstanceParseError, KeyError, ValueError) as e:
            raise UsageError(f"--instance: {e}") from None
    if args.model:
        try:
            models = [parse_name(n) for n in args.model]
        except CatalogError as e:
            raise UsageError(f"--model: {e}") from None
        bad = [m.name for m in models if m.known_invalid and not args.allow_invalid]
        if bad:
            raise UsageError(f"--model: {', '.join(bad)} known invalid; add --allow-invalid")
    else:
        models = catalog(include_invalid=False)
    modes = [WeightMode(w) for w in (args.weights or "unit").split(",")
             if w in ("unit", "dual-exact", "dual-safe")]
    if not modes:
        raise UsageError("--weights for compare takes unit, dual-exact or dual-safe")
    rows = run_grid(insts, models, modes, time_limit=args.time_limit,
                    allow_invalid=args.allow_invalid, jobs=args.jobs)
    emit = emit_jsonl if args.format == "jsonl" else emit_csv
    _write(args, emit(rows, timing=args.timing))
    return 1 if any(r.milp_status == "ERROR" for r in rows) else 0


def cmd_suite(args) -> int:
    only = {int(t) for t in args.only.split(",")} if args.only else None
    lines, ok = [], True
    for r in acceptance.run_all(quick=args.quick, only=only, jobs=args.jobs):
        lines.append(r.line())
        lines += [f"    {d}" for d in r.details]
        ok &= r.passed is not False
        sys.stderr.write(r.line() + "\n")
    _write(args, "\n".join(lines) + "\n")
    return 0 if ok else 1


COMMANDS = {
    "generate": cmd_generate, "parse": cmd_parse, "build": cmd_build, "export": cmd_export,
    "solve-lp": cmd_solve_lp, "solve-milp": cmd_solve_milp, "oracle": cmd_oracle,
    "verify": cmd_verify, "compare": cmd_compare, "suite": cmd_suite,
}


def make_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--instance", action="append", help="fixture name (ex1..ex8, hm) or file path")
    shared.add_argument("--model", action="append", help="catalog model name, e.g. 'GW(a,g+d)'")
    shared.add_argument("--weights", help="unit | dual-exact | dual-safe | JSON weight file")
    shared.add_argument("--seed", type=int, default=0)
    shared.add_argument("--time-limit", type=float, default=None)
    shared.add_argument("--out", help="write output to this file instead of stdout")
    shared.add_argument("--format", choices=("lp", "mps", "csv", "jsonl"))
    shared.add_argument("--allow-invalid", action="store_true")
    shared.add_argument("--verbose", "-v", action="store_true")

    p = argparse.ArgumentParser(prog="qubolin", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    g = sub.add_parser("generate", parents=[shared], help="generate a random instance")
    g.add_argument("--n", type=int)
    g.add_argument("--density", type=float, default=1.0)
    g.add_argument("--balanced", choices=[b.value for b in BalanceRule])
    g.add_argument("--max-attempts", type=int, default=10_000)
    sub.add_parser("parse", parents=[shared], help="convert an OR-Library bqp file to canonical text")
    b = sub.add_parser("build", parents=[shared], help="build a model and summarise it")
    b.add_argument("--relax", action="store_true", help="drop integrality")
    e = sub.add_parser("export", parents=[shared], help="export a model as LP or MPS")
    e.add_argument("--relax", action="store_true", help="drop integrality")
    sub.add_parser("solve-lp", parents=[shared], help="solve the LP relaxation")
    s = sub.add_parser("solve-milp", parents=[shared], help="solve the MILP by branch and bound")
    s.add_argument("--node-limit", type=int)
    s.add_argument("--stop-after", type=int, help="stop after this many incumbents")
    s.add_argument("--start-x", help="comma-separated 0/1 start vector")
    sub.add_parser("oracle", parents=[shared], help="brute-force QUBO optimum")
    v = sub.add_parser("verify", parents=[shared], help="compare a model with brute force")
    v.add_argument("--search", type=int, help="random counterexample search over this many instances")
    c = sub.add_parser("compare", parents=[shared], help="run a comparison grid")
    c.add_argument("--jobs", type=int, default=None)
    c.add_argument("--timing", action="store_true", help="fill the wall-time column")
    t = sub.add_parser("suite", parents=[shared], help="run the acceptance battery")
    t.add_argument("--quick", action="store_true", help="random instances with n <= 6 only")
    t.add_argument("--only", help="comma-separated criterion numbers")
    t.add_argument("--jobs", type=int, default=None)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    if getattr(args, "jobs", None) is None and hasattr(args, "jobs"):
        args.jobs = default_jobs()
    try:
        return COMMANDS[args.command](args)
    except UsageError as e:
        sys.stderr.write(f"qubolin {args.command}: error: {e}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
