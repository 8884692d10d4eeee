"""Command-line front end: satisfiability, model checking, reductions,
family generators, base translations, minimal-model measurement and
quasi-model tooling.

Exit codes: 0 for definitive answers, 2 for unknown/budget, 1 for usage or
input errors.  All output is deterministic for fixed inputs and options.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .clones import CloneError, ag_translate, base_translate, s1_transform
from .engines import (
    EngineError, SatBudget, SatResult, dispatch, sat_ax_bounded, sat_balloon,
    sat_bruteforce, sat_flat, sat_general,
)
from .formula import Base, Formula, FormulaError, STD
from .kripke import (
    KripkeError, load_structure, model_check, parse_structure, quasi_check,
    quasi_from_model, render_structure, to_dot, validate_structure,
)
from .measure import min_model_extent, min_model_size
from .parser import load_base, parse_formula, render_formula
from .reductions import (
    ATM_VARIANT_BASE, FAMILY_BASES, ReductionError, encode_atm,
    generate_family, parse_atm, parse_qbf, reduce_qbf_af, reduce_qbf_ag,
)

ENGINES = {
    "general": sat_general,
    "flat": sat_flat,
    "ax": sat_ax_bounded,
    "balloon": sat_balloon,
}


def _budget_from_env() -> SatBudget:
    budget = SatBudget()
    nodes = os.environ.get("CTLF_BUDGET_NODES")
    if nodes:
        budget.node_cap = int(nodes)
    millis = os.environ.get("CTLF_BUDGET_MILLIS")
    if millis:
        budget.millis_cap = int(millis)
    return budget


def _load_base_opt(path: str | None) -> Base:
    return load_base(path) if path else STD


def _emit(args, payload: dict, text: str):
    if args.format == "json":
        print(json.dumps(payload, sort_keys=True))
    else:
        print(text)


def _finish_sat(args, result: SatResult) -> int:
    payload = {"status": result.status, "engine": result.engine,
               "nodes": result.nodes, "millis": result.millis}
    if result.reason:
        payload["reason"] = result.reason
    if result.witness is not None and args.witness:
        with open(args.witness, "w", encoding="utf-8") as fh:
            fh.write(render_structure(result.witness))
        payload["witness"] = args.witness
    _emit(args, payload, result.status)
    return 2 if result.status == "unknown" else 0


def cmd_sat(args) -> int:
    base = _load_base_opt(args.base)
    f = parse_formula(args.formula, base)
    budget = _budget_from_env()
    if args.engine == "brute":
        result = sat_bruteforce(f, args.max_worlds, base, budget)
    elif args.engine == "auto":
        result = dispatch(f, base, budget)
    else:
        result = ENGINES[args.engine](f, base, budget)
    return _finish_sat(args, result)


def cmd_mc(args) -> int:
    model = load_structure(args.structure)
    base = _load_base_opt(args.base)
    f = parse_formula(args.formula, base)
    diag = validate_structure(model)
    if not diag.ok:
        print("invalid structure: " + diag.describe(model.structure.names),
              file=sys.stderr)
        return 1
    verdict = model_check(model, f, base)
    _emit(args, {"result": verdict}, "true" if verdict else "false")
    return 0


def cmd_reduce(args) -> int:
    if args.kind in ("qbf-af", "qbf-ag"):
        q = parse_qbf(args.input)
        out = reduce_qbf_af(q) if args.kind == "qbf-af" else reduce_qbf_ag(q)
    else:
        spec = parse_atm(_read(args.input))
        out = encode_atm(spec, args.word, args.variant)
    _emit(args, {"formula": render_formula(out)}, render_formula(out))
    return 0


def cmd_gen(args) -> int:
    f = generate_family(args.family, m=args.m, k=args.k, n=args.n)
    _emit(args, {"formula": render_formula(f)}, render_formula(f))
    return 0


def cmd_translate(args) -> int:
    if args.kind == "ag":
        f = parse_formula(args.formula, _load_base_opt(args.base))
        out = ag_translate(f, base=_load_base_opt(args.base))
    else:
        if not args.target:
            print("translate base|s1 requires --target BASEFILE", file=sys.stderr)
            return 1
        target = load_base(args.target)
        f = parse_formula(args.formula, STD)
        out = base_translate(f, target) if args.kind == "base" \
            else s1_transform(f, target)
    _emit(args, {"formula": render_formula(out)}, render_formula(out))
    return 0


def cmd_measure(args) -> int:
    base = _load_base_opt(args.base)
    f = parse_formula(args.formula, base)
    fn = min_model_size if args.metric == "size" else min_model_extent
    result = fn(f, args.cap, base)
    if result.minimum is None:
        _emit(args, {"minimum": None, "bound": result.bound},
              f"none-up-to-{result.bound}")
        return 2
    payload = {"minimum": result.minimum, "bound": result.bound,
               "structures": result.structures_checked}
    if args.witness and result.witness is not None:
        with open(args.witness, "w", encoding="utf-8") as fh:
            fh.write(render_structure(result.witness))
        payload["witness"] = args.witness
    _emit(args, payload, str(result.minimum))
    return 0


def cmd_quasi(args) -> int:
    model = load_structure(args.structure)
    base = _load_base_opt(args.base)
    f = parse_formula(args.formula, base)
    if args.action == "from-model":
        q = quasi_from_model(model, f, base)
        lines = []
        for g in sorted(q.labeling, key=render_formula):
            worlds = [q.names[w] for w in range(q.n) if q.labeling[g] >> w & 1]
            lines.append(f"{render_formula(g)}: {' '.join(worlds) or '-'}")
        text = "\n".join(lines)
        _emit(args, {"labeling": lines}, text)
        return 0
    q = quasi_from_model(model, f, base)
    problems = quasi_check(q, f, with_q7=args.q7, base=base)
    _emit(args, {"problems": problems}, "ok" if not problems else "\n".join(problems))
    return 0 if not problems else 2


def cmd_dot(args) -> int:
    model = load_structure(args.structure)
    print(to_dot(model), end="")
    return 0


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ctlf",
        description="CTL fragment toolkit: satisfiability, model checking, "
                    "reductions and minimal-model measurement.")
    parser.add_argument("--format", choices=["text", "json"], default="text")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sat", help="decide satisfiability")
    p.add_argument("formula")
    p.add_argument("--engine", choices=["auto", "general", "flat", "ax",
                                        "balloon", "brute"], default="auto")
    p.add_argument("--max-worlds", type=int, default=4)
    p.add_argument("--witness", help="write a witness structure file")
    p.add_argument("--base", help="base file (default: and/or/not)")
    p.set_defaults(func=cmd_sat)

    p = sub.add_parser("mc", help="model-check a structure file")
    p.add_argument("structure")
    p.add_argument("formula")
    p.add_argument("--base")
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("reduce", help="QBF and ATM reductions")
    p.add_argument("kind", choices=["qbf-af", "qbf-ag", "atm"])
    p.add_argument("input", help="QBF text, or an ATM spec file for atm")
    p.add_argument("--word", default="", help="input word for atm")
    p.add_argument("--variant", choices=["ag_ax", "ag_af", "au", "ar"],
                   default="ag_ax")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("gen", help="lower-bound formula families")
    p.add_argument("family", choices=["ax", "counter_agax", "counter_ar",
                                      "flat_axag", "flat_agaf", "flat_au",
                                      "flat_ar", "flat_af", "existential"])
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--n", type=int, default=1)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("translate", help="base and operator-set translations")
    p.add_argument("kind", choices=["base", "s1", "ag"])
    p.add_argument("formula")
    p.add_argument("--target", help="target base file for base/s1")
    p.add_argument("--base", help="source base file for ag")
    p.set_defaults(func=cmd_translate)

    p = sub.add_parser("measure", help="minimal model size or extent")
    p.add_argument("metric", choices=["size", "extent"])
    p.add_argument("formula")
    p.add_argument("--cap", type=int, default=4)
    p.add_argument("--witness")
    p.add_argument("--base")
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("quasi", help="quasi-model tooling")
    p.add_argument("action", choices=["check", "from-model"])
    p.add_argument("structure")
    p.add_argument("formula")
    p.add_argument("--q7", action="store_true")
    p.add_argument("--base")
    p.set_defaults(func=cmd_quasi)

    p = sub.add_parser("dot", help="DOT export of a structure file")
    p.add_argument("structure")
    p.set_defaults(func=cmd_dot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FormulaError, KripkeError, CloneError, ReductionError,
            EngineError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
