"""Command-line interface.

Exit codes: 0 on success / equivalent / isomorphic / pass, 1 on a negative
result, 2 on errors (bad input, violated preconditions).
"""

from __future__ import annotations

import argparse
import json
import sys

from . import modelio
from .composition import disjunction, isomorphic
from .concrete import SimulatedSut, derive_test_case, run_against_sut, verdict
from .core import validate
from .dot import model_to_dot, testcase_to_dot
from .errors import BddtsError
from .saturation import is_saturated, saturate
from .scenario import load_scenario
from .symbolic import testing_equivalent
from .terms import DomainSpec


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bddts", description=__doc__)
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.add_argument("--domain", help="domain spec JSON overriding the model's sorts")
    p.add_argument("--cap", type=int, default=10 ** 6,
                   help="valuation enumeration cap (default 1e6)")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("parse", help="compile a scenario file into a model")
    sp.add_argument("scenario")
    sp.add_argument("-o", "--output", required=True)

    sp = sub.add_parser("validate", help="check model well-formedness")
    sp.add_argument("model")

    sp = sub.add_parser("saturate", help="saturate a model")
    sp.add_argument("model")
    sp.add_argument("-o", "--output", required=True)

    sp = sub.add_parser("compose", help="disjunction composition of two saturated models")
    sp.add_argument("left")
    sp.add_argument("right")
    sp.add_argument("-o", "--output", required=True)

    sp = sub.add_parser("iso", help="check two models for isomorphism")
    sp.add_argument("left")
    sp.add_argument("right")
    sp.add_argument("--max-iso-locations", type=int, default=12)

    sp = sub.add_parser("check-equiv", help="bounded testing-equivalence check")
    sp.add_argument("--left", required=True, help="comma-separated model files")
    sp.add_argument("--right", required=True, help="comma-separated model files")
    sp.add_argument("--ini", help="initialization JSON (object or array); "
                                  "all domain initializations if omitted")
    sp.add_argument("--max-sigma", type=int, default=4)

    sp = sub.add_parser("gen-tests", help="derive a test case")
    sp.add_argument("model")
    sp.add_argument("--ini", required=True)
    sp.add_argument("--depth", type=int, default=6)
    sp.add_argument("-o", "--output", required=True)

    sp = sub.add_parser("run", help="run a test case against a simulated system")
    sp.add_argument("testcase")
    sp.add_argument("--sut", required=True, help="model JSON for the simulated system")
    sp.add_argument("--sut-ini", help="initialization for the system (defaults to the test case's)")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--max-steps", type=int, default=50)

    sp = sub.add_parser("export-dot", help="render a model or test case as DOT")
    sp.add_argument("input")
    sp.add_argument("-o", "--output", required=True)
    return p


def _domain(args, model) -> DomainSpec:
    if args.domain:
        return modelio.load_domain(args.domain, cap=args.cap)
    return DomainSpec(dict(model.sorts), cap=args.cap)


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps(payload, ensure_ascii=False, default=str))
    else:
        print(text)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except BddtsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    cmd = args.command
    if cmd == "parse":
        model = load_scenario(args.scenario)
        modelio.save_model(model, args.output)
        _emit(args, {"ok": True, "locations": len(model.locations)},
              f"wrote {args.output} ({len(model.locations)} locations, "
              f"{len(model.switches)} switches)")
        return 0

    if cmd == "validate":
        model = modelio.load_model(args.model)
        report = validate(model, _domain(args, model))
        payload = {"ok": report.ok,
                   "issues": [str(i) for i in report.issues]}
        _emit(args, payload, str(report))
        return 0 if report.ok else 1

    if cmd == "saturate":
        model = modelio.load_model(args.model)
        result = saturate(model, _domain(args, model))
        modelio.save_model(result.model, args.output)
        _emit(args, {"ok": True, "added": len(result.added)},
              f"wrote {args.output} (+{len(result.added)} switches)")
        return 0

    if cmd == "compose":
        left = modelio.load_model(args.left)
        right = modelio.load_model(args.right)
        composed = disjunction(left, right, _domain(args, left))
        modelio.save_model(composed, args.output)
        _emit(args, {"ok": True, "locations": len(composed.locations)},
              f"wrote {args.output} ({len(composed.locations)} locations)")
        return 0

    if cmd == "iso":
        left = modelio.load_model(args.left)
        right = modelio.load_model(args.right)
        witness = isomorphic(left, right, _domain(args, left),
                             max_locations=args.max_iso_locations)
        if witness is None:
            _emit(args, {"isomorphic": False}, "not isomorphic")
            return 1
        _emit(args, {"isomorphic": True, "map": witness.location_map},
              "isomorphic:\n" + "\n".join(
                  f"  {a} -> {b}" for a, b in sorted(witness.location_map.items())))
        return 0

    if cmd == "check-equiv":
        left = [modelio.load_model(p) for p in args.left.split(",")]
        right = [modelio.load_model(p) for p in args.right.split(",")]
        dom = _domain(args, left[0])
        if args.ini:
            inis = modelio.load_inis(args.ini, left[0])
        else:
            variables = sorted(left[0].variables, key=lambda v: v.name)
            from .terms import Const
            inis = [{v: Const(val[v], v.sort) for v in variables}
                    for val in dom.valuations(variables)]
        report = testing_equivalent(left, right, inis, args.max_sigma, dom)
        payload = {"equivalent": report.equivalent, "bound": report.bound,
                   "checked": report.checked,
                   "counterexample": str(report.counterexample) if report.counterexample else None}
        _emit(args, payload, str(report))
        return 0 if report.equivalent else 1

    if cmd == "gen-tests":
        model = modelio.load_model(args.model)
        dom = _domain(args, model)
        ini = modelio.load_inis(args.ini, model)[0]
        tc = derive_test_case(model, ini, dom, max_depth=args.depth)
        modelio.save_testcase(tc, args.output)
        _emit(args, {"ok": True, "states": len(tc.lts.states),
                     "pass_states": len(tc.pass_states)},
              f"wrote {args.output} ({len(tc.lts.states)} states, "
              f"{len(tc.pass_states)} pass states)")
        return 0

    if cmd == "run":
        tc = modelio.load_testcase(args.testcase, cap=args.cap)
        sut_model = modelio.load_model(args.sut)
        if args.sut_ini:
            sut_ini = modelio.load_inis(args.sut_ini, sut_model)[0]
        else:
            sut_ini = modelio.ini_from_json(
                modelio.ini_to_json(tc.ini), sut_model)
        dom = _domain(args, sut_model)
        sut = SimulatedSut.from_model(sut_model, sut_ini, dom,
                                      max_depth=args.max_steps)
        result, transcript = run_against_sut(tc, sut, args.seed, args.max_steps)
        payload = {"verdict": result.outcome,
                   "transcript": [str(gv) for gv in transcript]}
        _emit(args, payload, str(result))
        return 0 if result.outcome == "pass" else 1

    if cmd == "export-dot":
        with open(args.input) as fh:
            obj = json.load(fh)
        if "states" in obj:
            tc = modelio.testcase_from_json(obj, cap=args.cap)
            text = testcase_to_dot(tc)
        else:
            text = model_to_dot(modelio.model_from_json(obj))
        with open(args.output, "w") as fh:
            fh.write(text)
        _emit(args, {"ok": True}, f"wrote {args.output}")
        return 0

    raise AssertionError(f"unhandled command {cmd!r}")


if __name__ == "__main__":
    sys.exit(main())
