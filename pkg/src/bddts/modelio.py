"""Canonical JSON persistence for models, domains, initializations and test
cases.  Unknown fields are rejected; term strings use the shared term syntax.
"""

from __future__ import annotations

import json
from typing import Any, Mapping

from .core import Bddts, Gate, Location, Switch
from .errors import ParseError
from .saturation import BOT, TOP
from .syntax import format_term, parse_term
from .terms import (
    BOOL, CONTEXT, INTERACTION, MODEL, Const, DomainSpec, Sort, Term, Value,
    Var, sorts_compatible,
)

_RESERVED_LOCATIONS = {TOP, BOT}


def _reject_unknown(obj: Mapping[str, Any], allowed: set[str], where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise ParseError(f"unknown fields {sorted(unknown)} in {where}")


# ---------------------------------------------------------------------------
# Sorts and domains
# ---------------------------------------------------------------------------

def sort_from_json(obj: Mapping[str, Any], known: dict[str, Sort]) -> Sort:
    _reject_unknown(obj, {"name", "kind", "lo", "hi", "values", "elem", "max_len"},
                    f"sort {obj.get('name')}")
    name = obj["name"]
    kind = obj["kind"]
    if kind == "bool":
        return Sort(name, "bool")
    if kind == "int":
        return Sort(name, "int", lo=int(obj["lo"]), hi=int(obj["hi"]))
    if kind == "enum":
        return Sort(name, "enum", values=tuple(obj["values"]))
    if kind == "list":
        elem = known.get(obj["elem"])
        if elem is None:
            raise ParseError(f"sort {name}: unknown element sort {obj['elem']!r}")
        return Sort(name, "list", elem=elem, max_len=int(obj["max_len"]))
    raise ParseError(f"sort {name}: unknown kind {kind!r}")


def sort_to_json(sort: Sort) -> dict:
    out: dict[str, Any] = {"name": sort.name, "kind": sort.kind}
    if sort.kind == "int":
        out.update(lo=sort.lo, hi=sort.hi)
    elif sort.kind == "enum":
        out["values"] = list(sort.values)
    elif sort.kind == "list":
        out.update(elem=sort.elem.name, max_len=sort.max_len)
    return out


def sorts_from_json(items: list) -> dict[str, Sort]:
    sorts: dict[str, Sort] = {"bool": BOOL}
    for obj in items:
        sort = sort_from_json(obj, sorts)
        if sort.name in sorts:
            raise ParseError(f"duplicate sort {sort.name!r}")
        sorts[sort.name] = sort
    return sorts


def domain_from_json(obj: Mapping[str, Any], cap: int = 10 ** 6) -> DomainSpec:
    _reject_unknown(obj, {"sorts", "cap"}, "domain spec")
    return DomainSpec(sorts_from_json(obj["sorts"]), cap=int(obj.get("cap", cap)))


def load_domain(path: str, cap: int = 10 ** 6) -> DomainSpec:
    with open(path) as fh:
        return domain_from_json(json.load(fh), cap=cap)


# ---------------------------------------------------------------------------
# Values
# ---------------------------------------------------------------------------

def value_from_json(raw: Any, sort: Sort) -> Value:
    if sort.kind == "bool":
        if not isinstance(raw, bool):
            raise ParseError(f"expected a boolean, got {raw!r}")
        return raw
    if sort.kind == "int":
        if not isinstance(raw, int) or isinstance(raw, bool):
            raise ParseError(f"expected an integer, got {raw!r}")
        return raw
    if sort.kind == "enum":
        if raw not in sort.values:
            raise ParseError(f"{raw!r} is not a value of {sort.name}")
        return raw
    if sort.kind == "list":
        if not isinstance(raw, list):
            raise ParseError(f"expected a list, got {raw!r}")
        return tuple(value_from_json(x, sort.elem) for x in raw)
    raise ParseError(f"unknown sort kind {sort.kind!r}")


def value_to_json(v: Value) -> Any:
    if isinstance(v, tuple):
        return [value_to_json(x) for x in v]
    return v


# ---------------------------------------------------------------------------
# Models
# ---------------------------------------------------------------------------

_MODEL_FIELDS = {"sorts", "variables", "gates", "locations", "initial", "ig",
                 "switches", "saturated", "name"}


def model_from_json(obj: Mapping[str, Any], name: str = "model") -> Bddts:
    _reject_unknown(obj, _MODEL_FIELDS, "model")
    sorts = sorts_from_json(obj["sorts"])

    all_vars: dict[str, Var] = {}
    declared: list[Var] = []
    for vo in obj["variables"]:
        _reject_unknown(vo, {"name", "sort", "kind"}, f"variable {vo.get('name')}")
        if vo["sort"] not in sorts:
            raise ParseError(f"variable {vo['name']}: unknown sort {vo['sort']!r}")
        if vo["kind"] not in (MODEL, CONTEXT, INTERACTION):
            raise ParseError(f"variable {vo['name']}: unknown kind {vo['kind']!r}")
        if vo["name"] in all_vars:
            raise ParseError(f"duplicate variable {vo['name']!r}")
        var = Var(vo["name"], sorts[vo["sort"]], vo["kind"])
        all_vars[var.name] = var
        if var.kind != INTERACTION:
            declared.append(var)

    gates: dict[str, Gate] = {}
    for go in obj["gates"]:
        _reject_unknown(go, {"name", "dir", "params", "renames"}, f"gate {go.get('name')}")
        params = []
        for pname in go["params"]:
            p = all_vars.get(pname)
            if p is None or p.kind != INTERACTION:
                raise ParseError(
                    f"gate {go['name']}: parameter {pname!r} is not a declared "
                    "interaction variable")
            params.append(p)
        renames = tuple(sorted((cv, iv) for cv, iv in go.get("renames", {}).items()))
        if go["name"] in gates:
            raise ParseError(f"duplicate gate {go['name']!r}")
        if go["dir"] not in ("in", "out"):
            raise ParseError(f"gate {go['name']}: direction must be 'in' or 'out'")
        gates[go["name"]] = Gate(go["name"], go["dir"], tuple(params), renames)

    saturated = bool(obj.get("saturated", False))
    locations: dict[str, Location] = {}
    output_guards: dict[str, Term] = {}
    term_vars = dict(all_vars)
    for lo in obj["locations"]:
        _reject_unknown(lo, {"name", "nature", "og"}, f"location {lo.get('name')}")
        lname = lo["name"]
        if lname in locations:
            raise ParseError(f"duplicate location {lname!r}")
        if lname in _RESERVED_LOCATIONS and not saturated:
            raise ParseError(f"location name {lname!r} is reserved for saturation")
        if lo["nature"] not in ("open", "closed"):
            raise ParseError(f"location {lname}: nature must be 'open' or 'closed'")
        locations[lname] = Location(lname, lo["nature"])
        if "og" in lo and lo["og"] is not None:
            output_guards[lname] = parse_term(lo["og"], sorts, term_vars)

    switches = []
    for so in obj["switches"]:
        _reject_unknown(so, {"from", "gate", "guard", "assign", "to"}, "switch")
        gate = gates.get(so["gate"])
        if gate is None:
            raise ParseError(f"switch uses unknown gate {so['gate']!r}")
        guard = parse_term(so.get("guard", "true"), sorts, term_vars)
        assign = {}
        for vname, text in so.get("assign", {}).items():
            v = all_vars.get(vname)
            if v is None:
                raise ParseError(f"switch assigns unknown variable {vname!r}")
            assign[v] = parse_term(text, sorts, term_vars)
        switches.append(Switch(so["from"], gate, guard, assign, so["to"]))

    return Bddts(
        sorts=sorts,
        variables=tuple(declared),
        gates=gates,
        locations=locations,
        initial=obj["initial"],
        input_guard=parse_term(obj["ig"], sorts, term_vars),
        output_guards=output_guards,
        switches=switches,
        saturated=saturated,
        name=obj.get("name", name),
    )


def model_to_json(b: Bddts) -> dict:
    ivs: dict[str, Var] = {}
    for g in b.gates.values():
        for p in g.params:
            ivs[p.name] = p
    variables = [{"name": v.name, "sort": v.sort.name, "kind": v.kind}
                 for v in b.variables]
    variables += [{"name": v.name, "sort": v.sort.name, "kind": v.kind}
                  for v in sorted(ivs.values(), key=lambda v: v.name)]
    gates = []
    for g in sorted(b.gates.values(), key=lambda g: g.name):
        go: dict[str, Any] = {"name": g.name, "dir": g.direction,
                              "params": [p.name for p in g.params]}
        if g.renames:
            go["renames"] = dict(g.renames)
        gates.append(go)
    locations = []
    for loc in sorted(b.locations.values(), key=lambda l: l.name):
        lo: dict[str, Any] = {"name": loc.name, "nature": loc.nature}
        if loc.name in b.output_guards:
            lo["og"] = format_term(b.output_guards[loc.name])
        locations.append(lo)
    switches = [{
        "from": t.source,
        "gate": t.gate.name,
        "guard": format_term(t.guard),
        "assign": {v.name: format_term(e)
                   for v, e in sorted(t.assign.items(), key=lambda kv: kv[0].name)},
        "to": t.target,
    } for t in b.switches]
    return {
        "name": b.name,
        "sorts": [sort_to_json(s) for s in b.sorts.values() if s.name != "bool"],
        "variables": variables,
        "gates": gates,
        "locations": locations,
        "initial": b.initial,
        "ig": format_term(b.input_guard),
        "switches": switches,
        "saturated": b.saturated,
    }


def load_model(path: str) -> Bddts:
    with open(path) as fh:
        obj = json.load(fh)
    return model_from_json(obj, name=path.rsplit("/", 1)[-1].removesuffix(".json"))


def save_model(b: Bddts, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(model_to_json(b), fh, indent=2, ensure_ascii=False)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Initializations
# ---------------------------------------------------------------------------

def ini_from_json(obj: Mapping[str, Any], b: Bddts) -> dict[Var, Const]:
    by_name = {v.name: v for v in b.variables}
    out: dict[Var, Const] = {}
    for name, raw in obj.items():
        v = by_name.get(name)
        if v is None:
            raise ParseError(f"initialization names unknown variable {name!r}")
        out[v] = Const(value_from_json(raw, v.sort), v.sort)
    return out


def ini_to_json(ini: Mapping[Var, Const]) -> dict:
    return {v.name: value_to_json(t.value) for v, t in
            sorted(ini.items(), key=lambda kv: kv[0].name)}


def load_inis(path: str, b: Bddts) -> list[dict[Var, Const]]:
    """An initialization file holds one object or an array of objects."""
    with open(path) as fh:
        obj = json.load(fh)
    if isinstance(obj, list):
        return [ini_from_json(o, b) for o in obj]
    return [ini_from_json(obj, b)]


# ---------------------------------------------------------------------------
# Test cases
# ---------------------------------------------------------------------------

def testcase_to_json(tc) -> dict:
    from .concrete import TestCase  # local to avoid an import cycle
    assert isinstance(tc, TestCase)
    lts = tc.lts
    index = {key: i for i, key in enumerate(sorted(lts.states))}
    states = [None] * len(index)
    for key, i in index.items():
        states[i] = {
            "location": key[0],
            "values": {name: value_to_json(val) for name, val in key[1]},
        }
    transitions = []
    for src, edges in sorted(lts.transitions.items()):
        for (gname, values), dst in sorted(edges.items()):
            transitions.append({
                "from": index[src],
                "gate": gname,
                "values": [value_to_json(v) for v in values],
                "to": index[dst],
            })
    return {
        "model": model_to_json(tc.model),
        "ini": ini_to_json(tc.ini),
        "initial": index[lts.initial],
        "states": states,
        "transitions": transitions,
        "pass": sorted(index[s] for s in tc.pass_states),
        "boundary": sorted(index[s] for s in lts.boundary),
    }


def testcase_from_json(obj: Mapping[str, Any], cap: int = 10 ** 6):
    from .concrete import DerivedSts, Lts, TestCase
    _reject_unknown(obj, {"model", "ini", "initial", "states", "transitions",
                          "pass", "boundary"}, "test case")
    model = model_from_json(obj["model"])
    dom = DomainSpec(dict(model.sorts), cap=cap)
    ini = ini_from_json(obj["ini"], model)
    by_name = {v.name: v for v in model.variables}

    keys = []
    values = {}
    for so in obj["states"]:
        vals = {by_name[name]: _freeze(value_from_json(raw, by_name[name].sort))
                for name, raw in so["values"].items()}
        key = (so["location"], tuple(sorted((v.name, x) for v, x in vals.items())))
        keys.append(key)
        values[key] = vals
    transitions: dict = {}
    for to in obj["transitions"]:
        src = keys[to["from"]]
        gate = model.gates[to["gate"]]
        gv_values = tuple(value_from_json(raw, p.sort)
                          for raw, p in zip(to["values"], gate.params))
        transitions.setdefault(src, {})[(gate.name, gv_values)] = keys[to["to"]]
    for key in keys:
        transitions.setdefault(key, {})
    boundary = {keys[i] for i in obj["boundary"]}
    for key in boundary:
        transitions.pop(key, None)
    sts = DerivedSts(model, dict(ini), [], model.renames())
    lts = Lts(sts, keys[obj["initial"]],
              {k: dict(values[k]) for k in keys},
              {k: k[0] for k in keys},
              transitions, boundary)
    return TestCase(lts, frozenset(keys[i] for i in obj["pass"]), dom, dict(ini))


def _freeze(v: Value) -> Value:
    return v


def save_testcase(tc, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(testcase_to_json(tc), fh, indent=2, ensure_ascii=False)
        fh.write("\n")


def load_testcase(path: str, cap: int = 10 ** 6):
    with open(path) as fh:
        return testcase_from_json(json.load(fh), cap=cap)
