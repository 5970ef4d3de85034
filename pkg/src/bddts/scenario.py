"""A small structured scenario language compiled into a model.

A scenario file declares its vocabulary first and then one scenario::

    sort BadgeId int 1233 1235
    sort BadgeList list BadgeId 1
    sort DoorState enum OPEN CLOSED
    var A_badge BadgeList model
    var P_badge BadgeId context
    gate verify_badge in (badge: BadgeId)
    gate trigger_door out (id: DoorId, command: DoorState)
    rename trigger_door Door := command

    scenario Door access with badge
    Given P_badge == 1234
    And contains(A_badge, P_badge)
    When !verify_badge(P_badge) if contains(A_badge, badge) set AccessGranted := true
    Then !trigger_door(1, OPEN) if AccessGranted
    And expect Door == OPEN

Given lines conjoin into the input guard.  Each When line is a switch out of
an open location; each Then line is a switch out of a closed location; the
final location is open and carries the expect predicate as its output guard.
``And`` continues the preceding keyword: another conjunct after Given,
another step after When/Then, or the expect clause of a Then.  A gate
argument that is not a bare ``_`` becomes an equality conjunct between the
corresponding interaction variable and the argument term.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .core import Bddts, Gate, Location, Switch
from .errors import ParseError, UnknownGateOrVariable
from .syntax import parse_term
from .terms import (
    BOOL, CONTEXT, INTERACTION, MODEL, App, Sort, Term, Var, big_and, eq,
)

_SORT_RE = re.compile(r"sort\s+(\w+)\s+(bool|int|enum|list)\s*(.*)$")
_VAR_RE = re.compile(r"var\s+(\w+)\s+(\w+)\s+(model|context)\s*$")
_GATE_RE = re.compile(r"gate\s+(\w+)\s+(in|out)\s*\(([^)]*)\)\s*$")
_RENAME_RE = re.compile(r"rename\s+(\w+)\s+(\w+)\s*:=\s*(\w+)\s*$")
_STEP_RE = re.compile(r"!(\w+)\s*\(([^)]*)\)\s*(.*)$")


@dataclass
class _Step:
    kind: str  # "when" | "then"
    line_no: int
    gate: str
    args: list[str]
    guard_text: str | None = None
    sets: list[tuple[str, str]] = field(default_factory=list)
    expect_text: str | None = None
    expect_line: int = 0


def parse_scenario(text: str, name: str = "scenario") -> Bddts:
    """Compile scenario text into a model; see the module docstring for the
    grammar.  Errors carry the offending line."""
    sorts: dict[str, Sort] = {"bool": BOOL}
    variables: dict[str, Var] = {}
    gates: dict[str, Gate] = {}
    renames: dict[str, dict[str, str]] = {}
    title: str | None = None
    givens: list[tuple[str, int]] = []
    steps: list[_Step] = []
    last_keyword: str | None = None

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head = line.split(None, 1)[0]
        if head == "sort":
            _parse_sort(line, line_no, sorts)
        elif head == "var":
            _parse_var(line, line_no, sorts, variables)
        elif head == "gate":
            _parse_gate(line, line_no, sorts, variables, gates)
        elif head == "rename":
            _parse_rename(line, line_no, gates, renames)
        elif head == "scenario":
            title = line.split(None, 1)[1] if " " in line else name
        elif head == "Given":
            givens.append((line.split(None, 1)[1], line_no))
            last_keyword = "given"
        elif head in ("When", "Then"):
            rest = line.split(None, 1)[1] if " " in line else ""
            steps.append(_parse_step(head.lower(), rest, line_no))
            last_keyword = head.lower()
        elif head == "And":
            rest = line.split(None, 1)[1] if " " in line else ""
            _continue_keyword(last_keyword, rest, line_no, givens, steps)
        else:
            raise ParseError(f"unrecognized line {line!r}", line=line_no)

    if not any(s.kind == "then" for s in steps):
        raise ParseError("a scenario needs at least one Then step")
    if steps and steps[0].kind == "then" and not any(s.kind == "when" for s in steps):
        pass  # a lone Then scenario is permitted
    for i in range(1, len(steps)):
        if steps[i - 1].kind == "then" and steps[i].kind == "when":
            raise ParseError("When steps cannot follow Then steps",
                             line=steps[i].line_no)

    gates_with_renames = {
        gname: Gate(g.name, g.direction, g.params,
                    tuple(sorted(renames.get(gname, {}).items())))
        for gname, g in gates.items()
    }
    return _build(name if title is None else title, sorts, variables,
                  gates_with_renames, givens, steps)


def _parse_sort(line: str, line_no: int, sorts: dict[str, Sort]) -> None:
    m = _SORT_RE.match(line)
    if not m:
        raise ParseError("malformed sort declaration", line=line_no)
    sname, kind, rest = m.groups()
    if sname in sorts:
        raise ParseError(f"duplicate sort {sname!r}", line=line_no)
    parts = rest.split()
    try:
        if kind == "bool":
            sorts[sname] = Sort(sname, "bool")
        elif kind == "int":
            sorts[sname] = Sort(sname, "int", lo=int(parts[0]), hi=int(parts[1]))
        elif kind == "enum":
            sorts[sname] = Sort(sname, "enum", values=tuple(parts))
        else:
            elem = sorts.get(parts[0])
            if elem is None:
                raise UnknownGateOrVariable(f"unknown element sort {parts[0]!r}",
                                            line=line_no)
            sorts[sname] = Sort(sname, "list", elem=elem, max_len=int(parts[1]))
    except (IndexError, ValueError):
        raise ParseError("malformed sort declaration", line=line_no) from None


def _parse_var(line: str, line_no: int, sorts, variables) -> None:
    m = _VAR_RE.match(line)
    if not m:
        raise ParseError("malformed variable declaration", line=line_no)
    vname, sname, kind = m.groups()
    sort = sorts.get(sname)
    if sort is None:
        raise UnknownGateOrVariable(f"unknown sort {sname!r}", line=line_no)
    if vname in variables:
        raise ParseError(f"duplicate variable {vname!r}", line=line_no)
    variables[vname] = Var(vname, sort, kind)


def _parse_gate(line: str, line_no: int, sorts, variables, gates) -> None:
    m = _GATE_RE.match(line)
    if not m:
        raise ParseError("malformed gate declaration", line=line_no)
    gname, direction, params_text = m.groups()
    if gname in gates:
        raise ParseError(f"duplicate gate {gname!r}", line=line_no)
    params = []
    for chunk in filter(None, (c.strip() for c in params_text.split(","))):
        if ":" not in chunk:
            raise ParseError(f"malformed gate parameter {chunk!r}", line=line_no)
        pname, sname = (x.strip() for x in chunk.split(":", 1))
        sort = sorts.get(sname)
        if sort is None:
            raise UnknownGateOrVariable(f"unknown sort {sname!r}", line=line_no)
        if pname in variables:
            raise ParseError(f"gate parameter {pname!r} clashes with a variable",
                             line=line_no)
        params.append(Var(pname, sort, INTERACTION))
    gates[gname] = Gate(gname, direction, tuple(params))


def _parse_rename(line: str, line_no: int, gates, renames) -> None:
    m = _RENAME_RE.match(line)
    if not m:
        raise ParseError("malformed rename declaration", line=line_no)
    gname, cv, iv = m.groups()
    if gname not in gates:
        raise UnknownGateOrVariable(f"unknown gate {gname!r}", line=line_no)
    renames.setdefault(gname, {})[cv] = iv


def _parse_step(kind: str, rest: str, line_no: int) -> _Step:
    m = _STEP_RE.match(rest)
    if not m:
        raise ParseError(f"malformed {kind.capitalize()} step", line=line_no)
    gate, args_text, tail = m.groups()
    args = [a.strip() for a in args_text.split(",")] if args_text.strip() else []
    step = _Step(kind, line_no, gate, args)
    _parse_step_tail(step, tail, line_no)
    return step


def _parse_step_tail(step: _Step, tail: str, line_no: int) -> None:
    tail = tail.strip()
    if tail.startswith("if "):
        cut = tail.find(" set ")
        cut2 = tail.find(" expect ")
        stop = min(x for x in (cut, cut2, len(tail)) if x >= 0)
        step.guard_text = tail[3:stop].strip()
        tail = tail[stop:].strip()
    if tail.startswith("set "):
        cut = tail.find(" expect ")
        sets_text = tail[4:cut if cut >= 0 else len(tail)]
        for chunk in sets_text.split(";"):
            if ":=" not in chunk:
                raise ParseError(f"malformed set clause {chunk.strip()!r}", line=line_no)
            vname, expr = chunk.split(":=", 1)
            step.sets.append((vname.strip(), expr.strip()))
        tail = tail[cut:].strip() if cut >= 0 else ""
    if tail.startswith("expect "):
        step.expect_text = tail[len("expect "):].strip()
        step.expect_line = line_no
        tail = ""
    if tail:
        raise ParseError(f"unexpected trailing text {tail!r}", line=line_no)


def _continue_keyword(last: str | None, rest: str, line_no: int,
                      givens, steps) -> None:
    if last == "given":
        givens.append((rest, line_no))
        return
    if last in ("when", "then") and steps:
        if rest.startswith("expect "):
            if last != "then":
                raise ParseError("expect is only allowed after a Then step",
                                 line=line_no)
            steps[-1].expect_text = rest[len("expect "):].strip()
            steps[-1].expect_line = line_no
            return
        steps.append(_parse_step(last, rest, line_no))
        return
    raise ParseError("And without a preceding Given/When/Then", line=line_no)


def _build(title: str, sorts, variables, gates, givens, steps) -> Bddts:
    ig = big_and([
        parse_term(text, sorts, variables, line=line_no)
        for text, line_no in givens
    ])

    locations: dict[str, Location] = {}
    switches: list[Switch] = []
    names: list[str] = []
    for i in range(len(steps) + 1):
        next_kind = steps[i].kind if i < len(steps) else None
        nature = "closed" if next_kind == "then" else "open"
        lname = str(i)
        locations[lname] = Location(lname, nature)
        names.append(lname)

    output_guards: dict[str, Term] = {}
    for i, step in enumerate(steps):
        gate = gates.get(step.gate)
        if gate is None:
            raise UnknownGateOrVariable(f"unknown gate {step.gate!r}",
                                        line=step.line_no)
        if len(step.args) != len(gate.params):
            raise ParseError(
                f"gate {gate.name} takes {len(gate.params)} arguments, "
                f"got {len(step.args)}", line=step.line_no)
        scope = dict(variables)
        scope.update({p.name: p for p in gate.params})
        conjuncts = []
        for p, arg in zip(gate.params, step.args):
            if arg == "_":
                continue
            conjuncts.append(eq(p, parse_term(arg, sorts, scope, line=step.line_no)))
        if step.guard_text:
            conjuncts.append(parse_term(step.guard_text, sorts, scope,
                                        line=step.line_no))
        assign = {}
        for vname, expr in step.sets:
            v = variables.get(vname)
            if v is None or v.kind != MODEL:
                raise UnknownGateOrVariable(
                    f"set target {vname!r} is not a model variable",
                    line=step.line_no)
            assign[v] = parse_term(expr, sorts, scope, line=step.line_no)
        switches.append(Switch(names[i], gate, big_and(conjuncts),
                               assign, names[i + 1]))
        if step.expect_text is not None:
            output_guards[names[i + 1]] = parse_term(
                step.expect_text, sorts, variables, line=step.expect_line)

    return Bddts(
        sorts=sorts,
        variables=tuple(variables.values()),
        gates=gates,
        locations=locations,
        initial=names[0],
        input_guard=ig,
        output_guards=output_guards,
        switches=switches,
        name=title,
    )


def load_scenario(path: str) -> Bddts:
    with open(path) as fh:
        return parse_scenario(fh.read(), name=path.rsplit("/", 1)[-1])
