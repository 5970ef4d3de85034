"""Graphviz DOT emission for models and test cases."""

from __future__ import annotations

from .concrete import TestCase
from .core import Bddts
from .syntax import format_term


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def model_to_dot(b: Bddts) -> str:
    lines = ["digraph model {", "  rankdir=LR;"]
    for loc in sorted(b.locations.values(), key=lambda l: l.name):
        label = f"{loc.name}\\n{loc.nature}"
        if loc.name in b.output_guards:
            label += f"\\nOG: {format_term(b.output_guards[loc.name])}"
        shape = "circle" if loc.is_open else "box"
        peripheries = ' peripheries=2' if loc.name == b.initial else ""
        lines.append(f"  {_quote(loc.name)} [label={_quote(label)} shape={shape}{peripheries}];")
    for t in b.switches:
        lines.append(f"  {_quote(t.source)} -> {_quote(t.target)} "
                     f"[label={_quote(t.label())}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def testcase_to_dot(tc: TestCase) -> str:
    lts = tc.lts
    index = {key: i for i, key in enumerate(sorted(lts.states))}
    lines = ["digraph testcase {", "  rankdir=LR;"]
    fail_needed = False
    for key, i in index.items():
        vals = ", ".join(f"{name}={val}" for name, val in key[1])
        label = f"{key[0]}\\n{vals}"
        if key in tc.pass_states:
            shape = ' shape=doublecircle'
        elif key in lts.boundary:
            shape = ' shape=diamond'
        else:
            shape = ' shape=ellipse'
        init = ' penwidth=2' if key == lts.initial else ""
        lines.append(f"  s{i} [label={_quote(label)}{shape}{init}];")
    for src, edges in sorted(lts.transitions.items()):
        for (gname, values), dst in sorted(edges.items()):
            label = f"{gname}({', '.join(str(v) for v in values)})"
            lines.append(f"  s{index[src]} -> s{index[dst]} [label={_quote(label)}];")
    for key, i in index.items():
        if key in lts.boundary:
            continue
        if tc.is_closed_state(key):
            gone = {k for k in lts.transitions.get(key, {})}
            missing = [gv for g in tc.model.output_gates()
                       for gv in _values(tc, g) if gv.key not in gone]
            if missing:
                fail_needed = True
                label = ", ".join(str(gv) for gv in missing)
                lines.append(f"  s{i} -> fail [label={_quote(label)}];")
    if fail_needed:
        lines.append('  fail [label="fail" shape=doubleoctagon];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _values(tc: TestCase, gate):
    from .concrete import gate_values
    return gate_values(gate, tc.dom)
