"""Seeded random model generation for the property suites.

Models are valid by construction: guards of same-source same-gate switches
select distinct values of one pivot expression (determinism), every switch
assigns every model variable (active-variable coverage), and output guards
never sit on the initial location.  Pair and triple generators share one
assignment table keyed by gate, which makes rule-1 assignment unions
compatible by construction.

In ``concrete`` mode the models are also output-rich and every output guard
ranges over context variables that each feeding gate renames, so test-case
derivation always succeeds.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from bddts.core import Bddts, Gate, Location, Switch, validate
from bddts.terms import (
    BOOL, CONTEXT, INTERACTION, MODEL, App, Const, DomainSpec, Sort, Term,
    Var, big_and, boolc, conj, disj, eq, evaluate, ge, intc, le, neg,
)

_NUM2 = Sort("num2", "int", lo=0, hi=1)
_NUM3 = Sort("num3", "int", lo=0, hi=2)
_HUE = Sort("hue", "enum", values=("RED", "BLUE"))


@dataclass
class Vocab:
    sorts: dict[str, Sort]
    variables: tuple[Var, ...]
    gates: dict[str, Gate]
    assign_table: dict[tuple[str, str], Term] = field(default_factory=dict)

    def domain(self, cap: int = 10 ** 6) -> DomainSpec:
        return DomainSpec(dict(self.sorts), cap=cap)

    @property
    def model_vars(self):
        return [v for v in self.variables if v.kind == MODEL]

    @property
    def context_vars(self):
        return [v for v in self.variables if v.kind == CONTEXT]


def gen_vocab(rng: random.Random, concrete: bool = False,
              max_gates: int = 2, max_vars: int = 2, max_ctx: int = 2,
              max_params: int = 2) -> Vocab:
    data_sorts = [rng.choice([_NUM2, _NUM3]), rng.choice([_NUM2, _HUE, BOOL])]
    sorts = {"bool": BOOL}
    for s in data_sorts:
        sorts[s.name] = s

    n_gates = rng.randint(1, max_gates)
    directions = [rng.choice(["in", "out"]) for _ in range(n_gates)]
    if concrete and "out" not in directions:
        directions[-1] = "out"
    gates: dict[str, Gate] = {}
    params_of: dict[str, list[Var]] = {}
    for i, direction in enumerate(directions):
        name = f"g{i}"
        n_params = 1 if max_params == 1 or rng.random() < 0.8 else 2
        params = tuple(Var(f"{name}p{j}", rng.choice(data_sorts), INTERACTION)
                       for j in range(n_params))
        gates[name] = Gate(name, direction, params)
        params_of[name] = list(params)

    variables: list[Var] = []
    for i in range(rng.randint(1, max_vars)):
        variables.append(Var(f"m{i}", rng.choice(data_sorts + [BOOL]), MODEL))
    n_ctx = rng.randint(1, max_ctx) if not concrete else 1
    for i in range(n_ctx):
        if concrete:
            # give the context variable the sort of some output-gate
            # parameter, so every output gate can rename it
            out_params = [p for g in gates.values() if g.is_output
                          for p in g.params]
            sort = rng.choice(out_params).sort if out_params else _NUM2
        else:
            sort = rng.choice(data_sorts + [BOOL])
        variables.append(Var(f"c{i}", sort, CONTEXT))

    if concrete:
        renamed = {}
        for gname, g in gates.items():
            if not g.is_output:
                continue
            rho = {}
            for cv in variables:
                if cv.kind != CONTEXT:
                    continue
                match = next((p for p in g.params if p.sort.name == cv.sort.name), None)
                if match is not None:
                    rho[cv.name] = match.name
            renamed[gname] = Gate(g.name, g.direction, g.params,
                                  tuple(sorted(rho.items())))
        gates.update(renamed)
    return Vocab(sorts, tuple(variables), gates)


def _values_of(rng: random.Random, sort: Sort, dom: DomainSpec, k: int) -> list:
    uni = list(dom.universe(sort))
    rng.shuffle(uni)
    return uni[:k]


def _atom(rng: random.Random, scope: list[Var], dom: DomainSpec) -> Term:
    v = rng.choice(scope)
    if v.sort.kind == "bool":
        return v if rng.random() < 0.5 else neg(v)
    value = rng.choice(dom.universe(v.sort))
    if v.sort.kind == "int" and rng.random() < 0.4:
        op = rng.choice([le, ge])
        return op(v, Const(value, v.sort))
    return eq(v, Const(value, v.sort)) if rng.random() < 0.7 else neg(eq(v, Const(value, v.sort)))


def _bool_term(rng: random.Random, scope: list[Var], dom: DomainSpec,
               depth: int = 1) -> Term:
    if not scope or depth == 0 or rng.random() < 0.3:
        if not scope or rng.random() < 0.25:
            return boolc(rng.random() < 0.7)
        return _atom(rng, scope, dom)
    a = _bool_term(rng, scope, dom, depth - 1)
    b = _bool_term(rng, scope, dom, depth - 1)
    return rng.choice([conj, disj])(a, b)


def _int_range(t: Term) -> tuple[int, int]:
    if isinstance(t, Const):
        return t.value, t.value
    if isinstance(t, Var):
        return t.sort.lo, t.sort.hi
    lo1, hi1 = _int_range(t.args[0])
    lo2, hi2 = _int_range(t.args[1])
    if t.op == "add":
        return lo1 + lo2, hi1 + hi2
    return lo1 - hi2, hi1 - lo2


def _assign_term(rng: random.Random, mv: Var, gate: Gate, variables, dom) -> Term:
    """A sort-range-closed image for mv: reachable values always stay inside
    mv's universe, so finite-domain exhaustiveness arguments stay valid."""
    def fits(t: Term) -> bool:
        if mv.sort.kind != "int":
            return True
        lo, hi = _int_range(t)
        return mv.sort.lo <= lo and hi <= mv.sort.hi
    sources: list[Term] = [Const(rng.choice(dom.universe(mv.sort)), mv.sort)]
    for p in gate.params:
        if p.sort.kind == "int" and mv.sort.kind == "int" and fits(p):
            sources.append(p)
        elif p.sort.name == mv.sort.name and p.sort.kind != "int":
            sources.append(p)
    for v in variables:
        if v.sort.name == mv.sort.name:
            sources.append(v)
    term = rng.choice(sources)
    if mv.sort.kind == "int" and rng.random() < 0.3 and not isinstance(term, Const):
        shifted = App("add", (term, intc(rng.choice([0, 1, -1]))))
        if fits(shifted):
            term = shifted
    return term


def assign_table_for(rng: random.Random, vocab: Vocab, dom: DomainSpec) -> dict:
    table = {}
    for gname, gate in vocab.gates.items():
        for mv in vocab.model_vars:
            table[(gname, mv.name)] = _assign_term(rng, mv, gate, vocab.variables, dom)
    return table


def gen_model(rng: random.Random, vocab: Vocab, *, concrete: bool = False,
              max_locations: int = 4, name: str = "gen",
              initial_gates: frozenset[str] | None = None) -> Bddts:
    """One random valid model.

    ``initial_gates`` pins which interactions the initial location offers
    (at least one switch each; none for the rest).  Pair generators use it
    to give both operands the same interaction footprint at their initial
    locations, which is the scope on which the first-step composition
    equalities hold; see the boundary test in test_composition.
    """
    dom = vocab.domain()
    if not vocab.assign_table:
        vocab.assign_table = assign_table_for(rng, vocab, dom)
    n = rng.randint(2, max_locations)
    names = [f"l{i}" for i in range(n)]
    natures = ["open"] + [rng.choice(["open", "closed"]) for _ in names[1:]]
    locations = {nm: Location(nm, nat) for nm, nat in zip(names, natures)}

    switches: list[Switch] = []
    mvs = vocab.model_vars
    scope_v = list(vocab.variables)
    for src in names:
        for gname, gate in vocab.gates.items():
            if src == names[0] and initial_gates is not None:
                k = rng.choice([1, 2]) if gname in initial_gates else 0
            else:
                k = rng.choices([0, 1, 2], weights=[45, 35, 20])[0]
            if k == 0:
                continue
            assign = {mv: vocab.assign_table[(gname, mv.name)] for mv in mvs}
            if k == 1:
                guard = (boolc(True) if rng.random() < 0.4
                         else _bool_term(rng, scope_v + list(gate.params), dom))
                switches.append(Switch(src, gate, guard, dict(assign),
                                       rng.choice(names)))
            else:
                pivot = rng.choice(list(gate.params) + scope_v)
                values = _values_of(rng, pivot.sort, dom, 2)
                if len(values) < 2:
                    values = values * 2
                for val in values[:2] if values[0] != values[1] else values[:1]:
                    guard = eq(pivot, Const(val, pivot.sort))
                    if rng.random() < 0.3:
                        guard = conj(guard, _atom(rng, scope_v + list(gate.params), dom))
                    switches.append(Switch(src, gate, guard, dict(assign),
                                           rng.choice(names)))

    output_guards: dict[str, Term] = {}
    if concrete:
        candidates = []
        for nm in names[1:]:
            incoming = [t for t in switches if t.target == nm]
            if all(t.gate.is_output and locations[t.source].is_closed
                   for t in incoming):
                candidates.append(nm)
        for nm in candidates:
            if rng.random() < 0.6:
                incoming_gates = {t.gate.name for t in switches if t.target == nm}
                rhos = [dict(vocab.gates[g].renames) for g in incoming_gates]
                common = set(rhos[0]) if rhos else set()
                for rho in rhos[1:]:
                    common &= set(rho)
                cvs = [v for v in vocab.context_vars if v.name in common] \
                    if incoming_gates else list(vocab.context_vars)
                if cvs and rng.random() < 0.8:
                    output_guards[nm] = _bool_term(rng, cvs, dom)
                else:
                    output_guards[nm] = boolc(rng.random() < 0.6)
    else:
        for nm in names[1:]:
            if rng.random() < 0.4:
                output_guards[nm] = _bool_term(rng, scope_v, dom)

    ig = _bool_term(rng, scope_v, dom, depth=rng.choice([0, 1]))
    b = Bddts(
        sorts=dict(vocab.sorts),
        variables=vocab.variables,
        gates=dict(vocab.gates),
        locations=locations,
        initial=names[0],
        input_guard=ig,
        output_guards=output_guards,
        switches=switches,
        name=name,
    )
    report = validate(b, dom)
    assert report.ok, f"generator produced an invalid model: {report}"
    return b


def gen_pair(rng: random.Random, *, concrete: bool = False,
             max_locations: int = 4, share_initial_gates: bool = True,
             max_vars: int = 2, max_ctx: int = 2, max_params: int = 2
             ) -> tuple[Bddts, Bddts, DomainSpec]:
    vocab = gen_vocab(rng, concrete=concrete, max_vars=max_vars,
                      max_ctx=max_ctx, max_params=max_params)
    dom = vocab.domain()
    vocab.assign_table = assign_table_for(rng, vocab, dom)
    footprint = None
    if share_initial_gates:
        footprint = frozenset(g for g in vocab.gates if rng.random() < 0.8)
    b1 = gen_model(rng, vocab, concrete=concrete, max_locations=max_locations,
                   name="p1", initial_gates=footprint)
    b2 = gen_model(rng, vocab, concrete=concrete, max_locations=max_locations,
                   name="p2", initial_gates=footprint)
    return b1, b2, dom


def gen_triple(rng: random.Random, *, max_locations: int = 3
               ) -> tuple[Bddts, Bddts, Bddts, DomainSpec]:
    vocab = gen_vocab(rng)
    dom = vocab.domain()
    vocab.assign_table = assign_table_for(rng, vocab, dom)
    footprint = frozenset(g for g in vocab.gates if rng.random() < 0.8)
    models = tuple(gen_model(rng, vocab, max_locations=max_locations, name=f"t{i}",
                             initial_gates=footprint)
                   for i in range(3))
    return (*models, dom)


def all_inis(b: Bddts, dom: DomainSpec, limit: int | None = None) -> list[dict[Var, Const]]:
    variables = sorted(b.variables, key=lambda v: v.name)
    out = []
    for val in dom.valuations(list(variables)):
        out.append({v: Const(val[v], v.sort) for v in variables})
        if limit is not None and len(out) >= limit:
            break
    return out


def split_inis(b: Bddts, dom: DomainSpec) -> tuple[list, list]:
    """Initializations satisfying and violating the input guard."""
    good, bad = [], []
    for ini in all_inis(b, dom):
        vals = {v: t.value for v, t in ini.items()}
        (good if evaluate(b.input_guard, vals) else bad).append(ini)
    return good, bad


def gen_inis(rng: random.Random, b: Bddts, dom: DomainSpec, k: int) -> list:
    pool = all_inis(b, dom)
    rng.shuffle(pool)
    return pool[:k]
