"""The guarded transition-system model: locations, gates, switches, guards.

A model has open and closed locations, an input guard constraining the
initial state, per-location output guards describing expected outcomes, and
switches labeled by an interaction (a gate with fixed interaction variables),
a boolean guard and a partial assignment of model variables.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from . import terms
from .errors import UnknownLocation
from .syntax import format_term
from .terms import (
    CONTEXT, INTERACTION, MODEL, App, Const, DomainSpec, Sort, Term, Var,
    sem_equiv, satisfying_valuation, sorts_compatible, type_check, vars_of,
)

OPEN = "open"
CLOSED = "closed"


@dataclass(frozen=True)
class Gate:
    """A named I/O action with a fixed tuple of interaction variables.

    Gates and interactions are one-to-one, so a Gate value stands for its
    interaction everywhere an interaction is expected.
    """

    name: str
    direction: str  # "in" | "out"
    params: tuple[Var, ...]
    renames: tuple[tuple[str, str], ...] = ()  # context var -> interaction var

    @property
    def is_input(self) -> bool:
        return self.direction == "in"

    @property
    def is_output(self) -> bool:
        return self.direction == "out"

    def rename_map(self) -> dict[str, str]:
        return dict(self.renames)


# An interaction is identified with its gate (the relation is one-to-one).
Interaction = Gate


def interactions_of(gates: Iterable[Gate]) -> list[Interaction]:
    """The interactions of a gate set: exactly one per gate."""
    return sorted(gates, key=lambda g: g.name)


@dataclass(frozen=True)
class Location:
    name: str
    nature: str  # "open" | "closed"

    @property
    def is_open(self) -> bool:
        return self.nature == OPEN

    @property
    def is_closed(self) -> bool:
        return self.nature == CLOSED


@dataclass(eq=False)
class Switch:
    source: str
    gate: Gate
    guard: Term
    assign: dict[Var, Term]
    target: str

    def label(self) -> str:
        parts = [self.gate.name, f"[{format_term(self.guard)}]"]
        if self.assign:
            sets = ", ".join(f"{v.name} := {format_term(e)}"
                             for v, e in sorted(self.assign.items(), key=lambda kv: kv[0].name))
            parts.append(f"/{sets}")
        return " ".join(parts)


@dataclass
class Bddts:
    """A complete model over a fixed vocabulary of sorts, variables, gates."""

    sorts: dict[str, Sort]
    variables: tuple[Var, ...]  # model and context variables (time index 0)
    gates: dict[str, Gate]
    locations: dict[str, Location]
    initial: str
    input_guard: Term
    output_guards: dict[str, Term]
    switches: list[Switch]
    saturated: bool = False
    name: str = "model"

    @property
    def model_vars(self) -> tuple[Var, ...]:
        return tuple(v for v in self.variables if v.kind == MODEL)

    @property
    def context_vars(self) -> tuple[Var, ...]:
        return tuple(v for v in self.variables if v.kind == CONTEXT)

    @property
    def interaction_vars(self) -> frozenset[Var]:
        return frozenset(p for g in self.gates.values() for p in g.params)

    def interactions(self) -> list[Gate]:
        return interactions_of(self.gates.values())

    def output_gates(self) -> list[Gate]:
        return [g for g in self.interactions() if g.is_output]

    def domain(self, cap: int = 10 ** 6) -> DomainSpec:
        return DomainSpec(dict(self.sorts), cap=cap)

    def location(self, name: str) -> Location:
        try:
            return self.locations[name]
        except KeyError:
            raise UnknownLocation(f"no location named {name!r}") from None

    def renames(self) -> dict[str, dict[str, str]]:
        return {g.name: g.rename_map() for g in self.gates.values() if g.renames}


def outgoing(b: Bddts, location: str, interaction: Gate | str) -> list[Switch]:
    """All switches leaving ``location`` with the given interaction."""
    gname = interaction if isinstance(interaction, str) else interaction.name
    b.location(location)
    return [t for t in b.switches if t.source == location and t.gate.name == gname]


def active_vars(b: Bddts) -> dict[str, frozenset[Var]]:
    """Active variables per location: the least sets closed under
    output-guard support and backward propagation along switches."""
    varset: frozenset[Var] = frozenset(b.variables)
    acc: dict[str, set[Var]] = {name: set() for name in b.locations}
    for name, og in b.output_guards.items():
        acc[name] |= vars_of(og) & varset
    changed = True
    while changed:
        changed = False
        for t in b.switches:
            contribution = (vars_of(t.guard) | acc[t.target]) & varset
            if not contribution <= acc[t.source]:
                acc[t.source] |= contribution
                changed = True
    return {name: frozenset(vs) for name, vs in acc.items()}


def active_vars_at(b: Bddts, location: str) -> frozenset[Var]:
    b.location(location)
    return active_vars(b)[location]


def is_output_rich(b: Bddts) -> bool:
    """Every switch into a goal location is an output from a closed source,
    and the initial location carries no output guard."""
    return not output_rich_violations(b)


def output_rich_violations(b: Bddts) -> list[str]:
    out = []
    if b.initial in b.output_guards:
        out.append("the initial location has an output guard")
    for t in b.switches:
        if t.target in b.output_guards:
            if not t.gate.is_output:
                out.append(f"switch {t.source}->{t.target} enters a goal location "
                           f"on input gate {t.gate.name}")
            if b.location(t.source).is_open:
                out.append(f"switch {t.source}->{t.target} enters a goal location "
                           f"from open location {t.source}")
    return out


def compatible_models(b1: Bddts, b2: Bddts) -> bool:
    """Models agree on gates (names, directions, parameters) and variables."""
    if set(b1.gates) != set(b2.gates):
        return False
    for name, g1 in b1.gates.items():
        g2 = b2.gates[name]
        if g1.direction != g2.direction or g1.params != g2.params:
            return False
    return set(b1.variables) == set(b2.variables)


# ---------------------------------------------------------------------------
# Structural validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Issue:
    code: str
    message: str
    witness: object = None

    def __str__(self) -> str:
        return f"[{self.code}] {self.message}"


@dataclass
class ValidationReport:
    issues: list[Issue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def add(self, code: str, message: str, witness: object = None) -> None:
        self.issues.append(Issue(code, message, witness))

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        return "; ".join(str(i) for i in self.issues)


def validate(b: Bddts, dom: DomainSpec | None = None) -> ValidationReport:
    """Check every well-formedness condition, reporting all violations."""
    dom = dom or b.domain()
    rep = ValidationReport()
    varset = frozenset(b.variables)
    ivset = b.interaction_vars

    if b.initial not in b.locations:
        rep.add("initial-missing", f"initial location {b.initial!r} does not exist")
        return rep
    if not b.locations[b.initial].is_open:
        rep.add("initial-closed", "the initial location must be open")

    names = {v.name for v in b.variables}
    if len(names) != len(b.variables):
        rep.add("variable-dup", "duplicate variable names")
    for v in b.variables:
        if v.kind == INTERACTION:
            rep.add("variable-kind", f"{v.name} declared as an interaction variable "
                                     "outside a gate")
        if v.time != 0:
            rep.add("variable-time", f"declared variable {v} has a nonzero time index")
        if v.sort.name not in b.sorts:
            rep.add("variable-sort", f"variable {v.name} uses undeclared sort {v.sort.name}")

    for g in b.gates.values():
        if g.direction not in ("in", "out"):
            rep.add("gate-direction", f"gate {g.name} has direction {g.direction!r}")
        pnames = [p.name for p in g.params]
        if len(set(pnames)) != len(pnames):
            rep.add("gate-params", f"gate {g.name} has duplicate parameter names")
        for p in g.params:
            if p.kind != INTERACTION:
                rep.add("gate-params", f"gate {g.name} parameter {p.name} is not "
                                       "an interaction variable")
            if p.name in names:
                rep.add("gate-params", f"gate {g.name} parameter {p.name} clashes "
                                       "with a model/context variable")
        for cv_name, iv_name in g.renames:
            if iv_name not in pnames:
                rep.add("gate-renames", f"gate {g.name} renames {cv_name} to "
                                        f"unknown parameter {iv_name}")
            if cv_name not in names:
                rep.add("gate-renames", f"gate {g.name} renames unknown context "
                                        f"variable {cv_name}")

    _check_scope(rep, b.input_guard, varset, frozenset(), "input guard")
    for lname, og in b.output_guards.items():
        if lname not in b.locations:
            rep.add("og-location", f"output guard on unknown location {lname!r}")
            continue
        _check_scope(rep, og, varset, frozenset(), f"output guard of {lname}")

    for t in b.switches:
        where = f"switch {t.source} -{t.gate.name}-> {t.target}"
        if t.source not in b.locations or t.target not in b.locations:
            rep.add("switch-endpoint", f"{where}: unknown endpoint")
            continue
        if t.gate.name not in b.gates or b.gates[t.gate.name] != t.gate:
            rep.add("switch-gate", f"{where}: gate not declared in the model")
            continue
        own_ivs = frozenset(t.gate.params)
        _check_scope(rep, t.guard, varset, own_ivs, f"guard of {where}")
        for v, e in t.assign.items():
            if v.kind != MODEL or v not in varset:
                rep.add("assign-target", f"{where}: assignment to non-model variable {v}")
            if not sorts_compatible(v.sort, terms.sort_of(e)):
                rep.add("assign-sort", f"{where}: assignment to {v.name} has the wrong sort")
            _check_scope(rep, e, varset, own_ivs, f"assignment to {v.name} in {where}")

    act = active_vars(b)
    for t in b.switches:
        if t.target not in b.locations:
            continue
        needed = {v for v in act[t.target] if v.kind == MODEL}
        missing = needed - set(t.assign)
        if missing:
            rep.add("assign-incomplete",
                    f"switch {t.source} -{t.gate.name}-> {t.target} does not assign "
                    f"active model variables {sorted(v.name for v in missing)}")

    _check_determinism(rep, b, dom)
    return rep


def _check_scope(rep: ValidationReport, t: Term, varset: frozenset[Var],
                 ivs: frozenset[Var], where: str) -> None:
    try:
        type_check(t)
    except Exception as exc:  # report instead of raising
        rep.add("term-type", f"{where}: {exc}")
        return
    for v in vars_of(t):
        if v.time != 0:
            rep.add("term-scope", f"{where}: variable {v} has a nonzero time index")
        elif v not in varset and v not in ivs:
            rep.add("term-scope", f"{where}: variable {v.name} is out of scope")


def _check_determinism(rep: ValidationReport, b: Bddts, dom: DomainSpec) -> None:
    by_key: dict[tuple[str, str], list[Switch]] = {}
    for t in b.switches:
        by_key.setdefault((t.source, t.gate.name), []).append(t)
    for (source, gate), group in by_key.items():
        for i in range(len(group)):
            for j in range(i + 1, len(group)):
                t1, t2 = group[i], group[j]
                both = App("and", (t1.guard, t2.guard))
                witness = satisfying_valuation(both, dom)
                if witness is not None:
                    rep.add("nondeterministic",
                            f"switches from {source} on {gate} with overlapping "
                            f"guards [{format_term(t1.guard)}] and [{format_term(t2.guard)}]",
                            witness=(t1, t2, witness))


def format_ini(ini: Mapping[Var, Term]) -> str:
    entries = sorted(ini.items(), key=lambda kv: kv[0].name)
    return "{" + ", ".join(f"{v.name}: {format_term(e)}" for v, e in entries) + "}"
