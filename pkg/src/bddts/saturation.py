"""Saturation: making the interpretation of absent behavior explicit.

Saturating a model (1) conjoins the input guard onto every initial switch,
(2) adds, for every location and interaction with outgoing switches, a
complementary switch whose guard is the negation of the existing guards, and
(3) adds catch-all switches to the failure sink for output interactions that
a closed location does not mention at all.  Complementary switches from open
locations (and for inputs) lead to an anything-allowed sink; those from
closed locations for outputs lead to a failure sink whose output guard is
false.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import Bddts, Location, Switch, ValidationReport, outgoing, validate, OPEN
from .errors import ValidationFailed
from .syntax import format_term
from .terms import (
    App, DomainSpec, FALSE, TRUE, Term, big_or, neg, satisfying_valuation,
    sem_implies, implication_counterexample,
)

TOP = "__top"
BOT = "__bot"


@dataclass
class SaturationResult:
    model: Bddts
    top: str
    bot: str
    added: list[Switch]
    modified_initial: list[Switch]


def saturate(b: Bddts, dom: DomainSpec | None = None) -> SaturationResult:
    """Saturate a valid model; the result is deterministic and saturated.

    Added switches whose guard is unsatisfiable over the domain are pruned:
    they could never fire, and dropping them keeps the result readable and
    isomorphism-stable.
    """
    dom = dom or b.domain()
    report = validate(b, dom)
    if not report.ok:
        raise ValidationFailed(report)

    switches: list[Switch] = []
    modified: list[Switch] = []
    for t in b.switches:
        if t.source == b.initial:
            enriched = Switch(t.source, t.gate,
                              App("and", (b.input_guard, t.guard)),
                              dict(t.assign), t.target)
            switches.append(enriched)
            modified.append(enriched)
        else:
            switches.append(Switch(t.source, t.gate, t.guard, dict(t.assign), t.target))

    locations = dict(b.locations)
    locations[TOP] = Location(TOP, OPEN)
    locations[BOT] = Location(BOT, OPEN)
    output_guards = dict(b.output_guards)
    output_guards[BOT] = FALSE

    added: list[Switch] = []
    for lname, loc in b.locations.items():
        for gate in b.interactions():
            guards = [t.guard for t in switches
                      if t.source == lname and t.gate.name == gate.name]
            complement = neg(big_or(guards)) if guards else TRUE
            if loc.is_open or gate.is_input:
                if guards:
                    added.append(Switch(lname, gate, complement, {}, TOP))
            elif gate.is_output:
                added.append(Switch(lname, gate, complement, {}, BOT))

    kept = [t for t in added if satisfying_valuation(t.guard, dom) is not None]

    model = Bddts(
        sorts=dict(b.sorts),
        variables=b.variables,
        gates=dict(b.gates),
        locations=locations,
        initial=b.initial,
        input_guard=b.input_guard,
        output_guards=output_guards,
        switches=switches + kept,
        saturated=True,
        name=b.name,
    )
    return SaturationResult(model, TOP, BOT, kept, modified)


@dataclass
class SaturationIssue:
    clause: int
    location: str
    gate: str
    message: str
    witness: object = None

    def __str__(self) -> str:
        return f"[clause {self.clause}] {self.message}"


@dataclass
class SaturationReport:
    issues: list[SaturationIssue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def __str__(self) -> str:
        return "saturated" if self.ok else "; ".join(str(i) for i in self.issues)


def is_saturated(b: Bddts, dom: DomainSpec | None = None) -> SaturationReport:
    """Check the three saturation conditions, with witnesses per violation."""
    dom = dom or b.domain()
    rep = SaturationReport()

    sinks = {name for name in b.locations
             if not any(t.source == name for t in b.switches)}

    # 1. Guards of each nonempty (location, interaction) group disjoin to true.
    for lname in b.locations:
        for gate in b.interactions():
            guards = [t.guard for t in b.switches
                      if t.source == lname and t.gate.name == gate.name]
            if not guards:
                continue
            total = big_or(guards)
            witness = implication_counterexample(TRUE, total, dom)
            if witness is not None:
                rep.issues.append(SaturationIssue(
                    1, lname, gate.name,
                    f"guards from {lname} on {gate.name} do not cover "
                    f"{format_term(total)}", witness))

    # 2. Closed locations mention every output interaction.
    for lname, loc in b.locations.items():
        if not loc.is_closed:
            continue
        for gate in b.output_gates():
            if not outgoing(b, lname, gate):
                rep.issues.append(SaturationIssue(
                    2, lname, gate.name,
                    f"closed location {lname} has no switch for output {gate.name}"))

    # 3. Initial switches either imply the input guard or end in an open,
    #    guard-free sink.
    for t in b.switches:
        if t.source != b.initial:
            continue
        escape = (b.location(t.target).is_open and t.target in sinks
                  and t.target not in b.output_guards)
        if escape:
            continue
        if not sem_implies(t.guard, b.input_guard, dom):
            rep.issues.append(SaturationIssue(
                3, b.initial, t.gate.name,
                f"initial switch to {t.target} neither implies the input guard "
                f"nor escapes to an open sink", witness=t))
    return rep
