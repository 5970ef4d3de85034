"""Concrete semantics: derived transition system, finite interpretation,
test cases with pass states and a failure state, verdicts, and a driver that
executes a test case against a simulated system under test.

States pair a location with a total valuation of the declared variables.
Context variables keep their initial values along transitions; a switch
assignment updates its model variables and everything else is retained.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .core import Bddts, Gate, Switch, output_rich_violations
from .errors import (
    GateMismatch, IniViolatesInputGuard, NotOutputRich, RenamingNotDerivable,
    RenamingUndefined,
)
from .symbolic import check_ini, ini_valuation
from .terms import (
    CONTEXT, App, DomainSpec, Term, Value, Var, evaluate, substitute,
    upshift_valuation, vars_of,
)

GateValueKey = tuple[str, tuple]
StateKey = tuple[str, tuple]


@dataclass(frozen=True)
class GateValue:
    """A gate with concrete values for its interaction variables."""

    gate: Gate
    values: tuple[Value, ...]

    def __post_init__(self):
        if len(self.values) != len(self.gate.params):
            raise GateMismatch(
                f"gate {self.gate.name} takes {len(self.gate.params)} values, "
                f"got {len(self.values)}")

    def valuation(self) -> dict[Var, Value]:
        return dict(zip(self.gate.params, self.values))

    @property
    def key(self) -> GateValueKey:
        return (self.gate.name, self.values)

    def __str__(self) -> str:
        vals = ", ".join(str(v) for v in self.values)
        return f"{self.gate.name}({vals})"


def gate_values(gate: Gate, dom: DomainSpec) -> list[GateValue]:
    """All concrete values of one gate over the domain."""
    universes = [dom.universe(p.sort) for p in gate.params]
    return [GateValue(gate, combo) for combo in itertools.product(*universes)]


def all_gate_values(b: Bddts, dom: DomainSpec) -> list[GateValue]:
    out = []
    for gate in b.interactions():
        out.extend(gate_values(gate, dom))
    return out


def gate_seq_valuation(omega: Sequence[GateValue]) -> dict[Var, Value]:
    """Valuation of a gate-value sequence: the empty sequence yields the
    empty valuation, and appending a value upshifts the past and merges."""
    val: dict[Var, Value] = {}
    for gv in omega:
        val = upshift_valuation(val)
        val.update(gv.valuation())
    return val


def hat_valuation(omega: Sequence[GateValue],
                  renames: Mapping[str, Mapping[str, str]],
                  context_vars: Iterable[Var] = ()) -> dict[Var, Value]:
    """Extend the sequence valuation by the observed values of renamed
    context variables: each context variable the last gate renames is bound
    to that interaction variable's value in the final step."""
    if not omega:
        raise RenamingUndefined("the empty sequence has no last gate to rename from")
    val = gate_seq_valuation(omega)
    last = omega[-1]
    rho = renames.get(last.gate.name, {})
    by_name = {v.name: v for v in context_vars}
    for cv_name, iv_name in rho.items():
        iv = next((p for p in last.gate.params if p.name == iv_name), None)
        if iv is None:
            raise RenamingUndefined(
                f"gate {last.gate.name} has no interaction variable {iv_name}")
        cv = by_name.get(cv_name, Var(cv_name, iv.sort, CONTEXT))
        val[cv] = val[iv]
    return val


# ---------------------------------------------------------------------------
# Derived transition system (output guards embedded into switch guards)
# ---------------------------------------------------------------------------

@dataclass
class DerivedSts:
    base: Bddts
    ini: dict[Var, Term]
    switches: list[Switch]
    renames: dict[str, dict[str, str]]


def derive_sts(b: Bddts, ini: Mapping[Var, Term]) -> DerivedSts:
    """Embed output guards into the switches entering goal locations, with
    context variables renamed to the entering gate's interaction variables.

    Requires an output-rich model; every context variable of an output guard
    must be renamed by the gate feeding it.  Assignments are untouched.
    """
    check_ini(b, ini)
    violations = output_rich_violations(b)
    if violations:
        raise NotOutputRich("; ".join(violations))
    renames = b.renames()
    switches: list[Switch] = []
    for t in b.switches:
        og = b.output_guards.get(t.target)
        if og is None:
            switches.append(Switch(t.source, t.gate, t.guard, dict(t.assign), t.target))
            continue
        rho = renames.get(t.gate.name, {})
        params = {p.name: p for p in t.gate.params}
        subst: dict[Var, Term] = {}
        for v in vars_of(og):
            if v.kind != CONTEXT:
                continue
            iv_name = rho.get(v.name)
            if iv_name is None or iv_name not in params:
                raise RenamingNotDerivable(
                    f"output guard of {t.target} reads context variable {v.name}, "
                    f"which gate {t.gate.name} does not rename to one of its "
                    f"interaction variables")
            subst[v] = params[iv_name]
        guard = App("and", (t.guard, substitute(og, subst)))
        switches.append(Switch(t.source, t.gate, guard, dict(t.assign), t.target))
    return DerivedSts(b, dict(ini), switches, renames)


# ---------------------------------------------------------------------------
# Finite interpretation
# ---------------------------------------------------------------------------

@dataclass
class Lts:
    """A bounded, concrete unfolding of a derived transition system."""

    sts: DerivedSts
    initial: StateKey
    states: dict[StateKey, dict[Var, Value]]
    locations: dict[StateKey, str]
    transitions: dict[StateKey, dict[GateValueKey, StateKey]]
    boundary: set[StateKey] = field(default_factory=set)

    def enabled(self, state: StateKey) -> list[GateValueKey]:
        return sorted(self.transitions.get(state, {}).keys())

    def step(self, state: StateKey, gv: "GateValue") -> StateKey | None:
        return self.transitions.get(state, {}).get(gv.key)

    def is_sink(self, state: StateKey) -> bool:
        return not self.transitions.get(state)


def _state_key(location: str, values: Mapping[Var, Value]) -> StateKey:
    return (location, tuple(sorted((v.name, values[v]) for v in values)))


def interpret(sts: DerivedSts, dom: DomainSpec, max_depth: int = 6) -> Lts:
    """Unfold the derived system into a transition graph over concrete
    states, exploring up to ``max_depth`` steps from the initial state.

    States first reached at the depth bound are marked as boundary states:
    their outgoing behavior is unexplored, not absent.
    """
    b = sts.base
    ini_vals = ini_valuation(sts.ini)
    init_key = _state_key(b.initial, ini_vals)
    states = {init_key: dict(ini_vals)}
    locations = {init_key: b.initial}
    transitions: dict[StateKey, dict[GateValueKey, StateKey]] = {}
    boundary: set[StateKey] = set()

    by_source: dict[str, list[Switch]] = {}
    for t in sts.switches:
        by_source.setdefault(t.source, []).append(t)
    values_per_gate = {g.name: gate_values(g, dom) for g in b.gates.values()}

    frontier = [init_key]
    depth = 0
    while frontier:
        if depth >= max_depth:
            boundary.update(frontier)
            break
        nxt = []
        for key in frontier:
            loc = locations[key]
            vals = states[key]
            out = transitions.setdefault(key, {})
            for t in by_source.get(loc, ()):
                for gv in values_per_gate[t.gate.name]:
                    combined = dict(vals)
                    combined.update(gv.valuation())
                    if not evaluate(t.guard, combined):
                        continue
                    succ_vals = dict(vals)
                    for v, e in t.assign.items():
                        succ_vals[v] = evaluate(e, combined)
                    succ_key = _state_key(t.target, succ_vals)
                    out[gv.key] = succ_key
                    if succ_key not in states:
                        states[succ_key] = succ_vals
                        locations[succ_key] = t.target
                        nxt.append(succ_key)
        frontier = nxt
        depth += 1
    return Lts(sts, init_key, states, locations, transitions, boundary)


# ---------------------------------------------------------------------------
# Test cases and verdicts
# ---------------------------------------------------------------------------

PASS = "pass"
FAIL = "fail"
INCONCLUSIVE = "inconclusive"


@dataclass
class TestCase:
    """The interpreted system extended with a pass set (states over open
    sink locations) and an implicit failure state, reached by unspecified
    outputs from states over closed locations."""

    lts: Lts
    pass_states: frozenset[StateKey]
    dom: DomainSpec
    ini: dict[Var, Term]

    @property
    def model(self) -> Bddts:
        return self.lts.sts.base

    def is_closed_state(self, state: StateKey) -> bool:
        return self.model.location(self.lts.locations[state]).is_closed

    def fail_edge(self, state: StateKey, gv: GateValue) -> bool:
        """Whether taking ``gv`` in ``state`` steps to the failure state."""
        return (state not in self.lts.boundary
                and self.is_closed_state(state)
                and gv.gate.is_output
                and self.lts.step(state, gv) is None)

    def gate_value(self, key: GateValueKey) -> GateValue:
        return GateValue(self.model.gates[key[0]], key[1])


@dataclass(frozen=True)
class Verdict:
    outcome: str  # pass | fail | inconclusive
    consumed: tuple[GateValue, ...]
    hit_bound: bool = False

    def __str__(self) -> str:
        tail = " (exploration bound reached)" if self.hit_bound else ""
        trace = " ".join(str(gv) for gv in self.consumed) or "<empty>"
        return f"{self.outcome}{tail} after {trace}"


def derive_test_case(b: Bddts, ini: Mapping[Var, Term], dom: DomainSpec,
                     max_depth: int = 6) -> TestCase:
    """Build the test case of an output-rich model for an initialization
    satisfying the input guard."""
    check_ini(b, ini)
    if not evaluate(b.input_guard, ini_valuation(ini)):
        raise IniViolatesInputGuard(
            "the initialization does not satisfy the input guard")
    sts = derive_sts(b, ini)
    lts = interpret(sts, dom, max_depth)
    passes = frozenset(
        key for key in lts.states
        if key not in lts.boundary
        and lts.is_sink(key)
        and b.location(lts.locations[key]).is_open)
    return TestCase(lts, passes, dom, dict(ini))


def verdict(tc: TestCase, omega: Sequence[GateValue]) -> Verdict:
    """Walk ``omega`` through the test case and report the first terminal
    event: a failure edge, landing in a pass state, or getting stuck
    (inconclusive).  The walk is deterministic, so at most one applies."""
    state = tc.lts.initial
    consumed: list[GateValue] = []
    for gv in omega:
        if state in tc.lts.boundary:
            return Verdict(INCONCLUSIVE, tuple(consumed), hit_bound=True)
        if state in tc.pass_states:
            return Verdict(PASS, tuple(consumed))
        succ = tc.lts.step(state, gv)
        if succ is None:
            if tc.fail_edge(state, gv):
                return Verdict(FAIL, tuple(consumed) + (gv,))
            return Verdict(INCONCLUSIVE, tuple(consumed))
        state = succ
        consumed.append(gv)
    if state in tc.lts.boundary:
        return Verdict(INCONCLUSIVE, tuple(consumed), hit_bound=True)
    if state in tc.pass_states:
        return Verdict(PASS, tuple(consumed))
    return Verdict(INCONCLUSIVE, tuple(consumed))


# ---------------------------------------------------------------------------
# Simulated system under test
# ---------------------------------------------------------------------------

@dataclass
class SimulatedSut:
    """A system under test simulated from a model's interpretation."""

    lts: Lts
    state: StateKey | None = None

    def __post_init__(self):
        if self.state is None:
            self.state = self.lts.initial

    @classmethod
    def from_model(cls, model: Bddts, ini: Mapping[Var, Term], dom: DomainSpec,
                   max_depth: int = 8) -> "SimulatedSut":
        return cls(interpret(derive_sts(model, ini), dom, max_depth))

    @property
    def model(self) -> Bddts:
        return self.lts.sts.base

    def enabled_outputs(self) -> list[GateValueKey]:
        return [k for k in self.lts.enabled(self.state)
                if self.model.gates[k[0]].is_output]

    def accepts(self, gv: GateValue) -> bool:
        return self.lts.step(self.state, gv) is not None

    def advance(self, gv: GateValue) -> None:
        succ = self.lts.step(self.state, gv)
        if succ is None:
            raise GateMismatch(f"the system under test cannot take {gv}")
        self.state = succ


def run_against_sut(tc: TestCase, sut: SimulatedSut, seed: int,
                    max_steps: int = 50) -> tuple[Verdict, list[GateValue]]:
    """Drive a test case against a simulated system under test.

    The system's enabled outputs take priority and are drawn with a seeded
    choice; otherwise the driver offers an input the test case lists and the
    system accepts.  Deterministic for a fixed seed; the transcript records
    every exchanged gate value.  An exhausted step budget is inconclusive.
    """
    if set(tc.model.gates) != set(sut.model.gates):
        raise GateMismatch("the test case and the system use different gates")
    rng = random.Random(seed)
    transcript: list[GateValue] = []
    state = tc.lts.initial
    for _ in range(max_steps):
        if state in tc.lts.boundary:
            return Verdict(INCONCLUSIVE, tuple(transcript), hit_bound=True), transcript
        if state in tc.pass_states:
            return Verdict(PASS, tuple(transcript)), transcript
        outs = sorted(sut.enabled_outputs())
        if outs:
            gv = tc.gate_value(outs[rng.randrange(len(outs))])
        else:
            offers = sorted(
                k for k in tc.lts.enabled(state)
                if tc.model.gates[k[0]].is_input and sut.accepts(tc.gate_value(k)))
            if not offers:
                return Verdict(INCONCLUSIVE, tuple(transcript)), transcript
            gv = tc.gate_value(offers[rng.randrange(len(offers))])
        sut.advance(gv)
        succ = tc.lts.step(state, gv)
        if succ is None:
            if tc.fail_edge(state, gv):
                return Verdict(FAIL, tuple(transcript) + (gv,)), transcript + [gv]
            return Verdict(INCONCLUSIVE, tuple(transcript)), transcript + [gv]
        state = succ
        transcript.append(gv)
    return Verdict(INCONCLUSIVE, tuple(transcript), hit_bound=True), transcript
