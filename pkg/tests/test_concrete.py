"""Concrete pipeline: gate-value valuations, guard embedding, bounded
interpretation, test cases, verdicts, and the simulated-system driver."""

import copy
import itertools

import pytest

from bddts.concrete import (
    FAIL, INCONCLUSIVE, PASS, GateValue, SimulatedSut, all_gate_values,
    derive_sts, derive_test_case, gate_seq_valuation, gate_values,
    hat_valuation, interpret, run_against_sut, verdict,
)
from bddts.core import Bddts, Gate, Location, Switch
from bddts.errors import (
    GateMismatch, IniViolatesInputGuard, NotOutputRich, RenamingNotDerivable,
    RenamingUndefined,
)
from bddts.saturation import BOT, TOP, saturate
from bddts.terms import (
    BOOL, App, Const, Sort, Var, conj, eq, evaluate, gt, intc, neg,
)


@pytest.fixture(scope="module")
def sat_door(door, door_dom):
    return saturate(door, door_dom).model


@pytest.fixture(scope="module")
def door_tc(sat_door, door_dom, door_ini):
    return derive_test_case(sat_door, door_ini, door_dom, max_depth=6)


def gv(model, gate, *values):
    return GateValue(model.gates[gate], tuple(values))


# -- valuations of gate-value sequences ---------------------------------------------

def test_empty_sequence_valuation():
    assert gate_seq_valuation(()) == {}


def test_two_step_sequence_valuation(door):
    omega = (gv(door, "verify_badge", 1234), gv(door, "trigger_door", 1, "OPEN"))
    theta = gate_seq_valuation(omega)
    badge = door.gates["verify_badge"].params[0]
    did, cmd = door.gates["trigger_door"].params
    assert theta == {badge.at(1): 1234, did: 1, cmd: "OPEN"}


def test_hat_valuation_binds_the_observed_door(door):
    omega = (gv(door, "verify_badge", 1234), gv(door, "trigger_door", 1, "OPEN"))
    hat = hat_valuation(omega, door.renames(), door.context_vars)
    door_var = next(v for v in door.variables if v.name == "Door")
    assert hat[door_var] == "OPEN"
    # the plain sequence valuation is contained in the hat valuation
    for k, v in gate_seq_valuation(omega).items():
        assert hat[k] == v


def test_hat_valuation_needs_a_last_gate(door):
    with pytest.raises(RenamingUndefined):
        hat_valuation((), door.renames(), door.context_vars)


# -- derived system -----------------------------------------------------------------

def test_derive_sts_embeds_the_output_guard(sat_door, door_ini):
    sts = derive_sts(sat_door, door_ini)
    trig = [t for t in sts.switches if t.target == "2"]
    assert len(trig) == 1
    orig = [t for t in sat_door.switches if t.target == "2"][0]
    cmd = sat_door.gates["trigger_door"].params[1]
    assert trig[0].guard == App("and", (orig.guard, eq(cmd, Const("OPEN", cmd.sort))))
    # switches into non-goal locations are copied verbatim
    verify = [t for t in sts.switches if t.target == "1"]
    assert verify[0].guard == [t for t in sat_door.switches if t.target == "1"][0].guard
    assert all(t.assign == o.assign for t, o in zip(sts.switches, sat_door.switches))


def test_derive_sts_requires_renameable_context(door, door_ini):
    broken = copy.deepcopy(door)
    broken.gates["trigger_door"] = Gate(
        "trigger_door", "out", broken.gates["trigger_door"].params, ())
    for t in broken.switches:
        if t.gate.name == "trigger_door":
            t.gate = broken.gates["trigger_door"]
    with pytest.raises(RenamingNotDerivable):
        derive_sts(broken, door_ini)


def test_derive_sts_requires_output_richness(door, door_ini):
    broken = copy.deepcopy(door)
    broken.output_guards["1"] = Const(True, BOOL)  # input switch feeds a goal
    with pytest.raises(NotOutputRich):
        derive_sts(broken, door_ini)


# -- interpretation -----------------------------------------------------------------

def test_interpret_empty_model():
    s = Sort("s", "int", lo=0, hi=1)
    mv = Var("m", s, "model")
    b = Bddts(sorts={"s": s}, variables=(mv,), gates={},
              locations={"a": Location("a", "open")}, initial="a",
              input_guard=Const(True, BOOL), output_guards={}, switches=[],
              name="empty")
    lts = interpret(derive_sts(b, {mv: Const(0, s)}), b.domain())
    assert len(lts.states) == 1
    assert lts.transitions[lts.initial] == {}


def test_interpret_door_enables_only_the_authorized_badge(sat_door, door_dom, door_ini):
    lts = interpret(derive_sts(sat_door, door_ini), door_dom, max_depth=3)
    init_edges = lts.transitions[lts.initial]
    to_one = [k for k, dst in init_edges.items() if dst[0] == "1"]
    assert to_one == [("verify_badge", (1234,))]
    to_top = sorted(k for k, dst in init_edges.items() if dst[0] == TOP)
    assert to_top == [("verify_badge", (1233,)), ("verify_badge", (1235,))]
    # the mismatching trigger value is not a transition anywhere
    state_one = init_edges[("verify_badge", (1234,))]
    assert ("trigger_door", (1, "CLOSED")) not in lts.transitions[state_one]
    assert ("trigger_door", (1, "OPEN")) in lts.transitions[state_one]


def test_interpret_false_guard_has_no_transitions(door, door_dom, door_ini):
    b = copy.deepcopy(door)
    b.switches[0].guard = Const(False, BOOL)
    lts = interpret(derive_sts(b, door_ini), door_dom)
    assert all(dst[0] != "1" for dst in lts.transitions[lts.initial].values())


def test_interpret_respects_depth_bound(sat_door, door_dom, door_ini):
    lts = interpret(derive_sts(sat_door, door_ini), door_dom, max_depth=1)
    assert lts.boundary
    assert all(key not in lts.transitions for key in lts.boundary)


# -- test cases and verdicts ---------------------------------------------------------

def test_door_testcase_shape(door_tc):
    top_states = [s for s in door_tc.lts.states if s[0] == TOP]
    assert top_states and all(s in door_tc.pass_states for s in top_states)
    goal_states = [s for s in door_tc.lts.states if s[0] == "2"]
    assert goal_states and all(s in door_tc.pass_states for s in goal_states)
    # the initial state is an open non-sink: neither passing nor failing
    assert door_tc.lts.initial not in door_tc.pass_states
    assert not door_tc.fail_edge(door_tc.lts.initial,
                                 gv(door_tc.model, "trigger_door", 1, "OPEN"))


def test_verdict_pass_on_the_conforming_run(door_tc):
    m = door_tc.model
    omega = (gv(m, "verify_badge", 1234), gv(m, "trigger_door", 1, "OPEN"))
    assert verdict(door_tc, omega).outcome == PASS


def test_verdict_fail_on_the_wrong_command(door_tc):
    m = door_tc.model
    omega = (gv(m, "verify_badge", 1234), gv(m, "trigger_door", 1, "CLOSED"))
    v = verdict(door_tc, omega)
    assert v.outcome == FAIL
    assert v.consumed == omega  # the failing output ends the witness


def test_verdict_inconclusive_on_unlisted_input(door_tc):
    m = door_tc.model
    omega = (gv(m, "verify_badge", 1234), gv(m, "verify_badge", 1234))
    assert verdict(door_tc, omega).outcome == INCONCLUSIVE


def test_verdict_pass_wins_once_in_a_pass_state(door_tc):
    m = door_tc.model
    omega = (gv(m, "verify_badge", 1233), gv(m, "trigger_door", 1, "CLOSED"))
    # the first value wanders to the anything-allowed sink, which passes
    assert verdict(door_tc, omega).outcome == PASS


def test_verdict_deterministic(door_tc):
    m = door_tc.model
    omega = (gv(m, "verify_badge", 1234), gv(m, "trigger_door", 1, "CLOSED"))
    assert verdict(door_tc, omega) == verdict(door_tc, omega)


def test_testcase_rejects_guard_violating_ini(sat_door, door_dom, door):
    bad = {v: Const({"A_badge": (), "P_badge": 1234, "AccessGranted": False,
                     "Door": "CLOSED"}[v.name], v.sort) for v in door.variables}
    with pytest.raises(IniViolatesInputGuard):
        derive_test_case(sat_door, bad, door_dom)


# -- driving a simulated system -------------------------------------------------------

def test_conforming_sut_never_fails(door_tc, sat_door, door_dom, door_ini):
    for seed in range(40):
        sut = SimulatedSut.from_model(sat_door, door_ini, door_dom)
        result, transcript = run_against_sut(door_tc, sut, seed)
        assert result.outcome == PASS, (seed, str(result))


def test_mutant_sut_fails_within_two_steps(door_tc, door_mutant, door_dom, door_ini):
    saturated_mutant = saturate(door_mutant, door_dom).model
    failed = 0
    for seed in range(40):
        sut = SimulatedSut.from_model(saturated_mutant, door_ini, door_dom)
        result, transcript = run_against_sut(door_tc, sut, seed)
        assert result.outcome in (PASS, FAIL)
        if result.outcome == FAIL:
            failed += 1
            assert len(transcript) <= 2
            assert transcript[-1].key == ("trigger_door", (1, "CLOSED"))
    assert failed > 0


def test_halting_sut_is_inconclusive_or_pass(door_tc, door, door_dom, door_ini):
    # a system with no behavior at all: never emits, accepts nothing
    halted = copy.deepcopy(door)
    halted.switches = []
    sut = SimulatedSut.from_model(saturate(halted, door_dom).model, door_ini, door_dom)
    result, transcript = run_against_sut(door_tc, sut, seed=1)
    assert result.outcome == INCONCLUSIVE
    assert transcript == []


def test_gate_mismatch_rejected(door_tc, door_dom):
    s = Sort("s", "int", lo=0, hi=1)
    mv = Var("m", s, "model")
    other = Bddts(sorts={"s": s}, variables=(mv,), gates={},
                  locations={"a": Location("a", "open")}, initial="a",
                  input_guard=Const(True, BOOL), output_guards={}, switches=[],
                  name="alien")
    sut = SimulatedSut.from_model(other, {mv: Const(0, s)}, other.domain())
    with pytest.raises(GateMismatch):
        run_against_sut(door_tc, sut, seed=0)


def test_run_is_deterministic_per_seed(door_tc, sat_door, door_dom, door_ini):
    runs = []
    for _ in range(2):
        sut = SimulatedSut.from_model(sat_door, door_ini, door_dom)
        runs.append(run_against_sut(door_tc, sut, seed=7))
    assert runs[0][0] == runs[1][0]
    assert [gv.key for gv in runs[0][1]] == [gv.key for gv in runs[1][1]]
