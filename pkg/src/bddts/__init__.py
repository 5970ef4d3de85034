"""Guarded transition systems for behavior-driven scenarios.

The library models Given-When-Then scenarios as deterministic guarded
transition systems with open/closed locations, saturates them to make the
meaning of unspecified behavior explicit, composes saturated models by
disjunction, gives them a symbolic semantics (execution conditions and goal
implications), and derives concrete test cases with pass/fail/inconclusive
verdicts against a simulated system under test.
"""

from .composition import IsoWitness, disjunction, isomorphic
from .concrete import (
    GateValue, SimulatedSut, TestCase, Verdict, derive_sts, derive_test_case,
    gate_seq_valuation, gate_values, hat_valuation, interpret, run_against_sut,
    verdict,
)
from .core import (
    Bddts, Gate, Location, Switch, active_vars, compatible_models,
    interactions_of, is_output_rich, outgoing, validate,
)
from .saturation import SaturationResult, is_saturated, saturate
from .scenario import load_scenario, parse_scenario
from .symbolic import (
    SymbolicSummary, enumerate_paths, execution_condition, goal_implication,
    location_paths, location_paths_subsuming, path_assignment, path_condition,
    path_subsumes, testing_equivalent,
)
from .syntax import format_term, parse_term
from .terms import (
    BOOL, Const, DomainSpec, Sort, Term, Var, assign_to_formula, compatible,
    evaluate, sem_equiv, sem_implies, substitute, union_assign, upshift,
    upshift_vars,
)

__version__ = "0.1.0"
