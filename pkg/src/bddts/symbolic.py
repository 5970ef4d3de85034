"""Symbolic semantics: path conditions, execution conditions, goal
implications, path subsumption and the bounded testing-equivalence checker.

A path condition accumulates the switch guards along a path, substituting
model variables by their symbolic values and upshifting time indices so that
the interaction variables of different steps stay apart: after a path of
length n, the variables of step i sit at time index n - i.  Model and context
variables are resolved against a ground initialization, so a path condition's
free variables are time-indexed interaction variables only.

In goal implications the output guard keeps its context variables free: a
context variable in an output guard speaks about the runtime state at that
moment, which the concrete semantics binds through the per-gate renaming.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

from .core import Bddts, Gate, Switch, compatible_models, outgoing
from .errors import IncompatibleModels, IniNotTotal, NonGroundImage, NotSaturated
from .saturation import is_saturated
from .syntax import format_term
from .terms import (
    App, Const, DomainSpec, TRUE, Term, Value, Var, _subst, big_and, big_or,
    evaluate, equiv_counterexample, implies, is_ground, sem_equiv, sem_implies,
    substitute, upshift, vars_of, MODEL,
)

Path = tuple[Switch, ...]


def sigma_of(path: Path) -> tuple[str, ...]:
    return tuple(sw.gate.name for sw in path)


def check_ini(b: Bddts, ini: Mapping[Var, Term]) -> None:
    missing = [v.name for v in b.variables if v not in ini]
    if missing:
        raise IniNotTotal(f"initialization misses variables {sorted(missing)}")
    for v, t in ini.items():
        if not is_ground(t):
            raise NonGroundImage(f"initialization of {v.name} is not ground")


def ini_valuation(ini: Mapping[Var, Term]) -> dict[Var, Value]:
    return {v: evaluate(t, {}) for v, t in ini.items()}


def enumerate_paths(b: Bddts, max_len: int) -> list[tuple[Path, str]]:
    """All structurally chainable switch sequences of length <= max_len from
    the initial location, each with its end location."""
    out: list[tuple[Path, str]] = [((), b.initial)]
    frontier: list[tuple[Path, str]] = [((), b.initial)]
    for _ in range(max_len):
        nxt = []
        for path, end in frontier:
            for sw in b.switches:
                if sw.source == end:
                    nxt.append((path + (sw,), sw.target))
        out.extend(nxt)
        frontier = nxt
        if not frontier:
            break
    return out


def path_assignment(path: Path, ini: Mapping[Var, Term]) -> dict[Var, Term]:
    """Symbolic values of all variables after walking ``path`` from ``ini``."""
    a, _ = _path_semantics(path, ini)
    return a


def path_condition(path: Path, ini: Mapping[Var, Term]) -> Term:
    """Accumulated guard condition of ``path`` under ``ini``."""
    _, eta = _path_semantics(path, ini)
    return eta


def _path_semantics(path: Path, ini: Mapping[Var, Term]) -> tuple[dict[Var, Term], Term]:
    for v, t in ini.items():
        if not is_ground(t):
            raise NonGroundImage(f"initialization of {v.name} is not ground")
    a: dict[Var, Term] = dict(ini)
    eta: Term = TRUE
    for sw in path:
        a, eta = _step(a, eta, sw)
    return a, eta


def _step(a: dict[Var, Term], eta: Term, sw: Switch) -> tuple[dict[Var, Term], Term]:
    shifted = {v: upshift(img) for v, img in a.items()}
    eta2 = App("and", (upshift(eta), _subst(sw.guard, shifted)))
    a2 = {v: _subst(sw.assign[v], shifted) if v in sw.assign else shifted[v]
          for v in a}
    return a2, eta2


def _unfold(b: Bddts, ini: Mapping[Var, Term], sigma: Sequence[str]
            ) -> list[tuple[str, dict[Var, Term], Term]]:
    """End location, symbolic assignment and path condition of every path
    realizing the interaction sequence ``sigma``."""
    frontier: list[tuple[str, dict[Var, Term], Term]] = [(b.initial, dict(ini), TRUE)]
    for gate_name in sigma:
        nxt = []
        for loc, a, eta in frontier:
            for sw in outgoing(b, loc, gate_name):
                a2, eta2 = _step_into(a, eta, sw)
                nxt.append((sw.target, a2, eta2))
        frontier = nxt
        if not frontier:
            break
    return frontier


def _step_into(a, eta, sw):
    return _step(a, eta, sw)


def execution_condition(b: Bddts, ini: Mapping[Var, Term], sigma: Sequence[str]) -> Term:
    """When is ``sigma`` executable: the input guard under ``ini`` conjoined
    with the disjunction of all matching path conditions (false if none).

    Meaningful as a semantics only on saturated models; callers that care
    check saturation once up front.
    """
    check_ini(b, ini)
    ig = substitute(b.input_guard, ini)
    etas = [eta for _, _, eta in _unfold(b, ini, sigma)]
    return App("and", (ig, big_or(etas)))


def goal_implication(b: Bddts, ini: Mapping[Var, Term], sigma: Sequence[str]) -> Term:
    """What must hold if ``sigma`` happens: for every matching path into a
    goal location, the path condition implies the output guard with model
    variables at their symbolic values (true if no such path).

    Context variables of the output guard stay free: they are observations
    to be compared with the runtime state at that point.
    """
    check_ini(b, ini)
    conjuncts = []
    for end, a, eta in _unfold(b, ini, sigma):
        og = b.output_guards.get(end)
        if og is None:
            continue
        model_part = {v: img for v, img in a.items() if v.kind == MODEL}
        conjuncts.append(implies(eta, substitute(og, model_part)))
    return big_and(conjuncts)


@dataclass(frozen=True)
class SymbolicSummary:
    sigma: tuple[str, ...]
    ec: Term
    gi: Term


def summaries(b: Bddts, ini: Mapping[Var, Term], max_sigma_len: int
              ) -> dict[tuple[str, ...], SymbolicSummary]:
    """Execution condition and goal implication for every interaction
    sequence up to the bound, sharing the unfolding across prefixes."""
    check_ini(b, ini)
    ig = substitute(b.input_guard, ini)
    by_source: dict[tuple[str, str], list[Switch]] = {}
    for sw in b.switches:
        by_source.setdefault((sw.source, sw.gate.name), []).append(sw)
    gate_names = sorted(b.gates)

    def summarize(sigma, frontier):
        conjuncts = []
        for end, a, eta in frontier:
            og = b.output_guards.get(end)
            if og is None:
                continue
            model_part = {v: img for v, img in a.items() if v.kind == MODEL}
            conjuncts.append(implies(eta, _subst(og, model_part)))
        return SymbolicSummary(
            sigma,
            App("and", (ig, big_or([eta for _, _, eta in frontier]))),
            big_and(conjuncts))

    out: dict[tuple[str, ...], SymbolicSummary] = {}
    level = {(): [(b.initial, dict(ini), TRUE)]}
    out[()] = summarize((), level[()])
    for _ in range(max_sigma_len):
        nxt: dict[tuple[str, ...], list] = {}
        for sigma, frontier in level.items():
            for gname in gate_names:
                extended = []
                for loc, a, eta in frontier:
                    for sw in by_source.get((loc, gname), ()):
                        a2, eta2 = _step(a, eta, sw)
                        extended.append((sw.target, a2, eta2))
                sigma2 = sigma + (gname,)
                nxt[sigma2] = extended
                out[sigma2] = summarize(sigma2, extended)
        level = nxt
    return out


def all_sigmas(gates: Sequence[Gate], max_len: int) -> Iterator[tuple[str, ...]]:
    """Interaction sequences up to a length bound, shortest first and
    lexicographic within a length."""
    names = sorted(g.name for g in gates)
    for n in range(max_len + 1):
        yield from itertools.product(names, repeat=n)


# ---------------------------------------------------------------------------
# Path subsumption and location paths
# ---------------------------------------------------------------------------

def path_subsumes(p1: Path, p2: Path, dom: DomainSpec) -> bool:
    """Pointwise: equal interactions, p2's guard implies p1's, and p2's
    assignment extends p1's up to semantic equality."""
    if len(p1) != len(p2):
        return False
    for t1, t2 in zip(p1, p2):
        if t1.gate.name != t2.gate.name:
            return False
        if not sem_implies(t2.guard, t1.guard, dom):
            return False
        for v, img in t1.assign.items():
            if v not in t2.assign or not sem_equiv(img, t2.assign[v], dom):
                return False
    return True


def location_paths(b: Bddts, sigma: Sequence[str], location: str) -> list[Path]:
    """Paths realizing ``sigma`` that end in ``location``."""
    b.location(location)
    frontier: list[tuple[Path, str]] = [((), b.initial)]
    for gate_name in sigma:
        nxt = []
        for path, end in frontier:
            for sw in outgoing(b, end, gate_name):
                nxt.append((path + (sw,), sw.target))
        frontier = nxt
    return [path for path, end in frontier if end == location]


def location_paths_subsuming(b: Bddts, sigma: Sequence[str], location: str,
                             path: Path, dom: DomainSpec) -> list[Path]:
    return [p for p in location_paths(b, sigma, location)
            if path_subsumes(path, p, dom)]


# ---------------------------------------------------------------------------
# Testing equivalence
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EquivCounterexample:
    ini_text: str
    sigma: tuple[str, ...]
    side: str  # "EC" | "GI"
    valuation: dict

    def __str__(self) -> str:
        val = ", ".join(f"{v}={x}" for v, x in sorted(
            ((str(v), x) for v, x in self.valuation.items())))
        return (f"{self.side} differs for ini {self.ini_text} and "
                f"sigma <{', '.join(self.sigma)}> under [{val}]")


@dataclass
class EquivReport:
    equivalent: bool
    bound: int
    checked: int = 0
    counterexample: EquivCounterexample | None = None

    def __str__(self) -> str:
        if self.equivalent:
            return f"equivalent up to bound {self.bound} ({self.checked} sequences checked)"
        return f"not equivalent: {self.counterexample}"


def testing_equivalent(left: Sequence[Bddts], right: Sequence[Bddts],
                       inis: Sequence[Mapping[Var, Term]], max_sigma_len: int,
                       dom: DomainSpec) -> EquivReport:
    """Compare the disjoined execution conditions and conjoined goal
    implications of two sets of saturated models, for every initialization
    given and every interaction sequence up to the bound.

    Models whose input guard rejects an initialization drop out of the folds
    for it; an empty side folds to false (EC) and true (GI).
    """
    models = list(left) + list(right)
    first = models[0]
    for b in models:
        if not compatible_models(first, b):
            raise IncompatibleModels(f"{b.name} is not compatible with {first.name}")
        rep = is_saturated(b, dom)
        if not rep.ok:
            raise NotSaturated(f"{b.name} is not saturated: {rep}")

    report = EquivReport(True, max_sigma_len)
    for ini in inis:
        for b in models:
            check_ini(b, ini)
        vals = ini_valuation(ini)
        left_r = [b for b in left if evaluate(b.input_guard, vals)]
        right_r = [b for b in right if evaluate(b.input_guard, vals)]
        left_sums = [summaries(b, ini, max_sigma_len) for b in left_r]
        right_sums = [summaries(b, ini, max_sigma_len) for b in right_r]
        ini_text = "{" + ", ".join(
            f"{v.name}={format_term(t)}" for v, t in sorted(ini.items(), key=lambda kv: kv[0].name)) + "}"
        for sigma in all_sigmas(first.interactions(), max_sigma_len):
            report.checked += 1
            ec_l = big_or([s[sigma].ec for s in left_sums])
            ec_r = big_or([s[sigma].ec for s in right_sums])
            cex = equiv_counterexample(ec_l, ec_r, dom)
            if cex is not None:
                report.equivalent = False
                report.counterexample = EquivCounterexample(ini_text, sigma, "EC", cex)
                return report
            gi_l = big_and([s[sigma].gi for s in left_sums])
            gi_r = big_and([s[sigma].gi for s in right_sums])
            cex = equiv_counterexample(gi_l, gi_r, dom)
            if cex is not None:
                report.equivalent = False
                report.counterexample = EquivCounterexample(ini_text, sigma, "GI", cex)
                return report
    return report
