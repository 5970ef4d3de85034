"""Disjunction composition of saturated models, and the isomorphism checker
used to state its algebraic laws.

The composition is a synchronous product on shared interactions: where both
operands can take an interaction the guards are conjoined and the assignments
united (rule 1); where only one can, its switch is carried over and the other
component is padded out (rules 2-1, 2-2).  Input guards are disjoined and
output guards of paired locations conjoined.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import (
    Bddts, Gate, Location, Switch, compatible_models, outgoing, CLOSED, OPEN,
)
from .errors import DomainTooLarge, IncompatibleAssignments, IncompatibleModels, NotSaturated
from .saturation import is_saturated
from .terms import (
    App, DomainSpec, Term, compatible, satisfying_valuation, sem_equiv,
    union_assign,
)

PAD = "⊥"


def compose_name(left: str | None, right: str | None) -> str:
    return f"({left or PAD},{right or PAD})"


@dataclass(frozen=True)
class ComposedLocation:
    """A product location; one side may be padding (but not both)."""

    left: str | None
    right: str | None

    def __post_init__(self):
        if self.left is None and self.right is None:
            raise ValueError("a composed location needs at least one real side")

    @property
    def name(self) -> str:
        return compose_name(self.left, self.right)

    def nature(self, b1: Bddts, b2: Bddts) -> str:
        if self.left is not None and self.right is not None:
            l1 = b1.location(self.left)
            l2 = b2.location(self.right)
            return CLOSED if (l1.is_closed and l2.is_closed) else OPEN
        real, owner = (self.left, b1) if self.left is not None else (self.right, b2)
        return owner.location(real).nature

    def output_guard(self, b1: Bddts, b2: Bddts) -> Term | None:
        og1 = b1.output_guards.get(self.left) if self.left is not None else None
        og2 = b2.output_guards.get(self.right) if self.right is not None else None
        if og1 is not None and og2 is not None:
            return App("and", (og1, og2))
        return og1 if og1 is not None else og2


def disjunction(b1: Bddts, b2: Bddts, dom: DomainSpec | None = None) -> Bddts:
    """Compose two compatible saturated models.

    Only locations reachable from the paired initial locations are
    materialized, and product switches whose conjoined guard is
    unsatisfiable over the domain are pruned: they could never fire, and
    keeping them would break the disjointness of the path decomposition
    (an unsatisfiable path is vacuously subsumed by every component path).
    A rule-1 pair with semantically clashing assignments is a hard error
    carrying the offending switch pair.
    """
    dom = dom or b1.domain()
    if not compatible_models(b1, b2):
        raise IncompatibleModels(
            f"{b1.name} and {b2.name} differ in gates or variables")
    for b in (b1, b2):
        rep = is_saturated(b, dom)
        if not rep.ok:
            raise NotSaturated(f"{b.name} is not saturated: {rep}")

    start = ComposedLocation(b1.initial, b2.initial)
    locations: dict[str, ComposedLocation] = {start.name: start}
    switches: list[Switch] = []
    seen_switch: set = set()
    queue = [start]
    while queue:
        loc = queue.pop(0)
        for gate in b1.interactions():
            t1s = outgoing(b1, loc.left, gate) if loc.left is not None else []
            t2s = outgoing(b2, loc.right, gate) if loc.right is not None else []
            if t1s and t2s:
                for t1 in t1s:
                    for t2 in t2s:
                        if not compatible(t1.assign, t2.assign, dom):
                            raise IncompatibleAssignments(
                                f"rule-1 clash on {gate.name} from {loc.name}: "
                                f"{t1.source}->{t1.target} vs {t2.source}->{t2.target}")
                        guard = App("and", (t1.guard, t2.guard))
                        if satisfying_valuation(guard, dom) is None:
                            continue
                        target = ComposedLocation(t1.target, t2.target)
                        sw = Switch(loc.name, gate, guard,
                                    union_assign(t1.assign, t2.assign, dom),
                                    target.name)
                        _emit(sw, target, locations, switches, seen_switch, queue)
            elif t1s:
                for t1 in t1s:
                    if satisfying_valuation(t1.guard, dom) is None:
                        continue
                    target = ComposedLocation(t1.target, None)
                    sw = Switch(loc.name, gate, t1.guard, dict(t1.assign), target.name)
                    _emit(sw, target, locations, switches, seen_switch, queue)
            elif t2s:
                for t2 in t2s:
                    if satisfying_valuation(t2.guard, dom) is None:
                        continue
                    target = ComposedLocation(None, t2.target)
                    sw = Switch(loc.name, gate, t2.guard, dict(t2.assign), target.name)
                    _emit(sw, target, locations, switches, seen_switch, queue)

    out_locations = {name: Location(name, cl.nature(b1, b2))
                     for name, cl in locations.items()}
    output_guards = {}
    for name, cl in locations.items():
        og = cl.output_guard(b1, b2)
        if og is not None:
            output_guards[name] = og

    return Bddts(
        sorts=dict(b1.sorts),
        variables=b1.variables,
        gates=dict(b1.gates),
        locations=out_locations,
        initial=start.name,
        input_guard=App("or", (b1.input_guard, b2.input_guard)),
        output_guards=output_guards,
        switches=switches,
        saturated=True,
        name=f"({b1.name} v {b2.name})",
    )


def _switch_key(sw: Switch):
    return (sw.source, sw.gate.name, sw.guard,
            frozenset(sw.assign.items()), sw.target)


def _emit(sw, target, locations, switches, seen_switch, queue) -> None:
    key = _switch_key(sw)
    if key in seen_switch:
        return
    seen_switch.add(key)
    switches.append(sw)
    if target.name not in locations:
        locations[target.name] = target
        queue.append(target)


# ---------------------------------------------------------------------------
# Isomorphism
# ---------------------------------------------------------------------------

@dataclass
class IsoWitness:
    location_map: dict[str, str]


def isomorphic(b1: Bddts, b2: Bddts, dom: DomainSpec | None = None,
               max_locations: int = 12) -> IsoWitness | None:
    """Search for a nature-preserving location bijection under which initial
    locations, input guards, output guards and switch labels all correspond
    (guards up to semantic equivalence, assignments up to compatibility).

    The search is backtracking over candidates partitioned by degree and
    nature; ``max_locations`` bounds the model size it will attempt.
    """
    dom = dom or b1.domain()
    if not compatible_models(b1, b2):
        raise IncompatibleModels("isomorphism needs compatible models")
    if len(b1.locations) != len(b2.locations) or len(b1.switches) != len(b2.switches):
        return None
    if len(b1.locations) > max_locations:
        raise DomainTooLarge(
            f"isomorphism search over {len(b1.locations)} locations exceeds the "
            f"cap of {max_locations}; raise it explicitly if intended")
    if not sem_equiv(b1.input_guard, b2.input_guard, dom):
        return None

    sig1 = _signatures(b1)
    sig2 = _signatures(b2)
    if sorted(sig1.values()) != sorted(sig2.values()):
        return None

    order = _assignment_order(b1)
    mapping: dict[str, str] = {}
    used: set[str] = set()

    def candidates(l1: str) -> list[str]:
        if l1 == b1.initial:
            return [b2.initial]
        for t1 in b1.switches:
            if t1.target == l1 and t1.source in mapping:
                cands = []
                for t2 in outgoing(b2, mapping[t1.source], t1.gate):
                    if t2.target in used or sig2[t2.target] != sig1[l1]:
                        continue
                    if _label_equiv(t1, t2, dom) and t2.target not in cands:
                        cands.append(t2.target)
                return cands
        return [m for m in b2.locations if m not in used and sig2[m] == sig1[l1]]

    def ok_pair(l1: str, l2: str) -> bool:
        if b1.locations[l1].nature != b2.locations[l2].nature:
            return False
        og1, og2 = b1.output_guards.get(l1), b2.output_guards.get(l2)
        if (og1 is None) != (og2 is None):
            return False
        if og1 is not None and not sem_equiv(og1, og2, dom):
            return False
        return True

    def search(i: int) -> bool:
        if i == len(order):
            return _verify(b1, b2, mapping, dom)
        l1 = order[i]
        for l2 in candidates(l1):
            if not ok_pair(l1, l2):
                continue
            mapping[l1] = l2
            used.add(l2)
            if _consistent_so_far(b1, b2, mapping, l1, dom) and search(i + 1):
                return True
            del mapping[l1]
            used.discard(l2)
        return False

    if search(0):
        return IsoWitness(dict(mapping))
    return None


def _signatures(b: Bddts) -> dict[str, tuple]:
    outs: dict[str, dict[str, int]] = {name: {} for name in b.locations}
    ins: dict[str, dict[str, int]] = {name: {} for name in b.locations}
    for t in b.switches:
        outs[t.source][t.gate.name] = outs[t.source].get(t.gate.name, 0) + 1
        ins[t.target][t.gate.name] = ins[t.target].get(t.gate.name, 0) + 1
    return {
        name: (b.locations[name].nature,
               name in b.output_guards,
               name == b.initial,
               tuple(sorted(outs[name].items())),
               tuple(sorted(ins[name].items())))
        for name in b.locations
    }


def _assignment_order(b: Bddts) -> list[str]:
    order = [b.initial]
    seen = {b.initial}
    i = 0
    while i < len(order):
        for t in b.switches:
            if t.source == order[i] and t.target not in seen:
                seen.add(t.target)
                order.append(t.target)
        i += 1
    for name in b.locations:
        if name not in seen:
            order.append(name)
    return order


def _label_equiv(t1: Switch, t2: Switch, dom: DomainSpec) -> bool:
    return (t1.gate.name == t2.gate.name
            and sem_equiv(t1.guard, t2.guard, dom)
            and compatible(t1.assign, t2.assign, dom))


def _consistent_so_far(b1: Bddts, b2: Bddts, mapping: dict[str, str],
                       fresh: str, dom: DomainSpec) -> bool:
    """Check switch correspondence for pairs whose endpoints are both mapped
    and involve the freshly mapped location."""
    for l1 in (fresh,):
        for t1 in b1.switches:
            if t1.source == l1 and t1.target in mapping:
                if not _has_match(b2, mapping, t1, dom):
                    return False
            if t1.target == l1 and t1.source in mapping:
                if not _has_match(b2, mapping, t1, dom):
                    return False
    return True


def _has_match(b2: Bddts, mapping: dict[str, str], t1: Switch, dom: DomainSpec) -> bool:
    for t2 in outgoing(b2, mapping[t1.source], t1.gate):
        if t2.target == mapping[t1.target] and _label_equiv(t1, t2, dom):
            return True
    return False


def _verify(b1: Bddts, b2: Bddts, mapping: dict[str, str], dom: DomainSpec) -> bool:
    """Exact final check: a label-preserving bijection between switch groups."""
    if mapping[b1.initial] != b2.initial:
        return False
    for l1 in b1.locations:
        for gate in b1.interactions():
            t1s = outgoing(b1, l1, gate)
            t2s = outgoing(b2, mapping[l1], gate)
            if len(t1s) != len(t2s):
                return False
            if not _match_groups(t1s, t2s, mapping, dom):
                return False
    return True


def _match_groups(t1s: list[Switch], t2s: list[Switch], mapping, dom) -> bool:
    if not t1s:
        return True
    t1 = t1s[0]
    for i, t2 in enumerate(t2s):
        if t2.target == mapping[t1.target] and _label_equiv(t1, t2, dom):
            if _match_groups(t1s[1:], t2s[:i] + t2s[i + 1:], mapping, dom):
                return True
    return False
