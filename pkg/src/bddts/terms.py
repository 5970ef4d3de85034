"""Typed term algebra over finite domains.

Terms are immutable trees of constants, variables and operator applications.
Variables carry a time index so that one formula can talk about the value a
variable had several steps ago; ``upshift`` moves every occurrence one step
further into the past.  Semantic equivalence and implication are decided by
exhaustive enumeration of all valuations drawn from a :class:`DomainSpec`,
which is complete because every sort has a finite universe.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Union

import numpy as np

from .errors import (
    DomainTooLarge,
    IncompatibleAssignments,
    NonGroundImage,
    SortMismatch,
    UnboundVariable,
)

Value = Union[bool, int, str, tuple]

MODEL = "model"
CONTEXT = "context"
INTERACTION = "interaction"


# ---------------------------------------------------------------------------
# Sorts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Sort:
    """A named finite value domain.

    kind is one of ``bool``, ``int`` (bounded, lo..hi inclusive), ``enum``
    (explicit literals) or ``list`` (sequences over ``elem`` up to
    ``max_len`` elements).
    """

    name: str
    kind: str
    lo: int = 0
    hi: int = 0
    values: tuple[str, ...] = ()
    elem: "Sort | None" = None
    max_len: int = 0

    def __post_init__(self):
        if self.kind not in ("bool", "int", "enum", "list"):
            raise SortMismatch(f"unknown sort kind {self.kind!r}")
        if self.kind == "int" and self.lo > self.hi:
            raise SortMismatch(f"sort {self.name}: empty integer range {self.lo}..{self.hi}")
        if self.kind == "enum" and not self.values:
            raise SortMismatch(f"sort {self.name}: enumeration without values")
        if self.kind == "list":
            if self.elem is None:
                raise SortMismatch(f"sort {self.name}: list sort without element sort")
            if self.max_len < 0:
                raise SortMismatch(f"sort {self.name}: negative max length")


BOOL = Sort("bool", "bool")
# Pseudo-sort for integer literals and arithmetic results; never enumerated.
INT = Sort("int", "int", lo=0, hi=0)


def sorts_compatible(s1: Sort, s2: Sort) -> bool:
    """Whether values of the two sorts may be compared with each other."""
    if s1.name == s2.name:
        return True
    if s1.kind == "int" and s2.kind == "int":
        return True
    if s1.kind == "list" and s2.kind == "list":
        return sorts_compatible(s1.elem, s2.elem)
    return False


# ---------------------------------------------------------------------------
# Variables and terms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    """A sorted variable; (name, time) identifies it, time 0 is "now"."""

    name: str
    sort: Sort
    kind: str = MODEL
    time: int = 0

    def at(self, time: int) -> "Var":
        return Var(self.name, self.sort, self.kind, time)

    def shifted(self, by: int = 1) -> "Var":
        return Var(self.name, self.sort, self.kind, self.time + by)

    def __str__(self) -> str:
        return self.name if self.time == 0 else f"{self.name}@{self.time}"


@dataclass(frozen=True)
class Const:
    value: Value
    sort: Sort

    def __str__(self) -> str:
        return format_value(self.value)


@dataclass(frozen=True)
class App:
    op: str
    args: tuple["Term", ...]

    def __hash__(self):
        # terms are compared structurally all over the symbolic machinery;
        # caching the hash keeps repeated dictionary probes cheap
        try:
            return object.__getattribute__(self, "_hash")
        except AttributeError:
            h = hash((self.op, self.args))
            object.__setattr__(self, "_hash", h)
            return h


Term = Union[Const, Var, App]

TRUE = Const(True, BOOL)
FALSE = Const(False, BOOL)

# op -> (arity, result kind); argument typing is checked in type_check.
_BOOL_OPS = {"and", "or", "implies"}
_CMP_OPS = {"lt", "le", "gt", "ge"}
_ARITH_OPS = {"add", "sub"}
OPS = _BOOL_OPS | _CMP_OPS | _ARITH_OPS | {"not", "eq", "ne", "contains"}


def format_value(v: Value) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return "[" + ", ".join(format_value(x) for x in v) + "]"
    return str(v)


def intc(n: int, sort: Sort = INT) -> Const:
    return Const(int(n), sort)


def boolc(b: bool) -> Const:
    return TRUE if b else FALSE


def conj(*ts: Term) -> Term:
    return big_and(ts)


def disj(*ts: Term) -> Term:
    return big_or(ts)


def big_and(ts: Iterable[Term]) -> Term:
    return _balanced("and", [t for t in ts], TRUE)


def big_or(ts: Iterable[Term]) -> Term:
    return _balanced("or", [t for t in ts], FALSE)


def _balanced(op: str, ts: list[Term], unit: Const) -> Term:
    """Balanced n-ary fold; keeps term depth logarithmic in the fan-in."""
    if not ts:
        return unit
    if len(ts) == 1:
        return ts[0]
    mid = len(ts) // 2
    return App(op, (_balanced(op, ts[:mid], unit), _balanced(op, ts[mid:], unit)))


def neg(t: Term) -> Term:
    return App("not", (t,))


def implies(a: Term, b: Term) -> Term:
    return App("implies", (a, b))


def eq(a: Term, b: Term) -> Term:
    return App("eq", (a, b))


def ne(a: Term, b: Term) -> Term:
    return App("ne", (a, b))


def lt(a: Term, b: Term) -> Term:
    return App("lt", (a, b))


def le(a: Term, b: Term) -> Term:
    return App("le", (a, b))


def gt(a: Term, b: Term) -> Term:
    return App("gt", (a, b))


def ge(a: Term, b: Term) -> Term:
    return App("ge", (a, b))


def add(a: Term, b: Term) -> Term:
    return App("add", (a, b))


def sub(a: Term, b: Term) -> Term:
    return App("sub", (a, b))


def contains(lst: Term, elem: Term) -> Term:
    return App("contains", (lst, elem))


def sort_of(t: Term) -> Sort:
    if isinstance(t, Const):
        return t.sort
    if isinstance(t, Var):
        return t.sort
    if t.op in _BOOL_OPS or t.op in _CMP_OPS or t.op in ("not", "eq", "ne", "contains"):
        return BOOL
    if t.op in _ARITH_OPS:
        return sort_of(t.args[0])
    raise SortMismatch(f"unknown operator {t.op!r}")


def type_check(t: Term) -> Sort:
    """Check well-typedness, returning the term's sort."""
    if isinstance(t, Const):
        return t.sort
    if isinstance(t, Var):
        return t.sort
    arg_sorts = [type_check(a) for a in t.args]
    op = t.op
    if op == "not":
        if len(t.args) != 1 or arg_sorts[0].kind != "bool":
            raise SortMismatch("'not' takes one boolean argument")
        return BOOL
    if op in _BOOL_OPS:
        if len(t.args) != 2 or any(s.kind != "bool" for s in arg_sorts):
            raise SortMismatch(f"{op!r} takes two boolean arguments")
        return BOOL
    if op in ("eq", "ne"):
        if len(t.args) != 2 or not sorts_compatible(arg_sorts[0], arg_sorts[1]):
            raise SortMismatch(
                f"cannot compare {arg_sorts[0].name} with {arg_sorts[1].name}")
        return BOOL
    if op in _CMP_OPS or op in _ARITH_OPS:
        if len(t.args) != 2 or any(s.kind != "int" for s in arg_sorts):
            raise SortMismatch(f"{op!r} takes two integer arguments")
        return BOOL if op in _CMP_OPS else arg_sorts[0]
    if op == "contains":
        if len(t.args) != 2 or arg_sorts[0].kind != "list":
            raise SortMismatch("'contains' takes a list and an element")
        if not sorts_compatible(arg_sorts[0].elem, arg_sorts[1]):
            raise SortMismatch("'contains' element sort does not match the list")
        return BOOL
    raise SortMismatch(f"unknown operator {op!r}")


def vars_of(t: Term) -> frozenset[Var]:
    out: set[Var] = set()
    stack = [t]
    while stack:
        cur = stack.pop()
        if isinstance(cur, Var):
            out.add(cur)
        elif isinstance(cur, App):
            stack.extend(cur.args)
    return frozenset(out)


def is_ground(t: Term) -> bool:
    return not vars_of(t)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def evaluate(t: Term, valuation: Mapping[Var, Value]) -> Value:
    """Evaluate ``t`` under a valuation binding all of its variables."""
    if isinstance(t, Const):
        return t.value
    if isinstance(t, Var):
        try:
            return valuation[t]
        except KeyError:
            raise UnboundVariable(f"no value for variable {t}") from None
    op = t.op
    if op == "and":
        return _as_bool(evaluate(t.args[0], valuation)) and _as_bool(evaluate(t.args[1], valuation))
    if op == "or":
        return _as_bool(evaluate(t.args[0], valuation)) or _as_bool(evaluate(t.args[1], valuation))
    if op == "not":
        return not _as_bool(evaluate(t.args[0], valuation))
    if op == "implies":
        return (not _as_bool(evaluate(t.args[0], valuation))) or _as_bool(evaluate(t.args[1], valuation))
    a = evaluate(t.args[0], valuation)
    b = evaluate(t.args[1], valuation)
    if op == "eq":
        return a == b
    if op == "ne":
        return a != b
    if op in _CMP_OPS or op in _ARITH_OPS:
        if not isinstance(a, int) or not isinstance(b, int) or isinstance(a, bool) or isinstance(b, bool):
            raise SortMismatch(f"{op!r} applied to non-integers")
        return {"lt": a < b, "le": a <= b, "gt": a > b, "ge": a >= b,
                "add": a + b, "sub": a - b}[op]
    if op == "contains":
        if not isinstance(a, tuple):
            raise SortMismatch("'contains' applied to a non-list")
        return b in a
    raise SortMismatch(f"unknown operator {op!r}")


def _as_bool(v: Value) -> bool:
    if not isinstance(v, bool):
        raise SortMismatch(f"expected a boolean, got {v!r}")
    return v


# ---------------------------------------------------------------------------
# Substitution and upshifting
# ---------------------------------------------------------------------------

def substitute(t: Term, assignment: Mapping[Var, Term]) -> Term:
    """Replace every mapped variable by its image, in one simultaneous pass.

    Inserted terms are not substituted into again.
    """
    for v, image in assignment.items():
        if not sorts_compatible(v.sort, sort_of(image)):
            raise SortMismatch(f"assignment maps {v} to a term of sort {sort_of(image).name}")
    return _subst(t, assignment)


def _subst(t: Term, a: Mapping[Var, Term]) -> Term:
    if isinstance(t, Var):
        return a.get(t, t)
    if isinstance(t, Const):
        return t
    new_args = tuple(_subst(x, a) for x in t.args)
    if all(n is o for n, o in zip(new_args, t.args)):
        return t
    return App(t.op, new_args)


def upshift(t: Term) -> Term:
    """Shift the time index of every variable occurrence by one."""
    return _shift(t, None)


def upshift_vars(t: Term, names: Iterable) -> Term:
    """Shift only occurrences whose base name is in ``names``."""
    wanted = {n.name if isinstance(n, Var) else n for n in names}
    return _shift(t, wanted)


def _shift(t: Term, names: set[str] | None) -> Term:
    if isinstance(t, Var):
        if names is None or t.name in names:
            return t.shifted()
        return t
    if isinstance(t, Const):
        return t
    return App(t.op, tuple(_shift(x, names) for x in t.args))


def upshift_valuation(valuation: Mapping[Var, Value]) -> dict[Var, Value]:
    return {v.shifted(): x for v, x in valuation.items()}


def upshift_assignment(a: Mapping[Var, Term]) -> dict[Var, Term]:
    """Shift the images of an assignment (keys are left alone)."""
    return {v: upshift(img) for v, img in a.items()}


# ---------------------------------------------------------------------------
# Assignments
# ---------------------------------------------------------------------------

def assign_to_formula(a: Mapping[Var, Term]) -> Term:
    """Conjunction of ``v == a(v)``; the empty assignment yields true."""
    for v, img in a.items():
        if not is_ground(img):
            raise NonGroundImage(f"image of {v} is not ground: {img}")
    entries = sorted(a.items(), key=lambda kv: (kv[0].name, kv[0].time))
    return big_and(eq(v, img) for v, img in entries)


def compatible(a1: Mapping[Var, Term], a2: Mapping[Var, Term], dom: "DomainSpec") -> bool:
    """Semantic compatibility: images agree on every shared variable."""
    for v in a1.keys() & a2.keys():
        if not sem_equiv(a1[v], a2[v], dom):
            return False
    return True


def union_assign(a1: Mapping[Var, Term], a2: Mapping[Var, Term], dom: "DomainSpec") -> dict[Var, Term]:
    """Union of compatible assignments; shared keys keep the left image."""
    for v in a1.keys() & a2.keys():
        if not sem_equiv(a1[v], a2[v], dom):
            raise IncompatibleAssignments(
                f"assignments disagree on {v}: {a1[v]} vs {a2[v]}")
    out = dict(a2)
    out.update(a1)
    return out


# ---------------------------------------------------------------------------
# Finite-domain semantics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DomainSpec:
    """Finite universes per sort plus a hard cap on enumerated valuations."""

    sorts: Mapping[str, Sort]
    cap: int = 10 ** 6
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def universe(self, sort: Sort) -> tuple[Value, ...]:
        key = ("universe", sort)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        u = _materialize_universe(sort)
        self._cache[key] = u
        return u

    def valuation_count(self, variables: Iterable[Var]) -> int:
        n = 1
        for v in variables:
            n *= len(self.universe(v.sort))
        return n

    def valuations(self, variables: list[Var]) -> Iterator[dict[Var, Value]]:
        """All valuations of ``variables``; raises DomainTooLarge over the cap."""
        self._check_cap(variables)
        universes = [self.universe(v.sort) for v in variables]
        for combo in itertools.product(*universes):
            yield dict(zip(variables, combo))

    def _check_cap(self, variables: Iterable[Var]) -> None:
        n = self.valuation_count(variables)
        if n > self.cap:
            raise DomainTooLarge(
                f"{n} valuations exceed the cap of {self.cap}")


def _materialize_universe(sort: Sort) -> tuple[Value, ...]:
    if sort.kind == "bool":
        return (False, True)
    if sort.kind == "int":
        return tuple(range(sort.lo, sort.hi + 1))
    if sort.kind == "enum":
        return tuple(sort.values)
    if sort.kind == "list":
        elem = _materialize_universe(sort.elem)
        out: list[Value] = []
        for n in range(sort.max_len + 1):
            out.extend(itertools.product(elem, repeat=n))
        return tuple(out)
    raise SortMismatch(f"unknown sort kind {sort.kind!r}")


def _sorted_vars(ts: Iterable[Term]) -> list[Var]:
    vs: set[Var] = set()
    for t in ts:
        vs |= vars_of(t)
    return sorted(vs, key=lambda v: (v.name, v.time))


def _columns(variables: list[Var], dom: DomainSpec) -> tuple[dict[Var, np.ndarray], int]:
    """One value column per variable, spanning the full valuation grid."""
    dom._check_cap(variables)
    sizes = [len(dom.universe(v.sort)) for v in variables]
    total = 1
    for s in sizes:
        total *= s
    cols: dict[Var, np.ndarray] = {}
    stride = total
    for v, size in zip(variables, sizes):
        stride //= size
        idx = (np.arange(total) // stride) % size
        uni = dom.universe(v.sort)
        if v.sort.kind == "bool":
            base = np.array(uni, dtype=bool)
        elif v.sort.kind == "int":
            base = np.array(uni, dtype=np.int64)
        elif v.sort.kind == "enum":
            base = np.array(uni)
        else:
            base = np.empty(len(uni), dtype=object)
            base[:] = uni
        cols[v] = base[idx]
    return cols, total


def _vec(t: Term, cols: Mapping[Var, np.ndarray], n: int):
    """Evaluate over the whole grid; returns a scalar or an n-array."""
    if isinstance(t, Const):
        return t.value
    if isinstance(t, Var):
        try:
            return cols[t]
        except KeyError:
            raise UnboundVariable(f"no value for variable {t}") from None
    op = t.op
    if op == "not":
        a = _vec(t.args[0], cols, n)
        return ~a if isinstance(a, np.ndarray) else not a
    a = _vec(t.args[0], cols, n)
    b = _vec(t.args[1], cols, n)
    scalar = not isinstance(a, np.ndarray) and not isinstance(b, np.ndarray)
    if op == "and":
        return (a and b) if scalar else (np.bool_(a) & b if not isinstance(a, np.ndarray) else a & b)
    if op == "or":
        return (a or b) if scalar else (np.bool_(a) | b if not isinstance(a, np.ndarray) else a | b)
    if op == "implies":
        if scalar:
            return (not a) or b
        na = ~a if isinstance(a, np.ndarray) else np.bool_(not a)
        return na | b
    if op in ("eq", "ne"):
        if scalar:
            return a == b if op == "eq" else a != b
        if _objectlike(a) or _objectlike(b):
            aa, bb = _spread(a, n), _spread(b, n)
            res = np.fromiter((x == y for x, y in zip(aa, bb)), dtype=bool, count=n)
        else:
            res = a == b
        return res if op == "eq" else ~res
    if op in ("lt", "le", "gt", "ge", "add", "sub"):
        if scalar:
            return {"lt": a < b, "le": a <= b, "gt": a > b, "ge": a >= b,
                    "add": a + b, "sub": a - b}[op]
        return {"lt": lambda: a < b, "le": lambda: a <= b, "gt": lambda: a > b,
                "ge": lambda: a >= b, "add": lambda: a + b, "sub": lambda: a - b}[op]()
    if op == "contains":
        if scalar:
            return b in a
        aa, bb = _spread(a, n), _spread(b, n)
        return np.fromiter((y in x for x, y in zip(aa, bb)), dtype=bool, count=n)
    raise SortMismatch(f"unknown operator {op!r}")


def _objectlike(x) -> bool:
    if isinstance(x, np.ndarray):
        return x.dtype == object or x.dtype.kind == "U"
    return isinstance(x, (tuple, str))


def _spread(x, n: int):
    if isinstance(x, np.ndarray):
        return x
    return itertools.repeat(x, n)


def _bool_grid(t: Term, cols, n: int) -> np.ndarray:
    v = _vec(t, cols, n)
    if isinstance(v, np.ndarray):
        return v.astype(bool, copy=False)
    return np.full(n, bool(v))


def sem_equiv(t1: Term, t2: Term, dom: DomainSpec) -> bool:
    """Whether the two terms evaluate equally under every valuation."""
    return equiv_counterexample(t1, t2, dom) is None


def equiv_counterexample(t1: Term, t2: Term, dom: DomainSpec) -> dict[Var, Value] | None:
    """A valuation under which the terms differ, or None if equivalent."""
    if t1 == t2:
        return None
    key = ("equiv", t1, t2)
    cached = dom._cache.get(key)
    if cached is not None:
        return cached[0]
    if not sorts_compatible(sort_of(t1), sort_of(t2)):
        result = {}
    else:
        variables = _sorted_vars((t1, t2))
        cols, n = _columns(variables, dom)
        v1 = _vec(t1, cols, n)
        v2 = _vec(t2, cols, n)
        result = _first_difference(v1, v2, variables, cols, n)
    dom._cache[key] = (result,)
    return result


def _first_difference(v1, v2, variables, cols, n):
    arr1, arr2 = isinstance(v1, np.ndarray), isinstance(v2, np.ndarray)
    if not arr1 and not arr2:
        if v1 == v2:
            return None
        return {v: cols[v][0] for v in variables} if variables else {}
    if _objectlike(v1) or _objectlike(v2):
        diff = np.fromiter(
            (x != y for x, y in zip(_spread(v1, n), _spread(v2, n))),
            dtype=bool, count=n)
    else:
        a = v1 if arr1 else np.full(n, v1)
        b = v2 if arr2 else np.full(n, v2)
        diff = a != b
    idx = np.flatnonzero(diff)
    if idx.size == 0:
        return None
    i = int(idx[0])
    return {v: _pyval(cols[v][i]) for v in variables}


def _pyval(x) -> Value:
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.str_):
        return str(x)
    return x


def sem_implies(t1: Term, t2: Term, dom: DomainSpec) -> bool:
    """Semantic implication between boolean terms."""
    return implication_counterexample(t1, t2, dom) is None


def implication_counterexample(t1: Term, t2: Term, dom: DomainSpec) -> dict[Var, Value] | None:
    if sort_of(t1).kind != "bool" or sort_of(t2).kind != "bool":
        raise SortMismatch("semantic implication needs boolean terms")
    key = ("implies", t1, t2)
    cached = dom._cache.get(key)
    if cached is not None:
        return cached[0]
    variables = _sorted_vars((t1, t2))
    cols, n = _columns(variables, dom)
    bad = _bool_grid(t1, cols, n) & ~_bool_grid(t2, cols, n)
    idx = np.flatnonzero(bad)
    result = None
    if idx.size:
        i = int(idx[0])
        result = {v: _pyval(cols[v][i]) for v in variables}
    dom._cache[key] = (result,)
    return result


def satisfying_valuation(t: Term, dom: DomainSpec) -> dict[Var, Value] | None:
    """Some valuation making a boolean term true, or None if unsatisfiable."""
    return implication_counterexample(t, FALSE, dom)


def holds(t: Term, valuation: Mapping[Var, Value]) -> bool:
    return _as_bool(evaluate(t, valuation))


# ---------------------------------------------------------------------------
# Constant folding (display only; semantic operations never rely on it)
# ---------------------------------------------------------------------------

def fold(t: Term) -> Term:
    if not isinstance(t, App):
        return t
    args = tuple(fold(a) for a in t.args)
    op = t.op
    if op == "and":
        a, b = args
        if a == TRUE:
            return b
        if b == TRUE:
            return a
        if FALSE in (a, b):
            return FALSE
    elif op == "or":
        a, b = args
        if a == FALSE:
            return b
        if b == FALSE:
            return a
        if TRUE in (a, b):
            return TRUE
    elif op == "not" and isinstance(args[0], Const):
        return boolc(not args[0].value)
    elif op == "implies":
        a, b = args
        if a == FALSE or b == TRUE:
            return TRUE
        if a == TRUE:
            return b
    if all(isinstance(a, Const) for a in args):
        try:
            value = evaluate(App(op, args), {})
        except SortMismatch:
            return App(op, args)
        return Const(value, sort_of(App(op, args)))
    return App(op, args)
