"""Textual term syntax: parser and printer.

Grammar (loosest binding first)::

    implies :=  or ("=>" implies)?
    or      :=  and ("||" and)*
    and     :=  cmp ("&&" cmp)*
    cmp     :=  sum (("==" | "!=" | "<" | "<=" | ">" | ">=") sum)?
    sum     :=  unary (("+" | "-") unary)*
    unary   :=  "!" unary | atom
    atom    :=  "true" | "false" | INT | "-" INT
             |  name | name "@" INT | SortName "::" Literal
             |  "contains" "(" term "," term ")"
             |  "[" (atom ("," atom)*)? "]" | "(" term ")"

Variables resolve against a symbol table of declared variables; ``name@i``
refers to the value of ``name`` i steps in the past.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Mapping

from .errors import ParseError, UnknownGateOrVariable
from .terms import (
    App, Const, Sort, Term, Var, contains, sort_of, type_check, INT, BOOL,
)

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>::|@|&&|\|\||=>|==|!=|<=|>=|<|>|\+|-|!|\(|\)|\[|\]|,|:=)"
    r"|(?P<bad>\S))"
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int


def tokenize(text: str, offset: int = 0) -> list[Token]:
    out = []
    for m in _TOKEN_RE.finditer(text):
        if m.lastgroup == "bad":
            raise ParseError(f"unexpected character {m.group('bad')!r}", col=offset + m.start("bad") + 1)
        out.append(Token(m.lastgroup, m.group(m.lastgroup), offset + m.start(m.lastgroup)))
    return out


class _Parser:
    def __init__(self, tokens: list[Token], sorts: Mapping[str, Sort],
                 variables: Mapping[str, Var], line: int = 0):
        self.tokens = tokens
        self.i = 0
        self.sorts = sorts
        self.variables = variables
        self.line = line

    def peek(self) -> Token | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def take(self) -> Token:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of term", line=self.line)
        self.i += 1
        return tok

    def expect(self, text: str) -> Token:
        tok = self.take()
        if tok.text != text:
            raise ParseError(f"expected {text!r}, found {tok.text!r}",
                             line=self.line, col=tok.pos + 1)
        return tok

    def at_op(self, *texts: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind == "op" and tok.text in texts

    def parse(self) -> Term:
        t = self.implies()
        tok = self.peek()
        if tok is not None:
            raise ParseError(f"trailing input {tok.text!r}", line=self.line, col=tok.pos + 1)
        return t

    def implies(self) -> Term:
        left = self.disjunction()
        if self.at_op("=>"):
            self.take()
            return App("implies", (left, self.implies()))
        return left

    def disjunction(self) -> Term:
        t = self.conjunction()
        while self.at_op("||"):
            self.take()
            t = App("or", (t, self.conjunction()))
        return t

    def conjunction(self) -> Term:
        t = self.comparison()
        while self.at_op("&&"):
            self.take()
            t = App("and", (t, self.comparison()))
        return t

    _CMP = {"==": "eq", "!=": "ne", "<": "lt", "<=": "le", ">": "gt", ">=": "ge"}

    def comparison(self) -> Term:
        t = self.summation()
        tok = self.peek()
        if tok is not None and tok.kind == "op" and tok.text in self._CMP:
            self.take()
            return App(self._CMP[tok.text], (t, self.summation()))
        return t

    def summation(self) -> Term:
        t = self.unary()
        while self.at_op("+", "-"):
            op = self.take().text
            t = App("add" if op == "+" else "sub", (t, self.unary()))
        return t

    def unary(self) -> Term:
        if self.at_op("!"):
            self.take()
            return App("not", (self.unary(),))
        return self.atom()

    def atom(self) -> Term:
        tok = self.take()
        if tok.kind == "num":
            return Const(int(tok.text), INT)
        if tok.kind == "op" and tok.text == "-":
            num = self.take()
            if num.kind != "num":
                raise ParseError("expected an integer after '-'", line=self.line, col=num.pos + 1)
            return Const(-int(num.text), INT)
        if tok.kind == "op" and tok.text == "(":
            t = self.implies()
            self.expect(")")
            return t
        if tok.kind == "op" and tok.text == "[":
            return self.list_literal()
        if tok.kind == "name":
            if tok.text == "true":
                return Const(True, BOOL)
            if tok.text == "false":
                return Const(False, BOOL)
            if tok.text == "contains":
                self.expect("(")
                lst = self.implies()
                self.expect(",")
                el = self.implies()
                self.expect(")")
                return contains(lst, el)
            if self.at_op("::"):
                self.take()
                lit = self.take()
                return self.enum_const(tok, lit)
            if self.at_op("@"):
                self.take()
                idx = self.take()
                if idx.kind != "num":
                    raise ParseError("expected a time index after '@'",
                                     line=self.line, col=idx.pos + 1)
                return self.variable(tok).at(int(idx.text))
            return self.variable(tok)
        raise ParseError(f"unexpected token {tok.text!r}", line=self.line, col=tok.pos + 1)

    def variable(self, tok: Token) -> Var:
        v = self.variables.get(tok.text)
        if v is None:
            raise UnknownGateOrVariable(f"unknown variable {tok.text!r}",
                                        line=self.line, col=tok.pos + 1)
        return v

    def enum_const(self, sort_tok: Token, lit: Token) -> Const:
        sort = self.sorts.get(sort_tok.text)
        if sort is None or sort.kind != "enum":
            raise ParseError(f"unknown enumeration sort {sort_tok.text!r}",
                             line=self.line, col=sort_tok.pos + 1)
        if lit.text not in sort.values:
            raise ParseError(f"{lit.text!r} is not a value of {sort.name}",
                             line=self.line, col=lit.pos + 1)
        return Const(lit.text, sort)

    def list_literal(self) -> Const:
        items: list[Const] = []
        if not self.at_op("]"):
            while True:
                item = self.atom()
                if not isinstance(item, Const):
                    raise ParseError("list literals may only contain constants",
                                     line=self.line)
                items.append(item)
                if self.at_op(","):
                    self.take()
                    continue
                break
        self.expect("]")
        elem_sort = items[0].sort if items else INT
        sort = Sort("<list>", "list", elem=elem_sort, max_len=max(len(items), 1))
        return Const(tuple(i.value for i in items), sort)


def parse_term(text: str, sorts: Mapping[str, Sort], variables: Mapping[str, Var],
               line: int = 0) -> Term:
    """Parse and type-check a term against declared sorts and variables."""
    term = _Parser(tokenize(text), sorts, variables, line).parse()
    type_check(term)
    return term


_PREC = {
    "implies": 1, "or": 2, "and": 3,
    "eq": 4, "ne": 4, "lt": 4, "le": 4, "gt": 4, "ge": 4,
    "add": 5, "sub": 5, "not": 6,
}
_SYM = {
    "implies": "=>", "or": "||", "and": "&&",
    "eq": "==", "ne": "!=", "lt": "<", "le": "<=", "gt": ">", "ge": ">=",
    "add": "+", "sub": "-",
}


def format_term(t: Term) -> str:
    """Render a term in the concrete syntax accepted by :func:`parse_term`."""
    return _fmt(t, 0)


def _fmt(t: Term, parent_prec: int) -> str:
    if isinstance(t, Var):
        return str(t)
    if isinstance(t, Const):
        if isinstance(t.value, str) and t.sort.kind == "enum":
            return f"{t.sort.name}::{t.value}"
        if isinstance(t.value, tuple):
            return "[" + ", ".join(
                _fmt(Const(v, t.sort.elem or INT), 0) for v in t.value) + "]"
        return str(t)
    if t.op == "contains":
        return f"contains({_fmt(t.args[0], 0)}, {_fmt(t.args[1], 0)})"
    if t.op == "not":
        inner = _fmt(t.args[0], _PREC["not"])
        return f"!{inner}"
    prec = _PREC[t.op]
    if t.op == "implies":
        left, right = _fmt(t.args[0], prec + 1), _fmt(t.args[1], prec)
    elif prec == 4:
        left, right = _fmt(t.args[0], prec + 1), _fmt(t.args[1], prec + 1)
    else:
        left, right = _fmt(t.args[0], prec), _fmt(t.args[1], prec + 1)
    out = f"{left} {_SYM[t.op]} {right}"
    return f"({out})" if prec < parent_prec else out
