"""Recursive-descent parser for the theory DSL.

Grammar (see docs/grammar.md)::

    theory    := statement*
    statement := 'sort' NAME
               | 'ineq' NAME
               | 'fun' NAME ':' [sorts] '->' NAME
               | 'rel' NAME [':' sorts]
               | 'axiom' [ctx] '|' formula '|-' formula
    sorts     := NAME (('x' | '*') NAME)*
    ctx       := NAME ':' NAME (',' NAME ':' NAME)*

A statement starts with a keyword at the beginning of a line; any other line
continues the previous statement. ``#`` starts a comment.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .syntax import (BOT, TOP, And, App, CoherenceError, Eq, Exists, Forall, Formula,
                     FormulaInContext, FunctionSymbol, Implies, Neq, Not, Or, Rel,
                     RelationSymbol, Sequent, Signature, SortCheckError, Term, Theory, Var,
                     check_formula, is_coherent)

KEYWORDS = ("sort", "ineq", "fun", "rel", "axiom")
RESERVED = {"true", "false", "exists", "forall", "not"}
RESERVED_SORTS = RESERVED | {"x"}


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<op>\|-|->|!=|[|&=(),:.*×])
  | (?P<name>[A-Za-z_][A-Za-z0-9_']*)
""", re.VERBOSE)


def tokenize(text: str, line: int = 1, col: int = 1) -> list[Token]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        s = m.group()
        if m.lastgroup == "op":
            out.append(Token("op", "x" if s in "*×" else s, line, col))
        elif m.lastgroup == "name":
            out.append(Token("name", s, line, col))
        for ch in s:
            if ch == "\n":
                line, col = line + 1, 1
            else:
                col += 1
        pos = m.end()
    out.append(Token("eof", "", line, col))
    return out


class _Parser:
    def __init__(self, tokens: list[Token], sig: Signature, neq_sorts: set[str]):
        self.toks = tokens
        self.i = 0
        self.sig = sig
        self.neq_sorts = neq_sorts

    # token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(msg, tok.line, tok.col)

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind != "eof"

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        return self.advance()

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def name(self) -> Token:
        if self.tok.kind != "name":
            raise self.error(f"expected a name, found {self.tok.text or 'end of input'!r}")
        return self.advance()

    def sort_name(self) -> str:
        t = self.name()
        if t.text not in self.sig.sorts:
            raise SortCheckError(f"undeclared sort {t.text} (line {t.line}, column {t.col})")
        return t.text

    # contexts and binders
    def binders(self, stop: str) -> list[Var]:
        out: list[Var] = []
        if self.at(stop):
            return out
        while True:
            v = self.name()
            if v.text in RESERVED:
                raise self.error(f"reserved word {v.text!r} used as variable", v)
            if self.sig.has_function(v.text) or self.sig.has_relation(v.text):
                raise self.error(f"variable {v.text!r} shadows a signature symbol", v)
            self.expect(":")
            out.append(Var(v.text, self.sort_name()))
            if not self.at(","):
                return out
            self.advance()

    # formulas
    def formula(self, scope: dict[str, Var]) -> Formula:
        left = self.disjunction(scope)
        if self.at("->"):
            self.advance()
            return Implies(left, self.formula(scope))
        return left

    def disjunction(self, scope) -> Formula:
        parts = [self.conjunction(scope)]
        while self.at("|"):
            self.advance()
            parts.append(self.conjunction(scope))
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conjunction(self, scope) -> Formula:
        parts = [self.unary(scope)]
        while self.at("&"):
            self.advance()
            parts.append(self.unary(scope))
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def unary(self, scope) -> Formula:
        if self.at("not"):
            self.advance()
            return Not(self.unary(scope))
        if self.at("exists") or self.at("forall"):
            q = Exists if self.advance().text == "exists" else Forall
            vs = self.binders(".")
            if not vs:
                raise self.error("quantifier without variables")
            self.expect(".")
            inner = dict(scope)
            inner.update({v.name: v for v in vs})
            body = self.formula(inner)
            for v in reversed(vs):
                body = q(v, body)
            return body
        return self.primary(scope)

    def primary(self, scope) -> Formula:
        if self.at("("):
            self.advance()
            f = self.formula(scope)
            self.expect(")")
            return f
        if self.at("true"):
            self.advance()
            return TOP
        if self.at("false"):
            self.advance()
            return BOT
        t = self.tok
        if t.kind == "name" and t.text not in scope and self.sig.has_relation(t.text):
            self.advance()
            rel = self.sig.relation(t.text)
            args: list[Term] = []
            if self.at("("):
                args = self.term_list(scope)
            if len(args) != len(rel.args):
                raise SortCheckError(f"{rel.name} expects {len(rel.args)} arguments "
                                     f"(line {t.line}, column {t.col})")
            return Rel(rel.name, tuple(args))
        left = self.term(scope)
        op = self.tok
        if op.text not in ("=", "!="):
            raise self.error(f"expected '=' or '!=' after term {left}, found {op.text or 'end of input'!r}")
        self.advance()
        right = self.term(scope)
        if left.sort != right.sort:
            raise SortCheckError(f"ill-sorted atom {left} {op.text} {right}: "
                                 f"{left.sort} vs {right.sort} (line {op.line}, column {op.col})")
        if op.text == "=":
            return Eq(left, right)
        self.neq_sorts.add(left.sort)
        return Neq(left, right)

    def term_list(self, scope) -> list[Term]:
        self.expect("(")
        args = [self.term(scope)]
        while self.at(","):
            self.advance()
            args.append(self.term(scope))
        self.expect(")")
        return args

    def term(self, scope) -> Term:
        t = self.name()
        if t.text in scope:
            return scope[t.text]
        if not self.sig.has_function(t.text):
            raise SortCheckError(f"unknown variable or function {t.text!r} "
                                 f"(line {t.line}, column {t.col})")
        fn = self.sig.function(t.text)
        args = self.term_list(scope) if self.at("(") else []
        if len(args) != len(fn.args):
            raise SortCheckError(f"{fn.name} expects {len(fn.args)} arguments, got {len(args)} "
                                 f"(line {t.line}, column {t.col})")
        for a, s in zip(args, fn.args):
            if a.sort != s:
                raise SortCheckError(f"argument {a} of {fn.name} has sort {a.sort}, expected {s} "
                                     f"(line {t.line}, column {t.col})")
        return App(fn.name, tuple(args), fn.result)

    def end(self):
        if self.tok.kind != "eof":
            raise self.error(f"unexpected {self.tok.text!r}")


def _statements(text: str) -> list[tuple[str, int, str]]:
    """Split into (keyword, line number, rest-of-statement) chunks."""
    stmts: list[list] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        stripped = line.strip()
        if not stripped:
            continue
        word = stripped.split(None, 1)[0]
        if word in KEYWORDS:
            col = line.index(word) + 1
            stmts.append([word, lineno, col + len(word), line[col - 1 + len(word):]])
        elif stmts:
            stmts[-1][3] += "\n" + line
        else:
            raise ParseError(f"expected a statement keyword, found {word!r}", lineno, line.index(word) + 1)
    return [(w, ln, col, rest) for w, ln, col, rest in stmts]


def parse_theory(text: str, name: str = "", fragment: str = "") -> Theory:
    sorts: list[str] = []
    ineq: set[str] = set()
    functions: list[FunctionSymbol] = []
    relations: list[RelationSymbol] = []
    axiom_chunks = []
    for word, line, col, rest in _statements(text):
        toks = tokenize(rest, line, col)
        p = _Parser(toks, Signature(tuple(sorts)), ineq)
        if word == "sort":
            s = p.name()
            if s.text in RESERVED_SORTS:
                raise p.error(f"reserved word {s.text!r} used as sort", s)
            p.end()
            sorts.append(s.text)
        elif word == "ineq":
            ineq.add(p.sort_name())
            p.end()
        elif word in ("fun", "rel"):
            sym = p.name()
            args: list[str] = []
            if word == "rel" and p.tok.kind == "eof":
                relations.append(RelationSymbol(sym.text, ()))
                continue
            p.expect(":")
            if not (word == "fun" and p.at("->")) and p.tok.kind != "eof":
                args.append(p.sort_name())
                while p.at("x"):
                    p.advance()
                    args.append(p.sort_name())
            if word == "fun":
                p.expect("->")
                functions.append(FunctionSymbol(sym.text, tuple(args), p.sort_name()))
            else:
                relations.append(RelationSymbol(sym.text, tuple(args)))
            p.end()
        else:
            axiom_chunks.append(toks)
    sig = Signature(tuple(sorts), tuple(functions), tuple(relations))
    axioms = []
    for toks in axiom_chunks:
        p = _Parser(toks, sig, ineq)
        ctx = p.binders("|")
        p.expect("|")
        scope = {v.name: v for v in ctx}
        ante = p.formula(scope)
        p.expect("|-")
        succ = p.formula(scope)
        p.end()
        axioms.append(Sequent(tuple(ctx), ante, succ))
    sig = Signature(sig.sorts, sig.functions, sig.relations, frozenset(ineq))
    return Theory(sig, tuple(axioms), name=name, fragment=fragment)


def parse_formula(text: str, sig: Signature, context: list[Var] | tuple[Var, ...] = ()) -> Formula:
    neq: set[str] = set()
    p = _Parser(tokenize(text), sig, neq)
    f = p.formula({v.name: v for v in context})
    p.end()
    check_formula(sig, f)
    return f


def parse_in_context(text: str, sig: Signature) -> FormulaInContext:
    """Parse ``"x:V, y:V | body"`` (brackets optional) into a formula in context."""
    text = text.strip()
    if text.startswith("[") and text.endswith("]"):
        text = text[1:-1]
    p = _Parser(tokenize(text), sig, set())
    ctx = p.binders("|")
    p.expect("|")
    body = p.formula({v.name: v for v in ctx})
    p.end()
    check_formula(sig, body)
    return FormulaInContext(tuple(ctx), body)


def require_coherent(f: FormulaInContext | Formula) -> None:
    if not is_coherent(f):
        raise CoherenceError(f"non-coherent formula {f}")
