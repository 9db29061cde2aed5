"""Many-sorted first-order syntax: signatures, terms, formulas in context, sequents and theories.

All AST nodes are frozen dataclasses, so formulas are hashable and can be used
as dictionary keys (compiled evaluators and Morleyization symbols are keyed on
them).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import count
from typing import Iterable, Iterator, Mapping, Sequence

NEQ = "!="


class SortCheckError(ValueError):
    """A term or formula is ill-sorted or mentions an undeclared symbol."""


class CoherenceError(ValueError):
    """A non-coherent formula was used where a coherent one is required."""


# --------------------------------------------------------------------------
# signatures


@dataclass(frozen=True)
class FunctionSymbol:
    name: str
    args: tuple[str, ...]
    result: str


@dataclass(frozen=True)
class RelationSymbol:
    name: str
    args: tuple[str, ...]


@dataclass(frozen=True)
class Signature:
    sorts: tuple[str, ...]
    functions: tuple[FunctionSymbol, ...] = ()
    relations: tuple[RelationSymbol, ...] = ()
    # sorts carrying a designated primitive inequality predicate
    inequality: frozenset[str] = frozenset()

    def __post_init__(self):
        for kind, names in (("sort", self.sorts),
                            ("function", [f.name for f in self.functions]),
                            ("relation", [r.name for r in self.relations])):
            if len(set(names)) != len(names):
                raise SortCheckError(f"duplicate {kind} name in signature")
        known = set(self.sorts)
        for f in self.functions:
            for s in (*f.args, f.result):
                if s not in known:
                    raise SortCheckError(f"function {f.name} mentions undeclared sort {s}")
        for r in self.relations:
            for s in r.args:
                if s not in known:
                    raise SortCheckError(f"relation {r.name} mentions undeclared sort {s}")
        for s in self.inequality:
            if s not in known:
                raise SortCheckError(f"inequality on undeclared sort {s}")

    def function(self, name: str) -> FunctionSymbol:
        for f in self.functions:
            if f.name == name:
                return f
        raise SortCheckError(f"unknown function symbol {name}")

    def relation(self, name: str) -> RelationSymbol:
        for r in self.relations:
            if r.name == name:
                return r
        raise SortCheckError(f"unknown relation symbol {name}")

    def has_function(self, name: str) -> bool:
        return any(f.name == name for f in self.functions)

    def has_relation(self, name: str) -> bool:
        return any(r.name == name for r in self.relations)

    def has_inequality(self, sort: str) -> bool:
        return sort in self.inequality

    def extend(self, relations: Iterable[RelationSymbol] = (),
               inequality: Iterable[str] = ()) -> "Signature":
        return Signature(self.sorts, self.functions, self.relations + tuple(relations),
                         self.inequality | frozenset(inequality))


# --------------------------------------------------------------------------
# terms


@dataclass(frozen=True)
class Var:
    name: str
    sort: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class App:
    fn: str
    args: tuple["Term", ...]
    sort: str

    def __str__(self):
        if not self.args:
            return self.fn
        return f"{self.fn}({', '.join(map(str, self.args))})"


Term = Var | App


def term_vars(t: Term) -> Iterator[Var]:
    if isinstance(t, Var):
        yield t
    else:
        for a in t.args:
            yield from term_vars(a)


def term_functions(t: Term) -> Iterator[str]:
    if isinstance(t, App):
        yield t.fn
        for a in t.args:
            yield from term_functions(a)


# --------------------------------------------------------------------------
# formulas


class Formula:
    """Base class of formula nodes."""

    __slots__ = ()

    def __and__(self, other: "Formula") -> "Formula":
        return conj([self, other])

    def __or__(self, other: "Formula") -> "Formula":
        return disj([self, other])

    def __str__(self):
        from .printer import format_formula
        return format_formula(self)


@dataclass(frozen=True, repr=False)
class Top(Formula):
    pass


@dataclass(frozen=True, repr=False)
class Bot(Formula):
    pass


@dataclass(frozen=True, repr=False)
class Eq(Formula):
    left: Term
    right: Term


@dataclass(frozen=True, repr=False)
class Neq(Formula):
    """Primitive inequality predicate, not sugar for a negated equation."""
    left: Term
    right: Term


@dataclass(frozen=True, repr=False)
class Rel(Formula):
    name: str
    args: tuple[Term, ...] = ()


@dataclass(frozen=True, repr=False)
class And(Formula):
    parts: tuple[Formula, ...]


@dataclass(frozen=True, repr=False)
class Or(Formula):
    parts: tuple[Formula, ...]


@dataclass(frozen=True, repr=False)
class Exists(Formula):
    var: Var
    body: Formula


@dataclass(frozen=True, repr=False)
class Forall(Formula):
    var: Var
    body: Formula


@dataclass(frozen=True, repr=False)
class Not(Formula):
    body: Formula


@dataclass(frozen=True, repr=False)
class Implies(Formula):
    left: Formula
    right: Formula


for _cls in (Top, Bot, Eq, Neq, Rel, And, Or, Exists, Forall, Not, Implies):
    _cls.__repr__ = lambda self: f"<{type(self).__name__} {self}>"

TOP = Top()
BOT = Bot()


def conj(parts: Iterable[Formula]) -> Formula:
    """Conjunction with trivial simplifications (drop ⊤, flatten, singleton)."""
    out: list[Formula] = []
    for p in parts:
        if isinstance(p, Top):
            continue
        if isinstance(p, And):
            out.extend(p.parts)
        else:
            out.append(p)
    if not out:
        return TOP
    if len(out) == 1:
        return out[0]
    return And(tuple(out))


def disj(parts: Iterable[Formula]) -> Formula:
    out: list[Formula] = []
    for p in parts:
        if isinstance(p, Bot):
            continue
        if isinstance(p, Or):
            out.extend(p.parts)
        else:
            out.append(p)
    if not out:
        return BOT
    if len(out) == 1:
        return out[0]
    return Or(tuple(out))


def exists(vars: Sequence[Var], body: Formula) -> Formula:
    for v in reversed(vars):
        body = Exists(v, body)
    return body


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, (And, Or)):
        return f.parts
    if isinstance(f, (Exists, Forall, Not)):
        return (f.body,)
    if isinstance(f, Implies):
        return (f.left, f.right)
    return ()


def subformulas(f: Formula) -> Iterator[Formula]:
    """Post-order traversal: children before parents."""
    for c in children(f):
        yield from subformulas(c)
    yield f


def atom_terms(f: Formula) -> tuple[Term, ...]:
    if isinstance(f, (Eq, Neq)):
        return (f.left, f.right)
    if isinstance(f, Rel):
        return f.args
    return ()


def is_coherent(f: "Formula | FormulaInContext") -> bool:
    """True iff only ⊤, ∧, ∃, ⊥, ∨ and atoms occur."""
    if isinstance(f, FormulaInContext):
        f = f.body
    return not any(isinstance(g, (Not, Implies, Forall)) for g in subformulas(f))


def free_vars(f: Formula) -> frozenset[Var]:
    if isinstance(f, (Exists, Forall)):
        return free_vars(f.body) - {f.var}
    out: set[Var] = set()
    for t in atom_terms(f):
        out.update(term_vars(t))
    for c in children(f):
        out |= free_vars(c)
    return frozenset(out)


def all_var_names(f: Formula) -> set[str]:
    names = {v.name for v in free_vars(f)}
    for g in subformulas(f):
        if isinstance(g, (Exists, Forall)):
            names.add(g.var.name)
    return names


def symbols_used(f: Formula) -> set[tuple[str, str]]:
    """Non-logical symbols occurring in ``f`` as (kind, name); ≠ is tagged by sort."""
    out: set[tuple[str, str]] = set()
    for g in subformulas(f):
        for t in atom_terms(g):
            out.update(("fun", name) for name in term_functions(t))
        if isinstance(g, Rel):
            out.add(("rel", g.name))
        elif isinstance(g, Neq):
            out.add(("neq", g.left.sort))
    return out


# --------------------------------------------------------------------------
# substitution and α-normalisation

_fresh = count()


def _fresh_name(avoid: set[str], base: str) -> str:
    while True:
        name = f"{base}_{next(_fresh)}"
        if name not in avoid:
            return name


def subst_term(t: Term, mapping: Mapping[Var, Term]) -> Term:
    if isinstance(t, Var):
        return mapping.get(t, t)
    return App(t.fn, tuple(subst_term(a, mapping) for a in t.args), t.sort)


def subst(f: Formula, mapping: Mapping[Var, Term]) -> Formula:
    """Capture-avoiding simultaneous substitution of terms for free variables."""
    mapping = {v: t for v, t in mapping.items() if v != t}
    if not mapping:
        return f
    if isinstance(f, (Top, Bot)):
        return f
    if isinstance(f, Eq):
        return Eq(subst_term(f.left, mapping), subst_term(f.right, mapping))
    if isinstance(f, Neq):
        return Neq(subst_term(f.left, mapping), subst_term(f.right, mapping))
    if isinstance(f, Rel):
        return Rel(f.name, tuple(subst_term(a, mapping) for a in f.args))
    if isinstance(f, And):
        return And(tuple(subst(p, mapping) for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(subst(p, mapping) for p in f.parts))
    if isinstance(f, Not):
        return Not(subst(f.body, mapping))
    if isinstance(f, Implies):
        return Implies(subst(f.left, mapping), subst(f.right, mapping))
    if isinstance(f, (Exists, Forall)):
        inner = {v: t for v, t in mapping.items() if v != f.var}
        incoming = {w.name for t in inner.values() for w in term_vars(t)}
        var, body = f.var, f.body
        if var.name in incoming:
            avoid = incoming | all_var_names(body) | {v.name for v in inner}
            new = Var(_fresh_name(avoid, var.name), var.sort)
            body = subst(body, {var: new})
            var = new
        return type(f)(var, subst(body, inner))
    raise TypeError(f"not a formula: {f!r}")


def _canon(f: Formula, env: dict[Var, Var], depth: int) -> Formula:
    if isinstance(f, (Top, Bot)):
        return f
    if isinstance(f, (Eq, Neq)):
        return type(f)(subst_term(f.left, env), subst_term(f.right, env))
    if isinstance(f, Rel):
        return Rel(f.name, tuple(subst_term(a, env) for a in f.args))
    if isinstance(f, And):
        return And(tuple(_canon(p, env, depth) for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(_canon(p, env, depth) for p in f.parts))
    if isinstance(f, Not):
        return Not(_canon(f.body, env, depth))
    if isinstance(f, Implies):
        return Implies(_canon(f.left, env, depth), _canon(f.right, env, depth))
    if isinstance(f, (Exists, Forall)):
        bound = Var(f"w{depth}", f.var.sort)
        return type(f)(bound, _canon(f.body, {**env, f.var: bound}, depth + 1))
    raise TypeError(f"not a formula: {f!r}")


# --------------------------------------------------------------------------
# formulas in context, sequents, theories


@dataclass(frozen=True)
class FormulaInContext:
    context: tuple[Var, ...]
    body: Formula

    def __post_init__(self):
        names = [v.name for v in self.context]
        if len(set(names)) != len(names):
            raise SortCheckError(f"context variables not distinct: {names}")
        missing = free_vars(self.body) - set(self.context)
        if missing:
            raise SortCheckError(
                f"free variables {sorted(v.name for v in missing)} not in context")

    @property
    def sorts(self) -> tuple[str, ...]:
        return tuple(v.sort for v in self.context)

    def canonical(self) -> "FormulaInContext":
        """α-normal form: context variables become v0, v1, ...; bound ones w<depth>."""
        env = {v: Var(f"v{i}", v.sort) for i, v in enumerate(self.context)}
        return FormulaInContext(tuple(env[v] for v in self.context),
                                _canon(self.body, env, 0))

    def alpha_equal(self, other: "FormulaInContext") -> bool:
        return self.canonical() == other.canonical()

    def __str__(self):
        from .printer import format_context
        return f"[{format_context(self.context)} | {self.body}]"


def in_context(context: Sequence[Var], body: Formula) -> FormulaInContext:
    return FormulaInContext(tuple(context), body)


def substitute(f: FormulaInContext, renaming: Mapping[Var, Var]) -> FormulaInContext:
    """Rename context variables; the renaming must be sort-preserving and injective."""
    for v, w in renaming.items():
        if v.sort != w.sort:
            raise SortCheckError(f"renaming {v.name}:{v.sort} -> {w.name}:{w.sort} changes sort")
        if v not in f.context:
            raise SortCheckError(f"{v.name} is not a context variable")
    new_ctx = tuple(renaming.get(v, v) for v in f.context)
    if len({v.name for v in new_ctx}) != len(new_ctx):
        raise SortCheckError("renaming is not injective on the context")
    return FormulaInContext(new_ctx, subst(f.body, renaming))


@dataclass(frozen=True)
class Sequent:
    context: tuple[Var, ...]
    antecedent: Formula
    succedent: Formula

    def __post_init__(self):
        FormulaInContext(self.context, self.antecedent)
        FormulaInContext(self.context, self.succedent)

    @property
    def is_coherent(self) -> bool:
        return is_coherent(self.antecedent) and is_coherent(self.succedent)

    def canonical(self) -> "Sequent":
        env = {v: Var(f"v{i}", v.sort) for i, v in enumerate(self.context)}
        return Sequent(tuple(env[v] for v in self.context),
                       _canon(self.antecedent, env, 0), _canon(self.succedent, env, 0))

    def __str__(self):
        from .printer import format_sequent
        return format_sequent(self)


COHERENT = "coherent"
CLASSICAL = "classical"


def inequality_axioms(sort: str) -> tuple[Sequent, Sequent]:
    x, y = Var("x", sort), Var("y", sort)
    return (Sequent((x, y), And((Neq(x, y), Eq(x, y))), BOT),
            Sequent((x, y), TOP, Or((Neq(x, y), Eq(x, y)))))


@dataclass(frozen=True)
class Theory:
    signature: Signature
    axioms: tuple[Sequent, ...]
    name: str = ""
    fragment: str = field(default="", compare=False)
    decidable: bool = field(default=False, compare=False)

    def __post_init__(self):
        for ax in self.axioms:
            check_formula(self.signature, ax.antecedent)
            check_formula(self.signature, ax.succedent)
        coherent = all(ax.is_coherent for ax in self.axioms)
        frag = self.fragment or (COHERENT if coherent else CLASSICAL)
        if frag == COHERENT and not coherent:
            raise CoherenceError("non-coherent formula in coherent theory")
        object.__setattr__(self, "fragment", frag)
        object.__setattr__(self, "decidable", all(self.sort_is_decidable(s)
                                                  for s in self.signature.sorts))

    def sort_is_decidable(self, sort: str) -> bool:
        """Both inequality axioms for ``sort`` occur among the axioms (up to α)."""
        if not self.signature.has_inequality(sort):
            return False
        present = {ax.canonical() for ax in self.axioms}
        return all(ax.canonical() in present for ax in inequality_axioms(sort))


# --------------------------------------------------------------------------
# sort checking


def check_term(sig: Signature, t: Term) -> None:
    if isinstance(t, Var):
        if t.sort not in sig.sorts:
            raise SortCheckError(f"variable {t.name} has undeclared sort {t.sort}")
        return
    fn = sig.function(t.fn)
    if len(fn.args) != len(t.args):
        raise SortCheckError(f"{t.fn} expects {len(fn.args)} arguments, got {len(t.args)} in {t}")
    for a, s in zip(t.args, fn.args):
        check_term(sig, a)
        if a.sort != s:
            raise SortCheckError(f"argument {a} of {t.fn} has sort {a.sort}, expected {s}")
    if t.sort != fn.result:
        raise SortCheckError(f"term {t} annotated with sort {t.sort}, expected {fn.result}")


def check_formula(sig: Signature, f: Formula) -> None:
    for g in subformulas(f):
        for t in atom_terms(g):
            check_term(sig, t)
        if isinstance(g, (Eq, Neq)) and g.left.sort != g.right.sort:
            raise SortCheckError(f"sides of {g} have sorts {g.left.sort} and {g.right.sort}")
        if isinstance(g, Neq) and not sig.has_inequality(g.left.sort):
            raise SortCheckError(f"no inequality predicate on sort {g.left.sort}")
        if isinstance(g, Rel):
            rel = sig.relation(g.name)
            if len(rel.args) != len(g.args):
                raise SortCheckError(f"{g.name} expects {len(rel.args)} arguments in {g}")
            for a, s in zip(g.args, rel.args):
                if a.sort != s:
                    raise SortCheckError(f"argument {a} of {g.name} has sort {a.sort}, expected {s}")
        if isinstance(g, (Exists, Forall)) and g.var.sort not in sig.sorts:
            raise SortCheckError(f"bound variable {g.var.name} has undeclared sort {g.var.sort}")
