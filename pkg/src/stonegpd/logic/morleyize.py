"""Translate a classical first-order theory into a decidable coherent one.

Every subformula φ of an axiom (up to α-equivalence over its free variables)
gets a relation pair ``C<k>``/``D<k>`` meant to hold of φ and of ¬φ. The
pair is forced to be complementary, the unfolding sequents pin ``C<k>`` to
the meaning of φ, and every sort gets a primitive inequality. Models of the
output are in bijection with models of the input.
"""
from __future__ import annotations

from dataclasses import dataclass

from .syntax import (BOT, TOP, And, Bot, CLASSICAL, COHERENT, Eq, Exists, Forall, Formula,
                     FormulaInContext, Implies, Neq, Not, Or, Rel, RelationSymbol, Sequent,
                     Theory, Top, Var, conj, disj, free_vars, inequality_axioms, subformulas)


@dataclass(frozen=True)
class _Entry:
    index: int
    context: tuple[Var, ...]   # free variables in a fixed order


def _ordered_free(f: Formula) -> tuple[Var, ...]:
    return tuple(sorted(free_vars(f), key=lambda v: (v.name, v.sort)))


def _key(f: Formula) -> FormulaInContext:
    return FormulaInContext(_ordered_free(f), f).canonical()


class _Builder:
    def __init__(self, theory: Theory, prefix: str):
        self.theory = theory
        self.prefix = prefix
        self.entries: dict[FormulaInContext, _Entry] = {}
        self.relations: list[RelationSymbol] = []
        self.axioms: list[Sequent] = []

    def c(self, f: Formula) -> Rel:
        e = self.entries[_key(f)]
        return Rel(f"{self.prefix}C{e.index}", _ordered_free(f))

    def d(self, f: Formula) -> Rel:
        e = self.entries[_key(f)]
        return Rel(f"{self.prefix}D{e.index}", _ordered_free(f))

    def both_ways(self, ctx, left: Formula, right: Formula):
        self.axioms.append(Sequent(ctx, left, right))
        self.axioms.append(Sequent(ctx, right, left))

    def add(self, f: Formula):
        key = _key(f)
        if key in self.entries:
            return
        ctx = _ordered_free(f)
        idx = len(self.entries)
        self.entries[key] = _Entry(idx, ctx)
        sorts = tuple(v.sort for v in ctx)
        self.relations.append(RelationSymbol(f"{self.prefix}C{idx}", sorts))
        self.relations.append(RelationSymbol(f"{self.prefix}D{idx}", sorts))
        c, d = self.c(f), self.d(f)
        self.axioms.append(Sequent(ctx, And((c, d)), BOT))
        self.axioms.append(Sequent(ctx, TOP, Or((c, d))))
        if isinstance(f, Top):
            self.axioms.append(Sequent(ctx, TOP, c))
        elif isinstance(f, Bot):
            self.axioms.append(Sequent(ctx, c, BOT))
        elif isinstance(f, (Eq, Neq, Rel)):
            self.both_ways(ctx, c, f)
        elif isinstance(f, And):
            self.both_ways(ctx, c, conj([self.c(p) for p in f.parts]))
        elif isinstance(f, Or):
            self.both_ways(ctx, c, disj([self.c(p) for p in f.parts]))
        elif isinstance(f, Not):
            self.both_ways(ctx, c, self.d(f.body))
        elif isinstance(f, Implies):
            self.both_ways(ctx, c, Or((self.d(f.left), self.c(f.right))))
        elif isinstance(f, Exists):
            self.both_ways(ctx, c, Exists(f.var, self.c(f.body)))
        elif isinstance(f, Forall):
            self.both_ways(ctx, d, Exists(f.var, self.d(f.body)))
        else:
            raise TypeError(f"not a formula: {f!r}")


def morleyize(theory: Theory, prefix: str = "") -> Theory:
    """Coherent, decidable conservative rewrite of ``theory``.

    Relation names are ``<prefix>C<k>`` and ``<prefix>D<k>``; ``k`` counts
    subformulas in post-order of first appearance, so children come first.
    """
    sig = theory.signature
    taken = {r.name for r in sig.relations} | {f.name for f in sig.functions}
    while any(n.startswith(prefix + "C") or n.startswith(prefix + "D") for n in taken):
        prefix += "_"
    b = _Builder(theory, prefix)
    for ax in theory.axioms:
        for part in (ax.antecedent, ax.succedent):
            for g in subformulas(part):
                b.add(g)
    translated = [Sequent(ax.context, b.c(ax.antecedent), b.c(ax.succedent))
                  for ax in theory.axioms]
    new_sig = sig.extend(b.relations, inequality=sig.sorts)
    ineq = [ax for s in sig.sorts for ax in inequality_axioms(s)]
    name = f"{theory.name}+morleyized" if theory.name else "morleyized"
    return Theory(new_sig, tuple(ineq + b.axioms + translated), name=name, fragment=COHERENT)


def needs_morleyization(theory: Theory) -> bool:
    return theory.fragment == CLASSICAL or not theory.decidable
