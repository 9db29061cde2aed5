"""Pretty-printer for the theory DSL; output re-parses to the same AST."""
from __future__ import annotations

from typing import Sequence

from .syntax import (And, Bot, Eq, Exists, Forall, Formula, Implies, Neq, Not, Or, Rel,
                     Sequent, Theory, Top, Var)

_QUANT, _IMP, _OR, _AND, _NOT, _ATOM = range(6)


def _prec(f: Formula) -> int:
    if isinstance(f, (Exists, Forall)):
        return _QUANT
    if isinstance(f, Implies):
        return _IMP
    if isinstance(f, Or):
        return _OR
    if isinstance(f, And):
        return _AND
    if isinstance(f, Not):
        return _NOT
    return _ATOM


def format_formula(f: Formula, ctx: int = _QUANT) -> str:
    s = _format(f)
    return f"({s})" if _prec(f) < ctx else s


def _format(f: Formula) -> str:
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Bot):
        return "false"
    if isinstance(f, Eq):
        return f"{f.left} = {f.right}"
    if isinstance(f, Neq):
        return f"{f.left} != {f.right}"
    if isinstance(f, Rel):
        return f"{f.name}({', '.join(map(str, f.args))})" if f.args else f.name
    if isinstance(f, And):
        return " & ".join(format_formula(p, _NOT) for p in f.parts)
    if isinstance(f, Or):
        return " | ".join(format_formula(p, _AND) for p in f.parts)
    if isinstance(f, Implies):
        return f"{format_formula(f.left, _OR)} -> {format_formula(f.right, _IMP)}"
    if isinstance(f, Not):
        return f"not {format_formula(f.body, _NOT)}"
    if isinstance(f, (Exists, Forall)):
        q = "exists" if isinstance(f, Exists) else "forall"
        return f"{q} {f.var.name}:{f.var.sort}. {format_formula(f.body)}"
    raise TypeError(f"not a formula: {f!r}")


def format_context(ctx: Sequence[Var]) -> str:
    return ", ".join(f"{v.name}:{v.sort}" for v in ctx)


def format_sequent(seq: Sequent) -> str:
    ctx = format_context(seq.context)
    lead = f"{ctx} " if ctx else ""
    return f"{lead}| {format_formula(seq.antecedent)} |- {format_formula(seq.succedent)}"


def format_theory(t: Theory) -> str:
    sig = t.signature
    lines = []
    if t.name:
        lines.append(f"# theory {t.name}")
    lines += [f"sort {s}" for s in sig.sorts]
    lines += [f"ineq {s}" for s in sig.sorts if s in sig.inequality]
    for fn in sig.functions:
        lines.append(f"fun {fn.name} : {' x '.join(fn.args)} -> {fn.result}".replace(":  ->", ": ->"))
    for r in sig.relations:
        lines.append(f"rel {r.name} : {' x '.join(r.args)}" if r.args else f"rel {r.name}")
    lines += [f"axiom {format_sequent(ax)}" for ax in t.axioms]
    return "\n".join(lines) + "\n"
