"""Light syntactic cleanup that preserves meaning in every structure."""
from __future__ import annotations

from .syntax import (And, Eq, Exists, Formula, FormulaInContext, Or, Var, conj, disj, exists,
                     free_vars, subst, term_vars)


def simplify(f: Formula) -> Formula:
    """Eliminate ∃y with a conjunct y = t (t free of y); drop duplicate conjuncts."""
    if isinstance(f, And):
        return _dedupe_and([simplify(p) for p in f.parts])
    if isinstance(f, Or):
        return disj(_unique([simplify(p) for p in f.parts]))
    if isinstance(f, Exists):
        vars_, body = [], f
        while isinstance(body, Exists):
            vars_.append(body.var)
            body = body.body
        parts = list(body.parts) if isinstance(body, And) else [body]
        parts = [simplify(p) for p in parts]
        changed = True
        while changed:
            changed = False
            for k, p in enumerate(parts):
                hit = _solvable(p, vars_)
                if hit is None:
                    continue
                y, t = hit
                rest = parts[:k] + parts[k + 1:]
                parts = [subst(q, {y: t}) for q in rest]
                vars_.remove(y)
                changed = True
                break
        body = _dedupe_and(parts)
        used = free_vars(body)
        return exists([v for v in vars_ if v in used], body)
    return f


def _solvable(p: Formula, bound: list[Var]):
    if not isinstance(p, Eq):
        return None
    for y, t in ((p.left, p.right), (p.right, p.left)):
        if isinstance(y, Var) and y in bound and y not in set(term_vars(t)):
            return y, t
    return None


def _unique(parts):
    out = []
    for p in parts:
        if p not in out:
            out.append(p)
    return out


def _dedupe_and(parts) -> Formula:
    return conj(_unique(conj(parts).parts if isinstance(conj(parts), And) else [conj(parts)]))


def simplify_in_context(f: FormulaInContext) -> FormulaInContext:
    return FormulaInContext(f.context, simplify(f.body))
