"""Basic opens and the logical topologies on X_T, G_T and definable total spaces.

The subbasis on X_T consists of the opens of tracked formulas at every
parameter tuple plus, for each model M, the open given by M's diagram at the
elements of M. For coherent theories the diagram lists the positive facts, so
its open is {N : the inclusion M ⊆ N is a homomorphism}; every basic open of a
coherent formula is a union of these, so the finite family generates the
whole logical topology. Classical theories use the full diagram.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Sequence

from .logic.syntax import (CLASSICAL, App, Eq, Forall, FormulaInContext, Neq, Not, Rel,
                           SortCheckError, Var, conj, disj, subst)
from .models import GroupoidOfModels, Model, compile_formula
from .topology import FiniteTopology, bits, mask_of


# --------------------------------------------------------------------------
# diagrams


def element_vars(m: Model, prefix: str = "y") -> dict[tuple[str, int], Var]:
    return {e: Var(f"{prefix}{i}", e[0]) for i, e in enumerate(m.elements())}


def diagram_body(m: Model, names: dict[tuple[str, int], Var], classical: bool = False):
    """Conjunction of the facts of ``m`` among the named elements.

    Function facts are included when all their arguments and the value are
    named. ``classical`` adds negated facts, distinctness and exhaustion.
    """
    sig = m.signature
    parts = []
    for r, table in zip(sig.relations, m.relations):
        for cell in product(*(m.C[s] for s in r.args)):
            keys = [(s, a) for s, a in zip(r.args, cell)]
            if not all(k in names for k in keys):
                continue
            atom = Rel(r.name, tuple(names[k] for k in keys))
            if cell in table:
                parts.append(atom)
            elif classical:
                parts.append(Not(atom))
    for s, table in zip(sig.sorts, m.neq):
        if table is None:
            continue
        for a in m.C[s]:
            for b in m.C[s]:
                if (s, a) in names and (s, b) in names and (a, b) in table:
                    parts.append(Neq(names[(s, a)], names[(s, b)]))
    for f, table in zip(sig.functions, m.functions):
        for args, v in table:
            keys = [(s, a) for s, a in zip(f.args, args)]
            if all(k in names for k in keys) and (f.result, v) in names:
                term = App(f.name, tuple(names[k] for k in keys), f.result)
                parts.append(Eq(term, names[(f.result, v)]))
    if classical:
        for s in sig.sorts:
            named = [names[(s, a)] for a in m.C[s] if (s, a) in names]
            for i, x in enumerate(named):
                for y in named[i + 1:]:
                    parts.append(Not(Eq(x, y)))
            if len(named) == len(m.C[s]):
                z = Var("z", s)
                parts.append(Forall(z, disj([Eq(z, x) for x in named])))
    return conj(parts)


def diagram_formula(m: Model, classical: bool = False, prefix: str = "y"):
    """(formula in context over all elements of m, parameter atoms)."""
    names = element_vars(m, prefix)
    elems = m.elements()
    ctx = tuple(names[e] for e in elems)
    return FormulaInContext(ctx, diagram_body(m, names, classical)), tuple(a for _, a in elems)


def uses_classical_diagrams(g: GroupoidOfModels) -> bool:
    return g.theory.fragment == CLASSICAL


# --------------------------------------------------------------------------
# basic opens


@dataclass(frozen=True)
class BasicOpenSpec:
    """kind "X" ⟨[x̄|φ], b̄⟩; kind "sheaf" ⟨[x̄,ȳ|ψ], b̄⟩ over a total space;
    kind "G" with source/target conditions and preservation pairs (sort, b, c)."""
    kind: str
    formula: FormulaInContext | None = None
    params: tuple[int, ...] = ()
    source: tuple[FormulaInContext, tuple[int, ...]] | None = None
    preserve: tuple[tuple[str, int, int], ...] = ()
    target: tuple[FormulaInContext, tuple[int, ...]] | None = None

    def __post_init__(self):
        if self.kind not in ("X", "sheaf", "G"):
            raise ValueError(f"unknown basic open kind {self.kind}")
        if self.kind == "X" and self.formula is not None and len(self.params) != len(self.formula.context):
            raise SortCheckError("parameter tuple length does not match the context")

    def label(self) -> str:
        if self.kind == "G":
            bits_ = []
            if self.source:
                bits_.append(f"s:{self.source[0]}@{self.source[1]}")
            bits_ += [f"{s}:{b}->{c}" for s, b, c in self.preserve]
            if self.target:
                bits_.append(f"t:{self.target[0]}@{self.target[1]}")
            return "<" + "; ".join(bits_) + ">"
        return f"<{self.formula}, {self.params}>"


def reduce_spec(f: FormulaInContext, params: Sequence[int], keep: int = 0):
    """Reduced form: merge parameter variables of equal sort and value.

    The first ``keep`` variables (the sheaf context) carry no parameters and
    are never merged; ``params`` covers the rest.
    """
    ctx = list(f.context)
    if len(params) != len(ctx) - keep:
        raise SortCheckError("parameter tuple length does not match the context")
    mapping = {}
    new_ctx, new_params = ctx[:keep], []
    seen: dict[tuple[str, int], Var] = {}
    for v, b in zip(ctx[keep:], params):
        k = (v.sort, b)
        if k in seen:
            mapping[v] = seen[k]
        else:
            seen[k] = v
            new_ctx.append(v)
            new_params.append(b)
    body = subst(f.body, mapping) if mapping else f.body
    return FormulaInContext(tuple(new_ctx), body), tuple(new_params)


def _holds(m: Model, f: FormulaInContext, params: Sequence[int]) -> bool:
    if len(params) != len(f.context):
        raise SortCheckError("parameter tuple length does not match the context")
    for v, a in zip(f.context, params):
        if a not in m.C[v.sort]:
            return False
    return bool(compile_formula(f.context, f.body)(m, tuple(params)))


def basic_open_X(g: GroupoidOfModels, f: FormulaInContext, params: Sequence[int]) -> int:
    """⟨[x̄|φ], b̄⟩ = {M : b̄ ∈ ⟦x̄|φ⟧^M} as a bitmask over models."""
    return mask_of(i for i, m in enumerate(g.models) if _holds(m, f, params))


def subbasic_open_G(g: GroupoidOfModels, spec: BasicOpenSpec) -> int:
    """Arrows meeting the source condition, the preservation pairs and the target condition."""
    if spec.kind != "G":
        raise ValueError("expected a G-open spec")
    sorts = g.sorts
    for s, _, _ in spec.preserve:
        if s not in sorts:
            raise SortCheckError(f"unknown sort {s}")
    src_ok = basic_open_X(g, *spec.source) if spec.source else (1 << g.n_objects) - 1
    tgt_ok = basic_open_X(g, *spec.target) if spec.target else (1 << g.n_objects) - 1
    out = 0
    for i, a in enumerate(g.arrows):
        if not ((src_ok >> a.source) & 1 and (tgt_ok >> a.target) & 1):
            continue
        if all(b in g.models[a.source].C[s] and g.apply(i, s, b) == c for s, b, c in spec.preserve):
            out |= 1 << i
    return out


def preservation_open(g: GroupoidOfModels, sort: str, b: int, c: int) -> int:
    return subbasic_open_G(g, BasicOpenSpec("G", preserve=((sort, b, c),)))


def parameter_tuples(g: GroupoidOfModels, sorts: Sequence[str]):
    return product(range(g.universe.n), repeat=len(sorts))


def x_subbasis(g: GroupoidOfModels, tracked: Sequence[FormulaInContext] = ()) -> list[tuple[str, int]]:
    classical = uses_classical_diagrams(g)
    out = []
    for i, m in enumerate(g.models):
        f, params = diagram_formula(m, classical)
        out.append((f"diagram of model {i}", basic_open_X(g, f, params)))
    for f in tracked:
        for params in parameter_tuples(g, f.sorts):
            out.append((f"<{f}, {params}>", basic_open_X(g, f, params)))
    return out


def g_subbasis(g: GroupoidOfModels, xsub: Sequence[tuple[str, int]]) -> list[tuple[str, int]]:
    out = []
    for name, mask in xsub:
        out.append((f"s^-1 {name}", mask_of(i for i, a in enumerate(g.arrows) if (mask >> a.source) & 1)))
        out.append((f"t^-1 {name}", mask_of(i for i, a in enumerate(g.arrows) if (mask >> a.target) & 1)))
    for s in g.sorts:
        for b in range(g.universe.n):
            for c in range(g.universe.n):
                out.append((f"<{s}: {b}->{c}>", preservation_open(g, s, b, c)))
    return out


@dataclass(frozen=True)
class LogicalTopologies:
    groupoid: GroupoidOfModels       # equipped with X and G topologies
    X: FiniteTopology
    G: FiniteTopology
    sheaves: dict                    # tracked formula -> definable sheaf


def equip(g: GroupoidOfModels, tracked: Sequence[FormulaInContext] = ()) -> GroupoidOfModels:
    xs = x_subbasis(g, tracked)
    X = FiniteTopology.from_subbasis(g.n_objects, xs)
    G = FiniteTopology.from_subbasis(g.n_arrows, g_subbasis(g, xs))
    return g.with_topology(X, G)


def build_logical_topologies(g: GroupoidOfModels,
                             tracked: Sequence[FormulaInContext] = ()) -> LogicalTopologies:
    from .sheaves import definable_sheaf
    eg = equip(g, tracked)
    sheaves = {f: definable_sheaf(eg, f) for f in tracked}
    return LogicalTopologies(eg, eg.obj_top, eg.arr_top, sheaves)


def logical_groupoid(theory, n: int, tracked: Sequence[FormulaInContext] = (),
                     ceiling: int | None = None) -> GroupoidOfModels:
    from .models import DEFAULT_CEILING, build_groupoid
    return equip(build_groupoid(theory, n, ceiling or DEFAULT_CEILING), tracked)


def inclusion_neighbourhood(g: GroupoidOfModels, i: int) -> int:
    """{N : carriers of M_i inside N's and the inclusion is a homomorphism}."""
    m = g.models[i]
    out = 0
    for j, n in enumerate(g.models):
        if all(set(a) <= set(b) for a, b in zip(m.carriers, n.carriers)) and _inclusion_is_hom(m, n):
            out |= 1 << j
    return out


def _inclusion_is_hom(m: Model, n: Model) -> bool:
    if any(not t <= u for t, u in zip(m.relations, n.relations)):
        return False
    for t, u in zip(m.neq, n.neq):
        if t is not None and (u is None or not t <= u):
            return False
    return all(n.fn_tables[f][a] == v for f, tab in m.fn_tables.items() for a, v in tab.items())


def star_of_david(g: GroupoidOfModels) -> list[str]:
    """Transfer invariant: every per-sort permutation of the universe carries each
    enumerated model to an enumerated model along an enumerated isomorphism.

    Returns violations (empty when the invariant holds). One transposition and
    one full cycle per sort generate all permutations, so only those are tried.
    """
    from .models import Model
    n = g.universe.n
    gens = []
    if n > 1:
        gens.append((1, 0) + tuple(range(2, n)))
        gens.append(tuple(range(1, n)) + (0,))
    sig = g.theory.signature
    out = []
    for k, sort in enumerate(sig.sorts):
        for perm in gens:
            for i, m in enumerate(g.models):
                pm = _permute(m, {sort: perm})
                j = g.find_model(pm)
                if j is None:
                    out.append(f"model {i} permuted on {sort} is not enumerated")
                    continue
                comps = tuple(tuple(perm[a] for a in car) if s == sort else car
                              for s, car in zip(sig.sorts, m.carriers))
                try:
                    g.arrow_index(i, j, comps)
                except KeyError:
                    out.append(f"permutation of {sort} on model {i} is not an enumerated arrow")
    return out


def _permute(m: Model, perms: dict[str, tuple[int, ...]]) -> Model:
    sig = m.signature

    def p(s, a):
        return perms[s][a] if s in perms else a

    carriers = tuple(tuple(sorted(p(s, a) for a in c)) for s, c in zip(sig.sorts, m.carriers))
    rels = tuple(frozenset(tuple(p(s, a) for s, a in zip(r.args, cell)) for cell in t)
                 for r, t in zip(sig.relations, m.relations))
    fns = tuple(tuple(sorted((tuple(p(s, a) for s, a in zip(f.args, args)), p(f.result, v))
                             for args, v in t))
                for f, t in zip(sig.functions, m.functions))
    neq = tuple(None if t is None else frozenset((p(s, a), p(s, b)) for a, b in t)
                for s, t in zip(sig.sorts, m.neq))
    return Model(sig, carriers, rels, fns, neq)
