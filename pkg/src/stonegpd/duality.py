"""Syntactic categories at a bound, coherent functors, Mod and Form, counit and unit.

Objects are formulas in context compared by their extensions in every
enumerated model; arrows are functional relations found by enumerating the
equivariant continuous maps between definable sheaves and decomposing their
graphs. Functors between theories are symbol tables; functors out of a
category of formal sheaves are evaluated on a tracked list of objects.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, permutations, product
from typing import Any, Sequence

from .classifier import classifier, pullback_sheaf
from .errors import GuardError, VerificationError
from .groupoid import GroupoidMorphism, TopGroupoid
from .logic.syntax import (And, App, Bot, BOT, COHERENT, CoherenceError, Eq, Exists, Forall,
                           FormulaInContext, Implies, Neq, Not, Or, Rel, SortCheckError, TOP, Theory,
                           Top, Var, all_var_names, conj, disj, exists, is_coherent, subst, substitute)
from .models import GroupoidOfModels, definable_set, make_model
from .report import Report
from .sheaves import (EquivariantSheaf, SheafMorphism, _tuple_of, _value_key, _value_of,
                      check_action_axioms, check_formal_conditions, coproduct_sheaf,
                      decompose_stable_open, definable_sheaf, equalizer, equivariant_maps,
                      identity_witness, image, make_sheaf, product_sheaf, subsheaf, terminal_sheaf)
from .topology import FiniteTopology, bits, is_continuous, mask_of


# --------------------------------------------------------------------------
# objects and arrows


def rename_apart(f: FormulaInContext, prefix: str) -> FormulaInContext:
    """α-normalize, then call the context variables prefix0, prefix1, ..."""
    c = f.canonical()
    return substitute(c, {v: Var(f"{prefix}{i}", v.sort) for i, v in enumerate(c.context)})


def extensions(g: GroupoidOfModels, f: FormulaInContext) -> tuple[frozenset, ...]:
    return tuple(frozenset(definable_set(m, f)) for m in g.models)


@dataclass(frozen=True, eq=False)
class SyntacticObject:
    formula: FormulaInContext
    groupoid: GroupoidOfModels = field(repr=False)

    def __eq__(self, other):
        return isinstance(other, SyntacticObject) and objects_equal(self, other)

    def __hash__(self):
        return hash((self.formula.sorts, extensions(self.groupoid, self.formula)))

    def __str__(self):
        return str(self.formula)


def _fic(a) -> FormulaInContext:
    return a.formula if isinstance(a, SyntacticObject) else a


def objects_equal(a, b, g: GroupoidOfModels | None = None) -> bool:
    """Same sorts and the same extension in every enumerated model."""
    if g is None:
        g = a.groupoid if isinstance(a, SyntacticObject) else b.groupoid
    fa, fb = _fic(a), _fic(b)
    if fa.sorts != fb.sorts:
        raise SortCheckError(f"contexts differ: {fa.sorts} vs {fb.sorts}")
    return extensions(g, fa) == extensions(g, fb)


@dataclass(frozen=True)
class Verdict:
    ok: bool
    witness: Any = None

    def __bool__(self):
        return self.ok


def is_functional_relation(sigma: FormulaInContext, phi: FormulaInContext, psi: FormulaInContext,
                           g: GroupoidOfModels) -> Verdict:
    """σ ⊢ φ∧ψ, φ ⊢ ∃ȳσ and σ(x̄,ȳ)∧σ(x̄,ȳ') ⊢ ȳ=ȳ' in every enumerated model."""
    k = len(phi.context)
    if {v.name for v in phi.context} & {v.name for v in psi.context}:
        raise SortCheckError("contexts must be disjoint")
    if sigma.sorts != phi.sorts + psi.sorts:
        raise SortCheckError("σ context does not match φ and ψ")
    for i, m in enumerate(g.models):
        rel = definable_set(m, sigma)
        dom = definable_set(m, phi)
        cod = definable_set(m, psi)
        seen: dict[tuple, tuple] = {}
        for t in sorted(rel):
            a, b = t[:k], t[k:]
            if a not in dom or b not in cod:
                return Verdict(False, {"model": i, "tuple": t, "sequent": "sigma |- phi & psi"})
            if a in seen and seen[a] != b:
                return Verdict(False, {"model": i, "tuple": t, "sequent": "single valued"})
            seen[a] = b
        for a in sorted(dom):
            if a not in seen:
                return Verdict(False, {"model": i, "tuple": a, "sequent": "phi |- exists y. sigma"})
    return Verdict(True)


@dataclass(frozen=True, eq=False)
class SyntacticArrow:
    source: FormulaInContext
    target: FormulaInContext
    sigma: FormulaInContext
    table: tuple[int, ...] = ()   # the induced map on the definable sheaves

    def __str__(self):
        return f"{self.source} -> {self.target} via {self.sigma}"


def _joined(a: FormulaInContext, b: FormulaInContext):
    a2, b2 = rename_apart(a, "x"), rename_apart(b, "y")
    return a2, b2, FormulaInContext(a2.context + b2.context, conj([a2.body, b2.body]))


def _graph_mask(da: EquivariantSheaf, db: EquivariantSheaf, dg: EquivariantSheaf, h: Sequence[int]) -> int:
    k, m = len(da.formula.context), len(db.formula.context)
    out = 0
    for e, (x, va) in enumerate(da.points):
        vb = db.points[h[e]][1]
        joint = _value_of(_tuple_of(va, k) + _tuple_of(vb, m), k + m)
        out |= 1 << dg.index[(x, joint)]
    return out


def hom_set(a, b, g: GroupoidOfModels) -> list[SyntacticArrow]:
    """All arrows a → b at the bound, one per equivariant continuous map."""
    fa, fb = _fic(a), _fic(b)
    a2, b2, joint = _joined(fa, fb)
    da, db, dg = definable_sheaf(g, a2), definable_sheaf(g, b2), definable_sheaf(g, joint)
    out = []
    for h in equivariant_maps(da, db):
        parts = decompose_stable_open(dg, _graph_mask(da, db, dg, h))
        sigma = FormulaInContext(joint.context, disj([p.body for p in parts]))
        v = is_functional_relation(sigma, a2, b2, g)
        if not v:
            raise VerificationError("decomposed graph is not functional", v.witness)
        out.append(SyntacticArrow(a2, b2, sigma, h))
    return out


def identity_arrow(a) -> SyntacticArrow:
    fa = _fic(a)
    a2, b2, _ = _joined(fa, fa)
    body = conj([a2.body] + [Eq(x, y) for x, y in zip(a2.context, b2.context)])
    return SyntacticArrow(a2, b2, FormulaInContext(a2.context + b2.context, body))


def compose_arrows(tau: SyntacticArrow, sigma: SyntacticArrow) -> SyntacticArrow:
    """τ∘σ = [x̄,z̄ | ∃ȳ. σ(x̄,ȳ) ∧ τ(ȳ,z̄)]."""
    xs = tuple(Var(f"x{i}", v.sort) for i, v in enumerate(sigma.source.context))
    ys = tuple(Var(f"m{i}", v.sort) for i, v in enumerate(sigma.target.context))
    zs = tuple(Var(f"z{i}", v.sort) for i, v in enumerate(tau.target.context))
    s = _instantiate(sigma.sigma, xs + ys)
    t = _instantiate(tau.sigma, ys + zs)
    src = _instantiate_fic(sigma.source, xs)
    tgt = _instantiate_fic(tau.target, zs)
    return SyntacticArrow(src, tgt, FormulaInContext(xs + zs, exists(ys, conj([s, t]))))


def _instantiate_fic(f: FormulaInContext, vars_: Sequence[Var]) -> FormulaInContext:
    c = rename_apart(f, "_q")
    return substitute(c, dict(zip(c.context, vars_)))


def _instantiate(f: FormulaInContext, vars_: Sequence[Var]):
    return _instantiate_fic(f, vars_).body


def induced_morphism(arrow: SyntacticArrow, da: EquivariantSheaf, db: EquivariantSheaf) -> SheafMorphism:
    """f_σ: (M, ā) ↦ (M, b̄) with σ(ā, b̄) in M."""
    g = da.origin
    k, m = len(arrow.source.context), len(arrow.target.context)
    table = []
    for x, va in da.points:
        rel = definable_set(g.models[x], arrow.sigma)
        a = _tuple_of(va, k)
        bs = [t[k:] for t in rel if t[:k] == a]
        if len(bs) != 1:
            raise VerificationError("σ is not functional", {"model": x, "tuple": a})
        table.append(db.index[(x, _value_of(bs[0], m))])
    return SheafMorphism(da, db, tuple(table), str(arrow.sigma))


# --------------------------------------------------------------------------
# coherent functors between theories


@dataclass
class CoherentFunctorData:
    """A functor C_A → C_D given on generators.

    ``sorts`` maps a sort to (target sort, guard) with the guard over one
    variable (None for ⊤); ``relations``/``functions``/``neq`` map symbols to
    formulas in context over the target (functions by their graphs). Missing
    entries default to the same-named target symbol. ``objects`` optionally
    overrides the image of listed objects; overrides are validated.
    """
    source: Theory
    target: Theory
    sorts: dict = field(default_factory=dict)
    relations: dict = field(default_factory=dict)
    functions: dict = field(default_factory=dict)
    neq: dict = field(default_factory=dict)
    objects: dict = field(default_factory=dict)
    name: str = "F"

    def __post_init__(self):
        ssig, tsig = self.source.signature, self.target.signature
        for s in ssig.sorts:
            t = self.sort_of(s)
            if t not in tsig.sorts:
                raise SortCheckError(f"sort {s} maps to unknown sort {t}")
        for r in ssig.relations:
            f = self.rel_formula(r.name)
            if f.sorts != tuple(self.sort_of(s) for s in r.args):
                raise SortCheckError(f"image of {r.name} has the wrong context")
        for fn in ssig.functions:
            f = self.fun_graph(fn.name)
            if f.sorts != tuple(self.sort_of(s) for s in fn.args + (fn.result,)):
                raise SortCheckError(f"image of {fn.name} has the wrong context")
        for s in ssig.sorts:
            if ssig.has_inequality(s):
                self.neq_formula(s)
        if self.target.fragment == COHERENT:
            for f in list(self.relations.values()) + list(self.functions.values()) + list(self.neq.values()):
                if not is_coherent(f):
                    raise CoherenceError(f"{f} is not coherent")
        top = FormulaInContext((), TOP)
        for key, val in self.objects.items():
            if key.alpha_equal(top) and not val.alpha_equal(top):
                raise CoherenceError("not coherent: the terminal object must map to the terminal object")
            if val.sorts != tuple(self.sort_of(s) for s in key.sorts):
                raise SortCheckError(f"override for {key} has the wrong context")

    # generator images
    def sort_of(self, s: str) -> str:
        v = self.sorts.get(s)
        return v[0] if v else s

    def guard(self, s: str, var: Var):
        v = self.sorts.get(s)
        if not v or v[1] is None:
            return TOP
        return subst(v[1].body, {v[1].context[0]: var})

    def rel_formula(self, name: str) -> FormulaInContext:
        if name in self.relations:
            return self.relations[name]
        r = self.target.signature.relation(name)
        ctx = tuple(Var(f"a{i}", s) for i, s in enumerate(r.args))
        return FormulaInContext(ctx, Rel(name, ctx))

    def fun_graph(self, name: str) -> FormulaInContext:
        if name in self.functions:
            return self.functions[name]
        f = self.target.signature.function(name)
        ctx = tuple(Var(f"a{i}", s) for i, s in enumerate(f.args))
        out = Var("r", f.result)
        return FormulaInContext(ctx + (out,), Eq(App(name, ctx, f.result), out))

    def neq_formula(self, s: str) -> FormulaInContext:
        if s in self.neq:
            return self.neq[s]
        t = self.sort_of(s)
        x, y = Var("a0", t), Var("a1", t)
        if self.target.signature.has_inequality(t):
            return FormulaInContext((x, y), Neq(x, y))
        return FormulaInContext((x, y), Not(Eq(x, y)))

    # translation
    def translate(self, f: FormulaInContext) -> FormulaInContext:
        for key, val in self.objects.items():
            if key.alpha_equal(f):
                return substitute(val, {v: Var(w.name, v.sort) for v, w in zip(val.context, f.context)})
        names = set(all_var_names(f.body)) | {v.name for v in f.context}
        counter = [0]

        def fresh(sort):
            while True:
                counter[0] += 1
                n = f"u{counter[0]}"
                if n not in names:
                    names.add(n)
                    return Var(n, sort)

        env = {v: Var(v.name, self.sort_of(v.sort)) for v in f.context}
        body = self._tr(f.body, env, fresh)
        ctx = tuple(env[v] for v in f.context)
        guards = [self.guard(v.sort, env[v]) for v in f.context]
        return FormulaInContext(ctx, conj(guards + [body]))

    def _inst(self, fic: FormulaInContext, vars_: Sequence[Var]):
        return subst(fic.body, dict(zip(fic.context, vars_)))

    def _flatten(self, t, env, fresh, defs, new):
        if isinstance(t, Var):
            return env[t]
        args = [self._flatten(a, env, fresh, defs, new) for a in t.args]
        src = self.source.signature.function(t.fn)
        w = fresh(self.sort_of(src.result))
        new.append(w)
        defs.append(self.guard(src.result, w))
        defs.append(self._inst(self.fun_graph(t.fn), args + [w]))
        return w

    def _atom(self, f, env, fresh, make):
        defs, new = [], []
        terms = [self._flatten(t, env, fresh, defs, new) for t in make[0]]
        return exists(new, conj(defs + [make[1](terms)]))

    def _tr(self, f, env, fresh):
        if isinstance(f, (Top, Bot)):
            return f
        if isinstance(f, Eq):
            return self._atom(f, env, fresh, ((f.left, f.right), lambda ts: Eq(ts[0], ts[1])))
        if isinstance(f, Neq):
            s = _term_sort(f.left)
            return self._atom(f, env, fresh, ((f.left, f.right),
                                              lambda ts: self._inst(self.neq_formula(s), ts)))
        if isinstance(f, Rel):
            return self._atom(f, env, fresh, (f.args, lambda ts: self._inst(self.rel_formula(f.name), ts)))
        if isinstance(f, And):
            return conj([self._tr(p, env, fresh) for p in f.parts])
        if isinstance(f, Or):
            return disj([self._tr(p, env, fresh) for p in f.parts])
        if isinstance(f, Not):
            return Not(self._tr(f.body, env, fresh))
        if isinstance(f, Implies):
            return Implies(self._tr(f.left, env, fresh), self._tr(f.right, env, fresh))
        if isinstance(f, (Exists, Forall)):
            v = fresh(self.sort_of(f.var.sort))
            body = self._tr(f.body, {**env, f.var: v}, fresh)
            gd = self.guard(f.var.sort, v)
            if isinstance(f, Exists):
                return Exists(v, conj([gd, body]))
            return Forall(v, body if isinstance(gd, Top) else Implies(gd, body))
        raise TypeError(f"not a formula: {f!r}")

    def then(self, other: "CoherentFunctorData") -> "CoherentFunctorData":
        """other ∘ self."""
        if other.source != self.target:
            raise SortCheckError("functors are not composable")
        ssig = self.source.signature
        sorts = {}
        for s in ssig.sorts:
            x = Var("a0", self.sort_of(s))
            guard = other.translate(FormulaInContext((x,), self.guard(s, x)))
            sorts[s] = (other.sort_of(self.sort_of(s)), guard)
        rels = {r.name: other.translate(self.rel_formula(r.name)) for r in ssig.relations}
        funs = {f.name: other.translate(self.fun_graph(f.name)) for f in ssig.functions}
        neq = {s: other.translate(self.neq_formula(s)) for s in ssig.sorts if ssig.has_inequality(s)}
        objs = {k: other.translate(v) for k, v in self.objects.items()}
        return CoherentFunctorData(self.source, other.target, sorts, rels, funs, neq, objs,
                                   f"{other.name}.{self.name}")


def _term_sort(t) -> str:
    return t.sort


def identity_functor(t: Theory) -> CoherentFunctorData:
    return CoherentFunctorData(t, t, name="id")


def check_functor(F: CoherentFunctorData, gd: GroupoidOfModels) -> Report:
    """Spot checks on generators in the target's enumerated models."""
    rep = Report(f"coherent functor {F.name}")
    top = FormulaInContext((), TOP)
    rep.add("terminal preserved", objects_equal(F.translate(top), top, gd))
    bad = None
    for key, val in F.objects.items():
        plain = CoherentFunctorData(F.source, F.target, F.sorts, F.relations, F.functions, F.neq)
        if not objects_equal(plain.translate(key), substitute(val, dict(zip(val.context, plain.translate(key).context))), gd):
            bad = {"object": str(key)}
            break
    rep.add("object overrides agree with generators", bad is None, bad)
    return rep


def reduct(F: CoherentFunctorData, n_model) -> Any:
    """F*(N): the source structure read off a target model."""
    ssig = F.source.signature
    carriers = {}
    for s in ssig.sorts:
        x = Var("a0", s)
        carriers[s] = sorted(t[0] for t in definable_set(n_model, F.translate(FormulaInContext((x,), TOP))))
    rels = {}
    for r in ssig.relations:
        ctx = tuple(Var(f"a{i}", s) for i, s in enumerate(r.args))
        rels[r.name] = sorted(definable_set(n_model, F.translate(FormulaInContext(ctx, Rel(r.name, ctx)))))
    funs = {}
    for fn in ssig.functions:
        ctx = tuple(Var(f"a{i}", s) for i, s in enumerate(fn.args))
        out = Var("r", fn.result)
        graph = definable_set(n_model, F.translate(FormulaInContext(ctx + (out,), Eq(App(fn.name, ctx, fn.result), out))))
        table: dict = {}
        for t in graph:
            if t[:-1] in table:
                raise VerificationError("image of a function symbol is not functional", {"function": fn.name})
            table[t[:-1]] = t[-1]
        funs[fn.name] = table
    neq = {}
    for s in ssig.sorts:
        if ssig.has_inequality(s):
            x, y = Var("a0", s), Var("a1", s)
            neq[s] = sorted(definable_set(n_model, F.translate(FormulaInContext((x, y), Neq(x, y)))))
    return make_model(F.source, carriers, rels, funs, neq, check=False)


def mod_functor(F: CoherentFunctorData, gd: GroupoidOfModels, ga: GroupoidOfModels) -> tuple[GroupoidMorphism, Report]:
    """Mod(F): Mod(D) → Mod(A) by reduct, with continuity checked."""
    rep = Report(f"Mod({F.name})")
    f0 = []
    for i, m in enumerate(gd.models):
        r = reduct(F, m)
        j = ga.find_model(r)
        if j is None:
            raise VerificationError("reduct is not an enumerated model", {"model": i, "reduct": r.describe()})
        f0.append(j)
    f1 = []
    ssorts = F.source.signature.sorts
    for k, a in enumerate(gd.arrows):
        src = ga.models[f0[a.source]]
        comps = tuple(tuple(gd.apply(k, F.sort_of(s), x) for x in src.C[s]) for s in ssorts)
        f1.append(ga.arrow_index(f0[a.source], f0[a.target], comps))
    mor = GroupoidMorphism(gd.gpd, ga.gpd, tuple(f0), tuple(f1))
    v = mor.functoriality()
    rep.add("functorial", not v, v[:3])
    for name, c in mor.continuity().items():
        rep.add(name, c.ok, c.witness)
    return mor, rep


# --------------------------------------------------------------------------
# formal sheaves


@dataclass
class FormCategory:
    h: TopGroupoid
    n: int
    cap: int
    objects: list[EquivariantSheaf]
    classifiers: list[GroupoidMorphism] = field(repr=False)

    def iso_classes(self) -> list[list[int]]:
        classes: list[list[int]] = []
        for i, a in enumerate(self.objects):
            for c in classes:
                if is_isomorphic(a, self.objects[c[0]]):
                    c.append(i)
                    break
            else:
                classes.append([i])
        return classes

    def hom(self, i: int, j: int) -> list[tuple[int, ...]]:
        return equivariant_maps(self.objects[i], self.objects[j])

    def terminal(self) -> EquivariantSheaf:
        return terminal_sheaf(self.h, self.n)

    def closure_report(self, mode: str = "tuples", limit: int = 4) -> Report:
        """Products, coproducts, subobjects, equalizers and images stay formal."""
        reps = [self.objects[c[0]] for c in self.iso_classes()][:limit]
        rep = Report("closure of formal sheaves")
        rep.add("terminal", check_formal_conditions(self.terminal(), mode, self.n).ok)

        def formal(sh):
            return check_action_axioms(sh).ok and check_formal_conditions(sh, mode, self.n).ok

        bad = {k: None for k in ("product", "coproduct", "subobject", "equalizer", "image")}
        for a, b in product(reps, repeat=2):
            p, p1, p2 = product_sheaf(a, b)
            if bad["product"] is None and not formal(p):
                bad["product"] = [a.name, b.name]
            c, _, _ = coproduct_sheaf(a, b)
            if bad["coproduct"] is None and not formal(c):
                bad["coproduct"] = [a.name, b.name]
            maps = equivariant_maps(a, b)
            for h in maps:
                im, _ = image(SheafMorphism(a, b, h))
                if bad["image"] is None and not formal(im):
                    bad["image"] = [a.name, b.name, list(h)]
            for h1, h2 in combinations(maps, 2):
                eq, _ = equalizer(SheafMorphism(a, b, h1), SheafMorphism(a, b, h2))
                if bad["equalizer"] is None and not formal(eq):
                    bad["equalizer"] = [a.name, b.name]
        for a in reps:
            for u in stable_opens(a):
                s, _ = subsheaf(a, u)
                if bad["subobject"] is None and not formal(s):
                    bad["subobject"] = [a.name, bits(u)]
        for k, w in bad.items():
            rep.add(k, w is None, w)
        return rep


def stable_opens(sh: EquivariantSheaf, limit: int = 1 << 12) -> list[int]:
    """Unions of orbits that are open, in increasing order."""
    from .sheaves import orbit_representatives
    orbits = [mask_of(o) for _, o in orbit_representatives(sh)]
    if len(orbits) > 16:
        raise GuardError("too many orbits to list stable opens")
    out = []
    for k in range(1 << len(orbits)):
        u = 0
        for i in bits(k):
            u |= orbits[i]
        if sh.top.is_open(u):
            out.append(u)
            if len(out) > limit:
                raise GuardError("too many stable opens")
    return sorted(out)


def is_isomorphic(a: EquivariantSheaf, b: EquivariantSheaf) -> bool:
    if len(a) != len(b):
        return False
    return any(len(set(h)) == len(h) and _is_homeo(h, a, b) for h in equivariant_maps(a, b))


def _is_homeo(h, a, b) -> bool:
    inv = [0] * len(h)
    for i, j in enumerate(h):
        inv[j] = i
    return is_continuous(inv, b.top, a.top).ok


def _group_homs(h: TopGroupoid, r: int, S, A: int) -> list[dict[int, int]]:
    """Group homomorphisms Aut(r) → Aut_S(A), as arrow tables."""
    auts = h.automorphisms(r)
    targets = S.gpd.automorphisms(A)
    ident = h.identity[r]
    gens: list[int] = []
    span = {ident}
    for g in auts:
        if g not in span:
            gens.append(g)
            span = _closure(h, span | {g})
    out = []
    for imgs in product(targets, repeat=len(gens)):
        rho = {ident: S.gpd.identity[A]}
        frontier = [ident]
        ok = True
        while frontier and ok:
            nxt = []
            for x in frontier:
                for gen, im in zip(gens, imgs):
                    y = h.compose[(gen, x)]
                    val = S.gpd.compose[(im, rho[x])]
                    if y in rho:
                        if rho[y] != val:
                            ok = False
                            break
                    else:
                        rho[y] = val
                        nxt.append(y)
                if not ok:
                    break
            frontier = nxt
        if ok and len(rho) == len(auts):
            # verify multiplicativity on all pairs
            if all(rho[h.compose[(x, y)]] == S.gpd.compose[(rho[x], rho[y])] for x in auts for y in auts):
                out.append(rho)
    return out


def _closure(h: TopGroupoid, gens: set[int]) -> set[int]:
    out = set(gens)
    frontier = list(gens)
    while frontier:
        nxt = []
        for x in frontier:
            for y in list(out):
                for z in (h.compose[(x, y)], h.compose[(y, x)]):
                    if z not in out:
                        out.add(z)
                        nxt.append(z)
        frontier = nxt
    return out


def continuous_functors_to_S(h: TopGroupoid, n: int, cap: int, limit: int = 100_000) -> list[GroupoidMorphism]:
    """All continuous groupoid morphisms h → S(n) with fibers of size ≤ cap."""
    S = classifier(n)
    comps = h.components()
    per_comp = []
    for comp in comps:
        r = comp[0]
        conn = {y: (h.homs(r, y)[0]) for y in comp}
        inv_conn = {y: h.inverse[conn[y]] for y in comp}
        options = []
        for A in range(S.n_objects):
            size = len(S.subsets[A])
            if size > cap:
                continue
            same = [B for B in range(S.n_objects) if len(S.subsets[B]) == size]
            betas = [b for b in range(S.n_arrows) if S.gpd.src[b] == A and S.gpd.tgt[b] in same]
            for rho in _group_homs(h, r, S, A):
                others = [y for y in comp if y != r]
                for choice in product(betas, repeat=len(others)):
                    beta = {r: S.gpd.identity[A], **dict(zip(others, choice))}
                    f0 = {y: S.gpd.tgt[beta[y]] for y in comp}
                    f1 = {}
                    for y in comp:
                        for g in h.out_arrows(y):
                            z = h.tgt[g]
                            core = h.compose[(inv_conn[z], h.compose[(g, conn[y])])]
                            im = S.gpd.compose[(rho[core], S.gpd.inverse[beta[y]])]
                            f1[g] = S.gpd.compose[(beta[z], im)]
                    options.append((f0, f1))
                    if len(options) > limit:
                        raise GuardError(f"more than {limit} functors on one component")
        per_comp.append(options)
    X, G = h.obj_top, h.arr_top
    SX, SG = S.gpd.obj_top, S.gpd.arr_top
    comp_of = {}
    for k, comp in enumerate(comps):
        for y in comp:
            comp_of[y] = k
    arr_comp = [comp_of[h.src[g]] for g in range(h.n_arrows)]
    obj_checks: list[list[tuple[int, int]]] = [[] for _ in comps]
    for x in range(h.n_objects):
        for y in bits(X.nbhd[x]):
            obj_checks[max(comp_of[x], comp_of[y])].append((x, y))
    arr_checks: list[list[tuple[int, int]]] = [[] for _ in comps]
    for g in range(h.n_arrows):
        for g2 in bits(G.nbhd[g]):
            arr_checks[max(arr_comp[g], arr_comp[g2])].append((g, g2))
    f0 = [0] * h.n_objects
    f1 = [0] * h.n_arrows
    out: list[GroupoidMorphism] = []

    def rec(k):
        if k == len(comps):
            out.append(GroupoidMorphism(h, S.gpd, tuple(f0), tuple(f1)))
            if len(out) > limit:
                raise GuardError(f"more than {limit} formal sheaves")
            return
        for o0, o1 in per_comp[k]:
            for y, v in o0.items():
                f0[y] = v
            for g, v in o1.items():
                f1[g] = v
            if all((SX.nbhd[f0[x]] >> f0[y]) & 1 for x, y in obj_checks[k]) and \
               all((SG.nbhd[f1[g]] >> f1[g2]) & 1 for g, g2 in arr_checks[k]):
                rec(k + 1)

    rec(0)
    return out


def form_category(h: TopGroupoid, n: int, cap: int = 2, limit: int = 100_000) -> FormCategory:
    """Formal sheaves on h with fibers in {0..n-1} of size ≤ cap, as pullbacks f*(U)."""
    if h.obj_top is None or h.arr_top is None:
        raise ValueError("groupoid needs materialized topologies")
    if cap is None:
        raise ValueError("a fiber cap is required")
    S = classifier(n)
    U = S.generic_object()
    mors = continuous_functors_to_S(h, n, cap, limit)
    objs = [pullback_sheaf(m, U, f"f{i}*U") for i, m in enumerate(mors)]
    return FormCategory(h, n, cap, objs, mors)


# --------------------------------------------------------------------------
# counit


def generator_objects(theory: Theory) -> list[FormulaInContext]:
    """Sorts, relations, function graphs and inequalities as formulas in context."""
    sig = theory.signature
    out = [FormulaInContext((Var("x0", s),), TOP) for s in sig.sorts]
    for r in sig.relations:
        ctx = tuple(Var(f"x{i}", s) for i, s in enumerate(r.args))
        out.append(FormulaInContext(ctx, Rel(r.name, ctx)))
    for f in sig.functions:
        ctx = tuple(Var(f"x{i}", s) for i, s in enumerate(f.args))
        y = Var(f"x{len(ctx)}", f.result)
        out.append(FormulaInContext(ctx + (y,), Eq(App(f.name, ctx, f.result), y)))
    for s in sig.sorts:
        if sig.has_inequality(s):
            x, y = Var("x0", s), Var("x1", s)
            out.append(FormulaInContext((x, y), Neq(x, y)))
    return out


@dataclass
class CounitData:
    groupoid: GroupoidOfModels
    tracked: list[FormulaInContext]
    objects: list[EquivariantSheaf]
    homs: dict  # (i, j) -> list[SyntacticArrow]
    report: Report


def counit_eval(theory: Theory | GroupoidOfModels, n: int | None = None,
                tracked: Sequence[FormulaInContext] = (), ceiling: int | None = None) -> CounitData:
    """ε on tracked objects and their hom-sets, with functoriality, coherence,
    faithfulness and fullness checked at the bound."""
    from .logical import logical_groupoid
    if isinstance(theory, GroupoidOfModels):
        g = theory
    else:
        g = logical_groupoid(theory, n, tracked, ceiling)
    tracked = list(tracked) or generator_objects(g.theory)
    objs = [definable_sheaf(g, f) for f in tracked]
    rep = Report("counit")
    homs = {}
    func_bad = None
    full_bad = None
    for i, j in product(range(len(tracked)), repeat=2):
        arrows = hom_set(tracked[i], tracked[j], g)
        homs[(i, j)] = arrows
        maps = equivariant_maps(objs[i], objs[j])
        realized = []
        for a in arrows:
            da, db = definable_sheaf(g, a.source), definable_sheaf(g, a.target)
            m = induced_morphism(a, da, db)
            if not m.check().ok and func_bad is None:
                func_bad = {"arrow": str(a), "problem": "f_sigma is not a sheaf morphism"}
            realized.append(m.map)
        if sorted(realized) != maps and full_bad is None:
            full_bad = {"objects": [str(tracked[i]), str(tracked[j])]}
    # identities and composition
    for i, f in enumerate(tracked):
        idm = induced_morphism(identity_arrow(f), *_pair(g, identity_arrow(f)))
        if idm.map != tuple(range(len(idm.source))) and func_bad is None:
            func_bad = {"object": str(f), "problem": "identity not preserved"}
    for (i, j), ab in homs.items():
        for (j2, k), bc in homs.items():
            if j2 != j:
                continue
            for s in ab:
                for t in bc:
                    comp = compose_arrows(t, s)
                    lhs = induced_morphism(comp, *_pair(g, comp)).map
                    rhs = tuple(t.table[x] for x in s.table)
                    if lhs != rhs and func_bad is None:
                        func_bad = {"arrows": [str(s), str(t)], "problem": "composition not preserved"}
    rep.add("functorial", func_bad is None, func_bad)
    rep.extend(_coherence(g, tracked, objs))
    faithful = all(len({a.table for a in arrows}) == len(arrows) for arrows in homs.values())
    rep.add("faithful", faithful)
    rep.add("full", full_bad is None, full_bad)
    return CounitData(g, tracked, objs, homs, rep)


def _pair(g, arrow: SyntacticArrow):
    return definable_sheaf(g, arrow.source), definable_sheaf(g, arrow.target)


def _coherence(g: GroupoidOfModels, tracked, objs) -> Report:
    rep = Report("coherence")
    one = definable_sheaf(g, FormulaInContext((), TOP))
    rep.add("terminal", identity_witness(one, terminal_sheaf(g.gpd, g.universe.n)) is not None)
    bad = None
    for (fa, a), (fb, b) in product(list(zip(tracked, objs)), repeat=2):
        a2, b2, joint = _joined(fa, fb)
        dj = definable_sheaf(g, joint)
        p, _, _ = product_sheaf(a, b)
        k, m = len(fa.context), len(fb.context)
        try:
            table = tuple(p.index[(x, (_value_of(_tuple_of(v, k + m)[:k], k),
                                       _value_of(_tuple_of(v, k + m)[k:], m)))] for x, v in dj.points)
        except KeyError:
            bad = {"objects": [str(fa), str(fb)]}
            break
        fw = SheafMorphism(dj, p, table)
        inv = [0] * len(table)
        for i, t in enumerate(table):
            inv[t] = i
        bw = SheafMorphism(p, dj, tuple(inv))
        if len(set(table)) != len(p) or not fw.check().ok or not bw.check().ok:
            bad = {"objects": [str(fa), str(fb)]}
            break
    rep.add("binary products", bad is None, bad)
    bad_and = bad_or = None
    for (fa, a), (fb, b) in combinations(list(zip(tracked, objs)), 2):
        if fa.sorts != fb.sorts:
            continue
        fb2 = substitute(fb, dict(zip(fb.context, fa.context))) if \
            not {v.name for v in fb.context} & (all_var_names(fa.body) - {v.name for v in fa.context}) else None
        if fb2 is None:
            continue
        meet = definable_sheaf(g, FormulaInContext(fa.context, conj([fa.body, fb2.body])))
        join = definable_sheaf(g, FormulaInContext(fa.context, disj([fa.body, fb2.body])))
        if set(meet.points) != set(a.points) & set(b.points):
            bad_and = {"objects": [str(fa), str(fb)]}
        if set(join.points) != set(a.points) | set(b.points):
            bad_or = {"objects": [str(fa), str(fb)]}
    rep.add("meets", bad_and is None, bad_and)
    rep.add("unions", bad_or is None, bad_or)
    bad = None
    for fa, a in zip(tracked, objs):
        if not fa.context:
            continue
        k = len(fa.context)
        proj = FormulaInContext(fa.context[:-1], Exists(fa.context[-1], fa.body))
        e = definable_sheaf(g, proj)
        img = {(x, _value_of(_tuple_of(v, k)[:-1], k - 1)) for x, v in a.points}
        if set(e.points) != img:
            bad = {"object": str(fa)}
            break
    rep.add("images", bad is None, bad)
    return rep


# --------------------------------------------------------------------------
# unit


@dataclass
class UnitData:
    """η: h → Mod(Form(h)) truncated to the tracked formal sheaves."""
    h: TopGroupoid
    tracked: list[EquivariantSheaf]
    keys: list[tuple]              # object keys of Mod(Form(h)): fibers per tracked sheaf
    arrow_keys: list[tuple]        # (source, target, components)
    target: TopGroupoid
    eta0: tuple[int, ...]
    eta1: tuple[int, ...]

    def morphism(self) -> GroupoidMorphism:
        return GroupoidMorphism(self.h, self.target, self.eta0, self.eta1)

    def fiber(self, obj: int, k: int) -> tuple:
        return self.keys[obj][k]


def _sorted_values(sh, x):
    return tuple(sorted(sh.fiber_values(x), key=_value_key))


def unit(h: TopGroupoid, tracked: Sequence[EquivariantSheaf], arrows: Sequence[SheafMorphism] = (),
         check: bool = True) -> UnitData:
    """η₀(x) = M_x (fibers at x), η₁(g) = the natural iso with components α(g, ·)."""
    tracked = list(tracked)
    pos = {id(s): i for i, s in enumerate(tracked)}

    def key_of(x):
        fibers = tuple(_sorted_values(s, x) for s in tracked)
        amaps = tuple(tuple((s.value(e), m.target.value(m.map[e])) for e in m.source.fibers.get(x, []))
                      for m in arrows)
        return (fibers, amaps)

    keys: list[tuple] = []
    kidx: dict = {}
    eta0 = []
    for x in range(h.n_objects):
        k = key_of(x)
        if k not in kidx:
            kidx[k] = len(keys)
            keys.append(k)
        eta0.append(kidx[k])

    def comps_of(g):
        x = h.src[g]
        return tuple(tuple(s.value(s.action[(g, e)]) for e in sorted(s.fibers.get(x, []),
                                                                      key=lambda e: _value_key(s.value(e))))
                     for s in tracked)

    base = {}
    for g in range(h.n_arrows):
        base[(eta0[h.src[g]], eta0[h.tgt[g]], comps_of(g))] = None
    # close under composition and inverses
    arrow_set = set(base)
    by_src: dict[int, set] = {}
    for a in arrow_set:
        by_src.setdefault(a[0], set()).add(a)
    changed = True
    while changed:
        changed = False
        for a in list(arrow_set):
            for c in [_inv_key(keys, a)] + [_comp_key(keys, b, a) for b in list(by_src.get(a[1], ()))]:
                if c not in arrow_set:
                    arrow_set.add(c)
                    by_src.setdefault(c[0], set()).add(c)
                    changed = True
    arrow_keys = sorted(arrow_set, key=lambda a: (a[0], a[1], _value_key(a[2])))
    aidx = {a: i for i, a in enumerate(arrow_keys)}
    n_obj = len(keys)
    src = tuple(a[0] for a in arrow_keys)
    tgt = tuple(a[1] for a in arrow_keys)
    ident = tuple(aidx[(o, o, tuple(keys[o][0]))] for o in range(n_obj))
    inv = tuple(aidx[_inv_key(keys, a)] for a in arrow_keys)
    comp = {}
    for f in arrow_keys:
        for g in by_src.get(f[1], ()):
            comp[(aidx[g], aidx[f])] = aidx[_comp_key(keys, g, f)]
    target = TopGroupoid(n_obj, src, tgt, ident, inv, comp)
    target = target.with_topology(*_modform_topologies(keys, arrow_keys, tracked, arrows))
    eta1 = tuple(aidx[(eta0[h.src[g]], eta0[h.tgt[g]], comps_of(g))] for g in range(h.n_arrows))
    data = UnitData(h, tracked, keys, arrow_keys, target, tuple(eta0), eta1)
    if check:
        for name, c in data.morphism().continuity().items():
            if not c:
                w = c.witness
                raise VerificationError(f"unit: {name} fails", {"point": w.point, "open": list(w.subset)})
    return data


def _inv_key(keys, a):
    s, t, comps = a
    out = []
    for k, c in enumerate(comps):
        back = dict(zip(c, keys[s][0][k]))
        out.append(tuple(back[v] for v in keys[t][0][k]))
    return (t, s, tuple(out))


def _comp_key(keys, g, f):
    """g ∘ f for composable natural isos."""
    s = f[0]
    out = []
    for k, (cf, cg) in enumerate(zip(f[2], g[2])):
        gmap = dict(zip(keys[f[1]][0][k], cg))
        out.append(tuple(gmap[v] for v in cf))
    return (s, g[1], tuple(out))


def _modform_topologies(keys, arrow_keys, tracked, arrows):
    n = len(keys)
    sub = []
    for k in range(len(tracked)):
        values = sorted({v for key in keys for v in key[0][k]}, key=_value_key)
        for v in values:
            sub.append((f"<{k},{v}>", mask_of(o for o in range(n) if v in keys[o][0][k])))
    # spans of two tracked arrows with a common source
    for i, j in combinations(range(len(arrows)), 2):
        if arrows[i].source is not arrows[j].source:
            continue
        pairs = set()
        for o in range(n):
            for (x, a), (_, b) in zip(keys[o][1][i], keys[o][1][j]):
                pairs.add((a, b))
        for a, b in sorted(pairs, key=lambda p: (_value_key(p[0]), _value_key(p[1]))):
            sub.append((f"<span {i},{j}: {a},{b}>", mask_of(
                o for o in range(n)
                if any(ya == yb and va == a and vb == b
                       for (ya, va), (yb, vb) in zip(keys[o][1][i], keys[o][1][j])))))
    for i in range(len(arrows)):
        vals = {b for key in keys for _, b in key[1][i]}
        for b in sorted(vals, key=_value_key):
            sub.append((f"<arrow {i}: {b}>", mask_of(o for o in range(n) if any(v == b for _, v in keys[o][1][i]))))
    X = FiniteTopology.from_subbasis(n, sub)
    asub = []
    for name, m in sub:
        asub.append((f"s^-1 {name}", mask_of(a for a, k in enumerate(arrow_keys) if (m >> k[0]) & 1)))
        asub.append((f"t^-1 {name}", mask_of(a for a, k in enumerate(arrow_keys) if (m >> k[1]) & 1)))
    trans: dict = {}
    for ai, (s, _, comps) in enumerate(arrow_keys):
        for k, c in enumerate(comps):
            for a, b in zip(keys[s][0][k], c):
                trans[(k, a, b)] = trans.get((k, a, b), 0) | (1 << ai)
    for key in sorted(trans, key=lambda t: (t[0], _value_key(t[1]), _value_key(t[2]))):
        asub.append((f"<{key[0]}: {key[1]}->{key[2]}>", trans[key]))
    G = FiniteTopology.from_subbasis(len(arrow_keys), asub)
    return X, G


def evaluation_sheaf(data: UnitData, k: int) -> EquivariantSheaf:
    """Y(A) over Mod(Form(h)) for the k-th tracked sheaf: fiber over M is M(A)."""
    T = data.target
    pts = [(o, v) for o in range(T.n_objects) for v in data.keys[o][0][k]]

    def nb(p):
        o, v = p
        return [(o2, v) for o2 in bits(T.obj_top.nbhd[o]) if v in data.keys[o2][0][k]]

    def act(g, p):
        o, v = p
        s, _, comps = data.arrow_keys[g]
        return dict(zip(data.keys[s][0][k], comps[k]))[v]

    return make_sheaf(T, pts, nb, act, f"Y({data.tracked[k].name})", data.tracked[k].universe)


# --------------------------------------------------------------------------
# triangle identities


def triangle_one(data: UnitData) -> Report:
    """η*(Y(A)) = A on the nose for each tracked formal sheaf A."""
    rep = Report("triangle identity (groupoid side)")
    m = data.morphism()
    v = m.functoriality()
    rep.add("eta functorial", not v, v[:3])
    for name, c in m.continuity().items():
        rep.add(f"eta {name}", c.ok, c.witness)
    if not rep.ok:
        return rep
    for k, a in enumerate(data.tracked):
        pb = pullback_sheaf(m, evaluation_sheaf(data, k))
        w = identity_witness(pb, a)
        rep.add(f"eta*(Y({a.name})) = {a.name}", w is not None, {"sheaf": a.name})
    return rep


def triangle_two(g: GroupoidOfModels, data: UnitData | None = None) -> Report:
    """Mod(ε) ∘ η on G_T is the identity, read through the generator objects."""
    rep = Report("triangle identity (theory side)")
    gens = generator_objects(g.theory)
    if data is None:
        data = unit(g.gpd, [definable_sheaf(g, f) for f in gens])
    sig = g.theory.signature
    where = {}
    idx = 0
    for s in sig.sorts:
        where[("sort", s)] = idx
        idx += 1
    for r in sig.relations:
        where[("rel", r.name)] = idx
        idx += 1
    for f in sig.functions:
        where[("fun", f.name)] = idx
        idx += 1
    for s in sig.sorts:
        if sig.has_inequality(s):
            where[("neq", s)] = idx
            idx += 1

    def read(o):
        fib = data.keys[o][0]
        carriers = {s: list(fib[where[("sort", s)]]) for s in sig.sorts}
        rels = {r.name: [_tuple_of(v, len(r.args)) for v in fib[where[("rel", r.name)]]] for r in sig.relations}
        funs = {f.name: {_tuple_of(v, len(f.args) + 1)[:-1]: _tuple_of(v, len(f.args) + 1)[-1]
                         for v in fib[where[("fun", f.name)]]} for f in sig.functions}
        neq = {s: list(fib[where[("neq", s)]]) for s in sig.sorts if sig.has_inequality(s)}
        return make_model(g.theory, carriers, rels, funs, neq, check=False)

    bad = None
    back = []
    for x in range(g.n_objects):
        j = g.find_model(read(data.eta0[x]))
        back.append(j)
        if j != x and bad is None:
            bad = {"object": x, "read back": j}
    rep.add("objects", bad is None, bad)
    bad = None
    for a in range(g.n_arrows):
        s, t, comps = data.arrow_keys[data.eta1[a]]
        sorts_comp = tuple(comps[where[("sort", srt)]] for srt in sig.sorts)
        try:
            b = g.arrow_index(back[g.src[a]], back[g.tgt[a]], sorts_comp)
        except (KeyError, TypeError):
            b = None
        if b != a and bad is None:
            bad = {"arrow": a, "read back": b}
    rep.add("arrows", bad is None, bad)
    return rep


def check_triangle_identities(theory: Theory | GroupoidOfModels, n: int | None = None,
                              tracked: Sequence[FormulaInContext] = (), data: UnitData | None = None,
                              ceiling: int | None = None) -> Report:
    from .logical import logical_groupoid
    g = theory if isinstance(theory, GroupoidOfModels) else logical_groupoid(theory, n, tracked, ceiling)
    rep = Report("triangle identities")
    gens = generator_objects(g.theory)
    shs = [definable_sheaf(g, f) for f in gens]
    extra = [definable_sheaf(g, f) for f in tracked if not any(f.alpha_equal(x) for x in gens)]
    if data is None:
        data = unit(g.gpd, shs + extra)
    rep.extend(triangle_one(data))
    rep.extend(triangle_two(g, data))
    return rep


# --------------------------------------------------------------------------
# adequacy


def _probe_at(theory: Theory, tracked, n: int, ceiling):
    from .logical import logical_groupoid
    g = logical_groupoid(theory, n, (), ceiling)
    forms = list(tracked)
    for sorts in sorted({f.sorts for f in tracked}):
        ctx = tuple(Var(f"x{i}", s) for i, s in enumerate(sorts))
        forms += [FormulaInContext(ctx, TOP), FormulaInContext(ctx, BOT)]
    classes = []
    for i, f in enumerate(forms):
        for c in classes:
            if forms[c[0]].sorts == f.sorts and objects_equal(forms[c[0]], f, g):
                c.append(i)
                break
        else:
            classes.append([i])
    g = logical_groupoid(theory, n, tracked, ceiling)
    shs = [definable_sheaf(g, f) for f in tracked]
    counts = {(i, j): len(equivariant_maps(shs[i], shs[j]))
              for i in range(len(shs)) for j in range(len(shs))}
    return sorted(map(tuple, classes)), counts, g.n_objects


def adequacy_probe(theory: Theory, tracked: Sequence[FormulaInContext], n: int, ceiling: int | None = None) -> Report:
    """Stable iff equivalence classes and hom counts agree at n and n+1."""
    rep = Report(f"adequacy at {n}")
    c1, h1, m1 = _probe_at(theory, tracked, n, ceiling)
    c2, h2, m2 = _probe_at(theory, tracked, n + 1, ceiling)
    rep.add("equivalence classes stable", c1 == c2, {"at n": c1, "at n+1": c2})
    diff = {f"{k}": [h1[k], h2[k]] for k in h1 if h1[k] != h2[k]}
    rep.add("hom counts stable", not diff, diff, note=f"{m1} and {m2} models")
    return rep
