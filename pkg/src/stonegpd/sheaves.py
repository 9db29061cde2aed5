"""Equivariant sheaves on finite topological groupoids.

A sheaf is a finite list of points ``(object, value)`` sorted canonically, a
topology on them, and an action table ``action[(arrow, point)] -> point``.
Definable sheaves come from formulas over an equipped groupoid of models; the
remaining constructions (products, tagged coproducts, subsheaves) work over
any ``TopGroupoid``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Any, Sequence

from .errors import VerificationError
from .groupoid import TopGroupoid
from .logic.simplify import simplify_in_context
from .logic.syntax import (BOT, COHERENT, CoherenceError, Eq, FormulaInContext, Neq, Not,
                           SortCheckError, Var, all_var_names, check_formula, conj, exists,
                           is_coherent, subst)
from .models import GroupoidOfModels, compile_formula, definable_set
from .report import Report
from .topology import (FiniteTopology, Witness, bits, is_continuous, is_local_homeomorphism,
                       mask_of, product as product_top)


@dataclass(eq=False)
class EquivariantSheaf:
    base: TopGroupoid
    points: tuple[tuple[int, Any], ...]
    top: FiniteTopology
    action: dict = field(repr=False)
    name: str = ""
    formula: FormulaInContext | None = None
    origin: GroupoidOfModels | None = field(default=None, repr=False)
    universe: int | None = None

    def __post_init__(self):
        self.proj = tuple(x for x, _ in self.points)
        self.index = {p: i for i, p in enumerate(self.points)}
        self.fibers: dict[int, list[int]] = {x: [] for x in range(self.base.n_objects)}
        for i, (x, _) in enumerate(self.points):
            self.fibers.setdefault(x, []).append(i)
        self._out: dict[int, list[int]] | None = None

    def __len__(self):
        return len(self.points)

    @property
    def full(self) -> int:
        return (1 << len(self.points)) - 1

    def out_arrows(self, x: int) -> list[int]:
        if self._out is None:
            out: dict[int, list[int]] = {y: [] for y in range(self.base.n_objects)}
            for g in range(self.base.n_arrows):
                out[self.base.src[g]].append(g)
            self._out = out
        return self._out.get(x, [])

    def value(self, e: int):
        return self.points[e][1]

    def fiber_values(self, x: int) -> list:
        return [self.points[e][1] for e in self.fibers.get(x, [])]

    def act(self, g: int, e: int) -> int:
        return self.action[(g, e)]

    def to_json(self) -> dict:
        return {"name": self.name,
                "formula": None if self.formula is None else str(self.formula),
                "base_objects": self.base.n_objects,
                "points": [[x, _plain(v)] for x, v in self.points],
                "action": [[g, e, t] for (g, e), t in sorted(self.action.items())],
                "topology": self.top.to_json()}


def _plain(v):
    return list(map(_plain, v)) if isinstance(v, tuple) else v


def make_sheaf(base: TopGroupoid, points: Sequence[tuple[int, Any]], nbhd_or_subbasis,
               action_fn, name: str = "", universe: int | None = None, **kw) -> EquivariantSheaf:
    """Assemble a sheaf: points are sorted, ``action_fn(g, (x, v)) -> value``.

    ``nbhd_or_subbasis`` is a callable giving each point's neighbourhood as a
    set of points, or a FiniteTopology over the sorted points.
    """
    pts = tuple(sorted(points, key=_point_key))
    index = {p: i for i, p in enumerate(pts)}
    if isinstance(nbhd_or_subbasis, FiniteTopology):
        top = nbhd_or_subbasis
    else:
        nb = [mask_of(index[q] for q in nbhd_or_subbasis(p)) for p in pts]
        top = FiniteTopology(len(pts), tuple(nb))
    action = {}
    by_obj: dict[int, list[int]] = {}
    for i, (x, _) in enumerate(pts):
        by_obj.setdefault(x, []).append(i)
    for g in range(base.n_arrows):
        t = base.tgt[g]
        for e in by_obj.get(base.src[g], ()):
            v = action_fn(g, pts[e])
            action[(g, e)] = index[(t, v)]
    return EquivariantSheaf(base, pts, top, action, name, universe=universe, **kw)


def _point_key(p):
    return (p[0], _value_key(p[1]))


def _value_key(v):
    if isinstance(v, tuple):
        return (1, tuple(_value_key(w) for w in v))
    return (0, v)


# --------------------------------------------------------------------------
# definable sheaves


def _value_of(t: tuple, arity: int):
    return t[0] if arity == 1 else t


def _tuple_of(v, arity: int) -> tuple:
    return (v,) if arity == 1 else v


def definable_sheaf(g: GroupoidOfModels, f: FormulaInContext, name: str = "") -> EquivariantSheaf:
    """⟦x̄|φ⟧ with the action θ(h, (M, ā)) = (t(h), h(ā)) and the logical topology."""
    theory = g.theory
    check_formula(theory.signature, f.body)
    for v in f.context:
        if v.sort not in theory.signature.sorts:
            raise SortCheckError(f"unknown sort {v.sort}")
    if theory.fragment == COHERENT and not is_coherent(f):
        raise CoherenceError(f"{f} is not coherent")
    if g.obj_top is None:
        raise ValueError("groupoid has no topology; equip it first")
    k = len(f.context)
    sorts = f.sorts
    points = []
    for i, m in enumerate(g.models):
        for t in sorted(definable_set(m, f)):
            points.append((i, _value_of(t, k)))
    pts = tuple(sorted(points, key=_point_key))
    index = {p: j for j, p in enumerate(pts)}
    proj = [x for x, _ in pts]
    sub = []
    for label, mask in g.obj_top.subbasis:
        sub.append((f"pi^-1 {label}", mask_of(j for j, x in enumerate(proj) if (mask >> x) & 1)))
    by_value: dict[Any, int] = {}
    for j, (_, v) in enumerate(pts):
        by_value[v] = by_value.get(v, 0) | (1 << j)
    for v in sorted(by_value, key=_value_key):
        sub.append((f"section {v}", by_value[v]))
    top = FiniteTopology.from_subbasis(len(pts), sub)
    action = {}
    by_obj: dict[int, list[int]] = {}
    for j, x in enumerate(proj):
        by_obj.setdefault(x, []).append(j)
    for a in range(g.n_arrows):
        s, t = g.src[a], g.tgt[a]
        for j in by_obj.get(s, ()):
            img = g.apply_tuple(a, sorts, _tuple_of(pts[j][1], k))
            action[(a, j)] = index[(t, _value_of(img, k))]
    return EquivariantSheaf(g.gpd, pts, top, action, name or str(f), f, g, g.universe.n)


def extension(sh: EquivariantSheaf, f: FormulaInContext) -> int:
    """Points of a definable sheaf lying in ⟦x̄|f⟧ (f in the sheaf's context sorts)."""
    g = sh.origin
    if g is None:
        raise ValueError("not a definable sheaf")
    k = len(f.context)
    out = 0
    for i, m in enumerate(g.models):
        for t in definable_set(m, f):
            j = sh.index.get((i, _value_of(t, k)))
            if j is None:
                raise VerificationError(f"{f} is not a subobject of {sh.name}", (i, t))
            out |= 1 << j
    return out


def basic_open_sheaf(sh: EquivariantSheaf, psi: FormulaInContext, params: Sequence[int]) -> int:
    """⟨[x̄,ȳ|ψ], b̄⟩ = {(M, ā) : ā∗b̄ ∈ ⟦ψ⟧^M} over a definable sheaf."""
    g, f = sh.origin, sh.formula
    if g is None or f is None:
        raise ValueError("not a definable sheaf")
    k = len(f.context)
    if psi.sorts[:k] != f.sorts or len(psi.context) != k + len(params):
        raise SortCheckError("basic open does not match the sheaf context")
    ev = compile_formula(psi.context, psi.body)
    ysorts = psi.sorts[k:]
    out = 0
    for j, (i, v) in enumerate(sh.points):
        m = g.models[i]
        if all(b in m.C[s] for s, b in zip(ysorts, params)):
            if ev(m, _tuple_of(v, k) + tuple(params)):
                out |= 1 << j
    return out


# --------------------------------------------------------------------------
# action axioms


def check_action_axioms(sh: EquivariantSheaf) -> Report:
    rep = Report("action axioms")
    B = sh.base
    # compatibility and totality
    bad = None
    for g in range(B.n_arrows):
        for e in sh.fibers.get(B.src[g], ()):
            t = sh.action.get((g, e))
            if t is None:
                bad = {"arrow": g, "point": e, "problem": "action undefined"}
                break
            if sh.proj[t] != B.tgt[g]:
                bad = {"arrow": g, "point": e, "image": t, "problem": "image outside target fiber"}
                break
        if bad:
            break
    rep.add("compatibility", bad is None, bad)
    bad = None
    for x in range(B.n_objects):
        i = B.identity[x]
        for e in sh.fibers.get(x, ()):
            if sh.action.get((i, e)) != e:
                bad = {"object": x, "point": e}
                break
        if bad:
            break
    rep.add("unit", bad is None, bad)
    bad = None
    for (h, g), hg in B.compose.items():
        for e in sh.fibers.get(B.src[g], ()):
            ge = sh.action.get((g, e))
            lhs = sh.action.get((hg, e))
            rhs = None if ge is None else sh.action.get((h, ge))
            if lhs != rhs:
                bad = {"arrows": [h, g], "point": e}
                break
        if bad:
            break
    rep.add("composition", bad is None, bad)
    bad = None
    for g in range(B.n_arrows):
        src_f = sh.fibers.get(B.src[g], [])
        img = {sh.action.get((g, e)) for e in src_f}
        if len(img) != len(src_f) or len(src_f) != len(sh.fibers.get(B.tgt[g], [])):
            bad = {"arrow": g}
            break
    rep.add("fiber bijection", bad is None, bad)
    lh = is_local_homeomorphism(sh.proj, sh.top, B.obj_top)
    rep.add("local homeomorphism", lh.ok, lh.witness)
    rep.add("action continuity", *_action_continuity(sh))
    return rep


def _action_continuity(sh: EquivariantSheaf):
    B = sh.base
    pairs = [(g, e) for g in range(B.n_arrows) for e in sh.fibers.get(B.src[g], ())]
    if any(p not in sh.action for p in pairs):
        return False, {"problem": "action not total"}
    dom = product_top(B.arr_top, sh.top, pairs)
    c = is_continuous([sh.action[p] for p in pairs], dom, sh.top)
    w = None
    if not c:
        w = {"pair": pairs[c.witness.point], "reason": c.witness.reason}
    return c.ok, w


# --------------------------------------------------------------------------
# morphisms


@dataclass(eq=False)
class SheafMorphism:
    source: EquivariantSheaf
    target: EquivariantSheaf
    map: tuple[int, ...]
    label: str = ""

    def check(self) -> Report:
        rep = Report("sheaf morphism")
        A, B, h = self.source, self.target, self.map
        over = next((e for e in range(len(A)) if B.proj[h[e]] != A.proj[e]), None)
        rep.add("over the base", over is None, {"point": over})
        bad = None
        for (g, e), t in A.action.items():
            if h[t] != B.action.get((g, h[e])):
                bad = {"arrow": g, "point": e}
                break
        rep.add("equivariance", bad is None, bad)
        c = is_continuous(h, A.top, B.top)
        rep.add("continuity", c.ok, c.witness)
        return rep

    def then(self, other: "SheafMorphism") -> "SheafMorphism":
        return SheafMorphism(self.source, other.target, tuple(other.map[x] for x in self.map))

    def image_mask(self) -> int:
        return mask_of(self.map)

    def is_injective(self) -> bool:
        return len(set(self.map)) == len(self.map)


def identity_morphism(sh: EquivariantSheaf) -> SheafMorphism:
    return SheafMorphism(sh, sh, tuple(range(len(sh))), "id")


def identity_witness(a: EquivariantSheaf, b: EquivariantSheaf) -> tuple[int, ...] | None:
    """The fiberwise identity a → b when both have the same points, action and topology."""
    if len(a) != len(b) or a.base.n_arrows != b.base.n_arrows:
        return None
    try:
        h = tuple(b.index[p] for p in a.points)
    except KeyError:
        return None
    if any(b.action.get((g, h[e])) != h[t] for (g, e), t in a.action.items()):
        return None
    for e in range(len(a)):
        if mask_of(h[x] for x in bits(a.top.nbhd[e])) != b.top.nbhd[h[e]]:
            return None
    return h


# --------------------------------------------------------------------------
# stabilization


def stabilize(sh: EquivariantSheaf, u: int) -> int:
    """Orbit closure of ``u``."""
    out = u
    for e in bits(u):
        for g in sh.out_arrows(sh.proj[e]):
            out |= 1 << sh.action[(g, e)]
    return out


def is_stable(sh: EquivariantSheaf, u: int) -> bool:
    return stabilize(sh, u) == u


def stabilize_formula(phi: FormulaInContext, psi: FormulaInContext, params: Sequence[int] = (),
                      signature=None, require_coherent: bool = True) -> FormulaInContext:
    """ξ = ∃ȳ.(φ ∧ ψ ∧ pairwise y_i ≠ y_j for same-sort parameters).

    ψ is over x̄∗ȳ (x̄ of φ's sorts) and is first put in reduced form by
    merging equal parameters. Sorts without an inequality predicate (per
    ``signature``) use a negated equation instead.
    """
    from .logical import reduce_spec
    k = len(phi.context)
    if psi.sorts[:k] != phi.sorts:
        raise SortCheckError("ψ context must start with φ's sorts")
    if len(psi.context) != k + len(params):
        raise SortCheckError("parameter tuple length does not match ψ")
    if require_coherent and not is_coherent(psi):
        raise CoherenceError(f"{psi} is not coherent")
    psi, params = reduce_spec(psi, params, keep=k)
    xs = psi.context[:k]
    ys = list(psi.context[k:])
    avoid = {v.name for v in phi.context} | all_var_names(phi.body)
    ren: dict[Var, Var] = dict(zip(xs, phi.context))
    used = set(avoid)
    for y in ys:
        name = y.name
        i = 0
        while name in used:
            name = f"{y.name}_{i}"
            i += 1
        used.add(name)
        ren[y] = Var(name, y.sort)
    body = subst(psi.body, ren)
    ys = [ren[y] for y in psi.context[k:]]
    ineq = []
    for a, b in combinations(ys, 2):
        if a.sort != b.sort:
            continue
        if signature is None or signature.has_inequality(a.sort):
            ineq.append(Neq(a, b))
        else:
            ineq.append(Not(Eq(a, b)))
    return FormulaInContext(phi.context, exists(ys, conj([phi.body, body] + ineq)))


def decompose_stable_open(sh: EquivariantSheaf, u: int, simplify: bool = True) -> list[FormulaInContext]:
    """Subobject formulas whose extensions have union exactly ``u``."""
    from .logical import diagram_body, element_vars, uses_classical_diagrams
    g, phi = sh.origin, sh.formula
    if g is None or phi is None:
        raise ValueError("not a definable sheaf")
    for e in bits(u):
        for a in sh.out_arrows(sh.proj[e]):
            if not (u >> sh.action[(a, e)]) & 1:
                raise VerificationError("not stable", {"point": e, "arrow": a})
        if sh.top.nbhd[e] & ~u:
            raise VerificationError("not open", {"point": e, "neighbourhood": bits(sh.top.nbhd[e])})
    if u == 0:
        return [FormulaInContext(phi.context, BOT)]
    if u == sh.full:
        return [phi]
    classical = uses_classical_diagrams(g)
    sig = g.theory.signature
    k = len(phi.context)
    taken = {v.name for v in phi.context} | all_var_names(phi.body)
    prefix = next(c for c in ("y", "e", "d", "p", "q", "yy", "ee", "dd") + tuple(f"y{i}k" for i in range(99))
                  if not any(t.startswith(c) for t in taken))
    found: list[tuple[FormulaInContext, int]] = []
    covered = 0
    for e in bits(u):
        if (covered >> e) & 1:
            continue
        i, v = sh.points[e]
        m = g.models[i]
        names = element_vars(m, prefix)
        elems = m.elements()
        eqs = [Eq(x, names[(x.sort, a)]) for x, a in zip(phi.context, _tuple_of(v, k))]
        psi = FormulaInContext(phi.context + tuple(names[el] for el in elems),
                               conj([diagram_body(m, names, classical)] + eqs))
        xi = stabilize_formula(phi, psi, tuple(a for _, a in elems), sig, require_coherent=not classical)
        if simplify:
            xi = simplify_in_context(xi)
        ext = extension(sh, xi)
        if ext & ~u or not (ext >> e) & 1:
            raise VerificationError("stabilized basic open escapes the open set", {"point": e})
        found.append((xi, ext))
        covered |= ext
    # drop redundant members, last first
    keep = list(found)
    for item in reversed(found):
        rest = [x for x in keep if x is not item]
        union = 0
        for _, ext in rest:
            union |= ext
        if union == u:
            keep = rest
    union = 0
    for _, ext in keep:
        union |= ext
    if union != u:
        raise VerificationError("decomposition does not cover", {"missing": bits(u & ~union)})
    return [f for f, _ in keep]


# --------------------------------------------------------------------------
# equivariant maps


def orbit_representatives(sh: EquivariantSheaf) -> list[tuple[int, list[int]]]:
    seen = 0
    out = []
    for e in range(len(sh)):
        if (seen >> e) & 1:
            continue
        orb = sorted({sh.action[(g, e)] for g in sh.out_arrows(sh.proj[e])} | {e})
        for x in orb:
            seen |= 1 << x
        out.append((e, orb))
    return out


def equivariant_maps(a: EquivariantSheaf, b: EquivariantSheaf, limit: int | None = None) -> list[tuple[int, ...]]:
    """All continuous, equivariant, fiber-preserving maps a → b (as point tables)."""
    B = a.base
    reps = orbit_representatives(a)
    orbit_of = {}
    for k, (_, orb) in enumerate(reps):
        for x in orb:
            orbit_of[x] = k
    choices = []
    for e, _ in reps:
        x = a.proj[e]
        stab = [g for g in B.automorphisms(x) if a.action[(g, e)] == e]
        cands = [c for c in b.fibers.get(x, []) if all(b.action[(g, c)] == c for g in stab)]
        choices.append(cands)
    checks: list[list[tuple[int, int]]] = [[] for _ in reps]
    for y in range(len(a)):
        for z in bits(a.top.nbhd[y]):
            checks[max(orbit_of[y], orbit_of[z])].append((y, z))
    h = [-1] * len(a)
    out: list[tuple[int, ...]] = []

    def rec(k: int):
        if limit is not None and len(out) >= limit:
            return
        if k == len(reps):
            out.append(tuple(h))
            return
        e, orb = reps[k]
        x = a.proj[e]
        for c in choices[k]:
            for g in a.out_arrows(x):
                h[a.action[(g, e)]] = b.action[(g, c)]
            if all((b.top.nbhd[h[y]] >> h[z]) & 1 for y, z in checks[k]):
                rec(k + 1)
        for y in orb:
            h[y] = -1

    rec(0)
    return sorted(out)


# --------------------------------------------------------------------------
# covers by definables


def _ineq_conjuncts(ctx: Sequence[Var], signature) -> list:
    out = []
    for a, b in combinations(ctx, 2):
        if a.sort == b.sort:
            out.append(Neq(a, b) if signature.has_inequality(a.sort) else Not(Eq(a, b)))
    return out


def cover_by_definables(sh: EquivariantSheaf, g: GroupoidOfModels) -> list[SheafMorphism]:
    """Morphisms from definable sheaves whose images jointly cover ``sh``.

    Points are processed in order; for each uncovered point e over M the
    candidates are ⟨ā, φ⟩ with ā ⊆ elements of M by increasing size and φ
    either ⊤ or M's diagram restricted to ā. The candidate map v̂ is seeded
    at (M, ā) ↦ e and propagated along neighbourhoods and the action; it is
    accepted when total, consistent and a verified sheaf morphism.
    """
    from .logical import diagram_body, uses_classical_diagrams
    if sh.base is not g.gpd and sh.base != g.gpd:
        raise ValueError("sheaf is not over this groupoid")
    sig = g.theory.signature
    classical = uses_classical_diagrams(g)
    cache: dict[FormulaInContext, EquivariantSheaf] = {}
    out: list[SheafMorphism] = []
    covered = 0
    for e in range(len(sh)):
        if (covered >> e) & 1:
            continue
        i = sh.proj[e]
        m = g.models[i]
        elems = m.elements()
        hit = None
        for k in range(len(elems) + 1):
            for sub in combinations(elems, k):
                ctx = tuple(Var(f"x{j}", s) for j, (s, _) in enumerate(sub))
                names = dict(zip(sub, ctx))
                ineq = _ineq_conjuncts(ctx, sig)
                options = [conj(ineq)]
                d = conj([diagram_body(m, names, classical)] + ineq)
                if d != options[0]:
                    options.append(d)
                for body in options:
                    f = FormulaInContext(ctx, body)
                    key = f.canonical()
                    if key not in cache:
                        cache[key] = definable_sheaf(g, f)
                    D = cache[key]
                    seed = D.index.get((i, _value_of(tuple(a for _, a in sub), k)))
                    if seed is None:
                        continue
                    vmap = _propagate(D, sh, seed, e)
                    if vmap is None:
                        continue
                    mor = SheafMorphism(D, sh, vmap, str(f))
                    if mor.check().ok:
                        hit = mor
                        break
                if hit:
                    break
            if hit:
                break
        if hit is None:
            raise VerificationError("no generating section found", {"point": e})
        out.append(hit)
        covered |= hit.image_mask()
    return out


def _propagate(D: EquivariantSheaf, sh: EquivariantSheaf, seed: int, e: int) -> tuple[int, ...] | None:
    v = [-1] * len(D)
    v[seed] = e
    stack = [seed]
    while stack:
        d = stack.pop()
        img = v[d]
        todo = []
        for d2 in bits(D.top.nbhd[d]):
            y = D.proj[d2]
            cands = [c for c in sh.fibers.get(y, []) if (sh.top.nbhd[img] >> c) & 1]
            if len(cands) != 1:
                return None
            todo.append((d2, cands[0]))
        for g in D.out_arrows(D.proj[d]):
            todo.append((D.action[(g, d)], sh.action[(g, img)]))
        for d2, c in todo:
            if v[d2] == -1:
                v[d2] = c
                stack.append(d2)
            elif v[d2] != c:
                return None
    if -1 in v:
        return None
    return tuple(v)


# --------------------------------------------------------------------------
# formal conditions


def _in_universe(v, n: int | None, mode: str) -> bool:
    if isinstance(v, bool):
        return False
    if isinstance(v, int):
        return v >= 0 and (n is None or v < n)
    if mode == "tuples" and isinstance(v, tuple):
        return all(_in_universe(w, n, mode) for w in v)
    return False


def check_formal_conditions(sh: EquivariantSheaf, mode: str = "tuples", universe: int | None = None) -> Report:
    """Conditions (i)–(iv) characterizing formal sheaves."""
    if mode not in ("atoms", "tuples"):
        raise ValueError("mode is 'atoms' or 'tuples'")
    n = universe if universe is not None else sh.universe
    B = sh.base
    rep = Report("formal conditions")
    rep.add("(i) compact", True, note="trivial at finite scale")
    bad = None
    for x, fib in sh.fibers.items():
        for p, q in combinations(fib, 2):
            if sh.top.nbhd[p] & sh.top.nbhd[q]:
                bad = {"object": x, "points": [p, q]}
                break
        if bad:
            break
    rep.add("(i) decidable", bad is None, bad)
    bad = next(({"point": e, "value": _plain(v)} for e, (_, v) in enumerate(sh.points)
                if not _in_universe(v, n, mode)), None)
    rep.add("(ii) fibers in universe", bad is None, bad, note=f"mode={mode}")
    bad = None
    by_value: dict[Any, list[int]] = {}
    for e, (_, v) in enumerate(sh.points):
        by_value.setdefault(v, []).append(e)
    for v in sorted(by_value, key=_value_key):
        objs = mask_of(sh.proj[e] for e in by_value[v])
        if not B.obj_top.is_open(objs):
            bad = {"value": _plain(v), "problem": "<A,a> not open", "objects": bits(objs)}
            break
        for e in by_value[v]:
            x = sh.proj[e]
            for y in bits(B.obj_top.nbhd[x]):
                f = sh.index.get((y, v))
                if f is None or not (sh.top.nbhd[e] >> f) & 1:
                    bad = {"value": _plain(v), "problem": "section not continuous", "object": x, "near": y}
                    break
            if bad:
                break
        if bad:
            break
    rep.add("(iii) sections", bad is None, bad)
    transport: dict[tuple, int] = {}
    for (g, e), t in sh.action.items():
        k = (_value_key(sh.points[e][1]), _value_key(sh.points[t][1]))
        transport[k] = transport.get(k, 0) | (1 << g)
    bad = None
    for k in sorted(transport):
        if not B.arr_top.is_open(transport[k]):
            bad = {"transport": str(k), "arrows": bits(transport[k])}
            break
    rep.add("(iv) transport opens", bad is None, bad)
    return rep


# --------------------------------------------------------------------------
# constructions


def empty_sheaf(base: TopGroupoid, universe: int | None = None) -> EquivariantSheaf:
    return EquivariantSheaf(base, (), FiniteTopology(0, ()), {}, "0", universe=universe)


def terminal_sheaf(base: TopGroupoid, universe: int | None = None) -> EquivariantSheaf:
    pts = [(x, ()) for x in range(base.n_objects)]

    def nb(p):
        return [(y, ()) for y in bits(base.obj_top.nbhd[p[0]])]

    return make_sheaf(base, pts, nb, lambda g, p: (), "1", universe)


def product_sheaf(a: EquivariantSheaf, b: EquivariantSheaf) -> tuple[EquivariantSheaf, SheafMorphism, SheafMorphism]:
    """Fiber product over the base with values (u, v), and its two projections."""
    base = a.base
    pts = [(x, (a.value(e), b.value(f))) for x in range(base.n_objects)
           for e in a.fibers.get(x, []) for f in b.fibers.get(x, [])]

    def nb(p):
        x, (u, v) = p
        ua, ub = a.top.nbhd[a.index[(x, u)]], b.top.nbhd[b.index[(x, v)]]
        near_b: dict[int, list] = {}
        for f in bits(ub):
            near_b.setdefault(b.proj[f], []).append(b.value(f))
        return [(a.proj[e], (a.value(e), w)) for e in bits(ua) for w in near_b.get(a.proj[e], [])]

    def act(g, p):
        x, (u, v) = p
        return (a.value(a.action[(g, a.index[(x, u)])]), b.value(b.action[(g, b.index[(x, v)])]))

    sh = make_sheaf(base, pts, nb, act, f"({a.name} x {b.name})", _max_universe(a, b))
    p1 = SheafMorphism(sh, a, tuple(a.index[(x, uv[0])] for x, uv in sh.points), "p1")
    p2 = SheafMorphism(sh, b, tuple(b.index[(x, uv[1])] for x, uv in sh.points), "p2")
    return sh, p1, p2


def coproduct_sheaf(a: EquivariantSheaf, b: EquivariantSheaf) -> tuple[EquivariantSheaf, SheafMorphism, SheafMorphism]:
    """Tagged union with values (0, u) and (1, v), and the two injections."""
    base = a.base
    pts = [(x, (0, v)) for x, v in a.points] + [(x, (1, v)) for x, v in b.points]

    def nb(p):
        x, (tag, v) = p
        src = a if tag == 0 else b
        return [(src.proj[f], (tag, src.value(f))) for f in bits(src.top.nbhd[src.index[(x, v)]])]

    def act(g, p):
        x, (tag, v) = p
        src = a if tag == 0 else b
        return (tag, src.value(src.action[(g, src.index[(x, v)])]))

    sh = make_sheaf(base, pts, nb, act, f"({a.name} + {b.name})", _max_universe(a, b))
    i1 = SheafMorphism(a, sh, tuple(sh.index[(x, (0, v))] for x, v in a.points), "i1")
    i2 = SheafMorphism(b, sh, tuple(sh.index[(x, (1, v))] for x, v in b.points), "i2")
    return sh, i1, i2


def _max_universe(a, b):
    if a.universe is None or b.universe is None:
        return None
    return max(a.universe, b.universe)


def subsheaf(a: EquivariantSheaf, mask: int, name: str = "") -> tuple[EquivariantSheaf, SheafMorphism]:
    """Stable subset with the subspace topology, and its inclusion."""
    if not is_stable(a, mask):
        raise VerificationError("subset is not stable", {"subset": bits(mask)})
    keep = bits(mask)
    pos = {e: i for i, e in enumerate(keep)}
    pts = tuple(a.points[e] for e in keep)
    top = a.top.subspace(keep)
    action = {(g, pos[e]): pos[t] for (g, e), t in a.action.items() if e in pos}
    sh = EquivariantSheaf(a.base, pts, top, action, name or f"sub({a.name})",
                          universe=a.universe, origin=a.origin)
    return sh, SheafMorphism(sh, a, tuple(keep), "incl")


def equalizer(f: SheafMorphism, g: SheafMorphism) -> tuple[EquivariantSheaf, SheafMorphism]:
    if f.source is not g.source or f.target is not g.target:
        raise ValueError("parallel morphisms required")
    return subsheaf(f.source, mask_of(e for e in range(len(f.source)) if f.map[e] == g.map[e]), "eq")


def image(f: SheafMorphism) -> tuple[EquivariantSheaf, SheafMorphism]:
    return subsheaf(f.target, f.image_mask(), f"im({f.label})")


def sheaf_basic_opens(sh: EquivariantSheaf, tracked: Sequence[FormulaInContext] = ()):
    """Basic opens ⟨[x̄,ȳ|ψ], b̄⟩ generating a definable sheaf's topology.

    Yields (ψ, b̄, mask): sections x̄ = ȳ, preimages of the diagram opens and
    of the tracked opens of the base, and tracked formulas whose context
    extends the sheaf's.
    """
    from .logical import diagram_body, element_vars, parameter_tuples, uses_classical_diagrams
    g, phi = sh.origin, sh.formula
    k = len(phi.context)
    xs = phi.context
    taken = {v.name for v in xs}

    def fresh(sorts, base="y"):
        out, i = [], 0
        for s in sorts:
            while f"{base}{i}" in taken:
                i += 1
            out.append(Var(f"{base}{i}", s))
            i += 1
        return out

    ys = fresh(phi.sorts)
    sect = FormulaInContext(xs + tuple(ys), conj([Eq(x, y) for x, y in zip(xs, ys)]))
    for b in parameter_tuples(g, phi.sorts):
        yield sect, tuple(b), basic_open_sheaf(sh, sect, b)
    classical = uses_classical_diagrams(g)
    for m in g.models:
        names = element_vars(m, "y")
        names = {e: Var(f"d_{v.name}", v.sort) for e, v in names.items()}
        elems = m.elements()
        psi = FormulaInContext(xs + tuple(names[e] for e in elems), diagram_body(m, names, classical))
        params = tuple(a for _, a in elems)
        yield psi, params, basic_open_sheaf(sh, psi, params)
    for t in tracked:
        ren = {v: w for v, w in zip(t.context, fresh(t.sorts, "t"))}
        psi = FormulaInContext(xs + tuple(ren[v] for v in t.context), subst(t.body, ren))
        for b in parameter_tuples(g, t.sorts):
            yield psi, tuple(b), basic_open_sheaf(sh, psi, b)
        if t.sorts[:k] == phi.sorts and len(t.context) > k:
            ren = dict(zip(t.context[:k], xs))
            rest = fresh(t.sorts[k:], "t")
            ren.update(zip(t.context[k:], rest))
            psi = FormulaInContext(xs + tuple(rest), subst(t.body, ren))
            for b in parameter_tuples(g, t.sorts[k:]):
                yield psi, tuple(b), basic_open_sheaf(sh, psi, b)
