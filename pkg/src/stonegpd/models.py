"""Finite models over an atom universe: enumeration, satisfaction, maps, groupoid.

Carriers are subsets of ``{0..n-1}`` (possibly empty). Formulas are compiled
to closures evaluated in three-valued (Kleene) logic so the same code serves
complete models and the partial structures built during enumeration.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Iterator, Sequence

from .errors import GuardError
from .groupoid import TopGroupoid
from .logic.syntax import (And, App, Bot, Eq, Exists, Forall, Formula, FormulaInContext,
                           Implies, Neq, Not, Or, Rel, SortCheckError, Term, Theory, Top, Var,
                           symbols_used)

DEFAULT_CEILING = 10_000_000
# composable pairs the groupoid builder will tabulate before giving up
COMPOSITION_CEILING = 5_000_000


@dataclass(frozen=True)
class AtomUniverse:
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("atom universe needs n >= 1")

    @property
    def atoms(self) -> range:
        return range(self.n)


# --------------------------------------------------------------------------
# structures


class _Structure:
    """Lookup interface shared by models and partial structures.

    ``C[sort]`` carrier tuple; ``R[name](cell)`` -> bool or None;
    ``F[name]`` dict args -> value; ``NE[sort](pair)`` -> bool or None.
    """
    C: dict
    R: dict
    F: dict
    NE: dict


@dataclass(frozen=True, eq=False)
class Model(_Structure):
    signature: object
    carriers: tuple[tuple[int, ...], ...]
    relations: tuple[frozenset, ...]
    functions: tuple[tuple[tuple[tuple[int, ...], int], ...], ...]
    neq: tuple[frozenset | None, ...]

    def __post_init__(self):
        sig = self.signature
        object.__setattr__(self, "C", dict(zip(sig.sorts, self.carriers)))
        object.__setattr__(self, "rel_tables", {r.name: t for r, t in zip(sig.relations, self.relations)})
        object.__setattr__(self, "fn_tables", {f.name: dict(t) for f, t in zip(sig.functions, self.functions)})
        object.__setattr__(self, "R", {n: t.__contains__ for n, t in self.rel_tables.items()})
        object.__setattr__(self, "F", self.fn_tables)
        ne = {}
        for s, t in zip(sig.sorts, self.neq):
            if t is not None:
                ne[s] = t.__contains__
        object.__setattr__(self, "NE", ne)

    @property
    def key(self) -> tuple:
        return _model_key(self.signature, self.carriers, self.relations, self.functions, self.neq)

    def __eq__(self, other):
        return isinstance(other, Model) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def carrier(self, sort: str) -> tuple[int, ...]:
        return self.C[sort]

    def rel(self, name: str) -> frozenset:
        return self.rel_tables[name]

    def fn(self, name: str) -> dict:
        return self.fn_tables[name]

    def neq_table(self, sort: str) -> frozenset | None:
        return self.neq[self.signature.sorts.index(sort)]

    def elements(self) -> list[tuple[str, int]]:
        return [(s, a) for s in self.signature.sorts for a in self.C[s]]

    def size(self) -> int:
        return sum(len(c) for c in self.carriers)

    def describe(self) -> str:
        sig = self.signature
        parts = []
        for s, c in zip(sig.sorts, self.carriers):
            parts.append(f"{s}={{{','.join(map(str, c))}}}")
        for r, t in zip(sig.relations, self.relations):
            if r.args:
                parts.append(f"{r.name}={{{','.join('(' + ','.join(map(str, x)) + ')' for x in sorted(t))}}}")
            else:
                parts.append(f"{r.name}={'T' if t else 'F'}")
        for f, t in zip(sig.functions, self.functions):
            parts.append(f"{f.name}=[{', '.join(f'{a}->{v}' for a, v in t)}]")
        return " ".join(parts)

    def to_json(self) -> dict:
        sig = self.signature
        return {
            "carriers": {s: list(c) for s, c in zip(sig.sorts, self.carriers)},
            "relations": {r.name: sorted(list(x) for x in t) for r, t in zip(sig.relations, self.relations)},
            "functions": {f.name: [[list(a), v] for a, v in t] for f, t in zip(sig.functions, self.functions)},
            "inequality": {s: sorted(list(x) for x in t)
                           for s, t in zip(sig.sorts, self.neq) if t is not None},
        }

    def satisfies_theory(self, theory: Theory) -> list[str]:
        """Names of violated axioms (empty when the model is a model)."""
        return [str(ax) for ax in theory.axioms if not sequent_holds(self, ax)]


def _cells(carriers: dict, sorts: Sequence[str]) -> list[tuple[int, ...]]:
    return list(product(*(carriers[s] for s in sorts)))


def _bitmask(cells: list, table) -> int:
    return sum(1 << i for i, c in enumerate(cells) if c in table)


def _model_key(sig, carriers, relations, functions, neq) -> tuple:
    cmap = dict(zip(sig.sorts, carriers))
    ck = tuple(sum(1 << a for a in c) for c in carriers)
    rk = tuple(_bitmask(_cells(cmap, r.args), t) for r, t in zip(sig.relations, relations))
    fk = tuple(tuple(v for _, v in t) for t in functions)
    nk = tuple(-1 if t is None else _bitmask(_cells(cmap, (s, s)), t) for s, t in zip(sig.sorts, neq))
    return ck, rk, fk, nk


# --------------------------------------------------------------------------
# compiled three-valued evaluation

_COMPILED: dict = {}


def _compile_term(t: Term, slots: dict[Var, int]):
    if isinstance(t, Var):
        if t not in slots:
            raise SortCheckError(f"unbound variable {t.name}")
        i = slots[t]
        return lambda m, env: env[i]
    name = t.fn
    args = [_compile_term(a, slots) for a in t.args]
    if not args:
        return lambda m, env: m.F[name].get(())
    if len(args) == 1:
        a0 = args[0]

        def ev1(m, env):
            v = a0(m, env)
            return None if v is None else m.F[name].get((v,))
        return ev1

    def ev(m, env):
        vals = tuple(a(m, env) for a in args)
        if None in vals:
            return None
        return m.F[name].get(vals)
    return ev


def _compile(f: Formula, slots: dict[Var, int], depth: int):
    if isinstance(f, Top):
        return lambda m, env: True
    if isinstance(f, Bot):
        return lambda m, env: False
    if isinstance(f, Eq):
        l, r = _compile_term(f.left, slots), _compile_term(f.right, slots)

        def eq(m, env):
            a, b = l(m, env), r(m, env)
            if a is None or b is None:
                return None
            return a == b
        return eq
    if isinstance(f, Neq):
        l, r = _compile_term(f.left, slots), _compile_term(f.right, slots)
        sort = f.left.sort

        def ne(m, env):
            a, b = l(m, env), r(m, env)
            if a is None or b is None:
                return None
            return m.NE[sort]((a, b))
        return ne
    if isinstance(f, Rel):
        name = f.name
        args = [_compile_term(a, slots) for a in f.args]
        if not args:
            return lambda m, env: m.R[name](())

        def rel(m, env):
            vals = tuple(a(m, env) for a in args)
            if None in vals:
                return None
            return m.R[name](vals)
        return rel
    if isinstance(f, And):
        parts = [_compile(p, slots, depth) for p in f.parts]

        def conj(m, env):
            unknown = False
            for p in parts:
                v = p(m, env)
                if v is False:
                    return False
                if v is None:
                    unknown = True
            return None if unknown else True
        return conj
    if isinstance(f, Or):
        parts = [_compile(p, slots, depth) for p in f.parts]

        def disj(m, env):
            unknown = False
            for p in parts:
                v = p(m, env)
                if v is True:
                    return True
                if v is None:
                    unknown = True
            return None if unknown else False
        return disj
    if isinstance(f, Not):
        b = _compile(f.body, slots, depth)

        def neg(m, env):
            v = b(m, env)
            return None if v is None else not v
        return neg
    if isinstance(f, Implies):
        return _compile(Or((Not(f.left), f.right)), slots, depth)
    if isinstance(f, (Exists, Forall)):
        i = depth
        inner = {**slots, f.var: i}
        body = _compile(f.body, inner, depth + 1)
        sort = f.var.sort
        want = isinstance(f, Exists)

        def quant(m, env):
            unknown = False
            for a in m.C[sort]:
                env[i] = a
                v = body(m, env)
                if v is want:
                    return want
                if v is None:
                    unknown = True
            return None if unknown else (not want)
        return quant
    raise TypeError(f"not a formula: {f!r}")


def _quant_depth(f: Formula) -> int:
    from .logic.syntax import children
    own = 1 if isinstance(f, (Exists, Forall)) else 0
    return own + max((_quant_depth(c) for c in children(f)), default=0)


def compile_formula(context: Sequence[Var], f: Formula):
    """Closure ``(structure, env_tuple) -> True | False | None``."""
    key = (tuple(context), f)
    fn = _COMPILED.get(key)
    if fn is None:
        k = len(context)
        slots = {v: i for i, v in enumerate(context)}
        body = _compile(f, slots, k)
        pad = [None] * _quant_depth(f)

        def fn(m, env, _body=body, _pad=pad):
            return _body(m, list(env) + _pad)
        _COMPILED[key] = fn
    return fn


def _check_env(m: Model, context: Sequence[Var], env: Sequence[int]) -> None:
    if len(env) != len(context):
        raise SortCheckError(f"environment has {len(env)} values for {len(context)} variables")
    for v, a in zip(context, env):
        if a not in m.C[v.sort]:
            raise SortCheckError(f"value {a} for {v.name} is not in the carrier of {v.sort}")


def satisfies(m: Model, f: FormulaInContext, env: Sequence[int]) -> bool:
    _check_env(m, f.context, env)
    return bool(compile_formula(f.context, f.body)(m, tuple(env)))


def definable_set(m: Model, f: FormulaInContext) -> frozenset[tuple[int, ...]]:
    ev = compile_formula(f.context, f.body)
    return frozenset(c for c in _cells(m.C, f.sorts) if ev(m, c))


def sequent_holds(m: _Structure, seq) -> bool | None:
    """Three-valued: False iff some instance has antecedent true and succedent false."""
    ante = compile_formula(seq.context, seq.antecedent)
    succ = compile_formula(seq.context, seq.succedent)
    unknown = False
    for env in product(*(m.C[v.sort] for v in seq.context)):
        a = ante(m, env)
        if a is False:
            continue
        s = succ(m, env)
        if s is True:
            continue
        if a is True and s is False:
            return False
        unknown = True
    return None if unknown else True


# --------------------------------------------------------------------------
# enumeration


class _Partial(_Structure):
    def __init__(self, carriers: dict):
        self.C = carriers
        self.R = {}
        self.F = {}
        self.NE = {}
        self.rtab: dict[str, dict] = {}
        self.netab: dict[str, dict] = {}


@dataclass
class EnumerationStats:
    nodes: int = 0
    carriers: int = 0


def enumerate_models(theory: Theory, universe: AtomUniverse | int,
                     ceiling: int = DEFAULT_CEILING, stats: EnumerationStats | None = None) -> list[Model]:
    """All T-structures over carriers inside the universe, in canonical order.

    Classical connectives are evaluated classically. When a sort has both
    inequality axioms its ≠ table is fixed to the complement of the diagonal;
    otherwise ≠ is enumerated like any binary relation. ``ceiling`` bounds the
    number of search nodes (cell assignments tried).
    """
    if isinstance(universe, int):
        universe = AtomUniverse(universe)
    sig = theory.signature
    stats = stats if stats is not None else EnumerationStats()
    fixed_neq = [s for s in sig.sorts if theory.sort_is_decidable(s)]
    free_neq = [s for s in sig.sorts if sig.has_inequality(s) and s not in fixed_neq]

    # assignment units, in order
    units: list[tuple[str, str]] = [("fun", f.name) for f in sig.functions]
    units += [("neq", s) for s in free_neq]
    units += [("rel", r.name) for r in sig.relations]
    position = {u: i for i, u in enumerate(units)}
    # axioms become checkable once the last symbol they mention is being assigned
    checks: list[list] = [[] for _ in units]
    base_checks = []
    for ax in theory.axioms:
        used = symbols_used(ax.antecedent) | symbols_used(ax.succedent)
        used = {u for u in used if not (u[0] == "neq" and u[1] in fixed_neq)}
        if not used:
            base_checks.append(ax)
        else:
            checks[max(position[u] for u in used)].append(ax)

    found: list[Model] = []
    n = universe.n
    subsets = [tuple(a for a in range(n) if (mask >> a) & 1) for mask in range(1 << n)]

    for carrier_choice in product(subsets, repeat=len(sig.sorts)):
        stats.carriers += 1
        carriers = dict(zip(sig.sorts, carrier_choice))
        part = _Partial(carriers)
        for s in fixed_neq:
            c = carriers[s]
            tab = frozenset((a, b) for a in c for b in c if a != b)
            part.NE[s] = tab.__contains__
        if any(sequent_holds(part, ax) is False for ax in base_checks):
            continue
        # cells and value domains per unit
        plan = []
        for kind, name in units:
            if kind == "fun":
                f = sig.function(name)
                cells = _cells(carriers, f.args)
                values = carriers[f.result]
                if cells and not values:
                    plan = None
                    break
                part.F[name] = {}
                plan.append((kind, name, cells, values))
            elif kind == "rel":
                r = sig.relation(name)
                cells = _cells(carriers, r.args)
                tab: dict = {}
                part.rtab[name] = tab
                part.R[name] = tab.get
                plan.append((kind, name, cells, (False, True)))
            else:
                cells = _cells(carriers, (name, name))
                tab = {}
                part.netab[name] = tab
                part.NE[name] = tab.get
                plan.append((kind, name, cells, (False, True)))
        if plan is None:
            continue

        def table_of(u: int):
            kind, name, _, _ = plan[u]
            if kind == "fun":
                return part.F[name]
            if kind == "rel":
                return part.rtab[name]
            return part.netab[name]

        def search(u: int, c: int):
            if u == len(plan):
                found.append(_freeze(sig, carriers, part, fixed_neq))
                return
            kind, name, cells, values = plan[u]
            if c == len(cells):
                if c == 0 and any(sequent_holds(part, ax) is False for ax in checks[u]):
                    return
                search(u + 1, 0)
                return
            tab = table_of(u)
            cell = cells[c]
            for v in values:
                stats.nodes += 1
                if stats.nodes > ceiling:
                    raise GuardError(f"model enumeration exceeded {ceiling} search nodes")
                tab[cell] = v
                if all(sequent_holds(part, ax) is not False for ax in checks[u]):
                    search(u, c + 1)
            del tab[cell]

        search(0, 0)
    found.sort(key=lambda m: m.key)
    return found


def _freeze(sig, carriers, part: _Partial, fixed_neq) -> Model:
    rels = tuple(frozenset(c for c, v in part.rtab[r.name].items() if v) for r in sig.relations)
    funs = tuple(tuple(sorted(part.F[f.name].items())) for f in sig.functions)
    neq = []
    for s in sig.sorts:
        if s in fixed_neq:
            c = carriers[s]
            neq.append(frozenset((a, b) for a in c for b in c if a != b))
        elif s in part.netab:
            neq.append(frozenset(c for c, v in part.netab[s].items() if v))
        else:
            neq.append(None)
    return Model(sig, tuple(carriers[s] for s in sig.sorts), rels, funs, tuple(neq))


def make_model(theory: Theory, carriers: dict[str, Sequence[int]],
               relations: dict[str, Sequence] | None = None,
               functions: dict[str, dict] | None = None,
               neq: dict[str, Sequence] | None = None, check: bool = True) -> Model:
    """Build a model by hand (fixtures); ≠ defaults to the complement of the diagonal."""
    sig = theory.signature
    relations, functions, neq = relations or {}, functions or {}, neq or {}
    cars = tuple(tuple(sorted(carriers.get(s, ()))) for s in sig.sorts)
    rels = tuple(frozenset(tuple(x) if not isinstance(x, tuple) else x for x in relations.get(r.name, ()))
                 for r in sig.relations)
    funs = tuple(tuple(sorted(functions.get(f.name, {}).items())) for f in sig.functions)
    ne = []
    for s, c in zip(sig.sorts, cars):
        if not sig.has_inequality(s):
            ne.append(None)
        elif s in neq:
            ne.append(frozenset(map(tuple, neq[s])))
        else:
            ne.append(frozenset((a, b) for a in c for b in c if a != b))
    m = Model(sig, cars, rels, funs, tuple(ne))
    if check:
        bad = m.satisfies_theory(theory)
        if bad:
            raise ValueError(f"not a model: violates {bad[0]}")
    return m


# --------------------------------------------------------------------------
# homomorphisms


@dataclass(frozen=True)
class ModelMap:
    source: int
    target: int
    # per sort, images of the source carrier in carrier order
    components: tuple[tuple[int, ...], ...]
    is_iso: bool = False

    def mapping(self, models: Sequence[Model]) -> dict[tuple[str, int], int]:
        m = models[self.source]
        return {(s, a): b for s, car, comp in zip(m.signature.sorts, m.carriers, self.components)
                for a, b in zip(car, comp)}


class _HomProblem:
    """Constraints of a source model, indexed by the last element they mention."""

    def __init__(self, a: Model, first: Sequence[tuple[str, int]] = ()):
        sig = a.signature
        self.a = a
        self.elems = list(first) + [e for e in a.elements() if e not in first]
        pos = {e: i for i, e in enumerate(self.elems)}
        self.pos = pos
        self.cons: list[list] = [[] for _ in self.elems]
        self.ground: list = []
        for r, t in zip(sig.relations, a.relations):
            for fact in t:
                ids = tuple(pos[(s, x)] for s, x in zip(r.args, fact))
                self._add(("rel", r.name, ids))
        for s, t in zip(sig.sorts, a.neq):
            if t is None:
                continue
            for x, y in t:
                self._add(("neq", s, (pos[(s, x)], pos[(s, y)])))
        for f, t in zip(sig.functions, a.functions):
            for args, v in t:
                ids = tuple(pos[(s, x)] for s, x in zip(f.args, args))
                self._add(("fun", f.name, ids + (pos[(f.result, v)],)))

    def _add(self, c):
        ids = c[2]
        if ids:
            self.cons[max(ids)].append(c)
        else:
            self.ground.append(c)


def _ok(c, img, b: Model) -> bool:
    kind, name, ids = c
    if kind == "rel":
        return tuple(img[i] for i in ids) in b.rel_tables[name]
    if kind == "neq":
        t = b.neq_table(name)
        return t is not None and (img[ids[0]], img[ids[1]]) in t
    vals = tuple(img[i] for i in ids[:-1])
    return b.fn_tables[name].get(vals) == img[ids[-1]]


def iter_homs(a: Model, b: Model, only_isos: bool = False, injective: bool = False,
              problem: _HomProblem | None = None, limit: int = DEFAULT_CEILING,
              collapse: bool = False) -> Iterator[tuple]:
    """Yield images (aligned with the problem's element order, by default
    ``a.elements()``) of all homomorphisms a → b.

    ``collapse`` keeps only maps sending the first two elements to the same atom.
    """
    sig = a.signature
    if only_isos:
        if any(len(x) != len(y) for x, y in zip(a.carriers, b.carriers)):
            return
        if any(len(x) != len(y) for x, y in zip(a.relations, b.relations)):
            return
        if any((x is None) != (y is None) or (x is not None and len(x) != len(y))
               for x, y in zip(a.neq, b.neq)):
            return
        injective = True
    p = problem or _HomProblem(a)
    if not all(_ok(c, (), b) for c in p.ground):
        return
    elems = p.elems
    choices = [b.C[s] for s, _ in elems]
    img: list[int] = [0] * len(elems)
    used: dict[str, set] = {s: set() for s in sig.sorts}
    counter = [0]

    def rec(i):
        if i == len(elems):
            yield tuple(img)
            return
        s = elems[i][0]
        for v in choices[i]:
            if collapse and i == 1 and v != img[0]:
                continue
            if injective and v in used[s]:
                continue
            counter[0] += 1
            if counter[0] > limit:
                raise GuardError(f"homomorphism search exceeded {limit} nodes")
            img[i] = v
            if all(_ok(c, img, b) for c in p.cons[i]):
                if injective:
                    used[s].add(v)
                yield from rec(i + 1)
                if injective:
                    used[s].discard(v)

    yield from rec(0)


def _to_components(a: Model, images: tuple) -> tuple[tuple[int, ...], ...]:
    out, k = [], 0
    for c in a.carriers:
        out.append(tuple(images[k:k + len(c)]))
        k += len(c)
    return tuple(out)


def enumerate_maps(models: Sequence[Model], i: int, j: int, only_isos: bool = False,
                   limit: int = DEFAULT_CEILING) -> list[ModelMap]:
    """All homomorphisms (or isomorphisms) models[i] → models[j], canonical order."""
    a, b = models[i], models[j]
    if a.signature != b.signature:
        raise SortCheckError("models over different signatures")
    maps = [ModelMap(i, j, _to_components(a, img), only_isos)
            for img in iter_homs(a, b, only_isos, limit=limit)]
    if not only_isos:
        maps = [ModelMap(m.source, m.target, m.components, _is_iso(a, b, m)) for m in maps]
    return sorted(maps, key=lambda m: m.components)


def _is_iso(a: Model, b: Model, m: ModelMap) -> bool:
    for ca, cb, comp in zip(a.carriers, b.carriers, m.components):
        if len(ca) != len(cb) or len(set(comp)) != len(comp):
            return False
    if any(len(x) != len(y) for x, y in zip(a.relations, b.relations)):
        return False
    return all((x is None) == (y is None) and (x is None or len(x) == len(y))
               for x, y in zip(a.neq, b.neq))


# --------------------------------------------------------------------------
# groupoid of models


@dataclass(frozen=True)
class GroupoidOfModels:
    theory: Theory
    universe: AtomUniverse
    models: tuple[Model, ...]
    arrows: tuple[ModelMap, ...]
    gpd: TopGroupoid = field(repr=False)

    # convenience pass-throughs
    @property
    def n_objects(self) -> int:
        return len(self.models)

    @property
    def n_arrows(self) -> int:
        return len(self.arrows)

    @property
    def src(self):
        return self.gpd.src

    @property
    def tgt(self):
        return self.gpd.tgt

    @property
    def obj_top(self):
        return self.gpd.obj_top

    @property
    def arr_top(self):
        return self.gpd.arr_top

    @property
    def sorts(self) -> tuple[str, ...]:
        return self.theory.signature.sorts

    def index_of(self, m: Model) -> int:
        idx = getattr(self, "_index", None)
        if idx is None:
            idx = {x.key: i for i, x in enumerate(self.models)}
            object.__setattr__(self, "_index", idx)
        return idx[m.key]

    def find_model(self, m: Model) -> int | None:
        try:
            return self.index_of(m)
        except KeyError:
            return None

    def apply(self, g: int, sort: str, atom: int) -> int:
        """Image of ``atom`` (of ``sort``) under arrow ``g``."""
        arrow = self.arrows[g]
        k = self.sorts.index(sort)
        car = self.models[arrow.source].carriers[k]
        return arrow.components[k][car.index(atom)]

    def apply_tuple(self, g: int, sorts: Sequence[str], values: Sequence[int]) -> tuple[int, ...]:
        return tuple(self.apply(g, s, a) for s, a in zip(sorts, values))

    def arrow_index(self, source: int, target: int, components) -> int:
        idx = getattr(self, "_arrow_index", None)
        if idx is None:
            idx = {(a.source, a.target, a.components): i for i, a in enumerate(self.arrows)}
            object.__setattr__(self, "_arrow_index", idx)
        return idx[(source, target, tuple(components))]

    def with_topology(self, obj_top, arr_top) -> "GroupoidOfModels":
        return GroupoidOfModels(self.theory, self.universe, self.models, self.arrows,
                                self.gpd.with_topology(obj_top, arr_top))

    def to_json(self) -> dict:
        return {
            "theory": self.theory.name,
            "bound": self.universe.n,
            "objects": [m.to_json() for m in self.models],
            "arrows": [{"source": a.source, "target": a.target,
                        "components": {s: dict(zip(map(str, self.models[a.source].carriers[k]), c))
                                       for k, (s, c) in enumerate(zip(self.sorts, a.components))}}
                       for a in self.arrows],
        }

    def to_dot(self) -> str:
        lines = ["digraph G {"]
        for i, m in enumerate(self.models):
            lines.append(f'  m{i} [label="{i}: {m.describe()}"];')
        for i, a in enumerate(self.arrows):
            if a.source != a.target:
                lines.append(f'  m{a.source} -> m{a.target} [label="g{i}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _iso_invariant(m: Model) -> tuple:
    return (tuple(len(c) for c in m.carriers), tuple(len(t) for t in m.relations),
            tuple(-1 if t is None else len(t) for t in m.neq))


def build_groupoid(theory: Theory, universe: AtomUniverse | int, ceiling: int = DEFAULT_CEILING,
                   models: Sequence[Model] | None = None) -> GroupoidOfModels:
    if isinstance(universe, int):
        universe = AtomUniverse(universe)
    models = tuple(models if models is not None else enumerate_models(theory, universe, ceiling))
    classes: dict[tuple, list[int]] = {}
    for i, m in enumerate(models):
        classes.setdefault(_iso_invariant(m), []).append(i)
    arrows: list[ModelMap] = []
    pairs = 0
    for members in classes.values():
        problems = {i: _HomProblem(models[i]) for i in members}
        for i in members:
            before = len(arrows)
            for j in members:
                for img in iter_homs(models[i], models[j], True, problem=problems[i], limit=ceiling):
                    arrows.append(ModelMap(i, j, _to_components(models[i], img), True))
            if i == members[0]:
                # a class of k isomorphic objects with r arrows out of each has k·r² composable pairs
                pairs += len(members) * (len(arrows) - before) ** 2
                if pairs > COMPOSITION_CEILING:
                    raise GuardError(f"over {COMPOSITION_CEILING} composable pairs expected")
    arrows.sort(key=lambda a: (a.source, a.target, a.components))
    sorts = theory.signature.sorts
    maps = [a.mapping(models) for a in arrows]
    triples = [(a.source, a.target, a.components) for a in arrows]

    def comp_components(gi: int, f: ModelMap):
        gm = maps[gi]
        return tuple(tuple(gm[(s, b)] for b in f.components[k]) for k, s in enumerate(sorts))

    index = {t: i for i, t in enumerate(triples)}
    src = tuple(a.source for a in arrows)
    tgt = tuple(a.target for a in arrows)
    ident = []
    for x, m in enumerate(models):
        ident.append(index[(x, x, m.carriers)])
    inv = []
    for ai, a in enumerate(arrows):
        am = maps[ai]
        back = {(s, b): x for (s, x), b in am.items()}
        tm = models[a.target]
        comps = tuple(tuple(back[(s, b)] for b in car) for s, car in zip(sorts, tm.carriers))
        inv.append(index[(a.target, a.source, comps)])
    by_src: dict[int, list[int]] = {}
    for i, a in enumerate(arrows):
        by_src.setdefault(a.source, []).append(i)
    comp = {}
    for fi, f in enumerate(arrows):
        for gi in by_src.get(f.target, ()):
            g = arrows[gi]
            comp[(gi, fi)] = index[(f.source, g.target, comp_components(gi, f))]
    gpd = TopGroupoid(len(models), src, tgt, tuple(ident), tuple(inv), comp)
    return GroupoidOfModels(theory, universe, models, tuple(arrows), gpd)


# --------------------------------------------------------------------------
# semantic decidability


@dataclass(frozen=True)
class NonInjective:
    source: int
    target: int
    sort: str
    images: tuple[int, ...]
    collapsed: tuple[int, int]

    def __str__(self):
        return (f"homomorphism {self.source}->{self.target} identifies atoms "
                f"{self.collapsed[0]} and {self.collapsed[1]} of sort {self.sort}")


def check_semantic_decidability(theory: Theory, universe: AtomUniverse | int,
                                ceiling: int = DEFAULT_CEILING,
                                models: Sequence[Model] | None = None,
                                first_only: bool = False, all_models: bool = False) -> list[NonInjective]:
    """Non-injective homomorphism components between enumerated models.

    A collapsing map a → b exists iff one exists between any isomorphic
    copies, and every model is isomorphic to one whose carriers are initial
    segments {0..k-1}. By default only those models are searched;
    ``all_models`` searches every pair.
    """
    if isinstance(universe, int):
        universe = AtomUniverse(universe)
    models = list(models if models is not None else enumerate_models(theory, universe, ceiling))
    sorts = theory.signature.sorts
    if all_models:
        idx = list(range(len(models)))
    else:
        idx = [i for i, m in enumerate(models) if all(c == tuple(range(len(c))) for c in m.carriers)]
    # a homomorphism preserves ≠, so x ≠ y can only collapse onto a reflexive pair
    loops = {s: [j for j in idx if (t := models[j].neq_table(s)) is not None and any(u == v for u, v in t)]
             for s in sorts}
    report: list[NonInjective] = []
    for i in idx:
        a = models[i]
        for s in sorts:
            apart = a.neq_table(s) or frozenset()
            for x, y in combinations(a.C[s], 2):
                targets = loops[s] if (x, y) in apart else idx
                if not targets:
                    continue
                p = _HomProblem(a, [(s, x), (s, y)])
                for j in targets:
                    b = models[j]
                    img = next(iter_homs(a, b, problem=p, limit=ceiling, collapse=True), None)
                    if img is None:
                        continue
                    where = dict(zip(p.elems, img))
                    report.append(NonInjective(i, j, s, tuple(where[(s, c)] for c in a.C[s]), (x, y)))
                    if first_only:
                        return report
    return report
