"""Finite Stone duality: Boolean algebras and Stone spaces, distributive lattices
and spectral spaces, and the subterminal reflection through the groupoid side.

At finite size every Stone space is discrete and every spectral space is a
finite T0 space, so both sides are small enough to compare on the nose.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product
from typing import Callable, Hashable, Sequence

from .errors import GuardError
from .logic.syntax import BOT, TOP, FormulaInContext, Or, Rel, RelationSymbol, Sequent, Signature, Theory, conj
from .report import Report
from .topology import FiniteTopology, bits, is_homeomorphism, mask_of


# --------------------------------------------------------------------------
# lattices


@dataclass
class DistributiveLattice:
    """A bounded distributive lattice on ``0..size-1`` given by its order."""
    labels: tuple
    leq: tuple[tuple[bool, ...], ...]
    name: str = ""
    join: list = field(init=False, repr=False)
    meet: list = field(init=False, repr=False)

    def __post_init__(self):
        n = self.size
        if n == 0:
            raise ValueError("a bounded lattice has at least one element")
        self.join = [[self._bound(a, b, up=True) for b in range(n)] for a in range(n)]
        self.meet = [[self._bound(a, b, up=False) for b in range(n)] for a in range(n)]
        bots = [a for a in range(n) if all(self.leq[a][b] for b in range(n))]
        tops = [a for a in range(n) if all(self.leq[b][a] for b in range(n))]
        self.bottom, self.top = bots[0], tops[0]
        for a, b, c in product(range(n), repeat=3):
            if self.meet[a][self.join[b][c]] != self.join[self.meet[a][b]][self.meet[a][c]]:
                raise ValueError(f"not distributive at {self.labels[a]}, {self.labels[b]}, {self.labels[c]}")

    @property
    def size(self) -> int:
        return len(self.labels)

    def _bound(self, a, b, up):
        rel = self.leq
        cands = [c for c in range(self.size)
                 if ((rel[a][c] and rel[b][c]) if up else (rel[c][a] and rel[c][b]))]
        best = [c for c in cands if all((rel[c][d] if up else rel[d][c]) for d in cands)]
        if len(best) != 1:
            raise ValueError(f"no {'join' if up else 'meet'} of {self.labels[a]} and {self.labels[b]}")
        return best[0]

    @classmethod
    def from_order(cls, labels: Sequence, leq: Callable[[object, object], bool], name: str = ""):
        labels = tuple(labels)
        return cls(labels, tuple(tuple(bool(leq(a, b)) for b in labels) for a in labels), name)

    @classmethod
    def of_sets(cls, family: Sequence[int], name: str = "") -> "DistributiveLattice":
        """A ring of sets (bitmasks) ordered by inclusion."""
        fam = sorted(set(family), key=lambda m: (bin(m).count("1"), m))
        return cls.from_order(fam, lambda a, b: a & ~b == 0, name)

    @classmethod
    def chain(cls, k: int) -> "DistributiveLattice":
        return cls.from_order(range(k), lambda a, b: a <= b, f"chain {k}")

    @classmethod
    def free(cls, generators: int) -> "DistributiveLattice":
        """Monotone Boolean functions in ``generators`` variables, as truth tables."""
        if generators > 3:
            raise GuardError("free distributive lattices are only built up to 3 generators")
        points = list(range(1 << generators))
        below = [[p for p in points if p & ~q == 0] for q in points]
        fns = []
        for table in range(1 << len(points)):
            if all(not (table >> p) & 1 or (table >> q) & 1 for q in points for p in below[q]):
                fns.append(table)
        return cls.from_order(fns, lambda a, b: a & ~b == 0, f"free DL on {generators}")

    def homs_to_two(self) -> list[tuple[int, ...]]:
        """Bounded lattice maps to {0 < 1}, by backtracking over elements."""
        n = self.size
        h = [-1] * n
        out = []

        def consistent(a):
            done = [b for b in range(n) if h[b] >= 0]
            for b in done:
                if self.leq[a][b] and h[a] > h[b] or self.leq[b][a] and h[b] > h[a]:
                    return False
                for c in done:
                    j, m = self.join[b][c], self.meet[b][c]
                    if h[j] >= 0 and h[j] != (h[b] | h[c]):
                        return False
                    if h[m] >= 0 and h[m] != (h[b] & h[c]):
                        return False
            return True

        order = [self.bottom, self.top] + [a for a in range(n) if a not in (self.bottom, self.top)]

        def rec(i):
            if i == n:
                out.append(tuple(h))
                return
            a = order[i]
            choices = (0,) if a == self.bottom else (1,) if a == self.top else (0, 1)
            for v in choices:
                h[a] = v
                if consistent(a):
                    rec(i + 1)
                h[a] = -1

        if self.bottom == self.top:
            return []
        rec(0)
        return sorted(out)

    def prime_filters(self) -> list[frozenset]:
        return [frozenset(a for a in range(self.size) if h[a]) for h in self.homs_to_two()]

    def join_irreducibles(self) -> list[int]:
        out = []
        for a in range(self.size):
            if a == self.bottom:
                continue
            below = [b for b in range(self.size) if self.leq[b][a] and b != a]
            if not any(self.join[b][c] == a for b in below for c in below):
                out.append(a)
        return out

    @property
    def degenerate(self) -> bool:
        """The one-element lattice, where bottom and top coincide."""
        return self.bottom == self.top

    def to_json(self) -> dict:
        return {"name": self.name, "kind": type(self).__name__, "labels": list(map(_jsonable_label, self.labels)),
                "leq": [[b for b in range(self.size) if self.leq[a][b]] for a in range(self.size)]}

    @classmethod
    def from_json(cls, data: dict) -> "DistributiveLattice":
        n = len(data["labels"])
        up = [set(r) for r in data["leq"]]
        kind = BooleanAlgebra if data.get("kind") == "BooleanAlgebra" else cls
        return kind(tuple(data["labels"]), tuple(tuple(b in up[a] for b in range(n)) for a in range(n)),
                    data.get("name", ""))

    def is_isomorphic_via(self, other: "DistributiveLattice", f: Sequence[int]) -> bool:
        n = self.size
        if len(set(f)) != n or other.size != n:
            return False
        return all(self.leq[a][b] == other.leq[f[a]][f[b]] for a in range(n) for b in range(n))


@dataclass
class BooleanAlgebra(DistributiveLattice):
    """A distributive lattice in which every element has a complement."""
    comp: list = field(init=False, repr=False)

    def __post_init__(self):
        super().__post_init__()
        self.comp = []
        for a in range(self.size):
            c = [b for b in range(self.size)
                 if self.join[a][b] == self.top and self.meet[a][b] == self.bottom]
            if not c:
                raise ValueError(f"{self.labels[a]} has no complement")
            self.comp.append(c[0])

    @classmethod
    def powerset(cls, k: int) -> "BooleanAlgebra":
        return cls.from_order(range(1 << k), lambda a, b: a & ~b == 0, f"P({k})")

    @classmethod
    def divisors(cls, n: int) -> "BooleanAlgebra":
        """Divisors of a squarefree n under divisibility."""
        ds = [d for d in range(1, n + 1) if n % d == 0]
        return cls.from_order(ds, lambda a, b: b % a == 0, f"Div({n})")

    def atoms(self) -> list[int]:
        return [a for a in range(self.size) if a != self.bottom and
                all(b in (a, self.bottom) for b in range(self.size) if self.leq[b][a])]

    def homs_to_two(self) -> list[tuple[int, ...]]:
        return [h for h in super().homs_to_two() if all(h[self.comp[a]] == 1 - h[a] for a in range(self.size))]


def _jsonable_label(x):
    return x if isinstance(x, (int, str)) else str(x)


def all_boolean_algebras(max_size: int) -> list[BooleanAlgebra]:
    """One of each isomorphism type with at most ``max_size`` elements."""
    out, k = [], 0
    while (1 << k) <= max_size:
        out.append(BooleanAlgebra.powerset(k))
        k += 1
    return out


# --------------------------------------------------------------------------
# spaces


@dataclass
class Spectrum:
    lattice: DistributiveLattice
    points: list[tuple[int, ...]]           # homomorphisms to 2
    top: FiniteTopology

    def basic_open(self, a: int) -> int:
        return mask_of(i for i, h in enumerate(self.points) if h[a])


def spectrum(L: DistributiveLattice) -> Spectrum:
    """Points are homs to 2; the topology is generated by {h : h(a) = 1}."""
    pts = L.homs_to_two()
    sub = [(f"<{L.labels[a]}>", mask_of(i for i, h in enumerate(pts) if h[a])) for a in range(L.size)]
    return Spectrum(L, pts, FiniteTopology.from_subbasis(len(pts), sub))


spec_BA = spectrum
spec_dLat = spectrum


def is_coherent_space(top: FiniteTopology) -> Report:
    """Compact opens closed under finite intersection and forming a basis."""
    rep = Report("coherent space")
    opens = set(top.opens())
    rep.add("whole space compact open", top.full in opens)
    bad = next(([a, b] for a in opens for b in opens if a & b not in opens), None)
    rep.add("closed under intersection", bad is None, bad and [bits(m) for m in bad])
    rep.add("basis", all(top.nbhd[x] in opens for x in range(top.size)))
    return rep


def compact_opens(top: FiniteTopology) -> DistributiveLattice:
    """In a finite space every open is compact."""
    return DistributiveLattice.of_sets(top.opens(), "compact opens")


def clopen_algebra(top: FiniteTopology) -> BooleanAlgebra:
    clopens = [u for u in top.opens() if top.is_open(top.full & ~u)]
    fam = sorted(set(clopens), key=lambda m: (bin(m).count("1"), m))
    return BooleanAlgebra.from_order(fam, lambda a, b: a & ~b == 0, "clopens")


def _label_index(L: DistributiveLattice) -> dict:
    return {lab: i for i, lab in enumerate(L.labels)}


def lattice_round_trip(L: DistributiveLattice) -> Report:
    """a ↦ â is an isomorphism onto the compact opens (clopens for a BA)."""
    rep = Report(f"round trip {L.name or 'lattice'}")
    sp = spectrum(L)
    back = clopen_algebra(sp.top) if isinstance(L, BooleanAlgebra) else compact_opens(sp.top)
    idx = _label_index(back)
    hats = [sp.basic_open(a) for a in range(L.size)]
    missing = [bits(m) for m in hats if m not in idx]
    rep.add("hat lands in compact opens", not missing, missing[:1])
    if missing:
        return rep
    f = [idx[m] for m in hats]
    rep.add("bijective", len(set(f)) == L.size == back.size,
            {"elements": L.size, "compact opens": back.size})
    rep.add("order isomorphism", L.is_isomorphic_via(back, f))
    return rep


def space_round_trip(top: FiniteTopology, boolean: bool = False) -> Report:
    """x ↦ {U : x ∈ U} into the spectrum of the (clopen or compact open) lattice."""
    rep = Report("space round trip")
    L = clopen_algebra(top) if boolean else compact_opens(top)
    sp = spectrum(L)
    idx = {h: i for i, h in enumerate(sp.points)}
    f = []
    for x in range(top.size):
        h = tuple(int((u >> x) & 1) for u in L.labels)
        if h not in idx:
            rep.add("points are prime filters", False, {"point": x})
            return rep
        f.append(idx[h])
    rep.add("points are prime filters", True)
    rep.add("point count", len(sp.points) == top.size, {"space": top.size, "spectrum": len(sp.points)})
    c = is_homeomorphism(f, top, sp.top)
    rep.add("homeomorphism", c.ok, c.witness)
    return rep


def ba_round_trip(B: BooleanAlgebra) -> Report:
    rep = lattice_round_trip(B)
    rep.add("points = atoms", len(spectrum(B).points) == len(B.atoms()),
            {"points": len(spectrum(B).points), "atoms": len(B.atoms())})
    return rep


def finite_t0_spaces(size: int) -> list[FiniteTopology]:
    """All T0 topologies on ``size`` points given as partial orders (specialization)."""
    if size > 4:
        raise GuardError("T0 spaces are only listed up to 4 points")
    pairs = [(a, b) for a in range(size) for b in range(size) if a != b]
    out = []
    for choice in product((0, 1), repeat=len(pairs)):
        le = {(a, a) for a in range(size)} | {p for p, c in zip(pairs, choice) if c}
        if any((b, a) in le for a, b in le if a != b):
            continue
        if any((a, c) not in le for a, b in le for b2, c in le if b == b2):
            continue
        nbhd = [mask_of(b for b in range(size) if (a, b) in le) for a in range(size)]
        out.append(FiniteTopology.from_subbasis(size, nbhd))
    return out


# --------------------------------------------------------------------------
# Boolean algebras as propositional theories


def ba_theory(B: BooleanAlgebra) -> Theory:
    """One proposition per element, with axioms forcing models to be homs to 2."""
    names = [f"p{i}" for i in range(B.size)]
    sig = Signature((), (), tuple(RelationSymbol(n, ()) for n in names))
    p = [Rel(n) for n in names]
    ax = [Sequent((), p[B.bottom], BOT), Sequent((), TOP, p[B.top])]
    for a in range(B.size):
        ax.append(Sequent((), conj([p[a], p[B.comp[a]]]), BOT))
        ax.append(Sequent((), TOP, Or((p[a], p[B.comp[a]]))))
    for a, b in combinations(range(B.size), 2):
        ax.append(Sequent((), conj([p[a], p[b]]), p[B.meet[a][b]]))
        if B.leq[a][b]:
            ax.append(Sequent((), p[a], p[b]))
        if B.leq[b][a]:
            ax.append(Sequent((), p[b], p[a]))
    return Theory(sig, tuple(ax), name=f"theory of {B.name or 'a Boolean algebra'}")


def sub1_reflection(c) -> DistributiveLattice:
    """Subobjects of the terminal formal sheaf: the stable opens of its total space."""
    from .duality import FormCategory, stable_opens
    from .sheaves import terminal_sheaf
    h = c.h if isinstance(c, FormCategory) else c
    one = c.terminal() if isinstance(c, FormCategory) else terminal_sheaf(h, 1)
    return DistributiveLattice.of_sets(stable_opens(one), "Sub(1)")


def ba_sub1_round_trip(B: BooleanAlgebra) -> Report:
    """Sub(1) of the formal sheaves on Mod(T_B) recovers B, via a ↦ ⟦ | p_a⟧."""
    from .logical import logical_groupoid
    from .sheaves import definable_sheaf
    rep = Report(f"Sub(1) of {B.name}")
    T = ba_theory(B)
    g = logical_groupoid(T, 1)
    rep.add("models = atoms", g.n_objects == len(B.atoms()), {"models": g.n_objects, "atoms": len(B.atoms())})
    subs = sub1_reflection(g.gpd)
    idx = _label_index(subs)
    f = []
    for a in range(B.size):
        sh = definable_sheaf(g, FormulaInContext((), Rel(f"p{a}")))
        m = mask_of(x for x, _ in sh.points)
        if m not in idx:
            rep.add("propositions are subterminal", False, {"element": B.labels[a]})
            return rep
        f.append(idx[m])
    rep.add("propositions are subterminal", True)
    rep.add("isomorphism", B.is_isomorphic_via(subs, f), {"B": B.size, "Sub(1)": subs.size})
    return rep
